#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "plspath/dataset.hpp"
#include "plspath/model_spec.hpp"

namespace plspath {

struct EstimationConfig {
  double tolerance = 1e-7;  // max absolute outer-weight change at convergence
  int max_iterations = 300;
};

// Fitted PLS path model. Second-order constructs are estimated with the
// repeated-indicators approach: they form an extra block holding the union of
// their components' indicator columns, and component -> second-order edges are
// appended to the inner structural graph.
struct PlsEstimate {
  struct Block {
    std::string name;
    std::vector<Eigen::Index> cols;  // indices into indicator_names
    bool is_second_order = false;
  };
  struct Path {
    std::string source;
    std::string target;
    double beta = 0.0;
  };

  std::vector<std::string> indicator_names;  // column order of the training data
  std::vector<Block> blocks;                 // first-order blocks, then second-order
  std::vector<Eigen::VectorXd> block_weights;   // per block, applied to standardized data
  std::vector<Eigen::VectorXd> block_loadings;  // corr(indicator, own block score)
  Eigen::MatrixXd scores;                       // n x C, mean 0 / variance 1 columns
  std::vector<Path> paths;                 // declared structural edges
  std::vector<Path> second_order_weights;  // component -> second-order coefficients
  std::vector<ModelSpec::Edge> inner_edges;  // declared edges + repeated-indicator edges
  Eigen::VectorXd train_mean;  // per indicator
  Eigen::VectorXd train_sd;
  Eigen::MatrixXd indicator_corr;  // observed training indicator correlations
  Eigen::MatrixXd latent_corr;     // correlations among block scores
  std::size_t n_train = 0;
  int iterations = 0;
  bool converged = false;
  double tolerance_reached = 0.0;
  EstimationConfig config;

  Eigen::Index block_index(const std::string& construct) const;  // throws EstimationError
  Eigen::VectorXd score_of(const std::string& construct) const;
  std::vector<std::string> inner_parents(const std::string& construct) const;
  double path_coefficient(const std::string& source, const std::string& target) const;
};

// Iterative PLS path-model estimation: reflective Mode A outer updates, path
// weighting scheme inner approximation, final paths by per-target OLS on the
// latent scores. Loading signs are fixed so each block's loading sum is
// nonnegative. Non-convergence is reported via converged=false, not an error.
PlsEstimate estimate(const ValidatedSample& sample, const EstimationConfig& config = {});

// Projects new data to latent scores with the training transforms (training
// means/deviations and outer weights); no re-fitting. Columns are bound by
// name. Returns an n x C matrix in the estimate's block order.
Eigen::MatrixXd apply_estimate(const PlsEstimate& estimate, const Dataset& dataset);

struct FittedScores {
  std::vector<std::string> parents;
  Eigen::VectorXd betas;
  Eigen::VectorXd fitted;
  Eigen::VectorXd residual;
  double rss = 0.0;
  double tss = 0.0;
};

// Structural fitted values and residuals of an endogenous construct:
// fitted = parents' scores x path coefficients.
FittedScores predicted_scores(const PlsEstimate& estimate, const std::string& target);

// Versioned structured-text artifact (reloadable for split-test runs).
std::string serialize_estimate(const PlsEstimate& estimate);
PlsEstimate deserialize_estimate(const std::string& text);

}  // namespace plspath
