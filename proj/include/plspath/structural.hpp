#pragma once

#include <Eigen/Dense>
#include <map>
#include <string>
#include <vector>

#include "plspath/dataset.hpp"
#include "plspath/pls.hpp"

namespace plspath {

// R-square of an endogenous construct: 1 - RSS/TSS on the latent scores.
double r_square(const PlsEstimate& estimate, const std::string& target);

struct EffectSize {
  double value = 0.0;
  std::string band;  // "large" | "medium" | "small" | "trivial"
};

// Effect-size bands applied to F-square values: >= 0.35 large, >= 0.20 medium,
// >= 0.15 small, below that trivial.
std::string f_square_band(double f2);

// f2 = (R2_included - R2_excluded) / (1 - R2_included), re-estimating the full
// model with the edge removed. A target losing its only parent takes
// R2_excluded = 0.
EffectSize f_square(const ValidatedSample& sample, const ModelSpec::Edge& edge,
                    const EstimationConfig& config = {});

// Blindfolding cross-validated redundancy Q2 with omission distance d. The
// target block's data points are omitted in d systematic groups; each group is
// predicted from the structural model refit on the remainder.
double q_square_blindfold(const ValidatedSample& sample, const std::string& target,
                          int omission_distance = 7, const EstimationConfig& config = {});

// Root mean square of observed-minus-implied indicator correlations over the
// lower triangle (diagonal included, always zero there).
double srmr(const PlsEstimate& estimate);

// Normed fit index: 1 - chi2_model / chi2_null against the independence
// baseline, ML discrepancy with (n-1) scaling.
double nfi(const PlsEstimate& estimate);

// Observed and model-implied indicator correlation matrices over the
// first-order blocks (shared by srmr/nfi and the marker check).
Eigen::MatrixXd observed_indicator_correlations(const PlsEstimate& estimate);
Eigen::MatrixXd implied_indicator_correlations(const PlsEstimate& estimate);

struct StructuralReport {
  std::map<std::string, double> r2;  // per endogenous construct
  std::map<std::string, bool> r2_strong;  // above 0.26
  struct EdgeEffect {
    ModelSpec::Edge edge;
    double f2;
    std::string band;
  };
  std::vector<EdgeEffect> f2;
  std::map<std::string, double> q2;
  double srmr = 0.0;
  bool srmr_pass = false;  // <= 0.08
  double nfi = 0.0;
  bool nfi_pass = false;  // >= 0.90
};

struct StructuralThresholds {
  double r2_strong = 0.26;
  double srmr_max = 0.08;
  double nfi_min = 0.90;
};

StructuralReport structural_report(const ValidatedSample& sample, const PlsEstimate& estimate,
                                   const StructuralThresholds& thresholds = {},
                                   int omission_distance = 7);

}  // namespace plspath
