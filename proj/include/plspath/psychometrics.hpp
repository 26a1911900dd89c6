#pragma once

#include <Eigen/Dense>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "plspath/dataset.hpp"
#include "plspath/pls.hpp"

namespace plspath {

// Pass thresholds; defaults follow the standard reporting conventions.
struct PsychoThresholds {
  double alpha = 0.70;
  double cr = 0.70;
  double ave = 0.50;
  double htmt = 0.85;
  double vif = 3.0;
  double kmo = 0.70;
};

// Cronbach's alpha: (k/(k-1)) * (1 - sum item variances / variance of row sums).
// Negative values are possible for pathological data and left as computed.
double cronbach_alpha(const Eigen::MatrixXd& items);

// CR = (sum lambda)^2 / ((sum lambda)^2 + sum theta), theta = 1 - lambda^2.
// With standardized = true, loadings outside [-1, 1] are rejected.
double composite_reliability(const Eigen::VectorXd& loadings, bool standardized = true);
double composite_reliability(const Eigen::VectorXd& loadings, const Eigen::VectorXd& error_vars);

// Mean squared standardized loading.
double ave(const Eigen::VectorXd& loadings);

struct FornellLarcker {
  std::vector<std::string> constructs;
  Eigen::MatrixXd matrix;        // sqrt(AVE) on the diagonal, correlations off it
  std::vector<bool> pass;        // per construct: sqrt(AVE) strictly exceeds max |corr|
  bool all_pass = false;
};
FornellLarcker fornell_larcker(const std::vector<std::string>& constructs,
                               const Eigen::VectorXd& aves, const Eigen::MatrixXd& latent_corr);

struct HtmtReport {
  std::vector<std::string> constructs;
  Eigen::MatrixXd matrix;  // symmetric, diagonal 0
  std::vector<std::pair<std::string, std::string>> failures;  // pairs at/above threshold
};
// Classic HTMT on absolute correlations; single-indicator blocks take a
// monotrait mean of 1.
HtmtReport htmt(const Eigen::MatrixXd& item_corr,
                const std::vector<std::pair<std::string, std::vector<Eigen::Index>>>& blocks,
                double threshold = 0.85);

// VIF_j from regressing item j on the other items of the block; perfect
// collinearity yields +infinity.
Eigen::VectorXd vif(const Eigen::MatrixXd& items);

// Kaiser-Meyer-Olkin over the full correlation matrix. Throws MetricError on
// an identity matrix (0/0) or a singular input.
double kmo(const Eigen::MatrixXd& corr);

// Cumulative percentage of variance captured by the first n_components
// principal components of the indicator correlation matrix.
double total_variance_explained(const Eigen::MatrixXd& data, int n_components);

// Per-construct share (percent of total standardized indicator variance)
// captured by the block's loadings; used in the common-method-bias check.
double construct_variance_share(const Eigen::VectorXd& block_loadings, int total_indicators);

// AIC = n ln(SSE/n) + 2k. SSE = 0 yields -infinity (degenerate perfect fit).
double aic_block(double residual_sse, std::size_t n, int k);

struct ReliabilityReport {
  std::vector<std::string> constructs;
  std::map<std::string, double> alpha;
  std::map<std::string, double> cr;
  std::map<std::string, double> ave;
  std::map<std::string, bool> alpha_pass, cr_pass, ave_pass;
  std::map<std::string, Eigen::VectorXd> vif;  // per construct, per indicator
  bool vif_pass = true;
  double kmo = 0.0;
  bool kmo_pass = false;
  double total_variance_pct = 0.0;
  std::map<std::string, double> aic_per_block;  // endogenous constructs
  double aic_total = 0.0;
};
// Full measurement-model reliability block for a fitted sample. Uses the
// estimate's standardized loadings; AIC per endogenous block from the
// structural residuals.
ReliabilityReport reliability_report(const ValidatedSample& sample, const PlsEstimate& estimate,
                                     const PsychoThresholds& thresholds = {});

struct CmbSummary {
  double srmr_base = 0.0, srmr_marked = 0.0, srmr_delta = 0.0;
  double nfi_base = 0.0, nfi_marked = 0.0, nfi_delta = 0.0;
  double max_construct_share_pct = 0.0;  // of total standardized variance
  double total_variance_pct = 0.0;
  std::string verdict;  // "no concern" | "concern"
};
struct CmbTolerances {
  double srmr_delta = 0.01;
  double nfi_delta = 0.01;
  double max_share_pct = 50.0;
};
// Marker-variable common-method-bias check: compares fit of the substantive
// model against a nested fit with every substantive indicator residualized on
// the marker composite.
CmbSummary cmb_marker_check(const ValidatedSample& sample, const std::string& marker,
                            const CmbTolerances& tol = {},
                            const EstimationConfig& config = {});

struct ValidityReport {
  FornellLarcker fornell_larcker;
  HtmtReport htmt;
  std::optional<CmbSummary> cmb;
};
ValidityReport validity_report(const ValidatedSample& sample, const PlsEstimate& estimate,
                               const PsychoThresholds& thresholds = {});

}  // namespace plspath
