#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "plspath/dataset.hpp"
#include "plspath/pls.hpp"

namespace plspath {

struct PredictConfig {
  int k = 10;  // folds
  int r = 30;  // repetitions
  std::uint64_t seed = 1;
  unsigned threads = 0;
  EstimationConfig estimation;
};

struct IndicatorPrediction {
  std::string indicator;
  std::string construct;
  double rmse_pls = 0.0, rmse_lm = 0.0;
  double mae_pls = 0.0, mae_lm = 0.0;
  double mape_pls = 0.0, mape_lm = 0.0;
  double q2_pls = 0.0, q2_lm = 0.0;  // out-of-sample Q2 against the training mean
  double rmse_decrease_pct = 0.0;    // (RMSE_LM - RMSE_PLS) / RMSE_LM x 100
  std::size_t mape_excluded = 0;     // holdout cells with true value 0
  std::vector<double> per_repetition_rmse_pls;  // retained for audit/recompute
  std::vector<double> per_repetition_rmse_lm;
};

struct PredictReport {
  std::vector<IndicatorPrediction> per_indicator;
  std::map<std::string, double> avg_rmse_decrease_pct;  // per endogenous construct
  std::map<std::string, std::vector<double>> residuals;  // per indicator, PLS residuals pooled
  int k = 0, r = 0;
  std::uint64_t seed = 0;
  std::size_t skipped_folds = 0;  // singular LM design matrices
};

// Out-of-sample predictive evaluation: per repetition the rows are partitioned
// into k folds; each holdout endogenous indicator is predicted through the
// structural chain of a model trained on the remainder, and benchmarked
// against a direct linear regression on all exogenous indicators. Holdout
// standardization uses training-fold statistics only. Deterministic for fixed
// (seed, r), independent of thread count.
PredictReport pls_predict(const ValidatedSample& sample, const PredictConfig& config = {});

// Recommends MAE when any of the target's indicators has residual skewness
// beyond |1|, else RMSE.
std::string error_asymmetry_check(const PredictReport& report, const std::string& target);

}  // namespace plspath
