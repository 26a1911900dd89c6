#pragma once

#include <string>
#include <vector>

#include "plspath/dataset.hpp"
#include "plspath/pls.hpp"

namespace plspath {

struct SplitCell {
  std::string construct;
  double mse_train = 0.0, mse_test = 0.0;
  double rmse_train = 0.0, rmse_test = 0.0;
  double mse_pct_diff = 0.0;   // percentage difference train vs test
  double rmse_pct_diff = 0.0;
  std::string verdict;  // "drop" | "spike" | "tie"
};

struct SplitTestReport {
  std::string train_label, test_label;
  std::vector<SplitCell> cells;  // one per endogenous construct

  const SplitCell& cell(const std::string& construct) const;  // throws MetricError
};

// Builds a cell from already-known error levels (table reproduction hook);
// the percentage differences and verdict are derived from the inputs.
SplitCell make_split_cell(const std::string& construct, double mse_train, double rmse_train,
                          double mse_test, double rmse_test);

struct SplitTestConfig {
  std::string train_label = "train";
  std::string test_label = "test";
  EstimationConfig estimation;
};

// Trains on one sample and scores the other with the training transforms.
// Errors are structural residuals of latent scores: target score minus the
// parent-predicted score under the training path coefficients. One cell per
// endogenous construct of the common spec.
SplitTestReport split_test(const ValidatedSample& train, const ValidatedSample& test,
                           const SplitTestConfig& config = {});

}  // namespace plspath
