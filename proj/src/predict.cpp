#include "plspath/predict.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "plspath/common.hpp"
#include "plspath/parallel.hpp"
#include "plspath/rng.hpp"
#include "plspath/stats.hpp"

namespace plspath {

namespace {

struct CellAccumulator {
  double sse_pls = 0.0, sse_lm = 0.0;
  double sae_pls = 0.0, sae_lm = 0.0;
  double sape_pls = 0.0, sape_lm = 0.0;
  double tss = 0.0;  // about the training-fold mean
  std::size_t count = 0;
  std::size_t mape_count = 0;
};

struct RepetitionOutcome {
  std::vector<CellAccumulator> cells;  // per endogenous indicator
  std::vector<std::vector<double>> residuals_pls;
  std::size_t skipped_folds = 0;
  bool failed = false;
};

}  // namespace

PredictReport pls_predict(const ValidatedSample& sample, const PredictConfig& config) {
  const ModelSpec& spec = sample.spec;
  const auto n = sample.n;
  if (config.k < 2) throw Error("pls_predict: k must be at least 2");
  if (n < 2 * static_cast<std::size_t>(config.k))
    throw Error("pls_predict: sample too small for k folds (need n >= 2k)");
  const auto exo = spec.exogenous();
  if (exo.empty()) throw Error("pls_predict: spec has no exogenous construct");
  const auto endo = spec.endogenous();

  // Exogenous indicator columns (union over exogenous constructs).
  std::vector<Eigen::Index> exo_cols;
  for (const auto& c : exo)
    for (const auto& ind : spec.indicators_of(c)) {
      const auto col = sample.dataset.column_index(ind);
      if (std::find(exo_cols.begin(), exo_cols.end(), col) == exo_cols.end())
        exo_cols.push_back(col);
    }

  struct EndoIndicator {
    std::string name;
    std::string construct;
    Eigen::Index col;
  };
  std::vector<EndoIndicator> targets;
  for (const auto& c : endo)
    for (const auto& ind : spec.indicators_of(c))
      targets.push_back({ind, c, sample.dataset.column_index(ind)});
  if (targets.empty()) throw Error("pls_predict: no endogenous indicators");

  const auto topo = spec.topological_order();

  std::vector<RepetitionOutcome> reps(static_cast<std::size_t>(config.r));
  parallel_for(
      static_cast<std::size_t>(config.r),
      [&](std::size_t rep) {
        RepetitionOutcome out;
        out.cells.resize(targets.size());
        out.residuals_pls.resize(targets.size());

        // Uniform random permutation, dealt into k folds.
        Rng rng(mix_seed(config.seed, rep));
        std::vector<std::size_t> perm(n);
        std::iota(perm.begin(), perm.end(), 0);
        for (std::size_t i = n - 1; i > 0; --i)
          std::swap(perm[i], perm[rng.next_index(i + 1)]);
        std::vector<int> fold_of(n);
        for (std::size_t i = 0; i < n; ++i) fold_of[perm[i]] = static_cast<int>(i % config.k);

        for (int fold = 0; fold < config.k; ++fold) {
          std::vector<std::size_t> train_idx, test_idx;
          for (std::size_t i = 0; i < n; ++i)
            (fold_of[i] == fold ? test_idx : train_idx).push_back(i);

          Eigen::MatrixXd train(static_cast<Eigen::Index>(train_idx.size()),
                                sample.dataset.rows.cols());
          for (std::size_t i = 0; i < train_idx.size(); ++i)
            train.row(static_cast<Eigen::Index>(i)) =
                sample.dataset.rows.row(static_cast<Eigen::Index>(train_idx[i]));
          Eigen::MatrixXd test(static_cast<Eigen::Index>(test_idx.size()),
                               sample.dataset.rows.cols());
          for (std::size_t i = 0; i < test_idx.size(); ++i)
            test.row(static_cast<Eigen::Index>(i)) =
                sample.dataset.rows.row(static_cast<Eigen::Index>(test_idx[i]));

          PlsEstimate est;
          try {
            const auto fold_sample =
                validate(dataset_from_matrix(train, sample.dataset.column_names), spec);
            est = estimate(fold_sample, config.estimation);
          } catch (const Error&) {
            ++out.skipped_folds;
            continue;
          }

          // PLS chain: holdout exogenous scores from the measurement model,
          // endogenous scores through the structural equations only.
          const auto holdout_scores =
              apply_estimate(est, dataset_from_matrix(test, sample.dataset.column_names));
          std::map<std::string, Eigen::VectorXd> chain;
          for (const auto& c : exo) chain[c] = holdout_scores.col(est.block_index(c));
          for (const auto& name : topo) {
            const auto parents = spec.parents_of(name);
            if (parents.empty()) continue;
            Eigen::VectorXd score = Eigen::VectorXd::Zero(test.rows());
            for (const auto& parent : parents)
              score += est.path_coefficient(parent, name) * chain.at(parent);
            chain[name] = score;
          }

          // LM benchmark design: all exogenous indicators plus intercept,
          // standardized with training statistics.
          Eigen::MatrixXd lm_train(train.rows(), static_cast<Eigen::Index>(exo_cols.size()) + 1);
          Eigen::MatrixXd lm_test(test.rows(), static_cast<Eigen::Index>(exo_cols.size()) + 1);
          lm_train.col(0).setOnes();
          lm_test.col(0).setOnes();
          for (std::size_t j = 0; j < exo_cols.size(); ++j) {
            lm_train.col(static_cast<Eigen::Index>(j) + 1) = train.col(exo_cols[j]);
            lm_test.col(static_cast<Eigen::Index>(j) + 1) = test.col(exo_cols[j]);
          }

          for (std::size_t t = 0; t < targets.size(); ++t) {
            const auto col = targets[t].col;
            const auto block = est.block_index(targets[t].construct);
            double lambda = 0.0;
            const auto& blk = est.blocks[static_cast<std::size_t>(block)];
            for (std::size_t kk = 0; kk < blk.cols.size(); ++kk)
              if (blk.cols[kk] == col)
                lambda = est.block_loadings[static_cast<std::size_t>(block)](
                    static_cast<Eigen::Index>(kk));

            Eigen::VectorXd pls_pred =
                (est.train_mean(col) +
                 est.train_sd(col) * lambda * chain.at(targets[t].construct).array())
                    .matrix();

            Eigen::VectorXd lm_pred;
            try {
              const Eigen::VectorXd beta = stats::ols(lm_train, train.col(col));
              lm_pred = lm_test * beta;
            } catch (const EstimationError&) {
              ++out.skipped_folds;
              continue;
            }

            auto& cell = out.cells[t];
            const double train_mean = train.col(col).mean();
            for (Eigen::Index i = 0; i < test.rows(); ++i) {
              const double truth = test(i, col);
              const double err_pls = truth - pls_pred(i);
              const double err_lm = truth - lm_pred(i);
              cell.sse_pls += err_pls * err_pls;
              cell.sse_lm += err_lm * err_lm;
              cell.sae_pls += std::fabs(err_pls);
              cell.sae_lm += std::fabs(err_lm);
              cell.tss += (truth - train_mean) * (truth - train_mean);
              if (truth != 0.0) {
                cell.sape_pls += std::fabs(err_pls / truth);
                cell.sape_lm += std::fabs(err_lm / truth);
                ++cell.mape_count;
              }
              ++cell.count;
              out.residuals_pls[t].push_back(err_pls);
            }
          }
        }
        reps[rep] = std::move(out);
      },
      config.threads);

  PredictReport report;
  report.k = config.k;
  report.r = config.r;
  report.seed = config.seed;
  for (const auto& rep : reps) report.skipped_folds += rep.skipped_folds;

  for (std::size_t t = 0; t < targets.size(); ++t) {
    IndicatorPrediction pred;
    pred.indicator = targets[t].name;
    pred.construct = targets[t].construct;
    double mae_pls = 0.0, mae_lm = 0.0, mape_pls = 0.0, mape_lm = 0.0;
    double q2_pls = 0.0, q2_lm = 0.0;
    int used = 0;
    for (const auto& rep : reps) {
      const auto& cell = rep.cells[t];
      if (cell.count == 0) continue;
      const double cnt = static_cast<double>(cell.count);
      pred.per_repetition_rmse_pls.push_back(std::sqrt(cell.sse_pls / cnt));
      pred.per_repetition_rmse_lm.push_back(std::sqrt(cell.sse_lm / cnt));
      mae_pls += cell.sae_pls / cnt;
      mae_lm += cell.sae_lm / cnt;
      if (cell.mape_count > 0) {
        mape_pls += cell.sape_pls / static_cast<double>(cell.mape_count) * 100.0;
        mape_lm += cell.sape_lm / static_cast<double>(cell.mape_count) * 100.0;
      }
      pred.mape_excluded += cell.count - cell.mape_count;
      if (cell.tss > 0.0) {
        q2_pls += 1.0 - cell.sse_pls / cell.tss;
        q2_lm += 1.0 - cell.sse_lm / cell.tss;
      }
      ++used;
      const auto& res = rep.residuals_pls[t];
      auto& pool = report.residuals[targets[t].name];
      pool.insert(pool.end(), res.begin(), res.end());
    }
    if (used == 0) throw EstimationError("pls_predict: every fold failed for " + targets[t].name);
    const double du = static_cast<double>(used);
    pred.rmse_pls =
        std::accumulate(pred.per_repetition_rmse_pls.begin(), pred.per_repetition_rmse_pls.end(), 0.0) / du;
    pred.rmse_lm =
        std::accumulate(pred.per_repetition_rmse_lm.begin(), pred.per_repetition_rmse_lm.end(), 0.0) / du;
    pred.mae_pls = mae_pls / du;
    pred.mae_lm = mae_lm / du;
    pred.mape_pls = mape_pls / du;
    pred.mape_lm = mape_lm / du;
    pred.q2_pls = q2_pls / du;
    pred.q2_lm = q2_lm / du;
    pred.rmse_decrease_pct =
        pred.rmse_lm == 0.0 ? 0.0 : (pred.rmse_lm - pred.rmse_pls) / pred.rmse_lm * 100.0;
    report.per_indicator.push_back(std::move(pred));
  }

  for (const auto& c : endo) {
    double sum = 0.0;
    int count = 0;
    for (const auto& pred : report.per_indicator)
      if (pred.construct == c) {
        sum += pred.rmse_decrease_pct;
        ++count;
      }
    if (count > 0) report.avg_rmse_decrease_pct[c] = sum / count;
  }
  return report;
}

std::string error_asymmetry_check(const PredictReport& report, const std::string& target) {
  bool found = false;
  for (const auto& pred : report.per_indicator) {
    if (pred.construct != target) continue;
    found = true;
    const auto& res = report.residuals.at(pred.indicator);
    Eigen::Map<const Eigen::VectorXd> v(res.data(), static_cast<Eigen::Index>(res.size()));
    if (std::fabs(stats::skewness(v)) > 1.0) return "MAE";
  }
  if (!found) throw MetricError("error_asymmetry_check: no residuals for " + target);
  return "RMSE";
}

}  // namespace plspath
