#include "plspath/structural.hpp"

#include <cmath>

#include "plspath/common.hpp"
#include "plspath/stats.hpp"

namespace plspath {

double r_square(const PlsEstimate& estimate, const std::string& target) {
  const auto fit = predicted_scores(estimate, target);
  if (fit.tss == 0.0) throw MetricError("r_square: zero total sum of squares");
  return 1.0 - fit.rss / fit.tss;
}

std::string f_square_band(double f2) {
  if (f2 >= 0.35) return "large";
  if (f2 >= 0.20) return "medium";
  if (f2 >= 0.15) return "small";
  return "trivial";
}

EffectSize f_square(const ValidatedSample& sample, const ModelSpec::Edge& edge,
                    const EstimationConfig& config) {
  if (!sample.spec.has_edge(edge.source, edge.target))
    throw MetricError("f_square: no edge " + edge.source + " -> " + edge.target);

  const auto full = estimate(sample, config);
  const double r2_inc = r_square(full, edge.target);
  if (1.0 - r2_inc <= 1e-12) throw MetricError("f_square: R2_included is 1 (division by zero)");

  const ModelSpec reduced_spec = sample.spec.without_edge(edge);
  double r2_exc = 0.0;
  if (!reduced_spec.parents_of(edge.target).empty()) {
    ValidatedSample reduced = sample;
    reduced.spec = reduced_spec;
    r2_exc = r_square(estimate(reduced, config), edge.target);
  }
  EffectSize out;
  out.value = std::max(0.0, (r2_inc - r2_exc) / (1.0 - r2_inc));
  out.band = f_square_band(out.value);
  return out;
}

double q_square_blindfold(const ValidatedSample& sample, const std::string& target,
                          int omission_distance, const EstimationConfig& config) {
  const int d = omission_distance;
  if (d < 2) throw MetricError("q_square_blindfold: omission distance must be >= 2");
  if (sample.n % static_cast<std::size_t>(d) == 0)
    throw MetricError("q_square_blindfold: omission distance divides the sample size");
  if (sample.spec.parents_of(target).empty())
    throw MetricError("q_square_blindfold: target is not endogenous: " + target);

  const auto target_items = sample.spec.indicators_of(target);
  std::vector<Eigen::Index> tcols;
  for (const auto& name : target_items) tcols.push_back(sample.dataset.column_index(name));
  const auto pt = static_cast<Eigen::Index>(tcols.size());
  const auto n = static_cast<Eigen::Index>(sample.n);

  double press = 0.0, tss = 0.0;
  for (int g = 0; g < d; ++g) {
    Eigen::MatrixXd values = sample.dataset.rows;
    // Column means of the cells remaining in this round.
    std::vector<double> means(static_cast<std::size_t>(pt));
    for (Eigen::Index j = 0; j < pt; ++j) {
      double sum = 0.0;
      Eigen::Index count = 0;
      for (Eigen::Index i = 0; i < n; ++i) {
        if ((i * pt + j) % d == g) continue;
        sum += values(i, tcols[static_cast<std::size_t>(j)]);
        ++count;
      }
      if (count == 0) throw MetricError("q_square_blindfold: empty retention group");
      means[static_cast<std::size_t>(j)] = sum / static_cast<double>(count);
    }
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j < pt; ++j)
        if ((i * pt + j) % d == g)
          values(i, tcols[static_cast<std::size_t>(j)]) = means[static_cast<std::size_t>(j)];

    const auto fold_sample = validate(dataset_from_matrix(values, sample.dataset.column_names),
                                      sample.spec);
    const auto est = estimate(fold_sample, config);
    const auto fit = predicted_scores(est, target);
    const auto tb = est.block_index(target);
    const auto& tblock = est.blocks[static_cast<std::size_t>(tb)];

    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index j = 0; j < pt; ++j) {
        if ((i * pt + j) % d != g) continue;
        const auto col = tcols[static_cast<std::size_t>(j)];
        // Locate the indicator inside the target block.
        double lambda = 0.0;
        for (std::size_t k = 0; k < tblock.cols.size(); ++k)
          if (tblock.cols[k] == col) lambda = est.block_loadings[static_cast<std::size_t>(tb)](static_cast<Eigen::Index>(k));
        const double predicted = est.train_mean(col) + est.train_sd(col) * lambda * fit.fitted(i);
        const double truth = sample.dataset.rows(i, col);
        press += (truth - predicted) * (truth - predicted);
        tss += (truth - means[static_cast<std::size_t>(j)]) * (truth - means[static_cast<std::size_t>(j)]);
      }
    }
  }
  if (tss == 0.0) throw MetricError("q_square_blindfold: zero total sum of squares");
  return 1.0 - press / tss;
}

Eigen::MatrixXd observed_indicator_correlations(const PlsEstimate& est) {
  if (est.indicator_corr.size() == 0)
    throw MetricError("estimate carries no indicator correlations");
  return est.indicator_corr;
}

Eigen::MatrixXd implied_indicator_correlations(const PlsEstimate& est) {
  const auto p = static_cast<Eigen::Index>(est.indicator_names.size());
  // Loading and block of each indicator w.r.t. its first-order block.
  Eigen::VectorXd lambda = Eigen::VectorXd::Zero(p);
  std::vector<Eigen::Index> block_of(static_cast<std::size_t>(p), -1);
  for (std::size_t c = 0; c < est.blocks.size(); ++c) {
    if (est.blocks[c].is_second_order) continue;
    for (std::size_t k = 0; k < est.blocks[c].cols.size(); ++k) {
      lambda(est.blocks[c].cols[k]) = est.block_loadings[c](static_cast<Eigen::Index>(k));
      block_of[static_cast<std::size_t>(est.blocks[c].cols[k])] = static_cast<Eigen::Index>(c);
    }
  }
  Eigen::MatrixXd implied(p, p);
  for (Eigen::Index i = 0; i < p; ++i) {
    for (Eigen::Index j = 0; j <= i; ++j) {
      if (i == j) {
        implied(i, i) = 1.0;
        continue;
      }
      const auto bi = block_of[static_cast<std::size_t>(i)];
      const auto bj = block_of[static_cast<std::size_t>(j)];
      const double phi = bi == bj ? 1.0 : est.latent_corr(bi, bj);
      implied(i, j) = implied(j, i) = lambda(i) * lambda(j) * phi;
    }
  }
  return implied;
}

double srmr(const PlsEstimate& est) {
  const Eigen::MatrixXd observed = observed_indicator_correlations(est);
  const Eigen::MatrixXd implied = implied_indicator_correlations(est);
  const auto p = observed.rows();
  double sum = 0.0;
  for (Eigen::Index i = 0; i < p; ++i)
    for (Eigen::Index j = 0; j <= i; ++j) {
      const double diff = observed(i, j) - implied(i, j);
      sum += diff * diff;
    }
  const double cells = static_cast<double>(p) * (static_cast<double>(p) + 1.0) / 2.0;
  return std::sqrt(sum / cells);
}

namespace {

// Maximum-likelihood discrepancy F = ln|Sigma| - ln|S| + tr(S Sigma^-1) - p.
double ml_discrepancy(const Eigen::MatrixXd& observed, const Eigen::MatrixXd& implied) {
  const auto p = observed.rows();
  Eigen::LDLT<Eigen::MatrixXd> ldlt_implied(implied);
  if (ldlt_implied.info() != Eigen::Success || !ldlt_implied.isPositive())
    throw MetricError("implied correlation matrix is not positive definite");
  Eigen::LDLT<Eigen::MatrixXd> ldlt_observed(observed);
  if (ldlt_observed.info() != Eigen::Success || !ldlt_observed.isPositive())
    throw MetricError("observed correlation matrix is not positive definite");
  const double logdet_implied = ldlt_implied.vectorD().array().log().sum();
  const double logdet_observed = ldlt_observed.vectorD().array().log().sum();
  const double trace = (ldlt_implied.solve(observed)).trace();
  return logdet_implied - logdet_observed + trace - static_cast<double>(p);
}

}  // namespace

double nfi(const PlsEstimate& est) {
  const Eigen::MatrixXd observed = observed_indicator_correlations(est);
  const Eigen::MatrixXd implied = implied_indicator_correlations(est);
  const auto p = observed.rows();
  const double f_model = ml_discrepancy(observed, implied);
  const double f_null = ml_discrepancy(observed, Eigen::MatrixXd::Identity(p, p));
  if (f_null <= 0.0) throw MetricError("nfi: null-model chi-square is zero");
  // The (n-1) scaling cancels in the ratio.
  return 1.0 - f_model / f_null;
}

StructuralReport structural_report(const ValidatedSample& sample, const PlsEstimate& est,
                                   const StructuralThresholds& thresholds,
                                   int omission_distance) {
  StructuralReport out;
  for (const auto& target : sample.spec.endogenous()) {
    out.r2[target] = r_square(est, target);
    out.r2_strong[target] = out.r2[target] > thresholds.r2_strong;
  }
  for (const auto& edge : sample.spec.structural_edges) {
    const auto eff = f_square(sample, edge, est.config);
    out.f2.push_back({edge, eff.value, eff.band});
  }
  int d = omission_distance;
  if (sample.n % static_cast<std::size_t>(d) == 0) ++d;  // keep the pipeline total
  for (const auto& target : sample.spec.endogenous())
    out.q2[target] = q_square_blindfold(sample, target, d, est.config);
  out.srmr = srmr(est);
  out.srmr_pass = out.srmr <= thresholds.srmr_max;
  out.nfi = nfi(est);
  out.nfi_pass = out.nfi >= thresholds.nfi_min;
  return out;
}

}  // namespace plspath
