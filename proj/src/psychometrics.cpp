#include "plspath/psychometrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "plspath/common.hpp"
#include "plspath/stats.hpp"
#include "plspath/structural.hpp"

namespace plspath {

double cronbach_alpha(const Eigen::MatrixXd& items) {
  const auto k = items.cols();
  if (k < 2) throw MetricError("cronbach_alpha: need at least 2 items");
  double item_var_sum = 0.0;
  for (Eigen::Index j = 0; j < k; ++j) {
    const double v = stats::variance(items.col(j));
    if (v == 0.0) throw MetricError("cronbach_alpha: zero-variance item " + std::to_string(j));
    item_var_sum += v;
  }
  const Eigen::VectorXd total = items.rowwise().sum();
  const double total_var = stats::variance(total);
  if (total_var == 0.0) throw MetricError("cronbach_alpha: zero total variance");
  const double kd = static_cast<double>(k);
  return (kd / (kd - 1.0)) * (1.0 - item_var_sum / total_var);
}

double composite_reliability(const Eigen::VectorXd& loadings, bool standardized) {
  if (loadings.size() == 0) throw MetricError("composite_reliability: empty loadings");
  if (standardized && (loadings.array().abs() > 1.0 + 1e-12).any())
    throw MetricError("composite_reliability: standardized loading outside [-1, 1]");
  const Eigen::VectorXd theta = (1.0 - loadings.array().square()).cwiseMax(0.0);
  return composite_reliability(loadings, theta);
}

double composite_reliability(const Eigen::VectorXd& loadings, const Eigen::VectorXd& error_vars) {
  if (loadings.size() == 0) throw MetricError("composite_reliability: empty loadings");
  if (loadings.size() != error_vars.size())
    throw MetricError("composite_reliability: length mismatch");
  if ((error_vars.array() < 0.0).any())
    throw MetricError("composite_reliability: negative error variance");
  const double s = loadings.sum();
  const double denom = s * s + error_vars.sum();
  if (denom == 0.0) throw MetricError("composite_reliability: zero denominator");
  return s * s / denom;
}

double ave(const Eigen::VectorXd& loadings) {
  if (loadings.size() == 0) throw MetricError("ave: empty loadings");
  return loadings.array().square().mean();
}

FornellLarcker fornell_larcker(const std::vector<std::string>& constructs,
                               const Eigen::VectorXd& aves, const Eigen::MatrixXd& latent_corr) {
  const auto c = static_cast<Eigen::Index>(constructs.size());
  if (aves.size() != c || latent_corr.rows() != c || latent_corr.cols() != c)
    throw MetricError("fornell_larcker: dimension mismatch");
  FornellLarcker out;
  out.constructs = constructs;
  out.matrix = latent_corr;
  out.pass.resize(constructs.size(), true);
  out.all_pass = true;
  for (Eigen::Index i = 0; i < c; ++i) {
    if (aves(i) < 0.0) throw MetricError("fornell_larcker: negative AVE");
    out.matrix(i, i) = std::sqrt(aves(i));
    double max_corr = 0.0;
    for (Eigen::Index j = 0; j < c; ++j)
      if (j != i) max_corr = std::max(max_corr, std::fabs(latent_corr(i, j)));
    // Strict inequality: a boundary tie fails the criterion.
    const bool pass = c == 1 || out.matrix(i, i) > max_corr;
    out.pass[static_cast<std::size_t>(i)] = pass;
    out.all_pass = out.all_pass && pass;
  }
  return out;
}

HtmtReport htmt(const Eigen::MatrixXd& item_corr,
                const std::vector<std::pair<std::string, std::vector<Eigen::Index>>>& blocks,
                double threshold) {
  const auto nb = blocks.size();
  for (const auto& [name, idx] : blocks)
    if (idx.empty()) throw MetricError("htmt: empty block " + name);

  auto monotrait_mean = [&](const std::vector<Eigen::Index>& idx) {
    if (idx.size() == 1) return 1.0;
    double sum = 0.0;
    int count = 0;
    for (std::size_t a = 0; a < idx.size(); ++a)
      for (std::size_t b = a + 1; b < idx.size(); ++b) {
        sum += std::fabs(item_corr(idx[a], idx[b]));
        ++count;
      }
    return sum / count;
  };

  HtmtReport out;
  out.matrix = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(nb), static_cast<Eigen::Index>(nb));
  for (const auto& [name, idx] : blocks) out.constructs.push_back(name);

  for (std::size_t a = 0; a < nb; ++a) {
    for (std::size_t b = a + 1; b < nb; ++b) {
      const auto& ia = blocks[a].second;
      const auto& ib = blocks[b].second;
      double hetero = 0.0;
      for (auto i : ia)
        for (auto j : ib) hetero += std::fabs(item_corr(i, j));
      hetero /= static_cast<double>(ia.size() * ib.size());
      const double ma = monotrait_mean(ia);
      const double mb = monotrait_mean(ib);
      if (ma <= 0.0 || mb <= 0.0)
        throw MetricError("htmt: zero monotrait mean for pair " + blocks[a].first + "/" +
                          blocks[b].first);
      const double value = hetero / std::sqrt(ma * mb);
      out.matrix(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) = value;
      out.matrix(static_cast<Eigen::Index>(b), static_cast<Eigen::Index>(a)) = value;
      if (value >= threshold) out.failures.emplace_back(blocks[a].first, blocks[b].first);
    }
  }
  return out;
}

Eigen::VectorXd vif(const Eigen::MatrixXd& items) {
  const auto k = items.cols();
  if (k < 2) throw MetricError("vif: need at least 2 items");
  const Eigen::MatrixXd z = stats::standardize(items);
  Eigen::VectorXd out(k);
  for (Eigen::Index j = 0; j < k; ++j) {
    Eigen::MatrixXd others(z.rows(), k - 1);
    Eigen::Index col = 0;
    for (Eigen::Index m = 0; m < k; ++m)
      if (m != j) others.col(col++) = z.col(m);
    double r2;
    try {
      const Eigen::VectorXd beta = stats::ols(others, z.col(j));
      const double rss = (z.col(j) - others * beta).squaredNorm();
      const double tss = z.col(j).squaredNorm();
      r2 = 1.0 - rss / tss;
    } catch (const EstimationError&) {
      r2 = 1.0;  // collinear design among the other items
    }
    out(j) = r2 >= 1.0 - 1e-12 ? std::numeric_limits<double>::infinity() : 1.0 / (1.0 - r2);
  }
  return out;
}

double kmo(const Eigen::MatrixXd& corr) {
  const auto p = corr.rows();
  if (p != corr.cols() || p < 2) throw MetricError("kmo: need a square matrix of order >= 2");
  Eigen::LDLT<Eigen::MatrixXd> ldlt(corr);
  if (ldlt.info() != Eigen::Success || !ldlt.isPositive())
    throw MetricError("kmo: correlation matrix is not positive definite");
  const Eigen::MatrixXd inv = ldlt.solve(Eigen::MatrixXd::Identity(p, p));

  double r2 = 0.0, q2 = 0.0;
  for (Eigen::Index i = 0; i < p; ++i) {
    for (Eigen::Index j = 0; j < p; ++j) {
      if (i == j) continue;
      r2 += corr(i, j) * corr(i, j);
      const double q = -inv(i, j) / std::sqrt(inv(i, i) * inv(j, j));
      q2 += q * q;
    }
  }
  if (r2 + q2 == 0.0) throw MetricError("kmo: undefined for an identity correlation matrix");
  return r2 / (r2 + q2);
}

double total_variance_explained(const Eigen::MatrixXd& data, int n_components) {
  if (data.cols() < 2) throw MetricError("total_variance_explained: need >= 2 columns");
  if (n_components < 1 || n_components > data.cols())
    throw MetricError("total_variance_explained: fewer indicators than components");
  const Eigen::MatrixXd corr = stats::correlation_matrix(data);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(corr);
  if (eig.info() != Eigen::Success) throw MetricError("total_variance_explained: eigen failure");
  // Eigenvalues ascend; take the largest n_components.
  const auto p = corr.rows();
  double captured = 0.0;
  for (int c = 0; c < n_components; ++c) captured += eig.eigenvalues()(p - 1 - c);
  return captured / static_cast<double>(p) * 100.0;
}

double construct_variance_share(const Eigen::VectorXd& block_loadings, int total_indicators) {
  if (total_indicators < 1) throw MetricError("construct_variance_share: no indicators");
  return block_loadings.array().square().sum() / static_cast<double>(total_indicators) * 100.0;
}

double aic_block(double residual_sse, std::size_t n, int k) {
  if (k < 1 || n <= static_cast<std::size_t>(k)) throw MetricError("aic_block: need n > k >= 1");
  if (residual_sse < 0.0) throw MetricError("aic_block: negative SSE");
  if (residual_sse == 0.0) return -std::numeric_limits<double>::infinity();
  const double nd = static_cast<double>(n);
  return nd * std::log(residual_sse / nd) + 2.0 * k;
}

ReliabilityReport reliability_report(const ValidatedSample& sample, const PlsEstimate& est,
                                     const PsychoThresholds& thresholds) {
  ReliabilityReport out;
  for (std::size_t c = 0; c < est.blocks.size(); ++c) {
    const auto& block = est.blocks[c];
    out.constructs.push_back(block.name);

    Eigen::MatrixXd items(sample.dataset.rows.rows(), static_cast<Eigen::Index>(block.cols.size()));
    for (std::size_t k = 0; k < block.cols.size(); ++k)
      items.col(static_cast<Eigen::Index>(k)) = sample.dataset.rows.col(block.cols[k]);

    if (block.cols.size() >= 2) {
      out.alpha[block.name] = cronbach_alpha(items);
      out.vif[block.name] = vif(items);
    } else {
      out.alpha[block.name] = 1.0;  // single indicator measures itself
      out.vif[block.name] = Eigen::VectorXd::Ones(1);
    }
    const Eigen::VectorXd clamped = est.block_loadings[c].cwiseMin(1.0).cwiseMax(-1.0);
    out.cr[block.name] = composite_reliability(clamped);
    out.ave[block.name] = ave(clamped);
    out.alpha_pass[block.name] = out.alpha[block.name] >= thresholds.alpha;
    out.cr_pass[block.name] = out.cr[block.name] >= thresholds.cr;
    out.ave_pass[block.name] = out.ave[block.name] >= thresholds.ave;
    if ((out.vif[block.name].array() > thresholds.vif).any()) out.vif_pass = false;
  }

  out.kmo = kmo(stats::correlation_matrix(sample.dataset.rows));
  out.kmo_pass = out.kmo >= thresholds.kmo;

  int n_first_order = 0;
  for (const auto& c : sample.spec.constructs)
    if (!sample.spec.marker_block || c.name != *sample.spec.marker_block) ++n_first_order;
  out.total_variance_pct = total_variance_explained(sample.dataset.rows, n_first_order);

  out.aic_total = 0.0;
  for (const auto& target : sample.spec.endogenous()) {
    const auto fit = predicted_scores(est, target);
    const int k = static_cast<int>(fit.parents.size()) + 1;  // coefficients + intercept
    const double a = aic_block(fit.rss, sample.n, k);
    out.aic_per_block[target] = a;
    out.aic_total += a;
  }
  return out;
}

CmbSummary cmb_marker_check(const ValidatedSample& sample, const std::string& marker,
                            const CmbTolerances& tol, const EstimationConfig& config) {
  const ModelSpec& spec = sample.spec;
  if (!spec.marker_block || *spec.marker_block != marker)
    throw MetricError("cmb_marker_check: marker block absent: " + marker);
  const auto marker_items = spec.indicators_of(marker);
  if (marker_items.size() < 2) throw MetricError("cmb_marker_check: marker needs >= 2 indicators");

  const ModelSpec substantive = spec.without_marker();
  Eigen::MatrixXd sub(sample.dataset.rows.rows(),
                      static_cast<Eigen::Index>(substantive.all_indicators().size()));
  const auto sub_names = substantive.all_indicators();
  for (std::size_t j = 0; j < sub_names.size(); ++j)
    sub.col(static_cast<Eigen::Index>(j)) = sample.dataset.rows.col(sample.dataset.column_index(sub_names[j]));

  // Equal-weight standardized marker composite.
  Eigen::MatrixXd mk(sample.dataset.rows.rows(), static_cast<Eigen::Index>(marker_items.size()));
  for (std::size_t j = 0; j < marker_items.size(); ++j)
    mk.col(static_cast<Eigen::Index>(j)) = sample.dataset.rows.col(sample.dataset.column_index(marker_items[j]));
  Eigen::VectorXd composite = stats::standardize(mk).rowwise().mean();
  composite /= stats::sd(composite);

  auto fit_indices = [&](const Eigen::MatrixXd& values) {
    const auto data = dataset_from_matrix(values, sub_names);
    const auto vs = validate(data, substantive);
    const auto est = estimate(vs, config);
    return std::pair<double, double>{srmr(est), nfi(est)};
  };

  CmbSummary out;
  std::tie(out.srmr_base, out.nfi_base) = fit_indices(sub);

  // Nested comparison: partial the marker composite out of every substantive
  // indicator, then refit.
  Eigen::MatrixXd partialled = sub;
  bool degenerate = false;
  for (Eigen::Index j = 0; j < sub.cols(); ++j) {
    Eigen::VectorXd col = sub.col(j);
    const double b = stats::covariance(col, composite) / stats::variance(composite);
    Eigen::VectorXd resid = col.array() - col.mean() - b * composite.array();
    if (stats::sd(resid) < 1e-9) {
      degenerate = true;  // an indicator is (nearly) the marker itself
      break;
    }
    partialled.col(j) = resid;
  }
  if (degenerate) {
    out.srmr_marked = out.nfi_marked = std::numeric_limits<double>::quiet_NaN();
    out.srmr_delta = out.nfi_delta = std::numeric_limits<double>::infinity();
  } else {
    std::tie(out.srmr_marked, out.nfi_marked) = fit_indices(partialled);
    out.srmr_delta = std::fabs(out.srmr_marked - out.srmr_base);
    out.nfi_delta = std::fabs(out.nfi_marked - out.nfi_base);
  }

  const auto sub_sample = validate(dataset_from_matrix(sub, sub_names), substantive);
  const auto est = estimate(sub_sample, config);
  out.max_construct_share_pct = 0.0;
  const int p_total = static_cast<int>(sub_names.size());
  for (std::size_t c = 0; c < est.blocks.size(); ++c) {
    if (est.blocks[c].is_second_order) continue;
    out.max_construct_share_pct = std::max(
        out.max_construct_share_pct, construct_variance_share(est.block_loadings[c], p_total));
  }
  out.total_variance_pct =
      total_variance_explained(sub, static_cast<int>(substantive.constructs.size()));

  const bool ok = out.srmr_delta <= tol.srmr_delta && out.nfi_delta <= tol.nfi_delta &&
                  out.max_construct_share_pct < tol.max_share_pct;
  out.verdict = ok ? "no concern" : "concern";
  return out;
}

ValidityReport validity_report(const ValidatedSample& sample, const PlsEstimate& est,
                               const PsychoThresholds& thresholds) {
  // Discriminant validity runs over first-order non-marker blocks; second-order
  // blocks repeat their components' indicators and would fail by construction.
  std::vector<std::size_t> keep;
  for (std::size_t c = 0; c < est.blocks.size(); ++c) {
    if (est.blocks[c].is_second_order) continue;
    if (sample.spec.marker_block && est.blocks[c].name == *sample.spec.marker_block) continue;
    keep.push_back(c);
  }

  std::vector<std::string> names;
  Eigen::VectorXd aves(static_cast<Eigen::Index>(keep.size()));
  Eigen::MatrixXd latent_corr(static_cast<Eigen::Index>(keep.size()),
                              static_cast<Eigen::Index>(keep.size()));
  for (std::size_t a = 0; a < keep.size(); ++a) {
    names.push_back(est.blocks[keep[a]].name);
    const Eigen::VectorXd clamped = est.block_loadings[keep[a]].cwiseMin(1.0).cwiseMax(-1.0);
    aves(static_cast<Eigen::Index>(a)) = ave(clamped);
    for (std::size_t b = 0; b < keep.size(); ++b)
      latent_corr(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) =
          a == b ? 1.0
                 : stats::correlation(est.scores.col(static_cast<Eigen::Index>(keep[a])),
                                      est.scores.col(static_cast<Eigen::Index>(keep[b])));
  }

  ValidityReport out;
  out.fornell_larcker = fornell_larcker(names, aves, latent_corr);

  const Eigen::MatrixXd item_corr = stats::correlation_matrix(sample.dataset.rows);
  std::vector<std::pair<std::string, std::vector<Eigen::Index>>> blocks;
  for (auto c : keep) blocks.emplace_back(est.blocks[c].name, est.blocks[c].cols);
  out.htmt = htmt(item_corr, blocks, thresholds.htmt);

  if (sample.spec.marker_block &&
      sample.spec.indicators_of(*sample.spec.marker_block).size() >= 2)
    out.cmb = cmb_marker_check(sample, *sample.spec.marker_block, {}, est.config);
  return out;
}

}  // namespace plspath
