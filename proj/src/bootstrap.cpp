#include "plspath/bootstrap.hpp"

#include <cmath>
#include <limits>

#include "plspath/common.hpp"
#include "plspath/mediation.hpp"
#include "plspath/parallel.hpp"
#include "plspath/rng.hpp"
#include "plspath/stats.hpp"

namespace plspath {

const EffectStat& BootstrapResult::effect(const std::string& id) const {
  for (const auto& e : effects)
    if (e.id == id) return e;
  throw MetricError("unknown effect: " + id);
}

BootstrapResult bootstrap(const ValidatedSample& sample, const BootstrapConfig& config) {
  if (config.B < 2) throw Error("bootstrap: B must be at least 2");

  const PlsEstimate original = estimate(sample, config.estimation);
  const auto catalog0 = effect_catalog(sample.spec, original);
  std::vector<std::string> ids;
  for (const auto& [id, value] : catalog0) ids.push_back(id);

  const auto n = sample.n;
  // One slot per replicate; an empty slot marks a failed replicate.
  std::vector<std::vector<double>> replicate_values(config.B);

  parallel_for(
      config.B,
      [&](std::size_t b) {
        Rng rng(mix_seed(config.seed, b));
        Eigen::MatrixXd rows(sample.dataset.rows.rows(), sample.dataset.rows.cols());
        for (Eigen::Index i = 0; i < rows.rows(); ++i)
          rows.row(i) = sample.dataset.rows.row(static_cast<Eigen::Index>(rng.next_index(n)));

        PlsEstimate est;
        try {
          const auto resample = validate(dataset_from_matrix(rows, sample.dataset.column_names),
                                         sample.spec);
          est = estimate(resample, config.estimation);
        } catch (const Error&) {
          return;  // failed replicate
        }
        if (!est.converged) return;

        // Align replicate block signs to the original fit so sampling noise in
        // score orientation does not inflate the standard errors.
        std::vector<double> sign(est.blocks.size(), 1.0);
        for (std::size_t c = 0; c < est.blocks.size(); ++c)
          if (est.block_loadings[c].dot(original.block_loadings[c]) < 0.0) sign[c] = -1.0;

        std::map<std::pair<std::string, std::string>, double> betas;
        for (const auto& p : est.paths) {
          const auto src = static_cast<std::size_t>(est.block_index(p.source));
          const auto tgt = static_cast<std::size_t>(est.block_index(p.target));
          betas[{p.source, p.target}] = p.beta * sign[src] * sign[tgt];
        }
        const auto catalog = effect_catalog(sample.spec, betas);
        std::vector<double> values;
        values.reserve(ids.size());
        for (const auto& id : ids) values.push_back(catalog.at(id));
        replicate_values[b] = std::move(values);
      },
      config.threads);

  std::size_t succeeded = 0;
  for (const auto& v : replicate_values)
    if (!v.empty()) ++succeeded;
  if (succeeded == 0) throw EstimationError("bootstrap: all replicates failed");

  BootstrapResult result;
  result.B = config.B;
  result.seed = config.seed;
  result.failed_replicates = config.B - succeeded;
  result.n = n;

  const double df = static_cast<double>(n) - 1.0;
  const double tail = (1.0 - config.ci_level) / 2.0;
  for (std::size_t k = 0; k < ids.size(); ++k) {
    std::vector<double> draws;
    draws.reserve(succeeded);
    for (const auto& v : replicate_values)
      if (!v.empty()) draws.push_back(v[k]);

    EffectStat stat;
    stat.id = ids[k];
    stat.estimate = catalog0.at(ids[k]);
    Eigen::Map<const Eigen::VectorXd> dv(draws.data(), static_cast<Eigen::Index>(draws.size()));
    stat.se = stats::sd(dv);
    if (stat.se > 0.0) {
      stat.t = stat.estimate / stat.se;
      stat.p = stats::t_two_sided_p(stat.t, df);
    } else {
      stat.degenerate = true;
      stat.t = 0.0;
      stat.p = 1.0;
    }
    stat.ci_lo = stats::quantile(draws, tail);
    stat.ci_hi = stats::quantile(draws, 1.0 - tail);
    result.effects.push_back(std::move(stat));
  }
  return result;
}

Significance effect_significance(const BootstrapResult& result, const std::string& effect_id,
                                 double alpha) {
  const auto& stat = result.effect(effect_id);
  Significance out;
  out.t = stat.t;
  out.p = stat.p;
  if (stat.degenerate)
    out.verdict = "degenerate";
  else
    out.verdict = stat.p <= alpha ? "significant" : "not significant";
  return out;
}

}  // namespace plspath
