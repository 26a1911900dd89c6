#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "plspath/dataset.hpp"
#include "plspath/pls.hpp"

namespace plspath {

struct BootstrapConfig {
  std::size_t B = 5000;
  std::uint64_t seed = 1;
  double ci_level = 0.95;  // percentile interval
  unsigned threads = 0;    // 0 = hardware concurrency
  EstimationConfig estimation;
};

struct EffectStat {
  std::string id;        // effect-catalog key ("A->B", "IE:...", "TIE:...", ...)
  double estimate = 0.0; // point estimate from the original fit
  double se = 0.0;       // bootstrap standard error
  double t = 0.0;        // estimate / se
  double p = 1.0;        // two-sided, t reference with n-1 df
  double ci_lo = 0.0;
  double ci_hi = 0.0;
  bool degenerate = false;  // se == 0
};

struct BootstrapResult {
  std::vector<EffectStat> effects;
  std::size_t B = 0;
  std::uint64_t seed = 0;
  std::size_t failed_replicates = 0;
  std::size_t n = 0;  // original sample size (t reference df = n-1)

  const EffectStat& effect(const std::string& id) const;  // throws MetricError
};

// Resamples n rows with replacement B times, re-estimates each replicate, and
// aggregates every effect of the effect catalog (paths, specific indirect
// products, totals). Replicate block signs are aligned to the original
// estimate via the loading-sum correlation rule. Non-converged or failed
// replicates are dropped and counted. Deterministic for a fixed seed,
// independent of thread count.
BootstrapResult bootstrap(const ValidatedSample& sample, const BootstrapConfig& config = {});

struct Significance {
  double t = 0.0;
  double p = 1.0;
  std::string verdict;  // "significant" | "not significant" | "degenerate"
};

// Verdict "significant" iff p <= alpha (degenerate zero-SE, zero-estimate
// effects are never significant).
Significance effect_significance(const BootstrapResult& result, const std::string& effect_id,
                                 double alpha = 0.05);

}  // namespace plspath
