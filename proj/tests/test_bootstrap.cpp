#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "plspath/bootstrap.hpp"
#include "plspath/common.hpp"
#include "plspath/synth.hpp"

using namespace plspath;

namespace {

ValidatedSample mediation_sample(std::size_t n, std::uint64_t seed) {
  const std::string base = R"(gspec v1
construct A: a1 a2
construct B: b1 b2
construct C: c1 c2
edge A -> B
edge B -> C
edge A -> C
outcome C
path A -> B = 0.6
path B -> C = 0.5
path A -> C = 0.3
noise B = 0.8
noise C = 0.70356236397
indicator_noise a1 = 0.4
indicator_noise a2 = 0.4
indicator_noise b1 = 0.4
indicator_noise b2 = 0.4
indicator_noise c1 = 0.4
indicator_noise c2 = 0.4
)";
  const auto gspec = parse_generator_spec(base + "n = " + std::to_string(n) +
                                          "\nseed = " + std::to_string(seed) + "\n");
  return validate(generate(gspec), gspec.spec);
}

BootstrapConfig small_config(std::size_t B, unsigned threads = 0) {
  BootstrapConfig cfg;
  cfg.B = B;
  cfg.seed = 1;
  cfg.threads = threads;
  return cfg;
}

}  // namespace

TEST_CASE("B below 2 is rejected") {
  const auto sample = mediation_sample(120, 3);
  CHECK_THROWS_AS((void)bootstrap(sample, small_config(1)), Error);
}

TEST_CASE("results are deterministic and thread-count independent") {
  const auto sample = mediation_sample(120, 5);
  const auto one = bootstrap(sample, small_config(60, 1));
  const auto four = bootstrap(sample, small_config(60, 4));
  const auto again = bootstrap(sample, small_config(60, 4));

  REQUIRE(one.effects.size() == four.effects.size());
  for (std::size_t i = 0; i < one.effects.size(); ++i) {
    CHECK(one.effects[i].id == four.effects[i].id);
    CHECK(one.effects[i].se == four.effects[i].se);
    CHECK(one.effects[i].ci_lo == four.effects[i].ci_lo);
    CHECK(one.effects[i].ci_hi == four.effects[i].ci_hi);
    CHECK(four.effects[i].se == again.effects[i].se);
  }
  CHECK(one.failed_replicates == four.failed_replicates);
}

TEST_CASE("effect statistics are internally consistent") {
  const auto sample = mediation_sample(150, 7);
  const auto result = bootstrap(sample, small_config(200));
  CHECK(result.B == 200);
  CHECK(result.n == 150);

  for (const auto& e : result.effects) {
    if (!e.degenerate) CHECK(e.t == doctest::Approx(e.estimate / e.se).epsilon(1e-12));
    CHECK(e.p >= 0.0);
    CHECK(e.p <= 1.0);
    CHECK(e.ci_lo <= e.ci_hi);
  }

  // The catalog carries the decomposition identity at the point estimates.
  const double de = result.effect("A->C").estimate;
  const double tie = result.effect("TIE:A->C").estimate;
  const double te = result.effect("TE:A->C").estimate;
  CHECK(te == doctest::Approx(de + tie).epsilon(1e-10));
  CHECK(result.effect("IE:A->B->C").estimate == doctest::Approx(tie).epsilon(1e-10));
  CHECK_THROWS_AS((void)result.effect("nope"), MetricError);
}

TEST_CASE("a strong path is highly significant") {
  const auto sample = mediation_sample(400, 11);
  const auto result = bootstrap(sample, small_config(500));
  CHECK(result.effect("A->B").p < 0.001);
  CHECK(result.effect("A->B").t > 3.0);

  const auto sig = effect_significance(result, "A->B");
  CHECK(sig.verdict == "significant");
  CHECK(sig.t == result.effect("A->B").t);
}

TEST_CASE("replicates that lose all variation are dropped and counted") {
  // One indicator is constant except for a single row, so many resamples
  // produce a constant column and fail validation.
  auto sample = mediation_sample(8, 13);
  auto rows = sample.dataset.rows;
  const auto col = sample.dataset.column_index("a2");
  rows.col(col).setConstant(4.0);
  rows(0, col) = 5.0;
  auto patched = dataset_from_matrix(rows, sample.dataset.column_names);
  const auto tiny = validate(patched, sample.spec);

  const auto result = bootstrap(tiny, small_config(100));
  CHECK(result.failed_replicates > 0);
  CHECK(result.failed_replicates < 100);
}

TEST_CASE("degenerate zero effects are never significant") {
  BootstrapResult fake;
  fake.n = 50;
  fake.B = 10;
  EffectStat stat;
  stat.id = "X->Y";
  stat.estimate = 0.0;
  stat.se = 0.0;
  stat.degenerate = true;
  fake.effects.push_back(stat);
  CHECK(effect_significance(fake, "X->Y").verdict == "degenerate");
}

TEST_CASE("confidence level controls the interval width") {
  const auto sample = mediation_sample(120, 17);
  auto narrow_cfg = small_config(300);
  narrow_cfg.ci_level = 0.80;
  auto wide_cfg = small_config(300);
  wide_cfg.ci_level = 0.99;
  const auto narrow = bootstrap(sample, narrow_cfg);
  const auto wide = bootstrap(sample, wide_cfg);
  const auto& n_eff = narrow.effect("A->B");
  const auto& w_eff = wide.effect("A->B");
  CHECK(w_eff.ci_hi - w_eff.ci_lo > n_eff.ci_hi - n_eff.ci_lo);
}
