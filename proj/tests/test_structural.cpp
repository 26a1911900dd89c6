#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <Eigen/Dense>
#include <cmath>

#include "plspath/common.hpp"
#include "plspath/stats.hpp"
#include "plspath/structural.hpp"
#include "plspath/synth.hpp"

using namespace plspath;

namespace {

ValidatedSample simple_sample(double beta, std::size_t n, std::uint64_t seed) {
  std::string text = R"(gspec v1
construct A: a1 a2 a3
construct B: b1 b2 b3
edge A -> B
outcome B
indicator_noise a1 = 0.4
indicator_noise a2 = 0.4
indicator_noise a3 = 0.4
indicator_noise b1 = 0.4
indicator_noise b2 = 0.4
indicator_noise b3 = 0.4
)";
  text += "path A -> B = " + std::to_string(beta) + "\n";
  text += "noise B = " + std::to_string(std::sqrt(1.0 - beta * beta)) + "\n";
  text += "n = " + std::to_string(n) + "\nseed = " + std::to_string(seed) + "\n";
  const auto gspec = parse_generator_spec(text);
  return validate(generate(gspec), gspec.spec);
}

ValidatedSample two_parent_sample(double ba, double bb, std::size_t n, std::uint64_t seed) {
  std::string text = R"(gspec v1
construct A: a1 a2
construct B: b1 b2
construct C: c1 c2
edge A -> C
edge B -> C
outcome C
indicator_noise a1 = 0.4
indicator_noise a2 = 0.4
indicator_noise b1 = 0.4
indicator_noise b2 = 0.4
indicator_noise c1 = 0.4
indicator_noise c2 = 0.4
)";
  text += "path A -> C = " + std::to_string(ba) + "\n";
  text += "path B -> C = " + std::to_string(bb) + "\n";
  text += "noise C = " + std::to_string(std::sqrt(1.0 - ba * ba - bb * bb)) + "\n";
  text += "n = " + std::to_string(n) + "\nseed = " + std::to_string(seed) + "\n";
  const auto gspec = parse_generator_spec(text);
  return validate(generate(gspec), gspec.spec);
}

}  // namespace

TEST_CASE("r_square follows the score decomposition") {
  const auto sample = simple_sample(0.6, 2000, 3);
  const auto fit = estimate(sample);
  const double r2 = r_square(fit, "B");
  CHECK(r2 == doctest::Approx(0.36).epsilon(0.12));

  const auto fs = predicted_scores(fit, "B");
  CHECK(r2 == doctest::Approx(1.0 - fs.rss / fs.tss).epsilon(1e-10));
  const double r = stats::correlation(fs.fitted, fit.score_of("B"));
  CHECK(r2 == doctest::Approx(r * r).epsilon(1e-9));
  CHECK_THROWS_AS((void)r_square(fit, "A"), EstimationError);
}

TEST_CASE("f_square_band fixtures and boundaries") {
  CHECK(f_square_band(0.354) == "large");
  CHECK(f_square_band(0.35) == "large");
  CHECK(f_square_band(0.229) == "medium");
  CHECK(f_square_band(0.20) == "medium");
  CHECK(f_square_band(0.16) == "small");
  CHECK(f_square_band(0.15) == "small");
  CHECK(f_square_band(0.149) == "trivial");
  CHECK(f_square_band(0.0) == "trivial");
}

TEST_CASE("f_square of a sole parent reduces to R2/(1-R2)") {
  const auto sample = simple_sample(0.6, 2000, 5);
  const auto fit = estimate(sample);
  const double r2 = r_square(fit, "B");
  const auto es = f_square(sample, {"A", "B"});
  CHECK(es.value == doctest::Approx(r2 / (1.0 - r2)).epsilon(1e-9));
  CHECK(es.band == f_square_band(es.value));
}

TEST_CASE("f_square of a null edge is negligible") {
  const auto sample = two_parent_sample(0.6, 0.0, 2000, 7);
  const auto es = f_square(sample, {"B", "C"});
  CHECK(std::abs(es.value) < 5e-3);
  CHECK(es.band == "trivial");
}

TEST_CASE("q_square_blindfold input validation") {
  const auto sample = simple_sample(0.6, 350, 11);  // 350 = 7 * 50
  CHECK_THROWS_AS((void)q_square_blindfold(sample, "B", 7), MetricError);
  CHECK_THROWS_AS((void)q_square_blindfold(sample, "B", 1), MetricError);
  CHECK_THROWS_AS((void)q_square_blindfold(sample, "A", 8), MetricError);  // exogenous target
}

TEST_CASE("q_square_blindfold is positive for a predictive model") {
  const auto sample = simple_sample(0.7, 501, 13);
  const auto fit = estimate(sample);
  const double q2 = q_square_blindfold(sample, "B", 7);
  CHECK(q2 > 0.0);
  CHECK(q2 <= r_square(fit, "B") + 0.05);
}

TEST_CASE("q_square_blindfold hovers near zero without signal") {
  const auto sample = simple_sample(0.0, 501, 17);
  const double q2 = q_square_blindfold(sample, "B", 7);
  CHECK(std::abs(q2) < 0.05);
}

TEST_CASE("srmr matches a recomputation from the correlation residuals") {
  const auto sample = simple_sample(0.6, 800, 19);
  const auto fit = estimate(sample);
  const auto obs = observed_indicator_correlations(fit);
  const auto imp = implied_indicator_correlations(fit);

  double sum = 0.0;
  int cells = 0;
  for (int i = 0; i < obs.rows(); ++i)
    for (int j = 0; j <= i; ++j) {
      const double d = obs(i, j) - imp(i, j);
      sum += d * d;
      ++cells;
    }
  CHECK(srmr(fit) == doctest::Approx(std::sqrt(sum / cells)).epsilon(1e-10));
  CHECK(srmr(fit) < 0.08);  // well-specified generator
  for (int i = 0; i < obs.rows(); ++i) CHECK(imp(i, i) == doctest::Approx(1.0));
}

TEST_CASE("nfi matches the ML discrepancy recomputation") {
  const auto sample = simple_sample(0.6, 800, 23);
  const auto fit = estimate(sample);
  const auto obs = observed_indicator_correlations(fit);
  const auto imp = implied_indicator_correlations(fit);
  const double p = static_cast<double>(obs.rows());

  const double f_model = std::log(imp.determinant()) - std::log(obs.determinant()) +
                         (obs * imp.inverse()).trace() - p;
  const double f_null = -std::log(obs.determinant());
  const double scale = static_cast<double>(fit.n_train) - 1.0;
  CHECK(nfi(fit) == doctest::Approx(1.0 - (scale * f_model) / (scale * f_null)).epsilon(1e-9));
  CHECK(nfi(fit) > 0.9);
  CHECK(nfi(fit) <= 1.0);
}

TEST_CASE("structural_report assembles consistent metrics") {
  const auto sample = two_parent_sample(0.5, 0.4, 600, 29);
  const auto fit = estimate(sample);
  const auto report = structural_report(sample, fit);

  REQUIRE(report.r2.size() == 1);
  CHECK(report.r2.at("C") == doctest::Approx(r_square(fit, "C")).epsilon(1e-10));
  CHECK(report.r2_strong.at("C") == (report.r2.at("C") > 0.26));
  REQUIRE(report.f2.size() == 2);
  for (const auto& ee : report.f2) {
    CHECK(ee.f2 == doctest::Approx(f_square(sample, ee.edge).value).epsilon(1e-9));
    CHECK(ee.band == f_square_band(ee.f2));
  }
  CHECK(report.q2.count("C") == 1);
  CHECK(report.srmr == doctest::Approx(srmr(fit)).epsilon(1e-12));
  CHECK(report.nfi == doctest::Approx(nfi(fit)).epsilon(1e-12));
  CHECK(report.srmr_pass == (report.srmr <= 0.08));
  CHECK(report.nfi_pass == (report.nfi >= 0.90));
}

TEST_CASE("structural_report bumps the omission distance when it divides n") {
  const auto sample = simple_sample(0.6, 700, 31);  // 700 = 7 * 100
  const auto fit = estimate(sample);
  StructuralReport report;
  CHECK_NOTHROW(report = structural_report(sample, fit, {}, 7));
  CHECK(report.q2.at("B") == doctest::Approx(q_square_blindfold(sample, "B", 8)).epsilon(1e-12));
}
