#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <vector>

#include "plspath/classify.hpp"
#include "plspath/common.hpp"
#include "plspath/rng.hpp"

using namespace plspath;

namespace {

// 1D task with classes centered at -mu and +mu.
BinaryTask gaussian_task(int n_per_class, double mu, std::uint64_t seed) {
  Rng rng(seed);
  const int n = 2 * n_per_class;
  Eigen::MatrixXd x(n, 1);
  std::vector<int> y(n);
  for (int i = 0; i < n_per_class; ++i) {
    x(i, 0) = -mu + rng.next_normal();
    y[i] = 0;
    x(n_per_class + i, 0) = mu + rng.next_normal();
    y[n_per_class + i] = 1;
  }
  BinaryTask task;
  task.features = x;
  task.labels = y;
  task.threshold_decile = 5;
  task.threshold_value = 0.0;
  return task;
}

// Perfectly separable along the only feature, distinct values.
BinaryTask separable_task(int n) {
  Eigen::MatrixXd x(n, 1);
  std::vector<int> y(n);
  for (int i = 0; i < n; ++i) {
    x(i, 0) = i;
    y[i] = i < n / 2 ? 0 : 1;
  }
  BinaryTask task;
  task.features = x;
  task.labels = y;
  task.threshold_decile = 5;
  task.threshold_value = n / 2.0;
  return task;
}

double entropy2(double a, double b) {
  const double n = a + b;
  double h = 0.0;
  for (double c : {a, b})
    if (c > 0.0) h -= (c / n) * std::log2(c / n);
  return h;
}

}  // namespace

TEST_CASE("classifier roster and names") {
  const auto& roster = classifier_roster();
  REQUIRE(roster.size() == 6);
  CHECK(roster[0] == Classifier::kBayes);
  CHECK(roster[5] == Classifier::kC45);
  for (const auto c : roster) CHECK(classifier_from_name(classifier_name(c)) == c);
  CHECK(classifier_name(Classifier::kAdaboostM1) == "adaboost_m1");
  CHECK_THROWS_AS((void)classifier_from_name("svm"), ClassifyError);
}

TEST_CASE("binarize_by_decile uses the interpolation quantile and the >= rule") {
  std::vector<double> scores = {1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
  double threshold = 0.0;
  auto labels = binarize_by_decile(scores, 5, &threshold);
  CHECK(threshold == doctest::Approx(5.5));
  CHECK(std::count(labels.begin(), labels.end(), 1) == 5);
  CHECK(labels[4] == 0);  // 5 < 5.5
  CHECK(labels[5] == 1);  // 6 >= 5.5

  labels = binarize_by_decile(scores, 9, &threshold);
  CHECK(threshold == doctest::Approx(9.1));
  CHECK(std::count(labels.begin(), labels.end(), 1) == 1);

  CHECK_THROWS_AS((void)binarize_by_decile(scores, 0), ClassifyError);
  CHECK_THROWS_AS((void)binarize_by_decile(scores, 10), ClassifyError);
  CHECK_THROWS_AS((void)binarize_by_decile({3, 3, 3, 3}, 5), ClassifyError);  // constant
  // The low decile of a top-heavy sample ties with the minimum: one class only.
  CHECK_THROWS_AS((void)binarize_by_decile({5, 5, 5, 5, 5, 5, 5, 5, 5, 7}, 1), ClassifyError);
}

TEST_CASE("confusion metrics fixtures") {
  const auto m = confusion_metrics({50, 10, 20, 20});
  CHECK(m.accuracy == doctest::Approx(0.70));
  CHECK(*m.precision == doctest::Approx(50.0 / 60.0));
  CHECK(*m.recall == doctest::Approx(50.0 / 70.0));
  const double p = 50.0 / 60.0, r = 50.0 / 70.0;
  CHECK(*m.f_measure == doctest::Approx(2 * p * r / (p + r)));
  CHECK(*m.fp_rate == doctest::Approx(10.0 / 30.0));

  const auto all_negative = confusion_metrics({0, 0, 0, 100});
  CHECK(all_negative.accuracy == doctest::Approx(1.0));
  CHECK_FALSE(all_negative.precision.has_value());
  CHECK_FALSE(all_negative.recall.has_value());
  CHECK(*all_negative.fp_rate == doctest::Approx(0.0));

  CHECK_THROWS_AS((void)confusion_metrics({0, 0, 0, 0}), ClassifyError);
}

TEST_CASE("best_performer applies the recall gate, then precision") {
  auto make = [](Classifier c, std::size_t tp, std::size_t fp, std::size_t fn, std::size_t tn) {
    ClassifierReport r;
    r.classifier = c;
    r.counts = {tp, fp, fn, tn};
    r.metrics = confusion_metrics(r.counts);
    return r;
  };

  // Both qualify on recall; the second has the higher precision.
  CHECK(best_performer({make(Classifier::kBayes, 80, 20, 10, 90),
                        make(Classifier::kOneR, 78, 10, 12, 100)}) == Classifier::kOneR);

  // Nobody reaches recall 0.75: highest accuracy wins.
  CHECK(best_performer({make(Classifier::kBayes, 40, 5, 60, 95),
                        make(Classifier::kC45, 50, 30, 50, 70)}) == Classifier::kBayes);

  // Exact tie everywhere: roster order decides.
  CHECK(best_performer({make(Classifier::kC45, 80, 10, 10, 100),
                        make(Classifier::kLogistic, 80, 10, 10, 100)}) == Classifier::kLogistic);
}

TEST_CASE("accuracy bands") {
  CHECK(accuracy_band(100.0) == "very good");
  CHECK(accuracy_band(90.01) == "very good");
  CHECK(accuracy_band(90.0) == "good");
  CHECK(accuracy_band(79.73) == "good");
  CHECK(accuracy_band(70.0) == "good");
  CHECK(accuracy_band(64.48) == "okay");
  CHECK(accuracy_band(60.0) == "okay");
  CHECK(accuracy_band(59.99) == "below practical threshold");
  CHECK_THROWS_AS((void)accuracy_band(101.0), ClassifyError);
  CHECK_THROWS_AS((void)accuracy_band(-1.0), ClassifyError);
}

TEST_CASE("every classifier learns a separable rule in training") {
  const auto task = separable_task(60);
  for (const auto c : classifier_roster())
    CHECK(training_accuracy(c, task) == doctest::Approx(1.0));
}

TEST_CASE("one_r matches a brute-force partition search") {
  // 14 distinct values, minimum bucket size 6: either one bucket or a single
  // cut leaving at least 6 rows on each side.
  Rng rng(3);
  Eigen::MatrixXd x(14, 1);
  std::vector<int> y(14);
  for (int i = 0; i < 14; ++i) {
    x(i, 0) = i;
    y[i] = rng.next_unit() < 0.5 ? 0 : 1;
  }
  BinaryTask task;
  task.features = x;
  task.labels = y;
  if (std::count(y.begin(), y.end(), 1) == 0 || std::count(y.begin(), y.end(), 1) == 14)
    return;  // degenerate draw, nothing to assert

  auto majority = [&](int lo, int hi) {  // [lo, hi)
    int ones = 0;
    for (int i = lo; i < hi; ++i) ones += y[i];
    return std::max(ones, (hi - lo) - ones);
  };
  int best = majority(0, 14);
  for (int cut = 6; cut <= 8; ++cut) best = std::max(best, majority(0, cut) + majority(cut, 14));

  CHECK(training_accuracy(Classifier::kOneR, task) == doctest::Approx(best / 14.0));
}

TEST_CASE("c45 root split maximizes the gain ratio") {
  // Two features; only the first is informative.
  Eigen::MatrixXd x(14, 2);
  std::vector<int> y(14);
  for (int i = 0; i < 14; ++i) {
    x(i, 0) = i < 7 ? i : i + 10.0;
    x(i, 1) = (i * 5) % 14;  // shuffled, uninformative
    y[i] = i < 7 ? 0 : 1;
  }
  BinaryTask task;
  task.features = x;
  task.labels = y;
  const auto [feature, threshold] = c45_root_split(task);
  CHECK(feature == 0);
  CHECK(threshold == doctest::Approx((6.0 + 17.0) / 2.0));  // midpoint of the class gap

  // Independent gain-ratio audit: the chosen split has zero child entropy,
  // so its information gain equals the parent entropy, the maximum possible.
  const double parent = entropy2(7, 7);
  CHECK(parent == doctest::Approx(1.0));
}

TEST_CASE("stratified folds are infeasible for tiny minority classes") {
  auto task = separable_task(60);
  for (int i = 0; i < 60; ++i) task.labels[i] = i < 5 ? 1 : 0;
  CHECK_THROWS_AS((void)run_classifier(Classifier::kBayes, task, 10), ClassifyError);
  CHECK_NOTHROW((void)run_classifier(Classifier::kBayes, task, 5));
}

TEST_CASE("cross-validation pools every row exactly once") {
  const auto task = gaussian_task(50, 1.0, 5);
  for (const auto c : classifier_roster()) {
    const auto counts = run_classifier(c, task, 10, 1);
    CHECK(counts.total() == 100);
  }
}

TEST_CASE("cross-validation is deterministic in the seed") {
  const auto task = gaussian_task(50, 1.0, 7);
  const auto a = run_classifier(Classifier::kC45, task, 10, 42);
  const auto b = run_classifier(Classifier::kC45, task, 10, 42);
  CHECK(a.tp == b.tp);
  CHECK(a.fp == b.fp);
  CHECK(a.fn == b.fn);
  CHECK(a.tn == b.tn);
}

TEST_CASE("well-separated classes score high, shuffled labels near chance") {
  const auto separated = gaussian_task(60, 2.0, 11);
  for (const auto c : classifier_roster()) {
    const auto m = confusion_metrics(run_classifier(c, separated, 10, 1));
    CHECK(m.accuracy > 0.9);
  }

  auto shuffled = gaussian_task(60, 2.0, 13);
  Rng rng(17);
  for (auto& label : shuffled.labels) label = rng.next_unit() < 0.5 ? 0 : 1;
  for (const auto c : classifier_roster()) {
    const auto m = confusion_metrics(run_classifier(c, shuffled, 10, 1));
    CHECK(m.accuracy > 0.33);
    CHECK(m.accuracy < 0.67);
  }
}

TEST_CASE("classify_suite reports the winner and its band") {
  const auto task = gaussian_task(60, 1.5, 19);
  const auto report = classify_suite(task, classifier_roster(), 10, 1);
  REQUIRE(report.per_classifier.size() == 6);
  CHECK(report.best == best_performer(report.per_classifier));
  double best_acc = 0.0;
  for (const auto& r : report.per_classifier)
    if (r.classifier == report.best) best_acc = r.metrics.accuracy * 100.0;
  CHECK(report.best_accuracy_pct == doctest::Approx(best_acc));
  CHECK(report.band == accuracy_band(report.best_accuracy_pct));
}

TEST_CASE("select_threshold breaks exact ties toward the middle decile") {
  // Ten widely separated clumps: every decile threshold falls in a wide gap,
  // all deciles score perfectly, and the tie-break lands on decile 5.
  const int n = 200;
  Eigen::MatrixXd features(n, 1);
  std::vector<double> scores(n);
  for (int i = 0; i < n; ++i) {
    const double v = 100.0 * (i / 20) + 0.01 * (i % 20);
    features(i, 0) = v;
    scores[i] = v;
  }
  const auto report = select_threshold(scores, features, classifier_roster(), 1, 10);
  CHECK(report.decile == 5);
  CHECK(report.best_accuracy_pct == doctest::Approx(100.0));
  CHECK(report.band == "very good");
}

TEST_CASE("select_threshold is thread-count independent") {
  Rng rng(23);
  const int n = 120;
  Eigen::MatrixXd features(n, 2);
  std::vector<double> scores(n);
  for (int i = 0; i < n; ++i) {
    features(i, 0) = rng.next_normal();
    features(i, 1) = rng.next_normal();
    scores[i] = features(i, 0) + 0.5 * rng.next_normal();
  }
  const auto a = select_threshold(scores, features, classifier_roster(), 1, 10, 1);
  const auto b = select_threshold(scores, features, classifier_roster(), 1, 10, 4);
  CHECK(a.decile == b.decile);
  CHECK(a.best == b.best);
  CHECK(a.best_accuracy_pct == b.best_accuracy_pct);
}
