#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace plspath {

// Roster order is the tie-break order everywhere.
enum class Classifier { kBayes, kLogistic, kLwl, kAdaboostM1, kOneR, kC45 };

const std::vector<Classifier>& classifier_roster();
std::string classifier_name(Classifier c);
Classifier classifier_from_name(const std::string& name);  // throws ClassifyError

struct BinaryTask {
  Eigen::MatrixXd features;  // n x m
  std::vector<int> labels;   // 0/1, label 1 iff score >= threshold_value
  int threshold_decile = 0;
  double threshold_value = 0.0;
};

// Threshold is the d-th decile of the scores by linear-interpolation quantile;
// labels follow the >= rule. Errors on constant scores or a single-class result.
std::vector<int> binarize_by_decile(const std::vector<double>& scores, int decile,
                                    double* threshold_out = nullptr);

BinaryTask make_binary_task(const Eigen::MatrixXd& features, const std::vector<double>& scores,
                            int decile);

struct ConfusionCounts {
  std::size_t tp = 0, fp = 0, fn = 0, tn = 0;
  std::size_t total() const { return tp + fp + fn + tn; }
};

struct MetricRecord {
  double accuracy = 0.0;
  std::optional<double> precision;  // TP/(TP+FP), unset when the denominator is 0
  std::optional<double> recall;     // TP/(TP+FN); TP rate
  std::optional<double> f_measure;
  std::optional<double> fp_rate;  // FP/(FP+TN)
};

MetricRecord confusion_metrics(const ConfusionCounts& counts);  // throws on total 0

// Stratified k-fold cross-validation, pooled confusion counts. Deterministic
// for (task, seed). Throws ClassifyError when stratification is infeasible
// (folds exceeding the minority-class count).
ConfusionCounts run_classifier(Classifier c, const BinaryTask& task, int folds = 10,
                               std::uint64_t seed = 1);

// Train on the whole task and score the same rows (oracle hook).
double training_accuracy(Classifier c, const BinaryTask& task);

// Root split (feature index, threshold) chosen by maximum gain ratio.
std::pair<int, double> c45_root_split(const BinaryTask& task);

struct ClassifierReport {
  Classifier classifier = Classifier::kBayes;
  ConfusionCounts counts;
  MetricRecord metrics;
};

// Recall >= 0.75 gate, then maximum precision; fallback to maximum accuracy
// with precision as tie-break; remaining ties go to roster order.
Classifier best_performer(const std::vector<ClassifierReport>& reports);

// >90 very good, [70,90] good, [60,70) okay, <60 below practical threshold.
std::string accuracy_band(double accuracy_pct);

struct ClassificationReport {
  std::vector<ClassifierReport> per_classifier;
  int folds = 10;
  std::uint64_t seed = 0;
  int decile = 0;
  double threshold_value = 0.0;
  Classifier best = Classifier::kBayes;
  double best_accuracy_pct = 0.0;
  std::string band;
};

// All requested classifiers on one fixed-decile task.
ClassificationReport classify_suite(const BinaryTask& task,
                                    const std::vector<Classifier>& classifiers,
                                    int folds = 10, std::uint64_t seed = 1);

// Runs the suite on every feasible decile 1..9 and keeps the decile whose best
// classifier wins under the best_performer rule; ties go to the decile closest
// to 5, then the lower one. Throws ClassifyError when no decile is feasible.
ClassificationReport select_threshold(const std::vector<double>& scores,
                                      const Eigen::MatrixXd& features,
                                      const std::vector<Classifier>& classifiers,
                                      std::uint64_t seed = 1, int folds = 10,
                                      unsigned threads = 0);

}  // namespace plspath
