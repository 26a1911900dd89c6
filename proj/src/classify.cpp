#include "plspath/classify.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <memory>
#include <numeric>

#include "plspath/common.hpp"
#include "plspath/parallel.hpp"
#include "plspath/rng.hpp"
#include "plspath/stats.hpp"

namespace plspath {

namespace {

using Predictor = std::function<int(const Eigen::RowVectorXd&)>;

// ---- decision stump (weighted) ---------------------------------------------

struct Stump {
  int feature = -1;  // -1: constant
  double threshold = 0.0;
  int left_label = 0;  // x[feature] < threshold
  int right_label = 0;

  int predict(const Eigen::RowVectorXd& x) const {
    if (feature < 0) return right_label;
    return x(feature) < threshold ? left_label : right_label;
  }
};

int weighted_majority(double w1, double w0) { return w1 > w0 ? 1 : 0; }

Stump fit_stump(const Eigen::MatrixXd& x, const std::vector<int>& y,
                const std::vector<double>& w) {
  const auto n = static_cast<std::size_t>(x.rows());
  const int m = static_cast<int>(x.cols());
  double w1 = 0.0, w0 = 0.0;
  for (std::size_t i = 0; i < n; ++i) (y[i] == 1 ? w1 : w0) += w[i];

  Stump best;
  best.right_label = weighted_majority(w1, w0);
  double best_err = std::min(w1, w0);

  std::vector<std::size_t> order(n);
  for (int f = 0; f < m; ++f) {
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return x(a, f) < x(b, f); });
    double l1 = 0.0, l0 = 0.0;
    for (std::size_t i = 0; i + 1 < n; ++i) {
      const auto idx = order[i];
      (y[idx] == 1 ? l1 : l0) += w[idx];
      if (x(order[i + 1], f) <= x(idx, f)) continue;
      const double r1 = w1 - l1, r0 = w0 - l0;
      const double err = std::min(l1, l0) + std::min(r1, r0);
      if (err < best_err - 1e-15) {
        best_err = err;
        best.feature = f;
        best.threshold = (x(idx, f) + x(order[i + 1], f)) / 2.0;
        best.left_label = weighted_majority(l1, l0);
        best.right_label = weighted_majority(r1, r0);
      }
    }
  }
  return best;
}

// ---- naive Bayes ------------------------------------------------------------

Predictor fit_bayes(const Eigen::MatrixXd& x, const std::vector<int>& y) {
  const auto n = static_cast<double>(x.rows());
  const int m = static_cast<int>(x.cols());
  struct ClassStats {
    double log_prior;
    Eigen::VectorXd mean, var;
  };
  auto stats_for = [&](int label) {
    std::vector<Eigen::Index> rows;
    for (Eigen::Index i = 0; i < x.rows(); ++i)
      if (y[static_cast<std::size_t>(i)] == label) rows.push_back(i);
    ClassStats cs;
    cs.log_prior = std::log(static_cast<double>(rows.size()) / n);
    cs.mean = Eigen::VectorXd::Zero(m);
    cs.var = Eigen::VectorXd::Zero(m);
    for (const auto r : rows) cs.mean += x.row(r).transpose();
    cs.mean /= static_cast<double>(rows.size());
    for (const auto r : rows)
      cs.var += (x.row(r).transpose() - cs.mean).array().square().matrix();
    cs.var /= std::max(1.0, static_cast<double>(rows.size()) - 1.0);
    cs.var = cs.var.cwiseMax(1e-9);
    return cs;
  };
  const auto c0 = stats_for(0);
  const auto c1 = stats_for(1);
  return [c0, c1, m](const Eigen::RowVectorXd& q) {
    auto logp = [&](const ClassStats& cs) {
      double lp = cs.log_prior;
      for (int j = 0; j < m; ++j) {
        const double d = q(j) - cs.mean(j);
        lp += -0.5 * std::log(2.0 * M_PI * cs.var(j)) - d * d / (2.0 * cs.var(j));
      }
      return lp;
    };
    return logp(c1) > logp(c0) ? 1 : 0;
  };
}

// ---- logistic regression (IRLS) ---------------------------------------------

Predictor fit_logistic(const Eigen::MatrixXd& x, const std::vector<int>& y) {
  const auto n = x.rows();
  const int m = static_cast<int>(x.cols());
  Eigen::MatrixXd design(n, m + 1);
  design.col(0).setOnes();
  design.rightCols(m) = x;
  Eigen::VectorXd target(n);
  for (Eigen::Index i = 0; i < n; ++i) target(i) = y[static_cast<std::size_t>(i)];

  Eigen::VectorXd beta = Eigen::VectorXd::Zero(m + 1);
  const double ridge = 1e-8;
  for (int iter = 0; iter < 100; ++iter) {
    Eigen::VectorXd eta = design * beta;
    Eigen::VectorXd p = (1.0 / (1.0 + (-eta.array()).exp())).matrix();
    Eigen::VectorXd w = (p.array() * (1.0 - p.array())).cwiseMax(1e-10).matrix();
    Eigen::MatrixXd h = design.transpose() * w.asDiagonal() * design;
    h.diagonal().array() += ridge;
    const Eigen::VectorXd delta = h.ldlt().solve(design.transpose() * (target - p));
    beta += delta;
    if (delta.cwiseAbs().maxCoeff() < 1e-8) break;  // non-convergence keeps the last iterate
  }
  return [beta, m](const Eigen::RowVectorXd& q) {
    double eta = beta(0);
    for (int j = 0; j < m; ++j) eta += beta(j + 1) * q(j);
    return eta >= 0.0 ? 1 : 0;
  };
}

// ---- locally weighted learning ----------------------------------------------

Predictor fit_lwl(const Eigen::MatrixXd& x, const std::vector<int>& y) {
  auto xs = std::make_shared<Eigen::MatrixXd>(x);
  auto ys = std::make_shared<std::vector<int>>(y);
  return [xs, ys](const Eigen::RowVectorXd& q) {
    const auto n = xs->rows();
    Eigen::VectorXd dist(n);
    for (Eigen::Index i = 0; i < n; ++i) dist(i) = (xs->row(i) - q).norm();
    const double dmax = dist.maxCoeff();
    std::vector<double> w(static_cast<std::size_t>(n), 1.0);
    if (dmax > 0.0)
      for (Eigen::Index i = 0; i < n; ++i)
        w[static_cast<std::size_t>(i)] = 1.0 - dist(i) / dmax;
    return fit_stump(*xs, *ys, w).predict(q);
  };
}

// ---- AdaBoost.M1 over stumps -------------------------------------------------

Predictor fit_adaboost(const Eigen::MatrixXd& x, const std::vector<int>& y) {
  const auto n = static_cast<std::size_t>(x.rows());
  std::vector<double> w(n, 1.0 / static_cast<double>(n));
  auto stumps = std::make_shared<std::vector<std::pair<Stump, double>>>();

  for (int round = 0; round < 10; ++round) {
    const Stump stump = fit_stump(x, y, w);
    double err = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      if (stump.predict(x.row(static_cast<Eigen::Index>(i))) != y[i]) err += w[i];
    if (err >= 0.5) break;
    if (err <= 0.0) {
      stumps->emplace_back(stump, std::log(1.0 / 1e-10));
      break;
    }
    const double beta = err / (1.0 - err);
    stumps->emplace_back(stump, std::log(1.0 / beta));
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (stump.predict(x.row(static_cast<Eigen::Index>(i))) == y[i]) w[i] *= beta;
      total += w[i];
    }
    for (auto& wi : w) wi /= total;
  }
  if (stumps->empty()) stumps->emplace_back(fit_stump(x, y, w), 1.0);

  return [stumps](const Eigen::RowVectorXd& q) {
    double vote1 = 0.0, vote0 = 0.0;
    for (const auto& [stump, alpha] : *stumps)
      (stump.predict(q) == 1 ? vote1 : vote0) += alpha;
    return vote1 > vote0 ? 1 : 0;
  };
}

// ---- OneR with optimal bucketing ---------------------------------------------

struct OneRRule {
  int feature = 0;
  std::vector<double> cuts;    // upper boundary of bucket i (midpoints)
  std::vector<int> labels;     // cuts.size() + 1 bucket labels
  std::size_t correct = 0;

  int predict(const Eigen::RowVectorXd& q) const {
    const double v = q(feature);
    std::size_t bucket = 0;
    while (bucket < cuts.size() && v >= cuts[bucket]) ++bucket;
    return labels[bucket];
  }
};

OneRRule fit_one_r_feature(const Eigen::MatrixXd& x, const std::vector<int>& y, int f,
                           std::size_t min_bucket) {
  const auto n = static_cast<std::size_t>(x.rows());
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return x(a, f) < x(b, f); });

  // Atomic blocks: tied feature values cannot be split.
  struct Block {
    double value;
    std::size_t count = 0, ones = 0;
  };
  std::vector<Block> blocks;
  for (const auto idx : order) {
    const double v = x(static_cast<Eigen::Index>(idx), f);
    if (blocks.empty() || v > blocks.back().value) blocks.push_back({v, 0, 0});
    ++blocks.back().count;
    if (y[idx] == 1) ++blocks.back().ones;
  }
  const std::size_t m = blocks.size();
  const std::size_t minsize = std::min(min_bucket, n);

  // Optimal contiguous partition into buckets of at least minsize instances.
  std::vector<std::size_t> pc(m + 1, 0), po(m + 1, 0);  // prefix count / ones
  for (std::size_t i = 0; i < m; ++i) {
    pc[i + 1] = pc[i] + blocks[i].count;
    po[i + 1] = po[i] + blocks[i].ones;
  }
  constexpr std::size_t kUnreachable = std::numeric_limits<std::size_t>::max();
  std::vector<std::size_t> best(m + 1, kUnreachable), prev(m + 1, 0);
  best[0] = 0;
  for (std::size_t i = 1; i <= m; ++i) {
    for (std::size_t j = 0; j < i; ++j) {
      if (best[j] == kUnreachable) continue;
      if (pc[i] - pc[j] < minsize) continue;
      const std::size_t ones = po[i] - po[j];
      const std::size_t cand = best[j] + std::max(ones, (pc[i] - pc[j]) - ones);
      if (best[i] == kUnreachable || cand > best[i]) {
        best[i] = cand;
        prev[i] = j;
      }
    }
  }

  OneRRule rule;
  rule.feature = f;
  rule.correct = best[m];
  std::vector<std::size_t> bounds;  // bucket end indices, reversed
  for (std::size_t i = m; i > 0; i = prev[i]) bounds.push_back(i);
  std::reverse(bounds.begin(), bounds.end());
  std::size_t start = 0;
  for (const auto end : bounds) {
    const std::size_t ones = po[end] - po[start];
    rule.labels.push_back(2 * ones > pc[end] - pc[start] ? 1 : 0);
    if (end < m) rule.cuts.push_back((blocks[end - 1].value + blocks[end].value) / 2.0);
    start = end;
  }
  return rule;
}

Predictor fit_one_r(const Eigen::MatrixXd& x, const std::vector<int>& y) {
  OneRRule best;
  for (int f = 0; f < x.cols(); ++f) {
    auto rule = fit_one_r_feature(x, y, f, 6);
    if (f == 0 || rule.correct > best.correct) best = std::move(rule);
  }
  return [best](const Eigen::RowVectorXd& q) { return best.predict(q); };
}

// ---- C4.5-style tree -----------------------------------------------------------

double entropy(std::size_t ones, std::size_t total) {
  if (total == 0) return 0.0;
  double h = 0.0;
  for (const double c : {static_cast<double>(ones), static_cast<double>(total - ones)}) {
    if (c == 0.0) continue;
    const double p = c / static_cast<double>(total);
    h -= p * std::log2(p);
  }
  return h;
}

struct SplitChoice {
  int feature = -1;
  double threshold = 0.0;
  double gain_ratio = -1.0;
};

SplitChoice choose_split(const Eigen::MatrixXd& x, const std::vector<int>& y,
                         const std::vector<std::size_t>& idx, std::size_t min_side) {
  const std::size_t n = idx.size();
  std::size_t ones = 0;
  for (const auto i : idx) ones += static_cast<std::size_t>(y[i]);
  const double h = entropy(ones, n);

  SplitChoice best;
  std::vector<std::size_t> order;
  for (int f = 0; f < x.cols(); ++f) {
    order = idx;
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return x(a, f) < x(b, f); });
    std::size_t l_ones = 0;
    for (std::size_t i = 0; i + 1 < n; ++i) {
      l_ones += static_cast<std::size_t>(y[order[i]]);
      const std::size_t nl = i + 1, nr = n - nl;
      if (x(order[i + 1], f) <= x(order[i], f)) continue;
      if (nl < min_side || nr < min_side) continue;
      const double gain = h -
                          (static_cast<double>(nl) / n) * entropy(l_ones, nl) -
                          (static_cast<double>(nr) / n) * entropy(ones - l_ones, nr);
      if (gain <= 1e-12) continue;
      const double split_info = entropy(nl, n);
      const double ratio = gain / split_info;
      if (ratio > best.gain_ratio + 1e-12) {
        best.feature = f;
        best.threshold = (x(order[i], f) + x(order[i + 1], f)) / 2.0;
        best.gain_ratio = ratio;
      }
    }
  }
  return best;
}

struct TreeNode {
  int label = 0;  // majority at this node
  std::size_t count = 0, errors = 0;
  int feature = -1;  // -1: leaf
  double threshold = 0.0;
  std::unique_ptr<TreeNode> left, right;

  int predict(const Eigen::RowVectorXd& q) const {
    if (feature < 0) return label;
    return q(feature) < threshold ? left->predict(q) : right->predict(q);
  }
};

// Pessimistic error bound (upper confidence limit of the binomial error count).
double add_errs(double n, double e, double cf = 0.25) {
  if (e < 1.0) {
    const double base = n * (1.0 - std::pow(cf, 1.0 / n));
    if (e == 0.0) return base;
    return base + e * (add_errs(n, 1.0, cf) - base);
  }
  if (e + 0.5 >= n) return std::max(n - e, 0.0);
  const double z = stats::normal_quantile(1.0 - cf);
  const double f = (e + 0.5) / n;
  const double r = (f + z * z / (2.0 * n) +
                    z * std::sqrt(f / n - f * f / n + z * z / (4.0 * n * n))) /
                   (1.0 + z * z / n);
  return r * n - e;
}

std::unique_ptr<TreeNode> build_tree(const Eigen::MatrixXd& x, const std::vector<int>& y,
                                     const std::vector<std::size_t>& idx) {
  auto node = std::make_unique<TreeNode>();
  node->count = idx.size();
  std::size_t ones = 0;
  for (const auto i : idx) ones += static_cast<std::size_t>(y[i]);
  node->label = 2 * ones > idx.size() ? 1 : 0;
  node->errors = node->label == 1 ? idx.size() - ones : ones;
  if (node->errors == 0) return node;

  // Prefer splits leaving at least 2 per side; an impure node with only
  // singleton splits available still splits so consistent data separates.
  auto split = choose_split(x, y, idx, 2);
  if (split.feature < 0) split = choose_split(x, y, idx, 1);
  if (split.feature < 0) return node;

  std::vector<std::size_t> left, right;
  for (const auto i : idx)
    (x(static_cast<Eigen::Index>(i), split.feature) < split.threshold ? left : right)
        .push_back(i);
  node->feature = split.feature;
  node->threshold = split.threshold;
  node->left = build_tree(x, y, left);
  node->right = build_tree(x, y, right);
  return node;
}

double subtree_estimated_errors(const TreeNode& node) {
  if (node.feature < 0)
    return static_cast<double>(node.errors) +
           add_errs(static_cast<double>(node.count), static_cast<double>(node.errors));
  return subtree_estimated_errors(*node.left) + subtree_estimated_errors(*node.right);
}

void prune(TreeNode& node) {
  if (node.feature < 0) return;
  prune(*node.left);
  prune(*node.right);
  const double as_leaf = static_cast<double>(node.errors) +
                         add_errs(static_cast<double>(node.count),
                                  static_cast<double>(node.errors));
  if (as_leaf <= subtree_estimated_errors(node) + 0.1) {
    node.feature = -1;
    node.left.reset();
    node.right.reset();
  }
}

Predictor fit_c45(const Eigen::MatrixXd& x, const std::vector<int>& y) {
  std::vector<std::size_t> idx(static_cast<std::size_t>(x.rows()));
  std::iota(idx.begin(), idx.end(), 0);
  auto root = build_tree(x, y, idx);
  prune(*root);
  std::shared_ptr<TreeNode> tree(std::move(root));
  return [tree](const Eigen::RowVectorXd& q) { return tree->predict(q); };
}

Predictor fit(Classifier c, const Eigen::MatrixXd& x, const std::vector<int>& y) {
  switch (c) {
    case Classifier::kBayes: return fit_bayes(x, y);
    case Classifier::kLogistic: return fit_logistic(x, y);
    case Classifier::kLwl: return fit_lwl(x, y);
    case Classifier::kAdaboostM1: return fit_adaboost(x, y);
    case Classifier::kOneR: return fit_one_r(x, y);
    case Classifier::kC45: return fit_c45(x, y);
  }
  throw ClassifyError("unknown classifier");
}

std::optional<double> safe_ratio(double num, double den) {
  if (den == 0.0) return std::nullopt;
  return num / den;
}

}  // namespace

const std::vector<Classifier>& classifier_roster() {
  static const std::vector<Classifier> roster{Classifier::kBayes,      Classifier::kLogistic,
                                              Classifier::kLwl,        Classifier::kAdaboostM1,
                                              Classifier::kOneR,       Classifier::kC45};
  return roster;
}

std::string classifier_name(Classifier c) {
  switch (c) {
    case Classifier::kBayes: return "bayes";
    case Classifier::kLogistic: return "logistic";
    case Classifier::kLwl: return "lwl";
    case Classifier::kAdaboostM1: return "adaboost_m1";
    case Classifier::kOneR: return "one_r";
    case Classifier::kC45: return "c45";
  }
  throw ClassifyError("unknown classifier");
}

Classifier classifier_from_name(const std::string& name) {
  for (const auto c : classifier_roster())
    if (classifier_name(c) == name) return c;
  throw ClassifyError("unknown classifier: " + name);
}

std::vector<int> binarize_by_decile(const std::vector<double>& scores, int decile,
                                    double* threshold_out) {
  if (decile < 1 || decile > 9) throw ClassifyError("decile must be in 1..9");
  if (scores.size() < 2) throw ClassifyError("need at least 2 scores");
  const auto [lo, hi] = std::minmax_element(scores.begin(), scores.end());
  if (*lo == *hi) throw ClassifyError("constant scores cannot be binarized");

  const double threshold = stats::quantile(scores, decile / 10.0);
  if (threshold_out) *threshold_out = threshold;
  std::vector<int> labels(scores.size());
  std::size_t positives = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    labels[i] = scores[i] >= threshold ? 1 : 0;
    positives += static_cast<std::size_t>(labels[i]);
  }
  if (positives == 0 || positives == scores.size())
    throw ClassifyError("decile " + std::to_string(decile) + " yields a single class");
  return labels;
}

BinaryTask make_binary_task(const Eigen::MatrixXd& features, const std::vector<double>& scores,
                            int decile) {
  if (static_cast<std::size_t>(features.rows()) != scores.size())
    throw ClassifyError("feature rows and score count differ");
  BinaryTask task;
  task.features = features;
  task.labels = binarize_by_decile(scores, decile, &task.threshold_value);
  task.threshold_decile = decile;
  return task;
}

MetricRecord confusion_metrics(const ConfusionCounts& counts) {
  const double total = static_cast<double>(counts.total());
  if (total == 0.0) throw ClassifyError("empty confusion matrix");
  MetricRecord rec;
  rec.accuracy = static_cast<double>(counts.tp + counts.tn) / total;
  rec.precision = safe_ratio(static_cast<double>(counts.tp),
                             static_cast<double>(counts.tp + counts.fp));
  rec.recall = safe_ratio(static_cast<double>(counts.tp),
                          static_cast<double>(counts.tp + counts.fn));
  rec.fp_rate = safe_ratio(static_cast<double>(counts.fp),
                           static_cast<double>(counts.fp + counts.tn));
  if (rec.precision && rec.recall && *rec.precision + *rec.recall > 0.0)
    rec.f_measure = 2.0 * *rec.precision * *rec.recall / (*rec.precision + *rec.recall);
  return rec;
}

ConfusionCounts run_classifier(Classifier c, const BinaryTask& task, int folds,
                               std::uint64_t seed) {
  const auto n = task.labels.size();
  if (folds < 2) throw ClassifyError("folds must be at least 2");

  // Stratified fold assignment: shuffle within each class, deal round-robin.
  std::vector<int> fold_of(n);
  for (int label = 0; label < 2; ++label) {
    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < n; ++i)
      if (task.labels[i] == label) members.push_back(i);
    if (members.size() < static_cast<std::size_t>(folds))
      throw ClassifyError("stratification infeasible: class " + std::to_string(label) +
                          " has fewer members than folds");
    Rng rng(mix_seed(seed, static_cast<std::size_t>(label)));
    for (std::size_t i = members.size() - 1; i > 0; --i)
      std::swap(members[i], members[rng.next_index(i + 1)]);
    for (std::size_t i = 0; i < members.size(); ++i)
      fold_of[members[i]] = static_cast<int>(i % static_cast<std::size_t>(folds));
  }

  ConfusionCounts counts;
  for (int fold = 0; fold < folds; ++fold) {
    std::vector<std::size_t> train_idx, test_idx;
    for (std::size_t i = 0; i < n; ++i)
      (fold_of[i] == fold ? test_idx : train_idx).push_back(i);

    Eigen::MatrixXd train(static_cast<Eigen::Index>(train_idx.size()), task.features.cols());
    std::vector<int> train_y(train_idx.size());
    for (std::size_t i = 0; i < train_idx.size(); ++i) {
      train.row(static_cast<Eigen::Index>(i)) =
          task.features.row(static_cast<Eigen::Index>(train_idx[i]));
      train_y[i] = task.labels[train_idx[i]];
    }
    const auto model = fit(c, train, train_y);
    for (const auto i : test_idx) {
      const int pred = model(task.features.row(static_cast<Eigen::Index>(i)));
      const int truth = task.labels[i];
      if (truth == 1)
        ++(pred == 1 ? counts.tp : counts.fn);
      else
        ++(pred == 1 ? counts.fp : counts.tn);
    }
  }
  return counts;
}

double training_accuracy(Classifier c, const BinaryTask& task) {
  const auto model = fit(c, task.features, task.labels);
  std::size_t correct = 0;
  for (std::size_t i = 0; i < task.labels.size(); ++i)
    if (model(task.features.row(static_cast<Eigen::Index>(i))) == task.labels[i]) ++correct;
  return static_cast<double>(correct) / static_cast<double>(task.labels.size());
}

std::pair<int, double> c45_root_split(const BinaryTask& task) {
  std::vector<std::size_t> idx(task.labels.size());
  std::iota(idx.begin(), idx.end(), 0);
  const auto split = choose_split(task.features, task.labels, idx, 2);
  if (split.feature < 0) throw ClassifyError("no informative root split");
  return {split.feature, split.threshold};
}

Classifier best_performer(const std::vector<ClassifierReport>& reports) {
  if (reports.empty()) throw ClassifyError("no classifier reports");
  auto qualifies = [](const MetricRecord& m) {
    return m.recall && *m.recall >= 0.75 && m.precision.has_value();
  };
  auto roster_rank = [](const ClassifierReport& r) { return static_cast<int>(r.classifier); };
  const ClassifierReport* best = nullptr;
  for (const auto& r : reports) {
    if (!qualifies(r.metrics)) continue;
    if (!best || *r.metrics.precision > *best->metrics.precision ||
        (*r.metrics.precision == *best->metrics.precision && roster_rank(r) < roster_rank(*best)))
      best = &r;
  }
  if (best) return best->classifier;

  auto prec = [](const MetricRecord& m) {
    return m.precision ? *m.precision : -std::numeric_limits<double>::infinity();
  };
  best = &reports.front();
  for (const auto& r : reports) {
    if (r.metrics.accuracy != best->metrics.accuracy) {
      if (r.metrics.accuracy > best->metrics.accuracy) best = &r;
    } else if (prec(r.metrics) != prec(best->metrics)) {
      if (prec(r.metrics) > prec(best->metrics)) best = &r;
    } else if (roster_rank(r) < roster_rank(*best)) {
      best = &r;
    }
  }
  return best->classifier;
}

std::string accuracy_band(double accuracy_pct) {
  if (accuracy_pct < 0.0 || accuracy_pct > 100.0)
    throw ClassifyError("accuracy percentage out of [0,100]");
  if (accuracy_pct > 90.0) return "very good";
  if (accuracy_pct >= 70.0) return "good";
  if (accuracy_pct >= 60.0) return "okay";
  return "below practical threshold";
}

ClassificationReport classify_suite(const BinaryTask& task,
                                    const std::vector<Classifier>& classifiers,
                                    int folds, std::uint64_t seed) {
  if (classifiers.empty()) throw ClassifyError("no classifiers requested");
  ClassificationReport report;
  report.folds = folds;
  report.seed = seed;
  report.decile = task.threshold_decile;
  report.threshold_value = task.threshold_value;
  for (const auto c : classifiers) {
    ClassifierReport r;
    r.classifier = c;
    r.counts = run_classifier(c, task, folds, seed);
    r.metrics = confusion_metrics(r.counts);
    report.per_classifier.push_back(std::move(r));
  }
  report.best = best_performer(report.per_classifier);
  for (const auto& r : report.per_classifier)
    if (r.classifier == report.best) report.best_accuracy_pct = r.metrics.accuracy * 100.0;
  report.band = accuracy_band(report.best_accuracy_pct);
  return report;
}

ClassificationReport select_threshold(const std::vector<double>& scores,
                                      const Eigen::MatrixXd& features,
                                      const std::vector<Classifier>& classifiers,
                                      std::uint64_t seed, int folds, unsigned threads) {
  std::vector<std::optional<ClassificationReport>> by_decile(9);
  parallel_for(
      9,
      [&](std::size_t slot) {
        const int d = static_cast<int>(slot) + 1;
        try {
          const auto task = make_binary_task(features, scores, d);
          by_decile[slot] = classify_suite(task, classifiers, folds, seed);
        } catch (const ClassifyError&) {
          // infeasible decile
        }
      },
      threads);

  const ClassificationReport* winner = nullptr;
  auto metrics_of = [](const ClassificationReport& rep) -> const MetricRecord& {
    for (const auto& r : rep.per_classifier)
      if (r.classifier == rep.best) return r.metrics;
    throw ClassifyError("best classifier missing from its own report");
  };
  auto better = [&](const ClassificationReport& a, const ClassificationReport& b) {
    const auto& ma = metrics_of(a);
    const auto& mb = metrics_of(b);
    auto qual = [](const MetricRecord& m) {
      return m.recall && *m.recall >= 0.75 && m.precision.has_value();
    };
    auto prec = [](const MetricRecord& m) {
      return m.precision ? *m.precision : -std::numeric_limits<double>::infinity();
    };
    if (qual(ma) != qual(mb)) return qual(ma);
    if (qual(ma)) {
      if (*ma.precision != *mb.precision) return *ma.precision > *mb.precision;
    } else {
      if (ma.accuracy != mb.accuracy) return ma.accuracy > mb.accuracy;
      if (prec(ma) != prec(mb)) return prec(ma) > prec(mb);
    }
    const int da = std::abs(a.decile - 5), db = std::abs(b.decile - 5);
    if (da != db) return da < db;
    return a.decile < b.decile;
  };
  for (const auto& rep : by_decile) {
    if (!rep) continue;
    if (!winner || better(*rep, *winner)) winner = &*rep;
  }
  if (!winner) throw ClassifyError("no feasible decile threshold");
  return *winner;
}

}  // namespace plspath
