#include "plspath/pls.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include <nlohmann/json.hpp>

#include "plspath/common.hpp"
#include "plspath/stats.hpp"

namespace plspath {

using ordered_json = nlohmann::ordered_json;

Eigen::Index PlsEstimate::block_index(const std::string& construct) const {
  for (std::size_t c = 0; c < blocks.size(); ++c)
    if (blocks[c].name == construct) return static_cast<Eigen::Index>(c);
  throw EstimationError("unknown construct in estimate: " + construct);
}

Eigen::VectorXd PlsEstimate::score_of(const std::string& construct) const {
  return scores.col(block_index(construct));
}

std::vector<std::string> PlsEstimate::inner_parents(const std::string& construct) const {
  std::vector<std::string> out;
  for (const auto& e : inner_edges)
    if (e.target == construct) out.push_back(e.source);
  return out;
}

double PlsEstimate::path_coefficient(const std::string& source, const std::string& target) const {
  for (const auto& p : paths)
    if (p.source == source && p.target == target) return p.beta;
  for (const auto& p : second_order_weights)
    if (p.source == source && p.target == target) return p.beta;
  throw EstimationError("no path " + source + " -> " + target);
}

namespace {

// Scales w so the block score X_block * w has unit sample variance.
Eigen::VectorXd normalize_weights(const Eigen::MatrixXd& x_block, const Eigen::VectorXd& w) {
  const Eigen::VectorXd score = x_block * w;
  const double s = stats::sd(score);
  if (s == 0.0) throw EstimationError("degenerate block: zero-variance score");
  return w / s;
}

}  // namespace

PlsEstimate estimate(const ValidatedSample& sample, const EstimationConfig& config) {
  const ModelSpec& spec = sample.spec;
  const Dataset& data = sample.dataset;
  const auto n = static_cast<double>(data.n());
  if (data.n() < 3) throw EstimationError("need at least 3 rows to estimate");

  PlsEstimate est;
  est.config = config;
  est.indicator_names = data.column_names;
  est.train_mean.resize(data.rows.cols());
  est.train_sd.resize(data.rows.cols());
  for (Eigen::Index j = 0; j < data.rows.cols(); ++j) {
    est.train_mean(j) = data.rows.col(j).mean();
    est.train_sd(j) = stats::sd(data.rows.col(j));
  }
  const Eigen::MatrixXd x = stats::standardize_with(data.rows, est.train_mean, est.train_sd);

  for (const auto& c : spec.constructs) {
    PlsEstimate::Block b;
    b.name = c.name;
    for (const auto& ind : c.indicators) b.cols.push_back(data.column_index(ind));
    est.blocks.push_back(std::move(b));
  }
  for (const auto& s : spec.second_order) {
    PlsEstimate::Block b;
    b.name = s.name;
    b.is_second_order = true;
    for (const auto& ind : spec.indicators_of(s.name)) b.cols.push_back(data.column_index(ind));
    est.blocks.push_back(std::move(b));
  }

  est.inner_edges = spec.structural_edges;
  for (const auto& s : spec.second_order)
    for (const auto& comp : s.components) est.inner_edges.push_back({comp, s.name});

  const auto n_blocks = est.blocks.size();
  std::vector<std::vector<Eigen::Index>> predecessors(n_blocks), successors(n_blocks);
  for (const auto& e : est.inner_edges) {
    const auto src = est.block_index(e.source);
    const auto dst = est.block_index(e.target);
    predecessors[static_cast<std::size_t>(dst)].push_back(src);
    successors[static_cast<std::size_t>(src)].push_back(dst);
  }

  std::vector<Eigen::MatrixXd> x_block(n_blocks);
  for (std::size_t c = 0; c < n_blocks; ++c) {
    const auto& cols = est.blocks[c].cols;
    Eigen::MatrixXd xb(x.rows(), static_cast<Eigen::Index>(cols.size()));
    for (std::size_t k = 0; k < cols.size(); ++k) xb.col(static_cast<Eigen::Index>(k)) = x.col(cols[k]);
    x_block[c] = std::move(xb);
  }

  // Outer weights: equal init, normalized to unit-variance scores.
  std::vector<Eigen::VectorXd> w(n_blocks);
  for (std::size_t c = 0; c < n_blocks; ++c)
    w[c] = normalize_weights(x_block[c], Eigen::VectorXd::Ones(x_block[c].cols()));

  Eigen::MatrixXd scores(x.rows(), static_cast<Eigen::Index>(n_blocks));
  double delta = 0.0;
  int iter = 0;
  bool converged = false;

  for (iter = 1; iter <= config.max_iterations; ++iter) {
    for (std::size_t c = 0; c < n_blocks; ++c)
      scores.col(static_cast<Eigen::Index>(c)) = x_block[c] * w[c];

    delta = 0.0;
    std::vector<Eigen::VectorXd> w_next(n_blocks);
    for (std::size_t c = 0; c < n_blocks; ++c) {
      // Path weighting scheme: predecessors weighted by their joint regression
      // coefficients, successors by correlation; isolated blocks proxy
      // themselves (their weights converge to the first principal direction).
      Eigen::VectorXd z = Eigen::VectorXd::Zero(x.rows());
      bool any_neighbor = false;
      if (!predecessors[c].empty()) {
        Eigen::MatrixXd yp(x.rows(), static_cast<Eigen::Index>(predecessors[c].size()));
        for (std::size_t k = 0; k < predecessors[c].size(); ++k)
          yp.col(static_cast<Eigen::Index>(k)) = scores.col(predecessors[c][k]);
        Eigen::VectorXd beta;
        try {
          beta = stats::ols(yp, scores.col(static_cast<Eigen::Index>(c)));
        } catch (const EstimationError&) {
          throw EstimationError("singular inner regression at construct " + est.blocks[c].name);
        }
        z += yp * beta;
        any_neighbor = true;
      }
      for (const auto succ : successors[c]) {
        z += stats::correlation(scores.col(static_cast<Eigen::Index>(c)), scores.col(succ)) *
             scores.col(succ);
        any_neighbor = true;
      }
      if (!any_neighbor) z = scores.col(static_cast<Eigen::Index>(c));
      const double sz = stats::sd(z);
      if (sz == 0.0) throw EstimationError("degenerate inner proxy at " + est.blocks[c].name);
      z /= sz;

      // Mode A outer update: covariances of block indicators with the proxy.
      Eigen::VectorXd wn = x_block[c].transpose() * z / (n - 1.0);
      wn = normalize_weights(x_block[c], wn);
      delta = std::max(delta, (wn - w[c]).cwiseAbs().maxCoeff());
      w_next[c] = std::move(wn);
    }
    w = std::move(w_next);
    if (delta <= config.tolerance) {
      converged = true;
      break;
    }
  }
  est.iterations = std::min(iter, config.max_iterations);
  est.converged = converged;
  est.tolerance_reached = delta;

  for (std::size_t c = 0; c < n_blocks; ++c)
    scores.col(static_cast<Eigen::Index>(c)) = x_block[c] * w[c];

  // Loadings, with block signs fixed so each loading sum is nonnegative.
  est.block_weights.resize(n_blocks);
  est.block_loadings.resize(n_blocks);
  for (std::size_t c = 0; c < n_blocks; ++c) {
    Eigen::VectorXd lambda =
        x_block[c].transpose() * scores.col(static_cast<Eigen::Index>(c)) / (n - 1.0);
    if (lambda.sum() < 0.0) {
      w[c] = -w[c];
      scores.col(static_cast<Eigen::Index>(c)) *= -1.0;
      lambda = -lambda;
    }
    est.block_weights[c] = w[c];
    est.block_loadings[c] = lambda;
  }
  est.scores = scores;
  est.n_train = data.n();
  est.indicator_corr = (x.transpose() * x) / (n - 1.0);
  est.indicator_corr.diagonal().setOnes();
  est.latent_corr.resize(static_cast<Eigen::Index>(n_blocks), static_cast<Eigen::Index>(n_blocks));
  for (std::size_t a = 0; a < n_blocks; ++a)
    for (std::size_t b = 0; b < n_blocks; ++b)
      est.latent_corr(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) =
          a == b ? 1.0
                 : stats::correlation(scores.col(static_cast<Eigen::Index>(a)),
                                      scores.col(static_cast<Eigen::Index>(b)));

  // Final structural coefficients: per-target OLS on the latent scores.
  std::map<std::string, Eigen::VectorXd> betas_by_target;
  for (std::size_t c = 0; c < n_blocks; ++c) {
    if (predecessors[c].empty()) continue;
    Eigen::MatrixXd yp(x.rows(), static_cast<Eigen::Index>(predecessors[c].size()));
    for (std::size_t k = 0; k < predecessors[c].size(); ++k)
      yp.col(static_cast<Eigen::Index>(k)) = scores.col(predecessors[c][k]);
    Eigen::VectorXd beta;
    try {
      beta = stats::ols(yp, scores.col(static_cast<Eigen::Index>(c)));
    } catch (const EstimationError&) {
      throw EstimationError("singular inner regression at construct " + est.blocks[c].name);
    }
    betas_by_target[est.blocks[c].name] = beta;
  }
  auto lookup_beta = [&](const std::string& source, const std::string& target) {
    const auto preds = est.inner_parents(target);
    const auto& beta = betas_by_target.at(target);
    for (std::size_t k = 0; k < preds.size(); ++k)
      if (preds[k] == source) return beta(static_cast<Eigen::Index>(k));
    throw EstimationError("internal: parent lookup failed");
  };
  for (const auto& e : spec.structural_edges)
    est.paths.push_back({e.source, e.target, lookup_beta(e.source, e.target)});
  for (const auto& s : spec.second_order)
    for (const auto& comp : s.components)
      est.second_order_weights.push_back({comp, s.name, lookup_beta(comp, s.name)});

  return est;
}

Eigen::MatrixXd apply_estimate(const PlsEstimate& est, const Dataset& dataset) {
  Eigen::MatrixXd x(dataset.rows.rows(), static_cast<Eigen::Index>(est.indicator_names.size()));
  for (std::size_t j = 0; j < est.indicator_names.size(); ++j) {
    const auto src = dataset.column_index(est.indicator_names[j]);
    const auto dst = static_cast<Eigen::Index>(j);
    if (est.train_sd(dst) == 0.0) throw EstimationError("apply: zero training deviation");
    x.col(dst) = (dataset.rows.col(src).array() - est.train_mean(dst)) / est.train_sd(dst);
  }
  Eigen::MatrixXd scores(x.rows(), static_cast<Eigen::Index>(est.blocks.size()));
  for (std::size_t c = 0; c < est.blocks.size(); ++c) {
    Eigen::VectorXd score = Eigen::VectorXd::Zero(x.rows());
    for (std::size_t k = 0; k < est.blocks[c].cols.size(); ++k)
      score += est.block_weights[c](static_cast<Eigen::Index>(k)) * x.col(est.blocks[c].cols[k]);
    scores.col(static_cast<Eigen::Index>(c)) = score;
  }
  return scores;
}

FittedScores predicted_scores(const PlsEstimate& est, const std::string& target) {
  const auto parents = est.inner_parents(target);
  if (parents.empty()) throw EstimationError("construct has no structural parents: " + target);

  FittedScores out;
  out.parents = parents;
  out.betas.resize(static_cast<Eigen::Index>(parents.size()));
  out.fitted = Eigen::VectorXd::Zero(est.scores.rows());
  for (std::size_t k = 0; k < parents.size(); ++k) {
    const double beta = est.path_coefficient(parents[k], target);
    out.betas(static_cast<Eigen::Index>(k)) = beta;
    out.fitted += beta * est.score_of(parents[k]);
  }
  const Eigen::VectorXd y = est.score_of(target);
  out.residual = y - out.fitted;
  out.rss = out.residual.squaredNorm();
  out.tss = (y.array() - y.mean()).square().sum();
  return out;
}

std::string serialize_estimate(const PlsEstimate& est) {
  ordered_json j;
  j["format"] = "plspath-estimate";
  j["version"] = 1;
  j["indicator_names"] = est.indicator_names;
  j["train_mean"] = std::vector<double>(est.train_mean.begin(), est.train_mean.end());
  j["train_sd"] = std::vector<double>(est.train_sd.begin(), est.train_sd.end());
  j["blocks"] = ordered_json::array();
  for (std::size_t c = 0; c < est.blocks.size(); ++c) {
    ordered_json b;
    b["name"] = est.blocks[c].name;
    b["second_order"] = est.blocks[c].is_second_order;
    b["cols"] = std::vector<Eigen::Index>(est.blocks[c].cols.begin(), est.blocks[c].cols.end());
    b["weights"] = std::vector<double>(est.block_weights[c].begin(), est.block_weights[c].end());
    b["loadings"] = std::vector<double>(est.block_loadings[c].begin(), est.block_loadings[c].end());
    j["blocks"].push_back(std::move(b));
  }
  auto path_array = [](const std::vector<PlsEstimate::Path>& paths) {
    ordered_json arr = ordered_json::array();
    for (const auto& p : paths)
      arr.push_back(ordered_json{{"source", p.source}, {"target", p.target}, {"beta", p.beta}});
    return arr;
  };
  j["paths"] = path_array(est.paths);
  j["second_order_weights"] = path_array(est.second_order_weights);
  j["inner_edges"] = ordered_json::array();
  for (const auto& e : est.inner_edges)
    j["inner_edges"].push_back(ordered_json{{"source", e.source}, {"target", e.target}});
  auto matrix_array = [](const Eigen::MatrixXd& m) {
    ordered_json rows = ordered_json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      ordered_json row = ordered_json::array();
      for (Eigen::Index jj = 0; jj < m.cols(); ++jj) row.push_back(m(i, jj));
      rows.push_back(std::move(row));
    }
    return rows;
  };
  j["indicator_corr"] = matrix_array(est.indicator_corr);
  j["latent_corr"] = matrix_array(est.latent_corr);
  j["n_train"] = est.n_train;
  j["iterations"] = est.iterations;
  j["converged"] = est.converged;
  j["tolerance_reached"] = est.tolerance_reached;
  j["config"] = ordered_json{{"tolerance", est.config.tolerance},
                             {"max_iterations", est.config.max_iterations}};
  return j.dump(2) + "\n";
}

PlsEstimate deserialize_estimate(const std::string& text) {
  ordered_json j = ordered_json::parse(text);
  if (j.value("format", "") != "plspath-estimate" || j.value("version", 0) != 1)
    throw DataError("not a version-1 estimate artifact");
  PlsEstimate est;
  est.indicator_names = j["indicator_names"].get<std::vector<std::string>>();
  const auto mean = j["train_mean"].get<std::vector<double>>();
  const auto sd = j["train_sd"].get<std::vector<double>>();
  est.train_mean = Eigen::Map<const Eigen::VectorXd>(mean.data(), static_cast<Eigen::Index>(mean.size()));
  est.train_sd = Eigen::Map<const Eigen::VectorXd>(sd.data(), static_cast<Eigen::Index>(sd.size()));
  for (const auto& b : j["blocks"]) {
    PlsEstimate::Block blk;
    blk.name = b["name"].get<std::string>();
    blk.is_second_order = b["second_order"].get<bool>();
    for (const auto& c : b["cols"]) blk.cols.push_back(c.get<Eigen::Index>());
    est.blocks.push_back(std::move(blk));
    const auto wv = b["weights"].get<std::vector<double>>();
    const auto lv = b["loadings"].get<std::vector<double>>();
    est.block_weights.push_back(
        Eigen::Map<const Eigen::VectorXd>(wv.data(), static_cast<Eigen::Index>(wv.size())));
    est.block_loadings.push_back(
        Eigen::Map<const Eigen::VectorXd>(lv.data(), static_cast<Eigen::Index>(lv.size())));
  }
  auto read_paths = [](const ordered_json& arr) {
    std::vector<PlsEstimate::Path> out;
    for (const auto& p : arr)
      out.push_back({p["source"].get<std::string>(), p["target"].get<std::string>(),
                     p["beta"].get<double>()});
    return out;
  };
  est.paths = read_paths(j["paths"]);
  est.second_order_weights = read_paths(j["second_order_weights"]);
  for (const auto& e : j["inner_edges"])
    est.inner_edges.push_back({e["source"].get<std::string>(), e["target"].get<std::string>()});
  auto read_matrix = [](const ordered_json& rows) {
    Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()),
                      rows.empty() ? 0 : static_cast<Eigen::Index>(rows[0].size()));
    for (Eigen::Index i = 0; i < m.rows(); ++i)
      for (Eigen::Index jj = 0; jj < m.cols(); ++jj)
        m(i, jj) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(jj)].get<double>();
    return m;
  };
  est.indicator_corr = read_matrix(j["indicator_corr"]);
  est.latent_corr = read_matrix(j["latent_corr"]);
  est.n_train = j["n_train"].get<std::size_t>();
  est.iterations = j["iterations"].get<int>();
  est.converged = j["converged"].get<bool>();
  est.tolerance_reached = j["tolerance_reached"].get<double>();
  est.config.tolerance = j["config"]["tolerance"].get<double>();
  est.config.max_iterations = j["config"]["max_iterations"].get<int>();
  est.scores.resize(0, static_cast<Eigen::Index>(est.blocks.size()));
  return est;
}

}  // namespace plspath
