#include "plspath/synth.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <sstream>

#include "plspath/common.hpp"
#include "plspath/rng.hpp"
#include "plspath/stats.hpp"

namespace plspath {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_ws(const std::string& s) {
  std::istringstream in(s);
  std::vector<std::string> out;
  std::string tok;
  while (in >> tok) out.push_back(tok);
  return out;
}

Eigen::Index index_of(const std::vector<std::string>& names, const std::string& name) {
  const auto it = std::find(names.begin(), names.end(), name);
  if (it == names.end()) throw SpecError("unknown name: " + name);
  return static_cast<Eigen::Index>(it - names.begin());
}

}  // namespace

double GeneratorSpec::path(const std::string& source, const std::string& target) const {
  const auto it = true_paths.find({source, target});
  if (it == true_paths.end())
    throw SpecError("no path coefficient for edge " + source + " -> " + target);
  return it->second;
}

double GeneratorSpec::loading(const std::string& indicator) const {
  const auto it = true_loadings.find(indicator);
  return it == true_loadings.end() ? 1.0 : it->second;
}

double GeneratorSpec::structural_noise(const std::string& construct) const {
  const auto it = structural_noise_sd.find(construct);
  return it == structural_noise_sd.end() ? 1.0 : it->second;
}

double GeneratorSpec::indicator_noise(const std::string& indicator) const {
  const auto it = indicator_noise_sd.find(indicator);
  return it == indicator_noise_sd.end() ? 0.0 : it->second;
}

void GeneratorSpec::check() const {
  spec.check();
  if (!spec.second_order.empty())
    throw SpecError("generator spec does not support second-order constructs");
  if (n < 2) throw SpecError("generator needs n >= 2");

  for (const auto& e : spec.structural_edges) path(e.source, e.target);
  for (const auto& [edge, beta] : true_paths)
    if (!spec.has_edge(edge.first, edge.second))
      throw SpecError("path parameter for undeclared edge " + edge.first + " -> " + edge.second);

  const auto indicators = spec.all_indicators();
  for (const auto& [name, value] : true_loadings)
    if (std::find(indicators.begin(), indicators.end(), name) == indicators.end())
      throw SpecError("loading parameter for unknown indicator: " + name);
  for (const auto& [name, value] : indicator_noise_sd) {
    if (std::find(indicators.begin(), indicators.end(), name) == indicators.end())
      throw SpecError("indicator_noise parameter for unknown indicator: " + name);
    if (value < 0.0) throw SpecError("negative indicator noise for " + name);
  }
  for (const auto& [name, value] : structural_noise_sd) {
    if (!spec.has_construct(name)) throw SpecError("noise parameter for unknown construct: " + name);
    if (spec.parents_of(name).empty())
      throw SpecError("noise parameter for exogenous construct: " + name);
    if (value < 0.0) throw SpecError("negative structural noise for " + name);
  }

  const auto implied = implied_covariance(*this);  // throws on degeneracy
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(implied.latent);
  if (eig.eigenvalues().minCoeff() <= 1e-10)
    throw SpecError("implied latent covariance is not positive definite");
}

GeneratorSpec parse_generator_spec(const std::string& text) {
  GeneratorSpec gspec;
  std::ostringstream model_text;
  model_text << "plsspec v1\n";

  std::istringstream in(text);
  std::string raw;
  int lineno = 0;
  bool saw_header = false;

  auto fail = [&](const std::string& msg) {
    throw SpecError("line " + std::to_string(lineno) + ": " + msg);
  };
  auto parse_value = [&](const std::string& token) {
    try {
      std::size_t used = 0;
      const double v = std::stod(token, &used);
      if (used != token.size()) fail("malformed number: " + token);
      return v;
    } catch (const std::invalid_argument&) {
      fail("malformed number: " + token);
    } catch (const std::out_of_range&) {
      fail("number out of range: " + token);
    }
    return 0.0;
  };

  while (std::getline(in, raw)) {
    ++lineno;
    const std::string line = trim(raw);
    if (line.empty() || line[0] == '#') continue;

    if (!saw_header) {
      if (line != "gspec v1") fail("expected header 'gspec v1'");
      saw_header = true;
      continue;
    }

    std::istringstream ls(line);
    std::string keyword;
    ls >> keyword;

    if (keyword == "construct" || keyword == "second_order" || keyword == "edge" ||
        keyword == "marker" || keyword == "outcome") {
      model_text << line << "\n";
      continue;
    }

    const auto eq = line.find('=');
    if (eq == std::string::npos) fail("parameter line needs '='");
    const auto head = split_ws(trim(line.substr(0, eq)));
    const std::string value_str = trim(line.substr(eq + 1));
    if (head.empty() || value_str.empty()) fail("malformed parameter line");

    if (keyword == "path") {
      const auto arrow = line.find("->");
      if (arrow == std::string::npos || arrow > eq) fail("path line needs 'path A -> B = x'");
      const auto src = split_ws(trim(line.substr(4, arrow - 4)));
      const auto dst = split_ws(trim(line.substr(arrow + 2, eq - arrow - 2)));
      if (src.size() != 1 || dst.size() != 1) fail("path line needs 'path A -> B = x'");
      gspec.true_paths[{src[0], dst[0]}] = parse_value(value_str);
    } else if (keyword == "loading") {
      if (head.size() != 2) fail("loading line needs one indicator name");
      gspec.true_loadings[head[1]] = parse_value(value_str);
    } else if (keyword == "noise") {
      if (head.size() != 2) fail("noise line needs one construct name");
      gspec.structural_noise_sd[head[1]] = parse_value(value_str);
    } else if (keyword == "indicator_noise") {
      if (head.size() != 2) fail("indicator_noise line needs one indicator name");
      gspec.indicator_noise_sd[head[1]] = parse_value(value_str);
    } else if (keyword == "n") {
      if (head.size() != 1) fail("n line is 'n = <rows>'");
      const double v = parse_value(value_str);
      if (v < 1.0 || v != std::floor(v)) fail("n must be a positive integer");
      gspec.n = static_cast<std::size_t>(v);
    } else if (keyword == "seed") {
      if (head.size() != 1) fail("seed line is 'seed = <value>'");
      const double v = parse_value(value_str);
      if (v < 0.0 || v != std::floor(v)) fail("seed must be a nonnegative integer");
      gspec.seed = static_cast<std::uint64_t>(v);
    } else if (keyword == "mode") {
      if (value_str == "continuous")
        gspec.output_mode = OutputMode::kContinuous;
      else if (value_str == "likert7")
        gspec.output_mode = OutputMode::kLikert7;
      else
        fail("mode must be 'continuous' or 'likert7'");
    } else {
      fail("unknown keyword: " + keyword);
    }
  }
  if (!saw_header) throw SpecError("empty generator spec: missing 'gspec v1' header");

  gspec.spec = parse_model_spec(model_text.str());
  gspec.check();
  return gspec;
}

double ImpliedCovariance::latent_cov(const std::string& a, const std::string& b) const {
  return latent(index_of(constructs, a), index_of(constructs, b));
}

double ImpliedCovariance::indicator_cov(const std::string& a, const std::string& b) const {
  return indicator(index_of(indicators, a), index_of(indicators, b));
}

ImpliedCovariance implied_covariance(const GeneratorSpec& gspec) {
  const auto order = gspec.spec.topological_order();
  const auto c = static_cast<Eigen::Index>(order.size());

  ImpliedCovariance out;
  out.constructs = order;
  out.latent = Eigen::MatrixXd::Zero(c, c);

  // Reduced-form pass: parentless latents are independent standard normals;
  // each endogenous latent is its structural combination renormalized to unit
  // variance.
  for (Eigen::Index t = 0; t < c; ++t) {
    const auto parents = gspec.spec.parents_of(order[static_cast<std::size_t>(t)]);
    if (parents.empty()) {
      out.latent(t, t) = 1.0;
      continue;
    }
    const auto np = static_cast<Eigen::Index>(parents.size());
    Eigen::VectorXd beta(np);
    std::vector<Eigen::Index> pidx(parents.size());
    for (Eigen::Index k = 0; k < np; ++k) {
      beta(k) = gspec.path(parents[static_cast<std::size_t>(k)],
                           order[static_cast<std::size_t>(t)]);
      pidx[static_cast<std::size_t>(k)] = index_of(order, parents[static_cast<std::size_t>(k)]);
    }
    const double sigma = gspec.structural_noise(order[static_cast<std::size_t>(t)]);
    double var = sigma * sigma;
    for (Eigen::Index a = 0; a < np; ++a)
      for (Eigen::Index b = 0; b < np; ++b)
        var += beta(a) * beta(b) * out.latent(pidx[static_cast<std::size_t>(a)],
                                              pidx[static_cast<std::size_t>(b)]);
    if (var <= 0.0)
      throw SpecError("degenerate latent variance for " + order[static_cast<std::size_t>(t)]);
    const double scale = std::sqrt(var);
    for (Eigen::Index u = 0; u < t; ++u) {
      double cov = 0.0;
      for (Eigen::Index k = 0; k < np; ++k)
        cov += beta(k) * out.latent(pidx[static_cast<std::size_t>(k)], u);
      out.latent(t, u) = out.latent(u, t) = cov / scale;
    }
    out.latent(t, t) = 1.0;
  }

  out.indicators = gspec.spec.all_indicators();
  const auto p = static_cast<Eigen::Index>(out.indicators.size());
  out.indicator = Eigen::MatrixXd::Zero(p, p);
  std::vector<Eigen::Index> owner(out.indicators.size());
  std::vector<double> lambda(out.indicators.size());
  for (std::size_t j = 0; j < out.indicators.size(); ++j) {
    lambda[j] = gspec.loading(out.indicators[j]);
    for (const auto& construct : gspec.spec.construct_names())
      for (const auto& ind : gspec.spec.indicators_of(construct))
        if (ind == out.indicators[j]) owner[j] = index_of(order, construct);
  }
  for (Eigen::Index i = 0; i < p; ++i) {
    for (Eigen::Index j = 0; j <= i; ++j) {
      double cov = lambda[static_cast<std::size_t>(i)] * lambda[static_cast<std::size_t>(j)] *
                   out.latent(owner[static_cast<std::size_t>(i)],
                              owner[static_cast<std::size_t>(j)]);
      if (i == j) {
        const double s = gspec.indicator_noise(out.indicators[static_cast<std::size_t>(i)]);
        cov += s * s;
      }
      out.indicator(i, j) = out.indicator(j, i) = cov;
    }
  }
  return out;
}

std::map<std::pair<std::string, std::string>, double> implied_standardized_paths(
    const GeneratorSpec& gspec) {
  const auto implied = implied_covariance(gspec);
  std::map<std::pair<std::string, std::string>, double> out;
  for (const auto& target : gspec.spec.endogenous()) {
    const auto parents = gspec.spec.parents_of(target);
    const auto np = static_cast<Eigen::Index>(parents.size());
    Eigen::MatrixXd spp(np, np);
    Eigen::VectorXd spt(np);
    for (Eigen::Index a = 0; a < np; ++a) {
      spt(a) = implied.latent_cov(parents[static_cast<std::size_t>(a)], target);
      for (Eigen::Index b = 0; b < np; ++b)
        spp(a, b) = implied.latent_cov(parents[static_cast<std::size_t>(a)],
                                       parents[static_cast<std::size_t>(b)]);
    }
    const Eigen::VectorXd beta = spp.ldlt().solve(spt);
    for (Eigen::Index a = 0; a < np; ++a)
      out[{parents[static_cast<std::size_t>(a)], target}] = beta(a);
  }
  return out;
}

Dataset generate(const GeneratorSpec& gspec) {
  gspec.check();
  const auto order = gspec.spec.topological_order();
  const auto n = static_cast<Eigen::Index>(gspec.n);
  Rng rng(gspec.seed);

  // Latents in topological order; each endogenous one renormalized by its
  // theoretical standard deviation so the implied covariance is exact.
  const auto implied = implied_covariance(gspec);
  std::map<std::string, Eigen::VectorXd> latents;
  for (const auto& name : order) {
    const auto parents = gspec.spec.parents_of(name);
    Eigen::VectorXd draw(n);
    if (parents.empty()) {
      for (Eigen::Index i = 0; i < n; ++i) draw(i) = rng.next_normal();
      latents[name] = draw;
      continue;
    }
    const double sigma = gspec.structural_noise(name);
    Eigen::VectorXd value = Eigen::VectorXd::Zero(n);
    for (const auto& parent : parents) value += gspec.path(parent, name) * latents.at(parent);
    double var = sigma * sigma;
    {
      const auto np = parents.size();
      for (std::size_t a = 0; a < np; ++a)
        for (std::size_t b = 0; b < np; ++b)
          var += gspec.path(parents[a], name) * gspec.path(parents[b], name) *
                 implied.latent_cov(parents[a], parents[b]);
    }
    for (Eigen::Index i = 0; i < n; ++i) value(i) += sigma * rng.next_normal();
    latents[name] = value / std::sqrt(var);
  }

  const auto indicators = gspec.spec.all_indicators();
  Eigen::MatrixXd data(n, static_cast<Eigen::Index>(indicators.size()));
  for (std::size_t j = 0; j < indicators.size(); ++j) {
    std::string owner;
    for (const auto& construct : gspec.spec.construct_names())
      for (const auto& ind : gspec.spec.indicators_of(construct))
        if (ind == indicators[j]) owner = construct;
    const double lambda = gspec.loading(indicators[j]);
    const double noise = gspec.indicator_noise(indicators[j]);
    Eigen::VectorXd col = lambda * latents.at(owner);
    if (noise > 0.0)
      for (Eigen::Index i = 0; i < n; ++i) col(i) += noise * rng.next_normal();
    data.col(static_cast<Eigen::Index>(j)) = col;
  }

  if (gspec.output_mode == OutputMode::kLikert7) {
    // Equal-probability standard-normal cut points over the theoretically
    // standardized indicator.
    std::array<double, 6> cuts{};
    for (int k = 1; k <= 6; ++k) cuts[static_cast<std::size_t>(k - 1)] =
        stats::normal_quantile(k / 7.0);
    for (std::size_t j = 0; j < indicators.size(); ++j) {
      const double sd = std::sqrt(implied.indicator_cov(indicators[j], indicators[j]));
      if (sd <= 0.0) throw SpecError("zero-variance indicator in likert7 mode: " + indicators[j]);
      for (Eigen::Index i = 0; i < n; ++i) {
        const double z = data(i, static_cast<Eigen::Index>(j)) / sd;
        int value = 1;
        for (const double cut : cuts)
          if (z >= cut) ++value;
        data(i, static_cast<Eigen::Index>(j)) = value;
      }
    }
  }

  return dataset_from_matrix(data, indicators);
}

}  // namespace plspath
