#include "plspath/mediation.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "plspath/bootstrap.hpp"
#include "plspath/common.hpp"

namespace plspath {

std::vector<std::vector<std::string>> enumerate_indirect_paths(const ModelSpec& spec,
                                                               const std::string& source,
                                                               const std::string& target) {
  if (!spec.has_construct(source)) throw SpecError("unknown construct: " + source);
  if (!spec.has_construct(target)) throw SpecError("unknown construct: " + target);
  if (source == target) throw SpecError("source equals target: " + source);

  std::vector<std::vector<std::string>> paths;
  std::vector<std::string> current{source};
  std::set<std::string> visited{source};

  // DFS over the structural DAG; only paths with at least one intermediary.
  auto dfs = [&](auto&& self, const std::string& node) -> void {
    for (const auto& next : spec.children_of(node)) {
      if (visited.count(next)) continue;
      if (next == target) {
        if (current.size() >= 2) {
          auto path = current;
          path.push_back(target);
          paths.push_back(std::move(path));
        }
        continue;
      }
      visited.insert(next);
      current.push_back(next);
      self(self, next);
      current.pop_back();
      visited.erase(next);
    }
  };
  dfs(dfs, source);
  std::sort(paths.begin(), paths.end());
  return paths;
}

std::string path_id(const std::vector<std::string>& path) {
  std::string out;
  for (std::size_t i = 0; i < path.size(); ++i) {
    if (i) out += "->";
    out += path[i];
  }
  return out;
}

std::map<std::string, double> effect_catalog(
    const ModelSpec& spec, const std::map<std::pair<std::string, std::string>, double>& betas) {
  std::map<std::string, double> out;
  for (const auto& e : spec.structural_edges) {
    auto it = betas.find({e.source, e.target});
    if (it == betas.end())
      throw MetricError("effect_catalog: missing coefficient for " + e.source + "->" + e.target);
    out[e.source + "->" + e.target] = it->second;
  }
  const auto names = spec.construct_names();
  for (const auto& s : names) {
    for (const auto& t : names) {
      if (s == t) continue;
      const auto paths = enumerate_indirect_paths(spec, s, t);
      if (paths.empty()) continue;
      double tie = 0.0;
      for (const auto& path : paths) {
        double product = 1.0;
        for (std::size_t i = 0; i + 1 < path.size(); ++i)
          product *= betas.at({path[i], path[i + 1]});
        out["IE:" + path_id(path)] = product;
        tie += product;
      }
      const double de = spec.has_edge(s, t) ? betas.at({s, t}) : 0.0;
      out["TIE:" + s + "->" + t] = tie;
      out["DE:" + s + "->" + t] = de;
      out["TE:" + s + "->" + t] = de + tie;
    }
  }
  return out;
}

std::map<std::string, double> effect_catalog(const ModelSpec& spec, const PlsEstimate& estimate) {
  std::map<std::pair<std::string, std::string>, double> betas;
  for (const auto& p : estimate.paths) betas[{p.source, p.target}] = p.beta;
  return effect_catalog(spec, betas);
}

EffectDecomposition decompose(const ModelSpec& spec,
                              const std::map<std::pair<std::string, std::string>, double>& betas,
                              const std::string& source, const std::string& target) {
  EffectDecomposition out;
  out.source = source;
  out.target = target;
  out.has_direct_edge = spec.has_edge(source, target);
  out.direct = out.has_direct_edge ? betas.at({source, target}) : 0.0;
  out.total_indirect = 0.0;
  for (const auto& path : enumerate_indirect_paths(spec, source, target)) {
    double product = 1.0;
    for (std::size_t i = 0; i + 1 < path.size(); ++i) {
      auto it = betas.find({path[i], path[i + 1]});
      if (it == betas.end())
        throw MetricError("decompose: missing coefficient for " + path[i] + "->" + path[i + 1]);
      product *= it->second;
    }
    out.specific_indirect.push_back({path, product, std::nullopt});
    out.total_indirect += product;
  }
  out.total = out.direct + out.total_indirect;
  return out;
}

EffectDecomposition decompose(const PlsEstimate& estimate, const BootstrapResult& boot,
                              const ModelSpec& spec, const std::string& source,
                              const std::string& target, double alpha) {
  std::map<std::pair<std::string, std::string>, double> betas;
  for (const auto& p : estimate.paths) betas[{p.source, p.target}] = p.beta;
  EffectDecomposition out = decompose(spec, betas, source, target);

  auto significance = [&](const std::string& id) {
    const auto sig = effect_significance(boot, id, alpha);
    return ComponentSignificance{sig.t, sig.p, sig.verdict == "significant"};
  };
  for (auto& ie : out.specific_indirect) ie.significance = significance("IE:" + path_id(ie.path));
  out.direct_significance = significance("DE:" + source + "->" + target);
  out.indirect_significance = significance("TIE:" + source + "->" + target);
  return out;
}

std::string classify_mediation(const EffectDecomposition& decomp) {
  if (!decomp.direct_significance || !decomp.indirect_significance)
    throw MetricError("classify_mediation: significance fields not populated");
  const bool de_sig = decomp.direct_significance->significant;
  const bool ie_sig = decomp.indirect_significance->significant;

  if (ie_sig && de_sig) {
    if (decomp.direct * decomp.total_indirect < 0.0) return "competitive";
    bool all_positive = decomp.direct > 0.0 && decomp.total_indirect > 0.0;
    for (const auto& ie : decomp.specific_indirect) all_positive = all_positive && ie.value > 0.0;
    return all_positive ? "complementary (partial), positive" : "complementary (partial)";
  }
  if (ie_sig) return "indirect-only (full)";
  if (de_sig) return "direct-only";
  return "no effect";
}

MediationShares mediation_shares(const EffectDecomposition& decomp) {
  if (decomp.total == 0.0) throw MetricError("mediation_shares: total effect is zero");
  MediationShares out;
  out.te_minus_de = decomp.total - decomp.direct;
  out.te_minus_de_share_pct = out.te_minus_de / decomp.total * 100.0;
  for (const auto& ie : decomp.specific_indirect)
    out.ie_share_pct.emplace_back(path_id(ie.path), ie.value / decomp.total * 100.0);
  return out;
}

double percentage_difference(double a, double b) {
  const double avg = (a + b) / 2.0;
  if (avg == 0.0) throw MetricError("percentage_difference: zero average");
  return std::fabs(a - b) / std::fabs(avg) * 100.0;
}

double change_rate(double a, double b) {
  if (b == 0.0) throw MetricError("change_rate: zero denominator");
  return std::fabs(a - b) / std::fabs(b) * 100.0;
}

ComparisonReport compare_models(const ModelSummary& a, const ModelSummary& b, ComparisonMode mode,
                                double share_flag_threshold_pct) {
  auto delta = [&](double va, double vb) {
    if (va == vb) return 0.0;
    return mode == ComparisonMode::kWithin ? percentage_difference(va, vb) : change_rate(va, vb);
  };
  ComparisonReport out;
  out.mode = mode;
  auto row = [&](const std::string& metric, double va, double vb) {
    out.rows.push_back({metric, va, vb, delta(va, vb)});
  };
  row("TE", a.te, b.te);
  row("DE", a.de, b.de);
  row("TE-DE", a.te - a.de, b.te - b.de);
  row("(TE-DE)/TE %", a.te_minus_de_share_pct, b.te_minus_de_share_pct);
  row("total variance %", a.total_variance_pct, b.total_variance_pct);
  row("AIC", a.aic_total, b.aic_total);
  row("SRMR", a.srmr, b.srmr);
  row("NFI", a.nfi, b.nfi);
  row("avg RMSE decrease %", a.avg_rmse_decrease_pct, b.avg_rmse_decrease_pct);
  row("accuracy %", a.accuracy_pct, b.accuracy_pct);
  for (const auto& [path, share] : a.ie_share_pct) {
    for (const auto& [path_b, share_b] : b.ie_share_pct)
      if (path == path_b) row("IE/TE % " + path, share, share_b);
  }
  out.share_delta_points = std::fabs(a.te_minus_de_share_pct - b.te_minus_de_share_pct);
  out.share_delta_flagged = out.share_delta_points > share_flag_threshold_pct;
  return out;
}

}  // namespace plspath
