#include "plspath/bundle.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "plspath/common.hpp"
#include "plspath/psychometrics.hpp"
#include "plspath/structural.hpp"

namespace plspath {

std::string content_hash(const std::string& text) {
  std::uint64_t h = 14695981039346656037ull;
  for (const unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string format_coef(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.3f", v);
  return buf;
}

std::string format_pct(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

namespace {

constexpr const char* kToolVersion = "plspath 1.0.0";
const std::vector<std::string> kStages{"measurement", "structural", "bootstrap", "predict",
                                       "classify"};

std::string opt_coef(const std::optional<double>& v) {
  return v ? format_coef(*v) : "undef";
}

ordered_json make_table(const std::string& title, const std::vector<std::string>& columns,
                        const std::vector<std::vector<std::string>>& rows) {
  ordered_json t;
  t["title"] = title;
  t["columns"] = columns;
  t["rows"] = rows;
  return t;
}

ordered_json json_vector(const Eigen::VectorXd& v) {
  return ordered_json(std::vector<double>(v.begin(), v.end()));
}

ordered_json json_matrix(const Eigen::MatrixXd& m) {
  ordered_json rows = ordered_json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    std::vector<double> row(static_cast<std::size_t>(m.cols()));
    for (Eigen::Index j = 0; j < m.cols(); ++j) row[static_cast<std::size_t>(j)] = m(i, j);
    rows.push_back(row);
  }
  return rows;
}

void append_matrix_table(ordered_json& tables, const std::string& title,
                         const std::vector<std::string>& names, const Eigen::MatrixXd& m) {
  std::vector<std::string> columns{""};
  columns.insert(columns.end(), names.begin(), names.end());
  std::vector<std::vector<std::string>> rows;
  for (std::size_t i = 0; i < names.size(); ++i) {
    std::vector<std::string> row{names[i]};
    for (std::size_t j = 0; j < names.size(); ++j)
      row.push_back(format_coef(m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j))));
    rows.push_back(std::move(row));
  }
  tables.push_back(make_table(title, columns, rows));
}

}  // namespace

PipelineConfig parse_pipeline_config(const std::string& json_text) {
  ordered_json j;
  try {
    j = ordered_json::parse(json_text);
  } catch (const ordered_json::parse_error& e) {
    throw SpecError(std::string("config parse: ") + e.what());
  }
  if (!j.is_object()) throw SpecError("config must be a JSON object");

  PipelineConfig c;
  for (const auto& [key, value] : j.items()) {
    if (key == "seed") c.seed = value.get<std::uint64_t>();
    else if (key == "bootstrap_B") c.bootstrap_B = value.get<std::size_t>();
    else if (key == "ci_level") c.ci_level = value.get<double>();
    else if (key == "alpha") c.alpha = value.get<double>();
    else if (key == "predict_k") c.predict_k = value.get<int>();
    else if (key == "predict_r") c.predict_r = value.get<int>();
    else if (key == "folds") c.folds = value.get<int>();
    else if (key == "omission_distance") c.omission_distance = value.get<int>();
    else if (key == "threads") c.threads = value.get<unsigned>();
    else if (key == "range") {
      const auto s = value.get<std::string>();
      if (s == "likert7") c.range = RangePolicy::kLikert7;
      else if (s == "unrestricted") c.range = RangePolicy::kUnrestricted;
      else throw SpecError("config range must be 'likert7' or 'unrestricted'");
    } else if (key == "stage") {
      const auto s = value.get<std::string>();
      if (s != "all" && std::find(kStages.begin(), kStages.end(), s) == kStages.end())
        throw SpecError("config stage unknown: " + s);
      c.stage = s;
    } else if (key == "classifiers") {
      c.classifiers.clear();
      for (const auto& name : value) c.classifiers.push_back(classifier_from_name(name));
      if (c.classifiers.empty()) throw SpecError("config classifiers is empty");
    } else if (key == "tolerance") c.estimation.tolerance = value.get<double>();
    else if (key == "max_iterations") c.estimation.max_iterations = value.get<int>();
    else throw SpecError("config key unknown: " + key);
  }
  return c;
}

ordered_json config_to_json(const PipelineConfig& c) {
  ordered_json j;
  j["seed"] = c.seed;
  j["bootstrap_B"] = c.bootstrap_B;
  j["ci_level"] = c.ci_level;
  j["alpha"] = c.alpha;
  j["predict_k"] = c.predict_k;
  j["predict_r"] = c.predict_r;
  j["folds"] = c.folds;
  // The thread count is an execution detail; results do not depend on it and
  // recording it would break byte-identical reruns on different machines.
  j["omission_distance"] = c.omission_distance;
  j["range"] = c.range == RangePolicy::kLikert7 ? "likert7" : "unrestricted";
  j["stage"] = c.stage;
  std::vector<std::string> names;
  for (const auto cl : c.classifiers) names.push_back(classifier_name(cl));
  j["classifiers"] = names;
  j["tolerance"] = c.estimation.tolerance;
  j["max_iterations"] = c.estimation.max_iterations;
  return j;
}

bool AnalysisBundle::stage_ok(const std::string& stage) const {
  const auto& stages = doc.at("stages");
  return stages.contains(stage) && stages.at(stage).get<std::string>() == "ok";
}

bool AnalysisBundle::complete() const {
  for (const auto& s : kStages)
    if (!stage_ok(s)) return false;
  return true;
}

namespace {

struct PipelineState {
  ValidatedSample sample;
  PlsEstimate estimate;
  ReliabilityReport reliability;
  ValidityReport validity;
  StructuralReport structural;
  BootstrapResult boot;
  std::vector<EffectDecomposition> decompositions;
  std::string primary_source;
  PredictReport predict;
  ClassificationReport classification;
};

std::string primary_effect_source(const ModelSpec& spec) {
  auto has_indirect = [&](const std::string& s) {
    return s != spec.outcome && !enumerate_indirect_paths(spec, s, spec.outcome).empty();
  };
  for (const auto& name : spec.exogenous())
    if (has_indirect(name)) return name;
  for (const auto& name : spec.construct_names())
    if ((!spec.marker_block || name != *spec.marker_block) && has_indirect(name)) return name;
  return "";
}

void run_measurement(PipelineState& st, const PipelineConfig& config, ordered_json& doc,
                     ordered_json& tables) {
  st.estimate = estimate(st.sample, config.estimation);
  st.reliability = reliability_report(st.sample, st.estimate);
  st.validity = validity_report(st.sample, st.estimate);

  doc["estimate"] = ordered_json::parse(serialize_estimate(st.estimate));

  ordered_json rel;
  for (const auto& c : st.reliability.constructs) {
    ordered_json row;
    row["alpha"] = st.reliability.alpha.at(c);
    row["cr"] = st.reliability.cr.at(c);
    row["ave"] = st.reliability.ave.at(c);
    row["alpha_pass"] = st.reliability.alpha_pass.at(c);
    row["cr_pass"] = st.reliability.cr_pass.at(c);
    row["ave_pass"] = st.reliability.ave_pass.at(c);
    rel["constructs"][c] = row;
  }
  rel["kmo"] = st.reliability.kmo;
  rel["kmo_pass"] = st.reliability.kmo_pass;
  rel["total_variance_pct"] = st.reliability.total_variance_pct;
  rel["vif_pass"] = st.reliability.vif_pass;
  for (const auto& [c, v] : st.reliability.vif) rel["vif"][c] = json_vector(v);
  for (const auto& [c, v] : st.reliability.aic_per_block) rel["aic"][c] = v;
  rel["aic_total"] = st.reliability.aic_total;
  doc["reliability"] = rel;

  ordered_json val;
  val["fornell_larcker"]["constructs"] = st.validity.fornell_larcker.constructs;
  val["fornell_larcker"]["matrix"] = json_matrix(st.validity.fornell_larcker.matrix);
  val["fornell_larcker"]["all_pass"] = st.validity.fornell_larcker.all_pass;
  val["htmt"]["constructs"] = st.validity.htmt.constructs;
  val["htmt"]["matrix"] = json_matrix(st.validity.htmt.matrix);
  {
    ordered_json fails = ordered_json::array();
    for (const auto& [a, b] : st.validity.htmt.failures) fails.push_back({a, b});
    val["htmt"]["failures"] = fails;
  }
  if (st.validity.cmb) {
    const auto& c = *st.validity.cmb;
    val["cmb"] = {{"srmr_base", c.srmr_base},       {"srmr_marked", c.srmr_marked},
                  {"srmr_delta", c.srmr_delta},     {"nfi_base", c.nfi_base},
                  {"nfi_marked", c.nfi_marked},     {"nfi_delta", c.nfi_delta},
                  {"max_construct_share_pct", c.max_construct_share_pct},
                  {"total_variance_pct", c.total_variance_pct},
                  {"verdict", c.verdict}};
  }
  doc["validity"] = val;

  {
    std::vector<std::vector<std::string>> rows;
    for (const auto& c : st.reliability.constructs)
      rows.push_back({c, format_coef(st.reliability.alpha.at(c)),
                      format_coef(st.reliability.cr.at(c)),
                      format_coef(st.reliability.ave.at(c)),
                      st.reliability.alpha_pass.at(c) && st.reliability.cr_pass.at(c) &&
                              st.reliability.ave_pass.at(c)
                          ? "pass"
                          : "check"});
    rows.push_back({"KMO", format_coef(st.reliability.kmo), "", "",
                    st.reliability.kmo_pass ? "pass" : "check"});
    rows.push_back({"total variance %", format_pct(st.reliability.total_variance_pct), "", "", ""});
    tables.push_back(
        make_table("Construct reliability", {"construct", "alpha", "CR", "AVE", "status"}, rows));
  }
  {
    std::vector<std::vector<std::string>> rows;
    for (std::size_t b = 0; b < st.estimate.blocks.size(); ++b) {
      const auto& blk = st.estimate.blocks[b];
      if (blk.is_second_order) continue;
      for (std::size_t k = 0; k < blk.cols.size(); ++k)
        rows.push_back({st.estimate.indicator_names[static_cast<std::size_t>(blk.cols[k])],
                        blk.name,
                        format_coef(st.estimate.block_loadings[b](static_cast<Eigen::Index>(k))),
                        format_coef(st.estimate.block_weights[b](static_cast<Eigen::Index>(k)))});
    }
    tables.push_back(
        make_table("Outer loadings", {"indicator", "construct", "loading", "weight"}, rows));
  }
  append_matrix_table(tables, "Fornell-Larcker", st.validity.fornell_larcker.constructs,
                      st.validity.fornell_larcker.matrix);
  append_matrix_table(tables, "HTMT", st.validity.htmt.constructs, st.validity.htmt.matrix);
  {
    std::vector<std::vector<std::string>> rows;
    for (const auto& c : st.reliability.constructs) {
      const auto it = st.reliability.vif.find(c);
      if (it == st.reliability.vif.end()) continue;
      const auto indicators = st.sample.spec.indicators_of(c);
      for (Eigen::Index k = 0; k < it->second.size(); ++k)
        rows.push_back({indicators[static_cast<std::size_t>(k)], c,
                        format_coef(it->second(k))});
    }
    tables.push_back(make_table("Collinearity (VIF)", {"indicator", "construct", "VIF"}, rows));
  }
  if (st.validity.cmb) {
    const auto& c = *st.validity.cmb;
    tables.push_back(make_table(
        "Common method bias (marker)", {"metric", "base", "marked", "delta"},
        {{"SRMR", format_coef(c.srmr_base), format_coef(c.srmr_marked), format_coef(c.srmr_delta)},
         {"NFI", format_coef(c.nfi_base), format_coef(c.nfi_marked), format_coef(c.nfi_delta)},
         {"max construct share %", format_pct(c.max_construct_share_pct), "", ""},
         {"verdict", c.verdict, "", ""}}));
  }
  {
    std::vector<std::vector<std::string>> rows;
    for (const auto& p : st.estimate.paths)
      rows.push_back({p.source + " -> " + p.target, format_coef(p.beta)});
    for (const auto& p : st.estimate.second_order_weights)
      rows.push_back({p.source + " => " + p.target, format_coef(p.beta)});
    tables.push_back(make_table("Path coefficients", {"path", "beta"}, rows));
  }
}

void run_structural(PipelineState& st, const PipelineConfig& config, ordered_json& doc,
                    ordered_json& tables) {
  st.structural = structural_report(st.sample, st.estimate, StructuralThresholds{},
                                    config.omission_distance);
  ordered_json s;
  for (const auto& [c, v] : st.structural.r2) {
    s["r2"][c] = v;
    s["r2_strong"][c] = st.structural.r2_strong.at(c);
  }
  for (const auto& [c, v] : st.structural.q2) s["q2"][c] = v;
  {
    ordered_json f2 = ordered_json::array();
    for (const auto& e : st.structural.f2)
      f2.push_back({{"source", e.edge.source},
                    {"target", e.edge.target},
                    {"f2", e.f2},
                    {"band", e.band}});
    s["f2"] = f2;
  }
  s["srmr"] = st.structural.srmr;
  s["srmr_pass"] = st.structural.srmr_pass;
  s["nfi"] = st.structural.nfi;
  s["nfi_pass"] = st.structural.nfi_pass;
  doc["structural"] = s;

  {
    std::vector<std::vector<std::string>> rows;
    for (const auto& [c, v] : st.structural.r2)
      rows.push_back({c, format_coef(v),
                      st.structural.q2.count(c) ? format_coef(st.structural.q2.at(c)) : "",
                      st.structural.r2_strong.at(c) ? "strong" : ""});
    tables.push_back(make_table("Explained variance", {"construct", "R2", "Q2", "note"}, rows));
  }
  {
    std::vector<std::vector<std::string>> rows;
    for (const auto& e : st.structural.f2)
      rows.push_back({e.edge.source + " -> " + e.edge.target, format_coef(e.f2), e.band});
    rows.push_back({"SRMR", format_coef(st.structural.srmr),
                    st.structural.srmr_pass ? "pass" : "check"});
    rows.push_back(
        {"NFI", format_coef(st.structural.nfi), st.structural.nfi_pass ? "pass" : "check"});
    tables.push_back(make_table("Effect sizes and fit", {"item", "value", "band"}, rows));
  }
}

void run_bootstrap_stage(PipelineState& st, const PipelineConfig& config, ordered_json& doc,
                         ordered_json& tables) {
  BootstrapConfig bc;
  bc.B = config.bootstrap_B;
  bc.seed = config.seed;
  bc.ci_level = config.ci_level;
  bc.threads = config.threads;
  bc.estimation = config.estimation;
  st.boot = bootstrap(st.sample, bc);

  ordered_json b;
  b["B"] = st.boot.B;
  b["seed"] = st.boot.seed;
  b["failed_replicates"] = st.boot.failed_replicates;
  b["n"] = st.boot.n;
  {
    ordered_json effects = ordered_json::array();
    for (const auto& e : st.boot.effects)
      effects.push_back({{"id", e.id},
                         {"estimate", e.estimate},
                         {"se", e.se},
                         {"t", e.t},
                         {"p", e.p},
                         {"ci_lo", e.ci_lo},
                         {"ci_hi", e.ci_hi},
                         {"degenerate", e.degenerate}});
    b["effects"] = effects;
  }
  doc["bootstrap"] = b;

  const auto& spec = st.sample.spec;
  st.primary_source = primary_effect_source(spec);
  ordered_json med = ordered_json::array();
  ordered_json med_tables_rows;
  for (const auto& source : spec.construct_names()) {
    if (source == spec.outcome) continue;
    if (spec.marker_block && source == *spec.marker_block) continue;
    if (enumerate_indirect_paths(spec, source, spec.outcome).empty()) continue;
    auto d = decompose(st.estimate, st.boot, spec, source, spec.outcome, config.alpha);
    ordered_json dj;
    dj["source"] = d.source;
    dj["target"] = d.target;
    dj["direct"] = d.direct;
    dj["has_direct_edge"] = d.has_direct_edge;
    dj["total_indirect"] = d.total_indirect;
    dj["total"] = d.total;
    {
      ordered_json ies = ordered_json::array();
      for (const auto& ie : d.specific_indirect)
        ies.push_back({{"path", path_id(ie.path)},
                       {"value", ie.value},
                       {"t", ie.significance->t},
                       {"p", ie.significance->p},
                       {"significant", ie.significance->significant}});
      dj["specific_indirect"] = ies;
    }
    dj["direct_significant"] = d.direct_significance->significant;
    dj["indirect_significant"] = d.indirect_significance->significant;
    dj["mediation"] = classify_mediation(d);
    if (d.total != 0.0) {
      const auto shares = mediation_shares(d);
      dj["te_minus_de_share_pct"] = shares.te_minus_de_share_pct;
      ordered_json sj = ordered_json::array();
      for (const auto& [p, v] : shares.ie_share_pct) sj.push_back({{"path", p}, {"share_pct", v}});
      dj["ie_share_pct"] = sj;
    }
    med.push_back(dj);
    st.decompositions.push_back(std::move(d));
  }
  doc["mediation"] = med;
  doc["primary_source"] = st.primary_source;

  {
    std::vector<std::vector<std::string>> rows;
    for (const auto& e : st.boot.effects) {
      if (e.id.find("->") == std::string::npos || e.id.find(':') != std::string::npos) continue;
      rows.push_back({e.id, format_coef(e.estimate), format_coef(e.se), format_coef(e.t),
                      format_coef(e.p),
                      "[" + format_coef(e.ci_lo) + ", " + format_coef(e.ci_hi) + "]"});
    }
    tables.push_back(make_table("Bootstrap path significance",
                                {"path", "beta", "SE", "t", "p", "95% CI"}, rows));
  }
  {
    std::vector<std::vector<std::string>> rows;
    for (const auto& d : st.decompositions) {
      const std::string pair = d.source + " -> " + d.target;
      rows.push_back({pair, "DE", format_coef(d.direct),
                      d.direct_significance->significant ? "significant" : "ns"});
      for (const auto& ie : d.specific_indirect)
        rows.push_back({pair, "IE " + path_id(ie.path), format_coef(ie.value),
                        ie.significance->significant ? "significant" : "ns"});
      rows.push_back({pair, "TIE", format_coef(d.total_indirect),
                      d.indirect_significance->significant ? "significant" : "ns"});
      rows.push_back({pair, "TE", format_coef(d.total), classify_mediation(d)});
    }
    tables.push_back(make_table("Effect decomposition", {"pair", "effect", "value", "note"}, rows));
  }
}

void run_predict_stage(PipelineState& st, const PipelineConfig& config, ordered_json& doc,
                       ordered_json& tables) {
  PredictConfig pc;
  pc.k = config.predict_k;
  pc.r = config.predict_r;
  pc.seed = config.seed;
  pc.threads = config.threads;
  pc.estimation = config.estimation;
  st.predict = pls_predict(st.sample, pc);

  ordered_json p;
  p["k"] = st.predict.k;
  p["r"] = st.predict.r;
  p["seed"] = st.predict.seed;
  p["skipped_folds"] = st.predict.skipped_folds;
  {
    ordered_json rows = ordered_json::array();
    for (const auto& ind : st.predict.per_indicator)
      rows.push_back({{"indicator", ind.indicator},
                      {"construct", ind.construct},
                      {"rmse_pls", ind.rmse_pls},
                      {"rmse_lm", ind.rmse_lm},
                      {"mae_pls", ind.mae_pls},
                      {"mae_lm", ind.mae_lm},
                      {"mape_pls", ind.mape_pls},
                      {"mape_lm", ind.mape_lm},
                      {"q2_pls", ind.q2_pls},
                      {"q2_lm", ind.q2_lm},
                      {"rmse_decrease_pct", ind.rmse_decrease_pct}});
    p["per_indicator"] = rows;
  }
  for (const auto& [c, v] : st.predict.avg_rmse_decrease_pct) p["avg_rmse_decrease_pct"][c] = v;
  p["error_metric"] = error_asymmetry_check(st.predict, st.sample.spec.outcome);
  doc["predict"] = p;

  {
    std::vector<std::vector<std::string>> rows;
    for (const auto& ind : st.predict.per_indicator)
      rows.push_back({ind.indicator, ind.construct, format_coef(ind.rmse_pls),
                      format_coef(ind.rmse_lm), format_coef(ind.q2_pls),
                      format_pct(ind.rmse_decrease_pct)});
    for (const auto& [c, v] : st.predict.avg_rmse_decrease_pct)
      rows.push_back({"avg", c, "", "", "", format_pct(v)});
    tables.push_back(make_table(
        "Out-of-sample prediction",
        {"indicator", "construct", "RMSE PLS", "RMSE LM", "Q2predict", "RMSE decrease %"}, rows));
  }
}

void run_classify_stage(PipelineState& st, const PipelineConfig& config, ordered_json& doc,
                        ordered_json& tables) {
  const auto& spec = st.sample.spec;
  std::vector<std::string> predictors;
  for (const auto& name : spec.construct_names()) {
    if (name == spec.outcome) continue;
    if (spec.marker_block && name == *spec.marker_block) continue;
    predictors.push_back(name);
  }
  Eigen::MatrixXd features(st.estimate.scores.rows(),
                           static_cast<Eigen::Index>(predictors.size()));
  for (std::size_t j = 0; j < predictors.size(); ++j)
    features.col(static_cast<Eigen::Index>(j)) = st.estimate.score_of(predictors[j]);
  const Eigen::VectorXd outcome = st.estimate.score_of(spec.outcome);
  const std::vector<double> scores(outcome.begin(), outcome.end());

  st.classification = select_threshold(scores, features, config.classifiers, config.seed,
                                       config.folds, config.threads);

  ordered_json c;
  c["decile"] = st.classification.decile;
  c["threshold_value"] = st.classification.threshold_value;
  c["folds"] = st.classification.folds;
  c["seed"] = st.classification.seed;
  c["features"] = predictors;
  {
    ordered_json rows = ordered_json::array();
    for (const auto& r : st.classification.per_classifier) {
      ordered_json row;
      row["classifier"] = classifier_name(r.classifier);
      row["tp"] = r.counts.tp;
      row["fp"] = r.counts.fp;
      row["fn"] = r.counts.fn;
      row["tn"] = r.counts.tn;
      row["accuracy"] = r.metrics.accuracy;
      if (r.metrics.precision) row["precision"] = *r.metrics.precision;
      if (r.metrics.recall) row["recall"] = *r.metrics.recall;
      if (r.metrics.f_measure) row["f_measure"] = *r.metrics.f_measure;
      if (r.metrics.fp_rate) row["fp_rate"] = *r.metrics.fp_rate;
      rows.push_back(row);
    }
    c["per_classifier"] = rows;
  }
  c["best"] = classifier_name(st.classification.best);
  c["best_accuracy_pct"] = st.classification.best_accuracy_pct;
  c["band"] = st.classification.band;
  doc["classification"] = c;

  {
    std::vector<std::vector<std::string>> rows;
    for (const auto& r : st.classification.per_classifier)
      rows.push_back({classifier_name(r.classifier), format_pct(r.metrics.accuracy * 100.0),
                      opt_coef(r.metrics.precision), opt_coef(r.metrics.recall),
                      opt_coef(r.metrics.f_measure), opt_coef(r.metrics.recall),
                      opt_coef(r.metrics.fp_rate)});
    rows.push_back({"best: " + classifier_name(st.classification.best),
                    format_pct(st.classification.best_accuracy_pct),
                    "decile " + std::to_string(st.classification.decile), "", "",
                    st.classification.band, ""});
    tables.push_back(make_table(
        "Classification (10-fold CV)",
        {"classifier", "accuracy %", "precision", "recall", "F", "TP rate", "FP rate"}, rows));
  }
}

void write_summary(PipelineState& st, ordered_json& doc) {
  ordered_json s;
  const EffectDecomposition* primary = nullptr;
  for (const auto& d : st.decompositions)
    if (d.source == st.primary_source) primary = &d;
  if (primary) {
    s["source"] = primary->source;
    s["target"] = primary->target;
    s["te"] = primary->total;
    s["de"] = primary->direct;
    s["total_ie"] = primary->total_indirect;
    if (primary->total != 0.0) {
      const auto shares = mediation_shares(*primary);
      s["te_minus_de_share_pct"] = shares.te_minus_de_share_pct;
      ordered_json sj = ordered_json::array();
      for (const auto& [p, v] : shares.ie_share_pct) sj.push_back({{"path", p}, {"share_pct", v}});
      s["ie_share_pct"] = sj;
    }
  }
  s["total_variance_pct"] = st.reliability.total_variance_pct;
  s["aic_total"] = st.reliability.aic_total;
  s["srmr"] = st.structural.srmr;
  s["nfi"] = st.structural.nfi;
  const auto it = st.predict.avg_rmse_decrease_pct.find(st.sample.spec.outcome);
  if (it != st.predict.avg_rmse_decrease_pct.end()) s["avg_rmse_decrease_pct"] = it->second;
  s["accuracy_pct"] = st.classification.best_accuracy_pct;
  doc["summary"] = s;
}

}  // namespace

AnalysisBundle run_pipeline(const std::string& dataset_csv, const std::string& spec_text,
                            const PipelineConfig& config) {
  AnalysisBundle bundle;
  ordered_json& doc = bundle.doc;
  doc["format"] = "plspath-bundle";
  doc["version"] = 1;

  const ordered_json config_json = config_to_json(config);
  doc["provenance"] = {{"tool", kToolVersion},
                       {"seed", config.seed},
                       {"config", config_json},
                       {"config_hash", content_hash(config_json.dump())},
                       {"spec_hash", content_hash(spec_text)},
                       {"data_hash", content_hash(dataset_csv)}};

  PipelineState st;
  const ModelSpec spec = parse_model_spec(spec_text);
  const Dataset data = parse_dataset(dataset_csv, spec, config.range);
  st.sample = validate(data, spec);

  doc["sample"] = {{"n", st.sample.n},
                   {"p", st.sample.p},
                   {"adequacy", st.sample.adequacy},
                   {"rejected_rows", data.rejected_rows},
                   {"warnings", st.sample.warnings}};

  std::size_t last = kStages.size();
  if (config.stage != "all") {
    const auto it = std::find(kStages.begin(), kStages.end(), config.stage);
    if (it == kStages.end()) throw SpecError("unknown stage: " + config.stage);
    last = static_cast<std::size_t>(it - kStages.begin()) + 1;
  }

  ordered_json stages;
  for (const auto& s : kStages) stages[s] = "not run";
  ordered_json tables = ordered_json::array();
  tables.push_back(make_table("Sample", {"metric", "value"},
                              {{"n", std::to_string(st.sample.n)},
                               {"p", std::to_string(st.sample.p)},
                               {"adequacy", format_coef(st.sample.adequacy)},
                               {"rejected rows", std::to_string(data.rejected_rows)}}));

  bool failed = false;
  for (std::size_t i = 0; i < last && !failed; ++i) {
    const std::string& stage = kStages[i];
    try {
      if (stage == "measurement") run_measurement(st, config, doc, tables);
      else if (stage == "structural") run_structural(st, config, doc, tables);
      else if (stage == "bootstrap") run_bootstrap_stage(st, config, doc, tables);
      else if (stage == "predict") run_predict_stage(st, config, doc, tables);
      else if (stage == "classify") run_classify_stage(st, config, doc, tables);
      stages[stage] = "ok";
    } catch (const Error& e) {
      stages[stage] = std::string("failed: ") + e.what();
      failed = true;
    }
  }
  doc["stages"] = stages;
  if (stages["measurement"] == "ok" && stages["structural"] == "ok") write_summary(st, doc);
  doc["tables"] = tables;
  return bundle;
}

std::string serialize_bundle(const AnalysisBundle& bundle) { return bundle.doc.dump(2) + "\n"; }

AnalysisBundle parse_bundle(const std::string& text) {
  AnalysisBundle bundle;
  try {
    bundle.doc = ordered_json::parse(text);
  } catch (const ordered_json::parse_error& e) {
    throw DataError(std::string("bundle parse: ") + e.what());
  }
  if (!bundle.doc.is_object() || bundle.doc.value("format", "") != "plspath-bundle")
    throw DataError("not a plspath bundle document");
  if (bundle.doc.value("version", 0) != 1) throw DataError("unsupported bundle version");
  return bundle;
}

std::string render_bundle_text(const AnalysisBundle& bundle) {
  std::ostringstream out;
  const auto& doc = bundle.doc;
  out << doc.at("format").get<std::string>() << " v" << doc.at("version").get<int>() << "\n";
  out << "tool: " << doc.at("provenance").at("tool").get<std::string>()
      << "  seed: " << doc.at("provenance").at("seed").get<std::uint64_t>() << "\n";
  for (const auto& [stage, status] : doc.at("stages").items())
    out << "stage " << stage << ": " << status.get<std::string>() << "\n";

  for (const auto& table : doc.at("tables")) {
    out << "\n== " << table.at("title").get<std::string>() << " ==\n";
    std::vector<std::vector<std::string>> grid;
    grid.push_back(table.at("columns").get<std::vector<std::string>>());
    for (const auto& row : table.at("rows"))
      grid.push_back(row.get<std::vector<std::string>>());
    std::vector<std::size_t> widths;
    for (const auto& row : grid) {
      if (widths.size() < row.size()) widths.resize(row.size(), 0);
      for (std::size_t j = 0; j < row.size(); ++j)
        widths[j] = std::max(widths[j], row[j].size());
    }
    for (const auto& row : grid) {
      for (std::size_t j = 0; j < row.size(); ++j) {
        if (j) out << "  ";
        out << row[j] << std::string(widths[j] - row[j].size(), ' ');
      }
      out << "\n";
    }
  }
  return out.str();
}

ModelSummary summary_from_bundle(const AnalysisBundle& bundle, const std::string& label) {
  if (!bundle.doc.contains("summary"))
    throw MetricError("bundle has no summary (pipeline did not reach the structural stage)");
  const auto& s = bundle.doc.at("summary");
  ModelSummary out;
  out.label = label;
  out.te = s.value("te", 0.0);
  out.de = s.value("de", 0.0);
  out.total_ie = s.value("total_ie", 0.0);
  out.te_minus_de_share_pct = s.value("te_minus_de_share_pct", 0.0);
  if (s.contains("ie_share_pct"))
    for (const auto& row : s.at("ie_share_pct"))
      out.ie_share_pct.emplace_back(row.at("path").get<std::string>(),
                                    row.at("share_pct").get<double>());
  out.total_variance_pct = s.value("total_variance_pct", 0.0);
  out.aic_total = s.value("aic_total", 0.0);
  out.srmr = s.value("srmr", 0.0);
  out.nfi = s.value("nfi", 0.0);
  out.avg_rmse_decrease_pct = s.value("avg_rmse_decrease_pct", 0.0);
  out.accuracy_pct = s.value("accuracy_pct", 0.0);
  return out;
}

ComparisonDocument compare_bundles(const AnalysisBundle& a, const AnalysisBundle& b,
                                   ComparisonMode mode) {
  if (!a.complete() || !b.complete())
    throw MetricError("comparison needs two complete bundles");
  const auto sa = summary_from_bundle(a, "A");
  const auto sb = summary_from_bundle(b, "B");
  ComparisonDocument out;
  out.report = compare_models(sa, sb, mode);

  out.doc["format"] = "plspath-comparison";
  out.doc["version"] = 1;
  out.doc["mode"] = mode == ComparisonMode::kWithin ? "within" : "between";
  {
    ordered_json rows = ordered_json::array();
    for (const auto& row : out.report.rows)
      rows.push_back(
          {{"metric", row.metric}, {"a", row.a}, {"b", row.b}, {"delta", row.delta}});
    out.doc["rows"] = rows;
  }
  out.doc["share_delta_points"] = out.report.share_delta_points;
  out.doc["share_delta_flagged"] = out.report.share_delta_flagged;

  std::ostringstream text;
  text << "comparison mode: " << out.doc["mode"].get<std::string>() << "\n";
  const char* delta_name = mode == ComparisonMode::kWithin ? "pct diff" : "change rate";
  text << "metric | A | B | " << delta_name << "\n";
  for (const auto& row : out.report.rows)
    text << row.metric << " | " << format_coef(row.a) << " | " << format_coef(row.b) << " | "
         << format_pct(row.delta) << "\n";
  text << "share delta (points): " << format_pct(out.report.share_delta_points)
       << (out.report.share_delta_flagged ? " [flagged]" : "") << "\n";
  out.text = text.str();
  return out;
}

}  // namespace plspath
