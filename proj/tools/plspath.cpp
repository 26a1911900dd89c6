#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "plspath/bootstrap.hpp"
#include "plspath/bundle.hpp"
#include "plspath/classify.hpp"
#include "plspath/common.hpp"
#include "plspath/mediation.hpp"
#include "plspath/predict.hpp"
#include "plspath/split_test.hpp"
#include "plspath/structural.hpp"
#include "plspath/synth.hpp"

namespace {

// Exit codes by failure class.
constexpr int kOk = 0;
constexpr int kUsageError = 1;
constexpr int kInputError = 2;       // file, spec, or data defects
constexpr int kEstimationError = 3;
constexpr int kMetricError = 4;
constexpr int kClassifyError = 5;

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw plspath::DataError("cannot open file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_output(const std::string& out_path, const std::string& content) {
  if (out_path.empty()) {
    std::cout << content;
    return;
  }
  std::ofstream out(out_path, std::ios::binary);
  if (!out) throw plspath::DataError("cannot write file: " + out_path);
  out << content;
}

struct GlobalOpts {
  std::uint64_t seed = 1;
  std::string config_path;
  std::string out_path;
  std::string format = "text";
};

plspath::PipelineConfig load_config(const GlobalOpts& g) {
  plspath::PipelineConfig config;
  if (!g.config_path.empty()) config = plspath::parse_pipeline_config(read_file(g.config_path));
  config.seed = g.seed;
  return config;
}

plspath::ValidatedSample load_sample(const std::string& data_path, const std::string& spec_path,
                                     plspath::RangePolicy range) {
  const auto spec = plspath::parse_model_spec(read_file(spec_path));
  const auto data = plspath::parse_dataset(read_file(data_path), spec, range);
  return plspath::validate(data, spec);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"PLS path-model analysis pipeline"};
  app.require_subcommand(1);

  GlobalOpts g;
  app.add_option("--seed", g.seed, "random seed");
  app.add_option("--config", g.config_path, "JSON config file");
  app.add_option("--out", g.out_path, "output file (default stdout)");
  app.add_option("--format", g.format, "text | structured")
      ->check(CLI::IsMember({"text", "structured"}));

  std::string data_path, spec_path, range_str = "likert7";
  auto add_sample_opts = [&](CLI::App* cmd) {
    cmd->add_option("--data", data_path, "dataset CSV")->required();
    cmd->add_option("--spec", spec_path, "model spec file")->required();
    cmd->add_option("--range", range_str, "likert7 | unrestricted")
        ->check(CLI::IsMember({"likert7", "unrestricted"}));
  };
  auto range_policy = [&] {
    return range_str == "likert7" ? plspath::RangePolicy::kLikert7
                                  : plspath::RangePolicy::kUnrestricted;
  };

  auto* validate_cmd = app.add_subcommand("validate", "check dataset against a spec");
  add_sample_opts(validate_cmd);

  auto* estimate_cmd = app.add_subcommand("estimate", "fit the path model");
  add_sample_opts(estimate_cmd);

  auto* bootstrap_cmd = app.add_subcommand("bootstrap", "bootstrap effect significance");
  add_sample_opts(bootstrap_cmd);
  std::size_t boot_B = 5000;
  bootstrap_cmd->add_option("--B", boot_B, "bootstrap resamples");

  auto* predict_cmd = app.add_subcommand("predict", "out-of-sample prediction benchmark");
  add_sample_opts(predict_cmd);
  int pk = 10, pr = 30;
  predict_cmd->add_option("--k", pk, "folds");
  predict_cmd->add_option("--r", pr, "repetitions");

  auto* mediate_cmd = app.add_subcommand("mediate", "effect decomposition with significance");
  add_sample_opts(mediate_cmd);
  std::string med_source, med_target;
  std::size_t med_B = 5000;
  mediate_cmd->add_option("--source", med_source, "source construct")->required();
  mediate_cmd->add_option("--target", med_target, "target construct")->required();
  mediate_cmd->add_option("--B", med_B, "bootstrap resamples");

  auto* classify_cmd = app.add_subcommand("classify", "decile classification suite");
  add_sample_opts(classify_cmd);
  std::vector<std::string> classifier_names;
  int cls_folds = 10;
  bool raw_indicators = false;
  classify_cmd->add_option("--classifiers", classifier_names, "classifier subset");
  classify_cmd->add_option("--folds", cls_folds, "cross-validation folds");
  classify_cmd->add_flag("--raw-indicators", raw_indicators,
                         "use predictor indicators instead of latent scores");

  auto* split_cmd = app.add_subcommand("splittest", "train on one sample, test on another");
  std::string train_path, test_path, split_spec_path;
  split_cmd->add_option("--train", train_path, "training dataset CSV")->required();
  split_cmd->add_option("--test", test_path, "testing dataset CSV")->required();
  split_cmd->add_option("--spec", split_spec_path, "common model spec")->required();
  split_cmd->add_option("--range", range_str, "likert7 | unrestricted")
      ->check(CLI::IsMember({"likert7", "unrestricted"}));

  auto* synth_cmd = app.add_subcommand("synth", "generate ground-truth data");
  std::string gspec_path;
  synth_cmd->add_option("--gspec", gspec_path, "generator spec file")->required();

  auto* compare_cmd = app.add_subcommand("compare", "compare two analysis bundles");
  std::string bundle_a, bundle_b, mode_str = "within";
  compare_cmd->add_option("--a", bundle_a, "first bundle")->required();
  compare_cmd->add_option("--b", bundle_b, "second bundle")->required();
  compare_cmd->add_option("--mode", mode_str, "within | between")
      ->check(CLI::IsMember({"within", "between"}));

  auto* run_cmd = app.add_subcommand("run", "full pipeline");
  add_sample_opts(run_cmd);
  std::string stage = "";
  run_cmd->add_option("--stage", stage, "stop after this stage");

  CLI11_PARSE(app, argc, argv);

  try {
    const bool structured = g.format == "structured";

    if (*validate_cmd) {
      const auto sample = load_sample(data_path, spec_path, range_policy());
      plspath::ordered_json j{{"n", sample.n},
                              {"p", sample.p},
                              {"adequacy", sample.adequacy},
                              {"rejected_rows", sample.dataset.rejected_rows},
                              {"warnings", sample.warnings}};
      if (structured) {
        write_output(g.out_path, j.dump(2) + "\n");
      } else {
        std::ostringstream out;
        out << "n: " << sample.n << "\np: " << sample.p
            << "\nadequacy: " << plspath::format_coef(sample.adequacy)
            << "\nrejected rows: " << sample.dataset.rejected_rows << "\n";
        for (const auto& w : sample.warnings) out << "warning: " << w << "\n";
        write_output(g.out_path, out.str());
      }
    } else if (*estimate_cmd) {
      const auto config = load_config(g);
      const auto sample = load_sample(data_path, spec_path, range_policy());
      const auto est = plspath::estimate(sample, config.estimation);
      if (structured) {
        write_output(g.out_path, plspath::serialize_estimate(est));
      } else {
        std::ostringstream out;
        out << "converged: " << (est.converged ? "yes" : "no")
            << "  iterations: " << est.iterations << "\n";
        for (const auto& p : est.paths)
          out << p.source << " -> " << p.target << ": " << plspath::format_coef(p.beta) << "\n";
        write_output(g.out_path, out.str());
      }
    } else if (*bootstrap_cmd) {
      auto config = load_config(g);
      const auto sample = load_sample(data_path, spec_path, range_policy());
      plspath::BootstrapConfig bc;
      bc.B = boot_B;
      bc.seed = config.seed;
      bc.ci_level = config.ci_level;
      bc.threads = config.threads;
      bc.estimation = config.estimation;
      const auto result = plspath::bootstrap(sample, bc);
      if (structured) {
        plspath::ordered_json rows = plspath::ordered_json::array();
        for (const auto& e : result.effects)
          rows.push_back({{"id", e.id}, {"estimate", e.estimate}, {"se", e.se}, {"t", e.t},
                          {"p", e.p}, {"ci_lo", e.ci_lo}, {"ci_hi", e.ci_hi}});
        plspath::ordered_json j{{"B", result.B},
                                {"seed", result.seed},
                                {"failed_replicates", result.failed_replicates},
                                {"effects", rows}};
        write_output(g.out_path, j.dump(2) + "\n");
      } else {
        std::ostringstream out;
        out << "B: " << result.B << "  failed: " << result.failed_replicates << "\n";
        for (const auto& e : result.effects)
          out << e.id << ": " << plspath::format_coef(e.estimate)
              << "  t=" << plspath::format_coef(e.t) << "  p=" << plspath::format_coef(e.p)
              << "  CI [" << plspath::format_coef(e.ci_lo) << ", "
              << plspath::format_coef(e.ci_hi) << "]\n";
        write_output(g.out_path, out.str());
      }
    } else if (*predict_cmd) {
      auto config = load_config(g);
      const auto sample = load_sample(data_path, spec_path, range_policy());
      plspath::PredictConfig pc;
      pc.k = pk;
      pc.r = pr;
      pc.seed = config.seed;
      pc.threads = config.threads;
      pc.estimation = config.estimation;
      const auto report = plspath::pls_predict(sample, pc);
      std::ostringstream out;
      if (structured) {
        plspath::ordered_json rows = plspath::ordered_json::array();
        for (const auto& ind : report.per_indicator)
          rows.push_back({{"indicator", ind.indicator},
                          {"construct", ind.construct},
                          {"rmse_pls", ind.rmse_pls},
                          {"rmse_lm", ind.rmse_lm},
                          {"q2_pls", ind.q2_pls},
                          {"rmse_decrease_pct", ind.rmse_decrease_pct}});
        plspath::ordered_json j{{"k", report.k}, {"r", report.r}, {"per_indicator", rows}};
        for (const auto& [c, v] : report.avg_rmse_decrease_pct)
          j["avg_rmse_decrease_pct"][c] = v;
        out << j.dump(2) << "\n";
      } else {
        for (const auto& ind : report.per_indicator)
          out << ind.indicator << " (" << ind.construct
              << "): RMSE " << plspath::format_coef(ind.rmse_pls) << " vs LM "
              << plspath::format_coef(ind.rmse_lm) << ", Q2 "
              << plspath::format_coef(ind.q2_pls) << ", decrease "
              << plspath::format_pct(ind.rmse_decrease_pct) << "%\n";
        for (const auto& [c, v] : report.avg_rmse_decrease_pct)
          out << "avg decrease " << c << ": " << plspath::format_pct(v) << "%\n";
      }
      write_output(g.out_path, out.str());
    } else if (*mediate_cmd) {
      auto config = load_config(g);
      const auto sample = load_sample(data_path, spec_path, range_policy());
      const auto est = plspath::estimate(sample, config.estimation);
      plspath::BootstrapConfig bc;
      bc.B = med_B;
      bc.seed = config.seed;
      bc.threads = config.threads;
      bc.estimation = config.estimation;
      const auto boot = plspath::bootstrap(sample, bc);
      const auto d =
          plspath::decompose(est, boot, sample.spec, med_source, med_target, config.alpha);
      std::ostringstream out;
      if (structured) {
        plspath::ordered_json ies = plspath::ordered_json::array();
        for (const auto& ie : d.specific_indirect)
          ies.push_back({{"path", plspath::path_id(ie.path)},
                         {"value", ie.value},
                         {"significant", ie.significance->significant}});
        plspath::ordered_json j{{"source", d.source},
                                {"target", d.target},
                                {"direct", d.direct},
                                {"total_indirect", d.total_indirect},
                                {"total", d.total},
                                {"specific_indirect", ies},
                                {"mediation", plspath::classify_mediation(d)}};
        out << j.dump(2) << "\n";
      } else {
        out << "DE: " << plspath::format_coef(d.direct) << "\n";
        for (const auto& ie : d.specific_indirect)
          out << "IE " << plspath::path_id(ie.path) << ": " << plspath::format_coef(ie.value)
              << (ie.significance->significant ? " (significant)" : " (ns)") << "\n";
        out << "TIE: " << plspath::format_coef(d.total_indirect) << "\n";
        out << "TE: " << plspath::format_coef(d.total) << "\n";
        out << "mediation: " << plspath::classify_mediation(d) << "\n";
      }
      write_output(g.out_path, out.str());
    } else if (*classify_cmd) {
      auto config = load_config(g);
      const auto sample = load_sample(data_path, spec_path, range_policy());
      const auto est = plspath::estimate(sample, config.estimation);
      std::vector<plspath::Classifier> classifiers = config.classifiers;
      if (!classifier_names.empty()) {
        classifiers.clear();
        for (const auto& name : classifier_names)
          classifiers.push_back(plspath::classifier_from_name(name));
      }
      const auto& spec = sample.spec;
      std::vector<std::string> predictors;
      for (const auto& name : spec.construct_names()) {
        if (name == spec.outcome) continue;
        if (spec.marker_block && name == *spec.marker_block) continue;
        predictors.push_back(name);
      }
      Eigen::MatrixXd features;
      if (raw_indicators) {
        std::vector<Eigen::Index> cols;
        for (const auto& c : predictors) {
          if (spec.is_second_order(c)) continue;
          for (const auto& ind : spec.indicators_of(c))
            cols.push_back(sample.dataset.column_index(ind));
        }
        features.resize(sample.dataset.rows.rows(), static_cast<Eigen::Index>(cols.size()));
        for (std::size_t j = 0; j < cols.size(); ++j)
          features.col(static_cast<Eigen::Index>(j)) = sample.dataset.rows.col(cols[j]);
      } else {
        features.resize(est.scores.rows(), static_cast<Eigen::Index>(predictors.size()));
        for (std::size_t j = 0; j < predictors.size(); ++j)
          features.col(static_cast<Eigen::Index>(j)) = est.score_of(predictors[j]);
      }
      const Eigen::VectorXd outcome = est.score_of(spec.outcome);
      const std::vector<double> scores(outcome.begin(), outcome.end());
      const auto report = plspath::select_threshold(scores, features, classifiers, config.seed,
                                                    cls_folds, config.threads);
      std::ostringstream out;
      if (structured) {
        plspath::ordered_json rows = plspath::ordered_json::array();
        for (const auto& r : report.per_classifier) {
          plspath::ordered_json row{{"classifier", plspath::classifier_name(r.classifier)},
                                    {"accuracy", r.metrics.accuracy}};
          if (r.metrics.precision) row["precision"] = *r.metrics.precision;
          if (r.metrics.recall) row["recall"] = *r.metrics.recall;
          if (r.metrics.fp_rate) row["fp_rate"] = *r.metrics.fp_rate;
          rows.push_back(row);
        }
        plspath::ordered_json j{{"decile", report.decile},
                                {"threshold_value", report.threshold_value},
                                {"per_classifier", rows},
                                {"best", plspath::classifier_name(report.best)},
                                {"best_accuracy_pct", report.best_accuracy_pct},
                                {"band", report.band}};
        out << j.dump(2) << "\n";
      } else {
        out << "decile: " << report.decile << " (threshold "
            << plspath::format_coef(report.threshold_value) << ")\n";
        for (const auto& r : report.per_classifier)
          out << plspath::classifier_name(r.classifier) << ": accuracy "
              << plspath::format_pct(r.metrics.accuracy * 100.0) << "%\n";
        out << "best: " << plspath::classifier_name(report.best) << " ("
            << plspath::format_pct(report.best_accuracy_pct) << "%, " << report.band << ")\n";
      }
      write_output(g.out_path, out.str());
    } else if (*split_cmd) {
      const auto config = load_config(g);
      const auto train = load_sample(train_path, split_spec_path, range_policy());
      const auto test = load_sample(test_path, split_spec_path, range_policy());
      plspath::SplitTestConfig sc;
      sc.train_label = train_path;
      sc.test_label = test_path;
      sc.estimation = config.estimation;
      const auto report = plspath::split_test(train, test, sc);
      std::ostringstream out;
      if (structured) {
        plspath::ordered_json rows = plspath::ordered_json::array();
        for (const auto& c : report.cells)
          rows.push_back({{"construct", c.construct},
                          {"mse_train", c.mse_train},
                          {"mse_test", c.mse_test},
                          {"rmse_train", c.rmse_train},
                          {"rmse_test", c.rmse_test},
                          {"mse_pct_diff", c.mse_pct_diff},
                          {"rmse_pct_diff", c.rmse_pct_diff},
                          {"verdict", c.verdict}});
        plspath::ordered_json j{
            {"train", report.train_label}, {"test", report.test_label}, {"cells", rows}};
        out << j.dump(2) << "\n";
      } else {
        out << "train: " << report.train_label << "  test: " << report.test_label << "\n";
        for (const auto& c : report.cells)
          out << c.construct << ": MSE " << plspath::format_coef(c.mse_train) << " -> "
              << plspath::format_coef(c.mse_test) << " ("
              << plspath::format_pct(c.mse_pct_diff) << "%), RMSE "
              << plspath::format_coef(c.rmse_train) << " -> "
              << plspath::format_coef(c.rmse_test) << " ("
              << plspath::format_pct(c.rmse_pct_diff) << "%), " << c.verdict << "\n";
      }
      write_output(g.out_path, out.str());
    } else if (*synth_cmd) {
      const auto gspec = plspath::parse_generator_spec(read_file(gspec_path));
      const auto data = plspath::generate(gspec);
      write_output(g.out_path, plspath::emit_dataset_csv(data));
    } else if (*compare_cmd) {
      const auto a = plspath::parse_bundle(read_file(bundle_a));
      const auto b = plspath::parse_bundle(read_file(bundle_b));
      const auto mode = mode_str == "within" ? plspath::ComparisonMode::kWithin
                                             : plspath::ComparisonMode::kBetween;
      const auto cmp = plspath::compare_bundles(a, b, mode);
      write_output(g.out_path, structured ? cmp.doc.dump(2) + "\n" : cmp.text);
    } else if (*run_cmd) {
      auto config = load_config(g);
      config.range = range_policy();
      if (!stage.empty()) config.stage = stage;
      const auto bundle =
          plspath::run_pipeline(read_file(data_path), read_file(spec_path), config);
      write_output(g.out_path, structured ? plspath::serialize_bundle(bundle)
                                          : plspath::render_bundle_text(bundle));
      for (const auto& [name, status] : bundle.doc.at("stages").items()) {
        const auto s = status.get<std::string>();
        if (s.rfind("failed", 0) == 0) {
          std::cerr << "stage " << name << " " << s << "\n";
          return kEstimationError;
        }
      }
    }
  } catch (const plspath::SpecError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInputError;
  } catch (const plspath::DataError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInputError;
  } catch (const plspath::EstimationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kEstimationError;
  } catch (const plspath::MetricError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kMetricError;
  } catch (const plspath::ClassifyError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kClassifyError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsageError;
  }
  return kOk;
}
