#pragma once

#include <cstdint>
#include <nlohmann/json.hpp>
#include <string>
#include <vector>

#include "plspath/bootstrap.hpp"
#include "plspath/classify.hpp"
#include "plspath/dataset.hpp"
#include "plspath/mediation.hpp"
#include "plspath/predict.hpp"

namespace plspath {

using ordered_json = nlohmann::ordered_json;

// FNV-1a 64-bit content hash, lowercase hex (provenance / cross-report checks).
std::string content_hash(const std::string& text);

// Fixed table precision: 3 decimals for coefficients, 2 for percentages.
std::string format_coef(double v);
std::string format_pct(double v);

struct PipelineConfig {
  std::uint64_t seed = 1;
  std::size_t bootstrap_B = 5000;
  double ci_level = 0.95;
  double alpha = 0.05;
  int predict_k = 10;
  int predict_r = 30;
  int folds = 10;
  int omission_distance = 7;
  unsigned threads = 0;
  RangePolicy range = RangePolicy::kLikert7;
  std::string stage = "all";  // measurement | structural | bootstrap | predict | classify | all
  std::vector<Classifier> classifiers = classifier_roster();
  EstimationConfig estimation;
};

// JSON config document; unknown keys are errors. Missing file fields keep the
// defaults above (the published analysis settings).
PipelineConfig parse_pipeline_config(const std::string& json_text);
ordered_json config_to_json(const PipelineConfig& config);

// One analysis run, serialized as a single versioned structured-text document.
// The human-readable tables are embedded pre-formatted, so every rendered
// number appears verbatim in the machine-readable form.
struct AnalysisBundle {
  ordered_json doc;

  bool stage_ok(const std::string& stage) const;
  bool complete() const;  // every stage "ok"
};

// Full pipeline: validate, estimate, measurement reports, structural metrics,
// bootstrap + mediation, out-of-sample prediction, decile classification.
// Stage gating stops after config.stage; later sections read "not run".
// A module failure marks its stage "failed: ..." and stops the run; the
// partial bundle is still returned.
AnalysisBundle run_pipeline(const std::string& dataset_csv, const std::string& spec_text,
                            const PipelineConfig& config = {});

std::string serialize_bundle(const AnalysisBundle& bundle);
AnalysisBundle parse_bundle(const std::string& text);  // throws DataError

// Prints the embedded tables; no numbers are recomputed at render time.
std::string render_bundle_text(const AnalysisBundle& bundle);

// Comparative metrics of a complete bundle (throws MetricError when a needed
// stage did not run).
ModelSummary summary_from_bundle(const AnalysisBundle& bundle, const std::string& label);

struct ComparisonDocument {
  ComparisonReport report;
  ordered_json doc;
  std::string text;
};
ComparisonDocument compare_bundles(const AnalysisBundle& a, const AnalysisBundle& b,
                                   ComparisonMode mode);

}  // namespace plspath
