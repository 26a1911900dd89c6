#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "plspath/model_spec.hpp"
#include "plspath/pls.hpp"

namespace plspath {

struct BootstrapResult;  // resampling module

// All simple directed paths of length >= 2 edges from source to target in the
// structural DAG, lexicographically ordered by construct sequence.
std::vector<std::vector<std::string>> enumerate_indirect_paths(const ModelSpec& spec,
                                                               const std::string& source,
                                                               const std::string& target);

// "A->B->C" notation shared by the effect catalog and reports.
std::string path_id(const std::vector<std::string>& path);

// Point estimates of every direct, specific-indirect, total-indirect, and
// total effect derivable from per-edge coefficients. Keys: "A->B" for edges,
// "IE:A->B->C", "TIE:A->C", "TE:A->C", "DE:A->C" for each ordered pair with at
// least one indirect path.
std::map<std::string, double> effect_catalog(
    const ModelSpec& spec, const std::map<std::pair<std::string, std::string>, double>& betas);
std::map<std::string, double> effect_catalog(const ModelSpec& spec, const PlsEstimate& estimate);

struct ComponentSignificance {
  double t = 0.0;
  double p = 1.0;
  bool significant = false;
};

struct EffectDecomposition {
  std::string source;
  std::string target;
  double direct = 0.0;  // 0 when no direct edge exists
  bool has_direct_edge = false;
  struct SpecificIndirect {
    std::vector<std::string> path;
    double value = 0.0;
    std::optional<ComponentSignificance> significance;
  };
  std::vector<SpecificIndirect> specific_indirect;
  double total_indirect = 0.0;
  double total = 0.0;  // direct + total_indirect, exact by construction
  std::optional<ComponentSignificance> direct_significance;
  std::optional<ComponentSignificance> indirect_significance;  // of the IE sum
};

// Decomposition from published/point coefficients only (no significance).
EffectDecomposition decompose(const ModelSpec& spec,
                              const std::map<std::pair<std::string, std::string>, double>& betas,
                              const std::string& source, const std::string& target);

// Decomposition from a fitted model with bootstrap significance attached.
EffectDecomposition decompose(const PlsEstimate& estimate, const BootstrapResult& boot,
                              const ModelSpec& spec, const std::string& source,
                              const std::string& target, double alpha = 0.05);

// Zhao-style mediation taxonomy from the decomposition's significance fields.
std::string classify_mediation(const EffectDecomposition& decomp);

struct MediationShares {
  double te_minus_de = 0.0;
  double te_minus_de_share_pct = 0.0;             // (TE-DE)/TE x 100
  std::vector<std::pair<std::string, double>> ie_share_pct;  // per path, IE/TE x 100
};
MediationShares mediation_shares(const EffectDecomposition& decomp);

// |a - b| / ((a+b)/2) x 100; symmetric; used for within-study comparisons.
double percentage_difference(double a, double b);

// |a - b| / b x 100; denominator is the second argument; between-studies.
double change_rate(double a, double b);

// One analysis run's comparative metrics (assembled by the report module).
struct ModelSummary {
  std::string label;
  double te = 0.0, de = 0.0, total_ie = 0.0;
  double te_minus_de_share_pct = 0.0;
  std::vector<std::pair<std::string, double>> ie_share_pct;
  double total_variance_pct = 0.0;
  double aic_total = 0.0;
  double srmr = 0.0, nfi = 0.0;
  double avg_rmse_decrease_pct = 0.0;  // outcome indicators, PLS vs LM
  double accuracy_pct = 0.0;           // best classifier accuracy
};

enum class ComparisonMode { kWithin, kBetween };

struct ComparisonReport {
  ComparisonMode mode;
  struct Row {
    std::string metric;
    double a = 0.0, b = 0.0;
    double delta = 0.0;  // percentage difference (within) or change rate (between)
  };
  std::vector<Row> rows;
  double share_delta_points = 0.0;  // (TE-DE)/TE share difference, percentage points
  bool share_delta_flagged = false;  // exceeds the configured threshold
};

ComparisonReport compare_models(const ModelSummary& a, const ModelSummary& b, ComparisonMode mode,
                                double share_flag_threshold_pct = 5.0);

}  // namespace plspath
