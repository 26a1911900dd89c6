#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "plspath/dataset.hpp"
#include "plspath/model_spec.hpp"

namespace plspath {

enum class OutputMode { kContinuous, kLikert7 };

// Ground-truth data generator description: a first-order model spec plus the
// population parameters. Endogenous latents are renormalized to unit variance
// after structural generation, so implied correlations follow the closed form
// (single edge: beta / sqrt(beta^2 + sigma^2)).
struct GeneratorSpec {
  ModelSpec spec;
  std::map<std::pair<std::string, std::string>, double> true_paths;  // per edge
  std::map<std::string, double> true_loadings;                       // per indicator, default 1
  std::map<std::string, double> structural_noise_sd;  // per endogenous construct, default 1
  std::map<std::string, double> indicator_noise_sd;   // per indicator, default 0
  std::size_t n = 0;
  std::uint64_t seed = 1;
  OutputMode output_mode = OutputMode::kContinuous;

  double path(const std::string& source, const std::string& target) const;
  double loading(const std::string& indicator) const;
  double structural_noise(const std::string& construct) const;
  double indicator_noise(const std::string& indicator) const;

  // Validates the parameter maps against the spec and the positive
  // definiteness of the implied latent covariance; throws SpecError.
  void check() const;
};

// Extension of the model-spec grammar with parameter lines
// (see docs/model-spec-format.md). Throws SpecError with line context.
GeneratorSpec parse_generator_spec(const std::string& text);

struct ImpliedCovariance {
  std::vector<std::string> constructs;  // topological order used below
  Eigen::MatrixXd latent;               // correlation-scale (unit diagonal)
  std::vector<std::string> indicators;  // dataset column order
  Eigen::MatrixXd indicator;

  double latent_cov(const std::string& a, const std::string& b) const;
  double indicator_cov(const std::string& a, const std::string& b) const;
};

// Closed-form population covariance from the path/loading/noise parameters by
// a reduced-form pass over the structural DAG.
ImpliedCovariance implied_covariance(const GeneratorSpec& gspec);

// Population standardized path coefficients implied by the generator (the
// recovery target for estimation on generated data): per endogenous target,
// the regression of its latent on its parents' latents under the implied
// covariance.
std::map<std::pair<std::string, std::string>, double> implied_standardized_paths(
    const GeneratorSpec& gspec);

// Deterministic draw of n rows; likert7 mode maps theoretically standardized
// indicators to {1..7} by fixed equal-probability standard-normal cut points.
Dataset generate(const GeneratorSpec& gspec);

}  // namespace plspath
