#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "plspath/model_spec.hpp"

namespace plspath {

// Rectangular respondent-by-indicator matrix. Estimation columns are ordered
// exactly as the spec declares them (binding is by name, never by file
// position); extra file columns land in meta untouched.
struct Dataset {
  std::vector<std::string> column_names;  // estimation indicators, spec order
  Eigen::MatrixXd rows;                   // n x p
  std::vector<std::string> meta_names;
  std::vector<std::vector<std::string>> meta;  // n rows, one cell per meta column
  std::size_t rejected_rows = 0;               // rows dropped for missing estimation cells

  std::size_t n() const { return static_cast<std::size_t>(rows.rows()); }
  std::size_t p() const { return static_cast<std::size_t>(rows.cols()); }
  Eigen::Index column_index(const std::string& name) const;  // throws DataError
};

enum class RangePolicy {
  kLikert7,      // enforce values in [1, 7]
  kUnrestricted  // continuous data (synthetic inputs)
};

// Loads a UTF-8 comma-separated file: first row = column names, decimal point
// ".". Missing estimation cells reject the whole row (counted); non-numeric or
// out-of-range cells are hard errors with row/column context.
Dataset load_dataset(const std::string& path, const ModelSpec& spec,
                     RangePolicy policy = RangePolicy::kLikert7);

// Same parser over in-memory text (used by tests and the CLI's stdin path).
Dataset parse_dataset(const std::string& csv_text, const ModelSpec& spec,
                      RangePolicy policy = RangePolicy::kLikert7);

// Builds a Dataset directly from a matrix whose columns follow `names`
// (synthetic generation path; no range enforcement).
Dataset dataset_from_matrix(const Eigen::MatrixXd& values, const std::vector<std::string>& names);

std::string emit_dataset_csv(const Dataset& data);

struct ValidatedSample {
  Dataset dataset;
  ModelSpec spec;
  std::size_t n = 0;
  std::size_t p = 0;
  double adequacy = 0.0;  // n / p, the subject-to-item ratio
  std::vector<std::string> warnings;
};

// Joint consistency check. Constant estimation columns and n < 2 are errors;
// adequacy below 10 is a warning, never an error. Pure: identical inputs give
// identical outputs.
ValidatedSample validate(const Dataset& dataset, const ModelSpec& spec);

}  // namespace plspath
