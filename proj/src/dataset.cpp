#include "plspath/dataset.hpp"

#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "plspath/common.hpp"
#include "plspath/stats.hpp"

namespace plspath {

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) {
    // strip surrounding whitespace and a trailing \r from CRLF files
    const auto b = cell.find_first_not_of(" \t\r");
    const auto e = cell.find_last_not_of(" \t\r");
    cells.push_back(b == std::string::npos ? "" : cell.substr(b, e - b + 1));
  }
  if (!line.empty() && line.back() == ',') cells.push_back("");
  return cells;
}

}  // namespace

Eigen::Index Dataset::column_index(const std::string& name) const {
  for (std::size_t j = 0; j < column_names.size(); ++j)
    if (column_names[j] == name) return static_cast<Eigen::Index>(j);
  throw DataError("missing column: " + name);
}

Dataset parse_dataset(const std::string& csv_text, const ModelSpec& spec, RangePolicy policy) {
  std::istringstream in(csv_text);
  std::string line;
  if (!std::getline(in, line)) throw DataError("empty dataset file");
  const auto header = split_csv_line(line);

  std::map<std::string, std::size_t> position;
  for (std::size_t j = 0; j < header.size(); ++j) {
    if (position.count(header[j])) throw DataError("duplicate column name: " + header[j]);
    position[header[j]] = j;
  }

  Dataset data;
  data.column_names = spec.all_indicators();
  std::vector<std::size_t> est_pos;
  for (const auto& name : data.column_names) {
    auto it = position.find(name);
    if (it == position.end()) throw DataError("missing column: " + name);
    est_pos.push_back(it->second);
  }
  std::vector<bool> is_estimation(header.size(), false);
  for (auto j : est_pos) is_estimation[j] = true;
  for (std::size_t j = 0; j < header.size(); ++j)
    if (!is_estimation[j]) data.meta_names.push_back(header[j]);

  std::vector<Eigen::VectorXd> kept;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto cells = split_csv_line(line);
    if (cells.size() != header.size())
      throw DataError("row " + std::to_string(lineno) + ": expected " +
                      std::to_string(header.size()) + " cells, got " +
                      std::to_string(cells.size()));

    bool missing = false;
    Eigen::VectorXd row(static_cast<Eigen::Index>(est_pos.size()));
    for (std::size_t k = 0; k < est_pos.size(); ++k) {
      const std::string& cell = cells[est_pos[k]];
      if (cell.empty()) {
        missing = true;
        break;
      }
      std::size_t consumed = 0;
      double value = 0.0;
      try {
        value = std::stod(cell, &consumed);
      } catch (const std::exception&) {
        consumed = 0;
      }
      if (consumed != cell.size() || !std::isfinite(value))
        throw DataError("row " + std::to_string(lineno) + ", column " + data.column_names[k] +
                        ": non-numeric cell '" + cell + "'");
      if (policy == RangePolicy::kLikert7 && (value < 1.0 || value > 7.0))
        throw DataError("row " + std::to_string(lineno) + ", column " + data.column_names[k] +
                        ": value " + cell + " outside [1, 7]");
      row(static_cast<Eigen::Index>(k)) = value;
    }
    if (missing) {
      ++data.rejected_rows;
      continue;
    }
    kept.push_back(std::move(row));
    std::vector<std::string> meta_row;
    for (std::size_t j = 0; j < header.size(); ++j)
      if (!is_estimation[j]) meta_row.push_back(cells[j]);
    data.meta.push_back(std::move(meta_row));
  }

  data.rows.resize(static_cast<Eigen::Index>(kept.size()),
                   static_cast<Eigen::Index>(data.column_names.size()));
  for (std::size_t i = 0; i < kept.size(); ++i) data.rows.row(static_cast<Eigen::Index>(i)) = kept[i];
  return data;
}

Dataset load_dataset(const std::string& path, const ModelSpec& spec, RangePolicy policy) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open dataset file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_dataset(buf.str(), spec, policy);
}

Dataset dataset_from_matrix(const Eigen::MatrixXd& values, const std::vector<std::string>& names) {
  if (static_cast<std::size_t>(values.cols()) != names.size())
    throw DataError("dataset_from_matrix: column count mismatch");
  Dataset data;
  data.column_names = names;
  data.rows = values;
  return data;
}

std::string emit_dataset_csv(const Dataset& data) {
  std::ostringstream out;
  out.precision(17);
  for (std::size_t j = 0; j < data.column_names.size(); ++j)
    out << (j ? "," : "") << data.column_names[j];
  for (const auto& name : data.meta_names) out << "," << name;
  out << "\n";
  for (Eigen::Index i = 0; i < data.rows.rows(); ++i) {
    for (Eigen::Index j = 0; j < data.rows.cols(); ++j) out << (j ? "," : "") << data.rows(i, j);
    if (!data.meta.empty())
      for (const auto& cell : data.meta[static_cast<std::size_t>(i)]) out << "," << cell;
    out << "\n";
  }
  return out.str();
}

ValidatedSample validate(const Dataset& dataset, const ModelSpec& spec) {
  spec.check();
  for (const auto& name : spec.all_indicators()) dataset.column_index(name);

  if (dataset.n() < 2) throw DataError("fewer than 2 rows after load");
  for (std::size_t j = 0; j < dataset.column_names.size(); ++j) {
    const auto col = dataset.rows.col(static_cast<Eigen::Index>(j));
    if ((col.array() == col(0)).all())
      throw DataError("constant estimation column: " + dataset.column_names[j]);
  }

  ValidatedSample sample;
  sample.dataset = dataset;
  sample.spec = spec;
  sample.n = dataset.n();
  sample.p = dataset.p();
  sample.adequacy = static_cast<double>(sample.n) / static_cast<double>(sample.p);
  if (sample.adequacy < 10.0)
    sample.warnings.push_back("subject-to-item ratio " + std::to_string(sample.adequacy) +
                              " is below the 10:1 guideline");
  return sample;
}

}  // namespace plspath
