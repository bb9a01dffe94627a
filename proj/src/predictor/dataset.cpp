#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>

#include <fmt/format.h>

#include "lorecast/csv.hpp"
#include "lorecast/predictor/model.hpp"

namespace lorecast::predictor {

using Code = PredictorError::Code;

Dataset read_dataset_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw PredictorError(Code::EmptyDataset, "dataset file is empty");
  const auto header = csv::split(line);
  const auto names = features::feature_names();

  std::size_t offset = 0;
  if (!header.empty() && header.front() == "design") offset = 1;
  const std::size_t expected = offset + names.size() + 2;
  bool ok = header.size() == expected && header[expected - 2] == "power_uW" &&
            header[expected - 1] == "tns_ns";
  for (std::size_t i = 0; ok && i < names.size(); ++i) ok = header[offset + i] == names[i];
  if (!ok)
    throw PredictorError(Code::SchemaMismatch,
                         "dataset header does not match the feature schema (expected [design,]" +
                             features::csv_header().substr(sizeof("schema_version")) +
                             ",power_uW,tns_ns)");

  Dataset data;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    const auto cells = csv::split(line);
    if (cells.size() != expected)
      throw PredictorError(Code::SchemaMismatch,
                           fmt::format("line {}: {} cells, expected {}", lineno, cells.size(), expected));
    DataRow row;
    if (offset) row.design = std::string(cells[0]);
    try {
      for (std::size_t i = 0; i < names.size(); ++i)
        row.features.values.push_back(csv::parse_number(cells[offset + i]));
      row.features.validate();
      row.power_uW = csv::parse_number(cells[expected - 2]);
      row.tns_ns = std::fabs(csv::parse_number(cells[expected - 1]));
    } catch (const std::invalid_argument& e) {
      throw PredictorError(Code::SchemaMismatch, fmt::format("line {}: {}", lineno, e.what()));
    }
    if (!std::isfinite(row.power_uW) || !std::isfinite(row.tns_ns))
      throw PredictorError(Code::NonFiniteTarget, fmt::format("line {}: non-finite target", lineno));
    data.rows.push_back(std::move(row));
  }
  return data;
}

Dataset load_dataset(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw PredictorError(Code::Io, fmt::format("cannot read {}", path.string()));
  return read_dataset_csv(in);
}

void write_dataset_csv(std::ostream& out, const Dataset& data) {
  out << "design";
  for (auto n : features::feature_names()) out << ',' << n;
  out << ",power_uW,tns_ns\n";
  for (const auto& row : data.rows) {
    out << row.design;
    for (double v : row.features.values) out << fmt::format(",{}", v);
    out << fmt::format(",{},{}\n", row.power_uW, row.tns_ns);
  }
}

void save_dataset(const Dataset& data, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw PredictorError(Code::Io, fmt::format("cannot write {}", path.string()));
  write_dataset_csv(out, data);
}

}  // namespace lorecast::predictor
