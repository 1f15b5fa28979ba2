#include "sdoc/result_table.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

#include <nlohmann/json.hpp>

#include "sdoc/error.hpp"

namespace sdoc {

using nlohmann::json;

std::optional<double> ResultTable::row_average(const std::string& label) const {
  auto it = rows.find(label);
  if (it == rows.end() || it->second.empty()) return std::nullopt;
  double sum = 0.0;
  for (const auto& [task, value] : it->second) {
    sum += value;
  }
  return sum / static_cast<double>(it->second.size());
}

double round_one_decimal(double value) {
  return std::floor(value * 10.0 + 0.5) / 10.0;
}

std::string format_one_decimal(double value) {
  char buf[32];
  double rounded = round_one_decimal(value);
  if (rounded == 0.0) rounded = 0.0;  // normalize -0.0
  std::snprintf(buf, sizeof(buf), "%.1f", rounded);
  return buf;
}

std::string format_signed_delta(double value) {
  double rounded = round_one_decimal(value);
  if (rounded == 0.0) return "0.0";
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%+.1f", rounded);
  return buf;
}

void save_results(const std::filesystem::path& path, const ResultTable& table) {
  json rows = json::object();
  for (const auto& [label, cells] : table.rows) {
    json row = json::object();
    for (const auto& [task, value] : cells) {
      row[task_label(task)] = value;
    }
    rows[label] = std::move(row);
  }
  json doc{{"rows", rows}, {"manifests", table.manifests}};
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    raise(ErrorCode::IoError, "cannot write " + path.string());
  }
  out << doc.dump(2) << "\n";
}

ResultTable load_results(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    raise(ErrorCode::IoError, "cannot read " + path.string());
  }
  json doc = json::parse(in, nullptr, false);
  if (doc.is_discarded() || !doc.contains("rows")) {
    raise(ErrorCode::SchemaError, path.string() + ": not a results file");
  }
  ResultTable table;
  for (const auto& [label, row] : doc["rows"].items()) {
    for (const auto& [task_name, value] : row.items()) {
      table.rows[label][parse_task(task_name)] = value.get<double>();
    }
  }
  if (doc.contains("manifests")) {
    table.manifests = doc["manifests"].get<std::vector<std::string>>();
  }
  return table;
}

void write_results_csv(const std::filesystem::path& path, const ResultTable& table,
                       const std::string& row_header, bool signed_cells) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    raise(ErrorCode::IoError, "cannot write " + path.string());
  }
  out << row_header;
  for (Task task : all_tasks()) {
    out << "," << task_label(task);
  }
  out << ",Average\n";
  for (const auto& [label, cells] : table.rows) {
    out << label;
    for (Task task : all_tasks()) {
      out << ",";
      auto it = cells.find(task);
      if (it != cells.end()) {
        out << (signed_cells ? format_signed_delta(it->second) : format_one_decimal(it->second));
      }
    }
    out << ",";
    if (auto avg = table.row_average(label)) {
      out << (signed_cells ? format_signed_delta(*avg) : format_one_decimal(*avg));
    }
    out << "\n";
  }
}

}  // namespace sdoc
