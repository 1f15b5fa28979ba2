#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "sdoc/core.hpp"

namespace sdoc {

// A report table shaped like the performance tables: one row per document
// type or condition, one column per task, plus a derived Average column.
// Cells hold full-precision percents; rounding happens only at export.
struct ResultTable {
  // row label (e.g. "AFU", "WIKI") -> task -> percent in [0, 100]
  std::map<std::string, std::map<Task, double>> rows;
  std::vector<std::string> manifests;

  // Unweighted mean of the row's task cells; empty row -> nullopt.
  std::optional<double> row_average(const std::string& label) const;
};

// Half-up rounding to one decimal, the display convention for every
// exported cell.
double round_one_decimal(double value);
// "57.3", "-0.1"; always one digit after the point.
std::string format_one_decimal(double value);
// "+1.0" / "-0.1" / "0.0" for delta cells.
std::string format_signed_delta(double value);

// Lossless JSON round trip of the table.
void save_results(const std::filesystem::path& path, const ResultTable& table);
ResultTable load_results(const std::filesystem::path& path);

// CSV mirrors the table layout with display-rounded cells. When signed is
// true cells carry an explicit sign (delta tables).
void write_results_csv(const std::filesystem::path& path, const ResultTable& table,
                       const std::string& row_header = "Type", bool signed_cells = false);

}  // namespace sdoc
