#pragma once

#include <array>
#include <string>

#include "sdoc/result_table.hpp"

namespace sdoc::test {

// Published benchmark matrices used as report fixtures. Column order:
// TQA, HotpotQA, FEVER, ELI5; avg is the table's printed Average cell.

struct TypedRow {
  const char* code;
  std::array<double, 4> cells;
  double avg;
};

// Per-type self-doc results (the baseline table).
inline constexpr std::array<TypedRow, 8> kTypedResults = {{
    {"AFS", {55.4, 37.5, 83.4, 20.9}, 49.3},
    {"AFU", {58.4, 39.9, 85.2, 22.8}, 51.6},
    {"ACS", {56.8, 38.7, 83.6, 22.0}, 50.3},
    {"ACU", {56.4, 39.6, 85.0, 23.5}, 51.1},
    {"CFS", {57.4, 36.4, 81.8, 24.0}, 49.9},
    {"CFU", {57.8, 39.5, 84.2, 25.1}, 51.6},
    {"CCS", {56.0, 35.2, 82.0, 25.4}, 49.6},
    {"CCU", {56.6, 38.7, 83.8, 26.4}, 51.4},
}};

inline constexpr TypedRow kWikiRow = {"WIKI", {52.6, 36.3, 66.8, 26.7}, 45.6};

// Printed dimension aggregation of the table above.
struct DimensionRow {
  const char* label;
  std::array<double, 4> cells;
  double avg;
};

inline constexpr std::array<DimensionRow, 6> kDimensionResults = {{
    {"Fine-Grain", {57.3, 38.3, 84.3, 23.2}, 50.8},
    {"Coarse-Grain", {56.4, 38.1, 84.0, 24.3}, 50.7},
    {"Authoritative", {56.8, 38.9, 84.8, 22.3}, 50.7},
    {"Conversational", {57.0, 37.5, 83.6, 25.2}, 50.8},
    {"Structured", {56.4, 37.0, 83.1, 23.1}, 49.9},
    {"Unstructured", {57.3, 39.4, 85.2, 24.5}, 51.6},
}};

// Mixing results with their printed deltas against the baseline table.
struct MixRow {
  const char* strategy;  // "direct" | "style"
  const char* code;
  std::array<double, 4> cells;
  double avg;
  std::array<double, 4> deltas;
  double avg_delta;
};

inline constexpr std::array<MixRow, 6> kMixResults = {{
    {"direct", "AFU", {56.8, 41.0, 84.4, 23.1}, 51.3, {-1.6, 1.1, -0.8, 0.3}, -0.3},
    {"direct", "CFU", {57.2, 41.6, 85.0, 25.6}, 52.4, {-0.6, 2.1, 0.8, 0.5}, 0.8},
    {"direct", "CCU", {57.4, 41.8, 85.8, 26.5}, 52.9, {0.8, 3.1, 2.0, 0.1}, 1.5},
    {"style", "AFU", {59.4, 43.3, 87.6, 22.7}, 53.3, {1.0, 3.4, 2.4, -0.1}, 1.7},
    {"style", "CFU", {58.0, 41.0, 86.4, 25.3}, 52.7, {0.2, 1.5, 2.2, 0.2}, 1.1},
    {"style", "CCU", {57.6, 43.0, 87.4, 26.3}, 53.6, {1.0, 4.3, 3.6, -0.1}, 2.2},
}};

inline ResultTable typed_results_table(bool with_wiki = false) {
  ResultTable table;
  const auto tasks = all_tasks();
  for (const auto& row : kTypedResults) {
    for (size_t t = 0; t < tasks.size(); ++t) {
      table.rows[row.code][tasks[t]] = row.cells[t];
    }
  }
  if (with_wiki) {
    for (size_t t = 0; t < tasks.size(); ++t) {
      table.rows[kWikiRow.code][tasks[t]] = kWikiRow.cells[t];
    }
  }
  return table;
}

inline ResultTable mix_results_table(const std::string& strategy) {
  ResultTable table;
  const auto tasks = all_tasks();
  for (const auto& row : kMixResults) {
    if (strategy != row.strategy) continue;
    for (size_t t = 0; t < tasks.size(); ++t) {
      table.rows[row.code][tasks[t]] = row.cells[t];
    }
  }
  return table;
}

// Baseline restricted to the rows present in the mix table.
inline ResultTable typed_results_subset(const std::string& strategy) {
  const ResultTable full = typed_results_table();
  ResultTable subset;
  for (const auto& row : kMixResults) {
    if (strategy != row.strategy) continue;
    subset.rows[row.code] = full.rows.at(row.code);
  }
  return subset;
}

}  // namespace sdoc::test
