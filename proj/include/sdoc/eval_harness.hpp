#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "sdoc/core.hpp"
#include "sdoc/dataset_io.hpp"
#include "sdoc/result_table.hpp"

namespace sdoc {

// SQuAD-style answer normalization: lowercase, strip punctuation, drop the
// articles "a"/"an"/"the" as whole tokens, collapse whitespace. ASCII rules;
// other bytes pass through untouched.
std::string normalize_answer(std::string_view text);

// 1 iff the normalized prediction equals any normalized gold.
int exact_match(const std::string& prediction, const std::vector<std::string>& golds);

// Token-level F1 against each gold, max over golds. Both-empty token lists
// score 1, disjoint ones 0.
double token_f1(const std::string& prediction, const std::vector<std::string>& golds);

enum class FeverVerdict { Supports, Refutes, Unparseable };

// Leading token "true" -> Supports, "false" -> Refutes after stripping
// punctuation and case, anything else Unparseable.
FeverVerdict parse_fever(std::string_view prediction);

enum class ParseStatus { Ok, Unparseable, GenerationFailed };

std::string parse_status_name(ParseStatus status);

struct PerQueryScore {
  std::string query_id;
  Metric metric = Metric::EM;
  double value = 0.0;  // in [0, 1]
  std::string prediction;
  ParseStatus parse_status = ParseStatus::Ok;
};

// One prediction per query; absent text with failed=true marks a generation
// failure, which scores 0 but keeps the denominator fixed. truncated
// records that the background was cut to the character budget.
struct Answer {
  std::string text;
  bool failed = false;
  std::string error;
  bool truncated = false;
};

struct EvalResult {
  std::vector<PerQueryScore> per_query;  // ordered by query id
  double aggregate_percent = 0.0;        // 100 * mean, full precision
};

// Scores every dataset query with the task's metric. Queries without an
// answer entry raise MissingAnswers listing the absent ids.
EvalResult evaluate_run(const Dataset& dataset, const std::map<std::string, Answer>& answers);

// Collapses the 8 SFL rows of a table into the 6 axis-value rows
// (Fine-Grain, Coarse-Grain, Authoritative, Conversational, Structured,
// Unstructured), each the unweighted mean of the 4 rows carrying that
// value. Wiki/GenRead rows are ignored; missing SFL rows raise MissingRows.
ResultTable aggregate_dimensions(const ResultTable& table);

// current - baseline per cell; row/column sets must match exactly.
ResultTable delta_table(const ResultTable& current, const ResultTable& baseline);

struct AuditRow {
  std::string doc_id;
  std::string type_code;
  std::string text;
};

// Seeded uniform sample of per_type documents for each of the 8 SFL types,
// in canonical type order. Documents are keyed deterministically before
// sampling, so equal seeds give equal samples.
std::vector<AuditRow> audit_sample(const std::vector<Document>& docs, int per_type,
                                   std::uint64_t seed);

// Reviewer CSV with blank judgement columns:
// doc_id,type_code,text,interpersonal_ok,ideational_ok,textual_ok
void write_audit_csv(const std::filesystem::path& path, const std::vector<AuditRow>& rows);

}  // namespace sdoc
