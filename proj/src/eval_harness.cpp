#include "sdoc/eval_harness.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <random>
#include <sstream>

#include "sdoc/error.hpp"

namespace sdoc {

namespace {

std::vector<std::string> whitespace_tokens(const std::string& text) {
  std::vector<std::string> tokens;
  std::istringstream in(text);
  std::string token;
  while (in >> token) {
    tokens.push_back(token);
  }
  return tokens;
}

bool is_article(const std::string& token) {
  return token == "a" || token == "an" || token == "the";
}

size_t multiset_common(const std::vector<std::string>& a, const std::vector<std::string>& b) {
  std::map<std::string, size_t> counts;
  for (const auto& t : a) counts[t]++;
  size_t common = 0;
  for (const auto& t : b) {
    auto it = counts.find(t);
    if (it != counts.end() && it->second > 0) {
      it->second--;
      ++common;
    }
  }
  return common;
}

double f1_single(const std::vector<std::string>& pred, const std::vector<std::string>& gold) {
  if (pred.empty() && gold.empty()) return 1.0;
  if (pred.empty() || gold.empty()) return 0.0;
  const size_t common = multiset_common(gold, pred);
  if (common == 0) return 0.0;
  const double precision = static_cast<double>(common) / static_cast<double>(pred.size());
  const double recall = static_cast<double>(common) / static_cast<double>(gold.size());
  return 2.0 * precision * recall / (precision + recall);
}

double seeded_unit(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

size_t seeded_index(std::mt19937_64& rng, size_t n) {
  return std::min<size_t>(static_cast<size_t>(seeded_unit(rng) * static_cast<double>(n)), n - 1);
}

std::string csv_escape(const std::string& field) {
  if (field.find_first_of(",\"\n\r") == std::string::npos) {
    return field;
  }
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += "\"\"";
    else out.push_back(c);
  }
  out += "\"";
  return out;
}

}  // namespace

std::string normalize_answer(std::string_view text) {
  std::string lowered;
  lowered.reserve(text.size());
  for (unsigned char c : text) {
    if (std::ispunct(c)) continue;
    lowered.push_back(static_cast<char>(std::tolower(c)));
  }
  std::string out;
  for (const auto& token : whitespace_tokens(lowered)) {
    if (is_article(token)) continue;
    if (!out.empty()) out.push_back(' ');
    out += token;
  }
  return out;
}

int exact_match(const std::string& prediction, const std::vector<std::string>& golds) {
  if (golds.empty()) {
    raise(ErrorCode::InvalidArgument, "exact_match needs at least one gold answer");
  }
  const std::string pred = normalize_answer(prediction);
  for (const auto& gold : golds) {
    if (pred == normalize_answer(gold)) return 1;
  }
  return 0;
}

double token_f1(const std::string& prediction, const std::vector<std::string>& golds) {
  if (golds.empty()) {
    raise(ErrorCode::InvalidArgument, "token_f1 needs at least one gold answer");
  }
  const auto pred_tokens = whitespace_tokens(normalize_answer(prediction));
  double best = 0.0;
  for (const auto& gold : golds) {
    best = std::max(best, f1_single(pred_tokens, whitespace_tokens(normalize_answer(gold))));
  }
  return best;
}

FeverVerdict parse_fever(std::string_view prediction) {
  std::string first;
  for (unsigned char c : prediction) {
    if (std::isalnum(c)) {
      first.push_back(static_cast<char>(std::tolower(c)));
    } else if (!first.empty()) {
      break;
    }
  }
  if (first == "true") return FeverVerdict::Supports;
  if (first == "false") return FeverVerdict::Refutes;
  return FeverVerdict::Unparseable;
}

std::string parse_status_name(ParseStatus status) {
  switch (status) {
    case ParseStatus::Ok: return "ok";
    case ParseStatus::Unparseable: return "unparseable";
    case ParseStatus::GenerationFailed: return "generation_failed";
  }
  return "unknown";
}

EvalResult evaluate_run(const Dataset& dataset, const std::map<std::string, Answer>& answers) {
  std::vector<std::string> missing;
  for (const auto& [query, gold] : dataset.queries) {
    if (!answers.count(query.id)) {
      missing.push_back(query.id);
    }
  }
  if (!missing.empty()) {
    std::string list;
    for (const auto& id : missing) {
      if (!list.empty()) list += ", ";
      list += id;
    }
    raise(ErrorCode::MissingAnswers, "no answer for: " + list);
  }

  const Metric metric = metric_for(dataset.task);
  EvalResult result;
  for (const auto& [query, gold] : dataset.queries) {
    const Answer& answer = answers.at(query.id);
    PerQueryScore score;
    score.query_id = query.id;
    score.metric = metric;
    score.prediction = answer.text;
    if (answer.failed) {
      score.parse_status = ParseStatus::GenerationFailed;
      score.value = 0.0;
    } else if (dataset.task == Task::FactVerification) {
      const FeverVerdict verdict = parse_fever(answer.text);
      if (verdict == FeverVerdict::Unparseable) {
        score.parse_status = ParseStatus::Unparseable;
        score.value = 0.0;
      } else {
        const bool supports = verdict == FeverVerdict::Supports;
        const bool gold_supports = *gold.label == FeverLabel::Supports;
        score.value = supports == gold_supports ? 1.0 : 0.0;
      }
    } else if (metric == Metric::EM) {
      score.value = exact_match(answer.text, gold.answers);
    } else {
      score.value = token_f1(answer.text, gold.answers);
    }
    result.per_query.push_back(std::move(score));
  }

  std::sort(result.per_query.begin(), result.per_query.end(),
            [](const PerQueryScore& a, const PerQueryScore& b) { return a.query_id < b.query_id; });

  double sum = 0.0;
  for (const auto& score : result.per_query) {
    sum += score.value;
  }
  result.aggregate_percent =
      result.per_query.empty() ? 0.0 : 100.0 * sum / static_cast<double>(result.per_query.size());
  return result;
}

ResultTable aggregate_dimensions(const ResultTable& table) {
  std::vector<std::string> missing;
  for (SflType type : all_sfl_types()) {
    if (!table.rows.count(sfl_code(type))) {
      missing.push_back(sfl_code(type));
    }
  }
  if (!missing.empty()) {
    std::string list;
    for (const auto& code : missing) {
      if (!list.empty()) list += ", ";
      list += code;
    }
    raise(ErrorCode::MissingRows, "table lacks SFL rows: " + list);
  }

  struct DimensionRow {
    std::string label;
    std::vector<std::string> codes;
  };
  std::vector<DimensionRow> dimensions;
  for (auto value : {Ideational::FineGrain, Ideational::CoarseGrain}) {
    DimensionRow row{ideational_name(value), {}};
    for (SflType type : all_sfl_types()) {
      if (type.ideational == value) row.codes.push_back(sfl_code(type));
    }
    dimensions.push_back(std::move(row));
  }
  for (auto value : {Interpersonal::Authoritative, Interpersonal::Conversational}) {
    DimensionRow row{interpersonal_name(value), {}};
    for (SflType type : all_sfl_types()) {
      if (type.interpersonal == value) row.codes.push_back(sfl_code(type));
    }
    dimensions.push_back(std::move(row));
  }
  for (auto value : {Textual::Structured, Textual::Unstructured}) {
    DimensionRow row{textual_name(value), {}};
    for (SflType type : all_sfl_types()) {
      if (type.textual == value) row.codes.push_back(sfl_code(type));
    }
    dimensions.push_back(std::move(row));
  }

  ResultTable out;
  out.manifests = table.manifests;
  for (const auto& dim : dimensions) {
    for (Task task : all_tasks()) {
      double sum = 0.0;
      size_t count = 0;
      for (const auto& code : dim.codes) {
        const auto& cells = table.rows.at(code);
        auto it = cells.find(task);
        if (it == cells.end()) continue;
        sum += it->second;
        ++count;
      }
      if (count > 0) {
        out.rows[dim.label][task] = sum / static_cast<double>(count);
      }
    }
  }
  return out;
}

ResultTable delta_table(const ResultTable& current, const ResultTable& baseline) {
  auto keys_of = [](const ResultTable& t) {
    std::vector<std::string> keys;
    for (const auto& [label, cells] : t.rows) keys.push_back(label);
    return keys;
  };
  if (keys_of(current) != keys_of(baseline)) {
    raise(ErrorCode::KeyMismatch, "row labels differ between tables");
  }
  ResultTable out;
  out.manifests = current.manifests;
  for (const auto& [label, cells] : current.rows) {
    const auto& base_cells = baseline.rows.at(label);
    for (const auto& [task, value] : cells) {
      auto it = base_cells.find(task);
      if (it == base_cells.end()) {
        raise(ErrorCode::KeyMismatch,
              "row " + label + " lacks " + task_label(task) + " in the baseline");
      }
      out.rows[label][task] = value - it->second;
    }
    for (const auto& [task, value] : base_cells) {
      if (!cells.count(task)) {
        raise(ErrorCode::KeyMismatch,
              "row " + label + " lacks " + task_label(task) + " in the current table");
      }
    }
  }
  return out;
}

std::vector<AuditRow> audit_sample(const std::vector<Document>& docs, int per_type,
                                   std::uint64_t seed) {
  if (per_type < 1) {
    raise(ErrorCode::InvalidArgument, "per_type must be positive");
  }
  std::map<std::string, std::vector<const Document*>> by_type;
  for (const auto& doc : docs) {
    if (doc.doc_type.is_sfl()) {
      by_type[doc_type_code(doc.doc_type)].push_back(&doc);
    }
  }

  std::mt19937_64 rng(seed);
  std::vector<AuditRow> rows;
  for (SflType type : all_sfl_types()) {
    const std::string code = sfl_code(type);
    auto it = by_type.find(code);
    const size_t have = it == by_type.end() ? 0 : it->second.size();
    if (have < static_cast<size_t>(per_type)) {
      raise(ErrorCode::InsufficientDocs, "type " + code + " has " + std::to_string(have) +
                                             " documents, need " + std::to_string(per_type));
    }
    auto& pool = it->second;
    // deterministic base order before the seeded draw
    std::sort(pool.begin(), pool.end(),
              [](const Document* a, const Document* b) { return a->id < b->id; });
    for (int j = 0; j < per_type; ++j) {
      const size_t pick = j + seeded_index(rng, pool.size() - j);
      std::swap(pool[j], pool[pick]);
      rows.push_back(AuditRow{pool[j]->id, code, pool[j]->text});
    }
  }
  return rows;
}

void write_audit_csv(const std::filesystem::path& path, const std::vector<AuditRow>& rows) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    raise(ErrorCode::IoError, "cannot write " + path.string());
  }
  out << "doc_id,type_code,text,interpersonal_ok,ideational_ok,textual_ok\n";
  for (const auto& row : rows) {
    out << csv_escape(row.doc_id) << "," << row.type_code << "," << csv_escape(row.text)
        << ",,,\n";
  }
}

}  // namespace sdoc
