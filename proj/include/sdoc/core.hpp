#pragma once

#include <array>
#include <compare>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace sdoc {

// ---------------------------------------------------------------------------
// Tasks
// ---------------------------------------------------------------------------

enum class Task {
  OpenDomainQA,
  MultiHopQA,
  FactVerification,
  LongFormQA,
};

enum class Metric { EM, F1 };

constexpr std::array<Task, 4> all_tasks() {
  return {Task::OpenDomainQA, Task::MultiHopQA, Task::FactVerification, Task::LongFormQA};
}

// Each task is scored by exactly one metric.
Metric metric_for(Task task);

// Stable token used in file names and config values, e.g. "opendomainqa".
std::string task_token(Task task);
// Column label used in result tables, e.g. "TQA".
std::string task_label(Task task);
// Accepts task tokens and table labels, case-insensitive ("tqa", "hotpotqa", ...).
Task parse_task(std::string_view text);

// ---------------------------------------------------------------------------
// SFL document taxonomy: three binary axes, eight types
// ---------------------------------------------------------------------------

enum class Interpersonal { Authoritative, Conversational };
enum class Ideational { FineGrain, CoarseGrain };
enum class Textual { Structured, Unstructured };

struct SflType {
  Interpersonal interpersonal;
  Ideational ideational;
  Textual textual;

  auto operator<=>(const SflType&) const = default;
};

// Axis value names as they appear in reports ("Authoritative", "Fine-Grain", ...).
std::string interpersonal_name(Interpersonal v);
std::string ideational_name(Ideational v);
std::string textual_name(Textual v);

// The eight types in canonical order: AFS, AFU, ACS, ACU, CFS, CFU, CCS, CCU.
std::array<SflType, 8> all_sfl_types();

// Three-letter code from axis initials in order interpersonal, ideational,
// textual, e.g. (Authoritative, FineGrain, Structured) -> "AFS".
std::string sfl_code(SflType type);

// Inverse of sfl_code, case-insensitive. Throws UnknownCode for anything
// outside the eight codes (including "WIKI").
SflType parse_sfl_code(std::string_view code);

// ---------------------------------------------------------------------------
// Document types and documents
// ---------------------------------------------------------------------------

// A document is either one of the eight typed kinds, a retrieved wiki
// passage, or an untyped generated background document. Wiki carries no
// SFL axes: its granularity is not fixed, so it is a distinct variant
// rather than a ninth axis combination.
struct DocType {
  enum class Kind { Sfl, Wiki, GenRead };

  Kind kind = Kind::GenRead;
  std::optional<SflType> style;  // set iff kind == Sfl

  static DocType sfl(SflType type) { return DocType{Kind::Sfl, type}; }
  static DocType wiki() { return DocType{Kind::Wiki, std::nullopt}; }
  static DocType genread() { return DocType{Kind::GenRead, std::nullopt}; }

  bool is_sfl() const { return kind == Kind::Sfl; }

  auto operator<=>(const DocType&) const = default;
};

// "AFS".."CCU", "WIKI", or "GENREAD".
std::string doc_type_code(const DocType& type);
// Inverse of doc_type_code, case-insensitive.
DocType parse_doc_type_code(std::string_view code);

enum class DocSource { Retrieved, SelfGenerated, StyleTransformed };

std::string doc_source_name(DocSource source);
DocSource parse_doc_source(std::string_view name);

struct Document {
  std::string id;
  std::string text;
  DocType doc_type;
  DocSource source = DocSource::Retrieved;
  std::optional<std::string> origin_query_id;  // self-generated / transformed
  std::optional<int> replicate_index;          // self-generated
  std::optional<int> rank;                     // retrieved only, 1-based

  bool operator==(const Document&) const = default;
};

// Stable id for a self-generated document: a digest over the fields that
// identify it within a run, so repeated sampling hits the same cache key.
std::string self_doc_id(const std::string& origin_query_id, const DocType& doc_type,
                        int replicate_index, const std::string& manifest_id);

// ---------------------------------------------------------------------------
// Queries and gold answers
// ---------------------------------------------------------------------------

struct Query {
  std::string id;
  std::string text;
  Task task = Task::OpenDomainQA;

  bool operator==(const Query&) const = default;
};

enum class FeverLabel { Supports, Refutes };

std::string fever_label_name(FeverLabel label);
FeverLabel parse_fever_label(std::string_view name);  // "SUPPORTS" / "REFUTES"

// QA tasks carry one or more acceptable answer strings; fact verification
// carries exactly one label.
struct GoldAnswer {
  std::vector<std::string> answers;
  std::optional<FeverLabel> label;

  static GoldAnswer of_answers(std::vector<std::string> answers);
  static GoldAnswer of_label(FeverLabel label);

  bool operator==(const GoldAnswer&) const = default;
};

}  // namespace sdoc
