#include "sdoc/core.hpp"

#include <algorithm>
#include <cctype>

#include "sdoc/digest.hpp"
#include "sdoc/error.hpp"

namespace sdoc {

namespace {

std::string to_upper(std::string_view text) {
  std::string out(text);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
  return out;
}

std::string to_lower(std::string_view text) {
  std::string out(text);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

}  // namespace

Metric metric_for(Task task) {
  switch (task) {
    case Task::OpenDomainQA: return Metric::EM;
    case Task::MultiHopQA: return Metric::F1;
    case Task::FactVerification: return Metric::EM;
    case Task::LongFormQA: return Metric::F1;
  }
  raise(ErrorCode::InvalidArgument, "unknown task");
}

std::string task_token(Task task) {
  switch (task) {
    case Task::OpenDomainQA: return "opendomainqa";
    case Task::MultiHopQA: return "multihopqa";
    case Task::FactVerification: return "factverification";
    case Task::LongFormQA: return "longformqa";
  }
  raise(ErrorCode::InvalidArgument, "unknown task");
}

std::string task_label(Task task) {
  switch (task) {
    case Task::OpenDomainQA: return "TQA";
    case Task::MultiHopQA: return "HotpotQA";
    case Task::FactVerification: return "FEVER";
    case Task::LongFormQA: return "ELI5";
  }
  raise(ErrorCode::InvalidArgument, "unknown task");
}

Task parse_task(std::string_view text) {
  const std::string t = to_lower(text);
  if (t == "opendomainqa" || t == "tqa" || t == "triviaqa") return Task::OpenDomainQA;
  if (t == "multihopqa" || t == "hotpotqa") return Task::MultiHopQA;
  if (t == "factverification" || t == "fever") return Task::FactVerification;
  if (t == "longformqa" || t == "eli5") return Task::LongFormQA;
  raise(ErrorCode::UnknownCode, "unknown task '" + std::string(text) + "'");
}

std::string interpersonal_name(Interpersonal v) {
  return v == Interpersonal::Authoritative ? "Authoritative" : "Conversational";
}

std::string ideational_name(Ideational v) {
  return v == Ideational::FineGrain ? "Fine-Grain" : "Coarse-Grain";
}

std::string textual_name(Textual v) {
  return v == Textual::Structured ? "Structured" : "Unstructured";
}

std::array<SflType, 8> all_sfl_types() {
  std::array<SflType, 8> out{};
  size_t i = 0;
  for (auto inter : {Interpersonal::Authoritative, Interpersonal::Conversational}) {
    for (auto idea : {Ideational::FineGrain, Ideational::CoarseGrain}) {
      for (auto text : {Textual::Structured, Textual::Unstructured}) {
        out[i++] = SflType{inter, idea, text};
      }
    }
  }
  return out;
}

std::string sfl_code(SflType type) {
  std::string code;
  code.push_back(type.interpersonal == Interpersonal::Authoritative ? 'A' : 'C');
  code.push_back(type.ideational == Ideational::FineGrain ? 'F' : 'C');
  code.push_back(type.textual == Textual::Structured ? 'S' : 'U');
  return code;
}

SflType parse_sfl_code(std::string_view code) {
  const std::string c = to_upper(code);
  if (c.size() != 3) {
    raise(ErrorCode::UnknownCode, "'" + std::string(code) + "' is not an SFL type code");
  }
  SflType type{};
  if (c[0] == 'A') {
    type.interpersonal = Interpersonal::Authoritative;
  } else if (c[0] == 'C') {
    type.interpersonal = Interpersonal::Conversational;
  } else {
    raise(ErrorCode::UnknownCode, "'" + std::string(code) + "' is not an SFL type code");
  }
  if (c[1] == 'F') {
    type.ideational = Ideational::FineGrain;
  } else if (c[1] == 'C') {
    type.ideational = Ideational::CoarseGrain;
  } else {
    raise(ErrorCode::UnknownCode, "'" + std::string(code) + "' is not an SFL type code");
  }
  if (c[2] == 'S') {
    type.textual = Textual::Structured;
  } else if (c[2] == 'U') {
    type.textual = Textual::Unstructured;
  } else {
    raise(ErrorCode::UnknownCode, "'" + std::string(code) + "' is not an SFL type code");
  }
  return type;
}

std::string doc_type_code(const DocType& type) {
  switch (type.kind) {
    case DocType::Kind::Sfl: return sfl_code(*type.style);
    case DocType::Kind::Wiki: return "WIKI";
    case DocType::Kind::GenRead: return "GENREAD";
  }
  raise(ErrorCode::InvalidArgument, "unknown doc type");
}

DocType parse_doc_type_code(std::string_view code) {
  const std::string c = to_upper(code);
  if (c == "WIKI") return DocType::wiki();
  if (c == "GENREAD") return DocType::genread();
  return DocType::sfl(parse_sfl_code(c));
}

std::string doc_source_name(DocSource source) {
  switch (source) {
    case DocSource::Retrieved: return "retrieved";
    case DocSource::SelfGenerated: return "self_generated";
    case DocSource::StyleTransformed: return "style_transformed";
  }
  raise(ErrorCode::InvalidArgument, "unknown doc source");
}

DocSource parse_doc_source(std::string_view name) {
  const std::string n = to_lower(name);
  if (n == "retrieved") return DocSource::Retrieved;
  if (n == "self_generated") return DocSource::SelfGenerated;
  if (n == "style_transformed") return DocSource::StyleTransformed;
  raise(ErrorCode::UnknownCode, "unknown doc source '" + std::string(name) + "'");
}

std::string self_doc_id(const std::string& origin_query_id, const DocType& doc_type,
                        int replicate_index, const std::string& manifest_id) {
  return digest_fields({std::string_view(origin_query_id), std::string_view(doc_type_code(doc_type)),
                        std::string_view(std::to_string(replicate_index)),
                        std::string_view(manifest_id)});
}

std::string fever_label_name(FeverLabel label) {
  return label == FeverLabel::Supports ? "SUPPORTS" : "REFUTES";
}

FeverLabel parse_fever_label(std::string_view name) {
  const std::string n = to_upper(name);
  if (n == "SUPPORTS") return FeverLabel::Supports;
  if (n == "REFUTES") return FeverLabel::Refutes;
  raise(ErrorCode::BadLabel, "fever label must be SUPPORTS or REFUTES, got '" + std::string(name) + "'");
}

GoldAnswer GoldAnswer::of_answers(std::vector<std::string> answers) {
  if (answers.empty()) {
    raise(ErrorCode::InvalidArgument, "gold answer list must be non-empty");
  }
  GoldAnswer gold;
  gold.answers = std::move(answers);
  return gold;
}

GoldAnswer GoldAnswer::of_label(FeverLabel label) {
  GoldAnswer gold;
  gold.label = label;
  return gold;
}

}  // namespace sdoc
