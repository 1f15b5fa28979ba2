#include "sdoc/dataset_io.hpp"

#include <cctype>
#include <fstream>
#include <set>
#include <sstream>

#include "sdoc/digest.hpp"
#include "sdoc/error.hpp"

namespace sdoc {

using nlohmann::json;

namespace {

[[noreturn]] void schema_error(size_t line_no, const std::string& detail) {
  raise(ErrorCode::SchemaError, "line " + std::to_string(line_no) + ": " + detail);
}

GoldAnswer parse_gold(const json& record, Task task, size_t line_no) {
  if (task == Task::FactVerification) {
    if (!record.contains("label") || !record["label"].is_string()) {
      schema_error(line_no, "fact verification record needs a string 'label'");
    }
    return GoldAnswer::of_label(parse_fever_label(record["label"].get<std::string>()));
  }
  if (!record.contains("answers") || !record["answers"].is_array() || record["answers"].empty()) {
    schema_error(line_no, "record needs a non-empty 'answers' array");
  }
  std::vector<std::string> answers;
  for (const auto& a : record["answers"]) {
    if (!a.is_string()) {
      schema_error(line_no, "'answers' entries must be strings");
    }
    answers.push_back(a.get<std::string>());
  }
  return GoldAnswer::of_answers(std::move(answers));
}

std::vector<Document> parse_retrievals(const json& record, const std::string& query_id,
                                       size_t line_no) {
  std::vector<Document> docs;
  if (!record.contains("retrieved")) return docs;
  if (!record["retrieved"].is_array()) {
    schema_error(line_no, "'retrieved' must be an array");
  }
  int expected_rank = 1;
  for (const auto& entry : record["retrieved"]) {
    if (!entry.contains("rank") || !entry["rank"].is_number_integer()) {
      schema_error(line_no, "retrieved entry needs an integer 'rank'");
    }
    const int rank = entry["rank"].get<int>();
    if (rank != expected_rank) {
      schema_error(line_no, "retrieval ranks must be contiguous from 1; saw " +
                                std::to_string(rank) + " where " +
                                std::to_string(expected_rank) + " was expected");
    }
    ++expected_rank;
    if (!entry.contains("text") || !entry["text"].is_string() ||
        entry["text"].get<std::string>().empty()) {
      schema_error(line_no, "retrieved entry needs non-empty 'text'");
    }
    Document doc;
    doc.id = query_id + "#wiki" + std::to_string(rank);
    doc.text = entry["text"].get<std::string>();
    doc.doc_type = DocType::wiki();
    doc.source = DocSource::Retrieved;
    doc.rank = rank;
    docs.push_back(std::move(doc));
  }
  return docs;
}

}  // namespace

const std::vector<Document>* Dataset::retrieved_for(const std::string& query_id) const {
  auto it = retrievals.find(query_id);
  return it == retrievals.end() ? nullptr : &it->second;
}

Dataset load_dataset(const std::filesystem::path& path, Task task, std::optional<size_t> limit) {
  std::ifstream in(path);
  if (!in) {
    raise(ErrorCode::IoError, "cannot read dataset " + path.string());
  }

  Dataset dataset;
  dataset.task = task;
  std::set<std::string> seen_ids;
  std::string digest_input;

  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    if (limit && dataset.queries.size() >= *limit) break;

    json record = json::parse(line, nullptr, false);
    if (record.is_discarded()) {
      schema_error(line_no, "not valid JSON");
    }
    if (!record.contains("id") || !record["id"].is_string() ||
        record["id"].get<std::string>().empty()) {
      schema_error(line_no, "record needs a non-empty string 'id'");
    }
    const std::string id = record["id"].get<std::string>();
    if (!seen_ids.insert(id).second) {
      raise(ErrorCode::DuplicateId, "line " + std::to_string(line_no) + ": duplicate id '" + id + "'");
    }
    if (!record.contains("question") || !record["question"].is_string() ||
        record["question"].get<std::string>().empty()) {
      schema_error(line_no, "record needs a non-empty string 'question'");
    }

    Query query;
    query.id = id;
    query.text = record["question"].get<std::string>();
    query.task = task;
    GoldAnswer gold = parse_gold(record, task, line_no);
    auto retrieved = parse_retrievals(record, id, line_no);
    if (!retrieved.empty()) {
      dataset.retrievals.emplace(id, std::move(retrieved));
    }
    dataset.queries.emplace_back(std::move(query), std::move(gold));

    digest_input += line;
    digest_input.push_back('\n');
  }

  dataset.content_digest = sha256_hex(digest_input);
  return dataset;
}

void RunManifest::set(const std::string& key, const std::string& value) { fields_[key] = value; }
void RunManifest::set(const std::string& key, long value) { fields_[key] = value; }
void RunManifest::set(const std::string& key, double value) { fields_[key] = value; }

std::string RunManifest::id() const {
  json canonical(fields_);
  return sha256_hex(canonical.dump());
}

json RunManifest::to_json() const {
  json doc(fields_);
  doc["manifest_id"] = id();
  return doc;
}

void RunManifest::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    raise(ErrorCode::IoError, "cannot write manifest " + path.string());
  }
  out << to_json().dump(2) << "\n";
}

RunManifest RunManifest::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    raise(ErrorCode::IoError, "cannot read manifest " + path.string());
  }
  json doc = json::parse(in, nullptr, false);
  if (doc.is_discarded() || !doc.is_object()) {
    raise(ErrorCode::SchemaError, path.string() + ": not a manifest");
  }
  RunManifest manifest;
  for (const auto& [key, value] : doc.items()) {
    if (key == "manifest_id") continue;
    manifest.fields_[key] = value;
  }
  return manifest;
}

json document_to_json(const Document& document) {
  json record{{"id", document.id},
              {"text", document.text},
              {"doc_type", doc_type_code(document.doc_type)},
              {"source", doc_source_name(document.source)}};
  if (document.origin_query_id) record["origin_query_id"] = *document.origin_query_id;
  if (document.replicate_index) record["replicate_index"] = *document.replicate_index;
  if (document.rank) record["rank"] = *document.rank;
  return record;
}

Document document_from_json(const json& record) {
  Document doc;
  doc.id = record.at("id").get<std::string>();
  doc.text = record.at("text").get<std::string>();
  doc.doc_type = parse_doc_type_code(record.at("doc_type").get<std::string>());
  doc.source = parse_doc_source(record.at("source").get<std::string>());
  if (record.contains("origin_query_id")) {
    doc.origin_query_id = record["origin_query_id"].get<std::string>();
  }
  if (record.contains("replicate_index")) {
    doc.replicate_index = record["replicate_index"].get<int>();
  }
  if (record.contains("rank")) {
    doc.rank = record["rank"].get<int>();
  }
  if (doc.text.empty()) {
    raise(ErrorCode::SchemaError, "document " + doc.id + " has empty text");
  }
  if (doc.source == DocSource::Retrieved && !doc.rank) {
    raise(ErrorCode::SchemaError, "retrieved document " + doc.id + " has no rank");
  }
  if (doc.source == DocSource::SelfGenerated &&
      (!doc.origin_query_id || !doc.replicate_index.has_value())) {
    raise(ErrorCode::SchemaError,
          "self-generated document " + doc.id + " needs origin_query_id and replicate_index");
  }
  return doc;
}

std::string filename_safe(const std::string& id) {
  static const char* hex = "0123456789ABCDEF";
  std::string out;
  out.reserve(id.size());
  for (unsigned char c : id) {
    if (std::isalnum(c) || c == '.' || c == '_' || c == '-') {
      out.push_back(static_cast<char>(c));
    } else {
      out.push_back('%');
      out.push_back(hex[c >> 4]);
      out.push_back(hex[c & 0x0f]);
    }
  }
  return out;
}

}  // namespace sdoc

