#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "sdoc/core.hpp"

namespace sdoc {

// A loaded query set with gold answers and optional ranked retrievals.
// Immutable once loaded; ordering follows the file.
struct Dataset {
  Task task = Task::OpenDomainQA;
  std::vector<std::pair<Query, GoldAnswer>> queries;
  std::map<std::string, std::vector<Document>> retrievals;  // query id -> rank order
  std::string content_digest;

  const std::vector<Document>* retrieved_for(const std::string& query_id) const;
};

// Parses a JSONL dataset with one record per line:
//   {"id": ..., "question": ..., "answers": [...] | "label": ...,
//    "retrieved": [{"rank": 1, "text": ..., "title"?: ...}, ...]}
// Records beyond `limit` (default 500) are ignored; file order is kept.
Dataset load_dataset(const std::filesystem::path& path, Task task,
                     std::optional<size_t> limit = 500);

// Everything that determines a run's outputs, digested into a stable id.
// Field values go in as strings; insertion order is canonicalized.
class RunManifest {
 public:
  void set(const std::string& key, const std::string& value);
  void set(const std::string& key, long value);
  void set(const std::string& key, double value);

  // Pure function of the recorded fields.
  std::string id() const;
  nlohmann::json to_json() const;  // fields plus "manifest_id"
  void save(const std::filesystem::path& path) const;
  static RunManifest load(const std::filesystem::path& path);

  const std::map<std::string, nlohmann::json>& fields() const { return fields_; }

 private:
  std::map<std::string, nlohmann::json> fields_;
};

// Document <-> JSON for stores and fixtures. Serialization is canonical:
// parse followed by dump is byte-stable.
nlohmann::json document_to_json(const Document& document);
Document document_from_json(const nlohmann::json& record);

// Percent-encodes anything outside [A-Za-z0-9._-] so ids can be used in
// file names.
std::string filename_safe(const std::string& id);

}  // namespace sdoc
