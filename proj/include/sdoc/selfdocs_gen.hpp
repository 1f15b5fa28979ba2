#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "sdoc/core.hpp"
#include "sdoc/dataset_io.hpp"
#include "sdoc/embed_cluster.hpp"
#include "sdoc/llm_gateway.hpp"
#include "sdoc/prompt_kit.hpp"

namespace sdoc {

enum class GenerationMode { GenReadFewShot, TypedZeroShot };

std::string generation_mode_name(GenerationMode mode);
GenerationMode parse_generation_mode(std::string_view name);

struct GenerationConfig {
  int n_docs = 10;
  double temperature = 0.95;
  std::optional<SflType> style;  // required for TypedZeroShot
  GenerationMode mode = GenerationMode::GenReadFewShot;
  int k_clusters = 10;
  int m_shots = 5;
  std::uint64_t seed = 0;
  std::string model_id = "qwen2.5-32b-instruct";
  std::string embed_model_id = "bge-large-en-v1.5";
  std::string transform_model_id = "gpt-4o";
  int max_tokens = 1024;
  double failure_threshold = 0.05;
  int parallelism = 8;
};

// In GenReadFewShot mode each replicate draws on one cluster's shot list,
// so n_docs cannot exceed k_clusters.
void validate_generation_config(const GenerationConfig& config);

// Manifest covering the generation-relevant fields plus the dataset and
// template digests.
RunManifest generation_manifest(const GenerationConfig& config, const std::string& dataset_digest,
                                Task task, const std::string& template_digest);

// ---------------------------------------------------------------------------
// Shot pool construction
// ---------------------------------------------------------------------------

// Embeds every (query, top-1 document) pair, clusters them into k_clusters
// groups, and samples m_shots exemplars per group.
ShotPool build_shot_pool(const std::vector<std::pair<Query, Document>>& shot_queries,
                         const GenerationConfig& config, LlmGateway& gateway);

// Rewrites every shot document into the target style at temperature 0.
// Fails the whole pool on any backend error; an already-aligned pool is an
// error.
ShotPool style_align_shots(const ShotPool& pool, SflType style, Task task,
                           const PromptLibrary& prompts, LlmGateway& gateway,
                           const GenerationConfig& config);

void save_shot_pool(const std::filesystem::path& path, const ShotPool& pool);
ShotPool load_shot_pool(const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// Document store
// ---------------------------------------------------------------------------

// One directory per manifest: an entry file per generated document named
// <query_id>.<doc_type_code>.<replicate>.json, failure markers alongside,
// and manifest.json at the root. Writes are write-once.
class DocStore {
 public:
  static DocStore create(const std::filesystem::path& dir, const RunManifest& manifest);
  static DocStore open(const std::filesystem::path& dir);

  const std::string& manifest_id() const { return manifest_id_; }
  const std::filesystem::path& dir() const { return dir_; }

  bool contains(const std::string& query_id, const DocType& type, int replicate) const;
  std::optional<Document> get(const std::string& query_id, const DocType& type,
                              int replicate) const;

  // Persists the document; an existing entry under the same key is kept
  // untouched.
  void put(const Document& document, const std::string& model_id,
           const std::string& prompt_digest);

  void record_failure(const std::string& query_id, const DocType& type, int replicate,
                      const std::string& error);
  bool has_failure(const std::string& query_id, const DocType& type, int replicate) const;

  // Documents for one query and type, sorted by replicate index.
  std::vector<Document> docs_for(const std::string& query_id, const DocType& type) const;
  std::vector<Document> all_docs() const;

  // Digest over every entry's identifying fields and text; stable across
  // reruns and independent of write times.
  std::string content_digest() const;

 private:
  std::filesystem::path entry_path(const std::string& query_id, const DocType& type,
                                   int replicate) const;
  std::filesystem::path failure_path(const std::string& query_id, const DocType& type,
                                     int replicate) const;

  std::filesystem::path dir_;
  std::string manifest_id_;
};

// ---------------------------------------------------------------------------
// Generation
// ---------------------------------------------------------------------------

struct GenerationFailure {
  std::string query_id;
  int replicate_index = 0;
  std::string error;
};

struct GeneratedDoc {
  Document document;
  std::string prompt_digest;
};

struct GenerationOutput {
  std::vector<GeneratedDoc> documents;
  std::vector<GenerationFailure> failures;
};

// Generates config.n_docs documents for one query. GenReadFewShot renders
// the few-shot prompt from cluster i's shots (minus any shot that matches
// the target query) for replicate i; TypedZeroShot samples n_docs
// completions of the typed generation prompt. Backend failures become
// failure records, not exceptions.
GenerationOutput generate_self_docs(const Query& query, const ShotPool* pool,
                                    const GenerationConfig& config, const PromptLibrary& prompts,
                                    LlmGateway& gateway, const std::string& manifest_id);

struct CorpusReport {
  size_t queries = 0;
  size_t generated = 0;
  size_t cached = 0;
  std::vector<GenerationFailure> failures;

  double failure_rate() const;
};

// Runs generate_self_docs over the whole dataset, persisting documents into
// the store as they arrive. Existing entries are cache hits and cost no
// backend calls.
CorpusReport generate_corpus(const Dataset& dataset, const ShotPool* pool,
                             const GenerationConfig& config, const PromptLibrary& prompts,
                             LlmGateway& gateway, DocStore& store);

}  // namespace sdoc
