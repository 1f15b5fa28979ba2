#include "sdoc/selfdocs_gen.hpp"

#include <algorithm>
#include <chrono>
#include <ctime>
#include <fstream>
#include <mutex>

#include <nlohmann/json.hpp>

#include "sdoc/digest.hpp"
#include "sdoc/error.hpp"
#include "sdoc/parallel.hpp"

namespace sdoc {

using nlohmann::json;

namespace {

std::string iso8601_now() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void write_file_once(const std::filesystem::path& path, const std::string& text) {
  if (std::filesystem::exists(path)) return;
  std::filesystem::create_directories(path.parent_path());
  const auto tmp = path.parent_path() / (path.filename().string() + ".tmp");
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) {
      raise(ErrorCode::IoError, "cannot write " + tmp.string());
    }
    out << text;
  }
  std::filesystem::rename(tmp, path);
}

ChatRequest prompt_to_request(const Prompt& prompt, const std::string& model_id,
                              double temperature, int max_tokens) {
  ChatRequest request;
  request.model_id = model_id;
  if (prompt.system) {
    request.messages.push_back({"system", *prompt.system});
  }
  request.messages.push_back({"user", prompt.user});
  request.temperature = temperature;
  request.max_tokens = max_tokens;
  return request;
}

std::string style_code_or(const std::optional<SflType>& style, const std::string& fallback) {
  return style ? sfl_code(*style) : fallback;
}

}  // namespace

std::string generation_mode_name(GenerationMode mode) {
  return mode == GenerationMode::GenReadFewShot ? "genread-fewshot" : "typed-zeroshot";
}

GenerationMode parse_generation_mode(std::string_view name) {
  std::string n(name);
  std::transform(n.begin(), n.end(), n.begin(), [](unsigned char c) { return std::tolower(c); });
  if (n == "genread-fewshot" || n == "fewshot" || n == "genread") {
    return GenerationMode::GenReadFewShot;
  }
  if (n == "typed-zeroshot" || n == "zeroshot") {
    return GenerationMode::TypedZeroShot;
  }
  raise(ErrorCode::UnknownCode, "unknown generation mode '" + std::string(name) + "'");
}

void validate_generation_config(const GenerationConfig& config) {
  if (config.n_docs < 1) {
    raise(ErrorCode::InvalidArgument, "n_docs must be positive");
  }
  if (config.temperature < 0.0 || config.temperature > 2.0) {
    raise(ErrorCode::InvalidArgument, "temperature must be within [0, 2]");
  }
  if (config.k_clusters < 1 || config.m_shots < 1) {
    raise(ErrorCode::InvalidArgument, "k_clusters and m_shots must be positive");
  }
  if (config.mode == GenerationMode::GenReadFewShot) {
    if (config.n_docs > config.k_clusters) {
      raise(ErrorCode::InvalidArgument,
            "few-shot mode draws replicate i from cluster i, so n_docs (" +
                std::to_string(config.n_docs) + ") cannot exceed k_clusters (" +
                std::to_string(config.k_clusters) + ")");
    }
    if (config.m_shots > 5) {
      raise(ErrorCode::TooManyShots, "the few-shot template holds at most 5 shots");
    }
  }
  if (config.mode == GenerationMode::TypedZeroShot && !config.style) {
    raise(ErrorCode::InvalidArgument, "typed zero-shot generation needs a style");
  }
}

RunManifest generation_manifest(const GenerationConfig& config, const std::string& dataset_digest,
                                Task task, const std::string& template_digest) {
  RunManifest manifest;
  manifest.set("stage", std::string("generate"));
  manifest.set("task", task_token(task));
  manifest.set("dataset_digest", dataset_digest);
  manifest.set("template_digest", template_digest);
  manifest.set("mode", generation_mode_name(config.mode));
  manifest.set("n_docs", static_cast<long>(config.n_docs));
  manifest.set("temperature", config.temperature);
  manifest.set("style", style_code_or(config.style, ""));
  manifest.set("k_clusters", static_cast<long>(config.k_clusters));
  manifest.set("m_shots", static_cast<long>(config.m_shots));
  manifest.set("seed", static_cast<long>(config.seed));
  manifest.set("model_id", config.model_id);
  manifest.set("embed_model_id", config.embed_model_id);
  manifest.set("transform_model_id", config.transform_model_id);
  manifest.set("max_tokens", static_cast<long>(config.max_tokens));
  manifest.set("tool_version", std::string(SDOC_VERSION));
  return manifest;
}

ShotPool build_shot_pool(const std::vector<std::pair<Query, Document>>& shot_queries,
                         const GenerationConfig& config, LlmGateway& gateway) {
  validate_generation_config(config);
  if (shot_queries.size() <
      static_cast<size_t>(config.k_clusters) * static_cast<size_t>(config.m_shots)) {
    raise(ErrorCode::InvalidArgument,
          "need at least k_clusters * m_shots = " +
              std::to_string(config.k_clusters * config.m_shots) + " shot pairs, got " +
              std::to_string(shot_queries.size()));
  }
  const auto embeddings = embed_pairs(shot_queries, gateway, config.embed_model_id);
  const auto assignment = kmeans(embeddings, config.k_clusters, config.seed);
  return sample_shots(assignment, shot_queries, config.m_shots, config.seed);
}

ShotPool style_align_shots(const ShotPool& pool, SflType style, Task task,
                           const PromptLibrary& prompts, LlmGateway& gateway,
                           const GenerationConfig& config) {
  if (pool.style) {
    raise(ErrorCode::InvalidArgument,
          "shot pool is already aligned to " + sfl_code(*pool.style));
  }
  ShotPool aligned = pool;
  aligned.style = style;

  std::vector<Shot*> flat;
  for (auto& list : aligned.shots) {
    for (auto& shot : list) {
      flat.push_back(&shot);
    }
  }
  parallel_for(flat.size(), config.parallelism, [&](size_t i) {
    Shot& shot = *flat[i];
    const Prompt prompt =
        prompts.render_style_transform(task, style, shot.document_text, shot.query_text);
    const std::string rewritten = gateway.chat(
        prompt_to_request(prompt, config.transform_model_id, 0.0, config.max_tokens), 0);
    shot.document_text = rewritten;
  });
  return aligned;
}

void save_shot_pool(const std::filesystem::path& path, const ShotPool& pool) {
  json lists = json::array();
  for (const auto& list : pool.shots) {
    json shots = json::array();
    for (const auto& shot : list) {
      shots.push_back({{"query_id", shot.query_id},
                       {"query", shot.query_text},
                       {"document", shot.document_text}});
    }
    lists.push_back(std::move(shots));
  }
  json doc{{"seed", pool.seed},
           {"style", pool.style ? json(sfl_code(*pool.style)) : json(nullptr)},
           {"shots", lists}};
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    raise(ErrorCode::IoError, "cannot write shot pool " + path.string());
  }
  out << doc.dump(2) << "\n";
}

ShotPool load_shot_pool(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    raise(ErrorCode::IoError, "cannot read shot pool " + path.string());
  }
  json doc = json::parse(in, nullptr, false);
  if (doc.is_discarded() || !doc.contains("shots")) {
    raise(ErrorCode::SchemaError, path.string() + ": not a shot pool file");
  }
  ShotPool pool;
  pool.seed = doc.value("seed", 0ull);
  if (doc.contains("style") && !doc["style"].is_null()) {
    pool.style = parse_sfl_code(doc["style"].get<std::string>());
  }
  for (const auto& list : doc["shots"]) {
    std::vector<Shot> shots;
    for (const auto& shot : list) {
      shots.push_back(Shot{shot.value("query_id", ""), shot.at("query").get<std::string>(),
                           shot.at("document").get<std::string>()});
    }
    pool.shots.push_back(std::move(shots));
  }
  return pool;
}

// --- DocStore ---------------------------------------------------------------

DocStore DocStore::create(const std::filesystem::path& dir, const RunManifest& manifest) {
  std::filesystem::create_directories(dir);
  const auto manifest_path = dir / "manifest.json";
  if (std::filesystem::exists(manifest_path)) {
    const RunManifest existing = RunManifest::load(manifest_path);
    if (existing.id() != manifest.id()) {
      raise(ErrorCode::InvalidArgument,
            dir.string() + " already holds a store for manifest " + existing.id());
    }
  } else {
    manifest.save(manifest_path);
  }
  DocStore store;
  store.dir_ = dir;
  store.manifest_id_ = manifest.id();
  return store;
}

DocStore DocStore::open(const std::filesystem::path& dir) {
  const auto manifest_path = dir / "manifest.json";
  if (!std::filesystem::exists(manifest_path)) {
    raise(ErrorCode::IoError, dir.string() + " has no manifest.json");
  }
  DocStore store;
  store.dir_ = dir;
  store.manifest_id_ = RunManifest::load(manifest_path).id();
  return store;
}

std::filesystem::path DocStore::entry_path(const std::string& query_id, const DocType& type,
                                           int replicate) const {
  return dir_ / (filename_safe(query_id) + "." + doc_type_code(type) + "." +
                 std::to_string(replicate) + ".json");
}

std::filesystem::path DocStore::failure_path(const std::string& query_id, const DocType& type,
                                             int replicate) const {
  return dir_ / (filename_safe(query_id) + "." + doc_type_code(type) + "." +
                 std::to_string(replicate) + ".failed.json");
}

bool DocStore::contains(const std::string& query_id, const DocType& type, int replicate) const {
  return std::filesystem::exists(entry_path(query_id, type, replicate));
}

std::optional<Document> DocStore::get(const std::string& query_id, const DocType& type,
                                      int replicate) const {
  std::ifstream in(entry_path(query_id, type, replicate));
  if (!in) return std::nullopt;
  json record = json::parse(in, nullptr, false);
  if (record.is_discarded()) return std::nullopt;

  Document doc;
  doc.id = record.value("id", "");
  doc.text = record.at("text").get<std::string>();
  doc.doc_type = parse_doc_type_code(record.at("doc_type").get<std::string>());
  doc.source = parse_doc_source(record.at("source").get<std::string>());
  doc.origin_query_id = record.at("origin_query_id").get<std::string>();
  doc.replicate_index = record.at("replicate_index").get<int>();
  return doc;
}

void DocStore::put(const Document& document, const std::string& model_id,
                   const std::string& prompt_digest) {
  if (document.source != DocSource::SelfGenerated &&
      document.source != DocSource::StyleTransformed) {
    raise(ErrorCode::InvalidArgument, "stores hold generated documents only");
  }
  if (!document.origin_query_id || !document.replicate_index.has_value()) {
    raise(ErrorCode::InvalidArgument, "stored documents need origin_query_id and replicate_index");
  }
  json record{{"id", document.id},
              {"text", document.text},
              {"doc_type", doc_type_code(document.doc_type)},
              {"source", doc_source_name(document.source)},
              {"origin_query_id", *document.origin_query_id},
              {"replicate_index", *document.replicate_index},
              {"model_id", model_id},
              {"prompt_digest", prompt_digest},
              {"created_at", iso8601_now()}};
  write_file_once(entry_path(*document.origin_query_id, document.doc_type,
                             *document.replicate_index),
                  record.dump(2) + "\n");
}

void DocStore::record_failure(const std::string& query_id, const DocType& type, int replicate,
                              const std::string& error) {
  json record{{"query_id", query_id},
              {"doc_type", doc_type_code(type)},
              {"replicate_index", replicate},
              {"error", error},
              {"created_at", iso8601_now()}};
  write_file_once(failure_path(query_id, type, replicate), record.dump(2) + "\n");
}

bool DocStore::has_failure(const std::string& query_id, const DocType& type,
                           int replicate) const {
  return std::filesystem::exists(failure_path(query_id, type, replicate));
}

std::vector<Document> DocStore::docs_for(const std::string& query_id, const DocType& type) const {
  std::vector<Document> docs;
  for (int replicate = 0;; ++replicate) {
    auto doc = get(query_id, type, replicate);
    if (!doc) {
      // tolerate gaps left by failed replicates
      if (!has_failure(query_id, type, replicate)) break;
      continue;
    }
    docs.push_back(std::move(*doc));
  }
  return docs;
}

std::vector<Document> DocStore::all_docs() const {
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir_)) {
    if (!entry.is_regular_file()) continue;
    const std::string name = entry.path().filename().string();
    if (name == "manifest.json" || name.ends_with(".failed.json") || !name.ends_with(".json")) {
      continue;
    }
    files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());

  std::vector<Document> docs;
  for (const auto& path : files) {
    std::ifstream in(path);
    json record = json::parse(in, nullptr, false);
    if (record.is_discarded()) {
      raise(ErrorCode::SchemaError, path.string() + ": bad store entry");
    }
    Document doc;
    doc.id = record.value("id", "");
    doc.text = record.at("text").get<std::string>();
    doc.doc_type = parse_doc_type_code(record.at("doc_type").get<std::string>());
    doc.source = parse_doc_source(record.at("source").get<std::string>());
    doc.origin_query_id = record.at("origin_query_id").get<std::string>();
    doc.replicate_index = record.at("replicate_index").get<int>();
    docs.push_back(std::move(doc));
  }
  return docs;
}

std::string DocStore::content_digest() const {
  std::vector<std::string> fields;
  for (const auto& doc : all_docs()) {
    fields.push_back(*doc.origin_query_id);
    fields.push_back(doc_type_code(doc.doc_type));
    fields.push_back(std::to_string(*doc.replicate_index));
    fields.push_back(doc.id);
    fields.push_back(doc.text);
  }
  return digest_fields(fields);
}

// --- generation ---------------------------------------------------------------

GenerationOutput generate_self_docs(const Query& query, const ShotPool* pool,
                                    const GenerationConfig& config, const PromptLibrary& prompts,
                                    LlmGateway& gateway, const std::string& manifest_id) {
  validate_generation_config(config);
  const bool fewshot = config.mode == GenerationMode::GenReadFewShot;
  if (fewshot && (!pool || pool->shots.empty())) {
    raise(ErrorCode::InvalidArgument, "few-shot generation needs a shot pool");
  }
  if (fewshot && pool->shots.size() < static_cast<size_t>(config.n_docs)) {
    raise(ErrorCode::InvalidArgument,
          "shot pool has " + std::to_string(pool->shots.size()) + " clusters, need " +
              std::to_string(config.n_docs));
  }

  // Few-shot output inherits the pool's alignment style; an unaligned pool
  // yields untyped background documents.
  const DocType doc_type = fewshot
                               ? (pool->style ? DocType::sfl(*pool->style) : DocType::genread())
                               : DocType::sfl(*config.style);

  GenerationOutput output;
  std::mutex output_mutex;
  parallel_for(static_cast<size_t>(config.n_docs), config.parallelism, [&](size_t i) {
    const int replicate = static_cast<int>(i);
    try {
      Prompt prompt;
      if (fewshot) {
        std::vector<Shot> shots;
        for (const auto& shot : pool->shots[i]) {
          // never show the target query its own exemplar
          if (shot.query_id == query.id || shot.query_text == query.text) continue;
          shots.push_back(shot);
        }
        if (shots.empty()) {
          raise(ErrorCode::InvalidArgument,
                "cluster " + std::to_string(i) + " has no usable shots for query " + query.id);
        }
        prompt = prompts.render_genread(query.task, shots, query.text);
      } else {
        prompt = prompts.render_generation(query.task, *config.style, query.text);
      }
      const ChatRequest request =
          prompt_to_request(prompt, config.model_id, config.temperature, config.max_tokens);
      const std::string prompt_digest = chat_cache_key(request, replicate);
      const std::string text = gateway.chat(request, replicate);

      Document doc;
      doc.id = self_doc_id(query.id, doc_type, replicate, manifest_id);
      doc.text = text;
      doc.doc_type = doc_type;
      doc.source = DocSource::SelfGenerated;
      doc.origin_query_id = query.id;
      doc.replicate_index = replicate;

      std::lock_guard<std::mutex> lock(output_mutex);
      output.documents.push_back(GeneratedDoc{std::move(doc), prompt_digest});
    } catch (const Error& e) {
      std::lock_guard<std::mutex> lock(output_mutex);
      output.failures.push_back(GenerationFailure{query.id, replicate, e.what()});
    }
  });

  std::sort(output.documents.begin(), output.documents.end(),
            [](const GeneratedDoc& a, const GeneratedDoc& b) {
              return a.document.replicate_index < b.document.replicate_index;
            });
  std::sort(output.failures.begin(), output.failures.end(),
            [](const GenerationFailure& a, const GenerationFailure& b) {
              return a.replicate_index < b.replicate_index;
            });
  return output;
}

double CorpusReport::failure_rate() const {
  const size_t attempts = generated + failures.size();
  return attempts == 0 ? 0.0 : static_cast<double>(failures.size()) / attempts;
}

CorpusReport generate_corpus(const Dataset& dataset, const ShotPool* pool,
                             const GenerationConfig& config, const PromptLibrary& prompts,
                             LlmGateway& gateway, DocStore& store) {
  validate_generation_config(config);
  CorpusReport report;
  report.queries = dataset.queries.size();

  const bool fewshot = config.mode == GenerationMode::GenReadFewShot;
  const DocType doc_type = fewshot
                               ? (pool && pool->style ? DocType::sfl(*pool->style)
                                                      : DocType::genread())
                               : DocType::sfl(*config.style);

  for (const auto& [query, gold] : dataset.queries) {
    bool complete = true;
    for (int replicate = 0; replicate < config.n_docs; ++replicate) {
      if (!store.contains(query.id, doc_type, replicate)) {
        complete = false;
        break;
      }
    }
    if (complete) {
      report.cached += config.n_docs;
      continue;
    }

    const GenerationOutput output =
        generate_self_docs(query, pool, config, prompts, gateway, store.manifest_id());
    for (const auto& generated : output.documents) {
      store.put(generated.document, config.model_id, generated.prompt_digest);
      report.generated++;
    }
    for (const auto& failure : output.failures) {
      store.record_failure(failure.query_id, doc_type, failure.replicate_index, failure.error);
      report.failures.push_back(failure);
    }
  }
  return report;
}

}  // namespace sdoc
