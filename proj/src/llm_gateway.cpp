#include "sdoc/llm_gateway.hpp"

#include <httplib.h>

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <random>
#include <set>
#include <sstream>
#include <thread>

#include <nlohmann/json.hpp>

#include "sdoc/digest.hpp"
#include "sdoc/error.hpp"

namespace sdoc {

using nlohmann::json;

namespace {

void validate_request(const ChatRequest& request) {
  if (request.messages.empty()) {
    raise(ErrorCode::InvalidArgument, "chat request needs at least one message");
  }
  if (request.messages.back().role != "user") {
    raise(ErrorCode::InvalidArgument, "last chat message must have role 'user'");
  }
}

json messages_to_json(const std::vector<ChatMessage>& messages) {
  json arr = json::array();
  for (const auto& m : messages) {
    arr.push_back({{"role", m.role}, {"content", m.content}});
  }
  return arr;
}

// Canonical wire body. nlohmann::json orders object keys alphabetically, so
// the dump is stable: {"max_tokens":..,"messages":..,"model":..,"temperature":..}.
json chat_body(const ChatRequest& request) {
  return json{{"model", request.model_id},
              {"messages", messages_to_json(request.messages)},
              {"temperature", request.temperature},
              {"max_tokens", request.max_tokens}};
}

std::string iso8601_now() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

class HttpBackend : public Backend {
 public:
  explicit HttpBackend(HttpBackendConfig config) : config_(std::move(config)) {
    if (config_.base_url.empty()) {
      raise(ErrorCode::BackendError, "live backend needs a base URL (SDOC_API_BASE)");
    }
  }

  std::string name() const override { return "live"; }

  std::string chat(const ChatRequest& request, const std::string&) override {
    const std::string body = chat_body(request).dump();
    const json reply = post_json(config_.chat_path, body);
    if (!reply.contains("choices") || reply["choices"].empty()) {
      raise(ErrorCode::BackendError, "chat response has no choices");
    }
    const json& message = reply["choices"][0].value("message", json::object());
    if (!message.contains("content") || message["content"].is_null()) {
      raise(ErrorCode::BackendEmptyResponse, "chat response has no message content");
    }
    return message["content"].get<std::string>();
  }

  std::vector<EmbeddingVector> embed(const std::string& model_id,
                                     const std::vector<std::string>& texts,
                                     const std::vector<std::string>&) override {
    const std::string body = json{{"model", model_id}, {"input", texts}}.dump();
    const json reply = post_json(config_.embeddings_path, body);
    if (!reply.contains("data") || reply["data"].size() != texts.size()) {
      raise(ErrorCode::BackendError, "embedding response size mismatch");
    }
    std::vector<EmbeddingVector> out(texts.size());
    for (const auto& item : reply["data"]) {
      const size_t index = item.value("index", out.size());
      if (index >= out.size()) {
        raise(ErrorCode::BackendError, "embedding response index out of range");
      }
      out[index] = item.at("embedding").get<EmbeddingVector>();
    }
    return out;
  }

 private:
  json post_json(const std::string& path, const std::string& body) {
    httplib::Client client(config_.base_url);
    client.set_connection_timeout(config_.timeout_seconds, 0);
    client.set_read_timeout(config_.timeout_seconds, 0);
    client.set_write_timeout(config_.timeout_seconds, 0);
    httplib::Headers headers;
    if (!config_.api_key.empty()) {
      headers.emplace("Authorization", "Bearer " + config_.api_key);
    }
    auto result = client.Post(path, headers, body, "application/json");
    if (!result) {
      throw TransientBackendError("request to " + path + " failed: " +
                                  httplib::to_string(result.error()));
    }
    if (result->status == 429 || result->status >= 500) {
      throw TransientBackendError("HTTP " + std::to_string(result->status) + " from " + path);
    }
    if (result->status != 200) {
      raise(ErrorCode::BackendError,
            "HTTP " + std::to_string(result->status) + " from " + path + ": " + result->body);
    }
    json reply = json::parse(result->body, nullptr, false);
    if (reply.is_discarded()) {
      raise(ErrorCode::BackendError, "response from " + path + " is not JSON");
    }
    return reply;
  }

  HttpBackendConfig config_;
};

class ReplayBackend : public Backend {
 public:
  explicit ReplayBackend(const std::filesystem::path& trace_path) : trace_path_(trace_path) {
    std::ifstream in(trace_path);
    if (!in) {
      raise(ErrorCode::IoError, "cannot read replay trace " + trace_path.string());
    }
    std::string line;
    size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (line.empty()) continue;
      json record = json::parse(line, nullptr, false);
      if (record.is_discarded() || !record.contains("digest")) {
        raise(ErrorCode::SchemaError,
              trace_path.string() + ":" + std::to_string(line_no) + ": bad trace record");
      }
      const std::string digest = record["digest"].get<std::string>();
      if (record.contains("completion")) {
        completions_[digest] = record["completion"].get<std::string>();
      } else if (record.contains("vector")) {
        vectors_[digest] = record["vector"].get<EmbeddingVector>();
      } else {
        raise(ErrorCode::SchemaError,
              trace_path.string() + ":" + std::to_string(line_no) +
                  ": trace record has neither completion nor vector");
      }
    }
  }

  std::string name() const override { return "replay"; }

  std::string chat(const ChatRequest&, const std::string& digest) override {
    auto it = completions_.find(digest);
    if (it == completions_.end()) {
      raise(ErrorCode::ReplayMiss,
            "no completion fixture for digest " + digest + " in " + trace_path_.string());
    }
    return it->second;
  }

  std::vector<EmbeddingVector> embed(const std::string&, const std::vector<std::string>& texts,
                                     const std::vector<std::string>& digests) override {
    std::vector<EmbeddingVector> out;
    out.reserve(texts.size());
    for (const auto& digest : digests) {
      auto it = vectors_.find(digest);
      if (it == vectors_.end()) {
        raise(ErrorCode::ReplayMiss,
              "no embedding fixture for digest " + digest + " in " + trace_path_.string());
      }
      out.push_back(it->second);
    }
    return out;
  }

 private:
  std::filesystem::path trace_path_;
  std::map<std::string, std::string> completions_;
  std::map<std::string, EmbeddingVector> vectors_;
};

class RecordingBackend : public Backend {
 public:
  RecordingBackend(std::unique_ptr<Backend> inner, const std::filesystem::path& trace_path)
      : inner_(std::move(inner)), trace_path_(trace_path) {}

  std::string name() const override { return "record(" + inner_->name() + ")"; }

  std::string chat(const ChatRequest& request, const std::string& digest) override {
    std::string completion = inner_->chat(request, digest);
    append(json{{"digest", digest}, {"completion", completion}});
    return completion;
  }

  std::vector<EmbeddingVector> embed(const std::string& model_id,
                                     const std::vector<std::string>& texts,
                                     const std::vector<std::string>& digests) override {
    auto vectors = inner_->embed(model_id, texts, digests);
    for (size_t i = 0; i < vectors.size(); ++i) {
      append(json{{"digest", digests[i]}, {"vector", vectors[i]}});
    }
    return vectors;
  }

 private:
  void append(const json& record) {
    std::lock_guard<std::mutex> lock(mutex_);
    std::ofstream out(trace_path_, std::ios::app);
    if (!out) {
      raise(ErrorCode::IoError, "cannot append to trace " + trace_path_.string());
    }
    out << record.dump() << "\n";
  }

  std::unique_ptr<Backend> inner_;
  std::filesystem::path trace_path_;
  std::mutex mutex_;
};

}  // namespace

std::string chat_cache_key(const ChatRequest& request, int replicate_index) {
  validate_request(request);
  json canonical{{"model", request.model_id},
                 {"messages", messages_to_json(request.messages)},
                 {"temperature", request.temperature},
                 {"max_tokens", request.max_tokens},
                 {"replicate_index", replicate_index}};
  return sha256_hex(canonical.dump());
}

std::string embed_cache_key(const std::string& model_id, const std::string& text) {
  return digest_fields({std::string_view("embedding"), std::string_view(model_id),
                        std::string_view(text)});
}

HttpBackendConfig HttpBackendConfig::from_env() {
  HttpBackendConfig config;
  if (const char* base = std::getenv("SDOC_API_BASE")) config.base_url = base;
  if (const char* key = std::getenv("SDOC_API_KEY")) config.api_key = key;
  return config;
}

std::unique_ptr<Backend> make_http_backend(HttpBackendConfig config) {
  return std::make_unique<HttpBackend>(std::move(config));
}

std::unique_ptr<Backend> make_replay_backend(const std::filesystem::path& trace_path) {
  return std::make_unique<ReplayBackend>(trace_path);
}

std::unique_ptr<Backend> make_recording_backend(std::unique_ptr<Backend> inner,
                                                const std::filesystem::path& trace_path) {
  return std::make_unique<RecordingBackend>(std::move(inner), trace_path);
}

EmbeddingVector l2_normalized(const EmbeddingVector& v) {
  double sq = 0.0;
  for (double x : v) {
    if (!std::isfinite(x)) {
      raise(ErrorCode::BackendError, "embedding contains a non-finite value");
    }
    sq += x * x;
  }
  if (sq == 0.0) {
    raise(ErrorCode::BackendError, "embedding has zero norm");
  }
  const double inv = 1.0 / std::sqrt(sq);
  EmbeddingVector out(v.size());
  for (size_t i = 0; i < v.size(); ++i) {
    out[i] = v[i] * inv;
  }
  return out;
}

LlmGateway::LlmGateway(std::unique_ptr<Backend> backend, std::filesystem::path cache_dir,
                       RetryPolicy retry)
    : backend_(std::move(backend)),
      backend_name_(backend_->name()),
      cache_dir_(std::move(cache_dir)),
      retry_(retry) {
  std::filesystem::create_directories(cache_dir_);
}

std::filesystem::path LlmGateway::cache_path(const std::string& digest) const {
  return cache_dir_ / digest.substr(0, 2) / (digest + ".json");
}

std::optional<std::string> LlmGateway::cached_completion(const std::string& digest) {
  std::ifstream in(cache_path(digest));
  if (!in) return std::nullopt;
  json entry = json::parse(in, nullptr, false);
  if (entry.is_discarded() || !entry.contains("completion")) return std::nullopt;
  return entry["completion"].get<std::string>();
}

std::optional<EmbeddingVector> LlmGateway::cached_vector(const std::string& digest) {
  std::ifstream in(cache_path(digest));
  if (!in) return std::nullopt;
  json entry = json::parse(in, nullptr, false);
  if (entry.is_discarded() || !entry.contains("vector")) return std::nullopt;
  return entry["vector"].get<EmbeddingVector>();
}

void LlmGateway::store_entry(const std::string& digest, const std::string& json_text) {
  std::lock_guard<std::mutex> lock(write_mutex_);
  const auto path = cache_path(digest);
  if (std::filesystem::exists(path)) {
    return;  // append-only: first write wins
  }
  std::filesystem::create_directories(path.parent_path());
  const auto tmp = path.parent_path() / (digest + ".tmp");
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) {
      raise(ErrorCode::IoError, "cannot write cache entry " + tmp.string());
    }
    out << json_text;
  }
  std::filesystem::rename(tmp, path);
}

std::string LlmGateway::dispatch_chat(const ChatRequest& request, const std::string& digest) {
  std::mt19937_64 jitter_rng(std::random_device{}());
  int delay_ms = retry_.base_delay_ms;
  std::string last_error;
  for (int attempt = 1; attempt <= retry_.max_attempts; ++attempt) {
    try {
      return backend_->chat(request, digest);
    } catch (const TransientBackendError& e) {
      last_error = e.what();
      if (attempt == retry_.max_attempts) break;
      const double jitter =
          1.0 + retry_.jitter * (static_cast<double>(jitter_rng() % 1000) / 1000.0);
      std::this_thread::sleep_for(
          std::chrono::milliseconds(static_cast<long>(delay_ms * jitter)));
      delay_ms *= 2;
    }
  }
  raise(ErrorCode::BackendExhausted,
        "chat failed after " + std::to_string(retry_.max_attempts) + " attempts: " + last_error);
}

std::string LlmGateway::chat(const ChatRequest& request, int replicate_index) {
  const std::string digest = chat_cache_key(request, replicate_index);
  if (auto hit = cached_completion(digest)) {
    stats_.chat_cache_hits++;
    return *hit;
  }
  stats_.chat_backend_calls++;
  const std::string completion = dispatch_chat(request, digest);
  if (completion.empty()) {
    raise(ErrorCode::BackendEmptyResponse, "backend returned an empty completion");
  }
  json entry{{"digest", digest},
             {"kind", "chat"},
             {"model_id", request.model_id},
             {"completion", completion},
             {"created_at", iso8601_now()}};
  store_entry(digest, entry.dump());
  return completion;
}

std::vector<EmbeddingVector> LlmGateway::embed(const std::vector<std::string>& texts,
                                               const std::string& model_id) {
  if (texts.empty()) {
    raise(ErrorCode::InvalidArgument, "embed needs at least one text");
  }
  std::vector<std::string> digests(texts.size());
  std::vector<EmbeddingVector> out(texts.size());
  std::vector<bool> resolved(texts.size(), false);

  // De-duplicate texts so each unique input is looked up and dispatched once.
  std::map<std::string, std::vector<size_t>> positions_by_digest;
  for (size_t i = 0; i < texts.size(); ++i) {
    digests[i] = embed_cache_key(model_id, texts[i]);
    positions_by_digest[digests[i]].push_back(i);
  }

  for (const auto& [digest, positions] : positions_by_digest) {
    if (auto hit = cached_vector(digest)) {
      stats_.embed_cache_hits++;
      for (size_t pos : positions) {
        out[pos] = l2_normalized(*hit);
        resolved[pos] = true;
      }
    }
  }

  // dispatch misses once each, in input order
  std::vector<std::string> miss_texts;
  std::vector<std::string> miss_digests;
  std::set<std::string> queued;
  for (size_t i = 0; i < texts.size(); ++i) {
    if (resolved[i] || !queued.insert(digests[i]).second) continue;
    miss_texts.push_back(texts[i]);
    miss_digests.push_back(digests[i]);
  }

  if (!miss_texts.empty()) {
    stats_.embed_backend_calls++;
    stats_.embed_backend_texts += static_cast<long>(miss_texts.size());
    auto vectors = backend_->embed(model_id, miss_texts, miss_digests);
    if (vectors.size() != miss_texts.size()) {
      raise(ErrorCode::BackendError, "embedding batch size mismatch");
    }
    for (size_t j = 0; j < vectors.size(); ++j) {
      json entry{{"digest", miss_digests[j]},
                 {"kind", "embedding"},
                 {"model_id", model_id},
                 {"vector", vectors[j]},
                 {"created_at", iso8601_now()}};
      store_entry(miss_digests[j], entry.dump());
      const auto normalized = l2_normalized(vectors[j]);
      for (size_t pos : positions_by_digest.at(miss_digests[j])) {
        out[pos] = normalized;
        resolved[pos] = true;
      }
    }
  }

  for (size_t i = 0; i < texts.size(); ++i) {
    if (!resolved[i]) {
      raise(ErrorCode::BackendError, "embedding missing for input " + std::to_string(i));
    }
  }
  return out;
}

}  // namespace sdoc
