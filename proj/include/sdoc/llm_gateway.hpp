#pragma once

#include <atomic>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

namespace sdoc {

struct ChatMessage {
  std::string role;  // "system" | "user" | "assistant"
  std::string content;

  bool operator==(const ChatMessage&) const = default;
};

struct ChatRequest {
  std::string model_id;
  std::vector<ChatMessage> messages;  // >= 1, last role must be "user"
  double temperature = 0.0;
  int max_tokens = 1024;
  std::optional<long> request_seed;
};

// Content-addressed keys. Whitespace-preserving and field-ordered: equal
// requests always digest identically.
std::string chat_cache_key(const ChatRequest& request, int replicate_index);
std::string embed_cache_key(const std::string& model_id, const std::string& text);

using EmbeddingVector = std::vector<double>;

// One dispatch attempt against a concrete provider. Implementations throw
// Error{BackendError} on hard failures and mark transient ones retryable.
class Backend {
 public:
  virtual ~Backend() = default;

  // digest is the cache key for this request; fixture-driven backends
  // resolve by it, network backends ignore it.
  virtual std::string chat(const ChatRequest& request, const std::string& digest) = 0;
  virtual std::vector<EmbeddingVector> embed(const std::string& model_id,
                                             const std::vector<std::string>& texts,
                                             const std::vector<std::string>& digests) = 0;
  virtual std::string name() const = 0;
};

// Thrown inside backends for failures worth retrying (timeouts, 429, 5xx).
class TransientBackendError : public std::runtime_error {
 public:
  explicit TransientBackendError(const std::string& message) : std::runtime_error(message) {}
};

struct HttpBackendConfig {
  std::string base_url;           // e.g. https://api.example.com (SDOC_API_BASE)
  std::string api_key;            // bearer token (SDOC_API_KEY)
  int timeout_seconds = 120;
  std::string chat_path = "/v1/chat/completions";
  std::string embeddings_path = "/v1/embeddings";

  static HttpBackendConfig from_env();
};

std::unique_ptr<Backend> make_http_backend(HttpBackendConfig config);

// Fixture-driven stand-in: responses come from a JSONL trace of
// {digest, completion} / {digest, vector} records. Unknown digests are a
// hard error so tests stay hermetic.
std::unique_ptr<Backend> make_replay_backend(const std::filesystem::path& trace_path);

// Wraps another backend and appends every response to a trace file in the
// replay format.
std::unique_ptr<Backend> make_recording_backend(std::unique_ptr<Backend> inner,
                                                const std::filesystem::path& trace_path);

struct RetryPolicy {
  int max_attempts = 5;
  int base_delay_ms = 1000;  // doubled per attempt, jittered
  double jitter = 0.1;
};

struct GatewayStats {
  std::atomic<long> chat_backend_calls{0};
  std::atomic<long> embed_backend_calls{0};  // batched dispatches
  std::atomic<long> embed_backend_texts{0};
  std::atomic<long> chat_cache_hits{0};
  std::atomic<long> embed_cache_hits{0};

  long backend_calls() const { return chat_backend_calls + embed_backend_calls; }
};

// Chat/embedding access behind a content-addressed, append-only response
// cache. Safe for concurrent callers.
class LlmGateway {
 public:
  LlmGateway(std::unique_ptr<Backend> backend, std::filesystem::path cache_dir,
             RetryPolicy retry = {});

  // Cache lookup first; on miss dispatches with exponential-backoff retry
  // and stores the completion. Empty completions are an error.
  std::string chat(const ChatRequest& request, int replicate_index);

  // Batched embedding with per-text caching; vectors are L2-normalized on
  // return.
  std::vector<EmbeddingVector> embed(const std::vector<std::string>& texts,
                                     const std::string& model_id);

  const GatewayStats& stats() const { return stats_; }
  const std::string& backend_name() const { return backend_name_; }

 private:
  std::filesystem::path cache_path(const std::string& digest) const;
  std::optional<std::string> cached_completion(const std::string& digest);
  std::optional<EmbeddingVector> cached_vector(const std::string& digest);
  void store_entry(const std::string& digest, const std::string& json_text);
  std::string dispatch_chat(const ChatRequest& request, const std::string& digest);

  std::unique_ptr<Backend> backend_;
  std::string backend_name_;
  std::filesystem::path cache_dir_;
  RetryPolicy retry_;
  GatewayStats stats_;
  std::mutex write_mutex_;
};

// L2 normalization helper shared with the clustering code; zero-norm input
// is a backend error.
EmbeddingVector l2_normalized(const EmbeddingVector& v);

}  // namespace sdoc
