#pragma once

#include <atomic>
#include <filesystem>
#include <fstream>
#include <functional>
#include <mutex>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "sdoc/digest.hpp"
#include "sdoc/error.hpp"
#include "sdoc/llm_gateway.hpp"

namespace sdoc::test {

// Deterministic in-process backend with a call log. Hooks let tests script
// completions, embeddings, and failures.
class FakeBackend : public Backend {
 public:
  using ChatHook = std::function<std::string(const ChatRequest&, const std::string& digest)>;
  using EmbedHook = std::function<EmbeddingVector(const std::string& text)>;
  using FailHook = std::function<bool(const ChatRequest&)>;

  std::string name() const override { return "fake"; }

  std::string chat(const ChatRequest& request, const std::string& digest) override {
    {
      std::lock_guard<std::mutex> lock(mutex_);
      chat_log.push_back(digest);
      chat_requests.push_back(request);
    }
    if (fail_hook && fail_hook(request)) {
      raise(ErrorCode::BackendError, "scripted failure");
    }
    if (chat_hook) return chat_hook(request, digest);
    return "COMPLETION[" + digest.substr(0, 12) + "]";
  }

  std::vector<EmbeddingVector> embed(const std::string&, const std::vector<std::string>& texts,
                                     const std::vector<std::string>&) override {
    std::vector<EmbeddingVector> out;
    out.reserve(texts.size());
    for (const auto& text : texts) {
      {
        std::lock_guard<std::mutex> lock(mutex_);
        embed_log.push_back(text);
      }
      out.push_back(embed_hook ? embed_hook(text) : default_embedding(text));
    }
    return out;
  }

  static EmbeddingVector default_embedding(const std::string& text) {
    const std::string digest = sha256_hex(text);
    EmbeddingVector v(4);
    for (size_t d = 0; d < 4; ++d) {
      v[d] = 0.1 + static_cast<double>(std::stoul(digest.substr(d * 4, 4), nullptr, 16)) / 65535.0;
    }
    return v;
  }

  ChatHook chat_hook;
  EmbedHook embed_hook;
  FailHook fail_hook;
  std::vector<std::string> chat_log;
  std::vector<ChatRequest> chat_requests;
  std::vector<std::string> embed_log;

 private:
  std::mutex mutex_;
};

// Gateway wired to a FakeBackend the test keeps a handle to.
struct FakeGateway {
  FakeBackend* backend;  // owned by the gateway
  LlmGateway gateway;

  explicit FakeGateway(const std::filesystem::path& cache_dir)
      : FakeGateway(cache_dir, std::make_unique<FakeBackend>()) {}

 private:
  FakeGateway(const std::filesystem::path& cache_dir, std::unique_ptr<FakeBackend> owned)
      : backend(owned.get()),
        gateway(std::move(owned), cache_dir, RetryPolicy{.max_attempts = 3, .base_delay_ms = 1}) {}
};

inline std::filesystem::path make_temp_dir(const std::string& prefix) {
  static std::atomic<unsigned> counter{0};
  std::random_device rd;
  const auto dir = std::filesystem::temp_directory_path() /
                   (prefix + "-" + std::to_string(rd()) + "-" + std::to_string(counter++));
  std::filesystem::create_directories(dir);
  return dir;
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
}

inline std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return text;
}

// Runs fn and reports the ErrorCode it threw, if any.
template <typename Fn>
std::optional<ErrorCode> error_code_of(Fn&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  } catch (...) {
    return std::nullopt;
  }
  return std::nullopt;
}

inline std::filesystem::path source_dir() { return SDOC_TEST_SOURCE_DIR; }
inline std::filesystem::path golden_dir() { return source_dir() / "golden"; }
inline std::filesystem::path fixture_dir() { return source_dir() / "fixtures"; }

}  // namespace sdoc::test
