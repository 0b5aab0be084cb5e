#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "laip/errors.hpp"

namespace laip::provider {

struct Message {
  std::string role;  // "system" | "user" | "assistant"
  std::string text;
};

struct CompletionRequest {
  std::string model_id;
  std::vector<Message> messages;
  double temperature = 0.0;
  std::optional<std::int64_t> seed;
  int max_tokens = 2048;
};

struct TokenUsage {
  std::int64_t prompt_tokens = 0;
  std::int64_t completion_tokens = 0;

  TokenUsage& operator+=(const TokenUsage& o) {
    prompt_tokens += o.prompt_tokens;
    completion_tokens += o.completion_tokens;
    return *this;
  }
};

struct CompletionResult {
  std::string text;
  TokenUsage usage;
  std::string backend;
  bool cache_hit = false;
};

nlohmann::json request_to_json(const CompletionRequest& r);

// Stable content digest of (model_id, messages, temperature, seed).
// max_tokens is deliberately excluded: temperature-0 responses are
// prefix-stable, so a longer budget must not invalidate cached entries.
std::string request_digest(const CompletionRequest& r);

// Rough token estimate for backends that do not report usage.
std::int64_t approx_tokens(const std::string& text);

class Backend {
 public:
  virtual ~Backend() = default;
  virtual CompletionResult complete(const CompletionRequest& request) = 0;
  virtual std::string name() const = 0;
};

// Canned responses keyed by request digest. Thread-safe.
class ScriptedBackend final : public Backend {
 public:
  void add(const CompletionRequest& request, std::string text);
  void add_digest(std::string digest, std::string text);
  std::size_t size() const;
  CompletionResult complete(const CompletionRequest& request) override;
  std::string name() const override { return "scripted"; }

 private:
  mutable std::mutex mu_;
  std::map<std::string, std::string> responses_;
};

// Computes the response on the fly; handy for deterministic test doubles.
class CallbackBackend final : public Backend {
 public:
  using Fn = std::function<std::string(const CompletionRequest&)>;
  explicit CallbackBackend(Fn fn, std::string label = "callback")
      : fn_(std::move(fn)), label_(std::move(label)) {}
  CompletionResult complete(const CompletionRequest& request) override;
  std::string name() const override { return label_; }

 private:
  Fn fn_;
  std::string label_;
};

// Append-only JSONL store of completed calls, one record per line:
// {"digest":..., "request":..., "response_text":..., "timestamp":...}.
// Appends are atomic within a process and visible to readers immediately.
class ReplayCache {
 public:
  explicit ReplayCache(std::filesystem::path file);

  std::optional<std::string> lookup(const std::string& digest) const;
  void append(const std::string& digest, const nlohmann::json& request,
              const std::string& response_text);
  std::size_t size() const;
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
  mutable std::mutex mu_;
  std::map<std::string, std::string> index_;
};

// Replays a recorded session; unseen digests raise CacheMiss.
class ReplayBackend final : public Backend {
 public:
  explicit ReplayBackend(std::shared_ptr<ReplayCache> cache) : cache_(std::move(cache)) {}
  CompletionResult complete(const CompletionRequest& request) override;
  std::string name() const override { return "replay"; }

 private:
  std::shared_ptr<ReplayCache> cache_;
};

// Serves from the cache when possible, otherwise forwards to the inner
// backend and records the response.
class RecordingBackend final : public Backend {
 public:
  RecordingBackend(std::shared_ptr<Backend> inner, std::shared_ptr<ReplayCache> cache)
      : inner_(std::move(inner)), cache_(std::move(cache)) {}
  CompletionResult complete(const CompletionRequest& request) override;
  std::string name() const override { return "record(" + inner_->name() + ")"; }

 private:
  std::shared_ptr<Backend> inner_;
  std::shared_ptr<ReplayCache> cache_;
};

struct HttpConfig {
  std::string base_url;                      // e.g. http://localhost:8080/v1
  std::string completions_path = "/chat/completions";
  std::string embeddings_path = "/embeddings";
  std::string api_key_env = "LAIP_API_KEY";  // credentials come from the env only
  std::string embedding_model = "embed-default";
  int timeout_seconds = 120;
};

// Chat-completions wire format over HTTP.
class HttpBackend final : public Backend {
 public:
  explicit HttpBackend(HttpConfig cfg) : cfg_(std::move(cfg)) {}
  CompletionResult complete(const CompletionRequest& request) override;
  std::string name() const override { return "http"; }

 private:
  HttpConfig cfg_;
};

struct EmbeddingVector {
  std::vector<double> values;
  std::size_t dim() const { return values.size(); }
};

double cosine_similarity(const EmbeddingVector& a, const EmbeddingVector& b);

class EmbeddingBackend {
 public:
  virtual ~EmbeddingBackend() = default;
  virtual EmbeddingVector embed(const std::string& text) = 0;
  virtual std::string name() const = 0;
};

// Deterministic unit vectors (dim 64) seeded from the text content, so
// identical strings embed identically across processes. Strings of the form
// "axis:<k>" map to exact basis vectors, giving tests constructed
// orthogonality.
class MockEmbeddingBackend final : public EmbeddingBackend {
 public:
  static constexpr std::size_t kDim = 64;
  EmbeddingVector embed(const std::string& text) override;
  std::string name() const override { return "mock"; }
};

class HttpEmbeddingBackend final : public EmbeddingBackend {
 public:
  explicit HttpEmbeddingBackend(HttpConfig cfg) : cfg_(std::move(cfg)) {}
  EmbeddingVector embed(const std::string& text) override;
  std::string name() const override { return "http"; }

 private:
  HttpConfig cfg_;
};

// Records/replays embeddings through the same JSONL cache format.
class CachedEmbeddingBackend final : public EmbeddingBackend {
 public:
  // inner == nullptr means replay-only; misses raise CacheMiss.
  CachedEmbeddingBackend(std::shared_ptr<EmbeddingBackend> inner,
                         std::shared_ptr<ReplayCache> cache)
      : inner_(std::move(inner)), cache_(std::move(cache)) {}
  EmbeddingVector embed(const std::string& text) override;
  std::string name() const override;

 private:
  std::shared_ptr<EmbeddingBackend> inner_;
  std::shared_ptr<ReplayCache> cache_;
};

}  // namespace laip::provider
