#include "laip/provider.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>

#include <openssl/evp.h>

// httplib pulls in OpenSSL support only when asked; plain HTTP is enough here.
#include <httplib.h>

namespace laip::provider {

namespace {

std::string sha256_hex(const std::string& data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1)
    throw Error("sha256 digest failed");
  static const char hex[] = "0123456789abcdef";
  std::string out(len * 2, '0');
  for (unsigned int i = 0; i < len; ++i) {
    out[2 * i] = hex[digest[i] >> 4];
    out[2 * i + 1] = hex[digest[i] & 0xf];
  }
  return out;
}

std::string iso_timestamp() {
  auto now = std::chrono::system_clock::now();
  std::time_t t = std::chrono::system_clock::to_time_t(now);
  char buf[32];
  std::tm tm{};
  gmtime_r(&t, &tm);
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

// FNV-1a, used to seed the mock embedder; stable across processes unlike
// std::hash.
std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

std::pair<std::string, std::string> split_base_url(const std::string& base_url) {
  // "http://host:port/pfx" -> ("http://host:port", "/pfx")
  auto scheme = base_url.find("://");
  std::size_t host_start = scheme == std::string::npos ? 0 : scheme + 3;
  auto slash = base_url.find('/', host_start);
  if (slash == std::string::npos) return {base_url, ""};
  return {base_url.substr(0, slash), base_url.substr(slash)};
}

}  // namespace

nlohmann::json request_to_json(const CompletionRequest& r) {
  nlohmann::json j;
  j["model"] = r.model_id;
  auto& msgs = j["messages"] = nlohmann::json::array();
  for (const auto& m : r.messages) msgs.push_back({{"role", m.role}, {"content", m.text}});
  j["temperature"] = r.temperature;
  if (r.seed) j["seed"] = *r.seed;
  j["max_tokens"] = r.max_tokens;
  return j;
}

std::string request_digest(const CompletionRequest& r) {
  if (r.messages.empty()) throw Error("completion request has no messages");
  nlohmann::json j = request_to_json(r);
  j.erase("max_tokens");
  if (!r.seed) j["seed"] = nullptr;
  return sha256_hex(j.dump());
}

std::int64_t approx_tokens(const std::string& text) {
  return static_cast<std::int64_t>((text.size() + 3) / 4);
}

void ScriptedBackend::add(const CompletionRequest& request, std::string text) {
  add_digest(request_digest(request), std::move(text));
}

void ScriptedBackend::add_digest(std::string digest, std::string text) {
  std::lock_guard lock(mu_);
  responses_[std::move(digest)] = std::move(text);
}

std::size_t ScriptedBackend::size() const {
  std::lock_guard lock(mu_);
  return responses_.size();
}

CompletionResult ScriptedBackend::complete(const CompletionRequest& request) {
  const std::string digest = request_digest(request);
  std::lock_guard lock(mu_);
  auto it = responses_.find(digest);
  if (it == responses_.end())
    throw CacheMiss("no scripted response for digest " + digest.substr(0, 12));
  CompletionResult res;
  res.text = it->second;
  res.backend = name();
  std::int64_t prompt = 0;
  for (const auto& m : request.messages) prompt += approx_tokens(m.text);
  res.usage = {prompt, approx_tokens(res.text)};
  return res;
}

CompletionResult CallbackBackend::complete(const CompletionRequest& request) {
  CompletionResult res;
  res.text = fn_(request);
  if (res.text.empty()) throw BackendRefusal("callback backend returned empty text");
  res.backend = label_;
  std::int64_t prompt = 0;
  for (const auto& m : request.messages) prompt += approx_tokens(m.text);
  res.usage = {prompt, approx_tokens(res.text)};
  return res;
}

ReplayCache::ReplayCache(std::filesystem::path file) : path_(std::move(file)) {
  std::ifstream in(path_);
  if (!in.is_open()) return;  // fresh cache
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto j = nlohmann::json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.contains("digest") || !j.contains("response_text"))
      throw IoError("malformed cache line in " + path_.string());
    index_[j["digest"].get<std::string>()] = j["response_text"].get<std::string>();
  }
}

std::optional<std::string> ReplayCache::lookup(const std::string& digest) const {
  std::lock_guard lock(mu_);
  auto it = index_.find(digest);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

void ReplayCache::append(const std::string& digest, const nlohmann::json& request,
                         const std::string& response_text) {
  std::lock_guard lock(mu_);
  if (index_.count(digest)) return;  // first write wins
  nlohmann::json rec;
  rec["digest"] = digest;
  rec["request"] = request;
  rec["response_text"] = response_text;
  rec["timestamp"] = iso_timestamp();
  std::error_code ec;
  if (path_.has_parent_path()) std::filesystem::create_directories(path_.parent_path(), ec);
  std::ofstream out(path_, std::ios::app);
  if (!out.is_open()) throw IoError("cannot append to cache " + path_.string());
  out << rec.dump() << "\n";
  out.flush();
  if (!out.good()) throw IoError("write to cache failed: " + path_.string());
  index_[digest] = response_text;
}

std::size_t ReplayCache::size() const {
  std::lock_guard lock(mu_);
  return index_.size();
}

CompletionResult ReplayBackend::complete(const CompletionRequest& request) {
  const std::string digest = request_digest(request);
  auto hit = cache_->lookup(digest);
  if (!hit)
    throw CacheMiss("replay cache has no entry for digest " + digest.substr(0, 12));
  CompletionResult res;
  res.text = *hit;
  res.backend = name();
  res.cache_hit = true;
  std::int64_t prompt = 0;
  for (const auto& m : request.messages) prompt += approx_tokens(m.text);
  res.usage = {prompt, approx_tokens(res.text)};
  return res;
}

CompletionResult RecordingBackend::complete(const CompletionRequest& request) {
  const std::string digest = request_digest(request);
  if (auto hit = cache_->lookup(digest)) {
    CompletionResult res;
    res.text = *hit;
    res.backend = name();
    res.cache_hit = true;
    std::int64_t prompt = 0;
    for (const auto& m : request.messages) prompt += approx_tokens(m.text);
    res.usage = {prompt, approx_tokens(res.text)};
    return res;
  }
  CompletionResult res = inner_->complete(request);
  cache_->append(digest, request_to_json(request), res.text);
  return res;
}

CompletionResult HttpBackend::complete(const CompletionRequest& request) {
  auto [host, prefix] = split_base_url(cfg_.base_url);
  httplib::Client client(host);
  client.set_read_timeout(cfg_.timeout_seconds, 0);
  client.set_connection_timeout(10, 0);

  httplib::Headers headers;
  if (const char* key = std::getenv(cfg_.api_key_env.c_str()); key && *key)
    headers.emplace("Authorization", std::string("Bearer ") + key);

  nlohmann::json body = request_to_json(request);
  auto res = client.Post((prefix + cfg_.completions_path).c_str(), headers, body.dump(),
                         "application/json");
  if (!res)
    throw TransportError("request to " + cfg_.base_url + " failed: " +
                         httplib::to_string(res.error()));
  if (res->status < 200 || res->status >= 300)
    throw TransportError("backend returned HTTP " + std::to_string(res->status) + ": " +
                         res->body.substr(0, 200));

  auto j = nlohmann::json::parse(res->body, nullptr, false);
  if (j.is_discarded()) throw TransportError("backend returned non-JSON body");
  if (j.contains("error"))
    throw BackendRefusal(j["error"].value("message", "backend refused the request"));
  if (!j.contains("choices") || j["choices"].empty())
    throw BackendRefusal("backend response has no choices");

  CompletionResult out;
  out.text = j["choices"][0].value("message", nlohmann::json::object())
                 .value("content", std::string());
  if (out.text.empty()) throw BackendRefusal("backend returned empty completion");
  out.backend = name();
  if (j.contains("usage")) {
    out.usage.prompt_tokens = j["usage"].value("prompt_tokens", 0);
    out.usage.completion_tokens = j["usage"].value("completion_tokens", 0);
  } else {
    std::int64_t prompt = 0;
    for (const auto& m : request.messages) prompt += approx_tokens(m.text);
    out.usage = {prompt, approx_tokens(out.text)};
  }
  return out;
}

double cosine_similarity(const EmbeddingVector& a, const EmbeddingVector& b) {
  if (a.dim() != b.dim() || a.dim() == 0)
    throw DimensionMismatch("embedding dimensions differ");
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.dim(); ++i) {
    dot += a.values[i] * b.values[i];
    na += a.values[i] * a.values[i];
    nb += b.values[i] * b.values[i];
  }
  if (na <= 0.0 || nb <= 0.0) throw DegenerateInput("zero-norm embedding");
  return dot / (std::sqrt(na) * std::sqrt(nb));
}

EmbeddingVector MockEmbeddingBackend::embed(const std::string& text) {
  EmbeddingVector v;
  v.values.assign(kDim, 0.0);
  if (text.rfind("axis:", 0) == 0) {
    std::size_t k = std::strtoull(text.c_str() + 5, nullptr, 10);
    v.values[k % kDim] = 1.0;
    return v;
  }
  std::mt19937_64 rng(fnv1a(text));
  std::normal_distribution<double> gauss(0.0, 1.0);
  double norm = 0.0;
  for (auto& x : v.values) {
    x = gauss(rng);
    norm += x * x;
  }
  norm = std::sqrt(norm);
  for (auto& x : v.values) x /= norm;
  return v;
}

EmbeddingVector HttpEmbeddingBackend::embed(const std::string& text) {
  auto [host, prefix] = split_base_url(cfg_.base_url);
  httplib::Client client(host);
  client.set_read_timeout(cfg_.timeout_seconds, 0);

  httplib::Headers headers;
  if (const char* key = std::getenv(cfg_.api_key_env.c_str()); key && *key)
    headers.emplace("Authorization", std::string("Bearer ") + key);

  nlohmann::json body{{"model", cfg_.embedding_model}, {"input", {text}}};
  auto res = client.Post((prefix + cfg_.embeddings_path).c_str(), headers, body.dump(),
                         "application/json");
  if (!res)
    throw TransportError("embedding request failed: " + httplib::to_string(res.error()));
  if (res->status < 200 || res->status >= 300)
    throw TransportError("embedding backend returned HTTP " + std::to_string(res->status));
  auto j = nlohmann::json::parse(res->body, nullptr, false);
  if (j.is_discarded() || !j.contains("data") || j["data"].empty())
    throw TransportError("embedding backend returned malformed body");
  EmbeddingVector v;
  for (const auto& x : j["data"][0].at("embedding")) v.values.push_back(x.get<double>());
  if (v.values.empty()) throw TransportError("embedding backend returned empty vector");
  return v;
}

EmbeddingVector CachedEmbeddingBackend::embed(const std::string& text) {
  const std::string digest = sha256_hex("embed\x1f" + text);
  if (auto hit = cache_->lookup(digest)) {
    EmbeddingVector v;
    for (const auto& x : nlohmann::json::parse(*hit)) v.values.push_back(x.get<double>());
    return v;
  }
  if (!inner_) throw CacheMiss("embedding cache has no entry for this text");
  EmbeddingVector v = inner_->embed(text);
  cache_->append(digest, nlohmann::json{{"embed", text}}, nlohmann::json(v.values).dump());
  return v;
}

std::string CachedEmbeddingBackend::name() const {
  return inner_ ? "record(" + inner_->name() + ")" : "replay-embeddings";
}

}  // namespace laip::provider
