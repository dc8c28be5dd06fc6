#include "harmony/providers.hpp"

#include <cstdlib>
#include <cstring>
#include <fstream>

#include "harmony/io.hpp"

#include "httplib.h"
#include "json.hpp"

namespace harmony {

namespace {

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}
void put_u64(std::string& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

class Reader {
 public:
  Reader(std::string data, std::string origin) : data_(std::move(data)), origin_(std::move(origin)) {}
  const char* take(std::size_t n) {
    if (pos_ + n > data_.size()) throw Error(ErrorCode::ParseError, "truncated vector file " + origin_);
    const char* p = data_.data() + pos_;
    pos_ += n;
    return p;
  }
  std::uint32_t u32() {
    const char* p = take(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(static_cast<unsigned char>(p[i])) << (8 * i);
    return v;
  }
  std::uint64_t u64() {
    const char* p = take(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(static_cast<unsigned char>(p[i])) << (8 * i);
    return v;
  }
  float f32() {
    const std::uint32_t bits = u32();
    float f;
    std::memcpy(&f, &bits, 4);
    return f;
  }

 private:
  std::string data_;
  std::string origin_;
  std::size_t pos_ = 0;
};

// "http://host:port" -> client; unreachable endpoints surface as ProviderUnavailable.
httplib::Client make_client(const std::string& endpoint, int timeout_seconds) {
  httplib::Client client(endpoint);
  client.set_connection_timeout(5, 0);
  client.set_read_timeout(timeout_seconds, 0);
  client.set_write_timeout(timeout_seconds, 0);
  return client;
}

nlohmann::json post_json(const std::string& endpoint, int timeout_seconds, const std::string& path,
                         const nlohmann::json& body) {
  auto client = make_client(endpoint, timeout_seconds);
  auto res = client.Post(path, body.dump(), "application/json");
  if (!res)
    throw Error(ErrorCode::ProviderUnavailable,
                "embedding service at " + endpoint + " unreachable (" + httplib::to_string(res.error()) + ")");
  if (res->status != 200)
    throw Error(ErrorCode::ProviderUnavailable, "embedding service at " + endpoint + path +
                                                    " returned HTTP " + std::to_string(res->status) +
                                                    ": " + res->body);
  try {
    return nlohmann::json::parse(res->body);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ProviderUnavailable,
                "malformed response from " + endpoint + path + ": " + e.what());
  }
}

}  // namespace

std::vector<EmbeddingVector> HashEmbedProvider::embed(const std::string& model_id,
                                                      std::span<const std::string> texts) {
  const std::uint64_t seed = fnv1a64(model_id, seed_);
  std::vector<EmbeddingVector> out;
  out.reserve(texts.size());
  for (const auto& t : texts) out.push_back(hash_embed(t, dim_, seed, model_id));
  return out;
}

VectorFileProvider::VectorFileProvider(const std::vector<std::filesystem::path>& files)
    : files_(files) {
  for (const auto& path : files) {
    Reader in(io::read_text(path), path.string());
    if (std::string_view(in.take(4), 4) != "HVEC")
      throw Error(ErrorCode::ParseError, "not a vector file: " + path.string());
    if (const auto version = in.u32(); version != 1)
      throw Error(ErrorCode::ParseError, "unsupported vector file version " + std::to_string(version));
    const auto id_len = in.u32();
    std::string model_id(in.take(id_len), id_len);
    const auto dim = in.u32();
    const auto count = in.u64();
    auto& table = vectors_[model_id];
    for (std::uint64_t r = 0; r < count; ++r) {
      ContentHash key;
      std::memcpy(key.data(), in.take(32), 32);
      Eigen::VectorXf v(dim);
      for (std::uint32_t i = 0; i < dim; ++i) v[i] = in.f32();
      table[key] = std::move(v);
    }
  }
}

std::vector<EmbeddingVector> VectorFileProvider::embed(const std::string& model_id,
                                                       std::span<const std::string> texts) {
  auto table = vectors_.find(model_id);
  if (table == vectors_.end())
    throw Error(ErrorCode::ProviderUnavailable, "no vector file for model " + model_id + " in " + describe());
  std::vector<EmbeddingVector> out;
  out.reserve(texts.size());
  for (const auto& t : texts) {
    auto it = table->second.find(sha256(t));
    if (it == table->second.end())
      throw Error(ErrorCode::ProviderUnavailable,
                  "text missing from vector file for model " + model_id + ": \"" + t + "\"");
    out.push_back(EmbeddingVector{model_id, it->second});
  }
  return out;
}

std::string VectorFileProvider::describe() const {
  std::string out = "vector-file(";
  for (std::size_t i = 0; i < files_.size(); ++i) {
    if (i) out += ", ";
    out += files_[i].string();
  }
  return out + ")";
}

void write_vector_file(const std::filesystem::path& path, const std::string& model_id,
                       std::span<const std::string> texts, std::span<const EmbeddingVector> vectors) {
  if (texts.size() != vectors.size())
    throw Error(ErrorCode::LengthMismatch, "texts and vectors differ in length");
  const std::uint32_t dim = vectors.empty() ? 0 : static_cast<std::uint32_t>(vectors.front().dim());
  std::string out = "HVEC";
  put_u32(out, 1);
  put_u32(out, static_cast<std::uint32_t>(model_id.size()));
  out += model_id;
  put_u32(out, dim);
  put_u64(out, texts.size());
  for (std::size_t i = 0; i < texts.size(); ++i) {
    if (static_cast<std::uint32_t>(vectors[i].dim()) != dim)
      throw Error(ErrorCode::DimMismatch, "vector " + std::to_string(i));
    const auto key = sha256(texts[i]);
    out.append(reinterpret_cast<const char*>(key.data()), key.size());
    for (Eigen::Index d = 0; d < vectors[i].dim(); ++d) {
      std::uint32_t bits;
      const float f = vectors[i].values[d];
      std::memcpy(&bits, &f, 4);
      put_u32(out, bits);
    }
  }
  io::write_text_atomic(path, out);
}

std::string resolve_endpoint(const std::string& configured) {
  if (const char* env = std::getenv("HARMONY_EMBED_ENDPOINT"); env && *env) return env;
  return configured;
}

std::optional<std::filesystem::path> resolve_cache_dir(
    const std::optional<std::filesystem::path>& configured) {
  if (const char* env = std::getenv("HARMONY_CACHE_DIR"); env && *env) return std::filesystem::path(env);
  return configured;
}

HttpEmbeddingProvider::HttpEmbeddingProvider(std::string endpoint, int timeout_seconds)
    : endpoint_(std::move(endpoint)), timeout_seconds_(timeout_seconds) {}

std::vector<EmbeddingVector> HttpEmbeddingProvider::embed(const std::string& model_id,
                                                          std::span<const std::string> texts) {
  nlohmann::json body = {{"model_id", model_id}, {"texts", std::vector<std::string>(texts.begin(), texts.end())}};
  const auto reply = post_json(endpoint_, timeout_seconds_, "/embed", body);
  if (!reply.contains("vectors") || !reply["vectors"].is_array())
    throw Error(ErrorCode::ProviderUnavailable, "response from " + endpoint_ + " has no vectors");
  std::vector<EmbeddingVector> out;
  for (const auto& row : reply["vectors"]) {
    EmbeddingVector v{model_id, Eigen::VectorXf(static_cast<Eigen::Index>(row.size()))};
    for (std::size_t i = 0; i < row.size(); ++i) v.values[static_cast<Eigen::Index>(i)] = row[i].get<float>();
    out.push_back(std::move(v));
  }
  if (reply.contains("dim")) {
    const auto dim = reply["dim"].get<Eigen::Index>();
    for (const auto& v : out)
      if (v.dim() != dim) throw Error(ErrorCode::DimMismatch, "declared dim " + std::to_string(dim));
  }
  return out;
}

HttpKeywordProvider::HttpKeywordProvider(std::string endpoint, int timeout_seconds)
    : endpoint_(std::move(endpoint)), timeout_seconds_(timeout_seconds) {}

std::string HttpKeywordProvider::extract(std::string_view text, std::size_t max_words) {
  nlohmann::json body = {{"text", std::string(text)}, {"max_words", max_words}};
  const auto reply = post_json(endpoint_, timeout_seconds_, "/keywords", body);
  if (!reply.contains("keywords") || !reply["keywords"].is_string())
    throw Error(ErrorCode::ProviderUnavailable, "response from " + endpoint_ + " has no keywords");
  return reply["keywords"].get<std::string>();
}

std::string FallbackKeywords::extract(std::string_view text, std::size_t max_words) {
  try {
    return primary_->extract(text, max_words);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::ProviderUnavailable) throw;
    return fallback_->extract(text, max_words);
  }
}

}  // namespace harmony
