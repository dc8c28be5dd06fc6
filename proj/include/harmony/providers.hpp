#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "harmony/embedding.hpp"
#include "harmony/text_prep.hpp"

namespace harmony {

/// hash_embed behind the provider contract; each model id gets its own seed.
class HashEmbedProvider final : public EmbeddingProvider {
 public:
  explicit HashEmbedProvider(int dim = 256, std::uint64_t seed = 0) : dim_(dim), seed_(seed) {}
  std::vector<EmbeddingVector> embed(const std::string& model_id,
                                     std::span<const std::string> texts) override;
  std::string describe() const override { return "hash-embed(dim=" + std::to_string(dim_) + ")"; }

 private:
  int dim_;
  std::uint64_t seed_;
};

/// Precomputed vectors. File layout, little-endian:
///   "HVEC" u32 version=1 | u32 id_len, id bytes | u32 dim | u64 count
///   count x (sha256(text)[32] | f32[dim])
class VectorFileProvider final : public EmbeddingProvider {
 public:
  explicit VectorFileProvider(const std::vector<std::filesystem::path>& files);
  std::vector<EmbeddingVector> embed(const std::string& model_id,
                                     std::span<const std::string> texts) override;
  std::string describe() const override;

 private:
  std::vector<std::filesystem::path> files_;
  std::map<std::string, std::map<ContentHash, Eigen::VectorXf>> vectors_;
};

void write_vector_file(const std::filesystem::path& path, const std::string& model_id,
                       std::span<const std::string> texts, std::span<const EmbeddingVector> vectors);

/// `HARMONY_EMBED_ENDPOINT` when set, otherwise `configured`.
std::string resolve_endpoint(const std::string& configured);
/// `HARMONY_CACHE_DIR` when set, otherwise `configured`.
std::optional<std::filesystem::path> resolve_cache_dir(const std::optional<std::filesystem::path>& configured);

/// Client for the embedding sidecar: POST /embed {model_id, texts} -> {dim, vectors}.
class HttpEmbeddingProvider final : public EmbeddingProvider {
 public:
  explicit HttpEmbeddingProvider(std::string endpoint, int timeout_seconds = 120);
  std::vector<EmbeddingVector> embed(const std::string& model_id,
                                     std::span<const std::string> texts) override;
  std::string describe() const override { return endpoint_; }

 private:
  std::string endpoint_;
  int timeout_seconds_;
};

/// Client for the sidecar's POST /keywords {text, max_words} -> {keywords}.
class HttpKeywordProvider final : public KeywordProvider {
 public:
  explicit HttpKeywordProvider(std::string endpoint, int timeout_seconds = 120);
  std::string extract(std::string_view text, std::size_t max_words) override;

 private:
  std::string endpoint_;
  int timeout_seconds_;
};

/// Keyword extraction that falls back to term frequency when the primary
/// provider is unreachable.
class FallbackKeywords final : public KeywordProvider {
 public:
  FallbackKeywords(KeywordProvider& primary, KeywordProvider& fallback)
      : primary_(&primary), fallback_(&fallback) {}
  std::string extract(std::string_view text, std::size_t max_words) override;

 private:
  KeywordProvider* primary_;
  KeywordProvider* fallback_;
};

}  // namespace harmony
