#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "harmony/error.hpp"
#include "harmony/hashing.hpp"

namespace harmony {

/// Unit-normalized sentence embedding tagged with the model that produced it.
struct EmbeddingVector {
  std::string model_id;
  Eigen::VectorXf values;

  Eigen::Index dim() const noexcept { return values.size(); }
};

inline constexpr double kUnitNormTolerance = 1e-5;

/// dot(u, v) / (|u| |v|) accumulated in double. Zero vectors give 0.
template <typename DerivedA, typename DerivedB>
double cosine_similarity(const Eigen::MatrixBase<DerivedA>& u, const Eigen::MatrixBase<DerivedB>& v) {
  const auto ud = u.template cast<double>();
  const auto vd = v.template cast<double>();
  const double denom = ud.norm() * vd.norm();
  if (denom == 0.0) return 0.0;
  return ud.dot(vd) / denom;
}

/// Throws DimMismatch when the dimensions differ.
double cosine(const EmbeddingVector& u, const EmbeddingVector& v);

/// Deterministic offline embedder: every alphanumeric token (lowercased) is
/// hashed to one of `dim` buckets with a +1/-1 sign, and the bucket vector
/// is unit-normalized. Token-free text maps to a fixed seed-derived bucket.
EmbeddingVector hash_embed(std::string_view text, int dim, std::uint64_t seed,
                           std::string model_id = "hash");

/// Transport-agnostic source of embeddings. Implementations return one
/// unit-norm vector per text, in order.
class EmbeddingProvider {
 public:
  virtual ~EmbeddingProvider() = default;
  virtual std::vector<EmbeddingVector> embed(const std::string& model_id,
                                             std::span<const std::string> texts) = 0;
  /// Human-readable location, used in diagnostics.
  virtual std::string describe() const = 0;
};

/// Two-level cache keyed by (model_id, SHA-256 of the text): an in-memory
/// map in front of an append-only log per model under `root`. Each record
/// carries its own checksum, so a torn tail write is dropped on reload.
class EmbeddingCache {
 public:
  /// Memory-only cache.
  EmbeddingCache() = default;
  explicit EmbeddingCache(std::filesystem::path root);

  std::optional<EmbeddingVector> get(const std::string& model_id, const ContentHash& key);
  /// Persists before returning. Re-putting a key keeps the newest value.
  void put(const std::string& model_id,
           std::span<const std::pair<ContentHash, EmbeddingVector>> entries);
  /// Drops the in-memory layer; the next get re-reads from disk.
  void evict_memory();
  std::size_t size(const std::string& model_id);
  const std::optional<std::filesystem::path>& root() const noexcept { return root_; }

 private:
  struct ModelShard {
    std::map<ContentHash, Eigen::VectorXf> vectors;
    bool loaded = false;
  };
  ModelShard& shard(const std::string& model_id);
  std::filesystem::path shard_dir(const std::string& model_id) const;

  std::optional<std::filesystem::path> root_;
  std::map<std::string, ModelShard> shards_;
  std::mutex mutex_;
};

struct EmbedStats {
  std::size_t provider_calls = 0;
  std::size_t cache_hits = 0;
};

/// Cache-first batch embedding. Misses (deduplicated) go to `provider` in
/// chunks of `batch_size`, are validated for count, dim and unit norm, and
/// persisted before the call returns. `provider` may be null when the cache
/// is expected to be complete.
std::vector<EmbeddingVector> embed_batch(std::span<const std::string> texts,
                                         const std::string& model_id,
                                         EmbeddingProvider* provider, EmbeddingCache& cache,
                                         std::size_t batch_size = 64, EmbedStats* stats = nullptr);

}  // namespace harmony
