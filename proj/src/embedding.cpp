#include "harmony/embedding.hpp"

#include <cmath>
#include <unordered_map>

#include "harmony/rng.hpp"

namespace harmony {

double cosine(const EmbeddingVector& u, const EmbeddingVector& v) {
  if (u.dim() != v.dim())
    throw Error(ErrorCode::DimMismatch,
                std::to_string(u.dim()) + " vs " + std::to_string(v.dim()));
  return cosine_similarity(u.values, v.values);
}

EmbeddingVector hash_embed(std::string_view text, int dim, std::uint64_t seed,
                           std::string model_id) {
  if (dim < 8) throw Error(ErrorCode::InvalidArgument, "hash_embed dim must be >= 8");
  Eigen::VectorXd acc = Eigen::VectorXd::Zero(dim);
  std::string token;
  bool any = false;
  auto flush = [&] {
    if (token.empty()) return;
    const std::uint64_t h = mix64(fnv1a64(token, seed));
    const auto bucket = static_cast<Eigen::Index>(h % static_cast<std::uint64_t>(dim));
    acc[bucket] += (h >> 63) ? -1.0 : 1.0;
    any = true;
    token.clear();
  };
  for (char c : text) {
    const auto u = static_cast<unsigned char>(c);
    if ((u >= 'a' && u <= 'z') || (u >= '0' && u <= '9') || u >= 0x80) {
      token.push_back(c);
    } else if (u >= 'A' && u <= 'Z') {
      token.push_back(static_cast<char>(u - 'A' + 'a'));
    } else {
      flush();
    }
  }
  flush();

  // Tokens can cancel inside a bucket; fall back to the empty-text vector.
  if (!any || acc.squaredNorm() == 0.0) {
    acc.setZero();
    acc[static_cast<Eigen::Index>(mix64(seed) % static_cast<std::uint64_t>(dim))] = 1.0;
  }
  acc.normalize();
  return EmbeddingVector{std::move(model_id), acc.cast<float>()};
}

std::vector<EmbeddingVector> embed_batch(std::span<const std::string> texts,
                                         const std::string& model_id,
                                         EmbeddingProvider* provider, EmbeddingCache& cache,
                                         std::size_t batch_size, EmbedStats* stats) {
  if (texts.empty()) throw Error(ErrorCode::InvalidArgument, "embed_batch with no texts");
  if (batch_size == 0) batch_size = 1;

  std::vector<ContentHash> keys;
  keys.reserve(texts.size());
  for (const auto& t : texts) keys.push_back(sha256(t));

  std::vector<std::optional<EmbeddingVector>> resolved(texts.size());
  std::vector<std::size_t> miss_text;  // index of first text for each unique miss
  std::map<ContentHash, std::size_t> miss_slot;
  for (std::size_t i = 0; i < texts.size(); ++i) {
    if (miss_slot.contains(keys[i])) continue;
    if (auto hit = cache.get(model_id, keys[i])) {
      resolved[i] = std::move(hit);
      if (stats) ++stats->cache_hits;
    } else {
      miss_slot.emplace(keys[i], miss_text.size());
      miss_text.push_back(i);
    }
  }

  std::vector<EmbeddingVector> fetched;
  fetched.reserve(miss_text.size());
  if (!miss_text.empty()) {
    if (provider == nullptr)
      throw Error(ErrorCode::ProviderUnavailable,
                  "no embedding provider configured and cache is missing " +
                      std::to_string(miss_text.size()) + " vectors for model " + model_id);
    std::optional<Eigen::Index> dim;
    for (std::size_t start = 0; start < miss_text.size(); start += batch_size) {
      const std::size_t end = std::min(miss_text.size(), start + batch_size);
      std::vector<std::string> chunk;
      for (std::size_t m = start; m < end; ++m) chunk.push_back(texts[miss_text[m]]);
      auto vectors = provider->embed(model_id, chunk);
      if (stats) ++stats->provider_calls;
      if (vectors.size() != chunk.size())
        throw Error(ErrorCode::DimMismatch, "provider returned " + std::to_string(vectors.size()) +
                                                " vectors for " + std::to_string(chunk.size()) +
                                                " texts");
      std::vector<std::pair<ContentHash, EmbeddingVector>> entries;
      for (std::size_t m = 0; m < vectors.size(); ++m) {
        auto& v = vectors[m];
        if (!dim) dim = v.dim();
        if (v.dim() != *dim || v.dim() == 0)
          throw Error(ErrorCode::DimMismatch, "inconsistent dims from " + provider->describe());
        const double norm = v.values.cast<double>().norm();
        if (std::abs(norm - 1.0) > kUnitNormTolerance)
          throw Error(ErrorCode::NotUnitNorm, "norm " + std::to_string(norm) + " from " +
                                                  provider->describe());
        v.model_id = model_id;
        entries.emplace_back(keys[miss_text[start + m]], v);
        fetched.push_back(std::move(v));
      }
      cache.put(model_id, entries);
    }
  }

  std::vector<EmbeddingVector> out;
  out.reserve(texts.size());
  for (std::size_t i = 0; i < texts.size(); ++i) {
    if (resolved[i]) {
      out.push_back(std::move(*resolved[i]));
    } else {
      out.push_back(fetched[miss_slot.at(keys[i])]);
    }
  }
  return out;
}

}  // namespace harmony
