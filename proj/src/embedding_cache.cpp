#include <cstring>
#include <fstream>

#include "harmony/embedding.hpp"
#include "harmony/io.hpp"

#include "json.hpp"

namespace harmony {

namespace {

constexpr std::uint32_t kRecordMagic = 0x31525648;  // "HVR1"

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}
void put_u64(std::string& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}
std::uint32_t get_u32(const char* p) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(static_cast<unsigned char>(p[i])) << (8 * i);
  return v;
}
std::uint64_t get_u64(const char* p) {
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(static_cast<unsigned char>(p[i])) << (8 * i);
  return v;
}
void put_f32(std::string& out, float f) {
  std::uint32_t bits;
  std::memcpy(&bits, &f, 4);
  put_u32(out, bits);
}
float get_f32(const char* p) {
  const std::uint32_t bits = get_u32(p);
  float f;
  std::memcpy(&f, &bits, 4);
  return f;
}

// magic | hash[32] | dim | f32[dim] | fnv1a64(hash..floats)
std::string encode_record(const ContentHash& key, const Eigen::VectorXf& values) {
  std::string rec;
  put_u32(rec, kRecordMagic);
  const std::size_t body_start = rec.size();
  rec.append(reinterpret_cast<const char*>(key.data()), key.size());
  put_u32(rec, static_cast<std::uint32_t>(values.size()));
  for (Eigen::Index i = 0; i < values.size(); ++i) put_f32(rec, values[i]);
  put_u64(rec, fnv1a64(std::string_view(rec).substr(body_start)));
  return rec;
}

std::string sanitize(const std::string& model_id) {
  std::string out;
  for (char c : model_id) {
    const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') ||
                    c == '-' || c == '_' || c == '.';
    out.push_back(ok ? c : '_');
  }
  return out;
}

}  // namespace

EmbeddingCache::EmbeddingCache(std::filesystem::path root) : root_(std::move(root)) {
  std::filesystem::create_directories(*root_);
}

std::filesystem::path EmbeddingCache::shard_dir(const std::string& model_id) const {
  return *root_ / (sanitize(model_id) + "-" + to_hex(sha256(model_id)).substr(0, 8));
}

EmbeddingCache::ModelShard& EmbeddingCache::shard(const std::string& model_id) {
  auto& s = shards_[model_id];
  if (s.loaded) return s;
  s.loaded = true;
  if (!root_) return s;
  const auto log = shard_dir(model_id) / "vectors.log";
  if (!std::filesystem::exists(log)) return s;
  const std::string data = io::read_text(log);
  std::size_t pos = 0;
  while (pos + 4 + 32 + 4 <= data.size()) {
    const char* p = data.data() + pos;
    if (get_u32(p) != kRecordMagic) break;
    const std::uint32_t dim = get_u32(p + 36);
    const std::size_t len = 4 + 32 + 4 + std::size_t{dim} * 4 + 8;
    if (pos + len > data.size()) break;
    const std::string_view body(p + 4, len - 12);
    if (fnv1a64(body) != get_u64(p + len - 8)) break;
    ContentHash key;
    std::memcpy(key.data(), p + 4, key.size());
    Eigen::VectorXf v(dim);
    for (std::uint32_t i = 0; i < dim; ++i) v[i] = get_f32(p + 40 + 4 * std::size_t{i});
    s.vectors[key] = std::move(v);
    pos += len;
  }
  // Drop a torn tail so later appends stay reachable.
  if (pos < data.size()) std::filesystem::resize_file(log, pos);
  return s;
}

std::optional<EmbeddingVector> EmbeddingCache::get(const std::string& model_id,
                                                   const ContentHash& key) {
  std::lock_guard lock(mutex_);
  auto& s = shard(model_id);
  auto it = s.vectors.find(key);
  if (it == s.vectors.end()) return std::nullopt;
  return EmbeddingVector{model_id, it->second};
}

void EmbeddingCache::put(const std::string& model_id,
                         std::span<const std::pair<ContentHash, EmbeddingVector>> entries) {
  if (entries.empty()) return;
  std::lock_guard lock(mutex_);
  auto& s = shard(model_id);
  std::string blob;
  for (const auto& [key, vec] : entries) {
    s.vectors[key] = vec.values;
    if (root_) blob += encode_record(key, vec.values);
  }
  if (!root_) return;
  const auto dir = shard_dir(model_id);
  std::filesystem::create_directories(dir);
  {
    std::ofstream out(dir / "vectors.log", std::ios::binary | std::ios::app);
    if (!out) throw Error(ErrorCode::IoError, "cannot append to cache in " + dir.string());
    out.write(blob.data(), static_cast<std::streamsize>(blob.size()));
    out.flush();
    if (!out) throw Error(ErrorCode::IoError, "short write to cache in " + dir.string());
  }
  nlohmann::json index = {{"model_id", model_id},
                          {"dim", entries.front().second.dim()},
                          {"count", s.vectors.size()},
                          {"format", "harmony-embedding-cache/1"}};
  io::write_text_atomic(dir / "index.json", index.dump(2) + "\n");
}

void EmbeddingCache::evict_memory() {
  std::lock_guard lock(mutex_);
  shards_.clear();
}

std::size_t EmbeddingCache::size(const std::string& model_id) {
  std::lock_guard lock(mutex_);
  return shard(model_id).vectors.size();
}

}  // namespace harmony
