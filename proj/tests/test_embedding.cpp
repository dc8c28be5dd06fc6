#include "doctest.h"

#include <cmath>
#include <fstream>
#include <thread>

#include "harmony/embedding.hpp"
#include "harmony/providers.hpp"
#include "harmony/rng.hpp"
#include "test_util.hpp"

#include "httplib.h"
#include "json.hpp"

using namespace harmony;

namespace {

// Counts calls and texts; delegates to hash_embed.
class CountingProvider final : public EmbeddingProvider {
 public:
  std::vector<EmbeddingVector> embed(const std::string& model_id, std::span<const std::string> texts) override {
    ++calls;
    texts_seen += texts.size();
    std::vector<EmbeddingVector> out;
    for (const auto& t : texts) out.push_back(hash_embed(t, 32, 9, model_id));
    if (scale != 1.0f)
      for (auto& v : out) v.values *= scale;
    return out;
  }
  std::string describe() const override { return "counting"; }
  int calls = 0;
  std::size_t texts_seen = 0;
  float scale = 1.0f;
};

class DownProvider final : public EmbeddingProvider {
 public:
  std::vector<EmbeddingVector> embed(const std::string&, std::span<const std::string>) override {
    throw Error(ErrorCode::ProviderUnavailable, "http://sidecar.invalid:9");
  }
  std::string describe() const override { return "http://sidecar.invalid:9"; }
};

std::vector<std::string> words(Rng& rng, std::size_t n, const std::string& prefix) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(prefix + std::to_string(rng.uniform_index(1000000)));
  return out;
}

std::string join(const std::vector<std::string>& w) {
  std::string s;
  for (const auto& x : w) s += x + " ";
  return s;
}

}  // namespace

TEST_CASE("cosine similarity") {
  Eigen::Vector2f e(0.6f, 0.8f), x(1, 0), y(0, 1), d(1, 1);
  CHECK(cosine_similarity(e, e) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(cosine_similarity(x, y) == 0.0);
  CHECK(cosine_similarity(d / std::sqrt(2.0f), x) == doctest::Approx(0.70711).epsilon(1e-5));
  CHECK(cosine_similarity(Eigen::Vector2f::Zero(), x) == 0.0);
  EmbeddingVector a{"m", Eigen::VectorXf::Ones(3)}, b{"m", Eigen::VectorXf::Ones(4)};
  CHECK_THROWS_AS(cosine(a, b), Error);
}

TEST_CASE("hash_embed") {
  const auto v = hash_embed("Body Mass Index", 256, 1);
  CHECK(v.dim() == 256);
  CHECK(v.values.norm() == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(cosine_similarity(v.values, hash_embed("body mass index", 256, 1).values) == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(hash_embed("", 256, 1).values.norm() == doctest::Approx(1.0).epsilon(1e-6));

  const auto abc = hash_embed("a b c", 256, 4), abcd = hash_embed("a b c d", 256, 4), xyz = hash_embed("x y z", 256, 4);
  CHECK(cosine_similarity(abc.values, abcd.values) > cosine_similarity(abc.values, xyz.values));

  Rng rng(3);
  for (int i = 0; i < 100; ++i) {
    const auto a = hash_embed(join(words(rng, 4, "a")), 256, 0), b = hash_embed(join(words(rng, 4, "b")), 256, 0);
    CHECK(std::abs(cosine_similarity(a.values, b.values)) < 0.3);
  }
}

TEST_CASE("cache serves repeats without calling the provider") {
  CountingProvider p;
  EmbeddingCache cache;
  std::vector<std::string> texts = {"alpha", "beta", "gamma"};
  EmbedStats stats;
  const auto first = embed_batch(texts, "m", &p, cache, 2, &stats);
  CHECK(p.calls == 2);
  REQUIRE(first.size() == 3);
  for (std::size_t i = 0; i < 3; ++i) CHECK(first[i].values == hash_embed(texts[i], 32, 9, "m").values);

  const auto again = embed_batch(std::vector<std::string>{"beta"}, "m", &p, cache, 2, &stats);
  CHECK(p.calls == 2);
  CHECK(again[0].values == first[1].values);
  CHECK(stats.cache_hits == 1);

  // Duplicates inside one batch reach the provider once.
  const auto dup = embed_batch(std::vector<std::string>{"delta", "delta"}, "m", &p, cache, 8);
  CHECK(p.texts_seen == 4);
  CHECK(dup[0].values == dup[1].values);
}

TEST_CASE("provider failures") {
  EmbeddingCache cache;
  DownProvider down;
  try {
    embed_batch(std::vector<std::string>{"x"}, "m", &down, cache);
    FAIL("no error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::ProviderUnavailable);
    CHECK(std::string(e.what()).find("sidecar.invalid") != std::string::npos);
  }
  CHECK_THROWS_AS(embed_batch(std::vector<std::string>{"x"}, "m", nullptr, cache), Error);

  CountingProvider bad;
  bad.scale = 2.0f;
  try {
    embed_batch(std::vector<std::string>{"x"}, "m", &bad, cache);
    FAIL("no error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NotUnitNorm);
  }
}

TEST_CASE("disk cache persists and survives a torn tail") {
  TempDir dir("cache");
  CountingProvider p;
  std::vector<std::string> texts = {"one", "two", "three"};
  {
    EmbeddingCache cache(dir.path());
    embed_batch(texts, "e5-large-v2", &p, cache);
  }
  CHECK(p.calls == 1);
  {
    EmbeddingCache cache(dir.path());
    const auto v = embed_batch(texts, "e5-large-v2", nullptr, cache);
    CHECK(v[2].values == hash_embed("three", 32, 9, "e5-large-v2").values);
    CHECK(cache.size("e5-large-v2") == 3);
  }
  // Append garbage as if a write was interrupted.
  std::filesystem::path log;
  for (const auto& e : std::filesystem::recursive_directory_iterator(dir.path()))
    if (e.path().filename() == "vectors.log") log = e.path();
  REQUIRE_FALSE(log.empty());
  {
    std::ofstream out(log, std::ios::binary | std::ios::app);
    out << "HVR1\x01\x02";
  }
  {
    EmbeddingCache cache(dir.path());
    CHECK(cache.size("e5-large-v2") == 3);
    embed_batch(std::vector<std::string>{"four"}, "e5-large-v2", &p, cache);
  }
  EmbeddingCache cache(dir.path());
  CHECK(cache.size("e5-large-v2") == 4);
  cache.evict_memory();
  CHECK(cache.get("e5-large-v2", sha256("four")).has_value());
  CHECK_FALSE(cache.get("other-model", sha256("four")).has_value());
}

TEST_CASE("vector file round trip") {
  TempDir dir("vec");
  std::vector<std::string> texts = {"sex", "age at baseline"};
  std::vector<EmbeddingVector> vecs = {hash_embed(texts[0], 16, 1, "mini"), hash_embed(texts[1], 16, 1, "mini")};
  write_vector_file(dir / "mini.hvec", "mini", texts, vecs);
  VectorFileProvider provider({dir / "mini.hvec"});
  const auto got = provider.embed("mini", texts);
  CHECK(got[1].values == vecs[1].values);
  CHECK_THROWS_AS(provider.embed("mini", std::vector<std::string>{"unknown"}), Error);
  CHECK_THROWS_AS(provider.embed("other", texts), Error);
}

TEST_CASE("http providers speak the sidecar wire format") {
  httplib::Server server;
  nlohmann::json last_embed;
  server.Post("/embed", [&](const httplib::Request& req, httplib::Response& res) {
    last_embed = nlohmann::json::parse(req.body);
    nlohmann::json vectors = nlohmann::json::array();
    for (const auto& t : last_embed["texts"]) {
      const auto v = hash_embed(t.get<std::string>(), 8, 0);
      vectors.push_back(std::vector<float>(v.values.data(), v.values.data() + v.dim()));
    }
    res.set_content(nlohmann::json{{"dim", 8}, {"vectors", vectors}}.dump(), "application/json");
  });
  server.Post("/keywords", [&](const httplib::Request& req, httplib::Response& res) {
    const auto body = nlohmann::json::parse(req.body);
    CHECK(body["max_words"] == 15);
    res.set_content(R"({"keywords":"cost sum"})", "application/json");
  });
  const int port = server.bind_to_any_port("127.0.0.1");
  std::thread t([&] { server.listen_after_bind(); });
  server.wait_until_ready();
  const std::string endpoint = "http://127.0.0.1:" + std::to_string(port);

  HttpEmbeddingProvider http(endpoint);
  const auto v = http.embed("minilm-l12-all", std::vector<std::string>{"a b", "c"});
  CHECK(last_embed["model_id"] == "minilm-l12-all");
  REQUIRE(v.size() == 2);
  CHECK(v[0].dim() == 8);
  CHECK(v[0].values.isApprox(hash_embed("a b", 8, 0).values));

  HttpKeywordProvider kw(endpoint);
  std::string long_rule;
  for (int i = 0; i < 30; ++i) long_rule += "monthly caregiver cost ";
  CHECK(derive_keyword_text(long_rule, kw) == "cost sum");

  server.stop();
  t.join();

  HttpEmbeddingProvider dead("http://127.0.0.1:1", 2);
  try {
    dead.embed("m", std::vector<std::string>{"x"});
    FAIL("no error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::ProviderUnavailable);
    CHECK(std::string(e.what()).find("127.0.0.1:1") != std::string::npos);
  }
  HttpKeywordProvider dead_kw("http://127.0.0.1:1", 2);
  TermFrequencyKeywords tf;
  FallbackKeywords fb(dead_kw, tf);
  CHECK(fb.extract("cost cost sum", 1) == "cost");
}

TEST_CASE("environment overrides") {
  ::setenv("HARMONY_EMBED_ENDPOINT", "http://env:1", 1);
  CHECK(resolve_endpoint("http://cfg:2") == "http://env:1");
  ::unsetenv("HARMONY_EMBED_ENDPOINT");
  CHECK(resolve_endpoint("http://cfg:2") == "http://cfg:2");
}
