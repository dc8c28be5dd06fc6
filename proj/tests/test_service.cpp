#include "doctest.h"

#include <fstream>
#include <thread>

#include "harmony/error.hpp"
#include "harmony/io.hpp"
#include "harmony/service.hpp"
#include "corpus_util.hpp"
#include "test_util.hpp"

#include "httplib.h"  // after Eigen: resolv.h defines _res

using namespace harmony;
using nlohmann::json;

namespace {

const SyntheticStore& fixture() {
  static const SyntheticStore s = [] {
    SyntheticSpec spec;
    spec.n_sources = 20;
    spec.n_targets = 60;
    spec.seed = 3;
    return synthetic_store(spec);
  }();
  return s;
}

ServiceConfig config_in(const TempDir& dir) {
  ServiceConfig c;
  c.model_dir = dir / "models";
  c.labels_path = dir / "labels.jsonl";
  c.retrain_params.n_trees = 20;
  c.negatives_per_source = 30;
  c.seed = 5;
  c.report_dir = dir / "reports";
  return c;
}

std::unique_ptr<MatchService> make_service(const ServiceConfig& c, bool with_gold = false) {
  const auto& f = fixture();
  return std::make_unique<MatchService>(c, f.corpus.sources, f.corpus.targets, f.store,
                                        with_gold ? f.corpus.gold : GoldPairs{});
}

// Live server on an ephemeral port for the lifetime of the object.
struct LiveServer {
  httplib::Server server;
  std::thread thread;
  int port = 0;

  explicit LiveServer(MatchService& svc) {
    svc.bind(server);
    port = server.bind_to_any_port("127.0.0.1");
    thread = std::thread([this] { server.listen_after_bind(); });
    server.wait_until_ready();
  }
  ~LiveServer() {
    server.stop();
    thread.join();
  }
  httplib::Client client() const { return httplib::Client("127.0.0.1", port); }
};

json body_of(const httplib::Result& r) {
  REQUIRE(r);
  return json::parse(r->body);
}

}  // namespace

TEST_CASE("read endpoints over HTTP") {
  TempDir dir("svc-read");
  auto svc = make_service(config_in(dir));
  LiveServer live(*svc);
  auto cli = live.client();

  auto health = cli.Get("/healthz");
  REQUIRE(health);
  CHECK(health->status == 200);
  const auto h = json::parse(health->body);
  CHECK(h["status"] == "ok");
  CHECK(h["time"].get<std::string>().back() == 'Z');

  const auto srcs = body_of(cli.Get("/api/sources"));
  CHECK(srcs["sources"].size() == 20);
  CHECK(srcs["sources"][0]["name"] == "S0001");

  auto cand = cli.Get("/api/sources/S0001/candidates?top=5&features=1");
  REQUIRE(cand);
  CHECK(cand->status == 200);
  CHECK(cand->get_header_value("Content-Type") == "application/json");
  const auto c = json::parse(cand->body);
  CHECK(c["model_version"] == "heuristic");
  REQUIRE(c["candidates"].size() == 5);
  double prev = 2.0;
  for (const auto& item : c["candidates"]) {
    CHECK(item["score"].get<double>() <= prev);
    prev = item["score"].get<double>();
    CHECK(item["features"].size() == 18);
    CHECK(item.contains("rank"));
    CHECK(item.contains("target"));
  }
  CHECK_FALSE(body_of(cli.Get("/api/sources/S0001/candidates"))["candidates"][0].contains("features"));
  CHECK(body_of(cli.Get("/api/sources/S0001/candidates"))["candidates"].size() == 10);

  auto missing = cli.Get("/api/sources/NOPE/candidates");
  REQUIRE(missing);
  CHECK(missing->status == 404);
  CHECK(json::parse(missing->body)["code"] == "NotFound");

  auto bad_top = cli.Get("/api/sources/S0001/candidates?top=abc");
  REQUIRE(bad_top);
  CHECK(bad_top->status == 400);
  CHECK(json::parse(bad_top->body).contains("message"));

  auto nowhere = cli.Get("/api/nothing");
  REQUIRE(nowhere);
  CHECK(nowhere->status == 404);
  CHECK(json::parse(nowhere->body)["code"] == "NotFound");

  const auto m = body_of(cli.Get("/api/metrics"));
  CHECK(m["model_version"] == "heuristic");
  CHECK(m["n_sources"] == 20);
  CHECK(m["retrain_in_flight"] == false);
}

TEST_CASE("label validation") {
  TempDir dir("svc-labels");
  auto svc = make_service(config_in(dir));
  LiveServer live(*svc);
  auto cli = live.client();
  auto post = [&](const std::string& body) { return cli.Post("/api/labels", body, "application/json"); };

  auto ok = post(R"({"source":"S0001","target":"T0001","verdict":"accept","curator":"ann"})");
  REQUIRE(ok);
  CHECK(ok->status == 201);
  CHECK(json::parse(ok->body)["timestamp"].get<std::string>().size() == 24);

  auto unknown = post(R"({"source":"S0001","target":"T9999","verdict":"accept","curator":"ann"})");
  REQUIRE(unknown);
  CHECK(unknown->status == 404);
  CHECK(json::parse(unknown->body)["code"] == "UnknownVariable");

  auto verdict = post(R"({"source":"S0001","target":"T0001","verdict":"maybe","curator":"ann"})");
  REQUIRE(verdict);
  CHECK(verdict->status == 400);
  CHECK(json::parse(verdict->body)["code"] == "MalformedVerdict");

  auto garbage = post("{not json");
  REQUIRE(garbage);
  CHECK(garbage->status == 400);
  CHECK(json::parse(garbage->body)["code"] == "ParseError");

  auto missing = post(R"({"source":"S0001"})");
  REQUIRE(missing);
  CHECK(missing->status == 400);

  const auto all = body_of(cli.Get("/api/labels"));
  CHECK(all["labels"].size() == 1);
}

TEST_CASE("retrain lifecycle") {
  TempDir dir("svc-retrain");
  const auto cfg = config_in(dir);
  auto svc = make_service(cfg);

  auto none = svc->retrain();
  CHECK(none.status == 422);
  CHECK(none.body["code"] == "InsufficientLabels");

  // twelve curator acceptances taken from the generated gold pairs
  const auto& gold = fixture().corpus.gold.pairs();
  int n = 0;
  for (const auto& [s, t] : gold) {
    if (n == 12) break;
    const json body = {{"source", s}, {"target", t}, {"verdict", "accept"}, {"curator", "ann"}};
    CHECK(svc->post_label(body.dump()).status == 201);
    ++n;
  }

  const auto started = svc->retrain();
  CHECK(started.status == 202);
  CHECK(started.body["target_version"] == "v1");
  const auto busy = svc->retrain();
  if (busy.status != 202) {  // the first retrain may already be done on a fast machine
    CHECK(busy.status == 409);
    CHECK(busy.body["code"] == "Conflict");
  }
  svc->wait_for_retrain();
  if (busy.status == 202) svc->wait_for_retrain();
  const auto v1 = ForestModel::load(cfg.model_dir / "model_v1.json");
  const auto m = svc->metrics().body;
  CHECK(m["last_retrain"]["status"] == "succeeded");
  CHECK(m["labels"]["accept"] == 12);

  // same labels, same seed: identical model under the next version
  const auto before = svc->model_version();
  CHECK(svc->retrain().status == 202);
  svc->wait_for_retrain();
  CHECK(svc->model_version() != before);
  const auto latest = svc->model_version();
  const auto again = ForestModel::load(cfg.model_dir / ("model_" + latest + ".json"));
  CHECK(again.hash() == v1.hash());
  CHECK(svc->candidates("S0001", 3, false).body["model_version"] == latest);

  // a fresh service picks up the newest model from disk
  auto restarted = make_service(cfg);
  CHECK(restarted->model_version() == latest);
  CHECK(restarted->labels().body["labels"].size() == 12);
}

TEST_CASE("retrain returns 409 while one is in flight") {
  TempDir dir("svc-409");
  auto cfg = config_in(dir);
  cfg.retrain_params.n_trees = 400;  // slow enough to observe
  cfg.negatives_per_source = 59;
  auto svc = make_service(cfg, true);
  LiveServer live(*svc);
  auto cli = live.client();
  auto label = cli.Post("/api/labels", R"({"source":"S0002","target":"T0003","verdict":"accept","curator":"ann"})",
                        "application/json");
  REQUIRE(label);
  REQUIRE(label->status == 201);
  auto first = cli.Post("/api/retrain");
  REQUIRE(first);
  CHECK(first->status == 202);
  auto second = cli.Post("/api/retrain");
  REQUIRE(second);
  CHECK(second->status == 409);
  CHECK(json::parse(second->body)["code"] == "Conflict");
  CHECK(body_of(cli.Get("/api/metrics"))["retrain_in_flight"] == true);
  svc->wait_for_retrain();
  CHECK(body_of(cli.Get("/api/metrics"))["model_version"] == "v1");
}

TEST_CASE("bearer token guards the api") {
  TempDir dir("svc-auth");
  auto cfg = config_in(dir);
  cfg.bearer_token = "s3cret";
  auto svc = make_service(cfg);
  LiveServer live(*svc);
  auto cli = live.client();
  auto denied = cli.Get("/api/sources");
  REQUIRE(denied);
  CHECK(denied->status == 401);
  CHECK(json::parse(denied->body)["code"] == "Unauthorized");
  CHECK(cli.Get("/healthz")->status == 200);
  cli.set_bearer_token_auth("s3cret");
  CHECK(cli.Get("/api/sources")->status == 200);
}

TEST_CASE("metrics report the latest trial summary") {
  TempDir dir("svc-metrics");
  const auto cfg = config_in(dir);
  std::filesystem::create_directories(cfg.report_dir);
  io::write_text_atomic(cfg.report_dir / "summary.csv",
                        "method,n_trials,MRR_mean,MRR_sd\nRandomForest,10,0.7,0.05\nE5,10,0.5,0.04\n");
  auto svc = make_service(cfg);
  const auto m = svc->metrics().body;
  REQUIRE(m["latest_trials"].is_array());
  CHECK(m["latest_trials"].size() == 2);
  CHECK(m["latest_trials"][0]["method"] == "RandomForest");
}

TEST_CASE("error mapping") {
  CHECK(error_response(Error(ErrorCode::UnknownSource, "x")).status == 404);
  CHECK(error_response(Error(ErrorCode::Conflict, "x")).status == 409);
  CHECK(error_response(Error(ErrorCode::ProviderUnavailable, "x")).status == 503);
  CHECK(error_response(Error(ErrorCode::InsufficientLabels, "x")).body["code"] == "InsufficientLabels");
}
