#include "harmony/service.hpp"

#include <algorithm>
#include <charconv>
#include <regex>

#include "httplib.h"

#include "harmony/rank_eval.hpp"

namespace harmony {

namespace {

int http_status(ErrorCode code) {
  switch (code) {
    case ErrorCode::NotFound:
    case ErrorCode::UnknownSource:
    case ErrorCode::UnknownVariable: return 404;
    case ErrorCode::Conflict: return 409;
    case ErrorCode::InsufficientLabels:
    case ErrorCode::SingleClassData: return 422;
    case ErrorCode::ProviderUnavailable: return 503;
    case ErrorCode::IoError: return 500;
    default: return 400;
  }
}

std::optional<int> parse_version(const std::filesystem::path& file) {
  static const std::regex pattern(R"(model_v(\d+)\.json)");
  std::smatch m;
  const auto name = file.filename().string();
  if (!std::regex_match(name, m, pattern)) return std::nullopt;
  return std::stoi(m[1]);
}

std::string version_name(int v) { return v == 0 ? "heuristic" : "v" + std::to_string(v); }

}  // namespace

Response error_response(const Error& e) {
  return error_response(http_status(e.code()), to_string(e.code()), e.detail());
}

Response error_response(int status, std::string_view code, std::string message) {
  return {status, {{"code", std::string(code)}, {"message", std::move(message)}}};
}

MatchService::MatchService(ServiceConfig config, DataDictionary sources, DataDictionary targets,
                           FeatureStore store, GoldPairs seed_gold, Clock clock)
    : config_(std::move(config)),
      sources_(std::move(sources)),
      targets_(std::move(targets)),
      store_(std::move(store)),
      seed_gold_(std::move(seed_gold)),
      clock_(clock ? std::move(clock) : Clock(std::chrono::system_clock::now)),
      labels_(config_.labels_path, clock_) {
  config_.retrain_params.validate();
  if (config_.model_dir.empty()) throw Error(ErrorCode::InvalidArgument, "model_dir is required");
  std::filesystem::create_directories(config_.model_dir);
  int newest = 0;
  for (const auto& entry : std::filesystem::directory_iterator(config_.model_dir))
    if (auto v = parse_version(entry.path())) newest = std::max(newest, *v);
  if (newest > 0) {
    auto model = ForestModel::load(config_.model_dir / ("model_v" + std::to_string(newest) + ".json"));
    if (model.schema() != store_.schema())
      throw Error(ErrorCode::SchemaMismatch, "model_v" + std::to_string(newest) + " was trained on another schema");
    model_ = std::make_shared<const ForestModel>(std::move(model));
    version_ = newest;
  }
  last_retrain_ = nullptr;
}

MatchService::~MatchService() { wait_for_retrain(); }

std::string MatchService::model_version() const {
  std::lock_guard lock(model_mutex_);
  return version_name(version_);
}

Response MatchService::sources() const {
  nlohmann::json list = nlohmann::json::array();
  for (const auto& rec : sources_) {
    if (!store_.source_index(rec.name)) continue;
    list.push_back({{"name", rec.name}, {"label", rec.label}, {"sheet", rec.sheet_desc}});
  }
  return {200, {{"sources", list}}};
}

Response MatchService::candidates(const std::string& source, std::optional<std::size_t> top,
                                  bool with_features) const {
  const auto s = store_.source_index(source);
  if (!s) return error_response(404, "NotFound", "unknown source " + source);
  const std::size_t n = top.value_or(config_.default_top);
  if (n == 0) return error_response(400, "InvalidArgument", "top must be positive");

  std::shared_ptr<const ForestModel> model;
  int version = 0;
  {
    std::lock_guard lock(model_mutex_);
    model = model_;
    version = version_;
  }
  const auto& block = store_.block(*s);
  Eigen::VectorXd scores;
  if (model) {
    scores = model->predict_proba(block);
  } else {
    std::vector<Eigen::Index> sim;
    for (std::size_t c = 0; c < store_.schema().size(); ++c)
      if (store_.schema().names()[c].find("_on_") != std::string::npos) sim.push_back(static_cast<Eigen::Index>(c));
    if (sim.empty()) return error_response(500, "SchemaMismatch", "no similarity features to rank by");
    scores = block(Eigen::all, sim).rowwise().mean();
  }
  const auto ranked = rank_candidates(source, store_.targets(),
                                      std::span<const double>(scores.data(), static_cast<std::size_t>(scores.size())),
                                      {});
  nlohmann::json list = nlohmann::json::array();
  for (std::size_t i = 0; i < std::min(n, ranked.entries.size()); ++i) {
    const auto& e = ranked.entries[i];
    nlohmann::json item = {{"target", e.target}, {"score", e.score}, {"rank", e.rank}};
    if (const auto* rec = targets_.find(e.target)) item["label"] = rec->label;
    if (with_features) {
      const auto t = *store_.target_index(e.target);
      nlohmann::json f = nlohmann::json::object();
      for (std::size_t c = 0; c < store_.schema().size(); ++c)
        f[store_.schema().names()[c]] = block(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(c));
      item["features"] = f;
    }
    list.push_back(std::move(item));
  }
  return {200, {{"source", source}, {"model_version", version_name(version)}, {"candidates", list}}};
}

Response MatchService::labels() const {
  nlohmann::json list = nlohmann::json::array();
  for (const auto& l : labels_.current()) list.push_back(l.to_json());
  return {200, {{"labels", list}}};
}

Response MatchService::post_label(const std::string& body) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(body);
  } catch (const nlohmann::json::exception& e) {
    return error_response(400, "ParseError", e.what());
  }
  if (!j.is_object()) return error_response(400, "ParseError", "body must be a JSON object");
  for (const char* field : {"source", "target", "verdict", "curator"}) {
    if (!j.contains(field) || !j[field].is_string())
      return error_response(400, "InvalidArgument", std::string("missing string field ") + field);
  }
  try {
    const auto verdict = verdict_from_string(j["verdict"].get<std::string>());
    const auto source = j["source"].get<std::string>();
    const auto target = j["target"].get<std::string>();
    if (!store_.source_index(source)) return error_response(404, "UnknownVariable", "unknown source " + source);
    if (!store_.target_index(target)) return error_response(404, "UnknownVariable", "unknown target " + target);
    auto label = labels_.record(source, target, verdict, j["curator"].get<std::string>());
    return {201, label.to_json()};
  } catch (const Error& e) {
    return error_response(e);
  }
}

GoldPairs MatchService::training_gold() const {
  std::set<std::pair<std::string, std::string>> pairs(seed_gold_.pairs().begin(), seed_gold_.pairs().end());
  for (const auto& l : labels_.current())
    if (l.verdict == Verdict::reject) pairs.erase({l.source, l.target});
  for (const auto& p : labels_.accepted_pairs()) pairs.insert(p);
  std::vector<std::pair<std::string, std::string>> list(pairs.begin(), pairs.end());
  return GoldPairs(list);
}

Response MatchService::retrain() {
  bool expected = false;
  if (!retraining_.compare_exchange_strong(expected, true))
    return error_response(409, "Conflict", "a retrain is already in flight");

  if (labels_.accepted_pairs().empty()) {
    retraining_ = false;
    return error_response(422, "InsufficientLabels", "no accepted labels to train on");
  }
  auto gold = training_gold();
  const auto labeled = gold.sources_in(store_);
  if (labeled.size() < config_.min_labeled_sources) {
    retraining_ = false;
    return error_response(422, "InsufficientLabels",
                          "need gold targets for at least " + std::to_string(config_.min_labeled_sources) +
                              " sources, have " + std::to_string(labeled.size()));
  }
  int next = 0;
  {
    std::lock_guard lock(model_mutex_);
    next = version_ + 1;
    started_ = clock_();
    last_retrain_ = {{"status", "running"},
                     {"target_version", version_name(next)},
                     {"started_at", format_timestamp(started_)},
                     {"labeled_sources", labeled.size()}};
  }
  std::lock_guard worker_lock(worker_mutex_);
  if (worker_.joinable()) worker_.join();
  worker_ = std::thread([this, next, gold = std::move(gold)]() mutable { run_retrain(next, std::move(gold)); });
  return {202, {{"status", "started"}, {"target_version", version_name(next)}, {"started_at", format_timestamp(started_)}}};
}

void MatchService::run_retrain(int version, GoldPairs gold) {
  nlohmann::json outcome;
  try {
    const auto sources = gold.sources_in(store_);
    // Same labels and seed give the same model whatever the version number.
    const std::uint64_t seed = config_.seed;
    Rng rng(derive_seed(seed, 2));
    const auto pairs = generate_training_pairs(store_, gold, sources, config_.negatives_per_source, rng);
    auto model = train_forest(pairs, config_.retrain_params, derive_seed(seed, 4));
    model.save(config_.model_dir / ("model_v" + std::to_string(version) + ".json"));

    // Fit on every labeled source, so this measures ranking on training data.
    std::vector<double> ranks;
    for (const auto& s : sources) {
      const auto scores = model.predict_proba(store_.block(*store_.source_index(s)));
      Eigen::VectorXi mask = Eigen::VectorXi::Zero(scores.size());
      for (const auto& t : gold.targets_of(s))
        if (auto ti = store_.target_index(t)) mask(static_cast<Eigen::Index>(*ti)) = 1;
      ranks.push_back(best_gold_rank(scores, mask));
    }
    outcome = {{"status", "succeeded"},
               {"training_pairs", pairs.size()},
               {"training_mrr", mrr_from_ranks(ranks)},
               {"training_hr5", hit_ratio_from_ranks(ranks, 5)}};
    std::lock_guard lock(model_mutex_);
    model_ = std::make_shared<const ForestModel>(std::move(model));
    version_ = version;
  } catch (const std::exception& e) {
    outcome = {{"status", "failed"}, {"error", e.what()}};
  }
  {
    std::lock_guard lock(model_mutex_);
    outcome["target_version"] = version_name(version);
    outcome["started_at"] = format_timestamp(started_);
    outcome["finished_at"] = format_timestamp(clock_());
    last_retrain_ = outcome;
  }
  retraining_ = false;
}

void MatchService::wait_for_retrain() {
  std::lock_guard lock(worker_mutex_);
  if (worker_.joinable()) worker_.join();
}

Response MatchService::metrics() const {
  const auto current = labels_.current();
  std::size_t accept = 0, reject = 0;
  for (const auto& l : current) (l.verdict == Verdict::accept ? accept : reject) += 1;

  // Latest trial summary written by the trials command, when configured.
  nlohmann::json trials = nullptr;
  if (!config_.report_dir.empty() && std::filesystem::exists(config_.report_dir / "summary.csv")) {
    const auto table = csv::read_file(config_.report_dir / "summary.csv");
    trials = nlohmann::json::array();
    for (const auto& row : table.rows) {
      nlohmann::json entry = nlohmann::json::object();
      for (std::size_t c = 0; c < table.header.size() && c < row.size(); ++c) {
        double v = 0.0;
        const auto& cell = row[c];
        auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
        if (c > 0 && ec == std::errc() && ptr == cell.data() + cell.size()) {
          entry[table.header[c]] = v;
        } else {
          entry[table.header[c]] = cell;
        }
      }
      trials.push_back(std::move(entry));
    }
  }
  std::lock_guard lock(model_mutex_);
  return {200,
          {{"model_version", version_name(version_)},
           {"n_sources", store_.n_sources()},
           {"n_targets", store_.n_targets()},
           {"seed_gold_pairs", seed_gold_.size()},
           {"labels", {{"total", current.size()}, {"accept", accept}, {"reject", reject}}},
           {"retrain_in_flight", retraining_.load()},
           {"last_retrain", last_retrain_},
           {"latest_trials", trials},
           {"generated_at", format_timestamp(clock_())}}};
}

Response MatchService::health() const {
  return {200, {{"status", "ok"}, {"time", format_timestamp(clock_())}}};
}

bool MatchService::authorized(const std::string& header) const {
  if (!config_.bearer_token) return true;
  return header == "Bearer " + *config_.bearer_token;
}

void MatchService::bind(httplib::Server& server) {
  auto send = [](httplib::Response& res, const Response& r) {
    res.status = r.status;
    res.set_content(r.body.dump(), "application/json");
  };
  auto guarded = [this, send](auto handler) {
    return [this, send, handler](const httplib::Request& req, httplib::Response& res) {
      if (!authorized(req.get_header_value("Authorization"))) {
        send(res, error_response(401, "Unauthorized", "missing or wrong bearer token"));
        return;
      }
      try {
        send(res, handler(req));
      } catch (const Error& e) {
        send(res, error_response(e));
      } catch (const std::exception& e) {
        send(res, error_response(500, "Internal", e.what()));
      }
    };
  };

  server.Get("/healthz", [this, send](const httplib::Request&, httplib::Response& res) { send(res, health()); });
  server.Get("/api/sources", guarded([this](const httplib::Request&) { return sources(); }));
  server.Get(R"(/api/sources/([^/]+)/candidates)", guarded([this](const httplib::Request& req) {
               std::optional<std::size_t> top;
               if (req.has_param("top")) {
                 const auto text = req.get_param_value("top");
                 std::size_t value = 0;
                 auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
                 if (ec != std::errc() || ptr != text.data() + text.size())
                   return error_response(400, "InvalidArgument", "top must be a positive integer");
                 top = value;
               }
               bool features = false;
               if (req.has_param("features")) {
                 const auto v = req.get_param_value("features");
                 features = v == "1" || v == "true";
               }
               return candidates(req.matches[1].str(), top, features);
             }));
  server.Get("/api/labels", guarded([this](const httplib::Request&) { return labels(); }));
  server.Post("/api/labels", guarded([this](const httplib::Request& req) { return post_label(req.body); }));
  server.Post("/api/retrain", guarded([this](const httplib::Request&) { return retrain(); }));
  server.Get("/api/metrics", guarded([this](const httplib::Request&) { return metrics(); }));
  server.set_error_handler([send](const httplib::Request&, httplib::Response& res) {
    if (res.body.empty()) send(res, error_response(res.status, res.status == 404 ? "NotFound" : "HttpError",
                                                   "status " + std::to_string(res.status)));
  });
}

}  // namespace harmony
