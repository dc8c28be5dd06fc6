#pragma once

#include <atomic>
#include <chrono>
#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>

#include "harmony/dictionary.hpp"
#include "harmony/features.hpp"
#include "harmony/forest.hpp"
#include "harmony/label_store.hpp"

#include "json.hpp"

namespace httplib {
class Server;
}

namespace harmony {

struct ServiceConfig {
  std::filesystem::path model_dir;          // model_v<n>.json files
  std::filesystem::path labels_path;        // JSON lines
  ForestParams retrain_params;
  std::size_t negatives_per_source = 200;
  std::uint64_t seed = 0;
  std::size_t default_top = 10;
  std::size_t min_labeled_sources = 1;
  std::filesystem::path report_dir;         // trials output; its summary.csv feeds /api/metrics
  std::optional<std::string> bearer_token;  // required on every /api route when set
};

/// HTTP-independent response: status plus JSON body.
struct Response {
  int status = 200;
  nlohmann::json body;
};

/// {code, message} body for a library error, with the matching HTTP status.
Response error_response(const Error& e);
Response error_response(int status, std::string_view code, std::string message);

/// Ranking and curation backend. Candidates are scored by the newest model
/// in `model_dir`; before any model exists they are ordered by the mean of
/// the similarity features and reported under model_version "heuristic".
class MatchService {
 public:
  MatchService(ServiceConfig config, DataDictionary sources, DataDictionary targets, FeatureStore store,
               GoldPairs seed_gold, Clock clock = {});
  ~MatchService();
  MatchService(const MatchService&) = delete;
  MatchService& operator=(const MatchService&) = delete;

  Response sources() const;
  Response candidates(const std::string& source, std::optional<std::size_t> top, bool with_features) const;
  Response labels() const;
  Response post_label(const std::string& body);
  /// Starts a background retrain; 409 while one is running.
  Response retrain();
  Response metrics() const;
  Response health() const;

  /// Blocks until no retrain is running.
  void wait_for_retrain();
  std::string model_version() const;

  /// Registers every route on `server`.
  void bind(httplib::Server& server);

 private:
  GoldPairs training_gold() const;
  void run_retrain(int version, GoldPairs gold);
  bool authorized(const std::string& header) const;

  ServiceConfig config_;
  DataDictionary sources_;
  DataDictionary targets_;
  FeatureStore store_;
  GoldPairs seed_gold_;
  Clock clock_;
  LabelStore labels_;

  mutable std::mutex model_mutex_;
  std::shared_ptr<const ForestModel> model_;
  int version_ = 0;

  std::atomic<bool> retraining_{false};
  std::thread worker_;
  std::mutex worker_mutex_;
  nlohmann::json last_retrain_;  // guarded by model_mutex_
  std::chrono::system_clock::time_point started_;
};

}  // namespace harmony
