#pragma once

#include <chrono>
#include <filesystem>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include "json.hpp"

namespace harmony {

enum class Verdict { accept, reject };

std::string_view to_string(Verdict v);
/// Throws MalformedVerdict.
Verdict verdict_from_string(std::string_view text);

using Clock = std::function<std::chrono::system_clock::time_point()>;

/// ISO-8601 UTC with milliseconds, e.g. 2024-05-01T09:30:00.250Z.
std::string format_timestamp(std::chrono::system_clock::time_point t);
std::chrono::system_clock::time_point parse_timestamp(std::string_view text);

struct MatchLabel {
  std::string source;
  std::string target;
  Verdict verdict = Verdict::reject;
  std::string curator;
  std::chrono::system_clock::time_point timestamp;

  nlohmann::json to_json() const;
  static MatchLabel from_json(const nlohmann::json& j);
};

/// Curator verdicts in an append-only JSON-lines log. Per (source, target,
/// curator) the newest record wins; a later write for the same key always
/// gets a strictly later timestamp. A torn or malformed trailing line is
/// skipped on load.
class LabelStore {
 public:
  /// In-memory only.
  explicit LabelStore(Clock clock = {});
  explicit LabelStore(std::filesystem::path path, Clock clock = {});

  MatchLabel record(std::string source, std::string target, Verdict verdict, std::string curator);
  /// Current label per key, ordered by (source, target, curator).
  std::vector<MatchLabel> current() const;
  /// Every record, oldest first.
  std::vector<MatchLabel> history() const;
  /// Pairs some curator currently accepts and no curator currently rejects.
  std::vector<std::pair<std::string, std::string>> accepted_pairs() const;
  std::size_t size() const;

 private:
  using Key = std::tuple<std::string, std::string, std::string>;
  void apply(const MatchLabel& label);

  std::optional<std::filesystem::path> path_;
  Clock clock_;
  std::vector<MatchLabel> history_;
  std::map<Key, MatchLabel> current_;
  mutable std::mutex mutex_;
};

}  // namespace harmony
