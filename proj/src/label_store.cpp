#include "harmony/label_store.hpp"

#include <cstdio>
#include <cctype>
#include <ctime>
#include <fstream>
#include <set>

#include "harmony/error.hpp"

namespace harmony {

using std::chrono::milliseconds;
using std::chrono::system_clock;

std::string_view to_string(Verdict v) {
  switch (v) {
    case Verdict::accept: return "accept";
    case Verdict::reject: return "reject";
  }
  return "reject";
}

Verdict verdict_from_string(std::string_view text) {
  if (text == "accept") return Verdict::accept;
  if (text == "reject") return Verdict::reject;
  throw Error(ErrorCode::MalformedVerdict, "verdict must be accept or reject, got '" +
                                               std::string(text) + "'");
}

std::string format_timestamp(system_clock::time_point t) {
  const auto ms = std::chrono::duration_cast<milliseconds>(t.time_since_epoch()).count();
  auto secs = static_cast<std::time_t>(ms / 1000);
  auto frac = ms % 1000;
  if (frac < 0) {
    frac += 1000;
    --secs;
  }
  std::tm tm{};
  gmtime_r(&secs, &tm);
  char buf[96];
  std::snprintf(buf, sizeof buf, "%04d-%02d-%02dT%02d:%02d:%02d.%03dZ", tm.tm_year + 1900, tm.tm_mon + 1,
                tm.tm_mday, tm.tm_hour, tm.tm_min, tm.tm_sec, static_cast<int>(frac));
  return buf;
}

system_clock::time_point parse_timestamp(std::string_view text) {
  std::tm tm{};
  int ms = 0;
  const std::string s(text);
  int consumed = 0;
  const int n = std::sscanf(s.c_str(), "%4d-%2d-%2dT%2d:%2d:%2d%n", &tm.tm_year, &tm.tm_mon, &tm.tm_mday,
                            &tm.tm_hour, &tm.tm_min, &tm.tm_sec, &consumed);
  if (n != 6) throw Error(ErrorCode::ParseError, "bad timestamp '" + s + "'");
  std::size_t pos = static_cast<std::size_t>(consumed);
  if (pos < s.size() && s[pos] == '.') {
    int scale = 100;
    for (++pos; pos < s.size() && std::isdigit(static_cast<unsigned char>(s[pos])); ++pos) {
      ms += (s[pos] - '0') * scale;
      scale /= 10;
    }
  }
  if (pos >= s.size() || s[pos] != 'Z' || pos + 1 != s.size())
    throw Error(ErrorCode::ParseError, "timestamp must be UTC with a Z suffix: '" + s + "'");
  tm.tm_year -= 1900;
  tm.tm_mon -= 1;
  return system_clock::from_time_t(timegm(&tm)) + milliseconds(ms);
}

nlohmann::json MatchLabel::to_json() const {
  return {{"source", source},
          {"target", target},
          {"verdict", std::string(to_string(verdict))},
          {"curator", curator},
          {"timestamp", format_timestamp(timestamp)}};
}

MatchLabel MatchLabel::from_json(const nlohmann::json& j) {
  MatchLabel l;
  l.source = j.at("source").get<std::string>();
  l.target = j.at("target").get<std::string>();
  l.verdict = verdict_from_string(j.at("verdict").get<std::string>());
  l.curator = j.at("curator").get<std::string>();
  l.timestamp = parse_timestamp(j.at("timestamp").get<std::string>());
  return l;
}

LabelStore::LabelStore(Clock clock) : clock_(clock ? std::move(clock) : Clock(system_clock::now)) {}

LabelStore::LabelStore(std::filesystem::path path, Clock clock) : LabelStore(std::move(clock)) {
  path_ = std::move(path);
  if (!std::filesystem::exists(*path_)) return;
  std::ifstream in(*path_, std::ios::binary);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    try {
      apply(MatchLabel::from_json(nlohmann::json::parse(line)));
    } catch (const nlohmann::json::exception&) {
      // interrupted append
    } catch (const Error&) {
    }
  }
}

void LabelStore::apply(const MatchLabel& label) {
  history_.push_back(label);
  auto& slot = current_[{label.source, label.target, label.curator}];
  if (slot.source.empty() || label.timestamp >= slot.timestamp) slot = label;
}

MatchLabel LabelStore::record(std::string source, std::string target, Verdict verdict, std::string curator) {
  if (source.empty() || target.empty()) throw Error(ErrorCode::InvalidArgument, "source and target are required");
  if (curator.empty()) throw Error(ErrorCode::InvalidArgument, "curator is required");
  std::lock_guard lock(mutex_);
  MatchLabel label{std::move(source), std::move(target), verdict, std::move(curator),
                   std::chrono::time_point_cast<milliseconds>(clock_())};
  auto it = current_.find({label.source, label.target, label.curator});
  if (it != current_.end() && label.timestamp <= it->second.timestamp)
    label.timestamp = it->second.timestamp + milliseconds(1);
  if (path_) {
    if (path_->has_parent_path()) std::filesystem::create_directories(path_->parent_path());
    std::ofstream out(*path_, std::ios::binary | std::ios::app);
    out << label.to_json().dump() << '\n';
    out.flush();
    if (!out) throw Error(ErrorCode::IoError, "cannot append to " + path_->string());
  }
  apply(label);
  return label;
}

std::vector<MatchLabel> LabelStore::current() const {
  std::lock_guard lock(mutex_);
  std::vector<MatchLabel> out;
  for (const auto& [key, label] : current_) out.push_back(label);
  return out;
}

std::vector<MatchLabel> LabelStore::history() const {
  std::lock_guard lock(mutex_);
  return history_;
}

std::vector<std::pair<std::string, std::string>> LabelStore::accepted_pairs() const {
  std::lock_guard lock(mutex_);
  std::set<std::pair<std::string, std::string>> accepted, rejected;
  for (const auto& [key, label] : current_) {
    if (label.verdict == Verdict::accept) accepted.emplace(label.source, label.target);
    if (label.verdict == Verdict::reject) rejected.emplace(label.source, label.target);
  }
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& p : accepted)
    if (!rejected.contains(p)) out.push_back(p);
  return out;
}

std::size_t LabelStore::size() const {
  std::lock_guard lock(mutex_);
  return current_.size();
}

}  // namespace harmony
