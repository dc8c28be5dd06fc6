#include "doctest.h"

#include <fstream>

#include "harmony/error.hpp"
#include "harmony/label_store.hpp"
#include "test_util.hpp"

using namespace harmony;
using namespace std::chrono;

namespace {

// Clock frozen at a settable instant.
struct FakeClock {
  std::shared_ptr<system_clock::time_point> now =
      std::make_shared<system_clock::time_point>(parse_timestamp("2024-05-01T09:30:00.000Z"));
  Clock fn() const {
    auto p = now;
    return [p] { return *p; };
  }
};

}  // namespace

TEST_CASE("timestamps") {
  const auto t = parse_timestamp("2024-05-01T09:30:00.250Z");
  CHECK(format_timestamp(t) == "2024-05-01T09:30:00.250Z");
  CHECK(format_timestamp(system_clock::time_point{}) == "1970-01-01T00:00:00.000Z");
  CHECK(format_timestamp(parse_timestamp("2024-05-01T09:30:00Z")) == "2024-05-01T09:30:00.000Z");
  CHECK_THROWS_AS(parse_timestamp("yesterday"), Error);
}

TEST_CASE("verdicts") {
  CHECK(verdict_from_string("accept") == Verdict::accept);
  CHECK(to_string(Verdict::reject) == "reject");
  CHECK_THROWS_AS(verdict_from_string("maybe"), Error);
  try {
    verdict_from_string("maybe");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::MalformedVerdict);
  }
}

TEST_CASE("newest label wins per key and timestamps strictly increase") {
  FakeClock clock;
  LabelStore store(clock.fn());
  const auto a = store.record("s1", "t1", Verdict::accept, "ann");
  const auto b = store.record("s1", "t1", Verdict::reject, "ann");  // same instant
  CHECK(b.timestamp > a.timestamp);
  CHECK(format_timestamp(b.timestamp) == "2024-05-01T09:30:00.001Z");
  store.record("s1", "t1", Verdict::accept, "bob");
  const auto cur = store.current();
  REQUIRE(cur.size() == 2);
  CHECK(cur[0].curator == "ann");
  CHECK(cur[0].verdict == Verdict::reject);
  CHECK(store.history().size() == 3);
  // bob accepts but ann rejects: not accepted
  CHECK(store.accepted_pairs().empty());
  store.record("s1", "t1", Verdict::accept, "ann");
  store.record("s2", "t9", Verdict::accept, "ann");
  const auto acc = store.accepted_pairs();
  REQUIRE(acc.size() == 2);
  CHECK(acc[0] == std::pair<std::string, std::string>{"s1", "t1"});
}

TEST_CASE("log replay and torn tail") {
  TempDir dir("labels");
  const auto path = dir / "labels.jsonl";
  FakeClock clock;
  {
    LabelStore store(path, clock.fn());
    store.record("s1", "t1", Verdict::accept, "ann");
    *clock.now += seconds(5);
    store.record("s1", "t2", Verdict::reject, "ann");
    store.record("s1", "t2", Verdict::accept, "ann");
  }
  {
    std::ofstream out(path, std::ios::app);
    out << R"({"source":"s9","target":"t9","verd)";
  }
  LabelStore reloaded(path, clock.fn());
  CHECK(reloaded.size() == 2);
  CHECK(reloaded.history().size() == 3);
  CHECK(reloaded.current()[1].verdict == Verdict::accept);
  // bump still applies against replayed history
  const auto next = reloaded.record("s1", "t2", Verdict::reject, "ann");
  CHECK(format_timestamp(next.timestamp) == "2024-05-01T09:30:05.002Z");
  CHECK(MatchLabel::from_json(next.to_json()).timestamp == next.timestamp);
  CHECK_THROWS(MatchLabel::from_json(nlohmann::json{{"source", "a"}}));
}
