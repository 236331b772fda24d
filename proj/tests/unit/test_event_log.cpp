#include <thread>

#include "doctest.h"
#include "psim/event_log.hpp"
#include "support.hpp"

using namespace psim;

TEST_SUITE("event_log") {
  TEST_CASE("records are sequenced and serialized canonically") {
    EventLog log;
    auto a = log.append(1, 0, "ann", "plan", {{"b", 1}, {"a", 2}});
    auto b = log.append(1, 3, std::nullopt, "day", json::object());
    CHECK(a.seq == 0);
    CHECK(b.seq == 1);
    CHECK(log.next_seq() == 2);
    CHECK(record_line(a) == R"({"agent":"ann","day":1,"payload":{"a":2,"b":1},"seq":0,"tick":0,"type":"plan","v":1})");
    CHECK(record_line(b).find(R"("agent":null)") != std::string::npos);
    CHECK(log.records_since(1).size() == 1);
    CHECK(log.records_since(5).empty());
  }

  TEST_CASE("file round trip and append mode") {
    test::TempDir dir("log");
    auto path = dir.path / "run.jsonl";
    {
      EventLog log(path);
      log.append(1, 0, "ann", "plan", {{"x", 1}});
      log.append(1, 1, "bob", "action", {{"y", "z"}});
      log.sync();
    }
    auto records = read_log(path);
    REQUIRE(records.size() == 2);
    CHECK(records[1].agent == "bob");
    CHECK(records[1].payload.at("y") == "z");
    {
      EventLog log(path, true);
      CHECK(log.size() == 2);
      auto r = log.append(2, 0, std::nullopt, "day", json::object());
      CHECK(r.seq == 2);
    }
    CHECK(read_log(path).size() == 3);
    {
      EventLog log(path);
      CHECK(log.size() == 0);
    }
    CHECK(read_log(path).empty());
    CHECK_THROWS_AS(read_log(dir.path / "missing.jsonl"), LookupError);
  }

  TEST_CASE("corrupt logs name the line") {
    auto line_of = [](const std::string& text) -> std::size_t {
      try {
        parse_log(text);
      } catch (const CorruptLogError& e) {
        return e.line();
      }
      return 0;
    };
    EventLog log;
    std::string good = record_line(log.append(1, 0, "a", "plan", json::object())) + "\n";
    std::string second = record_line(log.append(1, 0, "a", "plan", json::object())) + "\n";
    CHECK(line_of(good + second) == 0);
    CHECK(line_of(good + "{not json\n") == 2);
    CHECK(line_of(good + good) == 2);
    CHECK(line_of(good + "\n" + R"({"v":1,"seq":9,"day":1,"tick":0,"type":"x","payload":{}})" + "\n") == 3);
    std::string v2 = second;
    v2.replace(v2.find("\"v\":1"), 5, "\"v\":2");
    CHECK(line_of(good + v2) == 2);
  }

  TEST_CASE("subscribers see every append in order") {
    EventLog log;
    std::vector<std::uint64_t> seen;
    int id = log.subscribe([&](const LogRecord& r) { seen.push_back(r.seq); });
    log.append(1, 0, "a", "x", json::object());
    log.append(1, 0, "a", "x", json::object());
    log.unsubscribe(id);
    log.append(1, 0, "a", "x", json::object());
    CHECK(seen == std::vector<std::uint64_t>{0, 1});
  }

  TEST_CASE("concurrent appends keep unique sequence numbers") {
    EventLog log;
    std::vector<std::thread> threads;
    for (int t = 0; t < 4; ++t) {
      threads.emplace_back([&] {
        for (int i = 0; i < 250; ++i) log.append(1, 0, "a", "x", json::object());
      });
    }
    for (auto& t : threads) t.join();
    auto records = log.records();
    REQUIRE(records.size() == 1000);
    for (std::size_t i = 0; i < records.size(); ++i) CHECK(records[i].seq == i);
  }
}
