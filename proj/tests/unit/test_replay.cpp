#include "doctest.h"
#include "psim/replay.hpp"
#include "support.hpp"

using namespace psim;

namespace {

std::vector<std::string> with_prefix(const std::vector<std::string>& v, char c) {
  std::vector<std::string> out;
  for (const auto& s : v) {
    if (!s.empty() && s[0] == c) out.push_back(s);
  }
  return out;
}

std::size_t index_of(const std::vector<LogRecord>& records, const std::string& type, std::size_t from = 0) {
  for (std::size_t i = from; i < records.size(); ++i) {
    if (records[i].type == type) return i;
  }
  return records.size();
}

RunConfig with_commands(int days) {
  auto cfg = test::three_agents(days);
  cfg.commands = {{1, 0, "pre_day", "chat", {{"agent", "benjamin"}, {"text", "Want to grab coffee?"}}},
                  {1, 30, "tick", "pause", json::object()},
                  {1, 31, "tick", "resume", json::object()},
                  {2, 0, "pre_day", "env_update", {{"csv", test::campus_csv() + "Theatre,Stage,40,40,10,Relaxation;Social,A stage,10:00,23:00\n"}}}};
  return cfg;
}

}  // namespace

TEST_SUITE("replay") {
  TEST_CASE("reconstruction matches the live state at every day boundary") {
    Kernel k(with_commands(3));
    while (!k.finished()) {
      k.run_day();
      CHECK(reconstruct_state(k.log().records()) == k.state_view());
    }
  }

  TEST_CASE("reconstruction after a live chat and environment update") {
    Kernel k(test::three_agents(2));
    k.run_day();
    k.chat("sophia", "Any new chapters?");
    std::string csv = test::campus_csv() + "Theatre,Stage,40,40,10,Relaxation;Social,A stage,10:00,23:00\n";
    REQUIRE(k.stage_environment(csv).ok);
    CHECK(reconstruct_state(k.log().records()) == k.state_view());
    k.run();
    CHECK(reconstruct_state(k.log().records()) == k.state_view());
  }

  TEST_CASE("transcripts rebuild the commands") {
    Kernel live(test::three_agents(2));
    live.chat("isabella", "Hello there");
    live.step();
    live.note_control("pause");
    live.note_control("resume");
    live.run();
    auto records = live.log().records();
    auto transcript = command_transcript(records);
    REQUIRE(transcript.size() == 3);
    CHECK(transcript[0] == Command{1, 0, "pre_day", "chat", {{"agent", "isabella"}, {"text", "Hello there"}}});
    CHECK(transcript[1] == Command{1, 1, "tick", "pause", json::object()});

    auto cfg = config_from_log(records);
    CHECK(cfg.commands.empty());
    cfg.commands = transcript;
    Kernel again(cfg);
    again.run();
    CHECK(test::log_text(again.log()) == test::log_text(live.log()));
    CHECK_THROWS_AS(config_from_log({}), LookupError);
  }

  TEST_CASE("replaying recorded exchanges reproduces the log") {
    Kernel k(with_commands(2));
    k.run();
    auto records = k.log().records();
    const std::string text = test::log_text(k.log());
    auto cfg = config_from_log(records);
    cfg.commands = command_transcript(records);
    auto outcome = replay_run(cfg, records, text);
    CHECK(outcome.identical);
    CHECK(outcome.first_difference == 0);
    CHECK(outcome.unused_exchanges == 0);

    std::string tampered = text;
    auto pos = tampered.find("\"type\":\"plan\"");
    tampered.insert(pos, " ");
    outcome = replay_run(cfg, records, tampered);
    CHECK_FALSE(outcome.identical);
    std::size_t line = 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(pos), '\n'));
    CHECK(outcome.first_difference == line);
  }

  TEST_CASE("replay works without the scripted backend") {
    Kernel k(test::three_agents(1));
    k.run();
    auto records = k.log().records();
    auto backend = std::make_shared<lm::ReplayBackend>(recorded_exchanges(records));
    auto cfg2 = config_from_log(records);
    Kernel again(cfg2, backend);
    again.run();
    CHECK(test::log_text(again.log()) == test::log_text(k.log()));
    CHECK(backend->remaining() == 0);
  }

  TEST_CASE("audit is clean on scripted runs") {
    for (const char* ablate : {"", "growth,insight,feelings", "simple-character", "feelings"}) {
      auto cfg = with_commands(3);
      if (*ablate) cfg.ablate = parse_ablations(ablate);
      Kernel k(cfg);
      k.run();
      AuditOptions opt{cfg.memory_capacity, !cfg.ablate.disable_growth};
      auto violations = audit_log(k.log().records(), opt);
      CAPTURE(ablate);
      CHECK(violations.empty());
      if (!violations.empty()) MESSAGE(violations.front());
    }
  }

  TEST_CASE("audit detects injected violations") {
    Kernel k(test::three_agents(2));
    k.run();
    const auto clean = k.log().records();
    REQUIRE(audit_log(clean, {}).empty());

    SUBCASE("a: missing replan after a jump") {
      auto r = clean;
      auto i = index_of(r, "emotion");
      REQUIRE(i < r.size());
      r[i].payload["category"] = r[i].payload["previous"].get<int>() >= 4 ? 1 : 7;
      CHECK_FALSE(with_prefix(audit_log(r, {}), 'a').empty());
    }
    SUBCASE("b: long-term store over capacity") {
      AuditOptions tight{1, true};
      CHECK_FALSE(with_prefix(audit_log(clean, tight), 'b').empty());
    }
    SUBCASE("c: accepted invitation missing on one side") {
      auto r = clean;
      auto i = index_of(r, "invite");
      bool found = false;
      for (; i < r.size(); i = index_of(r, "invite", i + 1)) {
        if (r[i].payload.at("response").at("accept").get<bool>()) {
          found = true;
          break;
        }
      }
      if (found) {
        const std::string to = r[i].payload.at("invitation").at("to");
        r[i].payload["plans"][to]["entries"] = json::array();
        CHECK_FALSE(with_prefix(audit_log(r, {}), 'c').empty());
      } else {
        r[index_of(r, "invite")].payload["response"]["accept"] = true;
        auto inv = r[index_of(r, "invite")].payload.at("invitation");
        r[index_of(r, "invite")].payload["plans"][inv.at("to").get<std::string>()]["entries"] = json::array();
        CHECK_FALSE(with_prefix(audit_log(r, {}), 'c').empty());
      }
    }
    SUBCASE("d: ledger over capacity") {
      auto r = clean;
      auto i = index_of(r, "action");
      REQUIRE(i < r.size());
      const auto place = load_world(test::campus_csv()).places.front();
      json crowd = json::array();
      for (int n = 0; n <= place.capacity; ++n) crowd.push_back({{"holder", "x" + std::to_string(n)}});
      r[i].payload["ledger"][place.id()] = crowd;
      CHECK_FALSE(with_prefix(audit_log(r, {}), 'd').empty());
    }
    SUBCASE("e: missing and disordered growth") {
      auto r = clean;
      auto g = index_of(r, "growth");
      REQUIRE(g < r.size());
      auto dropped = r;
      dropped.erase(dropped.begin() + static_cast<std::ptrdiff_t>(g));
      CHECK_FALSE(with_prefix(audit_log(dropped, {}), 'e').empty());
      CHECK_FALSE(with_prefix(audit_log(clean, {30, false}), 'e').empty());

      auto swapped = r;
      std::size_t first = 0, second = 0;
      for (std::size_t i = g; i-- > 0;) {
        if (swapped[i].type != "lm" || swapped[i].agent != swapped[g].agent) continue;
        const std::string kind = swapped[i].payload.at("kind");
        if (kind == "GROWTH_FEATURE") first = i;
        if (kind == "GROWTH_STATE") {
          second = i;
          break;
        }
      }
      REQUIRE(first > second);
      std::swap(swapped[first].payload, swapped[second].payload);
      CHECK_FALSE(with_prefix(audit_log(swapped, {}), 'e').empty());
    }
    SUBCASE("o: phases out of order") {
      auto r = clean;
      auto m = index_of(r, "memory");
      auto p = index_of(r, "plan");
      REQUIRE(m < r.size());
      auto moved = r[m];
      moved.day = r[p].day;
      r.insert(r.begin() + static_cast<std::ptrdiff_t>(p) + 1, moved);
      r[p + 1].agent = r[p].agent;
      CHECK_FALSE(with_prefix(audit_log(r, {}), 'o').empty());
    }
  }
}
