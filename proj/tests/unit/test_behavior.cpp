#include <set>

#include "doctest.h"
#include "psim/behavior.hpp"
#include "support.hpp"

using namespace psim;

namespace {

CharacterStructure person(const std::string& name, const std::string& traits) {
  CharacterStructure cs;
  cs.basic_info = {{"name", name}, {"gender", "female"}, {"age", "21"}, {"profession", "student"}};
  cs.current_state = "Settling into the term.";
  cs.traits.prose = traits;
  cs.conflict = "Wants more time than the day allows.";
  cs.preference = {"finish a degree", "finish a degree with honours", "study to finish a degree",
                   "Classes then the library.", {"reading"}, {"Library"}};
  return cs;
}

struct Fixture {
  WorldMap world = load_world(test::campus_csv());
  DayWindow window;
  AgentCard ann = make_card("ann", person("Ann", "Outgoing and talkative. Loves parties."), "Dorm/Room 101");
  AgentCard bob = make_card("bob", person("Bob", "Quiet and reserved."), "Dorm/Room 102");
};

PlanEntry entry(GoalTag g, int start, int end, const std::string& place) {
  PlanEntry e;
  e.goal = g;
  e.start = start;
  e.end = end;
  e.place = place;
  e.description = std::string(goal_name(g));
  return e;
}

json raw(const std::string& start, const std::string& end, const std::string& goal, const std::string& place) {
  return {{"start", start}, {"end", end}, {"goal", goal}, {"place", place}, {"description", ""}, {"motivation", "m"}};
}

}  // namespace

TEST_SUITE("behavior") {
  TEST_CASE("day window ticks") {
    DayWindow w;
    CHECK(w.ticks() == 68);
    CHECK(w.minute_of(4) == 7 * 60);
    CHECK(w.tick_at_or_after(7 * 60) == 4);
    CHECK(w.tick_at_or_after(7 * 60 + 1) == 5);
    CHECK(w.tick_at_or_after(0) == 0);
  }

  TEST_CASE("plan json round trip") {
    DailyPlan p;
    p.agent = "ann";
    p.day = 3;
    p.entries.push_back(entry(GoalTag::Meal, 420, 465, "Dorm/Kitchen"));
    auto appt = entry(GoalTag::Appointment, 600, 660, "Cafe/Patio");
    appt.partner = "bob";
    appt.invitation = "d3-i0";
    appt.confirmed = true;
    appt.status = EntryStatus::Active;
    p.entries.push_back(appt);
    json j = p;
    CHECK(j.get<DailyPlan>() == p);
    CHECK(j["entries"][1]["start"] == "10:00");
    CHECK(p.entries[1].locked());
  }

  TEST_CASE("parse_entries cleans backend output") {
    Fixture f;
    json entries = json::array({
        raw("09:10", "10:00", "Learning", "Library/Reading Room"),
        raw("07:00", "07:30", "Meal", "Gym/Weight Room"),
        raw("08:00", "09:00", "Sleep", "Dorm/Room 101"),
        raw("11:00", "10:00", "Work", "Lab/Computer Lab"),
        raw("12:00", "13:00", "Exercise", "the weight room please"),
        raw("21:00", "23:30", "Rest", "somewhere"),
        json("not an entry"),
    });
    auto out = parse_entries(entries, f.world, f.window, f.ann.home);
    REQUIRE(out.size() == 4);
    CHECK(out[0].goal == GoalTag::Meal);
    CHECK(out[0].place == "Dorm/Kitchen");
    CHECK(out[1].start == 9 * 60 + 15);
    CHECK(out[1].description == "Learning at Reading Room");
    CHECK(out[2].place == "Gym/Weight Room");
    CHECK(out[3].place == "Dorm/Room 101");
    CHECK(out[3].end == 23 * 60);
  }

  TEST_CASE("fit_plan output is always valid") {
    Fixture f;
    CounterRng rng(5);
    const auto goals = all_goals();
    for (int trial = 0; trial < 300; ++trial) {
      json entries = json::array();
      int n = 3 + static_cast<int>(rng.next() % 10);
      for (int i = 0; i < n; ++i) {
        int s = 300 + static_cast<int>(rng.next() % 1100);
        int len = 15 + static_cast<int>(rng.next() % 240);
        const auto& p = f.world.places[rng.next() % f.world.places.size()];
        entries.push_back(raw(format_hhmm(std::min(s, 1439)), format_hhmm(std::min(s + len, 1440)),
                              std::string(goal_name(goals[rng.next() % goals.size()])), p.id()));
      }
      DailyPlan plan;
      plan.agent = "ann";
      plan.entries = parse_entries(entries, f.world, f.window, f.ann.home);
      fit_plan(plan, f.world, f.window, f.ann.home, f.window.start);
      auto v = plan_violations(plan, f.world, f.window, f.ann.home);
      INFO(json(plan).dump());
      REQUIRE(v.empty());
      for (const auto& e : plan.entries) {
        const auto& p = f.world.at(e.place);
        CHECK(e.start >= p.open);
        CHECK(e.end <= p.close);
        CHECK((e.start - f.window.start) % f.window.tick_minutes == 0);
        CHECK((e.end - f.window.start) % f.window.tick_minutes == 0);
      }
    }
  }

  TEST_CASE("fit_plan keeps fixed entries in place") {
    Fixture f;
    DailyPlan plan;
    auto locked = entry(GoalTag::Appointment, 600, 660, "Cafe/Patio");
    locked.confirmed = true;
    plan.entries = {entry(GoalTag::Meal, 540, 630, "Cafe/Counter"), locked,
                    entry(GoalTag::Meal, 600, 900, "Dorm/Kitchen")};
    fit_plan(plan, f.world, f.window, f.ann.home, f.window.start);
    REQUIRE(plan.entries.size() == 3);
    CHECK(plan.entries[0].start == 540);
    CHECK(plan.entries[0].end == 600 - 15);
    CHECK(plan.entries[1].start == 600);
    CHECK(plan.entries[1].end == 660);
    CHECK(plan.entries[2].start == 660 + travel_time(f.world, "Cafe/Patio", "Dorm/Kitchen") * 15);
    CHECK(plan_violations(plan, f.world, f.window, f.ann.home).empty());
  }

  TEST_CASE("plan_violations names problems") {
    Fixture f;
    DailyPlan plan;
    plan.entries = {entry(GoalTag::Meal, 360, 420, "Gym/Weight Room"), entry(GoalTag::Learning, 400, 300, "Nowhere/Else")};
    auto v = plan_violations(plan, f.world, f.window, f.ann.home);
    CHECK(v == std::vector<std::string>{"entry 0 place does not afford Meal", "entry 0 travel does not fit",
                                         "entry 1 start >= end", "entry 1 unknown place Nowhere/Else",
                                         "entry 1 overlaps previous entry"});
  }

  TEST_CASE("scripted daily plans have five to nine valid entries") {
    Fixture f;
    lm::LmClient client(std::make_shared<lm::ScriptedBackend>(17));
    for (int day = 1; day <= 10; ++day) {
      PlanInputs in;
      in.agent = "ann";
      in.day = day;
      in.character = persona_paragraph(person("Ann", "Outgoing and talkative."));
      in.home = f.ann.home;
      auto plan = generate_daily_plan(in, f.world, f.window, client);
      CHECK_FALSE(plan.degraded);
      CHECK(plan.value.live_count() >= 5);
      CHECK(plan.value.live_count() <= 9);
      CHECK(plan_violations(plan.value, f.world, f.window, in.home).empty());
    }
  }

  TEST_CASE("plan fallbacks") {
    Fixture f;
    auto stub = std::make_shared<test::StubBackend>();
    stub->push(lm::PromptKind::PlanDay, {{"entries", json::array({raw("08:00", "09:00", "Learning", "Library/Reading Room")})}});
    lm::LmClient client(stub);
    PlanInputs in;
    in.agent = "ann";
    in.day = 2;
    in.character = "Ann";
    in.home = f.ann.home;
    auto plan = generate_daily_plan(in, f.world, f.window, client);
    REQUIRE(plan.degraded);
    CHECK(plan.degraded->find("1 usable entries") != std::string::npos);
    CHECK(plan.value.live_count() == 6);
    CHECK(plan_violations(plan.value, f.world, f.window, in.home).empty());

    DailyPlan previous;
    previous.agent = "ann";
    auto appt = entry(GoalTag::Appointment, 600, 660, "Cafe/Patio");
    appt.confirmed = true;
    appt.invitation = "d1-i0";
    previous.entries = {entry(GoalTag::Learning, 480, 540, "Library/Reading Room"), appt};
    stub->fail(lm::PromptKind::PlanDay);
    plan = generate_daily_plan(in, f.world, f.window, client, &previous);
    REQUIRE(plan.degraded);
    REQUIRE(plan.value.entries.size() == 2);
    CHECK_FALSE(plan.value.entries[1].confirmed);
    CHECK_FALSE(plan.value.entries[1].invitation);
    CHECK(plan.value.day == 2);
  }

  TEST_CASE("conflicting entries account for travel") {
    Fixture f;
    DailyPlan plan;
    plan.entries = {entry(GoalTag::Learning, 540, 600, "Library/Reading Room"),
                    entry(GoalTag::Exercise, 720, 780, "Gym/Weight Room")};
    CHECK(conflicting_entries(plan, 600, 660, "Cafe/Patio", f.world) == std::vector<std::size_t>{0});
    CHECK(conflicting_entries(plan, 630, 675, "Cafe/Patio", f.world) == std::vector<std::size_t>{0});
    CHECK(conflicting_entries(plan, 660, 675, "Cafe/Patio", f.world).empty());
    CHECK(conflicting_entries(plan, 660, 720, "Library/Reading Room", f.world) == std::vector<std::size_t>{1});
  }

  TEST_CASE("invitation responses") {
    Fixture f;
    auto stub = std::make_shared<test::StubBackend>();
    lm::LmClient client(stub);
    DailyPlan bob_plan;
    bob_plan.agent = "bob";
    Invitation inv{"d1-i0", "ann", "bob", 600, 660, "Cafe/Patio", "books", "fun", InvitationStatus::Pending, ""};

    auto late = inv;
    late.end = 24 * 60;
    CHECK(respond_invitation(f.bob, late, f.ann, bob_plan, "Bob", f.world, f.window, client).reason == "out of hours");
    auto solo = inv;
    solo.place = "Dorm/Room 101";
    CHECK(respond_invitation(f.bob, solo, f.ann, bob_plan, "Bob", f.world, f.window, client).reason == "venue");
    auto early = inv;
    early.start = 360;
    early.end = 420;
    CHECK(respond_invitation(f.bob, early, f.ann, bob_plan, "Bob", f.world, f.window, client).reason == "out of hours");
    CHECK(stub->requests.empty());

    stub->push(lm::PromptKind::InviteDecide, {{"accept", true}, {"reason", "sounds good"}, {"benefit_new", 0.7}});
    auto r = respond_invitation(f.bob, inv, f.ann, bob_plan, "Bob", f.world, f.window, client);
    CHECK(r.accept);
    CHECK(r.reason == "sounds good");

    auto existing = entry(GoalTag::Appointment, 600, 660, "Cafe/Counter");
    existing.confirmed = true;
    bob_plan.entries.push_back(existing);
    stub->push(lm::PromptKind::InviteDecide,
               {{"accept", true}, {"reason", "r"}, {"benefit_new", 0.4}, {"benefit_existing", 0.6}});
    CHECK_FALSE(respond_invitation(f.bob, inv, f.ann, bob_plan, "Bob", f.world, f.window, client).accept);
    stub->push(lm::PromptKind::InviteDecide,
               {{"accept", false}, {"reason", "r"}, {"benefit_new", 0.9}, {"benefit_existing", 0.6}});
    CHECK(respond_invitation(f.bob, inv, f.ann, bob_plan, "Bob", f.world, f.window, client).accept);
    CHECK(stub->requests.back().context.at("conflicts").size() == 1);

    stub->fail(lm::PromptKind::InviteDecide);
    r = respond_invitation(f.bob, inv, f.ann, bob_plan, "Bob", f.world, f.window, client);
    CHECK_FALSE(r.accept);
    CHECK(r.reason == "unavailable");
    CHECK(r.degraded);
  }

  TEST_CASE("accepted appointments appear in both plans") {
    Fixture f;
    auto stub = std::make_shared<test::StubBackend>();
    stub->push(lm::PromptKind::InviteDecide, {{"accept", true}, {"reason", "yes"}, {"benefit_new", 0.8}});
    stub->push(lm::PromptKind::InviteDecide, {{"accept", false}, {"reason", "busy"}, {"benefit_new", 0.1}});
    lm::LmClient client(stub);
    std::map<AgentId, DailyPlan> plans;
    plans["ann"].agent = "ann";
    plans["bob"].agent = "bob";
    auto appt = entry(GoalTag::Appointment, 600, 660, "Cafe/Patio");
    appt.partner = "bob";
    plans["ann"].entries = {appt};
    plans["bob"].entries = {entry(GoalTag::Learning, 570, 630, "Library/Reading Room")};
    auto late = entry(GoalTag::Appointment, 1200, 1260, "Bar/Taproom");
    late.partner = "ann";
    plans["bob"].entries.push_back(late);

    AppointmentInputs in;
    in.cards = {{"ann", f.ann}, {"bob", f.bob}};
    in.characters = {{"ann", "Ann"}, {"bob", "Bob"}};
    std::vector<json> events;
    auto invs = post_process_appointments(plans, in, f.world, f.window, client, 1,
                                          [&](std::string_view type, json p) {
                                            CHECK(type == "invite");
                                            events.push_back(std::move(p));
                                          });
    REQUIRE(invs.size() == 2);
    CHECK(invs[0].id == "d1-i0");
    CHECK(invs[0].status == InvitationStatus::Accepted);
    CHECK(invs[1].status == InvitationStatus::Rejected);
    REQUIRE(events.size() == 2);
    CHECK(events[0].at("plans").contains("bob"));

    const auto& a = plans["ann"].entries;
    const auto& b = plans["bob"].entries;
    auto find = [](const std::vector<PlanEntry>& es, const std::string& id) -> const PlanEntry* {
      for (const auto& e : es) {
        if (e.invitation == id && e.live()) return &e;
      }
      return nullptr;
    };
    const PlanEntry* mine = find(a, "d1-i0");
    const PlanEntry* theirs = find(b, "d1-i0");
    REQUIRE(mine);
    REQUIRE(theirs);
    CHECK(mine->confirmed);
    CHECK(theirs->confirmed);
    CHECK(mine->start == theirs->start);
    CHECK(mine->end == theirs->end);
    CHECK(mine->place == theirs->place);
    CHECK(theirs->partner == "ann");
    CHECK(b[0].status == EntryStatus::Cancelled);

    const PlanEntry* rejected = find(b, "d1-i1");
    REQUIRE(rejected);
    CHECK_FALSE(rejected->confirmed);
    CHECK_FALSE(find(a, "d1-i1"));
  }

  TEST_CASE("execute_action claims, replaces and cancels") {
    Fixture f;
    lm::LmClient client(std::make_shared<lm::ScriptedBackend>(3));
    OccupancyLedger ledger;
    const auto& carrel = f.world.at("Library/Study Carrel");
    ledger.claim_spot(carrel, "x");
    ledger.claim_spot(carrel, "y");

    DailyPlan plan;
    plan.agent = "ann";
    plan.day = 1;
    plan.entries = {entry(GoalTag::Learning, 600, 660, "Library/Study Carrel")};
    std::vector<std::string> events;
    Emit emit = [&](std::string_view t, json) { events.emplace_back(t); };
    auto out = execute_action(f.ann, plan, 0, {}, f.world, ledger, "Ann", f.window, f.ann.home, client, emit);
    CHECK(out.started);
    CHECK(out.index == 1);
    CHECK(plan.entries[0].status == EntryStatus::Replanned);
    CHECK(plan.entries[1].status == EntryStatus::Active);
    CHECK(out.place != "Library/Study Carrel");
    CHECK(ledger.place_of("ann") == out.place);
    CHECK(events == std::vector<std::string>{"occupied"});
    CHECK_FALSE(out.description.empty());

    OccupancyLedger full;
    for (const auto& p : f.world.places) {
      for (int i = 0; i < p.capacity; ++i) full.claim_spot(p, p.id() + std::to_string(i));
    }
    DailyPlan gym;
    gym.entries = {entry(GoalTag::Exercise, 600, 660, "Gym/Weight Room")};
    events.clear();
    out = execute_action(f.bob, gym, 0, {}, f.world, full, "Bob", f.window, f.bob.home, client, emit);
    CHECK_FALSE(out.started);
    CHECK(gym.entries[0].status == EntryStatus::Cancelled);
    CHECK(events == std::vector<std::string>{"occupied", "cancel"});
  }

  TEST_CASE("execute_action reserves spots for companions") {
    Fixture f;
    lm::LmClient client(std::make_shared<lm::ScriptedBackend>(3));
    OccupancyLedger ledger;
    DailyPlan plan;
    plan.agent = "ann";
    auto appt = entry(GoalTag::Appointment, 600, 660, "Cafe/Patio");
    appt.partner = "bob";
    appt.confirmed = true;
    plan.entries = {appt};
    auto out = execute_action(f.ann, plan, 0, {"bob"}, f.world, ledger, "Ann", f.window, f.ann.home, client, nullptr);
    CHECK(out.claimed);
    CHECK(out.claimed_for == std::vector<AgentId>{"bob"});
    CHECK(ledger.claimed("Cafe/Patio") == 2);

    DailyPlan bob_plan;
    bob_plan.entries = {appt};
    out = execute_action(f.bob, bob_plan, 0, {"ann"}, f.world, ledger, "Bob", f.window, f.bob.home, client, nullptr);
    CHECK(out.started);
    CHECK_FALSE(out.claimed);
    CHECK(ledger.claimed("Cafe/Patio") == 2);
  }

  TEST_CASE("conversation triggers") {
    auto quiet = person("Q", "Quiet, shy and reserved.");
    auto loud = person("L", "Outgoing, talkative and sociable.");
    CHECK(extraversion_factor(quiet) < 1.0);
    CHECK(extraversion_factor(loud) > 1.0);
    auto scored = quiet;
    scored.traits.big_five = BigFiveVector{30, 27, 40, 27, 24};
    CHECK(extraversion_factor(scored) == doctest::Approx(1.5));
    scored.traits.big_five->extraversion = 8;
    CHECK(extraversion_factor(scored) == doctest::Approx(0.5));

    auto social = entry(GoalTag::Social, 600, 660, "Cafe/Patio");
    social.partner = "b";
    TriggerSide a{"a", &social, false, 1.0};
    TriggerSide b{"b", nullptr, false, 1.0};
    CHECK(forced_conversation(a, b));
    CHECK(forced_conversation(b, a));
    TriggerSide c{"c", nullptr, false, 1.0};
    CHECK_FALSE(forced_conversation(a, c));

    TriggerParams params;
    CounterRng rng(1);
    CHECK(maybe_start_conversation(a, b, 0, params, rng));
    CHECK_FALSE(maybe_start_conversation(a, b, 3, params, rng));
    b.in_conversation = true;
    CHECK_FALSE(maybe_start_conversation(a, b, 0, params, rng));
    CHECK(rng.cursor() == 0);
    maybe_start_conversation(a, c, 2, params, rng);
    CHECK(rng.cursor() == 1);

    params.base_probability = 0.3;
    CounterRng draws(77);
    int hits = 0;
    for (int i = 0; i < 20000; ++i) hits += maybe_start_conversation(a, c, 0, params, draws);
    CHECK(hits / 20000.0 == doctest::Approx(0.3).epsilon(0.05));
  }

  TEST_CASE("topics follow up and never repeat") {
    Fixture f;
    auto stub = std::make_shared<test::StubBackend>();
    lm::LmClient client(stub);
    stub->push(lm::PromptKind::DialogTopic, {{"topic", "exams"}});
    CHECK(choose_topic(f.ann, f.bob, {}, "Ann", client) == "exams");

    std::vector<DialogRecord> history = {{1, "exams", "s"}};
    stub->push(lm::PromptKind::DialogTopic, {{"topic", "weekend plans"}});
    auto t = choose_topic(f.ann, f.bob, history, "Ann", client);
    CHECK(t == "weekend plans (following up on: exams)");
    CHECK(topic_core(t) == "weekend plans");

    stub->push(lm::PromptKind::DialogTopic, {{"topic", "exams"}});
    CHECK(choose_topic(f.ann, f.bob, history, "Ann", client) == "exams #2");
    stub->fail(lm::PromptKind::DialogTopic);
    CHECK(choose_topic(f.ann, f.bob, {}, "Ann", client) == "catching up");
  }

  TEST_CASE("dialogue alternates and updates both memories") {
    Fixture f;
    lm::LmClient client(std::make_shared<lm::ScriptedBackend>(9));
    DialogMemory ma, mb;
    auto c = run_dialogue(f.ann, f.bob, "exams", ma, mb, 2, 10, 6, client);
    REQUIRE(c.turns.size() >= 2);
    CHECK(c.turns.size() <= 6);
    for (std::size_t i = 0; i < c.turns.size(); ++i) CHECK(c.turns[i].first == (i % 2 ? "bob" : "ann"));
    CHECK(c.end_tick == 10 + static_cast<int>((c.turns.size() + 1) / 2));
    REQUIRE(ma["bob"].size() == 1);
    REQUIRE(mb["ann"].size() == 1);
    CHECK(ma["bob"][0].topic == "exams");
    CHECK(ma["bob"][0].summary == c.summaries["ann"]);
    CHECK(mb["ann"][0].summary == c.summaries["bob"]);
    CHECK_FALSE(c.truncated);

    auto stub = std::make_shared<test::StubBackend>();
    stub->push(lm::PromptKind::DialogTurn, {{"utterance", "hi"}, {"end", false}});
    stub->fail(lm::PromptKind::DialogTurn);
    lm::LmClient broken(stub);
    c = run_dialogue(f.ann, f.bob, "exams", ma, mb, 2, 10, 6, broken);
    CHECK(c.truncated);
    CHECK(c.turns.size() == 1);
    CHECK(ma["bob"].size() == 2);
  }

  TEST_CASE("partner selection") {
    Fixture f;
    auto stub = std::make_shared<test::StubBackend>();
    lm::LmClient client(stub);
    auto cleo = make_card("cleo", person("Cleo", "Warm."), "Dorm/Room 103");
    CHECK_THROWS_AS(select_partner(f.ann, {}, {}, "Ann", client), InputError);
    CHECK(select_partner(f.ann, {f.bob}, {}, "Ann", client).first == "bob");
    CHECK(stub->requests.empty());
    stub->push(lm::PromptKind::PartnerSelect, {{"partner", "cleo"}, {"reason", "old friend"}});
    auto pick = select_partner(f.ann, {f.bob, cleo}, {}, "Ann", client);
    CHECK(pick == std::pair<AgentId, std::string>{"cleo", "old friend"});
    stub->push(lm::PromptKind::PartnerSelect, {{"partner", "zed"}, {"reason", "?"}});
    CHECK(select_partner(f.ann, {f.bob, cleo}, {}, "Ann", client).first == "bob");
  }
}
