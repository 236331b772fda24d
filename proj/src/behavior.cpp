#include "psim/behavior.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "psim/lexicon.hpp"

namespace psim {
namespace {

constexpr std::string_view kStatusNames[] = {"pending", "active", "done", "cancelled",
                                             "replanned"};
constexpr std::string_view kInvitationStatusNames[] = {"pending", "accepted", "rejected",
                                                       "superseded"};

bool fixed_entry(const PlanEntry& e) {
  return e.status == EntryStatus::Active || e.status == EntryStatus::Done || e.locked();
}

bool affords_entry(const WorldMap& world, const Place& place, GoalTag goal,
                   const std::string& home) {
  (void)world;
  return place.affords(goal) || (goal == GoalTag::Rest && place.id() == home);
}

int travel_minutes(const WorldMap& world, const std::string& from, const std::string& to) {
  if (from.empty() || to.empty() || !world.find(from) || !world.find(to)) return 0;
  return travel_time(world, from, to) * world.tick_minutes;
}

int snap_up(int m, const DayWindow& w) {
  if (m <= w.start) return w.start;
  int k = (m - w.start + w.tick_minutes - 1) / w.tick_minutes;
  return w.start + k * w.tick_minutes;
}

int snap_down(int m, const DayWindow& w) {
  if (m <= w.start) return w.start;
  return w.start + ((m - w.start) / w.tick_minutes) * w.tick_minutes;
}

std::string place_name(const WorldMap& world, const std::string& id) {
  const Place* p = world.find(id);
  return p ? p->name : id;
}

std::string str_or(const json& j, const char* key, std::string fallback) {
  auto it = j.find(key);
  if (it != j.end() && it->is_string() && !normalize_ws(it->get<std::string>()).empty()) {
    return it->get<std::string>();
  }
  return fallback;
}

// Resolves a free-text place to a place affording `goal`: an exact id, then
// a place whose name appears in the text, then the first affording place.
const Place* site(const WorldMap& world, std::string_view requested, GoalTag goal,
                  const std::string& home) {
  if (const Place* p = world.find(requested)) {
    if (affords_entry(world, *p, goal, home)) return p;
  }
  if (goal == GoalTag::Rest) {
    if (const Place* h = world.find(home)) return h;
  }
  auto candidates = places_for_goal(world, goal);
  if (candidates.empty()) return nullptr;
  std::string req = lexicon::lower(requested);
  for (const Place* p : candidates) {
    if (!req.empty() && req.find(lexicon::lower(p->name)) != std::string::npos) return p;
  }
  return candidates.front();
}

json entry_context(const PlanEntry& e) {
  json j = e;
  return j;
}

}  // namespace

int DayWindow::tick_at_or_after(int m) const {
  if (m <= start) return 0;
  return (m - start + tick_minutes - 1) / tick_minutes;
}

std::string_view status_name(EntryStatus s) { return kStatusNames[static_cast<int>(s)]; }

std::optional<EntryStatus> parse_status(std::string_view s) {
  for (int i = 0; i < 5; ++i) {
    if (kStatusNames[i] == s) return static_cast<EntryStatus>(i);
  }
  return std::nullopt;
}

std::string_view invitation_status_name(InvitationStatus s) {
  return kInvitationStatusNames[static_cast<int>(s)];
}

std::vector<std::size_t> DailyPlan::live_indices() const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < entries.size(); ++i) {
    if (entries[i].live()) out.push_back(i);
  }
  return out;
}

void to_json(json& j, const PlanEntry& e) {
  j = {{"start", format_hhmm(e.start)},
       {"end", format_hhmm(e.end)},
       {"goal", goal_name(e.goal)},
       {"place", e.place},
       {"description", e.description},
       {"motivation", e.motivation},
       {"status", status_name(e.status)},
       {"confirmed", e.confirmed}};
  j["partner"] = e.partner ? json(*e.partner) : json(nullptr);
  j["invitation"] = e.invitation ? json(*e.invitation) : json(nullptr);
}

void from_json(const json& j, PlanEntry& e) {
  auto start = parse_hhmm(j.at("start").get<std::string>());
  auto end = parse_hhmm(j.at("end").get<std::string>());
  auto goal = parse_goal(j.at("goal").get<std::string>());
  if (!start || !end || !goal) throw InputError("plan entry: bad time or goal: " + j.dump());
  e.start = *start;
  e.end = *end;
  e.goal = *goal;
  e.place = j.at("place").get<std::string>();
  e.description = j.value("description", "");
  e.motivation = j.value("motivation", "");
  auto status = parse_status(j.value("status", "pending"));
  if (!status) throw InputError("plan entry: bad status");
  e.status = *status;
  e.confirmed = j.value("confirmed", false);
  e.partner.reset();
  e.invitation.reset();
  if (j.contains("partner") && j.at("partner").is_string()) e.partner = j.at("partner").get<std::string>();
  if (j.contains("invitation") && j.at("invitation").is_string()) {
    e.invitation = j.at("invitation").get<std::string>();
  }
}

void to_json(json& j, const DailyPlan& p) {
  j = {{"agent", p.agent}, {"day", p.day}, {"entries", p.entries}};
}

void from_json(const json& j, DailyPlan& p) {
  p.agent = j.at("agent").get<std::string>();
  p.day = j.at("day").get<int>();
  p.entries = j.at("entries").get<std::vector<PlanEntry>>();
}

void to_json(json& j, const Invitation& inv) {
  j = {{"id", inv.id},         {"from", inv.from},
       {"to", inv.to},         {"start", format_hhmm(inv.start)},
       {"end", format_hhmm(inv.end)}, {"place", inv.place},
       {"topic", inv.topic},   {"reason", inv.reason},
       {"status", invitation_status_name(inv.status)}, {"response", inv.response}};
}

void from_json(const json& j, Invitation& inv) {
  inv.id = j.at("id").get<std::string>();
  inv.from = j.at("from").get<std::string>();
  inv.to = j.at("to").get<std::string>();
  inv.start = parse_hhmm(j.at("start").get<std::string>()).value_or(0);
  inv.end = parse_hhmm(j.at("end").get<std::string>()).value_or(0);
  inv.place = j.at("place").get<std::string>();
  inv.topic = j.value("topic", "");
  inv.reason = j.value("reason", "");
  inv.response = j.value("response", "");
  auto s = j.value("status", "pending");
  inv.status = InvitationStatus::Pending;
  for (int i = 0; i < 4; ++i) {
    if (kInvitationStatusNames[i] == s) inv.status = static_cast<InvitationStatus>(i);
  }
}

void to_json(json& j, const DialogRecord& r) {
  j = {{"day", r.day}, {"topic", r.topic}, {"summary", r.summary}};
}

void from_json(const json& j, DialogRecord& r) {
  r.day = j.at("day").get<int>();
  r.topic = j.at("topic").get<std::string>();
  r.summary = j.at("summary").get<std::string>();
}

void to_json(json& j, const Conversation& c) {
  json turns = json::array();
  for (const auto& [speaker, text] : c.turns) turns.push_back({{"speaker", speaker}, {"text", text}});
  j = {{"participants", c.participants}, {"topic", c.topic},
       {"turns", turns},                 {"start_tick", c.start_tick},
       {"end_tick", c.end_tick},         {"summaries", c.summaries},
       {"truncated", c.truncated}};
}

AgentCard make_card(const AgentId& id, const CharacterStructure& cs, const std::string& home) {
  AgentCard card;
  card.id = id;
  card.name = cs.name().empty() ? id : cs.name();
  card.profession = cs.profession();
  card.traits = lexicon::first_sentence(cs.traits.prose);
  card.interests = cs.preference.hobbies;
  card.home = home;
  return card;
}

json to_context(const AgentCard& card) {
  return {{"id", card.id},
          {"name", card.name},
          {"profession", card.profession},
          {"traits", card.traits},
          {"interests", card.interests}};
}

// ---- planning ---------------------------------------------------------

json places_context(const WorldMap& world) {
  json out = json::array();
  for (const auto& p : world.places) {
    std::vector<std::string> aff;
    for (auto g : p.affordances) aff.emplace_back(goal_name(g));
    out.push_back({{"id", p.id()},
                   {"affordances", aff},
                   {"capacity", p.capacity},
                   {"x", p.x},
                   {"y", p.y},
                   {"open", format_hhmm(p.open)},
                   {"close", format_hhmm(p.close)},
                   {"description", p.description}});
  }
  return out;
}

std::vector<std::string> plan_violations(const DailyPlan& plan, const WorldMap& world,
                                         const DayWindow& window, const std::string& home) {
  std::vector<std::string> out;
  const PlanEntry* prev = nullptr;
  for (std::size_t i = 0; i < plan.entries.size(); ++i) {
    const auto& e = plan.entries[i];
    if (!e.live()) continue;
    const std::string tag = "entry " + std::to_string(i) + " ";
    if (e.start >= e.end) out.push_back(tag + "start >= end");
    if (e.start < window.start || e.end > window.end) out.push_back(tag + "outside day window");
    const Place* p = world.find(e.place);
    if (!p) {
      out.push_back(tag + "unknown place " + e.place);
    } else if (!affords_entry(world, *p, e.goal, home)) {
      out.push_back(tag + "place does not afford " + std::string(goal_name(e.goal)));
    }
    const std::string from = prev ? prev->place : home;
    const int from_minute = prev ? prev->end : window.start;
    if (prev && e.start < prev->end) {
      out.push_back(tag + "overlaps previous entry");
    } else if (p && e.start - from_minute < travel_minutes(world, from, e.place)) {
      out.push_back(tag + "travel does not fit");
    }
    prev = &e;
  }
  return out;
}

std::vector<PlanEntry> parse_entries(const json& entries, const WorldMap& world,
                                     const DayWindow& window, const std::string& home) {
  std::vector<PlanEntry> out;
  if (!entries.is_array()) return out;
  for (const auto& raw : entries) {
    if (!raw.is_object()) continue;
    auto goal = parse_goal(raw.value("goal", ""));
    auto start = parse_hhmm(raw.value("start", ""));
    auto end = parse_hhmm(raw.value("end", ""));
    if (!goal || !start || !end) continue;
    PlanEntry e;
    e.goal = *goal;
    e.start = std::clamp(snap_up(*start, window), window.start, window.end);
    e.end = std::clamp(snap_up(*end, window), window.start, window.end);
    if (e.start >= e.end) continue;
    const Place* p = site(world, raw.value("place", ""), e.goal, home);
    if (!p) continue;
    e.place = p->id();
    e.description = str_or(raw, "description",
                           std::string(goal_name(e.goal)) + " at " + p->name);
    e.motivation = str_or(raw, "motivation", "");
    if (raw.contains("partner") && raw.at("partner").is_string()) {
      e.partner = raw.at("partner").get<std::string>();
    }
    out.push_back(std::move(e));
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const PlanEntry& a, const PlanEntry& b) { return a.start < b.start; });
  return out;
}

void fit_plan(DailyPlan& plan, const WorldMap& world, const DayWindow& window,
              const std::string& origin, int origin_minute) {
  auto& es = plan.entries;
  std::stable_sort(es.begin(), es.end(),
                   [](const PlanEntry& a, const PlanEntry& b) { return a.start < b.start; });

  std::vector<bool> drop(es.size(), false);
  std::string prev_place = origin;
  int prev_end = origin_minute;
  for (std::size_t i = 0; i < es.size(); ++i) {
    auto& e = es[i];
    if (!e.live()) continue;
    if (fixed_entry(e)) {
      prev_place = e.place;
      prev_end = e.end;
      continue;
    }
    const Place* p = world.find(e.place);
    int start = std::max(e.start, prev_end + travel_minutes(world, prev_place, e.place));
    int end = std::min(e.end, window.end);
    if (p) {
      start = std::max(start, p->open);
      end = std::min(end, p->close);
    }
    for (std::size_t k = i + 1; k < es.size(); ++k) {
      if (es[k].live() && fixed_entry(es[k])) {
        end = std::min(end, es[k].start - travel_minutes(world, e.place, es[k].place));
        break;
      }
    }
    start = snap_up(start, window);
    end = snap_down(end, window);
    if (start >= end) {
      drop[i] = true;
      continue;
    }
    e.start = start;
    e.end = end;
    prev_place = e.place;
    prev_end = e.end;
  }
  std::vector<PlanEntry> kept;
  for (std::size_t i = 0; i < es.size(); ++i) {
    if (!drop[i]) kept.push_back(std::move(es[i]));
  }
  std::stable_sort(kept.begin(), kept.end(),
                   [](const PlanEntry& a, const PlanEntry& b) { return a.start < b.start; });
  es = std::move(kept);
}

namespace {

DailyPlan default_plan(const PlanInputs& in, const WorldMap& world, const DayWindow& window) {
  struct Slot {
    GoalTag goal;
    int start;
    int end;
    const char* what;
  };
  const Slot slots[] = {{GoalTag::Meal, 7 * 60, 7 * 60 + 45, "Have breakfast"},
                        {GoalTag::Learning, 8 * 60 + 30, 11 * 60 + 30, "Study"},
                        {GoalTag::Meal, 12 * 60, 13 * 60, "Have lunch"},
                        {GoalTag::Relaxation, 14 * 60, 16 * 60, "Take a break"},
                        {GoalTag::Meal, 18 * 60, 19 * 60, "Have dinner"},
                        {GoalTag::Rest, 21 * 60, 23 * 60, "Rest"}};
  DailyPlan plan;
  plan.agent = in.agent;
  plan.day = in.day;
  for (const auto& s : slots) {
    const Place* p = site(world, "", s.goal, in.home);
    if (!p) continue;
    PlanEntry e;
    e.goal = s.goal;
    e.start = s.start;
    e.end = s.end;
    e.place = p->id();
    e.description = s.what;
    e.motivation = "keep a steady routine";
    plan.entries.push_back(e);
  }
  fit_plan(plan, world, window, in.home, window.start);
  return plan;
}

}  // namespace

Degradable<DailyPlan> generate_daily_plan(const PlanInputs& in, const WorldMap& world,
                                          const DayWindow& window, const lm::LmClient& client,
                                          const DailyPlan* previous) {
  lm::PromptRequest req;
  req.kind = lm::PromptKind::PlanDay;
  req.agent_id = in.agent;
  req.day = in.day;
  req.context = {{"agent", in.agent},
                 {"character", in.character},
                 {"places", places_context(world)},
                 {"day", in.day},
                 {"home", in.home},
                 {"memory", in.memory},
                 {"insight", in.insight},
                 {"acquaintances", in.acquaintances},
                 {"window", {{"start", format_hhmm(window.start)}, {"end", format_hhmm(window.end)}}},
                 {"tick_minutes", world.tick_minutes},
                 {"move_speed", world.move_speed}};

  std::string problem;
  try {
    auto resp = client.complete(req);
    DailyPlan plan;
    plan.agent = in.agent;
    plan.day = in.day;
    plan.entries = parse_entries(resp.payload.at("entries"), world, window, in.home);
    fit_plan(plan, world, window, in.home, window.start);
    if (plan.live_count() > 9) plan.entries.resize(9);
    if (plan.live_count() >= 5) return {std::move(plan), std::nullopt};
    problem = "plan has " + std::to_string(plan.live_count()) + " usable entries";
  } catch (const DecodeError& e) {
    problem = e.what();
  } catch (const BackendError& e) {
    problem = e.what();
  }

  DailyPlan fallback;
  if (previous && !previous->entries.empty()) {
    fallback.agent = in.agent;
    fallback.day = in.day;
    for (const auto& e : previous->entries) {
      if (!e.live()) continue;
      PlanEntry copy = e;
      copy.status = EntryStatus::Pending;
      copy.confirmed = false;
      copy.invitation.reset();
      if (!world.find(copy.place)) continue;
      fallback.entries.push_back(std::move(copy));
    }
    fit_plan(fallback, world, window, in.home, window.start);
  }
  if (fallback.entries.empty()) fallback = default_plan(in, world, window);
  return {std::move(fallback), "plan fallback: " + problem};
}

// ---- appointments -----------------------------------------------------

std::vector<std::size_t> conflicting_entries(const DailyPlan& plan, int start, int end,
                                             const std::string& place, const WorldMap& world) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < plan.entries.size(); ++i) {
    const auto& e = plan.entries[i];
    if (!e.live()) continue;
    if (e.start < end + travel_minutes(world, place, e.place) &&
        start < e.end + travel_minutes(world, e.place, place)) {
      out.push_back(i);
    }
  }
  return out;
}

InvitationResponse respond_invitation(const AgentCard& invitee, const Invitation& invitation,
                                      const AgentCard& inviter, const DailyPlan& invitee_plan,
                                      const json& invitee_character, const WorldMap& world,
                                      const DayWindow& window, const lm::LmClient& client) {
  InvitationResponse r;
  if (invitation.start < window.start || invitation.end > window.end ||
      invitation.start >= invitation.end) {
    r.reason = "out of hours";
    return r;
  }
  const Place* venue = world.find(invitation.place);
  if (!venue || venue->capacity < 2) {
    r.reason = "venue";
    return r;
  }
  if (invitation.start - window.start < travel_minutes(world, invitee.home, invitation.place)) {
    r.reason = "out of hours";
    return r;
  }

  json conflicts = json::array();
  bool confirmed_conflict = false;
  for (auto i : conflicting_entries(invitee_plan, invitation.start, invitation.end,
                                    invitation.place, world)) {
    const auto& e = invitee_plan.entries[i];
    json c = entry_context(e);
    conflicts.push_back(c);
    confirmed_conflict = confirmed_conflict || e.locked();
  }

  lm::PromptRequest req;
  req.kind = lm::PromptKind::InviteDecide;
  req.agent_id = invitee.id;
  req.context = {{"character", invitee_character},
                 {"invitation",
                  {{"from", to_context(inviter)},
                   {"start", format_hhmm(invitation.start)},
                   {"end", format_hhmm(invitation.end)},
                   {"place", invitation.place},
                   {"topic", invitation.topic},
                   {"reason", invitation.reason}}},
                 {"conflicts", conflicts}};
  try {
    auto resp = client.complete(req);
    const auto& p = resp.payload;
    r.accept = p.at("accept").get<bool>();
    r.reason = str_or(p, "reason", r.accept ? "accepted" : "declined");
    r.benefit_new = p.at("benefit_new").get<double>();
    if (p.contains("benefit_existing") && p.at("benefit_existing").is_number()) {
      r.benefit_existing = p.at("benefit_existing").get<double>();
    }
    // An accepted appointment is only displaced by a more beneficial one.
    if (confirmed_conflict && r.benefit_existing) {
      r.accept = r.benefit_new > *r.benefit_existing;
    }
  } catch (const BackendError& e) {
    r = {};
    r.reason = "unavailable";
    r.degraded = e.what();
  } catch (const DecodeError& e) {
    r = {};
    r.reason = "unavailable";
    r.degraded = e.what();
  }
  return r;
}

std::vector<Invitation> post_process_appointments(std::map<AgentId, DailyPlan>& plans,
                                                  const AppointmentInputs& in,
                                                  const WorldMap& world, const DayWindow& window,
                                                  const lm::LmClient& client, int day,
                                                  const Emit& emit) {
  std::vector<Invitation> invitations;
  int counter = 0;

  auto find_invitation = [&](const std::string& id) -> Invitation* {
    for (auto& inv : invitations) {
      if (inv.id == id) return &inv;
    }
    return nullptr;
  };

  std::vector<AgentId> ids;
  for (const auto& [id, _] : plans) ids.push_back(id);

  for (const auto& from : ids) {
    for (std::size_t i = 0; i < plans[from].entries.size(); ++i) {
      PlanEntry entry = plans[from].entries[i];
      if (!entry.live() || entry.goal != GoalTag::Appointment || entry.confirmed ||
          entry.invitation || !entry.partner || *entry.partner == from ||
          !plans.count(*entry.partner) || !in.cards.count(*entry.partner)) {
        continue;
      }
      const AgentId to = *entry.partner;
      const AgentCard& from_card = in.cards.at(from);
      const AgentCard& to_card = in.cards.at(to);

      Invitation inv;
      inv.id = "d" + std::to_string(day) + "-i" + std::to_string(counter++);
      inv.from = from;
      inv.to = to;
      inv.start = entry.start;
      inv.end = entry.end;
      inv.place = entry.place;

      lm::PromptRequest send;
      send.kind = lm::PromptKind::InviteSend;
      send.agent_id = from;
      send.day = day;
      send.context = {{"character", in.characters.at(from)},
                      {"invitee", to_context(to_card)},
                      {"slot",
                       {{"start", format_hhmm(inv.start)},
                        {"end", format_hhmm(inv.end)},
                        {"place", inv.place}}},
                      {"entry", entry_context(entry)}};
      try {
        auto resp = client.complete(send);
        inv.topic = str_or(resp.payload, "topic", "catching up");
        inv.reason = str_or(resp.payload, "reason", "wants to meet");
      } catch (const Error&) {
        inv.topic = "catching up";
        inv.reason = "wants to meet";
      }

      auto response = respond_invitation(to_card, inv, from_card, plans[to],
                                         in.characters.at(to), world, window, client);
      inv.response = response.reason;
      std::set<AgentId> touched = {from, to};
      std::vector<std::string> superseded;

      auto& inviter_entry = plans[from].entries[i];
      inviter_entry.invitation = inv.id;
      if (response.accept) {
        inv.status = InvitationStatus::Accepted;
        auto& to_plan = plans[to];
        for (auto k : conflicting_entries(to_plan, inv.start, inv.end, inv.place, world)) {
          auto& c = to_plan.entries[k];
          if (c.locked() && c.invitation) {
            if (Invitation* old = find_invitation(*c.invitation)) {
              old->status = InvitationStatus::Superseded;
              superseded.push_back(old->id);
              for (auto& [pid, plan] : plans) {
                for (auto& pe : plan.entries) {
                  if (pe.invitation == old->id && pe.live()) {
                    pe.status = EntryStatus::Cancelled;
                    touched.insert(pid);
                  }
                }
              }
            }
          }
          c.status = EntryStatus::Cancelled;
        }
        inviter_entry.confirmed = true;
        inviter_entry.description = "Meet " + to_card.name + " at " +
                                    place_name(world, inv.place) + " to talk about " + inv.topic;

        PlanEntry mirror;
        mirror.start = inv.start;
        mirror.end = inv.end;
        mirror.goal = GoalTag::Appointment;
        mirror.place = inv.place;
        mirror.description = "Meet " + from_card.name + " at " + place_name(world, inv.place) +
                             " to talk about " + inv.topic;
        mirror.motivation = response.reason;
        mirror.partner = from;
        mirror.invitation = inv.id;
        mirror.confirmed = true;
        to_plan.entries.push_back(std::move(mirror));
        std::stable_sort(to_plan.entries.begin(), to_plan.entries.end(),
                         [](const PlanEntry& a, const PlanEntry& b) { return a.start < b.start; });
      } else {
        inv.status = InvitationStatus::Rejected;
      }
      invitations.push_back(inv);

      if (emit) {
        json touched_plans = json::object();
        for (const auto& t : touched) touched_plans[t] = plans[t];
        json resp = {{"accept", response.accept},
                     {"reason", response.reason},
                     {"benefit_new", response.benefit_new}};
        resp["benefit_existing"] =
            response.benefit_existing ? json(*response.benefit_existing) : json(nullptr);
        resp["degraded"] = response.degraded ? json(*response.degraded) : json(nullptr);
        emit("invite", {{"invitation", inv},
                        {"response", resp},
                        {"superseded", superseded},
                        {"plans", touched_plans}});
      }
    }
  }
  return invitations;
}

// ---- actions ----------------------------------------------------------

ActionOutcome execute_action(const AgentCard& agent, DailyPlan& plan, std::size_t index,
                             const std::vector<AgentId>& companions, const WorldMap& world,
                             OccupancyLedger& ledger, const json& character,
                             const DayWindow& window, const std::string& origin,
                             const lm::LmClient& client, const Emit& emit, int max_attempts) {
  ActionOutcome out;
  std::vector<std::string> tried;
  std::size_t idx = index;

  for (int attempt = 0;; ++attempt) {
    PlanEntry& e = plan.entries[idx];
    const Place& place = world.at(e.place);

    bool ok = false;
    auto held = ledger.place_of(agent.id);
    if (held && *held == e.place) {
      ok = true;
    } else {
      if (held) ledger.release_spot(agent.id);
      auto r = ledger.claim_spot(place, agent.id, companions);
      ok = r.ok;
      out.claimed = r.ok;
    }

    if (ok) {
      out.claimed_for.clear();
      if (out.claimed) {
        auto it = ledger.spots().find(e.place);
        if (it != ledger.spots().end()) {
          for (const auto& s : it->second) {
            if (s.reserved_by == agent.id && s.holder != agent.id) out.claimed_for.push_back(s.holder);
          }
        }
      }
      lm::PromptRequest req;
      req.kind = lm::PromptKind::ActionDescribe;
      req.agent_id = agent.id;
      req.day = plan.day;
      req.context = {{"agent", to_context(agent)},
                     {"character", character},
                     {"entry", entry_context(e)},
                     {"place", {{"id", place.id()}, {"name", place.name}, {"description", place.description}}}};
      try {
        out.description = client.complete(req).payload.at("text").get<std::string>();
      } catch (const Error&) {
        out.description = agent.name + " is at " + place.name + ": " + e.description + ".";
      }
      e.status = EntryStatus::Active;
      out.started = true;
      out.index = idx;
      out.place = e.place;
      return out;
    }

    tried.push_back(e.place);
    const int group = 1 + static_cast<int>(std::count_if(companions.begin(), companions.end(),
                                                          [&](const AgentId& c) {
                                                            return c != agent.id && !ledger.place_of(c);
                                                          }));

    // Gaps around the entry bound how far a replacement may be.
    int prev_end = window.start;
    std::string prev_place = origin;
    const PlanEntry* next = nullptr;
    for (std::size_t k = 0; k < plan.entries.size(); ++k) {
      const auto& o = plan.entries[k];
      if (k == idx || !o.live()) continue;
      if (o.end <= e.start && o.end >= prev_end) {
        prev_end = o.end;
        prev_place = o.place;
      }
      if (o.start >= e.end && (!next || o.start < next->start)) next = &o;
    }
    std::vector<const Place*> candidates;
    auto pool = places_for_goal(world, e.goal);
    if (e.goal == GoalTag::Rest) {
      if (const Place* h = world.find(agent.home); h && !h->affords(GoalTag::Rest)) pool.push_back(h);
    }
    for (const Place* c : pool) {
      if (std::find(tried.begin(), tried.end(), c->id()) != tried.end()) continue;
      if (c->capacity - ledger.claimed(c->id()) < group) continue;
      if (e.start - prev_end < travel_minutes(world, prev_place, c->id())) continue;
      if (next && next->start - e.end < travel_minutes(world, c->id(), next->place)) continue;
      if (c->open > e.start || c->close < e.end) continue;
      candidates.push_back(c);
    }

    if (candidates.empty() || attempt + 1 >= max_attempts) {
      e.status = EntryStatus::Cancelled;
      if (emit) {
        emit("occupied", {{"place", e.place}, {"index", idx}, {"replacement", nullptr}});
        emit("cancel", {{"index", idx}, {"reason", "no free place for " + std::string(goal_name(e.goal))}});
      }
      out.started = false;
      out.index = idx;
      return out;
    }

    std::vector<std::string> candidate_ids;
    for (const Place* c : candidates) candidate_ids.push_back(c->id());
    PlanEntry replacement = e;
    replacement.status = EntryStatus::Pending;
    replacement.place = candidates.front()->id();

    lm::PromptRequest req;
    req.kind = lm::PromptKind::PlanRevise;
    req.agent_id = agent.id;
    req.day = plan.day;
    req.context = {{"agent", agent.id},
                   {"character", character},
                   {"places", places_context(world)},
                   {"remaining", json::array({entry_context(e)})},
                   {"reason", "occupied: " + e.place},
                   {"exclude", tried},
                   {"candidates", candidate_ids}};
    try {
      auto resp = client.complete(req);
      const auto& entries = resp.payload.at("entries");
      if (!entries.empty()) {
        const auto& first = entries.front();
        std::string wanted = first.value("place", "");
        if (std::find(candidate_ids.begin(), candidate_ids.end(), wanted) != candidate_ids.end()) {
          replacement.place = wanted;
        }
        replacement.description = str_or(first, "description", replacement.description);
        replacement.motivation = str_or(first, "motivation", replacement.motivation);
      }
    } catch (const Error&) {
    }

    e.status = EntryStatus::Replanned;
    plan.entries.insert(plan.entries.begin() + static_cast<std::ptrdiff_t>(idx) + 1, replacement);
    if (emit) {
      emit("occupied", {{"place", tried.back()},
                        {"index", idx},
                        {"replacement", plan.entries[idx + 1].place}});
    }
    ++idx;
  }
}

// ---- dialogue ---------------------------------------------------------

double extraversion_factor(const CharacterStructure& cs) {
  if (cs.traits.big_five) {
    double e = cs.traits.big_five->extraversion;
    return std::clamp(0.5 + (e - 8.0) / 32.0, 0.5, 1.5);
  }
  int level = std::clamp(lexicon::cue_balance(cs.traits.prose, lexicon::Trait::Extraversion), -2, 2);
  return 1.0 + 0.25 * level;
}

bool forced_conversation(const TriggerSide& a, const TriggerSide& b) {
  auto targets = [](const TriggerSide& x, const TriggerSide& y) {
    return x.active && (x.active->goal == GoalTag::Social || x.active->goal == GoalTag::Appointment) &&
           x.active->partner && *x.active->partner == y.id;
  };
  return targets(a, b) || targets(b, a);
}

bool maybe_start_conversation(const TriggerSide& a, const TriggerSide& b, int distance,
                              const TriggerParams& params, CounterRng& rng) {
  if (a.in_conversation || b.in_conversation || a.id == b.id) return false;
  if (distance > params.radius) return false;
  if (forced_conversation(a, b)) return true;
  const double factor = 0.5 * (a.extraversion + b.extraversion);
  const double p = std::clamp(params.base_probability * factor, 0.0, 1.0);
  return rng.uniform() < p;
}

std::string topic_core(std::string_view topic) {
  auto pos = topic.find(" (following up on:");
  return normalize_ws(topic.substr(0, pos));
}

std::string choose_topic(const AgentCard& agent, const AgentCard& partner,
                         const std::vector<DialogRecord>& history, const json& character,
                         const lm::LmClient& client) {
  json hist = json::array();
  for (const auto& r : history) hist.push_back(r);
  lm::PromptRequest req;
  req.kind = lm::PromptKind::DialogTopic;
  req.agent_id = agent.id;
  req.context = {{"character", character}, {"partner", to_context(partner)}, {"history", hist}};

  std::string topic;
  try {
    topic = normalize_ws(client.complete(req).payload.at("topic").get<std::string>());
  } catch (const Error&) {
  }
  if (topic.empty()) topic = "catching up";
  if (!history.empty()) {
    const std::string latest = topic_core(history.back().topic);
    if (topic.find(latest) == std::string::npos) {
      topic = topic_core(topic) + " (following up on: " + latest + ")";
    }
  }
  auto used = [&](const std::string& t) {
    return std::any_of(history.begin(), history.end(),
                       [&](const DialogRecord& r) { return r.topic == t; });
  };
  if (used(topic)) {
    const std::string base = topic;
    for (int n = 2; used(topic); ++n) topic = base + " #" + std::to_string(n);
  }
  return topic;
}

Conversation run_dialogue(const AgentCard& a, const AgentCard& b, const std::string& topic,
                          DialogMemory& memory_a, DialogMemory& memory_b, int day,
                          int start_tick, int max_turns, const lm::LmClient& client) {
  Conversation c;
  c.participants = {a.id, b.id};
  c.topic = topic;
  c.start_tick = start_tick;
  max_turns = std::max(2, max_turns);

  json turns = json::array();
  for (int t = 0; t < max_turns; ++t) {
    const AgentCard& speaker = (t % 2 == 0) ? a : b;
    const AgentCard& listener = (t % 2 == 0) ? b : a;
    lm::PromptRequest req;
    req.kind = lm::PromptKind::DialogTurn;
    req.agent_id = speaker.id;
    req.day = day;
    req.tick = start_tick;
    req.context = {{"speaker", to_context(speaker)},
                   {"listener", to_context(listener)},
                   {"topic", topic},
                   {"turns", turns},
                   {"max_turns", max_turns}};
    try {
      auto resp = client.complete(req);
      std::string text = resp.payload.at("utterance").get<std::string>();
      c.turns.emplace_back(speaker.id, text);
      turns.push_back({{"speaker", speaker.name}, {"text", text}});
      if (resp.payload.at("end").get<bool>() && c.turns.size() >= 2) break;
    } catch (const Error&) {
      c.truncated = true;
      break;
    }
  }
  c.end_tick = start_tick + static_cast<int>((c.turns.size() + 1) / 2);

  auto summarize = [&](const AgentCard& self, const AgentCard& other) {
    lm::PromptRequest req;
    req.kind = lm::PromptKind::DialogSummary;
    req.agent_id = self.id;
    req.day = day;
    req.tick = start_tick;
    req.context = {{"character", to_context(self)},
                   {"partner", to_context(other)},
                   {"topic", topic},
                   {"turns", turns}};
    try {
      return client.complete(req).payload.at("summary").get<std::string>();
    } catch (const Error&) {
      return "Talked with " + other.name + " about " + topic + ".";
    }
  };
  c.summaries[a.id] = summarize(a, b);
  c.summaries[b.id] = summarize(b, a);
  memory_a[b.id].push_back({day, topic, c.summaries[a.id]});
  memory_b[a.id].push_back({day, topic, c.summaries[b.id]});
  return c;
}

std::pair<AgentId, std::string> select_partner(const AgentCard& agent,
                                               const std::vector<AgentCard>& candidates,
                                               const DialogMemory& memory,
                                               const json& character,
                                               const lm::LmClient& client) {
  if (candidates.empty()) throw InputError("select_partner: no candidates");
  if (candidates.size() == 1) {
    return {candidates.front().id, "the only person nearby is " + candidates.front().name};
  }
  json cands = json::array();
  for (const auto& c : candidates) {
    json j = to_context(c);
    auto it = memory.find(c.id);
    j["conversations"] = it == memory.end() ? 0 : static_cast<int>(it->second.size());
    cands.push_back(j);
  }
  lm::PromptRequest req;
  req.kind = lm::PromptKind::PartnerSelect;
  req.agent_id = agent.id;
  req.context = {{"character", character}, {"self", to_context(agent)}, {"candidates", cands}};
  try {
    auto resp = client.complete(req);
    std::string chosen = resp.payload.at("partner").get<std::string>();
    for (const auto& c : candidates) {
      if (c.id == chosen) {
        return {chosen, str_or(resp.payload, "reason", "wants to talk with " + c.name)};
      }
    }
  } catch (const Error&) {
  }
  return {candidates.front().id, "wants to talk with " + candidates.front().name};
}

}  // namespace psim
