#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "psim/canonical.hpp"
#include "psim/character.hpp"
#include "psim/environment.hpp"
#include "psim/lm/client.hpp"

namespace psim {

// Simulated day window, in minutes of day, cut into fixed ticks.
struct DayWindow {
  int start = 6 * 60;
  int end = 23 * 60;
  int tick_minutes = 15;

  int ticks() const { return (end - start) / tick_minutes; }
  int minute_of(int tick) const { return start + tick * tick_minutes; }
  // First tick whose minute is >= m.
  int tick_at_or_after(int m) const;
};

enum class EntryStatus { Pending, Active, Done, Cancelled, Replanned };

std::string_view status_name(EntryStatus s);
std::optional<EntryStatus> parse_status(std::string_view s);

struct PlanEntry {
  int start = 0;  // minutes of day
  int end = 0;
  GoalTag goal = GoalTag::Rest;
  std::string place;  // place id
  std::string description;
  std::string motivation;
  EntryStatus status = EntryStatus::Pending;
  std::optional<AgentId> partner;      // Appointment / Social target
  std::optional<std::string> invitation;  // id of the invitation behind it
  bool confirmed = false;              // accepted appointment

  bool operator==(const PlanEntry&) const = default;

  bool live() const { return status != EntryStatus::Cancelled && status != EntryStatus::Replanned; }
  // Accepted appointments are immutable once post-processing is done.
  bool locked() const { return goal == GoalTag::Appointment && confirmed; }
};

struct DailyPlan {
  AgentId agent;
  int day = 0;
  std::vector<PlanEntry> entries;

  bool operator==(const DailyPlan&) const = default;

  std::vector<std::size_t> live_indices() const;
  std::size_t live_count() const { return live_indices().size(); }
};

void to_json(json& j, const PlanEntry& e);
void from_json(const json& j, PlanEntry& e);
void to_json(json& j, const DailyPlan& p);
void from_json(const json& j, DailyPlan& p);

enum class InvitationStatus { Pending, Accepted, Rejected, Superseded };

std::string_view invitation_status_name(InvitationStatus s);

struct Invitation {
  std::string id;
  AgentId from;
  AgentId to;
  int start = 0;
  int end = 0;
  std::string place;
  std::string topic;
  std::string reason;
  InvitationStatus status = InvitationStatus::Pending;
  std::string response;  // invitee's reason
  bool operator==(const Invitation&) const = default;
};

void to_json(json& j, const Invitation& inv);
void from_json(const json& j, Invitation& inv);

struct InvitationResponse {
  bool accept = false;
  std::string reason;
  double benefit_new = 0.0;
  std::optional<double> benefit_existing;
  std::optional<std::string> degraded;
};

// Per-partner dialogue history.
struct DialogRecord {
  int day = 0;
  std::string topic;
  std::string summary;
  bool operator==(const DialogRecord&) const = default;
};

using DialogMemory = std::map<AgentId, std::vector<DialogRecord>>;

void to_json(json& j, const DialogRecord& r);
void from_json(const json& j, DialogRecord& r);

struct Conversation {
  std::vector<AgentId> participants;
  std::string topic;
  std::vector<std::pair<AgentId, std::string>> turns;
  int start_tick = 0;
  int end_tick = 0;
  std::map<AgentId, std::string> summaries;
  bool truncated = false;
};

void to_json(json& j, const Conversation& c);

// Identity of an agent as other agents see it in prompts.
struct AgentCard {
  AgentId id;
  std::string name;
  std::string profession;
  std::string traits;
  std::vector<std::string> interests;
  std::string home;  // place id; not shown in prompts
};

AgentCard make_card(const AgentId& id, const CharacterStructure& cs, const std::string& home = {});
json to_context(const AgentCard& card);

struct TriggerParams {
  double base_probability = 0.3;
  int radius = 2;          // cells
  int cooldown_ticks = 8;  // per pair
  int max_turns = 6;
};

// Emitted events: the kernel turns these into log records.
using Emit = std::function<void(std::string_view type, json payload)>;

// ---- planning ---------------------------------------------------------

json places_context(const WorldMap& world);

struct PlanInputs {
  AgentId agent;
  int day = 1;
  json character;        // preference-emphasized summary or persona text
  std::string home;      // place id
  json memory = json::array();   // long-term digest
  std::string insight;           // yesterday's, may be empty
  json acquaintances = json::array();  // AgentCard contexts
};

// Every broken plan invariant, by name. Cancelled and replanned entries are
// ignored. Checks: start < end, inside the window, sorted, non-overlapping,
// place exists and affords the goal, and travel between consecutive entries
// (starting from `home`) fits in the gap.
std::vector<std::string> plan_violations(const DailyPlan& plan, const WorldMap& world,
                                         const DayWindow& window, const std::string& home);

// Parses backend entries (start/end "HH:MM", goal, place...) into plan
// entries: unknown goals are dropped, times snapped to the tick grid and
// clamped to the window, and misplaced entries re-sited to an affording
// place. Entries with no affording place anywhere are dropped.
std::vector<PlanEntry> parse_entries(const json& entries, const WorldMap& world,
                                     const DayWindow& window, const std::string& home);

// Makes the live entries sorted, non-overlapping and travel-feasible.
// Fixed entries (active, done, locked) keep their times; the others are
// shifted or trimmed around them and dropped when nothing is left.
void fit_plan(DailyPlan& plan, const WorldMap& world, const DayWindow& window,
              const std::string& origin, int origin_minute);

Degradable<DailyPlan> generate_daily_plan(const PlanInputs& in, const WorldMap& world,
                                          const DayWindow& window, const lm::LmClient& client,
                                          const DailyPlan* previous = nullptr);

// ---- appointments -----------------------------------------------------

// Live entries of `plan` that clash with [start, end) at `place`, counting
// travel time on both sides.
std::vector<std::size_t> conflicting_entries(const DailyPlan& plan, int start, int end,
                                             const std::string& place, const WorldMap& world);

InvitationResponse respond_invitation(const AgentCard& invitee, const Invitation& invitation,
                                      const AgentCard& inviter, const DailyPlan& invitee_plan,
                                      const json& invitee_character, const WorldMap& world,
                                      const DayWindow& window, const lm::LmClient& client);

struct AppointmentInputs {
  std::map<AgentId, AgentCard> cards;
  std::map<AgentId, json> characters;  // prompt views
};

// Issues one invitation per Appointment entry (inviters in id order) and
// rewrites both parties' plans. `emit` receives one "invite" event per
// invitation carrying the resulting plans of both parties.
std::vector<Invitation> post_process_appointments(std::map<AgentId, DailyPlan>& plans,
                                                  const AppointmentInputs& in,
                                                  const WorldMap& world, const DayWindow& window,
                                                  const lm::LmClient& client, int day,
                                                  const Emit& emit);

// ---- actions ----------------------------------------------------------

struct ActionOutcome {
  bool started = false;
  std::size_t index = 0;  // entry that ended up active
  std::string description;
  std::string place;
  std::vector<AgentId> claimed_for;  // companions given a spot
  bool claimed = false;              // false when a partner had claimed for us
};

// Starts plan.entries[index]: claims the spot (with companions), asks for an
// objective description and marks the entry active. When the place is full
// the entry is marked replanned and a replacement at another affording,
// reachable place with room is inserted and tried; with no candidate left
// the entry is cancelled. Emits "occupied" and "cancel" events.
ActionOutcome execute_action(const AgentCard& agent, DailyPlan& plan, std::size_t index,
                             const std::vector<AgentId>& companions, const WorldMap& world,
                             OccupancyLedger& ledger, const json& character,
                             const DayWindow& window, const std::string& origin,
                             const lm::LmClient& client, const Emit& emit, int max_attempts = 3);

// ---- dialogue ---------------------------------------------------------

// Trait-derived factor in [0.5, 1.5]: from the Big Five score when one is
// known, otherwise from extraversion cues in the trait prose.
double extraversion_factor(const CharacterStructure& cs);

struct TriggerSide {
  AgentId id;
  const PlanEntry* active = nullptr;
  bool in_conversation = false;
  double extraversion = 1.0;
};

bool forced_conversation(const TriggerSide& a, const TriggerSide& b);

// Draws from `rng` only for an unforced pair inside the radius.
bool maybe_start_conversation(const TriggerSide& a, const TriggerSide& b, int distance,
                              const TriggerParams& params, CounterRng& rng);

// Text before any "(following up on: ...)" suffix.
std::string topic_core(std::string_view topic);

std::string choose_topic(const AgentCard& agent, const AgentCard& partner,
                         const std::vector<DialogRecord>& history, const json& character,
                         const lm::LmClient& client);

// Runs alternating turns (a first) and appends a summary to both memories.
Conversation run_dialogue(const AgentCard& a, const AgentCard& b, const std::string& topic,
                          DialogMemory& memory_a, DialogMemory& memory_b, int day,
                          int start_tick, int max_turns, const lm::LmClient& client);

std::pair<AgentId, std::string> select_partner(const AgentCard& agent,
                                               const std::vector<AgentCard>& candidates,
                                               const DialogMemory& memory,
                                               const json& character,
                                               const lm::LmClient& client);

}  // namespace psim
