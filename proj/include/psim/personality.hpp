#pragma once

#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "psim/behavior.hpp"
#include "psim/character.hpp"
#include "psim/lm/client.hpp"

namespace psim {

// Seven ordered categories, negative to positive.
struct EmotionState {
  int category = 4;
  std::string feeling;
  int day = 0;
  int tick = 0;

  bool operator==(const EmotionState&) const = default;
};

inline constexpr int kEmotionMin = 1;
inline constexpr int kEmotionMax = 7;

std::string_view emotion_label(int category);

struct ShortTermRecord {
  int day = 0;
  int tick = 0;
  std::string kind;  // action | dialog
  std::string text;
  EmotionState emotion;

  bool operator==(const ShortTermRecord&) const = default;
};

struct LongTermRecord {
  int day_from = 0;
  int day_to = 0;
  std::string summary;
  std::string salience;  // which part of the character it touched
  bool blurred = false;

  bool operator==(const LongTermRecord&) const = default;
};

struct MemoryStore {
  std::vector<ShortTermRecord> short_term;
  std::vector<LongTermRecord> long_term;
  std::vector<ShortTermRecord> archive;

  bool operator==(const MemoryStore&) const = default;
};

struct InsightRecord {
  int day = 0;
  std::string text;

  bool operator==(const InsightRecord&) const = default;
};

struct GrowthDelta {
  int day = 0;
  std::map<std::string, std::pair<std::string, std::string>> diffs;  // before, after
  int old_revision = 0;
  int new_revision = 0;
};

void to_json(json& j, const EmotionState& e);
void from_json(const json& j, EmotionState& e);
void to_json(json& j, const ShortTermRecord& r);
void from_json(const json& j, ShortTermRecord& r);
void to_json(json& j, const LongTermRecord& r);
void from_json(const json& j, LongTermRecord& r);
void to_json(json& j, const MemoryStore& m);
void from_json(const json& j, MemoryStore& m);
void to_json(json& j, const InsightRecord& r);
void from_json(const json& j, InsightRecord& r);
void to_json(json& j, const GrowthDelta& d);

// Out-of-range categories are clamped and reported as degraded. With
// feelings disabled the category is kept and the feeling text is empty.
Degradable<EmotionState> update_emotion(const AgentCard& agent, const std::string& action,
                                        const json& character, const EmotionState& previous,
                                        bool feelings_enabled, int day, int tick,
                                        const lm::LmClient& client);

// True iff the categories are three or more steps apart.
bool check_replan_trigger(const EmotionState& previous, const EmotionState& next);

// Revises the pending, unlocked entries starting at or after `now`. Active,
// done and accepted-appointment entries are left alone. Returns whether the
// plan changed.
Degradable<bool> replan_on_emotion(const AgentCard& agent, DailyPlan& plan,
                                   const EmotionState& previous, const EmotionState& next,
                                   const json& character, const WorldMap& world,
                                   const DayWindow& window, const std::string& origin, int now,
                                   const lm::LmClient& client);

Degradable<std::vector<LongTermRecord>> filter_memories(const AgentCard& agent,
                                                        const std::vector<ShortTermRecord>& day,
                                                        const json& character, int day_index,
                                                        const lm::LmClient& client);

// While the store holds more than `capacity` records, the oldest `batch`
// are condensed into one blurred record.
Degradable<std::vector<LongTermRecord>> decay_memories(std::vector<LongTermRecord> store,
                                                       int capacity, int batch,
                                                       const lm::LmClient& client);

Degradable<InsightRecord> generate_insight(const AgentCard& agent,
                                           const std::vector<std::string>& events,
                                           const std::vector<LongTermRecord>& memories,
                                           const json& character, int day,
                                           const lm::LmClient& client);

struct GrowthResult {
  CharacterStructure structure;
  GrowthDelta delta;
};

// State, traits, conflict and preference are updated in that order, each
// stage seeing the previous stages' output. All or nothing.
Degradable<GrowthResult> grow_character(const AgentCard& agent, const std::string& insight,
                                        const std::string& day_summary,
                                        const CharacterStructure& current, int day,
                                        const lm::LmClient& client);

}  // namespace psim
