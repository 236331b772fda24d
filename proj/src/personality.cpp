#include "psim/personality.hpp"

#include <algorithm>
#include <set>

namespace psim {
namespace {

constexpr std::string_view kLabels[] = {"Despairing", "Fearful", "Anxious", "Calm",
                                        "Content",    "Happy",   "Excited"};

}  // namespace

std::string_view emotion_label(int category) {
  return kLabels[std::clamp(category, kEmotionMin, kEmotionMax) - 1];
}

void to_json(json& j, const EmotionState& e) {
  j = {{"category", e.category},
       {"label", emotion_label(e.category)},
       {"feeling", e.feeling},
       {"day", e.day},
       {"tick", e.tick}};
}

void from_json(const json& j, EmotionState& e) {
  e.category = j.at("category").get<int>();
  e.feeling = j.value("feeling", "");
  e.day = j.value("day", 0);
  e.tick = j.value("tick", 0);
}

void to_json(json& j, const ShortTermRecord& r) {
  j = {{"day", r.day}, {"tick", r.tick}, {"kind", r.kind}, {"text", r.text}, {"emotion", r.emotion}};
}

void from_json(const json& j, ShortTermRecord& r) {
  r.day = j.at("day").get<int>();
  r.tick = j.at("tick").get<int>();
  r.kind = j.at("kind").get<std::string>();
  r.text = j.at("text").get<std::string>();
  r.emotion = j.at("emotion").get<EmotionState>();
}

void to_json(json& j, const LongTermRecord& r) {
  j = {{"day_from", r.day_from},
       {"day_to", r.day_to},
       {"summary", r.summary},
       {"salience", r.salience},
       {"blurred", r.blurred}};
}

void from_json(const json& j, LongTermRecord& r) {
  r.day_from = j.at("day_from").get<int>();
  r.day_to = j.at("day_to").get<int>();
  r.summary = j.at("summary").get<std::string>();
  r.salience = j.value("salience", "");
  r.blurred = j.value("blurred", false);
}

void to_json(json& j, const MemoryStore& m) {
  j = {{"short_term", m.short_term}, {"long_term", m.long_term}, {"archive", m.archive}};
}

void from_json(const json& j, MemoryStore& m) {
  m.short_term = j.at("short_term").get<std::vector<ShortTermRecord>>();
  m.long_term = j.at("long_term").get<std::vector<LongTermRecord>>();
  m.archive = j.value("archive", std::vector<ShortTermRecord>{});
}

void to_json(json& j, const InsightRecord& r) { j = {{"day", r.day}, {"text", r.text}}; }

void from_json(const json& j, InsightRecord& r) {
  r.day = j.at("day").get<int>();
  r.text = j.at("text").get<std::string>();
}

void to_json(json& j, const GrowthDelta& d) {
  json diffs = json::object();
  for (const auto& [k, v] : d.diffs) diffs[k] = {{"before", v.first}, {"after", v.second}};
  j = {{"day", d.day},
       {"diffs", diffs},
       {"old_revision", d.old_revision},
       {"new_revision", d.new_revision}};
}

Degradable<EmotionState> update_emotion(const AgentCard& agent, const std::string& action,
                                        const json& character, const EmotionState& previous,
                                        bool feelings_enabled, int day, int tick,
                                        const lm::LmClient& client) {
  lm::PromptRequest req;
  req.kind = lm::PromptKind::EmotionUpdate;
  req.agent_id = agent.id;
  req.day = day;
  req.tick = tick;
  req.context = {{"character", character},
                 {"agent", to_context(agent)},
                 {"action", action},
                 {"previous",
                  {{"category", previous.category},
                   {"label", emotion_label(previous.category)},
                   {"feeling", previous.feeling}}}};

  Degradable<EmotionState> out;
  out.value.day = day;
  out.value.tick = tick;
  try {
    auto resp = client.complete(req);
    int c = resp.payload.at("category").get<int>();
    if (c < kEmotionMin || c > kEmotionMax) {
      out.degraded = "emotion category " + std::to_string(c) + " clamped";
      c = std::clamp(c, kEmotionMin, kEmotionMax);
    }
    out.value.category = c;
    out.value.feeling = resp.payload.at("feeling").get<std::string>();
  } catch (const Error& e) {
    out.value.category = previous.category;
    out.value.feeling = previous.feeling;
    out.degraded = std::string("emotion unchanged: ") + e.what();
  }
  if (!feelings_enabled) out.value.feeling.clear();
  return out;
}

bool check_replan_trigger(const EmotionState& previous, const EmotionState& next) {
  return std::abs(next.category - previous.category) >= 3;
}

Degradable<bool> replan_on_emotion(const AgentCard& agent, DailyPlan& plan,
                                   const EmotionState& previous, const EmotionState& next,
                                   const json& character, const WorldMap& world,
                                   const DayWindow& window, const std::string& origin, int now,
                                   const lm::LmClient& client) {
  std::vector<std::size_t> remaining;
  json remaining_ctx = json::array();
  json anchors = json::array();
  for (std::size_t i = 0; i < plan.entries.size(); ++i) {
    const auto& e = plan.entries[i];
    if (!e.live()) continue;
    if (e.status == EntryStatus::Pending && !e.locked() && e.start >= now) {
      remaining.push_back(i);
      remaining_ctx.push_back(e);
    } else if (e.end > now) {
      anchors.push_back(e);
    }
  }
  if (remaining.empty()) return {false, std::nullopt};

  lm::PromptRequest req;
  req.kind = lm::PromptKind::PlanRevise;
  req.agent_id = agent.id;
  req.day = plan.day;
  req.tick = window.tick_at_or_after(now);
  req.context = {{"agent", agent.id},
                 {"character", character},
                 {"places", places_context(world)},
                 {"remaining", remaining_ctx},
                 {"anchors", anchors},
                 {"reason", "emotion shift from " + std::string(emotion_label(previous.category)) +
                                " to " + std::string(emotion_label(next.category))},
                 {"emotion",
                  {{"from", previous.category}, {"to", next.category}, {"feeling", next.feeling}}},
                 {"now", format_hhmm(now)}};

  std::vector<PlanEntry> fresh;
  try {
    auto resp = client.complete(req);
    fresh = parse_entries(resp.payload.at("entries"), world, window, agent.home);
  } catch (const Error& e) {
    return {false, std::string("replan kept original plan: ") + e.what()};
  }
  std::erase_if(fresh, [&](const PlanEntry& e) { return e.end <= now; });
  for (auto& e : fresh) {
    e.start = std::max(e.start, now);
    e.confirmed = false;
    e.invitation.reset();
  }
  if (fresh.empty()) return {false, std::string("replan returned no usable entries")};

  DailyPlan revised = plan;
  for (auto i : remaining) revised.entries[i].status = EntryStatus::Replanned;
  for (auto& e : fresh) revised.entries.push_back(std::move(e));
  fit_plan(revised, world, window, origin, now);
  plan = std::move(revised);
  return {true, std::nullopt};
}

Degradable<std::vector<LongTermRecord>> filter_memories(const AgentCard& agent,
                                                        const std::vector<ShortTermRecord>& day,
                                                        const json& character, int day_index,
                                                        const lm::LmClient& client) {
  if (day.empty()) return {{}, std::nullopt};
  json records = json::array();
  for (std::size_t i = 0; i < day.size(); ++i) {
    records.push_back({{"index", i},
                       {"kind", day[i].kind},
                       {"text", day[i].text},
                       {"emotion", day[i].emotion.category},
                       {"label", emotion_label(day[i].emotion.category)},
                       {"feeling", day[i].emotion.feeling}});
  }
  lm::PromptRequest req;
  req.kind = lm::PromptKind::MemoryFilter;
  req.agent_id = agent.id;
  req.day = day_index;
  req.context = {{"character", character}, {"records", records}};

  try {
    auto resp = client.complete(req);
    std::map<int, LongTermRecord> picked;
    for (const auto& m : resp.payload.at("memories")) {
      int idx = m.at("index").get<int>();
      if (idx < 0 || idx >= static_cast<int>(day.size()) || picked.count(idx)) continue;
      picked[idx] = {day_index, day_index, m.at("summary").get<std::string>(),
                     m.at("salience").get<std::string>(), false};
    }
    std::vector<LongTermRecord> out;
    for (auto& [_, r] : picked) out.push_back(std::move(r));
    return {std::move(out), std::nullopt};
  } catch (const Error& e) {
    std::vector<LongTermRecord> raw;
    for (const auto& r : day) raw.push_back({day_index, day_index, r.text, "unfiltered", false});
    return {std::move(raw), std::string("memory filter failed: ") + e.what()};
  }
}

Degradable<std::vector<LongTermRecord>> decay_memories(std::vector<LongTermRecord> store,
                                                       int capacity, int batch,
                                                       const lm::LmClient& client) {
  if (capacity < 1) throw InputError("memory capacity must be >= 1");
  if (batch < 2) throw InputError("blur batch must be >= 2");
  while (static_cast<int>(store.size()) > capacity) {
    const auto n = static_cast<std::ptrdiff_t>(std::min<std::size_t>(batch, store.size()));
    json records = json::array();
    LongTermRecord blurred;
    blurred.blurred = true;
    blurred.day_from = store.front().day_from;
    blurred.day_to = store.front().day_to;
    for (auto it = store.begin(); it != store.begin() + n; ++it) {
      records.push_back(*it);
      blurred.day_from = std::min(blurred.day_from, it->day_from);
      blurred.day_to = std::max(blurred.day_to, it->day_to);
    }
    lm::PromptRequest req;
    req.kind = lm::PromptKind::MemoryBlur;
    req.context = {{"records", records}};
    try {
      blurred.summary = client.complete(req).payload.at("summary").get<std::string>();
    } catch (const Error& e) {
      store.erase(store.begin(), store.end() - capacity);
      return {std::move(store), std::string("memory blur failed, truncated: ") + e.what()};
    }
    blurred.salience = "blurred";
    store.erase(store.begin(), store.begin() + n);
    store.insert(store.begin(), std::move(blurred));
  }
  return {std::move(store), std::nullopt};
}

Degradable<InsightRecord> generate_insight(const AgentCard& agent,
                                           const std::vector<std::string>& events,
                                           const std::vector<LongTermRecord>& memories,
                                           const json& character, int day,
                                           const lm::LmClient& client) {
  json mem = json::array();
  for (const auto& m : memories) mem.push_back(m.summary);
  lm::PromptRequest req;
  req.kind = lm::PromptKind::Insight;
  req.agent_id = agent.id;
  req.day = day;
  req.context = {{"character", character}, {"events", events}, {"memories", mem}, {"day", day}};
  try {
    auto text = client.complete(req).payload.at("text").get<std::string>();
    if (normalize_ws(text).empty()) throw DecodeError("empty insight");
    return {{day, text}, std::nullopt};
  } catch (const Error& e) {
    return {{day, "uneventful day"}, std::string("insight fallback: ") + e.what()};
  }
}

Degradable<GrowthResult> grow_character(const AgentCard& agent, const std::string& insight,
                                        const std::string& day_summary,
                                        const CharacterStructure& current, int day,
                                        const lm::LmClient& client) {
  CharacterStructure next = current;
  auto stage = [&](lm::PromptKind kind) {
    lm::PromptRequest req;
    req.kind = kind;
    req.agent_id = agent.id;
    req.day = day;
    req.context = {{"character", full_view(next)},
                   {"preference", next.preference},
                   {"insight", insight},
                   {"day_summary", day_summary},
                   {"day", day}};
    return client.complete(req).payload;
  };

  try {
    next.current_state = stage(lm::PromptKind::GrowthState).at("current_state").get<std::string>();
    next.traits.prose = stage(lm::PromptKind::GrowthFeature).at("traits").get<std::string>();
    next.conflict = stage(lm::PromptKind::GrowthConflict).at("conflict").get<std::string>();
    next.preference =
        stage(lm::PromptKind::GrowthPreference).at("preference").get<PreferenceSet>();
  } catch (const Error& e) {
    return {{current, {}}, std::string("growth aborted: ") + e.what()};
  } catch (const json::exception& e) {
    return {{current, {}}, std::string("growth aborted: ") + e.what()};
  }
  next.basic_info = current.basic_info;
  next.revision = current.revision + 1;
  auto report = validate_structure(next, &current);
  if (!report.empty()) {
    std::string msg = "growth aborted: invalid structure:";
    for (const auto& r : report) msg += " " + r;
    return {{current, {}}, msg};
  }

  GrowthDelta delta;
  delta.day = day;
  delta.old_revision = current.revision;
  delta.new_revision = next.revision;
  for (auto d : {Dimension::CurrentState, Dimension::Traits, Dimension::Conflict,
                 Dimension::Preference}) {
    delta.diffs[std::string(dimension_name(d))] = {dimension_text(current, d),
                                                   dimension_text(next, d)};
  }
  return {{std::move(next), std::move(delta)}, std::nullopt};
}

}  // namespace psim
