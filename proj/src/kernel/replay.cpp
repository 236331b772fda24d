#include "psim/replay.hpp"

#include <cstdlib>
#include <map>
#include <set>

namespace psim {
namespace {

json fresh_agent(const AgentId& id, const json& init) {
  MemoryStore memory;
  return {{"id", id},
          {"home", init.at("home")},
          {"structure", init.at("structure")},
          {"plan", DailyPlan{id, 0, {}}},
          {"emotion", EmotionState{}},
          {"memory", memory},
          {"dialogs", json::object()},
          {"insights", json::array()},
          {"position", init.at("home")}};
}

void push_dialog(json& agent, const std::string& partner, int day, const json& topic, const json& summary) {
  agent["dialogs"][partner].push_back(DialogRecord{day, topic.get<std::string>(), summary.get<std::string>()});
}

int phase_rank(const std::string& type) {
  static const std::map<std::string, int> ranks = {
      {"plan", 0},     {"invite", 1},   {"action", 2},   {"emotion", 2},  {"dialog", 2},
      {"move", 2},     {"occupied", 2}, {"cancel", 2},   {"finish", 2},   {"replan", 2},
      {"resite", 2},   {"memory", 3},   {"insight", 4},  {"growth", 5},   {"day", 6},
      {"bfi", 7}};
  auto it = ranks.find(type);
  return it == ranks.end() ? -1 : it->second;
}

std::string at_record(const LogRecord& r) { return "seq " + std::to_string(r.seq) + ": "; }

}  // namespace

json reconstruct_state(const std::vector<LogRecord>& records) {
  json agents = json::object();
  json clock = {{"day", 0}, {"tick", 0}, {"day_open", false}};
  json world_csv = "";
  json staged = nullptr;
  json ledger = json::object();

  for (const auto& r : records) {
    const json& p = r.payload;
    const std::string who = r.agent.value_or("");
    if (r.type == "world") {
      world_csv = p.at("csv");
      staged = nullptr;
      continue;
    }
    if (r.type == "command") {
      if (p.at("kind") == "env_update") staged = p.at("payload").at("csv");
      continue;
    }
    if (r.type == "init") {
      agents[who] = fresh_agent(who, p);
      continue;
    }
    if (who.empty() || !agents.contains(who)) continue;
    json& a = agents[who];

    if (r.type != "lm" && r.type != "bfi" && r.type != "day") {
      if (!clock.at("day_open").get<bool>() && r.type == "plan") {
        clock = {{"day", r.day}, {"tick", 0}, {"day_open", true}};
      }
      if (clock.at("day_open").get<bool>()) clock["tick"] = r.tick;
    }

    if (r.type == "plan") {
      a["plan"] = p.at("plan");
      a["position"] = a.at("home");
      ledger = json::object();
    } else if (r.type == "invite") {
      for (auto it = p.at("plans").begin(); it != p.at("plans").end(); ++it) agents[it.key()]["plan"] = it.value();
    } else if (r.type == "action" || r.type == "occupied" || r.type == "cancel" || r.type == "finish") {
      a["plan"] = p.at("plan");
      ledger = p.at("ledger");
    } else if (r.type == "replan" || r.type == "resite") {
      a["plan"] = p.at("plan");
    } else if (r.type == "move") {
      a["position"] = p.at("to");
    } else if (r.type == "emotion") {
      EmotionState e = p.at("state").get<EmotionState>();
      a["emotion"] = e;
      ShortTermRecord st{e.day, e.tick, p.at("memory").at("kind").get<std::string>(),
                         p.at("memory").at("text").get<std::string>(), e};
      a["memory"]["short_term"].push_back(st);
    } else if (r.type == "dialog") {
      const auto& parts = p.at("participants");
      if (p.value("chat", false)) {
        push_dialog(a, "user", r.day, p.at("topic"), p.at("summaries").at(who));
      } else {
        const std::string x = parts.at(0), y = parts.at(1);
        push_dialog(agents[x], y, r.day, p.at("topic"), p.at("summaries").at(x));
        push_dialog(agents[y], x, r.day, p.at("topic"), p.at("summaries").at(y));
      }
    } else if (r.type == "memory") {
      auto& m = a["memory"];
      for (const auto& st : m.at("short_term")) m["archive"].push_back(st);
      m["short_term"] = json::array();
      m["long_term"] = p.at("long_term");
    } else if (r.type == "insight") {
      a["insights"].push_back(InsightRecord{r.day, p.at("text").get<std::string>()});
    } else if (r.type == "growth") {
      a["structure"] = p.at("structure");
    } else if (r.type == "day") {
      a["plan"] = p.at("plan");
      a["emotion"] = p.at("emotion");
      a["position"] = p.at("position");
      ledger = p.at("ledger");
      clock = {{"day", r.day}, {"tick", r.tick + 1}, {"day_open", false}};
    }
  }
  return {{"clock", clock}, {"world_csv", world_csv}, {"staged_world", staged}, {"ledger", ledger}, {"agents", agents}};
}

RunConfig config_from_log(const std::vector<LogRecord>& records) {
  for (const auto& r : records) {
    if (r.type == "run") return config_from_json(r.payload.at("config"));
  }
  throw LookupError("log has no run record");
}

std::vector<Command> command_transcript(const std::vector<LogRecord>& records) {
  std::vector<Command> out;
  for (const auto& r : records) {
    if (r.type != "command") continue;
    Command c;
    c.day = r.day;
    c.tick = r.tick;
    c.at = r.payload.at("at").get<std::string>();
    c.kind = r.payload.at("kind").get<std::string>();
    const json& p = r.payload.at("payload");
    if (c.kind == "chat") {
      c.payload = {{"agent", p.at("agent")}, {"text", p.at("text")}};
    } else if (c.kind == "env_update") {
      c.payload = {{"csv", p.at("csv")}};
    }
    out.push_back(std::move(c));
  }
  return out;
}

std::vector<json> recorded_exchanges(const std::vector<LogRecord>& records) {
  std::vector<json> out;
  for (const auto& r : records) {
    if (r.type == "lm") out.push_back(r.payload);
  }
  return out;
}

ReplayOutcome replay_run(RunConfig config, const std::vector<LogRecord>& records, const std::string& original_log) {
  config.log_path.clear();
  auto backend = std::make_shared<lm::ReplayBackend>(recorded_exchanges(records));
  Kernel kernel(config, backend);
  kernel.run();

  ReplayOutcome out;
  std::size_t line = 0;
  for (const auto& r : kernel.log().records()) out.replayed_log += record_line(r) + "\n";
  out.identical = out.replayed_log == original_log;
  if (!out.identical) {
    std::size_t i = 0;
    line = 1;
    while (i < out.replayed_log.size() && i < original_log.size() && out.replayed_log[i] == original_log[i]) {
      if (original_log[i] == '\n') ++line;
      ++i;
    }
    out.first_difference = line;
  }
  out.unused_exchanges = backend->remaining();
  return out;
}

std::vector<std::string> audit_log(const std::vector<LogRecord>& records, const AuditOptions& options) {
  std::vector<std::string> out;
  std::map<std::string, int> capacity;
  std::map<AgentId, int> last_category;
  std::set<std::uint64_t> chat_dialogs;
  std::set<std::uint64_t> exempt;  // chat-driven records outside the day phases
  std::map<std::pair<AgentId, int>, int> phase;
  std::map<std::pair<AgentId, int>, int> growth_count;
  std::map<std::pair<AgentId, int>, std::vector<std::string>> growth_stages;
  std::set<std::pair<AgentId, int>> agent_days;
  std::set<AgentId> agents;

  static const std::vector<std::string> kStages = {"GROWTH_STATE", "GROWTH_FEATURE", "GROWTH_CONFLICT",
                                                   "GROWTH_PREFERENCE"};

  for (std::size_t i = 0; i < records.size(); ++i) {
    const LogRecord& r = records[i];
    const json& p = r.payload;
    const AgentId who = r.agent.value_or("");
    const auto key = std::make_pair(who, r.day);

    if (r.type == "world") {
      capacity.clear();
      for (const auto& place : load_world(p.at("csv").get<std::string>()).places) {
        capacity[place.id()] = place.capacity;
      }
    }
    if (r.type == "init") {
      agents.insert(who);
      last_category[who] = EmotionState{}.category;
    }

    // (a)
    if (r.type == "emotion") {
      const int cat = p.at("category").get<int>();
      const int prev = p.at("previous").get<int>();
      if (prev != last_category[who]) {
        out.push_back("a " + at_record(r) + "previous category " + std::to_string(prev) + " but last was " +
                      std::to_string(last_category[who]));
      }
      last_category[who] = cat;
      const bool jump = std::abs(cat - prev) >= 3;
      std::size_t next = i + 1;
      while (next < records.size() && records[next].type == "lm") ++next;
      const bool followed = next < records.size() && records[next].type == "replan" && records[next].agent == r.agent;
      if (jump && !followed) out.push_back("a " + at_record(r) + "emotion jump without a replan record");
      if (!jump && followed) out.push_back("a " + at_record(r) + "replan record without an emotion jump");
      if (followed) {
        const json& rp = records[next].payload;
        if (rp.at("from") != prev || rp.at("to") != cat) out.push_back("a " + at_record(records[next]) + "replan endpoints differ");
      }
      if (p.at("memory").at("kind") == "dialog" && chat_dialogs.count(p.at("source_seq").get<std::uint64_t>())) {
        exempt.insert(r.seq);
        if (followed) exempt.insert(records[next].seq);
      }
    }
    std::size_t before = i;
    while (before > 0 && records[before - 1].type == "lm") --before;
    if (r.type == "replan" && (before == 0 || records[before - 1].type != "emotion" || records[before - 1].agent != r.agent)) {
      out.push_back("a " + at_record(r) + "replan record not preceded by an emotion record");
    }

    // (b)
    if (r.type == "memory" && p.at("long_term").size() > static_cast<std::size_t>(options.memory_capacity)) {
      out.push_back("b " + at_record(r) + "long-term store holds " + std::to_string(p.at("long_term").size()) +
                    " records");
    }

    // (c)
    if (r.type == "invite" && p.at("response").at("accept").get<bool>()) {
      const auto& inv = p.at("invitation");
      for (const auto& side : {inv.at("from"), inv.at("to")}) {
        const std::string sid = side.get<std::string>();
        bool found = false;
        if (p.at("plans").contains(sid)) {
          for (const auto& e : p.at("plans").at(sid).at("entries")) {
            if (e.value("invitation", json()) == inv.at("id") && e.at("goal") == "Appointment" &&
                e.value("confirmed", false) && e.at("place") == inv.at("place") &&
                e.at("start") == inv.at("start") && e.at("end") == inv.at("end")) {
              found = true;
            }
          }
        }
        if (!found) out.push_back("c " + at_record(r) + "accepted invitation missing from the plan of " + sid);
      }
    }

    // (d)
    if (p.is_object() && p.contains("ledger")) {
      for (auto it = p.at("ledger").begin(); it != p.at("ledger").end(); ++it) {
        auto cap = capacity.find(it.key());
        if (cap == capacity.end()) {
          out.push_back("d " + at_record(r) + "ledger names unknown place " + it.key());
        } else if (static_cast<int>(it.value().size()) > cap->second) {
          out.push_back("d " + at_record(r) + it.key() + " holds " + std::to_string(it.value().size()) +
                        " of capacity " + std::to_string(cap->second));
        }
      }
    }

    // (e)
    if (r.type == "lm" && !who.empty()) {
      const std::string kind = p.at("kind");
      if (kind.rfind("GROWTH_", 0) == 0) {
        auto& st = growth_stages[key];
        if (st.empty() || st.back() != kind) st.push_back(kind);
      }
    }
    if (r.type == "growth") {
      ++growth_count[key];
      if (p.at("degraded").is_null() && growth_stages[key] != kStages) {
        out.push_back("e " + at_record(r) + "growth stages out of order for " + who);
      }
    }
    if (r.type == "day") agent_days.insert(key);

    // phase order
    if (r.type == "dialog" && p.value("chat", false)) {
      chat_dialogs.insert(r.seq);
      exempt.insert(r.seq);
    }
    const int rank = phase_rank(r.type);
    if (rank >= 0 && !who.empty() && !exempt.count(r.seq)) {
      if (r.type == "plan") phase[key] = 0;
      auto it = phase.find(key);
      const int last = it == phase.end() ? -1 : it->second;
      if (rank < last) {
        out.push_back("o " + at_record(r) + r.type + " after a later phase for " + who);
      } else {
        phase[key] = rank;
      }
    }
  }

  for (const auto& k : agent_days) {
    const int n = growth_count.count(k) ? growth_count[k] : 0;
    const int want = options.growth_enabled ? 1 : 0;
    if (n != want) {
      out.push_back("e agent " + k.first + " day " + std::to_string(k.second) + " has " + std::to_string(n) +
                    " growth records");
    }
  }
  return out;
}

}  // namespace psim
