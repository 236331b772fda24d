#include <fstream>
#include <set>
#include <sstream>

#include "psim/kernel.hpp"

namespace psim {
namespace {

const std::set<std::string> kConfigKeys = {
    "seed",   "days",     "world",        "world_csv", "backend", "http",   "tick_minutes",
    "day_window", "move_speed", "ablate", "memory",    "dialogue", "summary_words", "bfi",
    "log",    "agents",   "commands"};

std::uint64_t read_seed(const json& j) {
  if (j.is_number_unsigned()) return j.get<std::uint64_t>();
  if (j.is_number_integer()) {
    auto v = j.get<std::int64_t>();
    if (v < 0) throw InputError("seed must be non-negative");
    return static_cast<std::uint64_t>(v);
  }
  if (j.is_string()) {
    try {
      return std::stoull(j.get<std::string>());
    } catch (const std::exception&) {
      throw InputError("seed must be a 64-bit integer");
    }
  }
  throw InputError("seed must be a 64-bit integer");
}

std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw InputError("cannot read " + p.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

int position_rank(const Command& c) { return c.at == "pre_day" ? 0 : 1; }

}  // namespace

Ablations parse_ablations(std::string_view list) {
  Ablations a;
  std::string item;
  auto apply = [&] {
    std::string s = normalize_ws(item);
    item.clear();
    if (s.empty()) return;
    if (s == "growth") {
      a.disable_growth = true;
    } else if (s == "insight") {
      a.disable_insight = true;
    } else if (s == "feelings") {
      a.disable_feelings = true;
    } else if (s == "simple-character" || s == "simple_character") {
      a.simple_character = true;
    } else {
      throw InputError("unknown ablation '" + s + "'");
    }
  };
  for (char c : list) {
    if (c == ',') {
      apply();
    } else {
      item.push_back(c);
    }
  }
  apply();
  return a;
}

void to_json(json& j, const Command& c) {
  j = {{"day", c.day}, {"tick", c.tick}, {"at", c.at}, {"kind", c.kind}, {"payload", c.payload}};
}

void from_json(const json& j, Command& c) {
  c.day = j.at("day").get<int>();
  c.tick = j.value("tick", 0);
  c.at = j.value("at", std::string("tick"));
  c.kind = j.at("kind").get<std::string>();
  c.payload = j.value("payload", json::object());
}

RunConfig config_from_json(const json& j, const std::filesystem::path& base_dir) {
  if (!j.is_object()) throw InputError("config must be a JSON object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (!kConfigKeys.count(it.key())) throw InputError("unknown config key '" + it.key() + "'");
  }
  RunConfig c;
  try {
    if (j.contains("seed")) c.seed = read_seed(j.at("seed"));
    c.days = j.value("days", 1);
    c.backend = j.value("backend", std::string("scripted"));
    if (j.contains("http")) {
      const auto& h = j.at("http");
      c.http.base_url = h.value("base_url", std::string());
      c.http.model = h.value("model", std::string());
      c.http.path = h.value("path", c.http.path);
      c.http.timeout_seconds = h.value("timeout_seconds", c.http.timeout_seconds);
      c.http.retries = h.value("retries", c.http.retries);
    }
    c.tick_minutes = j.value("tick_minutes", 15);
    if (j.contains("day_window")) {
      const auto& w = j.at("day_window");
      auto s = parse_hhmm(w.value("start", std::string("06:00")));
      auto e = parse_hhmm(w.value("end", std::string("23:00")));
      if (!s || !e) throw InputError("day_window times must be HH:MM");
      c.day_start = *s;
      c.day_end = *e;
    }
    c.move_speed = j.value("move_speed", 4);
    if (j.contains("ablate")) {
      const auto& a = j.at("ablate");
      if (a.is_string()) {
        c.ablate = parse_ablations(a.get<std::string>());
      } else {
        c.ablate.disable_feelings = a.value("disable_cognitive_feelings", false);
        c.ablate.disable_insight = a.value("disable_insight", false);
        c.ablate.disable_growth = a.value("disable_growth", false);
        c.ablate.simple_character = a.value("simple_character", false);
      }
    }
    if (j.contains("memory")) {
      c.memory_capacity = j.at("memory").value("capacity", 30);
      c.blur_batch = j.at("memory").value("blur_batch", 10);
    }
    if (j.contains("dialogue")) {
      const auto& d = j.at("dialogue");
      c.dialogue.base_probability = d.value("base_probability", c.dialogue.base_probability);
      c.dialogue.radius = d.value("radius", c.dialogue.radius);
      c.dialogue.cooldown_ticks = d.value("cooldown_ticks", c.dialogue.cooldown_ticks);
      c.dialogue.max_turns = d.value("max_turns", c.dialogue.max_turns);
    }
    c.summary_words = j.value("summary_words", 60);
    c.administer_bfi = j.value("bfi", true);
    if (j.contains("log")) {
      std::filesystem::path p = j.at("log").get<std::string>();
      c.log_path = (p.is_relative() && !base_dir.empty() ? base_dir / p : p).string();
    }
    if (j.contains("world_csv")) {
      c.world_csv = j.at("world_csv").get<std::string>();
    } else if (j.contains("world")) {
      std::filesystem::path p = j.at("world").get<std::string>();
      if (p.is_relative() && !base_dir.empty()) p = base_dir / p;
      c.world_path = p.string();
      c.world_csv = read_file(p);
    }
    for (const auto& a : j.value("agents", json::array())) {
      AgentSeed s;
      s.id = a.at("id").get<std::string>();
      s.home = a.value("home", std::string());
      if (a.contains("brief")) s.brief = a.at("brief").get<std::string>();
      if (a.contains("structure")) s.structure = a.at("structure").get<CharacterStructure>();
      c.agents.push_back(std::move(s));
    }
    for (const auto& cmd : j.value("commands", json::array())) c.commands.push_back(cmd.get<Command>());
  } catch (const json::exception& e) {
    throw InputError(std::string("config: ") + e.what());
  }
  auto problems = config_problems(c);
  if (!problems.empty()) {
    std::string msg = "invalid config:";
    for (const auto& p : problems) msg += " " + p + ";";
    throw InputError(msg);
  }
  return c;
}

json config_to_json(const RunConfig& c) {
  json agents = json::array();
  for (const auto& a : c.agents) {
    json j = {{"id", a.id}, {"home", a.home}};
    if (a.brief) j["brief"] = *a.brief;
    if (a.structure) j["structure"] = *a.structure;
    agents.push_back(j);
  }
  json out = {{"seed", c.seed},
              {"days", c.days},
              {"world_csv", c.world_csv},
              {"backend", c.backend},
              {"http",
               {{"base_url", c.http.base_url},
                {"model", c.http.model},
                {"path", c.http.path},
                {"timeout_seconds", c.http.timeout_seconds},
                {"retries", c.http.retries}}},
              {"tick_minutes", c.tick_minutes},
              {"day_window", {{"start", format_hhmm(c.day_start)}, {"end", format_hhmm(c.day_end)}}},
              {"move_speed", c.move_speed},
              {"ablate",
               {{"disable_cognitive_feelings", c.ablate.disable_feelings},
                {"disable_insight", c.ablate.disable_insight},
                {"disable_growth", c.ablate.disable_growth},
                {"simple_character", c.ablate.simple_character}}},
              {"memory", {{"capacity", c.memory_capacity}, {"blur_batch", c.blur_batch}}},
              {"dialogue",
               {{"base_probability", c.dialogue.base_probability},
                {"radius", c.dialogue.radius},
                {"cooldown_ticks", c.dialogue.cooldown_ticks},
                {"max_turns", c.dialogue.max_turns}}},
              {"summary_words", c.summary_words},
              {"bfi", c.administer_bfi},
              {"agents", agents},
              {"commands", c.commands}};
  if (!c.log_path.empty()) out["log"] = c.log_path;
  return out;
}

std::vector<std::string> config_problems(const RunConfig& c) {
  std::vector<std::string> out;
  if (c.days < 1) out.emplace_back("days must be >= 1");
  if (c.agents.empty()) out.emplace_back("at least one agent is required");
  std::set<std::string> ids;
  for (const auto& a : c.agents) {
    if (normalize_ws(a.id).empty()) out.emplace_back("agent id must be non-empty");
    if (!ids.insert(a.id).second) out.push_back("duplicate agent id '" + a.id + "'");
    if (a.id == "user") out.emplace_back("agent id 'user' is reserved");
    if (!a.brief && !a.structure) out.push_back("agent '" + a.id + "' needs a brief or a structure");
    if (a.home.empty()) out.push_back("agent '" + a.id + "' needs a home place");
  }
  if (c.world_csv.empty()) out.emplace_back("a world CSV is required");
  if (c.backend != "scripted" && c.backend != "http") out.push_back("unknown backend '" + c.backend + "'");
  if (c.tick_minutes < 1) out.emplace_back("tick_minutes must be >= 1");
  if (c.day_start >= c.day_end) out.emplace_back("day window start must be before end");
  if (c.tick_minutes >= 1 && (c.day_end - c.day_start) % c.tick_minutes != 0) {
    out.emplace_back("day window must be a whole number of ticks");
  }
  if (c.move_speed < 1) out.emplace_back("move_speed must be >= 1");
  if (c.memory_capacity < 1) out.emplace_back("memory capacity K must be >= 1");
  if (c.blur_batch < 2) out.emplace_back("blur batch B must be >= 2");
  if (c.dialogue.base_probability < 0 || c.dialogue.base_probability > 1) {
    out.emplace_back("dialogue base_probability must be in [0, 1]");
  }
  if (c.dialogue.radius < 0) out.emplace_back("dialogue radius must be >= 0");
  if (c.dialogue.cooldown_ticks < 0) out.emplace_back("dialogue cooldown must be >= 0");
  if (c.dialogue.max_turns < 2) out.emplace_back("dialogue max_turns must be >= 2");
  if (c.summary_words < 1) out.emplace_back("summary_words must be >= 1");
  for (std::size_t i = 0; i < c.commands.size(); ++i) {
    const auto& cmd = c.commands[i];
    if (cmd.at != "pre_day" && cmd.at != "tick") out.push_back("command " + std::to_string(i) + ": bad 'at'");
    static const std::set<std::string> kinds = {"chat", "env_update", "step", "run_day", "pause", "resume"};
    if (!kinds.count(cmd.kind)) out.push_back("command " + std::to_string(i) + ": unknown kind '" + cmd.kind + "'");
    if (i > 0) {
      const auto& p = c.commands[i - 1];
      auto key = [](const Command& x) { return std::tuple(x.day, position_rank(x), x.at == "tick" ? x.tick : 0); };
      if (key(cmd) < key(p)) out.push_back("command " + std::to_string(i) + ": out of order");
    }
  }
  return out;
}

std::shared_ptr<lm::Backend> make_backend(const RunConfig& c) {
  if (c.backend == "http") return std::make_shared<lm::HttpBackend>(lm::http_config_from_env(c.http));
  return std::make_shared<lm::ScriptedBackend>(c.seed);
}

}  // namespace psim
