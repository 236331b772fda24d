#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "psim/behavior.hpp"
#include "psim/character.hpp"
#include "psim/environment.hpp"
#include "psim/event_log.hpp"
#include "psim/lm/backends.hpp"
#include "psim/lm/client.hpp"
#include "psim/personality.hpp"

namespace psim {

struct Ablations {
  bool disable_feelings = false;
  bool disable_insight = false;
  bool disable_growth = false;
  bool simple_character = false;

  bool operator==(const Ablations&) const = default;
};

// Parses "growth,insight,feelings,simple-character". Throws InputError.
Ablations parse_ablations(std::string_view list);

struct AgentSeed {
  AgentId id;
  std::string home;  // place id
  std::optional<std::string> brief;
  std::optional<CharacterStructure> structure;
};

// A recorded external command. `at` is "pre_day" (before day `day` begins)
// or "tick" (day open, before tick `tick` runs).
struct Command {
  int day = 1;
  int tick = 0;
  std::string at = "tick";
  std::string kind;  // chat | env_update | step | run_day | pause | resume
  json payload = json::object();

  bool operator==(const Command&) const = default;
};

void to_json(json& j, const Command& c);
void from_json(const json& j, Command& c);

struct RunConfig {
  std::uint64_t seed = 0;
  int days = 1;
  std::vector<AgentSeed> agents;
  std::string world_path;
  std::string world_csv;  // contents; loaded from world_path when empty
  std::string backend = "scripted";  // scripted | http
  lm::HttpBackendConfig http;
  int tick_minutes = 15;
  int day_start = 6 * 60;
  int day_end = 23 * 60;
  int move_speed = 4;
  Ablations ablate;
  int memory_capacity = 30;  // K
  int blur_batch = 10;       // B
  TriggerParams dialogue;
  int summary_words = 60;
  bool administer_bfi = true;
  std::string log_path;
  std::vector<Command> commands;
};

// Relative paths resolve against `base_dir`. Throws InputError.
RunConfig config_from_json(const json& j, const std::filesystem::path& base_dir = {});
json config_to_json(const RunConfig& c);
std::vector<std::string> config_problems(const RunConfig& c);

std::shared_ptr<lm::Backend> make_backend(const RunConfig& c);

struct SimClock {
  int day = 0;   // 1-based once the first day begins
  int tick = 0;  // next tick to run
  bool day_open = false;

  std::string hhmm(const DayWindow& w) const { return format_hhmm(w.minute_of(tick)); }
};

struct AgentRuntime {
  AgentId id;
  std::string home;
  CharacterStructure structure;
  AgentCard card;
  DailyPlan plan;
  EmotionState emotion;
  MemoryStore memory;
  DialogMemory dialogs;
  std::vector<InsightRecord> insights;
  std::string position;
  std::int64_t busy_until = -1;  // absolute tick
  std::vector<std::string> day_events;
};

struct ChatResult {
  AgentId agent;
  std::string text;
  std::string reply;
  std::string summary;
  int day = 0;
  int tick = 0;
};

struct EnvUpdateReport {
  bool ok = false;
  std::vector<std::string> errors;
  WorldDiff diff;
  int effective_day = 0;
};

json to_json(const EnvUpdateReport& r);

class Kernel {
 public:
  // A null backend is built from the config.
  explicit Kernel(RunConfig config, std::shared_ptr<lm::Backend> backend = nullptr);
  ~Kernel();

  // Restores a saved kernel and appends to its log.
  static std::unique_ptr<Kernel> resume(const json& saved, std::shared_ptr<lm::Backend> backend = nullptr);

  // Runs every remaining configured day.
  void run();
  void run_day();
  void begin_day();
  // Runs one tick; opens a day first if needed and closes it after the last tick.
  void step();
  void end_day();

  bool finished() const { return clock_.day >= config_.days && !clock_.day_open; }

  // External commands, applied at the current tick boundary.
  ChatResult chat(const AgentId& agent, const std::string& text);
  EnvUpdateReport stage_environment(const std::string& csv);
  void note_control(const std::string& kind);

  json snapshot() const;
  // Replay-comparable state: the snapshot minus scheduler internals.
  json state_view() const;
  json agent_view(const AgentId& id) const;
  json save() const;

  const RunConfig& config() const { return config_; }
  const SimClock& clock() const { return clock_; }
  const DayWindow& window() const { return window_; }
  const WorldMap& world() const { return world_; }
  const std::map<AgentId, AgentRuntime>& agents() const { return agents_; }
  EventLog& log() { return *log_; }
  const EventLog& log() const { return *log_; }

  // Character views fed to prompts, cached per revision and emphasis.
  json character_view(const AgentId& id, std::optional<Dimension> emphasis);

 private:
  struct Resumed {};
  Kernel(Resumed, RunConfig config, std::shared_ptr<lm::Backend> backend);

  void init_agents();
  void attach_client(std::shared_ptr<lm::Backend> backend);
  void emit(const std::optional<AgentId>& agent, std::string type, json payload);
  void apply_commands(const std::string& at);
  void apply_command(const Command& c);
  ChatResult do_chat(const AgentId& agent, const std::string& text);
  void record_command(const std::string& kind, const json& payload);
  std::int64_t abs_tick(int tick) const;
  bool busy(const AgentRuntime& a, int tick) const;
  void emotion_after(AgentRuntime& a, const std::string& action, const std::string& kind,
                     const std::string& memory_text, std::uint64_t source_seq, int tick);
  void run_tick(int tick);
  void start_entries(int tick);
  void dialogue_phase(int tick);
  void administer_final_bfi();
  AgentRuntime& agent(const AgentId& id);

  RunConfig config_;
  DayWindow window_;
  WorldMap world_;
  std::optional<std::string> staged_world_;
  OccupancyLedger ledger_;
  SimClock clock_;
  CounterRng rng_;
  std::map<AgentId, AgentRuntime> agents_;
  std::map<std::string, std::int64_t> last_talk_;  // "a|b" -> absolute tick
  std::map<std::string, CharacterSummary> summary_cache_;
  std::map<AgentId, std::vector<std::pair<int, CharacterStructure>>> day_structures_;
  std::size_t next_command_ = 0;
  bool replaying_commands_ = false;
  std::unique_ptr<EventLog> log_;
  std::unique_ptr<lm::LmClient> client_;
};

}  // namespace psim
