#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "psim/evaluation/bfi.hpp"
#include "psim/evaluation/metrics.hpp"
#include "psim/evaluation/stats.hpp"
#include "psim/evaluation/trueskill.hpp"
#include "psim/kernel.hpp"
#include "psim/replay.hpp"
#include "psim/server.hpp"

namespace fs = std::filesystem;
using namespace psim;

namespace {

enum Exit { kOk = 0, kFailure = 1, kBadConfig = 2, kCorruptLog = 3, kAgentMismatch = 4 };

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw LookupError("cannot read " + p.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

RunConfig load_config(const fs::path& path) {
  if (!fs::is_regular_file(path)) throw InputError("cannot read config " + path.string());
  json j;
  try {
    j = json::parse(slurp(path));
  } catch (const json::parse_error& e) {
    throw InputError(path.string() + ": " + e.what());
  }
  return config_from_json(j, path.parent_path());
}

std::string default_log_path(const fs::path& config, const RunConfig& c) {
  std::string name = config.stem().string() + "-s" + std::to_string(c.seed);
  if (c.ablate.disable_growth) name += "-nogrowth";
  if (c.ablate.disable_insight) name += "-noinsight";
  if (c.ablate.disable_feelings) name += "-nofeelings";
  if (c.ablate.simple_character) name += "-simple";
  return (fs::path("runs") / (name + ".jsonl")).string();
}

struct RunFlags {
  std::string config;
  std::optional<int> days;
  std::optional<std::uint64_t> seed;
  std::string backend;
  std::string ablate;
  std::string log;
  std::string save;
};

int cmd_run(const RunFlags& f) {
  RunConfig c = load_config(f.config);
  if (f.days) c.days = *f.days;
  if (f.seed) c.seed = *f.seed;
  if (!f.backend.empty()) c.backend = f.backend;
  if (!f.ablate.empty()) c.ablate = parse_ablations(f.ablate);
  if (!f.log.empty()) c.log_path = f.log;
  if (c.log_path.empty()) c.log_path = default_log_path(f.config, c);
  auto problems = config_problems(c);
  if (!problems.empty()) throw InputError("invalid config: " + problems.front());
  if (auto dir = fs::path(c.log_path).parent_path(); !dir.empty()) fs::create_directories(dir);

  Kernel kernel(c);
  kernel.run();
  if (!f.save.empty()) std::ofstream(f.save) << kernel.save().dump() << "\n";
  std::cout << c.log_path << "\n" << hex64(fnv1a64(slurp(c.log_path))) << "\n";
  return kOk;
}

int cmd_metrics(const std::string& log, bool as_json) {
  auto m = eval::compute_metrics(read_log(log));
  if (as_json) {
    std::cout << eval::to_json(m).dump(2) << "\n";
  } else {
    std::cout << eval::metrics_table(m);
  }
  return kOk;
}

int cmd_compare(const std::string& a, const std::string& b, bool as_json) {
  auto report = eval::compare_metrics(eval::compute_metrics(read_log(a)), eval::compute_metrics(read_log(b)));
  if (as_json) {
    std::cout << report.dump(2) << "\n";
  } else {
    std::cout << eval::compare_table(report);
  }
  return kOk;
}

int cmd_bfi(const std::string& log, const std::string& backend_override, bool as_json) {
  const auto records = read_log(log);
  RunConfig c = config_from_log(records);
  if (!backend_override.empty()) c.backend = backend_override;
  lm::LmClient client(make_backend(c));
  json out = json::object();
  for (const auto& [agent, days] : eval::structures_by_day(records)) {
    std::vector<std::pair<int, json>> views;
    for (const auto& [d, cs] : days) {
      if (d >= 1) views.emplace_back(d, full_view(cs));
    }
    if (views.empty()) continue;
    json per_day = json::object();
    std::vector<BigFiveVector> series;
    for (const auto& sheet : eval::administer_bfi(agent, views, client)) {
      auto scores = eval::score_bfi(sheet);
      per_day[std::to_string(sheet.day)] = scores.scores;
      series.push_back(scores.scores);
    }
    out[agent] = {{"scores", per_day},
                  {"delta_overall", series.size() >= 2 ? json(eval::delta_overall(eval::score_series(series)))
                                                       : json(nullptr)}};
  }
  if (as_json) {
    std::cout << out.dump(2) << "\n";
  } else {
    for (auto it = out.begin(); it != out.end(); ++it) {
      std::cout << it.key() << "\n";
      for (auto d = it.value().at("scores").begin(); d != it.value().at("scores").end(); ++d) {
        const auto& s = d.value();
        std::cout << "  day " << d.key() << "  EXT " << s.at("extraversion") << "  AGR " << s.at("agreeableness")
                  << "  CON " << s.at("conscientiousness") << "  NEU " << s.at("neuroticism") << "  OPEN "
                  << s.at("openness") << "\n";
      }
      std::cout << "  delta_overall " << it.value().at("delta_overall").dump() << "\n";
    }
  }
  return kOk;
}

int cmd_validate_world(const std::string& path) {
  WorldMap w = load_world(slurp(path));
  std::cout << w.places.size() << " places in " << w.buildings.size() << " buildings\n";
  return kOk;
}

int cmd_serve(const std::string& config, const std::string& host, int port, int tick_ms, bool run) {
  RunConfig c = load_config(config);
  if (c.log_path.empty()) {
    c.log_path = default_log_path(config, c);
    if (auto dir = fs::path(c.log_path).parent_path(); !dir.empty()) fs::create_directories(dir);
  }
  ServerOptions o;
  o.host = host;
  o.port = port;
  o.tick_delay_ms = tick_ms;
  o.start_running = run;
  SimServer server(std::make_unique<Kernel>(c), o);
  int bound = server.start();
  std::cerr << "serving on http://" << host << ":" << bound << " (log " << c.log_path << ")\n";
  server.listen();
  return kOk;
}

int cmd_replay(const std::string& log) {
  const std::string text = slurp(log);
  const auto records = parse_log(text);
  RunConfig c = config_from_log(records);
  c.commands = command_transcript(records);
  auto outcome = replay_run(c, records, text);
  const auto violations = audit_log(records, {c.memory_capacity, !c.ablate.disable_growth});

  RunConfig fresh = c;
  fresh.log_path.clear();
  Kernel rerun(fresh, std::make_shared<lm::ReplayBackend>(recorded_exchanges(records)));
  rerun.run();
  const bool state_ok = reconstruct_state(records) == rerun.state_view();

  std::cout << "log replay: " << (outcome.identical ? "identical" : "differs at line " + std::to_string(outcome.first_difference))
            << "\nstate reconstruction: " << (state_ok ? "exact" : "mismatch") << "\naudit: " << violations.size()
            << " violations\n";
  for (const auto& v : violations) std::cout << "  " << v << "\n";
  return outcome.identical && state_ok && violations.empty() ? kOk : kFailure;
}

int cmd_stats(const std::string& path, bool as_json) {
  const auto rankings = eval::read_rankings_csv(slurp(path));
  const auto ratings = eval::trueskill_rank(rankings);
  std::vector<std::string> groups;
  for (const auto& [g, _] : ratings) groups.push_back(g);

  // Rank positions (1 = best) per group, one value per evaluator.
  std::vector<std::vector<double>> positions(groups.size());
  for (const auto& r : rankings) {
    for (std::size_t i = 0; i < r.order.size(); ++i) {
      auto g = std::find(groups.begin(), groups.end(), r.order[i]) - groups.begin();
      positions[static_cast<std::size_t>(g)].push_back(static_cast<double>(i + 1));
    }
  }
  json out = {{"trueskill", eval::to_json(ratings)}};
  try {
    out["kruskal_wallis"] = eval::to_json(eval::kruskal_wallis(positions));
    json pairs = json::array();
    for (const auto& p : eval::dunn_posthoc_holm(positions)) {
      json t = eval::to_json(p.test);
      t["a"] = groups[p.a];
      t["b"] = groups[p.b];
      pairs.push_back(t);
    }
    out["dunn_holm"] = pairs;
  } catch (const DegenerateDataError& e) {
    out["kruskal_wallis"] = {{"error", e.what()}};
  }
  if (as_json) {
    std::cout << out.dump(2) << "\n";
    return kOk;
  }
  std::cout << "group          mu       sigma\n";
  for (const auto& [g, r] : ratings) {
    char buf[96];
    std::snprintf(buf, sizeof buf, "%-14s %-8.3f %.3f\n", g.c_str(), r.mu, r.sigma);
    std::cout << buf;
  }
  if (out["kruskal_wallis"].contains("statistic")) {
    std::cout << "kruskal-wallis H " << out["kruskal_wallis"]["statistic"].get<double>() << " p "
              << out["kruskal_wallis"]["p"].get<double>() << "\n";
    for (const auto& p : out["dunn_holm"]) {
      std::cout << "  " << p["a"].get<std::string>() << " vs " << p["b"].get<std::string>() << "  z "
                << p["statistic"].get<double>() << "  p_holm " << p["p_adjusted"].get<double>() << "\n";
    }
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"psim: personality-driven agent sandbox"};
  app.require_subcommand(1);

  RunFlags rf;
  auto* run = app.add_subcommand("run", "Run a simulation and print the log path and hash");
  run->add_option("config", rf.config, "Run configuration (JSON)")->required();
  run->add_option("--days", rf.days, "Number of days");
  run->add_option("--seed", rf.seed, "Random seed");
  run->add_option("--backend", rf.backend, "scripted | http")->check(CLI::IsMember({"scripted", "http"}));
  run->add_option("--ablate", rf.ablate, "Comma list of growth,insight,feelings,simple-character");
  run->add_option("--log", rf.log, "Event log path");
  run->add_option("--save", rf.save, "Write the final kernel state here");

  std::string log_a, log_b;
  bool as_json = false;
  auto* metrics = app.add_subcommand("metrics", "Personality change and behavior activity metrics");
  metrics->add_option("log", log_a, "Event log")->required();
  metrics->add_flag("--json", as_json, "JSON output");

  std::string bfi_backend;
  auto* bfi = app.add_subcommand("bfi", "Re-administer the BFI-44 over a log's daily structures");
  bfi->add_option("log", log_a, "Event log")->required();
  bfi->add_option("--backend", bfi_backend, "scripted | http")->check(CLI::IsMember({"scripted", "http"}));
  bfi->add_flag("--json", as_json, "JSON output");

  auto* compare = app.add_subcommand("compare", "Compare the metrics of two logs");
  compare->add_option("log_a", log_a, "Baseline log")->required();
  compare->add_option("log_b", log_b, "Other log")->required();
  compare->add_flag("--json", as_json, "JSON output");

  std::string config, host = "127.0.0.1";
  int port = 8080, tick_ms = 100;
  bool start_running = false;
  auto* serve = app.add_subcommand("serve", "Serve the HTTP API over a live simulation");
  serve->add_option("config", config, "Run configuration (JSON)")->required();
  serve->add_option("--host", host, "Bind address");
  serve->add_option("--port", port, "Port (0 picks a free one)");
  serve->add_option("--tick-ms", tick_ms, "Delay between ticks while running");
  serve->add_flag("--run", start_running, "Start the clock immediately");

  std::string world;
  auto* validate = app.add_subcommand("validate-world", "Check a world CSV");
  validate->add_option("csv", world, "World CSV")->required();

  auto* replay = app.add_subcommand("replay", "Verify a log by replay, state reconstruction and audit");
  replay->add_option("log", log_a, "Event log")->required();

  std::string ratings;
  auto* stats = app.add_subcommand("stats", "TrueSkill and rank statistics over a rankings CSV");
  stats->add_option("ratings", ratings, "CSV: evaluator_id, then groups best first")->required();
  stats->add_flag("--json", as_json, "JSON output");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kOk : kBadConfig;
  }

  try {
    if (*run) return cmd_run(rf);
    if (*metrics) return cmd_metrics(log_a, as_json);
    if (*bfi) return cmd_bfi(log_a, bfi_backend, as_json);
    if (*compare) return cmd_compare(log_a, log_b, as_json);
    if (*serve) return cmd_serve(config, host, port, tick_ms, start_running);
    if (*validate) return cmd_validate_world(world);
    if (*replay) return cmd_replay(log_a);
    if (*stats) return cmd_stats(ratings, as_json);
  } catch (const CorruptLogError& e) {
    std::cerr << "corrupt log: " << e.what() << "\n";
    return kCorruptLog;
  } catch (const eval::AgentMismatchError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kAgentMismatch;
  } catch (const ParseError& e) {
    std::cerr << "invalid input: " << e.what() << "\n";
    return kBadConfig;
  } catch (const InputError& e) {
    std::cerr << "invalid input: " << e.what() << "\n";
    return kBadConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kFailure;
  }
  return kFailure;
}
