#pragma once

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <unistd.h>

#include <deque>
#include <map>
#include <vector>

#include "psim/kernel.hpp"

namespace psim::test {

inline std::filesystem::path source_path(const std::string& rel) { return std::filesystem::path(PSIM_SOURCE_DIR) / rel; }

inline std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

inline std::string campus_csv() { return slurp(source_path("data/campus.csv")); }

inline json three_agents_json() { return json::parse(slurp(source_path("configs/three_agents.json"))); }

// The shipped three-agent config, in memory only.
inline RunConfig three_agents(int days = 7, const std::string& ablate = "") {
  json j = three_agents_json();
  j.erase("log");
  j["days"] = days;
  if (!ablate.empty()) j["ablate"] = ablate;
  return config_from_json(j, source_path("configs"));
}

inline std::string log_text(const EventLog& log) {
  std::string out;
  for (const auto& r : log.records()) out += record_line(r) + "\n";
  return out;
}

struct TempDir {
  std::filesystem::path path;
  explicit TempDir(const std::string& tag) {
    path = std::filesystem::temp_directory_path() / ("psim-" + tag + "-" + std::to_string(::getpid()));
    std::filesystem::remove_all(path);
    std::filesystem::create_directories(path);
  }
  ~TempDir() { std::filesystem::remove_all(path); }
};

// Serves queued payloads per kind, then injected failures, then the scripted backend.
class StubBackend : public lm::Backend {
 public:
  explicit StubBackend(std::uint64_t seed = 1) : scripted_(seed) {}

  void push(lm::PromptKind k, json payload) { queued_[k].push_back(std::move(payload)); }
  void fail(lm::PromptKind k) { failing_.push_back(k); }

  std::string id() const override { return "stub"; }
  json generate(const lm::PromptRequest& request) override {
    requests.push_back(request);
    auto it = queued_.find(request.kind);
    if (it != queued_.end() && !it->second.empty()) {
      json out = it->second.front();
      it->second.pop_front();
      return out;
    }
    for (auto k : failing_) {
      if (k == request.kind) throw BackendError("stub failure");
    }
    return scripted_.generate(request);
  }

  std::size_t count(lm::PromptKind k) const {
    std::size_t n = 0;
    for (const auto& r : requests) n += r.kind == k;
    return n;
  }

  std::vector<lm::PromptRequest> requests;

 private:
  lm::ScriptedBackend scripted_;
  std::map<lm::PromptKind, std::deque<json>> queued_;
  std::vector<lm::PromptKind> failing_;
};

}  // namespace psim::test
