#pragma once

#include <string>
#include <vector>

#include "psim/event_log.hpp"
#include "psim/kernel.hpp"

namespace psim {

// Rebuilds the replay-comparable state (Kernel::state_view) by folding log
// records. Exact at day boundaries; mid-day the clock tick is the last
// recorded tick.
json reconstruct_state(const std::vector<LogRecord>& records);

// The configuration stored in the log's leading "run" record. Throws
// LookupError when the log has none.
RunConfig config_from_log(const std::vector<LogRecord>& records);

// External commands recorded in the log, as a replayable transcript.
std::vector<Command> command_transcript(const std::vector<LogRecord>& records);

// Recorded lm exchanges, in log order, as ReplayBackend input.
std::vector<json> recorded_exchanges(const std::vector<LogRecord>& records);

struct ReplayOutcome {
  bool identical = false;
  std::size_t first_difference = 0;  // 1-based line, 0 when identical
  std::size_t unused_exchanges = 0;
  std::string replayed_log;
};

// Re-runs `config` against the recorded exchanges and compares the new log
// with `original_log` byte for byte.
ReplayOutcome replay_run(RunConfig config, const std::vector<LogRecord>& records,
                         const std::string& original_log);

struct AuditOptions {
  int memory_capacity = 30;
  bool growth_enabled = true;
};

// Mechanism invariants over a finished log. Each violation is one line
// prefixed by its check letter:
//  a  replan records appear exactly after emotion jumps of three or more
//  b  the long-term store never exceeds the capacity
//  c  accepted invitations leave matching entries in both plans
//  d  no ledger snapshot exceeds a place's capacity
//  e  growth runs once per agent and day, after its four ordered stages
//  o  per-agent phase order within a day
std::vector<std::string> audit_log(const std::vector<LogRecord>& records, const AuditOptions& options);

}  // namespace psim
