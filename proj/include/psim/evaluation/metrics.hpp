#pragma once

#include <array>
#include <map>
#include <vector>

#include "psim/behavior.hpp"
#include "psim/character.hpp"
#include "psim/event_log.hpp"
#include "psim/types.hpp"

namespace psim::eval {

// Per-dimension daily scores, dimension-major: series[d][i] is day i+1.
using ScoreSeries = std::array<std::vector<double>, 5>;
using GoalCountVector = std::vector<double>;
using DistanceMatrix = std::vector<std::vector<double>>;

class AgentMismatchError : public Error {
 public:
  using Error::Error;
};

// Mean absolute day-to-day change over the five dimensions.
double delta_overall(const ScoreSeries& series);
ScoreSeries score_series(const std::vector<BigFiveVector>& days);

// Live entries per goal in the agent's plan of record for the day: the
// plan after appointment post-processing, before any action ran.
GoalCountVector goal_counts(const std::vector<LogRecord>& records, const AgentId& agent, int day);
GoalCountVector goal_counts(const DailyPlan& plan);

double euclid_distance(const GoalCountVector& a, const GoalCountVector& b);
DistanceMatrix distance_matrix(const std::vector<GoalCountVector>& days);
// Mean of the strict upper triangle.
double activity_level(const DistanceMatrix& d);

struct AgentMetrics {
  std::map<int, BigFiveVector> bfi;  // by assessed day
  std::optional<double> delta_overall;
  std::vector<GoalCountVector> goal_counts;  // days 1..n
  DistanceMatrix distances;
  std::optional<double> activity_level;
};

struct LogMetrics {
  int days = 0;
  std::map<AgentId, AgentMetrics> agents;
};

LogMetrics compute_metrics(const std::vector<LogRecord>& records);
json to_json(const LogMetrics& m);
std::string metrics_table(const LogMetrics& m);

// Side-by-side report (B minus A). Throws AgentMismatchError.
json compare_metrics(const LogMetrics& a, const LogMetrics& b);
std::string compare_table(const json& report);

// Structures of record per agent and day (day 0 = initial).
std::map<AgentId, std::map<int, CharacterStructure>> structures_by_day(const std::vector<LogRecord>& records);

}  // namespace psim::eval
