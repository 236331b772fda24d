#include "psim/evaluation/metrics.hpp"

#include <cmath>
#include <cstdio>
#include <set>
#include <sstream>

namespace psim::eval {
namespace {

std::string fixed(double v, int digits = 3) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::string pad(const std::string& s, std::size_t w) { return s.size() >= w ? s : s + std::string(w - s.size(), ' '); }

json optional_number(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

}  // namespace

ScoreSeries score_series(const std::vector<BigFiveVector>& days) {
  ScoreSeries s;
  for (const auto& v : days) {
    s[0].push_back(v.extraversion);
    s[1].push_back(v.agreeableness);
    s[2].push_back(v.conscientiousness);
    s[3].push_back(v.neuroticism);
    s[4].push_back(v.openness);
  }
  return s;
}

double delta_overall(const ScoreSeries& series) {
  const std::size_t n = series[0].size();
  for (const auto& d : series) {
    if (d.size() != n) throw InputError("delta_overall: dimensions have different lengths");
  }
  if (n < 2) throw InsufficientDataError("delta_overall needs at least 2 days");
  double sum = 0.0;
  for (const auto& d : series) {
    for (std::size_t i = 0; i + 1 < n; ++i) sum += std::fabs(d[i] - d[i + 1]);
  }
  return sum / (static_cast<double>(series.size()) * static_cast<double>(n - 1));
}

GoalCountVector goal_counts(const DailyPlan& plan) {
  GoalCountVector v(kGoalCount, 0.0);
  for (const auto& e : plan.entries) {
    if (e.live()) v[static_cast<std::size_t>(e.goal)] += 1.0;
  }
  return v;
}

GoalCountVector goal_counts(const std::vector<LogRecord>& records, const AgentId& agent, int day) {
  std::optional<DailyPlan> plan;
  for (const auto& r : records) {
    if (r.day != day) continue;
    if (r.type == "plan" && r.agent == agent) {
      plan = r.payload.at("plan").get<DailyPlan>();
    } else if (r.type == "invite" && r.payload.at("plans").contains(agent)) {
      plan = r.payload.at("plans").at(agent).get<DailyPlan>();
    } else if (plan && r.type != "lm" && r.type != "command") {
      if (r.type != "plan" && r.type != "invite") break;
    }
  }
  if (!plan) throw LookupError("no plan for agent '" + agent + "' on day " + std::to_string(day));
  return goal_counts(*plan);
}

double euclid_distance(const GoalCountVector& a, const GoalCountVector& b) {
  if (a.size() != b.size()) throw InputError("euclid_distance: axis mismatch");
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) s += (a[k] - b[k]) * (a[k] - b[k]);
  return std::sqrt(s);
}

DistanceMatrix distance_matrix(const std::vector<GoalCountVector>& days) {
  DistanceMatrix d(days.size(), std::vector<double>(days.size(), 0.0));
  for (std::size_t i = 0; i < days.size(); ++i) {
    for (std::size_t j = i + 1; j < days.size(); ++j) d[i][j] = d[j][i] = euclid_distance(days[i], days[j]);
  }
  return d;
}

double activity_level(const DistanceMatrix& d) {
  const std::size_t n = d.size();
  if (n < 2) throw InsufficientDataError("activity_level needs at least 2 days");
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (d[i].size() != n) throw InputError("activity_level: matrix is not square");
    for (std::size_t j = i + 1; j < n; ++j) sum += d[i][j];
  }
  return sum / (static_cast<double>(n) * static_cast<double>(n - 1) / 2.0);
}

LogMetrics compute_metrics(const std::vector<LogRecord>& records) {
  LogMetrics m;
  for (const auto& r : records) {
    if (r.type == "init" && r.agent) m.agents[*r.agent];
    if (r.type == "day") m.days = std::max(m.days, r.day);
    if (r.type == "bfi" && r.agent) {
      m.agents[*r.agent].bfi[r.payload.at("assessed_day").get<int>()] = r.payload.at("scores").get<BigFiveVector>();
    }
  }
  for (auto& [id, a] : m.agents) {
    if (a.bfi.size() >= 2) {
      std::vector<BigFiveVector> days;
      for (const auto& [_, v] : a.bfi) days.push_back(v);
      a.delta_overall = delta_overall(score_series(days));
    }
    for (int d = 1; d <= m.days; ++d) a.goal_counts.push_back(goal_counts(records, id, d));
    a.distances = distance_matrix(a.goal_counts);
    if (a.goal_counts.size() >= 2) a.activity_level = activity_level(a.distances);
  }
  return m;
}

json to_json(const LogMetrics& m) {
  json agents = json::object();
  for (const auto& [id, a] : m.agents) {
    json bfi = json::object();
    for (const auto& [d, v] : a.bfi) bfi[std::to_string(d)] = v;
    agents[id] = {{"bfi", bfi},
                  {"delta_overall", optional_number(a.delta_overall)},
                  {"goal_counts", a.goal_counts},
                  {"distance_matrix", a.distances},
                  {"activity_level", optional_number(a.activity_level)}};
  }
  json goals = json::array();
  for (auto name : kGoalNames) goals.push_back(std::string(name));
  return {{"days", m.days}, {"goal_axis", goals}, {"agents", agents}};
}

std::string metrics_table(const LogMetrics& m) {
  std::ostringstream out;
  out << pad("agent", 14) << pad("delta_overall", 16) << "activity_level\n";
  for (const auto& [id, a] : m.agents) {
    out << pad(id, 14) << pad(a.delta_overall ? fixed(*a.delta_overall) : "-", 16)
        << (a.activity_level ? fixed(*a.activity_level) : "-") << "\n";
  }
  return out.str();
}

json compare_metrics(const LogMetrics& a, const LogMetrics& b) {
  std::set<AgentId> ia, ib;
  for (const auto& [id, _] : a.agents) ia.insert(id);
  for (const auto& [id, _] : b.agents) ib.insert(id);
  if (ia != ib) throw AgentMismatchError("logs cover different agents");
  json agents = json::object();
  auto diff = [](const std::optional<double>& x, const std::optional<double>& y) {
    return x && y ? json(*y - *x) : json(nullptr);
  };
  for (const auto& id : ia) {
    const auto& x = a.agents.at(id);
    const auto& y = b.agents.at(id);
    agents[id] = {{"delta_overall", {{"a", optional_number(x.delta_overall)},
                                     {"b", optional_number(y.delta_overall)},
                                     {"diff", diff(x.delta_overall, y.delta_overall)}}},
                  {"activity_level", {{"a", optional_number(x.activity_level)},
                                      {"b", optional_number(y.activity_level)},
                                      {"diff", diff(x.activity_level, y.activity_level)}}}};
  }
  return {{"days", {{"a", a.days}, {"b", b.days}}}, {"agents", agents}};
}

std::string compare_table(const json& report) {
  std::ostringstream out;
  auto cell = [](const json& v) { return v.is_null() ? std::string("-") : fixed(v.get<double>()); };
  out << pad("agent", 14) << pad("delta_a", 10) << pad("delta_b", 10) << pad("diff", 10) << pad("activity_a", 12)
      << pad("activity_b", 12) << "diff\n";
  for (auto it = report.at("agents").begin(); it != report.at("agents").end(); ++it) {
    const auto& d = it.value().at("delta_overall");
    const auto& act = it.value().at("activity_level");
    out << pad(it.key(), 14) << pad(cell(d.at("a")), 10) << pad(cell(d.at("b")), 10) << pad(cell(d.at("diff")), 10)
        << pad(cell(act.at("a")), 12) << pad(cell(act.at("b")), 12) << cell(act.at("diff")) << "\n";
  }
  return out.str();
}

std::map<AgentId, std::map<int, CharacterStructure>> structures_by_day(const std::vector<LogRecord>& records) {
  std::map<AgentId, std::map<int, CharacterStructure>> out;
  std::map<AgentId, CharacterStructure> current;
  for (const auto& r : records) {
    if (!r.agent) continue;
    if (r.type == "init") {
      current[*r.agent] = r.payload.at("structure").get<CharacterStructure>();
      out[*r.agent][0] = current[*r.agent];
    } else if (r.type == "growth") {
      current[*r.agent] = r.payload.at("structure").get<CharacterStructure>();
    } else if (r.type == "day") {
      out[*r.agent][r.day] = current.at(*r.agent);
    }
  }
  return out;
}

}  // namespace psim::eval
