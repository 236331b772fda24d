#include <cmath>
#include <random>

#include "doctest.h"
#include "psim/evaluation/metrics.hpp"
#include "support.hpp"

using namespace psim;
using namespace psim::eval;

namespace {

bool close_rel(double got, double want) {
  return std::fabs(got - want) <= 1e-12 * std::max(1.0, std::fabs(want));
}

// Day-major summation in long double.
double oracle_delta(const ScoreSeries& s) {
  const std::size_t n = s[0].size();
  long double sum = 0;
  for (std::size_t i = 1; i < n; ++i) {
    for (std::size_t d = 0; d < 5; ++d) {
      long double step = static_cast<long double>(s[d][i]) - s[d][i - 1];
      sum += step < 0 ? -step : step;
    }
  }
  return static_cast<double>(sum / (5.0L * (n - 1)));
}

double oracle_euclid(const GoalCountVector& a, const GoalCountVector& b) {
  long double s = 0;
  for (std::size_t k = a.size(); k-- > 0;) s += (static_cast<long double>(a[k]) - b[k]) * (static_cast<long double>(a[k]) - b[k]);
  return static_cast<double>(std::sqrt(s));
}

// Whole matrix off-diagonal, halved.
double oracle_activity(const DistanceMatrix& d) {
  const std::size_t n = d.size();
  long double s = 0;
  std::size_t pairs = 0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      s += d[i][j];
      ++pairs;
    }
  }
  return static_cast<double>(s / pairs);
}

}  // namespace

TEST_SUITE("metrics") {
  TEST_CASE("delta_overall against re-summation") {
    std::mt19937_64 rng(101);
    std::uniform_int_distribution<int> days(2, 30), score(8, 50);
    for (int rep = 0; rep < 1000; ++rep) {
      ScoreSeries s;
      const int n = days(rng);
      for (auto& d : s) {
        for (int i = 0; i < n; ++i) d.push_back(rep % 2 ? score(rng) : score(rng) + 0.37 * score(rng));
      }
      CHECK(close_rel(delta_overall(s), oracle_delta(s)));
    }
    ScoreSeries flat;
    for (auto& d : flat) d = {20, 20, 20};
    CHECK(delta_overall(flat) == 0.0);
    ScoreSeries one;
    for (auto& d : one) d = {20, 25};
    CHECK(delta_overall(one) == 5.0);
    ScoreSeries short_series;
    for (auto& d : short_series) d = {20};
    CHECK_THROWS_AS(delta_overall(short_series), InsufficientDataError);
    ScoreSeries ragged = one;
    ragged[3].push_back(1);
    CHECK_THROWS_AS(delta_overall(ragged), InputError);
  }

  TEST_CASE("score_series orders dimensions") {
    BigFiveVector v;
    v.extraversion = 1;
    v.agreeableness = 2;
    v.conscientiousness = 3;
    v.neuroticism = 4;
    v.openness = 5;
    auto s = score_series({v, v});
    for (std::size_t d = 0; d < 5; ++d) CHECK(s[d] == std::vector<double>{d + 1.0, d + 1.0});
  }

  TEST_CASE("euclid_distance against re-summation") {
    std::mt19937_64 rng(202);
    std::uniform_int_distribution<int> count(0, 6);
    for (int rep = 0; rep < 1000; ++rep) {
      GoalCountVector a(kGoalCount), b(kGoalCount);
      for (std::size_t k = 0; k < kGoalCount; ++k) {
        a[k] = count(rng);
        b[k] = count(rng) + (rep % 3 == 0 ? 0.25 * count(rng) : 0.0);
      }
      CHECK(close_rel(euclid_distance(a, b), oracle_euclid(a, b)));
      CHECK(euclid_distance(a, b) == euclid_distance(b, a));
    }
    CHECK(euclid_distance({0, 3}, {4, 0}) == 5.0);
    CHECK_THROWS_AS(euclid_distance({1}, {1, 2}), InputError);
  }

  TEST_CASE("activity_level against re-summation") {
    std::mt19937_64 rng(303);
    std::uniform_int_distribution<int> days(2, 20), count(0, 5);
    for (int rep = 0; rep < 1000; ++rep) {
      std::vector<GoalCountVector> v(static_cast<std::size_t>(days(rng)), GoalCountVector(kGoalCount));
      for (auto& g : v) {
        for (auto& x : g) x = count(rng);
      }
      auto d = distance_matrix(v);
      CHECK(close_rel(activity_level(d), oracle_activity(d)));
    }
    DistanceMatrix d = {{0, 1, 2}, {1, 0, 3}, {2, 3, 0}};
    CHECK(activity_level(d) == 2.0);
    CHECK_THROWS_AS(activity_level({{0}}), InsufficientDataError);
    CHECK_THROWS_AS(activity_level({{0, 1}, {1}}), InputError);
  }

  TEST_CASE("distance matrix is symmetric with a zero diagonal") {
    std::vector<GoalCountVector> v = {GoalCountVector(kGoalCount, 1), GoalCountVector(kGoalCount, 2),
                                      GoalCountVector(kGoalCount, 1)};
    auto d = distance_matrix(v);
    CHECK(d[0][0] == 0);
    CHECK(d[0][2] == 0);
    CHECK(d[0][1] == doctest::Approx(std::sqrt(10.0)));
    CHECK(d[1][0] == d[0][1]);
  }

  TEST_CASE("metrics from a run") {
    Kernel k(test::three_agents(3));
    k.run();
    const auto records = k.log().records();
    auto m = compute_metrics(records);
    CHECK(m.days == 3);
    REQUIRE(m.agents.size() == 3);
    for (const auto& [id, a] : m.agents) {
      CHECK(a.bfi.size() == 3);
      REQUIRE(a.delta_overall);
      REQUIRE(a.activity_level);
      CHECK(a.goal_counts.size() == 3);
      CHECK(*a.activity_level == doctest::Approx(oracle_activity(a.distances)));
      for (int d = 1; d <= 3; ++d) {
        double live = 0;
        for (double x : a.goal_counts[static_cast<std::size_t>(d - 1)]) live += x;
        CHECK(live > 0);
      }
    }
    auto j = to_json(m);
    CHECK(j.at("goal_axis").size() == kGoalCount);
    CHECK(j.at("agents").at("sophia").at("distance_matrix").size() == 3);
    CHECK(metrics_table(m).find("sophia") != std::string::npos);
    CHECK_THROWS_AS(goal_counts(records, "nobody", 1), LookupError);

    auto report = compare_metrics(m, m);
    CHECK(report.at("agents").at("benjamin").at("activity_level").at("diff") == 0.0);
    CHECK(compare_table(report).find("benjamin") != std::string::npos);
    LogMetrics other = m;
    other.agents.erase("sophia");
    CHECK_THROWS_AS(compare_metrics(m, other), AgentMismatchError);
  }

  TEST_CASE("goal counts use the plan after appointments") {
    Kernel k(test::three_agents(1));
    k.run();
    const auto records = k.log().records();
    for (const auto& [id, a] : k.agents()) {
      std::optional<DailyPlan> last;
      for (const auto& r : records) {
        if (r.type == "plan" && r.agent == id) last = r.payload.at("plan").get<DailyPlan>();
        if (r.type == "invite" && r.payload.at("plans").contains(id)) last = r.payload.at("plans").at(id).get<DailyPlan>();
        if (r.type == "action") break;
      }
      REQUIRE(last);
      CHECK(goal_counts(records, id, 1) == goal_counts(*last));
    }
  }

  TEST_CASE("structures by day") {
    Kernel k(test::three_agents(2));
    k.run();
    auto s = structures_by_day(k.log().records());
    REQUIRE(s.size() == 3);
    for (const auto& [id, days] : s) {
      CHECK(days.count(0));
      CHECK(days.count(2));
      CHECK(days.at(2) == k.agents().at(id).structure);
    }
  }
}
