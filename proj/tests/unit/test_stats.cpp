#include <algorithm>
#include <cmath>
#include <random>

#include "doctest.h"
#include "psim/evaluation/stats.hpp"
#include "psim/types.hpp"

using namespace psim;
using namespace psim::eval;

namespace {

// Quadratic average ranks.
std::vector<double> naive_ranks(const std::vector<double>& v) {
  std::vector<double> out;
  for (double x : v) {
    double below = 0, equal = 0;
    for (double y : v) {
      if (y < x) ++below;
      if (y == x) ++equal;
    }
    out.push_back(below + (equal + 1) / 2);
  }
  return out;
}

// Two-sided exact p by visiting every sign assignment.
double enumerated_p(const std::vector<double>& samples) {
  std::vector<double> d;
  for (double x : samples) {
    if (x != 0) d.push_back(x);
  }
  std::vector<double> a;
  for (double x : d) a.push_back(std::fabs(x));
  auto r = naive_ranks(a);
  double wp = 0, total = 0;
  for (std::size_t i = 0; i < d.size(); ++i) {
    total += r[i];
    if (d[i] > 0) wp += r[i];
  }
  const double t = std::min(wp, total - wp);
  const std::size_t n = d.size();
  double hits = 0;
  for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
    double s = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (mask & (1u << i)) s += r[i];
    }
    if (std::min(s, total - s) <= t + 1e-9) ++hits;
  }
  return std::min(1.0, hits / static_cast<double>(1u << n));
}

}  // namespace

TEST_SUITE("stats") {
  TEST_CASE("ranks share ties") {
    CHECK(average_ranks({10, 20, 20, 5}) == std::vector<double>{2, 3.5, 3.5, 1});
    CHECK(average_ranks({}).empty());
  }

  TEST_CASE("wilcoxon exact p matches full enumeration") {
    std::mt19937_64 rng(11);
    int cases = 0;
    for (std::size_t n = 1; n <= 12; ++n) {
      for (int rep = 0; rep < 200; ++rep) {
        std::vector<double> s;
        const bool ties = rep % 2 == 0;
        std::uniform_int_distribution<int> small(-4, 4);
        std::normal_distribution<double> wide(0.3, 2.0);
        for (std::size_t i = 0; i < n; ++i) s.push_back(ties ? small(rng) : wide(rng));
        if (std::all_of(s.begin(), s.end(), [](double x) { return x == 0; })) s[0] = 1;
        auto r = wilcoxon_signed_rank(s);
        REQUIRE(r.p);
        CHECK(r.method == "wilcoxon-exact");
        CHECK(*r.p == doctest::Approx(enumerated_p(s)).epsilon(1e-12));
        ++cases;
      }
    }
    CHECK(cases == 2400);
  }

  TEST_CASE("wilcoxon known values") {
    auto r = wilcoxon_signed_rank({1, 2, -3, 4, 5});
    CHECK(r.statistic == 3);
    CHECK(*r.p == doctest::Approx(0.3125));
    auto shifted = wilcoxon_signed_rank({11, 12, 7, 14, 15}, 10);
    CHECK(shifted.statistic == 3);
    CHECK(*shifted.p == *r.p);
    CHECK(*wilcoxon_signed_rank({1, 2, 3, 4, 5, 6}).p == doctest::Approx(2.0 / 64));
    CHECK_THROWS_AS(wilcoxon_signed_rank({0, 0, 0}), DegenerateDataError);
    CHECK_THROWS_AS(wilcoxon_signed_rank({3, 3}, 3), DegenerateDataError);
  }

  TEST_CASE("wilcoxon normal approximation for large samples") {
    std::vector<double> s;
    for (int i = 1; i <= 40; ++i) s.push_back(i % 3 == 0 ? -i : i);
    auto r = wilcoxon_signed_rank(s);
    CHECK(r.method == "wilcoxon-normal");
    const double n = 40, mu = n * (n + 1) / 4, sd = std::sqrt(n * (n + 1) * (2 * n + 1) / 24);
    const double z = (r.statistic - mu) / sd;
    CHECK(*r.p == doctest::Approx(std::erfc(std::fabs(z) / std::sqrt(2.0))).epsilon(1e-12));
  }

  TEST_CASE("kruskal-wallis two separated groups") {
    auto r = kruskal_wallis({{1, 2, 3}, {4, 5, 6}});
    CHECK(std::fabs(r.statistic - 3.857) < 1e-3);
    CHECK(std::fabs(*r.p - 0.0495) < 1e-3);
    CHECK(r.statistic == doctest::Approx(27.0 / 7.0));
  }

  TEST_CASE("kruskal-wallis tie correction") {
    // H = 12/(N(N+1)) * sum R^2/n - 3(N+1), divided by 1 - sum(t^3-t)/(N^3-N)
    auto r = kruskal_wallis({{1, 2, 2}, {2, 3, 4}, {4, 5}});
    const double n = 8;
    // ranks: 1 ->1, 2 ->3 (x3), 3 ->5, 4 ->6.5 (x2), 5 ->8
    const double r1 = 1 + 3 + 3, r2 = 3 + 5 + 6.5, r3 = 6.5 + 8;
    double h = 12 / (n * (n + 1)) * (r1 * r1 / 3 + r2 * r2 / 3 + r3 * r3 / 2) - 3 * (n + 1);
    h /= 1 - (24.0 + 6.0) / (n * n * n - n);
    CHECK(r.statistic == doctest::Approx(h).epsilon(1e-12));
    CHECK(*r.p == doctest::Approx(std::exp(-h / 2)).epsilon(1e-12));
    CHECK_THROWS_AS(kruskal_wallis({{1, 2}}), InsufficientDataError);
    CHECK_THROWS_AS(kruskal_wallis({{1, 2}, {}}), InsufficientDataError);
    CHECK_THROWS_AS(kruskal_wallis({{2, 2}, {2}}), DegenerateDataError);
  }

  TEST_CASE("holm adjustment") {
    auto adj = holm_adjust({0.01, 0.04, 0.03, 0.2});
    CHECK(adj[0] == doctest::Approx(0.04));
    CHECK(adj[2] == doctest::Approx(0.09));
    CHECK(adj[1] == doctest::Approx(0.09));
    CHECK(adj[3] == doctest::Approx(0.2));
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(0, 1);
    for (int rep = 0; rep < 500; ++rep) {
      std::vector<double> p(1 + rep % 9);
      for (auto& x : p) x = u(rng) * u(rng);
      auto a = holm_adjust(p);
      for (std::size_t i = 0; i < p.size(); ++i) {
        CHECK(a[i] >= p[i]);
        CHECK(a[i] <= 1.0);
        for (std::size_t j = 0; j < p.size(); ++j) {
          if (p[i] < p[j]) CHECK(a[i] <= a[j]);
        }
      }
    }
  }

  TEST_CASE("cohen's d") {
    CHECK(cohens_d({1, 2, 3}, {2, 3, 4}) == doctest::Approx(-1.0).epsilon(1e-15));
    CHECK(cohens_d({2, 4, 6, 8}, {1, 2, 3}) == doctest::Approx(3.0 / std::sqrt((3 * 20.0 / 3 + 2 * 1.0) / 5)));
    CHECK_THROWS_AS(cohens_d({1}, {1, 2}), InsufficientDataError);
    CHECK_THROWS_AS(cohens_d({1, 1}, {1, 1}), DegenerateDataError);
  }

  TEST_CASE("dunn pairs with holm") {
    std::vector<std::vector<double>> g = {{1, 2, 3, 4}, {5, 6, 7, 8}, {9, 10, 11, 12}};
    auto pairs = dunn_posthoc_holm(g);
    REQUIRE(pairs.size() == 3);
    CHECK(pairs[0].a == 0);
    CHECK(pairs[0].b == 1);
    CHECK(pairs[2].a == 1);
    const double base = 12.0 * 13 / 12, se = std::sqrt(base * 0.5);
    CHECK(pairs[0].test.statistic == doctest::Approx(-4.0 / se));
    CHECK(pairs[1].test.statistic == doctest::Approx(-8.0 / se));
    std::vector<double> raw;
    for (const auto& p : pairs) {
      CHECK(*p.test.p_adjusted >= *p.test.p);
      raw.push_back(*p.test.p);
    }
    auto adj = holm_adjust(raw);
    for (std::size_t i = 0; i < 3; ++i) CHECK(*pairs[i].test.p_adjusted == adj[i]);
  }
}
