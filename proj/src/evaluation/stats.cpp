#include "psim/evaluation/stats.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "psim/evaluation/special.hpp"
#include "psim/types.hpp"

namespace psim::eval {
namespace {

constexpr std::size_t kExactLimit = 25;

double mean(const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0) / v.size(); }

double sample_variance(const std::vector<double>& v) {
  const double m = mean(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return s / (v.size() - 1);
}

// Sum of t^3 - t over tie groups.
double tie_sum(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  double s = 0.0;
  for (std::size_t i = 0; i < values.size();) {
    std::size_t j = i;
    while (j < values.size() && values[j] == values[i]) ++j;
    const double t = static_cast<double>(j - i);
    s += t * t * t - t;
    i = j;
  }
  return s;
}

}  // namespace

json to_json(const StatTestResult& r) {
  return {{"statistic", r.statistic},
          {"p", r.p ? json(*r.p) : json(nullptr)},
          {"p_adjusted", r.p_adjusted ? json(*r.p_adjusted) : json(nullptr)},
          {"method", r.method}};
}

std::vector<double> average_ranks(const std::vector<double>& values) {
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> ranks(values.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j < order.size() && values[order[j]] == values[order[i]]) ++j;
    const double r = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
    for (std::size_t k = i; k < j; ++k) ranks[order[k]] = r;
    i = j;
  }
  return ranks;
}

StatTestResult wilcoxon_signed_rank(const std::vector<double>& samples, double median) {
  std::vector<double> diffs;
  for (double x : samples) {
    if (x - median != 0.0) diffs.push_back(x - median);
  }
  if (diffs.empty()) throw DegenerateDataError("wilcoxon: every difference is zero");
  std::vector<double> abs_diffs;
  for (double d : diffs) abs_diffs.push_back(std::fabs(d));
  const auto ranks = average_ranks(abs_diffs);
  double w_plus = 0.0, w_minus = 0.0;
  for (std::size_t i = 0; i < diffs.size(); ++i) (diffs[i] > 0 ? w_plus : w_minus) += ranks[i];
  const double t = std::min(w_plus, w_minus);
  const std::size_t n = diffs.size();

  StatTestResult r;
  r.statistic = t;
  if (n <= kExactLimit) {
    // Ranks are multiples of 1/2; count sign assignments by doubled W+.
    std::vector<int> doubled;
    int total = 0;
    for (double rk : ranks) {
      doubled.push_back(static_cast<int>(std::lround(2.0 * rk)));
      total += doubled.back();
    }
    std::vector<double> count(static_cast<std::size_t>(total) + 1, 0.0);
    count[0] = 1.0;
    for (int d : doubled) {
      for (int s = total; s >= d; --s) count[static_cast<std::size_t>(s)] += count[static_cast<std::size_t>(s - d)];
    }
    const long t2 = std::lround(2.0 * t);
    double hits = 0.0;
    for (int s = 0; s <= total; ++s) {
      if (std::min(s, total - s) <= t2) hits += count[static_cast<std::size_t>(s)];
    }
    r.p = std::min(1.0, hits / std::ldexp(1.0, static_cast<int>(n)));
    r.method = "wilcoxon-exact";
  } else {
    const double nn = static_cast<double>(n);
    const double mu = nn * (nn + 1) / 4.0;
    const double var = nn * (nn + 1) * (2 * nn + 1) / 24.0 - tie_sum(abs_diffs) / 48.0;
    const double z = (t - mu) / std::sqrt(var);
    r.p = std::min(1.0, 2.0 * normal_sf(std::fabs(z)));
    r.method = "wilcoxon-normal";
  }
  return r;
}

double cohens_d(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() < 2 || b.size() < 2) throw InsufficientDataError("cohens_d: each group needs at least 2 values");
  const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
  const double pooled = std::sqrt(((na - 1) * sample_variance(a) + (nb - 1) * sample_variance(b)) / (na + nb - 2));
  if (pooled == 0.0) throw DegenerateDataError("cohens_d: pooled standard deviation is zero");
  return (mean(a) - mean(b)) / pooled;
}

namespace {

struct RankedGroups {
  std::vector<double> rank_sums;
  std::vector<double> sizes;
  double n = 0.0;
  double ties = 0.0;
};

RankedGroups rank_groups(const std::vector<std::vector<double>>& groups) {
  if (groups.size() < 2) throw InsufficientDataError("need at least 2 groups");
  std::vector<double> pooled;
  for (const auto& g : groups) {
    if (g.empty()) throw InsufficientDataError("empty group");
    pooled.insert(pooled.end(), g.begin(), g.end());
  }
  if (std::all_of(pooled.begin(), pooled.end(), [&](double v) { return v == pooled.front(); })) {
    throw DegenerateDataError("all values are identical");
  }
  const auto ranks = average_ranks(pooled);
  RankedGroups out;
  out.n = static_cast<double>(pooled.size());
  out.ties = tie_sum(pooled);
  std::size_t k = 0;
  for (const auto& g : groups) {
    double s = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) s += ranks[k++];
    out.rank_sums.push_back(s);
    out.sizes.push_back(static_cast<double>(g.size()));
  }
  return out;
}

}  // namespace

StatTestResult kruskal_wallis(const std::vector<std::vector<double>>& groups) {
  const auto rg = rank_groups(groups);
  double h = 0.0;
  for (std::size_t i = 0; i < groups.size(); ++i) h += rg.rank_sums[i] * rg.rank_sums[i] / rg.sizes[i];
  h = 12.0 / (rg.n * (rg.n + 1)) * h - 3.0 * (rg.n + 1);
  h /= 1.0 - rg.ties / (rg.n * rg.n * rg.n - rg.n);
  StatTestResult r;
  r.statistic = h;
  r.p = chi2_sf(h, static_cast<double>(groups.size() - 1));
  r.method = "kruskal-wallis";
  return r;
}

std::vector<double> holm_adjust(const std::vector<double>& p) {
  const std::size_t m = p.size();
  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return p[a] < p[b]; });
  std::vector<double> out(m);
  double running = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    running = std::max(running, static_cast<double>(m - i) * p[order[i]]);
    out[order[i]] = std::min(1.0, running);
  }
  return out;
}

std::vector<PairwiseResult> dunn_posthoc_holm(const std::vector<std::vector<double>>& groups) {
  const auto rg = rank_groups(groups);
  const double base = rg.n * (rg.n + 1) / 12.0 - rg.ties / (12.0 * (rg.n - 1));
  std::vector<PairwiseResult> out;
  std::vector<double> raw;
  for (std::size_t a = 0; a < groups.size(); ++a) {
    for (std::size_t b = a + 1; b < groups.size(); ++b) {
      const double diff = rg.rank_sums[a] / rg.sizes[a] - rg.rank_sums[b] / rg.sizes[b];
      const double z = diff / std::sqrt(base * (1.0 / rg.sizes[a] + 1.0 / rg.sizes[b]));
      PairwiseResult pr{a, b, {}};
      pr.test.statistic = z;
      pr.test.p = std::min(1.0, 2.0 * normal_sf(std::fabs(z)));
      pr.test.method = "dunn-holm";
      raw.push_back(*pr.test.p);
      out.push_back(pr);
    }
  }
  const auto adjusted = holm_adjust(raw);
  for (std::size_t i = 0; i < out.size(); ++i) out[i].test.p_adjusted = adjusted[i];
  return out;
}

}  // namespace psim::eval
