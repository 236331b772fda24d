#pragma once

#include <optional>
#include <string>
#include <vector>

#include "psim/canonical.hpp"

namespace psim::eval {

struct StatTestResult {
  double statistic = 0.0;
  std::optional<double> p;
  std::optional<double> p_adjusted;
  std::string method;
};

json to_json(const StatTestResult& r);

// Average ranks (1-based) with ties sharing their mean rank.
std::vector<double> average_ranks(const std::vector<double>& values);

// Two-sided signed-rank test of the median. T = min(W+, W-), zero
// differences dropped. Exact for n <= 25, normal approximation with tie
// correction above. Throws DegenerateDataError if every difference is zero.
StatTestResult wilcoxon_signed_rank(const std::vector<double>& samples, double median = 0.0);

// Pooled over n_a + n_b - 2 degrees of freedom.
double cohens_d(const std::vector<double>& a, const std::vector<double>& b);

StatTestResult kruskal_wallis(const std::vector<std::vector<double>>& groups);

struct PairwiseResult {
  std::size_t a = 0;
  std::size_t b = 0;
  StatTestResult test;
};

// Dunn z tests for every pair (a < b), raw p two-sided, Holm adjusted.
std::vector<PairwiseResult> dunn_posthoc_holm(const std::vector<std::vector<double>>& groups);

// Holm step-down adjustment, returned in input order.
std::vector<double> holm_adjust(const std::vector<double>& p);

}  // namespace psim::eval
