#include "psim/evaluation/trueskill.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <set>

#include "psim/evaluation/special.hpp"
#include "psim/types.hpp"

namespace psim::eval {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Natural-parameter Gaussian: pi = 1/sigma^2, tau = mu * pi.
struct Gaussian {
  double pi = 0.0;
  double tau = 0.0;

  static Gaussian from_moments(double mu, double sigma) {
    const double pi = 1.0 / (sigma * sigma);
    return {pi, pi * mu};
  }
  double mu() const { return pi == 0.0 ? 0.0 : tau / pi; }
  double sigma() const { return pi == 0.0 ? kInf : std::sqrt(1.0 / pi); }

  Gaussian operator*(const Gaussian& o) const { return {pi + o.pi, tau + o.tau}; }
  Gaussian operator/(const Gaussian& o) const { return {pi - o.pi, tau - o.tau}; }

  double delta(const Gaussian& o) const {
    const double pi_delta = std::fabs(pi - o.pi);
    if (pi_delta == kInf) return 0.0;
    return std::max(std::fabs(tau - o.tau), std::sqrt(pi_delta));
  }
};

struct Variable {
  Gaussian value;
  std::vector<Gaussian> messages;  // indexed by factor slot

  std::size_t attach() {
    messages.emplace_back();
    return messages.size() - 1;
  }
  double set(const Gaussian& v) {
    const double d = value.delta(v);
    value = v;
    return d;
  }
  double update_message(std::size_t slot, const Gaussian& message) {
    const Gaussian old = messages[slot];
    messages[slot] = message;
    return set(value / old * message);
  }
  double update_value(std::size_t slot, const Gaussian& v) {
    const Gaussian old = messages[slot];
    messages[slot] = v * old / value;
    return set(v);
  }
  Gaussian cavity(std::size_t slot) const { return value / messages[slot]; }
};

struct Link {
  Variable* var;
  std::size_t slot;
};

Link link(Variable& v) { return {&v, v.attach()}; }

double v_win(double diff, double margin) {
  const double x = diff - margin;
  const double denom = normal_cdf(x);
  return denom != 0.0 ? normal_pdf(x) / denom : -x;
}

double w_win(double diff, double margin) {
  const double x = diff - margin;
  const double v = v_win(diff, margin);
  const double w = v * (v + x);
  if (0.0 < w && w < 1.0) return w;
  throw DegenerateDataError("trueskill: truncation update out of range");
}

// Sum factor: target = sum(coeffs[i] * terms[i]).
struct SumFactor {
  Link sum;
  std::vector<Link> terms;
  std::vector<double> coeffs;

  double update(Link target, const std::vector<Link>& vars, const std::vector<double>& cs) const {
    double pi_inv = 0.0;
    double mu = 0.0;
    for (std::size_t i = 0; i < vars.size(); ++i) {
      const Gaussian div = vars[i].var->cavity(vars[i].slot);
      mu += cs[i] * div.mu();
      if (pi_inv == kInf) continue;
      pi_inv = div.pi == 0.0 ? kInf : pi_inv + cs[i] * cs[i] / div.pi;
    }
    const double pi = 1.0 / pi_inv;
    return target.var->update_message(target.slot, {pi, pi * mu});
  }

  double down() const { return update(sum, terms, coeffs); }

  double up(std::size_t index) const {
    const double coeff = coeffs[index];
    std::vector<double> cs;
    for (std::size_t i = 0; i < coeffs.size(); ++i) {
      if (coeff == 0.0) {
        cs.push_back(0.0);
      } else if (i == index) {
        cs.push_back(1.0 / coeff);
      } else {
        cs.push_back(-coeffs[i] / coeff);
      }
    }
    std::vector<Link> vars = terms;
    vars[index] = sum;
    return update(terms[index], vars, cs);
  }
};

}  // namespace

std::vector<Rating> rate_match(const std::vector<Rating>& ratings, const TrueSkillEnv& env) {
  const std::size_t n = ratings.size();
  if (n < 2) throw InputError("trueskill: a match needs at least 2 groups");

  std::vector<Variable> rating_vars(n), perf_vars(n), team_vars(n), diff_vars(n - 1);
  std::vector<Link> prior(n), like_mean(n), like_value(n);
  std::vector<SumFactor> team_layer, diff_layer;
  std::vector<Link> trunc;

  for (std::size_t i = 0; i < n; ++i) prior[i] = link(rating_vars[i]);
  for (std::size_t i = 0; i < n; ++i) {
    like_mean[i] = link(rating_vars[i]);
    like_value[i] = link(perf_vars[i]);
  }
  for (std::size_t i = 0; i < n; ++i) {
    Link s = link(team_vars[i]);
    team_layer.push_back({s, {link(perf_vars[i])}, {1.0}});
  }
  for (std::size_t i = 0; i + 1 < n; ++i) {
    Link s = link(diff_vars[i]);
    Link left = link(team_vars[i]);
    Link right = link(team_vars[i + 1]);
    diff_layer.push_back({s, {left, right}, {1.0, -1.0}});
  }
  for (std::size_t i = 0; i + 1 < n; ++i) trunc.push_back(link(diff_vars[i]));

  const double beta2 = env.beta * env.beta;
  auto like_down = [&](std::size_t i) {
    const Gaussian msg = like_mean[i].var->cavity(like_mean[i].slot);
    const double a = 1.0 / (1.0 + beta2 * msg.pi);
    return like_value[i].var->update_message(like_value[i].slot, {a * msg.pi, a * msg.tau});
  };
  auto like_up = [&](std::size_t i) {
    const Gaussian msg = like_value[i].var->cavity(like_value[i].slot);
    const double a = 1.0 / (1.0 + beta2 * msg.pi);
    return like_mean[i].var->update_message(like_mean[i].slot, {a * msg.pi, a * msg.tau});
  };
  auto trunc_up = [&](std::size_t i) {
    const Gaussian div = trunc[i].var->cavity(trunc[i].slot);
    const double sqrt_pi = std::sqrt(div.pi);
    const double t = div.tau / sqrt_pi;
    const double v = v_win(t, 0.0);
    const double w = w_win(t, 0.0);
    const double denom = 1.0 - w;
    return trunc[i].var->update_value(trunc[i].slot, {div.pi / denom, (div.tau + sqrt_pi * v) / denom});
  };

  for (std::size_t i = 0; i < n; ++i) {
    const double sigma = std::sqrt(ratings[i].sigma * ratings[i].sigma + env.tau * env.tau);
    prior[i].var->update_value(prior[i].slot, Gaussian::from_moments(ratings[i].mu, sigma));
  }
  for (std::size_t i = 0; i < n; ++i) like_down(i);
  for (auto& f : team_layer) f.down();

  const std::size_t m = diff_layer.size();
  for (int iteration = 0; iteration < 10; ++iteration) {
    double delta = 0.0;
    if (m == 1) {
      diff_layer[0].down();
      delta = trunc_up(0);
    } else {
      for (std::size_t x = 0; x + 1 < m; ++x) {
        diff_layer[x].down();
        delta = std::max(delta, trunc_up(x));
        diff_layer[x].up(1);
      }
      for (std::size_t x = m - 1; x > 0; --x) {
        diff_layer[x].down();
        delta = std::max(delta, trunc_up(x));
        diff_layer[x].up(0);
      }
    }
    if (delta <= env.min_delta) break;
  }
  diff_layer[0].up(0);
  diff_layer[m - 1].up(1);
  for (auto& f : team_layer) f.up(0);
  for (std::size_t i = 0; i < n; ++i) like_up(i);

  std::vector<Rating> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back({rating_vars[i].value.mu(), rating_vars[i].value.sigma()});
  return out;
}

std::map<std::string, Rating> trueskill_rank(const std::vector<Ranking>& rankings, const TrueSkillEnv& env) {
  if (rankings.empty()) throw InputError("trueskill: no rankings");
  const std::set<std::string> groups(rankings.front().order.begin(), rankings.front().order.end());
  if (groups.size() != rankings.front().order.size()) throw InputError("trueskill: repeated group in a ranking");
  std::map<std::string, Rating> out;
  for (const auto& g : groups) out[g] = Rating{env.mu, env.sigma};
  for (const auto& r : rankings) {
    const std::set<std::string> these(r.order.begin(), r.order.end());
    if (these != groups || these.size() != r.order.size()) {
      throw InputError("trueskill: ranking by '" + r.evaluator + "' covers a different group set");
    }
    std::vector<Rating> match;
    for (const auto& g : r.order) match.push_back(out[g]);
    auto updated = rate_match(match, env);
    for (std::size_t i = 0; i < r.order.size(); ++i) out[r.order[i]] = updated[i];
  }
  return out;
}

std::vector<Ranking> read_rankings_csv(std::string_view csv) {
  std::vector<Ranking> out;
  int row = 0;
  std::size_t pos = 0;
  while (pos < csv.size()) {
    std::size_t end = csv.find('\n', pos);
    if (end == std::string_view::npos) end = csv.size();
    std::string line(csv.substr(pos, end - pos));
    pos = end + 1;
    ++row;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (normalize_ws(line).empty()) continue;
    std::vector<std::string> cells;
    std::size_t start = 0;
    for (;;) {
      std::size_t comma = line.find(',', start);
      cells.push_back(normalize_ws(line.substr(start, comma == std::string::npos ? std::string::npos : comma - start)));
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    if (row == 1 && cells.front() == "evaluator_id") continue;
    if (cells.size() < 3) throw ParseError(row, "need an evaluator id and at least two groups");
    for (const auto& c : cells) {
      if (c.empty()) throw ParseError(row, "empty cell");
    }
    out.push_back({cells.front(), std::vector<std::string>(cells.begin() + 1, cells.end())});
  }
  return out;
}

json to_json(const std::map<std::string, Rating>& ratings) {
  json j = json::object();
  for (const auto& [g, r] : ratings) j[g] = {{"mu", r.mu}, {"sigma", r.sigma}};
  return j;
}

}  // namespace psim::eval
