#pragma once

#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "psim/canonical.hpp"

namespace psim::eval {

struct Rating {
  double mu = 25.0;
  double sigma = 25.0 / 3.0;
};

struct TrueSkillEnv {
  double mu = 25.0;
  double sigma = 25.0 / 3.0;
  double beta = 25.0 / 6.0;
  double tau = 25.0 / 300.0;
  double min_delta = 0.0001;
};

// One free-for-all match without draws. `ratings` are in finishing order,
// winner first. Returns the updated ratings in the same order.
std::vector<Rating> rate_match(const std::vector<Rating>& ratings, const TrueSkillEnv& env = {});

struct Ranking {
  std::string evaluator;
  std::vector<std::string> order;  // best first
};

// Processes every ranking as one match, in order. Throws InputError when
// there are no rankings or the group sets differ.
std::map<std::string, Rating> trueskill_rank(const std::vector<Ranking>& rankings, const TrueSkillEnv& env = {});

// "evaluator_id,group,group,..." with an optional header row whose first
// cell is "evaluator_id". Throws ParseError naming the row.
std::vector<Ranking> read_rankings_csv(std::string_view csv);

json to_json(const std::map<std::string, Rating>& ratings);

}  // namespace psim::eval
