#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "psim/character.hpp"
#include "psim/lm/client.hpp"

namespace psim::eval {

enum class BigFiveDim { Extraversion, Agreeableness, Conscientiousness, Neuroticism, Openness };

inline constexpr std::array<std::string_view, 5> kBigFiveNames = {
    "extraversion", "agreeableness", "conscientiousness", "neuroticism", "openness"};

inline constexpr std::size_t kBfiItemCount = 44;

struct BfiItem {
  int number;  // 1-based
  std::string_view text;
  BigFiveDim dim;
  bool reverse;
};

// John & Srivastava BFI-44, "I see myself as someone who...".
const std::array<BfiItem, kBfiItemCount>& bfi_items();

int dimension_item_count(BigFiveDim d);
int dimension_score(const BigFiveVector& v, BigFiveDim d);

struct BfiAnswerSheet {
  AgentId agent;
  int day = 0;
  std::vector<int> answers;  // 44 Likert answers in item order

  bool operator==(const BfiAnswerSheet&) const = default;
};

struct BfiScores {
  int day = 0;
  BigFiveVector scores;
};

// Describes why a sheet is invalid, or nullopt.
std::optional<std::string> sheet_problem(const BfiAnswerSheet& sheet);

// Reverse-keyed items count 6 - x; each dimension is the sum of its items.
// Throws InputError on an invalid sheet.
BfiScores score_bfi(const BfiAnswerSheet& sheet);

// One parallel-form request covering every day; malformed answers get one
// repair round, then SchemaError.
std::vector<BfiAnswerSheet> administer_bfi(const AgentId& agent,
                                           const std::vector<std::pair<int, json>>& day_views,
                                           const lm::LmClient& client);

json to_json_scores(const BigFiveVector& v);

}  // namespace psim::eval
