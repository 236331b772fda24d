#include "psim/evaluation/bfi.hpp"

#include <map>

namespace psim::eval {

using D = BigFiveDim;

const std::array<BfiItem, kBfiItemCount>& bfi_items() {
  static const std::array<BfiItem, kBfiItemCount> items = {{
      {1, "Is talkative", D::Extraversion, false},
      {2, "Tends to find fault with others", D::Agreeableness, true},
      {3, "Does a thorough job", D::Conscientiousness, false},
      {4, "Is depressed, blue", D::Neuroticism, false},
      {5, "Is original, comes up with new ideas", D::Openness, false},
      {6, "Is reserved", D::Extraversion, true},
      {7, "Is helpful and unselfish with others", D::Agreeableness, false},
      {8, "Can be somewhat careless", D::Conscientiousness, true},
      {9, "Is relaxed, handles stress well", D::Neuroticism, true},
      {10, "Is curious about many different things", D::Openness, false},
      {11, "Is full of energy", D::Extraversion, false},
      {12, "Starts quarrels with others", D::Agreeableness, true},
      {13, "Is a reliable worker", D::Conscientiousness, false},
      {14, "Can be tense", D::Neuroticism, false},
      {15, "Is ingenious, a deep thinker", D::Openness, false},
      {16, "Generates a lot of enthusiasm", D::Extraversion, false},
      {17, "Has a forgiving nature", D::Agreeableness, false},
      {18, "Tends to be disorganized", D::Conscientiousness, true},
      {19, "Worries a lot", D::Neuroticism, false},
      {20, "Has an active imagination", D::Openness, false},
      {21, "Tends to be quiet", D::Extraversion, true},
      {22, "Is generally trusting", D::Agreeableness, false},
      {23, "Tends to be lazy", D::Conscientiousness, true},
      {24, "Is emotionally stable, not easily upset", D::Neuroticism, true},
      {25, "Is inventive", D::Openness, false},
      {26, "Has an assertive personality", D::Extraversion, false},
      {27, "Can be cold and aloof", D::Agreeableness, true},
      {28, "Perseveres until the task is finished", D::Conscientiousness, false},
      {29, "Can be moody", D::Neuroticism, false},
      {30, "Values artistic, aesthetic experiences", D::Openness, false},
      {31, "Is sometimes shy, inhibited", D::Extraversion, true},
      {32, "Is considerate and kind to almost everyone", D::Agreeableness, false},
      {33, "Does things efficiently", D::Conscientiousness, false},
      {34, "Remains calm in tense situations", D::Neuroticism, true},
      {35, "Prefers work that is routine", D::Openness, true},
      {36, "Is outgoing, sociable", D::Extraversion, false},
      {37, "Is sometimes rude to others", D::Agreeableness, true},
      {38, "Makes plans and follows through with them", D::Conscientiousness, false},
      {39, "Gets nervous easily", D::Neuroticism, false},
      {40, "Likes to reflect, play with ideas", D::Openness, false},
      {41, "Has few artistic interests", D::Openness, true},
      {42, "Likes to cooperate with others", D::Agreeableness, false},
      {43, "Is easily distracted", D::Conscientiousness, true},
      {44, "Is sophisticated in art, music, or literature", D::Openness, false},
  }};
  return items;
}

int dimension_item_count(BigFiveDim d) {
  int n = 0;
  for (const auto& item : bfi_items()) n += item.dim == d;
  return n;
}

int dimension_score(const BigFiveVector& v, BigFiveDim d) {
  switch (d) {
    case D::Extraversion:
      return v.extraversion;
    case D::Agreeableness:
      return v.agreeableness;
    case D::Conscientiousness:
      return v.conscientiousness;
    case D::Neuroticism:
      return v.neuroticism;
    case D::Openness:
      return v.openness;
  }
  return 0;
}

std::optional<std::string> sheet_problem(const BfiAnswerSheet& sheet) {
  if (sheet.answers.size() != kBfiItemCount) {
    return "expected 44 answers, got " + std::to_string(sheet.answers.size());
  }
  for (std::size_t i = 0; i < sheet.answers.size(); ++i) {
    int a = sheet.answers[i];
    if (a < 1 || a > 5) {
      return "item " + std::to_string(i + 1) + " answer " + std::to_string(a) + " outside 1..5";
    }
  }
  return std::nullopt;
}

BfiScores score_bfi(const BfiAnswerSheet& sheet) {
  if (auto problem = sheet_problem(sheet)) throw InputError("score_bfi: " + *problem);
  BfiScores out;
  out.day = sheet.day;
  for (const auto& item : bfi_items()) {
    int x = sheet.answers[static_cast<std::size_t>(item.number - 1)];
    int v = item.reverse ? 6 - x : x;
    switch (item.dim) {
      case D::Extraversion:
        out.scores.extraversion += v;
        break;
      case D::Agreeableness:
        out.scores.agreeableness += v;
        break;
      case D::Conscientiousness:
        out.scores.conscientiousness += v;
        break;
      case D::Neuroticism:
        out.scores.neuroticism += v;
        break;
      case D::Openness:
        out.scores.openness += v;
        break;
    }
  }
  return out;
}

std::vector<BfiAnswerSheet> administer_bfi(const AgentId& agent,
                                           const std::vector<std::pair<int, json>>& day_views,
                                           const lm::LmClient& client) {
  if (day_views.empty()) throw InputError("administer_bfi: no days");
  json days = json::array();
  for (const auto& [day, view] : day_views) days.push_back({{"day", day}, {"character", view}});
  json items = json::array();
  for (const auto& item : bfi_items()) items.push_back({{"number", item.number}, {"text", item.text}});

  lm::PromptRequest req;
  req.kind = lm::PromptKind::BfiFill;
  req.agent_id = agent;
  req.day = day_views.back().first;
  req.context = {{"days", days},
                 {"items", items},
                 {"instructions",
                  "For each day, rate every statement as the character on that day: "
                  "1 disagree strongly, 2 disagree a little, 3 neutral, 4 agree a little, "
                  "5 agree strongly. Focus on the differences from day to day."}};

  std::string problem;
  for (int round = 0; round < 2; ++round) {
    if (round == 1) req.context["repair"] = problem;
    auto resp = client.complete(req);
    std::map<int, std::vector<int>> by_day;
    for (const auto& s : resp.payload.at("sheets")) {
      by_day[s.at("day").get<int>()] = s.at("answers").get<std::vector<int>>();
    }
    std::vector<BfiAnswerSheet> sheets;
    problem.clear();
    for (const auto& [day, _] : day_views) {
      auto it = by_day.find(day);
      if (it == by_day.end()) {
        problem = "missing sheet for day " + std::to_string(day);
        break;
      }
      BfiAnswerSheet sheet{agent, day, it->second};
      if (auto p = sheet_problem(sheet)) {
        problem = "day " + std::to_string(day) + ": " + *p;
        break;
      }
      sheets.push_back(std::move(sheet));
    }
    if (problem.empty()) return sheets;
  }
  throw SchemaError("BFI assessment failed: " + problem);
}

json to_json_scores(const BigFiveVector& v) {
  json j;
  to_json(j, v);
  return j;
}

}  // namespace psim::eval
