#include "psim/lexicon.hpp"

#include <algorithm>
#include <cctype>
#include <set>

namespace psim::lexicon {
namespace {

struct CueSet {
  std::initializer_list<std::string_view> positive;
  std::initializer_list<std::string_view> negative;
};

const CueSet& cues(Trait t) {
  static const CueSet kExtraversion{
      {"outgoing", "enthusias", "sociable", "talkative", "energetic", "lively", "assertive",
       "gregarious", "extrovert"},
      {"shy", "reserved", "quiet", "introvert", "withdrawn", "timid", "solitary"}};
  static const CueSet kAgreeableness{
      {"kind", "warm", "caring", "cooperative", "considerate", "trusting", "empath", "helpful",
       "gentle", "generous"},
      {"critical", "blunt", "cold", "distant", "stubborn", "aloof", "argumentative"}};
  static const CueSet kConscientiousness{
      {"diligent", "organized", "disciplin", "thorough", "reliable", "focused", "methodical",
       "precise", "persistent"},
      {"careless", "disorganized", "impulsive", "lazy", "scattered", "distract"}};
  static const CueSet kNeuroticism{
      {"anxious", "worr", "tense", "insecure", "nervous", "doubt", "moody", "fear", "stress"},
      {"calm", "relaxed", "stable", "secure", "composed", "confident", "serene"}};
  static const CueSet kOpenness{
      {"curious", "creative", "imaginat", "open", "artistic", "inventive", "reflective",
       "interdisciplin", "philosoph", "humanities", "literature"},
      {"conventional", "narrow", "rigid", "routine"}};
  switch (t) {
    case Trait::Extraversion:
      return kExtraversion;
    case Trait::Agreeableness:
      return kAgreeableness;
    case Trait::Conscientiousness:
      return kConscientiousness;
    case Trait::Neuroticism:
      return kNeuroticism;
    case Trait::Openness:
      return kOpenness;
  }
  return kOpenness;
}

const std::set<std::string>& stopwords() {
  static const std::set<std::string> s = {
      "about", "after", "again", "also", "and", "because", "been", "before", "being", "between",
      "both", "but", "could", "does", "doing", "during", "each", "from", "have", "having",
      "here", "into", "just", "like", "more", "most", "much", "must", "only", "other", "over",
      "same", "should", "some", "such", "than", "that", "their", "them", "then", "there",
      "these", "they", "this", "those", "through", "very", "want", "wants", "were", "what",
      "when", "where", "which", "while", "with", "would", "your", "will", "within", "today",
      "feel", "feels", "still", "even", "lately", "recently", "toward", "towards"};
  return s;
}

}  // namespace

std::string lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

std::vector<std::string> words(std::string_view text) {
  std::vector<std::string> out;
  std::string cur;
  for (unsigned char c : text) {
    if (std::isalpha(c)) {
      cur.push_back(static_cast<char>(std::tolower(c)));
    } else if (!cur.empty()) {
      out.push_back(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

std::vector<std::string> content_words(std::string_view text) {
  std::vector<std::string> out;
  for (auto& w : words(text)) {
    if (w.size() < 4 || stopwords().count(w)) continue;
    if (std::find(out.begin(), out.end(), w) == out.end()) out.push_back(std::move(w));
  }
  return out;
}

int count_cues(std::string_view text, std::initializer_list<std::string_view> stems) {
  int n = 0;
  for (const auto& w : words(text)) {
    for (auto stem : stems) {
      if (w.rfind(stem, 0) == 0) {
        ++n;
        break;
      }
    }
  }
  return n;
}

bool has_cue(std::string_view text, std::initializer_list<std::string_view> stems) {
  return count_cues(text, stems) > 0;
}

int cue_balance(std::string_view text, Trait t) {
  const auto& c = cues(t);
  return count_cues(text, c.positive) - count_cues(text, c.negative);
}

std::string first_sentence(std::string_view text) {
  auto pos = text.find(". ");
  if (pos == std::string_view::npos) return std::string(text);
  return std::string(text.substr(0, pos + 1));
}

}  // namespace psim::lexicon
