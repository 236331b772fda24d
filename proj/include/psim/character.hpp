#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "psim/canonical.hpp"
#include "psim/lm/client.hpp"

namespace psim {

// Big Five sums of 1..5 Likert answers. Item counts per dimension:
// openness 10, conscientiousness 9, extraversion 8, agreeableness 9,
// neuroticism 8.
struct BigFiveVector {
  int openness = 0;
  int conscientiousness = 0;
  int extraversion = 0;
  int agreeableness = 0;
  int neuroticism = 0;

  bool operator==(const BigFiveVector&) const = default;
  bool in_range() const;
};

struct PreferenceSet {
  std::string ultimate_goal;
  std::string long_term_goal;
  std::string short_term_goal;
  std::string daily_routine;
  std::vector<std::string> hobbies;
  std::vector<std::string> venue_preference;

  bool operator==(const PreferenceSet&) const = default;
};

struct Traits {
  std::string prose;
  // Only ever set from a BFI-44 assessment.
  std::optional<BigFiveVector> big_five;

  bool operator==(const Traits&) const = default;
};

struct CharacterStructure {
  std::map<std::string, std::string> basic_info;  // name, gender, age, profession
  std::string current_state;
  Traits traits;
  std::string conflict;
  PreferenceSet preference;
  int revision = 0;

  bool operator==(const CharacterStructure&) const = default;

  std::string name() const;
  std::string profession() const;
};

enum class Dimension { BasicInfo, CurrentState, Traits, Conflict, Preference };

inline constexpr std::string_view kDimensionNames[] = {"basic_info", "current_state", "traits",
                                                       "conflict", "preference"};

std::string_view dimension_name(Dimension d);
std::optional<Dimension> parse_dimension(std::string_view s);

struct CharacterSummary {
  std::map<std::string, std::string> dimensions;  // keyed by dimension name
  std::optional<Dimension> emphasis;
  int source_revision = 0;

  bool operator==(const CharacterSummary&) const = default;
};

void to_json(json& j, const BigFiveVector& v);
void from_json(const json& j, BigFiveVector& v);
void to_json(json& j, const PreferenceSet& p);
void from_json(const json& j, PreferenceSet& p);
void to_json(json& j, const CharacterStructure& cs);
void from_json(const json& j, CharacterStructure& cs);
void to_json(json& j, const CharacterSummary& s);
void from_json(const json& j, CharacterSummary& s);

// Full-text rendering of one dimension, as placed in prompts.
std::string dimension_text(const CharacterStructure& cs, Dimension d);
std::string preference_text(const PreferenceSet& p);

// Single free-text persona paragraph (used by the simplified-character mode).
std::string persona_paragraph(const CharacterStructure& cs);

// Full structure as a prompt context value.
json full_view(const CharacterStructure& cs);
json summary_view(const CharacterSummary& s);

// Words in s, counted on whitespace.
std::size_t word_count(std::string_view s);
std::string truncate_words(std::string_view s, std::size_t max_words);

CharacterStructure init_character(std::string_view brief, const lm::LmClient& client,
                                  int max_retries = 2);

CharacterSummary summarize_character(const CharacterStructure& full,
                                     std::optional<Dimension> emphasis,
                                     const lm::LmClient& client, std::size_t word_budget = 60);

// Every violated invariant, by name. Empty iff valid. When a baseline is
// given, basic_info must match it and revision must not go backwards.
std::vector<std::string> validate_structure(const CharacterStructure& cs,
                                            const CharacterStructure* baseline = nullptr);

}  // namespace psim
