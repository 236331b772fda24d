#pragma once

#include <initializer_list>
#include <string>
#include <string_view>
#include <vector>

namespace psim::lexicon {

enum class Trait { Extraversion, Agreeableness, Conscientiousness, Neuroticism, Openness };

std::string lower(std::string_view s);

// Lower-cased alphabetic words.
std::vector<std::string> words(std::string_view text);

// Words of four or more letters that are not stopwords, in order, unique.
std::vector<std::string> content_words(std::string_view text);

// Number of words in `text` starting with one of `stems`.
int count_cues(std::string_view text, std::initializer_list<std::string_view> stems);
bool has_cue(std::string_view text, std::initializer_list<std::string_view> stems);

// Positive minus negative cue count for a trait.
int cue_balance(std::string_view text, Trait t);

// First sentence, up to and including the terminating period.
std::string first_sentence(std::string_view text);

}  // namespace psim::lexicon
