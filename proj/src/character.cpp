#include "psim/character.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>

namespace psim {
namespace {

std::string lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

std::string join(const std::vector<std::string>& items, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i) out += sep;
    out += items[i];
  }
  return out;
}

bool names_goal(std::string_view derived, std::string_view ultimate) {
  std::string d = lower(derived);
  std::string u = lower(ultimate);
  if (u.empty()) return false;
  if (d.find(u) != std::string::npos) return true;
  // Accept a paraphrase that keeps every content word of the ultimate goal.
  std::istringstream words(u);
  std::string w;
  int content = 0;
  while (words >> w) {
    w.erase(std::remove_if(w.begin(), w.end(), [](char c) { return std::ispunct(static_cast<unsigned char>(c)); }),
            w.end());
    if (w.size() <= 3) continue;
    ++content;
    if (d.find(w) == std::string::npos) return false;
  }
  return content > 0;
}

const char* kBasicKeys[] = {"name", "gender", "age", "profession"};

}  // namespace

bool BigFiveVector::in_range() const {
  auto within = [](int v, int items) { return v >= items && v <= 5 * items; };
  return within(openness, 10) && within(conscientiousness, 9) && within(extraversion, 8) &&
         within(agreeableness, 9) && within(neuroticism, 8);
}

std::string CharacterStructure::name() const {
  auto it = basic_info.find("name");
  return it == basic_info.end() ? std::string() : it->second;
}

std::string CharacterStructure::profession() const {
  auto it = basic_info.find("profession");
  return it == basic_info.end() ? std::string() : it->second;
}

std::string_view dimension_name(Dimension d) { return kDimensionNames[static_cast<int>(d)]; }

std::optional<Dimension> parse_dimension(std::string_view s) {
  for (int i = 0; i < 5; ++i) {
    if (kDimensionNames[i] == s) return static_cast<Dimension>(i);
  }
  return std::nullopt;
}

void to_json(json& j, const BigFiveVector& v) {
  j = {{"openness", v.openness},
       {"conscientiousness", v.conscientiousness},
       {"extraversion", v.extraversion},
       {"agreeableness", v.agreeableness},
       {"neuroticism", v.neuroticism}};
}

void from_json(const json& j, BigFiveVector& v) {
  j.at("openness").get_to(v.openness);
  j.at("conscientiousness").get_to(v.conscientiousness);
  j.at("extraversion").get_to(v.extraversion);
  j.at("agreeableness").get_to(v.agreeableness);
  j.at("neuroticism").get_to(v.neuroticism);
}

void to_json(json& j, const PreferenceSet& p) {
  j = {{"ultimate_goal", p.ultimate_goal},     {"long_term_goal", p.long_term_goal},
       {"short_term_goal", p.short_term_goal}, {"daily_routine", p.daily_routine},
       {"hobbies", p.hobbies},                 {"venue_preference", p.venue_preference}};
}

void from_json(const json& j, PreferenceSet& p) {
  j.at("ultimate_goal").get_to(p.ultimate_goal);
  j.at("long_term_goal").get_to(p.long_term_goal);
  j.at("short_term_goal").get_to(p.short_term_goal);
  j.at("daily_routine").get_to(p.daily_routine);
  j.at("hobbies").get_to(p.hobbies);
  j.at("venue_preference").get_to(p.venue_preference);
}

void to_json(json& j, const CharacterStructure& cs) {
  json traits = {{"prose", cs.traits.prose}, {"big_five", nullptr}};
  if (cs.traits.big_five) traits["big_five"] = *cs.traits.big_five;
  j = {{"basic_info", cs.basic_info}, {"current_state", cs.current_state},
       {"traits", traits},            {"conflict", cs.conflict},
       {"preference", cs.preference}, {"revision", cs.revision}};
}

void from_json(const json& j, CharacterStructure& cs) {
  j.at("basic_info").get_to(cs.basic_info);
  j.at("current_state").get_to(cs.current_state);
  const auto& traits = j.at("traits");
  if (traits.is_string()) {
    cs.traits.prose = traits.get<std::string>();
    cs.traits.big_five.reset();
  } else {
    traits.at("prose").get_to(cs.traits.prose);
    if (traits.contains("big_five") && !traits.at("big_five").is_null()) {
      cs.traits.big_five = traits.at("big_five").get<BigFiveVector>();
    } else {
      cs.traits.big_five.reset();
    }
  }
  j.at("conflict").get_to(cs.conflict);
  j.at("preference").get_to(cs.preference);
  cs.revision = j.value("revision", 0);
}

void to_json(json& j, const CharacterSummary& s) {
  j = {{"dimensions", s.dimensions},
       {"emphasis", s.emphasis ? json(dimension_name(*s.emphasis)) : json(nullptr)},
       {"source_revision", s.source_revision}};
}

void from_json(const json& j, CharacterSummary& s) {
  j.at("dimensions").get_to(s.dimensions);
  s.emphasis.reset();
  if (j.contains("emphasis") && j.at("emphasis").is_string()) {
    s.emphasis = parse_dimension(j.at("emphasis").get<std::string>());
  }
  j.at("source_revision").get_to(s.source_revision);
}

std::string preference_text(const PreferenceSet& p) {
  std::ostringstream out;
  out << "Ultimate goal: " << p.ultimate_goal << ". Long-term goal: " << p.long_term_goal
      << ". Short-term goal: " << p.short_term_goal << ". Daily routine: " << p.daily_routine
      << ". Hobbies: " << join(p.hobbies, ", ")
      << ". Venue preference: " << join(p.venue_preference, ", ") << ".";
  return out.str();
}

std::string dimension_text(const CharacterStructure& cs, Dimension d) {
  switch (d) {
    case Dimension::BasicInfo: {
      std::vector<std::string> parts;
      for (const char* key : kBasicKeys) {
        auto it = cs.basic_info.find(key);
        if (it != cs.basic_info.end()) parts.push_back(std::string(key) + ": " + it->second);
      }
      return join(parts, "; ");
    }
    case Dimension::CurrentState:
      return cs.current_state;
    case Dimension::Traits:
      return cs.traits.prose;
    case Dimension::Conflict:
      return cs.conflict;
    case Dimension::Preference:
      return preference_text(cs.preference);
  }
  return {};
}

std::string persona_paragraph(const CharacterStructure& cs) {
  std::ostringstream out;
  auto get = [&](const char* k) {
    auto it = cs.basic_info.find(k);
    return it == cs.basic_info.end() ? std::string() : it->second;
  };
  out << get("name") << ", " << get("age") << ", " << get("profession") << ". "
      << cs.traits.prose << " Enjoys " << join(cs.preference.hobbies, ", ") << ".";
  return normalize_ws(out.str());
}

json full_view(const CharacterStructure& cs) {
  json j;
  for (int i = 0; i < 5; ++i) {
    auto d = static_cast<Dimension>(i);
    j[std::string(dimension_name(d))] = dimension_text(cs, d);
  }
  return j;
}

json summary_view(const CharacterSummary& s) { return s.dimensions; }

std::size_t word_count(std::string_view s) {
  std::size_t n = 0;
  bool in_word = false;
  for (unsigned char c : s) {
    if (std::isspace(c)) {
      in_word = false;
    } else if (!in_word) {
      in_word = true;
      ++n;
    }
  }
  return n;
}

std::string truncate_words(std::string_view s, std::size_t max_words) {
  std::istringstream in{std::string(s)};
  std::string w, out;
  std::size_t n = 0;
  while (n < max_words && in >> w) {
    if (n++) out.push_back(' ');
    out += w;
  }
  return out;
}

namespace {

CharacterStructure decode_structure(const json& payload) {
  CharacterStructure cs;
  for (auto it = payload.at("basic_info").begin(); it != payload.at("basic_info").end(); ++it) {
    cs.basic_info[it.key()] = it.value().get<std::string>();
  }
  cs.current_state = payload.at("current_state").get<std::string>();
  cs.traits.prose = payload.at("traits").get<std::string>();
  cs.conflict = payload.at("conflict").get<std::string>();
  cs.preference = payload.at("preference").get<PreferenceSet>();
  cs.revision = 0;
  return cs;
}

}  // namespace

CharacterStructure init_character(std::string_view brief, const lm::LmClient& client,
                                  int max_retries) {
  if (normalize_ws(brief).empty()) throw InputError("init_character: empty brief");
  std::string last_problem;
  for (int attempt = 0; attempt <= max_retries; ++attempt) {
    lm::PromptRequest req;
    req.kind = lm::PromptKind::CharInit;
    req.context = {{"brief", std::string(brief)}};
    if (attempt > 0) req.context["attempt"] = attempt;
    if (!last_problem.empty()) req.context["problem"] = last_problem;

    lm::CompletionResponse resp;
    try {
      resp = client.complete(req);
    } catch (const DecodeError& e) {
      last_problem = e.what();
      continue;
    } catch (const BackendError& e) {
      throw BackendError(std::string("character initialization failed: ") + e.what());
    }
    CharacterStructure cs = decode_structure(resp.payload);
    auto report = validate_structure(cs);
    if (report.empty()) return cs;
    last_problem = join(report, "; ");
  }
  throw SchemaError("character initialization: " + last_problem);
}

CharacterSummary summarize_character(const CharacterStructure& full,
                                     std::optional<Dimension> emphasis,
                                     const lm::LmClient& client, std::size_t word_budget) {
  lm::PromptRequest req;
  req.kind = lm::PromptKind::CharSummary;
  req.context = {{"character", full_view(full)},
                 {"word_budget", word_budget},
                 {"emphasis", emphasis ? json(dimension_name(*emphasis)) : json(nullptr)}};
  auto resp = client.complete(req);

  CharacterSummary out;
  out.emphasis = emphasis;
  out.source_revision = full.revision;
  for (int i = 0; i < 5; ++i) {
    auto d = static_cast<Dimension>(i);
    std::string key(dimension_name(d));
    if (emphasis && *emphasis == d) {
      out.dimensions[key] = dimension_text(full, d);
    } else {
      out.dimensions[key] =
          truncate_words(resp.payload.at(key).get<std::string>(), word_budget);
    }
  }
  return out;
}

std::vector<std::string> validate_structure(const CharacterStructure& cs,
                                            const CharacterStructure* baseline) {
  std::vector<std::string> report;
  for (const char* key : kBasicKeys) {
    auto it = cs.basic_info.find(key);
    if (it == cs.basic_info.end() || normalize_ws(it->second).empty()) {
      report.push_back(std::string("basic_info.") + key);
    }
  }
  if (normalize_ws(cs.current_state).empty()) report.emplace_back("current_state");
  if (normalize_ws(cs.traits.prose).empty()) report.emplace_back("traits");
  if (cs.traits.big_five && !cs.traits.big_five->in_range()) report.emplace_back("traits.big_five range");
  if (normalize_ws(cs.conflict).empty()) report.emplace_back("conflict");

  const auto& p = cs.preference;
  if (normalize_ws(p.ultimate_goal).empty()) report.emplace_back("preference.ultimate_goal");
  if (normalize_ws(p.long_term_goal).empty()) report.emplace_back("preference.long_term_goal");
  if (normalize_ws(p.short_term_goal).empty()) report.emplace_back("preference.short_term_goal");
  if (normalize_ws(p.daily_routine).empty()) report.emplace_back("preference.daily_routine");
  if (p.hobbies.empty()) report.emplace_back("preference.hobbies");
  if (p.venue_preference.empty()) report.emplace_back("preference.venue_preference");
  if (!p.ultimate_goal.empty()) {
    if (!p.long_term_goal.empty() && !names_goal(p.long_term_goal, p.ultimate_goal)) {
      report.emplace_back("preference.long_term_goal derivation");
    }
    if (!p.short_term_goal.empty() && !names_goal(p.short_term_goal, p.ultimate_goal)) {
      report.emplace_back("preference.short_term_goal derivation");
    }
  }
  if (cs.revision < 0) report.emplace_back("revision");

  if (baseline) {
    if (cs.basic_info != baseline->basic_info) report.emplace_back("basic_info immutability");
    if (cs.revision < baseline->revision) report.emplace_back("revision monotonicity");
  }
  return report;
}

}  // namespace psim
