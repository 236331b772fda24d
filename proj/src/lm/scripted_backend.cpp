#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <set>

#include "psim/character.hpp"
#include "psim/evaluation/bfi.hpp"
#include "psim/lexicon.hpp"
#include "psim/lm/backends.hpp"

namespace psim::lm {
namespace {

using lexicon::count_cues;
using lexicon::has_cue;
using lexicon::lower;

std::uint64_t key(std::uint64_t seed, std::initializer_list<std::string_view> parts) {
  std::string s = std::to_string(seed);
  for (auto p : parts) {
    s.push_back('\x1f');
    s.append(p);
  }
  return splitmix64(fnv1a64(s));
}

double unit(std::uint64_t h) { return unit_interval(h); }

template <typename T>
const T& pick(const std::vector<T>& v, std::uint64_t h) {
  return v[h % v.size()];
}

// Every string in a context value, in key order, space separated.
void collect_text(const json& j, std::string& out) {
  if (j.is_string()) {
    if (!out.empty()) out.push_back(' ');
    out += j.get<std::string>();
  } else if (j.is_array() || j.is_object()) {
    for (const auto& v : j) collect_text(v, out);
  }
}

std::string text_of(const json& j) {
  std::string out;
  collect_text(j, out);
  return out;
}

std::string get_str(const json& j, const char* k, std::string def = {}) {
  auto it = j.find(k);
  if (it == j.end() || !it->is_string()) return def;
  return it->get<std::string>();
}

std::string trim_period(std::string s) {
  while (!s.empty() && (s.back() == '.' || s.back() == ' ')) s.pop_back();
  return s;
}

// "Hobbies: a, b. Venue..." -> {a, b}
std::vector<std::string> list_after(const std::string& text, std::string_view label) {
  auto pos = text.find(label);
  if (pos == std::string::npos) return {};
  pos += label.size();
  auto end = text.find('.', pos);
  std::string body = text.substr(pos, end == std::string::npos ? std::string::npos : end - pos);
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= body.size()) {
    auto comma = body.find(',', start);
    std::string item = normalize_ws(body.substr(start, comma == std::string::npos ? std::string::npos : comma - start));
    if (!item.empty()) out.push_back(item);
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

std::string field_after(const std::string& text, std::string_view label) {
  auto pos = text.find(label);
  if (pos == std::string::npos) return {};
  pos += label.size();
  auto end = text.find(". ", pos);
  return trim_period(text.substr(pos, end == std::string::npos ? std::string::npos : end - pos));
}

std::string lower_first(std::string s) {
  if (!s.empty() && s[0] >= 'A' && s[0] <= 'Z' && !(s.size() > 1 && s[1] >= 'A' && s[1] <= 'Z')) {
    s[0] = static_cast<char>(s[0] - 'A' + 'a');
  }
  return s;
}

std::string join(const std::vector<std::string>& v, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += sep;
    out += v[i];
  }
  return out;
}

bool is_vowel(char c) { return c == 'a' || c == 'e' || c == 'i' || c == 'o' || c == 'u'; }

// "Write the next chapter" -> "writing the next chapter"
std::string gerund(const std::string& phrase) {
  std::string p = lower_first(phrase);
  auto sp = p.find(' ');
  std::string verb = p.substr(0, sp);
  std::string rest = sp == std::string::npos ? "" : p.substr(sp);
  if (verb.size() > 3 && verb.compare(verb.size() - 3, 3, "ing") == 0) return p;
  std::string g;
  if (verb == "be") {
    g = "being";
  } else if (verb.size() > 2 && verb.back() == 'e' && verb[verb.size() - 2] != 'e') {
    g = verb.substr(0, verb.size() - 1) + "ing";
  } else if (verb.size() == 3 && !is_vowel(verb[0]) && is_vowel(verb[1]) && !is_vowel(verb[2]) &&
             verb[2] != 'w' && verb[2] != 'x' && verb[2] != 'y') {
    g = verb + verb[2] + "ing";
  } else {
    g = verb + "ing";
  }
  return g + rest;
}

// ---- cues -------------------------------------------------------------

enum class Domain { Tech, Writer, Film, Art, Music, Health, General };

Domain domain_of(std::string_view text) {
  if (has_cue(text, {"cs", "computer", "programm", "engineer", "software", "coding", "code"})) return Domain::Tech;
  if (has_cue(text, {"writer", "novel", "poet", "author"})) return Domain::Writer;
  if (has_cue(text, {"film", "director", "movie", "cinema"})) return Domain::Film;
  if (has_cue(text, {"artist", "painter", "paint", "sculpt"})) return Domain::Art;
  if (has_cue(text, {"music", "singer", "band", "guitar"})) return Domain::Music;
  if (has_cue(text, {"doctor", "nurse", "medic", "health"})) return Domain::Health;
  return Domain::General;
}

int extraversion_level(std::string_view text) {
  return std::clamp(lexicon::cue_balance(text, lexicon::Trait::Extraversion), -2, 2);
}

bool tech_cue(std::string_view text) {
  return has_cue(text, {"tech", "algorithm", "code", "coding", "machine", "software", "program", "debug", "comput"});
}

enum class Theme { Interdisciplinary, Health, Authenticity, Creativity, Social, Work };
constexpr int kThemeCount = 6;

int theme_score(std::string_view text, Theme t) {
  switch (t) {
    case Theme::Interdisciplinary:
      return count_cues(text, {"literature", "humanit", "philosoph", "history", "interdisciplin", "poetry"});
    case Theme::Health:
      return count_cues(text, {"run", "gym", "exercis", "health", "sleep", "workout", "basketball"});
    case Theme::Authenticity:
      return count_cues(text, {"square", "relax", "free", "authentic", "alone", "unwind", "calm"});
    case Theme::Creativity:
      return count_cues(text, {"writ", "creat", "novel", "paint", "film", "sketch", "storyboard", "chapter"});
    case Theme::Social:
      return count_cues(text, {"friend", "talk", "chat", "meet", "party", "club", "together"});
    case Theme::Work:
      return count_cues(text, {"study", "lecture", "debug", "project", "research", "work", "exam", "problem"});
  }
  return 0;
}

// Highest-scoring theme; ties broken by `h`, never `except`.
Theme top_theme(std::string_view text, std::uint64_t h, std::optional<Theme> except = std::nullopt) {
  int best = -1;
  std::vector<Theme> tied;
  for (int i = 0; i < kThemeCount; ++i) {
    auto t = static_cast<Theme>(i);
    if (except && *except == t) continue;
    int s = theme_score(text, t);
    if (s > best) {
      best = s;
      tied = {t};
    } else if (s == best) {
      tied.push_back(t);
    }
  }
  return tied[h % tied.size()];
}

// ---- places -----------------------------------------------------------

struct PlaceInfo {
  std::string id;
  std::string name;
  std::set<std::string> affordances;
  int capacity = 1;
  int x = 0, y = 0;
  int open = 0, close = 1440;
};

std::vector<PlaceInfo> parse_places(const json& arr) {
  std::vector<PlaceInfo> out;
  if (!arr.is_array()) return out;
  for (const auto& p : arr) {
    PlaceInfo info;
    info.id = get_str(p, "id");
    auto slash = info.id.find('/');
    info.name = slash == std::string::npos ? info.id : info.id.substr(slash + 1);
    for (const auto& a : p.value("affordances", json::array())) info.affordances.insert(a.get<std::string>());
    info.capacity = p.value("capacity", 1);
    info.x = p.value("x", 0);
    info.y = p.value("y", 0);
    info.open = parse_hhmm(get_str(p, "open", "00:00")).value_or(0);
    info.close = parse_hhmm(get_str(p, "close", "24:00")).value_or(1440);
    out.push_back(std::move(info));
  }
  return out;
}

const PlaceInfo* find_place(const std::vector<PlaceInfo>& places, const std::string& id) {
  for (const auto& p : places) {
    if (p.id == id) return &p;
  }
  return nullptr;
}

bool matches_any(const std::string& id, const std::vector<std::string>& words) {
  std::string l = lower(id);
  for (const auto& w : words) {
    std::string lw = lower(w);
    if (!lw.empty() && l.find(lw) != std::string::npos) return true;
  }
  return false;
}

// ---- CHAR_INIT ----------------------------------------------------------

json char_init(const json& c, std::uint64_t seed) {
  const std::string brief = get_str(c, "brief");
  const std::string lb = lower(brief);
  const auto h = key(seed, {"init", brief});
  const Domain dom = domain_of(brief);
  const bool student = has_cue(brief, {"student", "undergrad", "freshman", "college"});
  const bool shy = has_cue(brief, {"shy", "reserved", "quiet", "introvert", "timid", "withdrawn"});
  const bool outgoing = has_cue(brief, {"enthusias", "outgoing", "sociable", "open", "extrovert", "lively", "friendly", "talkative"});
  const int temper = shy ? -1 : (outgoing ? 1 : 0);

  // name: first capitalized word that is not an acronym or an article
  std::string name;
  {
    std::string word;
    auto flush = [&] {
      bool cap = word.size() > 1 && word[0] >= 'A' && word[0] <= 'Z';
      bool has_lower = std::any_of(word.begin(), word.end(), [](char ch) { return ch >= 'a' && ch <= 'z'; });
      static const std::set<std::string> skip = {"A", "An", "The", "Shy", "Enthusiastic", "Open", "Outgoing", "Quiet", "Young", "Reserved"};
      if (name.empty() && cap && has_lower && !skip.count(word)) name = word;
      word.clear();
    };
    for (char ch : brief) {
      if (std::isalpha(static_cast<unsigned char>(ch))) {
        word.push_back(ch);
      } else {
        flush();
      }
    }
    flush();
  }
  if (name.empty()) {
    static const std::vector<std::string> pool = {"Alex", "Jordan", "Taylor", "Morgan", "Riley", "Casey"};
    name = pick(pool, h);
  }

  static const std::set<std::string> female = {"isabella", "sophia", "emma", "olivia", "ava", "mia", "lily",
                                              "grace", "chloe", "maria", "anna", "zoe", "isla"};
  static const std::set<std::string> male = {"benjamin", "james", "liam", "noah", "lucas", "ethan", "leo",
                                            "adam", "daniel", "samuel", "klaus"};
  std::string gender = "unspecified";
  if (has_cue(lb, {"she", "her"}) && !has_cue(lb, {"hero"})) {
    gender = "female";
  } else if (has_cue(lb, {"he", "his", "him"})) {
    gender = "male";
  } else if (female.count(lower(name))) {
    gender = "female";
  } else if (male.count(lower(name))) {
    gender = "male";
  }
  int age = student ? 19 + static_cast<int>(h % 5) : 24 + static_cast<int>(h % 12);

  std::string profession;
  switch (dom) {
    case Domain::Tech:
      profession = student ? "computer science student" : "software engineer";
      break;
    case Domain::Writer:
      profession = "writer";
      break;
    case Domain::Film:
      profession = "filmmaker";
      break;
    case Domain::Art:
      profession = "artist";
      break;
    case Domain::Music:
      profession = "musician";
      break;
    case Domain::Health:
      profession = student ? "medical student" : "nurse";
      break;
    case Domain::General:
      profession = student ? "university student" : pick(std::vector<std::string>{"cafe owner", "event organizer", "journalism student"}, h >> 8);
      break;
  }

  std::string traits;
  if (temper < 0) {
    traits = "Shy and reserved around new people, but focused, diligent and precise once absorbed in a task. Prefers quiet spaces and small conversations.";
  } else if (temper > 0) {
    traits = "Enthusiastic, outgoing and open to new experiences; warm with everyone and energized by lively conversation. Curious about other people's stories.";
  } else {
    traits = "Curious and steady, considerate with friends and organized in daily work.";
  }
  static const std::map<Domain, std::string> flavor = {
      {Domain::Tech, " Thinks in systems and enjoys solving hard technical problems."},
      {Domain::Writer, " Imaginative and reflective, notices small details of everyday life."},
      {Domain::Film, " Visual and imaginative, always framing scenes."},
      {Domain::Art, " Artistic and imaginative, sensitive to color and form."},
      {Domain::Music, " Expressive and creative, hears rhythm everywhere."},
      {Domain::Health, " Caring and calm under pressure."},
      {Domain::General, ""}};
  traits += flavor.at(dom);

  static const std::map<Domain, std::string> state = {
      {Domain::Tech, "Busy with coursework and a research prototype, spending most days between the library and the lab."},
      {Domain::Writer, "Drafting a personal novel while balancing daily routines and a busy social circle."},
      {Domain::Film, "Preparing a short film and scouting locations around campus."},
      {Domain::Art, "Preparing pieces for a student exhibition."},
      {Domain::Music, "Rehearsing for a small concert."},
      {Domain::Health, "Working long shifts and studying for certification exams."},
      {Domain::General, "Settling into a new term on campus."}};
  std::string current = state.at(dom);
  if (temper > 0) current += " Spends free time meeting friends around campus.";
  if (temper < 0) current += " Keeps mostly to a small circle.";

  std::string conflict;
  if (dom == Domain::Tech) {
    conflict = "Torn between deep technical work and a growing pull toward the humanities and literature; fears that staying purely technical will make life narrow.";
    if (temper < 0) conflict += " Also wants to connect with people but finds social situations draining.";
  } else if (dom == Domain::Writer) {
    conflict = "Wants to keep creativity and mental health intact under social pressure, yet fears that constant social obligations leave no room for honest writing.";
  } else if (dom == Domain::Film) {
    conflict = "Wants artistic freedom but feels pressure to make commercially safe work.";
  } else if (temper > 0) {
    conflict = "Loves being surrounded by people yet worries that constant socializing keeps life from being free and authentic.";
  } else {
    conflict = "Wants stability but also longs for change.";
  }

  std::string ultimate;
  std::string path;
  std::string step;
  std::vector<std::string> hobbies;
  switch (dom) {
    case Domain::Tech:
      ultimate = "build technology that genuinely helps people";
      path = "finish a research-focused degree and join a team that ships useful tools";
      step = "finish the course project and present it in class";
      hobbies = {"coding side projects", "puzzle games", "science fiction"};
      break;
    case Domain::Writer:
      ultimate = "publish a novel that moves readers";
      path = "complete a full draft and find a publisher";
      step = "write three new chapters";
      hobbies = {"writing fiction", "reading novels", "people-watching"};
      break;
    case Domain::Film:
      ultimate = "make films that show people as they are";
      path = "build a portfolio of short films";
      step = "finish shooting the short film";
      hobbies = {"filmmaking", "photography", "old movies"};
      break;
    case Domain::Art:
      ultimate = "create art that people remember";
      path = "hold a solo exhibition";
      step = "complete two exhibition pieces";
      hobbies = {"painting", "museum visits", "sketching"};
      break;
    case Domain::Music:
      ultimate = "write songs that bring people together";
      path = "record a first album";
      step = "finish the concert setlist";
      hobbies = {"guitar", "concerts", "songwriting"};
      break;
    case Domain::Health:
      ultimate = "keep people healthy and cared for";
      path = "specialize in community health";
      step = "pass the certification exam";
      hobbies = {"running", "cooking", "volunteering"};
      break;
    case Domain::General:
      if (temper > 0) {
        ultimate = "build a community where people feel understood";
        path = "organize regular gatherings that bring people together";
        step = "host a gathering for new friends";
        hobbies = {"hosting parties", "social philosophy", "coffee tasting"};
      } else {
        ultimate = "lead a meaningful and balanced life";
        path = "find work that feels worthwhile";
        step = "settle into a steady weekly routine";
        hobbies = {"cooking", "board games", "walking"};
      }
      break;
  }
  if (temper > 0 && dom != Domain::General) hobbies.push_back("meeting new people");
  if (temper < 0) hobbies.push_back("reading alone");

  std::string routine = temper < 0   ? "Early study in the library, meals alone or with one friend, quiet evenings in the dorm"
                        : temper > 0 ? "Mornings at the cafe, afternoons meeting friends, evenings at the square or a party"
                                     : "Classes in the morning, errands in the afternoon, reading in the evening";
  std::vector<std::string> venues = temper < 0   ? std::vector<std::string>{"library", "dorm", "lab"}
                                    : temper > 0 ? std::vector<std::string>{"cafe", "square", "bar", "park"}
                                                 : std::vector<std::string>{"cafe", "library", "park"};

  return {{"basic_info", {{"name", name}, {"gender", gender}, {"age", std::to_string(age)}, {"profession", profession}}},
          {"current_state", current},
          {"traits", traits},
          {"conflict", conflict},
          {"preference",
           {{"ultimate_goal", ultimate},
            {"long_term_goal", "To " + ultimate + ", " + path},
            {"short_term_goal", "This month, as a step to " + ultimate + ", " + step},
            {"daily_routine", routine},
            {"hobbies", hobbies},
            {"venue_preference", venues}}}};
}

json char_summary(const json& c) {
  std::size_t budget = c.value("word_budget", 60);
  json out;
  const json& ch = c.at("character");
  for (auto name : kDimensionNames) {
    std::string key(name);
    std::string text = ch.is_object() ? get_str(ch, key.c_str()) : text_of(ch);
    out[key] = truncate_words(lexicon::first_sentence(text), budget);
  }
  return out;
}

// ---- planning -----------------------------------------------------------

const std::vector<std::string>& activities(GoalTag g, Domain d, bool humanities, bool extrovert) {
  static std::map<std::string, std::vector<std::string>> table;
  std::string k = std::string(goal_name(g)) + "/" + std::to_string(static_cast<int>(d)) + "/" +
                  (humanities ? "h" : "-") + (extrovert ? "e" : "-");
  auto it = table.find(k);
  if (it != table.end()) return it->second;
  std::vector<std::string> v;
  switch (g) {
    case GoalTag::Learning:
      if (humanities) {
        v = {"Read a literature book", "Attend a philosophy lecture", "Read a literature book"};
      } else if (d == Domain::Tech) {
        v = {"Work through the algorithms problem set", "Debug the research prototype", "Attend the machine learning lecture"};
      } else if (d == Domain::Writer) {
        v = {"Research settings for the novel", "Attend the literature seminar"};
      } else {
        v = {"Review lecture notes", "Attend a lecture", "Study for the upcoming exam"};
      }
      break;
    case GoalTag::Work:
      v = d == Domain::Tech ? std::vector<std::string>{"Write code for the team project", "Fix bugs for the lab"}
                            : std::vector<std::string>{"Work a shift at the part-time job", "Finish assigned tasks at work"};
      break;
    case GoalTag::Exercise:
      v = {"Go for a run", "Work out at the gym", "Play a game of basketball"};
      break;
    case GoalTag::Relaxation:
      v = {"Take a slow walk and unwind", "Sit in the square and people-watch", "Listen to music and relax"};
      break;
    case GoalTag::Social:
      v = extrovert ? std::vector<std::string>{"Host a small get-together", "Meet new people", "Hang out with friends"}
                    : std::vector<std::string>{"Hang out with friends", "Join a student club gathering", "Chat with people over coffee"};
      break;
    case GoalTag::Creative:
      if (d == Domain::Writer) {
        v = {"Write the next chapter of the personal novel", "Edit yesterday's pages of the novel"};
      } else if (d == Domain::Film) {
        v = {"Storyboard the short film", "Shoot footage for the short film"};
      } else if (d == Domain::Art) {
        v = {"Sketch ideas for the exhibition"};
      } else if (d == Domain::Music) {
        v = {"Practice songwriting"};
      } else if (humanities) {
        v = {"Write a short story", "Write in the journal"};
      } else {
        v = {"Write in the journal", "Sketch in a notebook"};
      }
      break;
    case GoalTag::Errand:
      v = {"Pick up groceries", "Run errands around campus", "Return books to the library"};
      break;
    case GoalTag::Meal:
      v = {"Have a meal"};
      break;
    case GoalTag::Rest:
      v = {"Wind down and sleep"};
      break;
    case GoalTag::Appointment:
      v = {"Meet a friend"};
      break;
  }
  return table.emplace(k, std::move(v)).first->second;
}

std::string motivation_for(GoalTag g, const std::string& ultimate) {
  std::string aim = ultimate.empty() ? "personal goals" : ultimate;
  switch (g) {
    case GoalTag::Learning:
    case GoalTag::Creative:
      return "progress toward the aim to " + aim;
    case GoalTag::Work:
      return "keep commitments and cover costs";
    case GoalTag::Exercise:
      return "stay healthy";
    case GoalTag::Relaxation:
      return "recharge";
    case GoalTag::Social:
      return "stay connected with friends";
    case GoalTag::Appointment:
      return "spend time with someone who matters";
    case GoalTag::Meal:
      return "eat";
    case GoalTag::Rest:
      return "recover for tomorrow";
    case GoalTag::Errand:
      return "keep daily life in order";
  }
  return "";
}

int base_duration(GoalTag g) {
  switch (g) {
    case GoalTag::Learning:
    case GoalTag::Work:
      return 150;
    case GoalTag::Exercise:
      return 75;
    case GoalTag::Relaxation:
      return 90;
    case GoalTag::Social:
      return 105;
    case GoalTag::Appointment:
      return 90;
    case GoalTag::Meal:
      return 45;
    case GoalTag::Rest:
      return 90;
    case GoalTag::Creative:
      return 120;
    case GoalTag::Errand:
      return 45;
  }
  return 60;
}

std::string shared_topic(const std::vector<std::string>& mine, const json& card) {
  std::vector<std::string> theirs;
  for (const auto& i : card.value("interests", json::array())) theirs.push_back(i.get<std::string>());
  for (const auto& a : mine) {
    for (const auto& b : theirs) {
      if (lower(a) == lower(b)) return a;
    }
  }
  if (!theirs.empty() && !mine.empty()) return theirs.front() + " and " + mine.front();
  if (!theirs.empty()) return theirs.front();
  if (!mine.empty()) return mine.front();
  return "how the week is going";
}

struct Draft {
  GoalTag goal;
  std::string place;
  std::string description;
  std::string motivation;
  int duration;
  std::optional<std::string> partner;
};

json plan_day(const json& c, std::uint64_t seed) {
  const std::string persona = text_of(c.at("character"));
  const std::string insight = c.contains("insight") ? text_of(c.at("insight")) : "";
  const std::string memory = c.contains("memory") ? canonical_dump(c.at("memory")) : "";
  const std::string home = get_str(c, "home");
  const auto places = parse_places(c.at("places"));
  const int tick = std::max(1, c.value("tick_minutes", 15));
  const double speed = std::max(0.01, c.value("move_speed", 1.0));
  const std::string self_id = get_str(c, "agent");
  const int e = extraversion_level(persona);
  const Domain dom = domain_of(persona);
  const bool humanities = has_cue(insight, {"humanit", "literature", "philosoph", "interdisciplin"});
  const std::vector<std::string> venues = list_after(persona, "Venue preference: ");
  const std::vector<std::string> hobbies = list_after(persona, "Hobbies: ");
  const std::string ultimate = field_after(persona, "Ultimate goal: ");

  std::vector<json> acquaintances;
  for (const auto& a : c.value("acquaintances", json::array())) {
    if (get_str(a, "id") != self_id) acquaintances.push_back(a);
  }

  auto affording = [&](GoalTag g) {
    std::vector<const PlaceInfo*> out;
    if (g == GoalTag::Rest) {
      if (auto* p = find_place(places, home)) out.push_back(p);
      return out;
    }
    for (const auto& p : places) {
      if (!p.affordances.count(std::string(goal_name(g)))) continue;
      if ((g == GoalTag::Social || g == GoalTag::Appointment) && (p.id == home || p.capacity < 2)) continue;
      out.push_back(&p);
    }
    return out;
  };

  std::array<double, kGoalCount> w{};
  auto at = [&](GoalTag g) -> double& { return w[static_cast<std::size_t>(g)]; };
  at(GoalTag::Learning) = 2.0;
  at(GoalTag::Work) = 0.8;
  at(GoalTag::Exercise) = 0.9;
  at(GoalTag::Relaxation) = 1.0;
  at(GoalTag::Social) = std::max(0.15, 1.0 + 0.7 * e);
  at(GoalTag::Appointment) = std::max(0.1, 0.6 + 0.4 * e);
  at(GoalTag::Creative) = 0.7;
  at(GoalTag::Errand) = 0.5;
  auto boost = [&](const std::string& text, double s) {
    if (has_cue(text, {"student", "study", "course", "research", "exam"})) at(GoalTag::Learning) += 1.5 * s;
    if (has_cue(text, {"writ", "novel", "chapter"})) at(GoalTag::Creative) += 2.5 * s;
    if (has_cue(text, {"film", "paint", "music", "artist", "artistic", "creativ"})) at(GoalTag::Creative) += 1.5 * s;
    if (has_cue(text, {"job", "shift", "career"})) at(GoalTag::Work) += 1.0 * s;
    if (has_cue(text, {"health", "run", "exercis", "fitness", "gym"})) at(GoalTag::Exercise) += 1.2 * s;
    if (has_cue(text, {"humanit", "literature", "interdisciplin", "philosoph"})) {
      at(GoalTag::Learning) += 0.5 * s;
      at(GoalTag::Creative) += 0.5 * s;
    }
    if (has_cue(text, {"relax", "free", "authentic", "calm", "unwind"})) at(GoalTag::Relaxation) += 0.8 * s;
    if (has_cue(text, {"friend", "social", "community", "connect", "together"})) at(GoalTag::Social) += 0.6 * s;
  };
  boost(persona, 1.0);
  boost(insight, 1.2);
  at(GoalTag::Meal) = 0;
  at(GoalTag::Rest) = 0;
  if (acquaintances.empty()) at(GoalTag::Appointment) = 0;
  for (auto g : all_goals()) {
    auto& wg = at(g);
    if (wg <= 0) continue;
    if (affording(g).empty()) {
      wg = 0;
      continue;
    }
    wg *= 1.0 + 0.05 * (unit(key(seed, {"mem", memory, goal_name(g)})) - 0.5);
  }

  const auto h = key(seed, {"plan", persona, insight});
  const int total = 5 + static_cast<int>(h % 5);
  const bool lunch = total >= 7;
  const int k = total - (lunch ? 3 : 2) - 1;

  std::vector<GoalTag> picks;
  std::array<int, kGoalCount> used{};
  for (int i = 0; i < k; ++i) {
    std::vector<std::pair<GoalTag, double>> options;
    double sum = 0;
    for (auto g : all_goals()) {
      double wg = at(g);
      int cap = 3;
      if (g == GoalTag::Appointment) cap = 1;
      if (g == GoalTag::Social && e < 0) cap = 1;
      if (wg <= 0 || used[static_cast<std::size_t>(g)] >= cap) continue;
      options.emplace_back(g, wg);
      sum += wg;
    }
    if (options.empty()) break;
    double u = unit(key(seed, {"pick", persona, insight, std::to_string(i)})) * sum;
    GoalTag chosen = options.back().first;
    for (const auto& [g, wg] : options) {
      if (u < wg) {
        chosen = g;
        break;
      }
      u -= wg;
    }
    picks.push_back(chosen);
    ++used[static_cast<std::size_t>(chosen)];
  }
  if (e >= 1 && !picks.empty() && !affording(GoalTag::Social).empty() &&
      std::none_of(picks.begin(), picks.end(), [](GoalTag g) { return g == GoalTag::Social || g == GoalTag::Appointment; })) {
    picks.back() = GoalTag::Social;
  }

  std::vector<Draft> seq;
  auto make = [&](GoalTag g, int i, const std::string& label) {
    Draft d{g, home, "", motivation_for(g, ultimate), base_duration(g), std::nullopt};
    auto hi = key(seed, {"slot", persona, insight, std::to_string(i)});
    d.duration += 15 * (static_cast<int>(hi % 3) - 1);
    auto cands = affording(g);
    std::vector<const PlaceInfo*> preferred;
    for (auto* p : cands) {
      if (matches_any(p->id, venues)) preferred.push_back(p);
    }
    const auto& from = preferred.empty() ? cands : preferred;
    if (!from.empty()) d.place = from[(hi >> 8) % from.size()]->id;
    if (g == GoalTag::Meal) {
      d.description = label;
      if (label == "Have breakfast") d.duration = 30;
    } else if (g == GoalTag::Appointment) {
      const json& partner = acquaintances[(hi >> 16) % acquaintances.size()];
      d.partner = get_str(partner, "id");
      d.description = "Meet " + get_str(partner, "name", *d.partner) + " to talk about " + shared_topic(hobbies, partner);
      d.motivation = "catch up with " + get_str(partner, "name", *d.partner);
    } else {
      const auto& acts = activities(g, dom, humanities && g != GoalTag::Creative ? true : humanities, e > 0);
      d.description = acts[(hi >> 24) % acts.size()];
    }
    return d;
  };

  int i = 0;
  seq.push_back(make(GoalTag::Meal, i++, "Have breakfast"));
  const std::size_t half = (picks.size() + 1) / 2;
  for (std::size_t p = 0; p < half; ++p) seq.push_back(make(picks[p], i++, ""));
  if (lunch) seq.push_back(make(GoalTag::Meal, i++, "Have lunch"));
  for (std::size_t p = half; p < picks.size(); ++p) seq.push_back(make(picks[p], i++, ""));
  seq.push_back(make(GoalTag::Meal, i++, "Have dinner"));
  seq.push_back(make(GoalTag::Rest, i++, ""));

  auto travel = [&](const std::string& a, const std::string& b) {
    if (a == b) return 0;
    const auto* pa = find_place(places, a);
    const auto* pb = find_place(places, b);
    if (!pa || !pb) return tick;
    int dist = std::abs(pa->x - pb->x) + std::abs(pa->y - pb->y);
    return static_cast<int>(std::ceil(dist / speed)) * tick;
  };
  std::vector<int> gaps;
  std::string prev = home;
  for (const auto& d : seq) {
    gaps.push_back(travel(prev, d.place));
    prev = d.place;
  }
  const int day_start = 7 * 60;
  const int day_end = 23 * 60;
  const int budget = day_end - day_start;
  int sum_gap = 0, sum_dur = 0;
  for (std::size_t j = 0; j < seq.size(); ++j) {
    sum_gap += gaps[j];
    sum_dur += seq[j].duration;
  }
  if (sum_gap + sum_dur > budget) {
    double scale = static_cast<double>(budget - sum_gap) / sum_dur;
    sum_dur = 0;
    for (auto& d : seq) {
      d.duration = std::max(30, static_cast<int>(d.duration * scale) / 15 * 15);
      sum_dur += d.duration;
    }
    while (sum_gap + sum_dur > budget) {
      auto longest = std::max_element(seq.begin(), seq.end(),
                                      [](const Draft& a, const Draft& b) { return a.duration < b.duration; });
      if (longest->duration <= 30) break;
      longest->duration -= 15;
      sum_dur -= 15;
    }
  }

  json entries = json::array();
  int t = day_start;
  for (std::size_t j = 0; j < seq.size(); ++j) {
    const auto& d = seq[j];
    int start = t + (j == 0 ? 0 : gaps[j]);
    if (j == 0) start = std::max(start, 360 + gaps[0]);
    int end = start + d.duration;
    if (j + 1 == seq.size()) {
      start = std::max(start, day_end - d.duration);
      end = day_end;
    }
    json entry = {{"start", format_hhmm(start)},
                  {"end", format_hhmm(end)},
                  {"goal", goal_name(d.goal)},
                  {"place", d.place},
                  {"description", d.description},
                  {"motivation", d.motivation}};
    if (d.partner) entry["partner"] = *d.partner;
    entries.push_back(entry);
    t = end;
  }
  return {{"entries", entries}};
}

json plan_revise(const json& c, std::uint64_t seed) {
  const std::string persona = text_of(c.at("character"));
  const auto places = parse_places(c.at("places"));
  const std::vector<std::string> venues = list_after(persona, "Venue preference: ");
  json remaining = c.at("remaining");
  json out = json::array();
  for (const auto& r : remaining) {
    json e = {{"start", get_str(r, "start")}, {"end", get_str(r, "end")}, {"goal", get_str(r, "goal")},
              {"place", get_str(r, "place")}, {"description", get_str(r, "description")},
              {"motivation", get_str(r, "motivation")}};
    if (r.contains("partner") && r.at("partner").is_string()) e["partner"] = r.at("partner");
    out.push_back(e);
  }
  if (out.empty()) return {{"entries", out}};

  if (c.contains("candidates") && c.at("candidates").is_array() && !c.at("candidates").empty()) {
    std::vector<std::string> cands = c.at("candidates").get<std::vector<std::string>>();
    std::string chosen = cands.front();
    for (const auto& id : cands) {
      if (matches_any(id, venues)) {
        chosen = id;
        break;
      }
    }
    auto slash = chosen.find('/');
    std::string name = slash == std::string::npos ? chosen : chosen.substr(slash + 1);
    out[0]["place"] = chosen;
    out[0]["description"] = get_str(out[0], "description") + " (moved to the " + name + ")";
    return {{"entries", json::array({out[0]})}};
  }

  int from = 4, to = 4;
  if (c.contains("emotion")) {
    from = c.at("emotion").value("from", 4);
    to = c.at("emotion").value("to", 4);
  }
  auto h = key(seed, {"revise", persona, canonical_dump(remaining), std::to_string(to)});
  auto choose = [&](const std::string& goal, std::initializer_list<std::string_view> words) -> const PlaceInfo* {
    std::vector<const PlaceInfo*> any, pref;
    for (const auto& p : places) {
      if (!p.affordances.count(goal)) continue;
      if (goal == "Social" && p.capacity < 2) continue;
      any.push_back(&p);
      std::string l = lower(p.id);
      for (auto w : words) {
        if (l.find(w) != std::string::npos) {
          pref.push_back(&p);
          break;
        }
      }
    }
    if (!pref.empty()) return pref[h % pref.size()];
    if (!any.empty()) return any[h % any.size()];
    return nullptr;
  };
  json& first = out[0];
  first.erase("partner");
  if (to < from) {
    if (const auto* p = choose("Relaxation", {"square", "park", "garden", "lake"})) {
      first["goal"] = "Relaxation";
      first["place"] = p->id;
      first["description"] = "Go to the " + p->name + " to calm down and sort out feelings";
    } else {
      first["description"] = "Take it slow: " + lower_first(get_str(first, "description"));
    }
    first["motivation"] = "feeling low and needing some space";
  } else if (to > from) {
    bool social = extraversion_level(persona) >= 0;
    const PlaceInfo* p = social ? choose("Social", {"cafe", "square", "bar", "park"}) : nullptr;
    if (p) {
      first["goal"] = "Social";
      first["place"] = p->id;
      first["description"] = "Share the good mood with friends at the " + p->name;
    } else if ((p = choose("Creative", {"library", "studio", "dorm"}))) {
      first["goal"] = "Creative";
      first["place"] = p->id;
      first["description"] = "Channel the good mood into a creative project";
    }
    first["motivation"] = "riding a wave of good feeling";
  }
  return {{"entries", out}};
}

// ---- appointments -------------------------------------------------------

json invite_send(const json& c) {
  const std::string persona = text_of(c.at("character"));
  const json& invitee = c.at("invitee");
  std::string topic;
  if (c.contains("entry")) {
    std::string desc = get_str(c.at("entry"), "description");
    auto pos = desc.find("talk about ");
    if (pos != std::string::npos) topic = desc.substr(pos + 11);
  }
  if (topic.empty()) topic = shared_topic(list_after(persona, "Hobbies: "), invitee);
  std::string name = get_str(invitee, "name", get_str(invitee, "id"));
  return {{"topic", topic}, {"reason", "Wants to hear " + name + "'s view on " + topic}};
}

double round3(double x) { return std::round(x * 1000.0) / 1000.0; }

std::string trait_gist(const json& card) {
  std::string t = lower_first(get_str(card, "traits"));
  auto cut = t.find_first_of(";.");
  if (cut != std::string::npos) t = t.substr(0, cut);
  return truncate_words(t, 6);
}

json invite_decide(const json& c, std::uint64_t seed) {
  const std::string persona = text_of(c.at("character"));
  const json& inv = c.at("invitation");
  const json& from = inv.at("from");
  const std::string topic = get_str(inv, "topic");
  const std::string from_name = get_str(from, "name", get_str(from, "id"));
  double bn = 0.3 + 0.6 * unit(key(seed, {"benefit", get_str(from, "id"), topic, persona}));
  for (const auto& w : lexicon::content_words(topic)) {
    if (lower(persona).find(w) != std::string::npos) {
      bn += 0.1;
      break;
    }
  }
  bn = round3(std::min(1.0, bn));

  const json* confirmed = nullptr;
  const json* soft = nullptr;
  for (const auto& x : c.at("conflicts")) {
    if (x.value("confirmed", false) && get_str(x, "goal") == "Appointment") {
      if (!confirmed) confirmed = &x;
    } else if (!soft) {
      soft = &x;
    }
  }
  const std::string why = from_name + " is " + trait_gist(from);
  if (confirmed) {
    double be = round3(0.3 + 0.6 * unit(key(seed, {"benefit", get_str(*confirmed, "partner"),
                                                  get_str(*confirmed, "description"), persona})));
    bool accept = bn > be;
    std::string reason = accept ? "Accepts and moves the earlier meeting: " + why + ", and " + topic + " matters more today"
                                : "Declines: already promised to " + lower_first(get_str(*confirmed, "description"));
    return {{"accept", accept}, {"reason", reason}, {"benefit_new", bn}, {"benefit_existing", be}};
  }
  double threshold = soft ? 0.45 : 0.4;
  bool accept = bn >= threshold;
  std::string reason;
  if (accept) {
    reason = "Accepts: " + why + ", which makes a conversation about " + topic + " appealing";
  } else if (soft) {
    reason = "Declines: would rather keep to " + lower_first(get_str(*soft, "description"));
  } else {
    reason = "Declines: not in the mood for " + topic + " today";
  }
  return {{"accept", accept}, {"reason", reason}, {"benefit_new", bn}};
}

// ---- actions and emotion --------------------------------------------------

json action_describe(const json& c, std::uint64_t seed) {
  const json& agent = c.at("agent");
  const json& entry = c.at("entry");
  std::string name = get_str(agent, "name", get_str(agent, "id"));
  std::string place_name = c.contains("place") ? get_str(c.at("place"), "name") : get_str(entry, "place");
  std::string goal = get_str(entry, "goal");
  std::string text = name + " is " + gerund(get_str(entry, "description")) + " at the " + place_name + ".";
  static const std::map<std::string, std::vector<std::string>> detail = {
      {"Learning", {" Notes pile up as the material slowly makes sense.", " Focus holds for most of the session."}},
      {"Work", {" The task list gets shorter.", " Work moves at a steady pace."}},
      {"Exercise", {" Breathing hard, but moving well.", " The body warms up quickly."}},
      {"Relaxation", {" The pace of the day slows down.", " Shoulders drop a little."}},
      {"Social", {" Conversations start easily.", " There is laughter around the table."}},
      {"Appointment", {" The two settle in to talk.", " They find a quiet corner."}},
      {"Meal", {" The food is simple and warm.", " The meal is quick."}},
      {"Rest", {" The lights go off early.", " The room is quiet."}},
      {"Creative", {" Ideas come in bursts.", " Pages slowly fill up."}},
      {"Errand", {" The errand takes less time than expected.", " A small line forms."}}};
  auto it = detail.find(goal);
  if (it != detail.end()) text += pick(it->second, key(seed, {"describe", name, text}));
  return {{"text", text}};
}

json emotion_update(const json& c, std::uint64_t seed) {
  const std::string persona = text_of(c.at("character"));
  const std::string action = get_str(c, "action");
  const json& previous = c.at("previous");
  const int prev = previous.is_object() ? previous.value("category", 4) : previous.is_number() ? previous.get<int>() : 4;
  auto h = key(seed, {"emotion", persona, action, std::to_string(prev)});
  int pos = count_cues(action, {"writ", "novel", "creat", "friend", "chat", "relax", "music", "walk",
                                "laugh", "celebrat", "meet", "party", "paint", "film", "enjoy", "game",
                                "cook", "literature", "square", "unwind", "talk"});
  int neg = count_cues(action, {"debug", "deadline", "exam", "crowd", "occupied", "full", "cancel", "argu",
                                "lonely", "tired", "fail", "reject", "pressure", "errand"});
  int category = 4 + std::min(2, pos) - std::min(2, neg) + static_cast<int>(h % 3) - 1;
  bool mismatch = tech_cue(action) && !tech_cue(persona);
  if (mismatch) category -= 2;
  if (has_cue(action, {"novel", "chapter"})) category += 2;
  category = std::clamp(category, 1, 7);

  std::string gist;
  auto is = action.find(" is ");
  if (is != std::string::npos) {
    gist = action.substr(is + 4);
    auto cut = gist.find(" at the ");
    if (cut == std::string::npos) cut = gist.find('.');
    gist = gist.substr(0, cut);
  } else {
    gist = lower_first(trim_period(truncate_words(action, 10)));
  }
  static const std::array<const char*, 8> adj = {"", "hopeless", "afraid", "uneasy", "calm", "content", "happy", "excited"};
  std::string feeling;
  if (mismatch) {
    feeling = "I feel anxious and self-doubtful while " + gist + ", as if I do not belong here.";
  } else if (category >= 5) {
    feeling = std::string("I feel ") + adj[category] + " about " + gist + ".";
  } else if (category <= 3) {
    feeling = std::string("I feel ") + adj[category] + " after " + gist + ".";
  } else {
    feeling = "I feel calm while " + gist + ".";
  }
  return {{"category", category}, {"feeling", feeling}};
}

// ---- dialogue ---------------------------------------------------------------

std::string core_of(const std::string& topic) {
  std::string t = topic;
  auto hash = t.find(" #");
  if (hash != std::string::npos) t = t.substr(0, hash);
  auto paren = t.find(" (following up on:");
  if (paren != std::string::npos) t = t.substr(0, paren);
  return normalize_ws(t);
}

json dialog_topic(const json& c, std::uint64_t seed) {
  const std::string persona = text_of(c.at("character"));
  const json& partner = c.at("partner");
  const json& history = c.at("history");
  if (!history.is_array() || history.empty()) {
    return {{"topic", "getting to know each other: " + shared_topic(list_after(persona, "Hobbies: "), partner)}};
  }
  static const std::vector<std::string> facets = {
      "what it means for creativity",         "how it affects mental health",
      "the social pressure around it",        "turning it into a concrete plan",
      "where technology and the humanities meet in it", "what a free and authentic life looks like",
      "how friends can support it",           "the doubts behind it",
      "what we would change first",           "how it shapes our future work"};
  std::set<std::string> seen;
  for (const auto& r : history) seen.insert(get_str(r, "topic"));
  const std::string latest = core_of(get_str(history.back(), "topic"));
  auto h = key(seed, {"topic", persona, get_str(partner, "id"), std::to_string(history.size())});
  for (std::size_t i = 0; i < facets.size(); ++i) {
    const auto& f = facets[(h + i) % facets.size()];
    if (f == latest) continue;
    std::string topic = f + " (following up on: " + latest + ")";
    if (!seen.count(topic)) return {{"topic", topic}};
  }
  return {{"topic", facets[h % facets.size()] + " (following up on: " + latest + ")"}};
}

json dialog_turn(const json& c, std::uint64_t seed) {
  const json& speaker = c.at("speaker");
  const json& listener = c.at("listener");
  const std::string topic = core_of(get_str(c, "topic"));
  const json& turns = c.at("turns");
  const std::size_t n = turns.is_array() ? turns.size() : 0;
  const int max_turns = c.value("max_turns", 6);
  auto h = key(seed, {"turn", get_str(speaker, "id"), get_str(c, "topic"), std::to_string(n)});
  std::string interest = "my own work";
  if (speaker.contains("interests") && !speaker.at("interests").empty()) {
    const auto& ints = speaker.at("interests");
    interest = ints[(h >> 8) % ints.size()].get<std::string>();
  }
  const std::string other = get_str(listener, "name", get_str(listener, "id"));
  std::vector<std::string> lines = {
      other + ", when it comes to " + topic + ", I keep thinking about " + interest + ".",
      "I see it a bit differently: " + topic + " needs more room for " + interest + ".",
      "That resonates with me. How do you handle " + topic + " day to day?",
      "Maybe we can try something concrete about " + topic + " this week.",
      "Honestly, " + topic + " has been on my mind since yesterday."};
  std::string utterance = n == 0 ? "Hi " + other + "! I wanted to talk about " + topic + "." : pick(lines, h);
  bool end = (n + 1 >= static_cast<std::size_t>(max_turns)) || (n >= 3 && h % 3 == 0);
  return {{"utterance", utterance}, {"end", end}};
}

json dialog_summary(const json& c, std::uint64_t seed) {
  const json& self = c.at("character");
  const json& partner = c.at("partner");
  const std::string topic = core_of(get_str(c, "topic"));
  const std::string other = get_str(partner, "name", get_str(partner, "id"));
  std::string interest = "my own plans";
  if (self.is_object() && self.contains("interests") && !self.at("interests").empty()) {
    interest = self.at("interests")[key(seed, {"summary", get_str(self, "id"), topic}) % self.at("interests").size()]
                   .get<std::string>();
  }
  return {{"summary", "I talked with " + other + " about " + topic + ". It made me think about " + interest +
                          " and how " + other + " sees things."}};
}

json partner_select(const json& c, std::uint64_t seed) {
  const std::string persona = lower(text_of(c.at("character")));
  const json& cands = c.at("candidates");
  double best = -1e9;
  std::string chosen, reason;
  for (const auto& cand : cands) {
    std::string id = get_str(cand, "id");
    double score = 0;
    std::string hit;
    for (const auto& i : cand.value("interests", json::array())) {
      std::string interest = i.get<std::string>();
      for (const auto& w : lexicon::content_words(interest)) {
        if (persona.find(w) != std::string::npos) {
          score += 1;
          if (hit.empty()) hit = interest;
        }
      }
    }
    score -= 0.1 * cand.value("conversations", 0);
    score += 0.5 * unit(key(seed, {"partner", persona, id}));
    if (score > best) {
      best = score;
      chosen = id;
      std::string name = get_str(cand, "name", id);
      if (hit.empty()) {
        const auto& ints = cand.value("interests", json::array());
        hit = ints.empty() ? "new ideas" : ints.front().get<std::string>();
      }
      reason = "Drawn to " + name + "'s interest in " + hit;
    }
  }
  return {{"partner", chosen}, {"reason", reason}};
}

// ---- memory, insight, growth ----------------------------------------------

std::set<std::string> stems(std::string_view text) {
  std::set<std::string> out;
  for (const auto& w : lexicon::content_words(text)) out.insert(w.substr(0, std::min<std::size_t>(5, w.size())));
  return out;
}

int overlap(const std::set<std::string>& a, const std::set<std::string>& b) {
  int n = 0;
  for (const auto& x : a) n += b.count(x) ? 1 : 0;
  return n;
}

json memory_filter(const json& c) {
  const json& ch = c.at("character");
  std::vector<std::pair<std::string, std::set<std::string>>> dims;
  for (const char* d : {"conflict", "traits", "preference", "current_state"}) {
    std::string t = ch.is_object() ? get_str(ch, d) : "";
    dims.emplace_back(d, stems(t));
  }
  if (!ch.is_object()) dims[0].second = stems(text_of(ch));

  struct Scored {
    int index;
    int score;
    std::string salience;
    std::string summary;
  };
  std::vector<Scored> scored;
  for (const auto& r : c.at("records")) {
    int idx = r.value("index", 0);
    std::string text = get_str(r, "text");
    int emotion = r.value("emotion", 4);
    auto s = stems(text);
    int best = 0;
    std::string salience = "emotion";
    for (const auto& [name, st] : dims) {
      int o = overlap(s, st);
      if (o > best) {
        best = o;
        salience = name;
      }
    }
    bool extreme = emotion <= 2 || emotion >= 6;
    int score = 2 * best + (extreme ? 3 : 0);
    if (score == 0) continue;
    std::string summary = trim_period(text) + ". I felt " + lower(get_str(r, "label", "calm")) + ".";
    scored.push_back({idx, score, salience, summary});
  }
  std::stable_sort(scored.begin(), scored.end(), [](const Scored& a, const Scored& b) { return a.score > b.score; });
  if (scored.size() > 6) scored.resize(6);
  std::sort(scored.begin(), scored.end(), [](const Scored& a, const Scored& b) { return a.index < b.index; });
  json out = json::array();
  for (const auto& s : scored) out.push_back({{"index", s.index}, {"summary", s.summary}, {"salience", s.salience}});
  return {{"memories", out}};
}

json memory_blur(const json& c) {
  const json& records = c.at("records");
  int lo = 1 << 30, hi = -(1 << 30);
  std::vector<std::string> bits;
  for (const auto& r : records) {
    lo = std::min(lo, r.value("day_from", 0));
    hi = std::max(hi, r.value("day_to", 0));
    if (bits.size() < 3) bits.push_back(trim_period(truncate_words(get_str(r, "summary"), 5)));
  }
  if (records.empty()) lo = hi = 0;
  return {{"summary", "Hazy memories from day " + std::to_string(lo) + " to day " + std::to_string(hi) + ": " +
                          join(bits, "; ") + "..."}};
}

const char* insight_sentence(Theme t) {
  switch (t) {
    case Theme::Interdisciplinary:
      return "Technical breakthroughs are not everything; care for people and the humanities matter too, and bringing technology and the humanities together may be my way forward.";
    case Theme::Health:
      return "Life encompasses more than work or academics, and keeping up health and happiness deserves real time.";
    case Theme::Authenticity:
      return "I want to live in a freer and more authentic way instead of performing for others.";
    case Theme::Creativity:
      return "Protecting time to create keeps me grounded, even under social pressure.";
    case Theme::Social:
      return "Real conversations with friends gave me energy and new perspectives, and I could be more open with people.";
    case Theme::Work:
      return "Steady work moved me forward, but I should not let it crowd out everything else.";
  }
  return "";
}

json insight(const json& c, std::uint64_t seed) {
  std::vector<std::string> events;
  for (const auto& e : c.at("events")) events.push_back(e.is_string() ? e.get<std::string>() : text_of(e));
  std::string all = join(events, " ") + " " + text_of(c.at("memories"));
  int day = c.value("day", 0);
  auto h = key(seed, {"insight", all, std::to_string(day)});
  Theme t = top_theme(all, h);
  std::string gist;
  int best = -1;
  for (const auto& e : events) {
    int s = theme_score(e, t);
    if (s > best) {
      best = s;
      gist = e;
    }
  }
  std::string text = insight_sentence(t);
  if (!gist.empty()) text += " What stayed with me on day " + std::to_string(day) + ": " + trim_period(truncate_words(gist, 14)) + ".";
  return {{"text", text}};
}

const char* state_phrase(Theme t) {
  switch (t) {
    case Theme::Interdisciplinary:
      return "exploring how technology and the humanities connect";
    case Theme::Health:
      return "paying more attention to health and happiness, since life encompasses more than work or academics";
    case Theme::Authenticity:
      return "trying to live in a freer and more authentic way";
    case Theme::Creativity:
      return "protecting creative time against social pressure";
    case Theme::Social:
      return "investing in deeper friendships";
    case Theme::Work:
      return "pushing steadily on current projects";
  }
  return "";
}

const char* trait_phrase(Theme t) {
  switch (t) {
    case Theme::Interdisciplinary:
      return "more curious and reflective, drawn to literature and philosophy";
    case Theme::Health:
      return "calmer and more disciplined about daily habits";
    case Theme::Authenticity:
      return "more relaxed and confident, less worried about what others think";
    case Theme::Creativity:
      return "more imaginative and expressive";
    case Theme::Social:
      return "warmer and more talkative with friends";
    case Theme::Work:
      return "more focused and organized, though sometimes tense";
  }
  return "";
}

const char* conflict_phrase(Theme t) {
  switch (t) {
    case Theme::Interdisciplinary:
      return "wonders how to integrate technology with the humanities without losing depth.";
    case Theme::Health:
      return "struggles to balance ambition with rest and health.";
    case Theme::Authenticity:
      return "wants to be free and authentic rather than always performing for others.";
    case Theme::Creativity:
      return "fears that creativity will fade under social pressure.";
    case Theme::Social:
      return "wants closeness with friends but also time alone.";
    case Theme::Work:
      return "worries that work is crowding out everything else.";
  }
  return "";
}

const char* step_phrase(Theme t) {
  switch (t) {
    case Theme::Interdisciplinary:
      return "take a humanities elective alongside technical work";
    case Theme::Health:
      return "keep a regular sleep and exercise routine";
    case Theme::Authenticity:
      return "spend time on things that feel genuinely mine";
    case Theme::Creativity:
      return "block out protected hours for creative work";
    case Theme::Social:
      return "have one honest conversation with a friend each day";
    case Theme::Work:
      return "finish the most important project task first";
  }
  return "";
}

const char* theme_hobby(Theme t) {
  switch (t) {
    case Theme::Interdisciplinary:
      return "reading literature";
    case Theme::Health:
      return "running";
    case Theme::Authenticity:
      return "quiet walks";
    case Theme::Creativity:
      return "journaling";
    case Theme::Social:
      return "coffee with friends";
    case Theme::Work:
      return "side projects";
  }
  return "";
}

const char* theme_venue(Theme t) {
  switch (t) {
    case Theme::Interdisciplinary:
      return "library";
    case Theme::Health:
      return "gym";
    case Theme::Authenticity:
      return "square";
    case Theme::Creativity:
      return "studio";
    case Theme::Social:
      return "cafe";
    case Theme::Work:
      return "lab";
  }
  return "";
}

std::string before_marker(const std::string& text, std::string_view marker) {
  auto pos = text.find(marker);
  return pos == std::string::npos ? text : text.substr(0, pos);
}

struct GrowthThemes {
  Theme primary;
  Theme secondary;
};

GrowthThemes growth_themes(const json& c, std::uint64_t seed) {
  std::string ins = get_str(c, "insight");
  std::string summary = get_str(c, "day_summary");
  auto h = key(seed, {"growth", ins, summary});
  Theme a = top_theme(ins, h);
  Theme b = top_theme(summary, h >> 8, a);
  return {a, b};
}

json growth(PromptKind kind, const json& c, std::uint64_t seed) {
  const json& ch = c.at("character");
  auto [t1, t2] = growth_themes(c, seed);
  switch (kind) {
    case PromptKind::GrowthState: {
      std::string core = trim_period(before_marker(get_str(ch, "current_state"), " Lately, ")) + ".";
      return {{"current_state", core + " Lately, " + state_phrase(t1) + ", and " + state_phrase(t2) + "."}};
    }
    case PromptKind::GrowthFeature: {
      std::string core = trim_period(before_marker(get_str(ch, "traits"), " Recently ")) + ".";
      return {{"traits", core + " Recently " + trait_phrase(t1) + "."}};
    }
    case PromptKind::GrowthConflict: {
      std::string core = trim_period(before_marker(get_str(ch, "conflict"), " Now ")) + ".";
      return {{"conflict", core + " Now " + conflict_phrase(t1)}};
    }
    case PromptKind::GrowthPreference: {
      PreferenceSet p;
      if (c.contains("preference") && c.at("preference").is_object()) {
        p = c.at("preference").get<PreferenceSet>();
      } else {
        std::string text = get_str(ch, "preference");
        p.ultimate_goal = field_after(text, "Ultimate goal: ");
        p.long_term_goal = field_after(text, "Long-term goal: ");
        p.daily_routine = field_after(text, "Daily routine: ");
        p.hobbies = list_after(text, "Hobbies: ");
        p.venue_preference = list_after(text, "Venue preference: ");
      }
      p.short_term_goal = "This week, as a step to " + p.ultimate_goal + ", " + step_phrase(t1);
      std::vector<std::string> hobbies(p.hobbies.begin(), p.hobbies.begin() + std::min<std::size_t>(3, p.hobbies.size()));
      if (std::find(hobbies.begin(), hobbies.end(), theme_hobby(t1)) == hobbies.end()) hobbies.emplace_back(theme_hobby(t1));
      p.hobbies = hobbies;
      std::vector<std::string> venues(p.venue_preference.begin(),
                                      p.venue_preference.begin() + std::min<std::size_t>(4, p.venue_preference.size()));
      if (std::find(venues.begin(), venues.end(), theme_venue(t1)) == venues.end()) venues.emplace_back(theme_venue(t1));
      p.venue_preference = venues;
      return {{"preference", p}};
    }
    default:
      break;
  }
  throw BackendError("scripted: not a growth kind");
}

// ---- questionnaire, chat ------------------------------------------------------

json bfi_fill(const json& c, std::uint64_t seed) {
  using eval::BigFiveDim;
  const auto& items = eval::bfi_items();
  json sheets = json::array();
  for (const auto& d : c.at("days")) {
    const std::string text = text_of(d.at("character"));
    std::array<int, 5> latent{};
    for (int i = 0; i < 5; ++i) {
      latent[static_cast<std::size_t>(i)] =
          std::clamp(lexicon::cue_balance(text, static_cast<lexicon::Trait>(i)), -2, 2);
    }
    std::vector<int> answers;
    for (const auto& item : items) {
      int base = 3 + latent[static_cast<std::size_t>(item.dim)];
      auto h = key(seed, {"bfi", text, std::to_string(item.number)});
      int jitter = h % 5 == 0 ? -1 : (h % 5 == 4 ? 1 : 0);
      int agree = std::clamp(base + jitter, 1, 5);
      answers.push_back(item.reverse ? 6 - agree : agree);
    }
    sheets.push_back({{"day", d.at("day")}, {"answers", answers}});
  }
  return {{"sheets", sheets}};
}

json chat_reply(const json& c, std::uint64_t seed) {
  const std::string persona = text_of(c.at("character"));
  const std::string message = get_str(c, "message");
  std::string name = c.contains("agent") ? get_str(c.at("agent"), "name") : "";
  auto h = key(seed, {"chat", persona, message});
  auto hobbies = list_after(persona, "Hobbies: ");
  std::string hobby = hobbies.empty() ? "my usual routine" : pick(hobbies, h >> 8);
  std::string quoted = trim_period(truncate_words(message, 10));
  std::vector<std::string> replies = {
      "Good question. About \"" + quoted + "\": lately I have been thinking a lot about " + hobby + ".",
      "Thanks for asking. Honestly, \"" + quoted + "\" is something I am still figuring out.",
      "Ha, \"" + quoted + "\"? Let me put it this way: " + lower_first(lexicon::first_sentence(persona))};
  std::string reply = pick(replies, h);
  if (!name.empty()) reply = name + " here. " + reply;
  return {{"reply", reply}};
}

}  // namespace

json ScriptedBackend::generate(const PromptRequest& request) {
  const json& c = request.context;
  try {
    switch (request.kind) {
      case PromptKind::CharInit:
        return char_init(c, seed_);
      case PromptKind::CharSummary:
        return char_summary(c);
      case PromptKind::PlanDay:
        return plan_day(c, seed_);
      case PromptKind::PlanRevise:
        return plan_revise(c, seed_);
      case PromptKind::InviteSend:
        return invite_send(c);
      case PromptKind::InviteDecide:
        return invite_decide(c, seed_);
      case PromptKind::ActionDescribe:
        return action_describe(c, seed_);
      case PromptKind::EmotionUpdate:
        return emotion_update(c, seed_);
      case PromptKind::DialogTopic:
        return dialog_topic(c, seed_);
      case PromptKind::DialogTurn:
        return dialog_turn(c, seed_);
      case PromptKind::DialogSummary:
        return dialog_summary(c, seed_);
      case PromptKind::PartnerSelect:
        return partner_select(c, seed_);
      case PromptKind::MemoryFilter:
        return memory_filter(c);
      case PromptKind::MemoryBlur:
        return memory_blur(c);
      case PromptKind::Insight:
        return insight(c, seed_);
      case PromptKind::GrowthState:
      case PromptKind::GrowthFeature:
      case PromptKind::GrowthConflict:
      case PromptKind::GrowthPreference:
        return growth(request.kind, c, seed_);
      case PromptKind::BfiFill:
        return bfi_fill(c, seed_);
      case PromptKind::ChatReply:
        return chat_reply(c, seed_);
    }
  } catch (const json::exception& e) {
    throw BackendError(std::string("scripted ") + std::string(kind_name(request.kind)) + ": " + e.what());
  }
  throw BackendError("scripted: unknown kind");
}

}  // namespace psim::lm
