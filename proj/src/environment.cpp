#include "psim/environment.hpp"

#include <algorithm>
#include <charconv>
#include <cstdlib>
#include <set>
#include <sstream>

namespace psim {
namespace {

// Splits CSV text into records of fields (RFC 4180 quoting, CRLF or LF).
// Returns the physical row number at which each record starts.
std::vector<std::pair<int, std::vector<std::string>>> split_csv(std::string_view text) {
  std::vector<std::pair<int, std::vector<std::string>>> rows;
  std::vector<std::string> fields;
  std::string field;
  bool quoted = false;
  bool any = false;
  int line = 1;
  int record_line = 1;
  for (std::size_t i = 0; i < text.size(); ++i) {
    char c = text[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        if (c == '\n') ++line;
        field.push_back(c);
      }
      continue;
    }
    switch (c) {
      case '"':
        quoted = true;
        any = true;
        break;
      case ',':
        fields.push_back(std::move(field));
        field.clear();
        any = true;
        break;
      case '\r':
        break;
      case '\n':
        if (any || !field.empty()) {
          fields.push_back(std::move(field));
          rows.emplace_back(record_line, std::move(fields));
        }
        fields.clear();
        field.clear();
        any = false;
        record_line = ++line;
        break;
      default:
        field.push_back(c);
        any = true;
    }
  }
  if (any || !field.empty()) {
    fields.push_back(std::move(field));
    rows.emplace_back(record_line, std::move(fields));
  }
  return rows;
}

std::string trim(std::string_view s) {
  auto b = s.find_first_not_of(" \t");
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(" \t");
  return std::string(s.substr(b, e - b + 1));
}

std::optional<int> parse_int(std::string_view s) {
  int v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

std::string csv_quote(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

}  // namespace

bool Place::affords(GoalTag g) const {
  return std::find(affordances.begin(), affordances.end(), g) != affordances.end();
}

const Place* WorldMap::find(std::string_view place_id) const {
  for (const auto& p : places) {
    if (p.id() == place_id) return &p;
  }
  return nullptr;
}

const Place& WorldMap::at(std::string_view place_id) const {
  if (const Place* p = find(place_id)) return *p;
  throw LookupError("unknown place '" + std::string(place_id) + "'");
}

WorldMap load_world(std::string_view csv, const WorldOptions& options) {
  if (options.move_speed < 1) throw InputError("move_speed must be >= 1");
  if (options.tick_minutes < 1) throw InputError("tick_minutes must be >= 1");

  WorldMap world;
  world.grid_width = options.grid_width;
  world.grid_height = options.grid_height;
  world.tick_minutes = options.tick_minutes;
  world.move_speed = options.move_speed;

  auto rows = split_csv(csv);
  if (rows.empty()) throw ParseError(1, "missing header");
  {
    std::vector<std::string> expected;
    std::istringstream in{std::string(kWorldCsvHeader)};
    for (std::string col; std::getline(in, col, ',');) expected.push_back(col);
    const auto& header = rows.front().second;
    for (std::size_t i = 0; i < header.size(); ++i) {
      std::string col = trim(header[i]);
      if (i == 0 && col.rfind("\xEF\xBB\xBF", 0) == 0) col = col.substr(3);
      if (std::find(expected.begin(), expected.end(), col) == expected.end()) {
        throw ParseError(rows.front().first, "unknown column '" + col + "'");
      }
      if (i >= expected.size() || col != expected[i]) {
        throw ParseError(rows.front().first,
                         "header must be exactly: " + std::string(kWorldCsvHeader));
      }
    }
    if (header.size() != expected.size()) {
      throw ParseError(rows.front().first, "header must be exactly: " + std::string(kWorldCsvHeader));
    }
  }

  std::set<std::string> ids;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const int row = rows[r].first;
    const auto& f = rows[r].second;
    if (f.size() != 9) {
      throw ParseError(row, "expected 9 fields, got " + std::to_string(f.size()));
    }
    Place p;
    p.building = trim(f[0]);
    p.name = trim(f[1]);
    if (p.building.empty()) throw ParseError(row, "empty building name");
    if (p.name.empty()) throw ParseError(row, "empty place name");
    if (p.building.find('/') != std::string::npos || p.name.find('/') != std::string::npos) {
      throw ParseError(row, "names may not contain '/'");
    }

    auto x = parse_int(trim(f[2]));
    auto y = parse_int(trim(f[3]));
    if (!x || !y) throw ParseError(row, "bad coordinate");
    if (*x < 0 || *y < 0 || *x >= world.grid_width || *y >= world.grid_height) {
      throw ParseError(row, "bad coordinate: (" + std::to_string(*x) + "," + std::to_string(*y) +
                                ") outside grid");
    }
    p.x = *x;
    p.y = *y;

    auto cap = parse_int(trim(f[4]));
    if (!cap) throw ParseError(row, "bad capacity");
    if (*cap < 1) throw ParseError(row, "capacity < 1");
    p.capacity = *cap;

    std::istringstream aff(f[5]);
    for (std::string tag; std::getline(aff, tag, ';');) {
      tag = trim(tag);
      if (tag.empty()) continue;
      auto g = parse_goal(tag);
      if (!g) throw ParseError(row, "unknown goal tag '" + tag + "'");
      if (!p.affords(*g)) p.affordances.push_back(*g);
    }
    p.description = trim(f[6]);

    auto open = parse_hhmm(trim(f[7]));
    auto close = parse_hhmm(trim(f[8]));
    if (!open || !close) throw ParseError(row, "bad open/close time (expected HH:MM)");
    if (*open >= *close) throw ParseError(row, "open must be before close");
    p.open = *open;
    p.close = *close;

    if (!ids.insert(p.id()).second) {
      throw ParseError(row, "duplicate place '" + p.name + "' in building '" + p.building + "'");
    }
    if (std::none_of(world.buildings.begin(), world.buildings.end(),
                     [&](const Building& b) { return b.name == p.building; })) {
      world.buildings.push_back({p.building, ""});
    }
    world.places.push_back(std::move(p));
  }
  return world;
}

std::string world_to_csv(const WorldMap& world) {
  std::ostringstream out;
  out << kWorldCsvHeader << "\n";
  for (const auto& p : world.places) {
    std::string aff;
    for (std::size_t i = 0; i < p.affordances.size(); ++i) {
      if (i) aff += ";";
      aff += goal_name(p.affordances[i]);
    }
    out << csv_quote(p.building) << "," << csv_quote(p.name) << "," << p.x << "," << p.y << ","
        << p.capacity << "," << aff << "," << csv_quote(p.description) << ","
        << format_hhmm(p.open) << "," << format_hhmm(p.close) << "\n";
  }
  return out.str();
}

std::vector<const Place*> places_for_goal(const WorldMap& world, GoalTag goal) {
  std::vector<const Place*> out;
  for (const auto& p : world.places) {
    if (p.affords(goal)) out.push_back(&p);
  }
  return out;
}

int manhattan(const Place& a, const Place& b) { return std::abs(a.x - b.x) + std::abs(a.y - b.y); }

int travel_time(const WorldMap& world, std::string_view from, std::string_view to) {
  const Place& a = world.at(from);
  const Place& b = world.at(to);
  if (&a == &b) return 0;
  const int d = manhattan(a, b);
  return (d + world.move_speed - 1) / world.move_speed;
}

WorldDiff diff_worlds(const WorldMap& before, const WorldMap& after) {
  WorldDiff d;
  for (const auto& p : after.places) {
    const Place* old = before.find(p.id());
    if (!old) {
      d.added.push_back(p.id());
    } else if (!(*old == p)) {
      d.changed.push_back(p.id());
    }
  }
  for (const auto& p : before.places) {
    if (!after.find(p.id())) d.removed.push_back(p.id());
  }
  return d;
}

void to_json(json& j, const WorldDiff& d) {
  j = {{"added", d.added}, {"removed", d.removed}, {"changed", d.changed}};
}

void to_json(json& j, const Place& p) {
  std::vector<std::string> aff;
  for (auto g : p.affordances) aff.emplace_back(goal_name(g));
  j = {{"id", p.id()},         {"building", p.building},
       {"place", p.name},      {"x", p.x},
       {"y", p.y},             {"capacity", p.capacity},
       {"affordances", aff},   {"description", p.description},
       {"open", format_hhmm(p.open)}, {"close", format_hhmm(p.close)}};
}

OccupancyLedger::ClaimResult OccupancyLedger::claim_spot(const Place& place, const AgentId& agent,
                                                         std::span<const AgentId> companions) {
  if (place_of(agent)) {
    throw InputError("claim_spot: agent '" + agent + "' already holds a spot");
  }
  std::vector<AgentId> group{agent};
  for (const auto& c : companions) {
    if (c == agent || place_of(c)) continue;
    if (std::find(group.begin(), group.end(), c) == group.end()) group.push_back(c);
  }
  const std::string id = place.id();
  const int used = claimed(id);
  if (used + static_cast<int>(group.size()) > place.capacity) return {false, 0};

  auto& spots = spots_[id];
  for (const auto& member : group) spots.push_back({member, agent});
  return {true, static_cast<int>(group.size())};
}

void OccupancyLedger::release_spot(const AgentId& agent) {
  for (auto it = spots_.begin(); it != spots_.end();) {
    auto& v = it->second;
    v.erase(std::remove_if(v.begin(), v.end(),
                           [&](const Spot& s) { return s.holder == agent || s.reserved_by == agent; }),
            v.end());
    it = v.empty() ? spots_.erase(it) : std::next(it);
  }
}

int OccupancyLedger::claimed(std::string_view place_id) const {
  auto it = spots_.find(std::string(place_id));
  return it == spots_.end() ? 0 : static_cast<int>(it->second.size());
}

std::optional<std::string> OccupancyLedger::place_of(const AgentId& agent) const {
  for (const auto& [place, v] : spots_) {
    for (const auto& s : v) {
      if (s.holder == agent) return place;
    }
  }
  return std::nullopt;
}

void to_json(json& j, const OccupancyLedger& ledger) {
  j = json::object();
  for (const auto& [place, v] : ledger.spots()) {
    json arr = json::array();
    for (const auto& s : v) arr.push_back({{"holder", s.holder}, {"reserved_by", s.reserved_by}});
    j[place] = arr;
  }
}

void from_json(const json& j, OccupancyLedger& ledger) {
  ledger.spots_.clear();
  for (auto it = j.begin(); it != j.end(); ++it) {
    auto& v = ledger.spots_[it.key()];
    for (const auto& s : it.value()) {
      v.push_back({s.at("holder").get<std::string>(), s.at("reserved_by").get<std::string>()});
    }
  }
}

}  // namespace psim
