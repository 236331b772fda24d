#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "psim/canonical.hpp"
#include "psim/types.hpp"

namespace psim {

struct Building {
  std::string name;
  std::string description;

  bool operator==(const Building&) const = default;
};

struct Place {
  std::string building;
  std::string name;
  int x = 0;
  int y = 0;
  int capacity = 1;
  std::vector<GoalTag> affordances;
  std::string description;
  int open = 0;       // minutes of day
  int close = 1440;   // minutes of day

  bool operator==(const Place&) const = default;

  // "Building/Place", unique within a world.
  std::string id() const { return building + "/" + name; }
  bool affords(GoalTag g) const;
};

struct WorldOptions {
  int grid_width = 64;
  int grid_height = 64;
  int tick_minutes = 15;
  int move_speed = 4;  // cells per tick
};

struct WorldMap {
  std::vector<Building> buildings;
  std::vector<Place> places;  // CSV row order
  int grid_width = 64;
  int grid_height = 64;
  int tick_minutes = 15;
  int move_speed = 4;

  const Place* find(std::string_view place_id) const;
  const Place& at(std::string_view place_id) const;  // throws LookupError
};

inline constexpr std::string_view kWorldCsvHeader =
    "building,place,x,y,capacity,affordances,description,open,close";

// Parses the world CSV. Errors name the 1-based row (header is row 1).
WorldMap load_world(std::string_view csv, const WorldOptions& options = {});
std::string world_to_csv(const WorldMap& world);

std::vector<const Place*> places_for_goal(const WorldMap& world, GoalTag goal);

int manhattan(const Place& a, const Place& b);
// ceil(manhattan / move_speed) ticks; 0 for the same place.
int travel_time(const WorldMap& world, std::string_view from, std::string_view to);

struct WorldDiff {
  std::vector<std::string> added;
  std::vector<std::string> removed;
  std::vector<std::string> changed;

  bool empty() const { return added.empty() && removed.empty() && changed.empty(); }
};

WorldDiff diff_worlds(const WorldMap& before, const WorldMap& after);
void to_json(json& j, const WorldDiff& d);
void to_json(json& j, const Place& p);

// Interaction-spot bookkeeping. Each spot records who occupies it and who
// reserved it (the claimant, for companion spots).
class OccupancyLedger {
 public:
  struct Spot {
    AgentId holder;
    AgentId reserved_by;
    bool operator==(const Spot&) const = default;
  };

  struct ClaimResult {
    bool ok = false;
    int claimed = 0;
  };

  // Claims one spot for `agent` plus one per companion, atomically. A
  // companion that already holds a spot somewhere is not given a second.
  // Throws InputError if `agent` already holds a spot.
  ClaimResult claim_spot(const Place& place, const AgentId& agent,
                         std::span<const AgentId> companions = {});

  // Releases the agent's own spot and every spot it reserved. Idempotent.
  void release_spot(const AgentId& agent);

  int claimed(std::string_view place_id) const;
  std::optional<std::string> place_of(const AgentId& agent) const;
  const std::map<std::string, std::vector<Spot>>& spots() const { return spots_; }
  bool empty() const { return spots_.empty(); }

  bool operator==(const OccupancyLedger&) const = default;

  friend void from_json(const json& j, OccupancyLedger& ledger);

 private:
  std::map<std::string, std::vector<Spot>> spots_;
};

void to_json(json& j, const OccupancyLedger& ledger);
void from_json(const json& j, OccupancyLedger& ledger);

}  // namespace psim
