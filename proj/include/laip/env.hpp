#pragma once

#include <compare>
#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "laip/errors.hpp"

namespace laip::env {

using RoomId = int;
using RestaurantId = std::size_t;

struct Restaurant {
  std::string name;
  RoomId room = 0;
};

// Plain description of a world layout, loadable from a data file so new
// environments need no rebuild.
struct EnvironmentSpec {
  std::vector<RoomId> rooms;
  std::vector<std::pair<RoomId, RoomId>> edges;  // undirected
  std::vector<Restaurant> restaurants;           // order defines RestaurantId
  // restaurant name -> rooms it is visible from (must include its own room)
  std::vector<std::pair<std::string, std::vector<RoomId>>> visibility;

  // The built-in seven-room restaurant world.
  static EnvironmentSpec restaurants_default();
  static EnvironmentSpec from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
};

// Validated, immutable room/visibility graph. Safe to share across threads.
class RoomGraph {
 public:
  // Validates and builds. Throws ValidationError on self-loop or unknown
  // edge endpoints, restaurants without self-visibility, rooms hosting two
  // restaurants, or a disconnected graph.
  static RoomGraph build(const EnvironmentSpec& spec);

  const std::vector<RoomId>& rooms() const { return rooms_; }
  bool has_room(RoomId r) const { return adj_.count(r) != 0; }
  // Sorted ascending. Throws UnknownRoom.
  const std::vector<RoomId>& neighbors(RoomId r) const;

  const std::vector<Restaurant>& restaurants() const { return restaurants_; }
  std::size_t restaurant_count() const { return restaurants_.size(); }
  const Restaurant& restaurant(RestaurantId id) const;
  RestaurantId restaurant_index(std::string_view name) const;  // throws UnknownRestaurant
  std::optional<RestaurantId> restaurant_at(RoomId room) const;

  // Rooms a restaurant is visible from, sorted ascending.
  const std::vector<RoomId>& visible_from(RestaurantId id) const;
  bool restaurant_visible(RestaurantId id, RoomId room) const;

  const EnvironmentSpec& spec() const { return spec_; }

 private:
  RoomGraph() = default;
  EnvironmentSpec spec_;
  std::vector<RoomId> rooms_;
  std::map<RoomId, std::vector<RoomId>> adj_;
  std::vector<Restaurant> restaurants_;
  std::map<RoomId, RestaurantId> room_restaurant_;
  std::vector<std::vector<RoomId>> visible_from_;
};

// Which restaurants are currently open, indexed by RestaurantId.
struct WorldState {
  std::vector<bool> open;

  static WorldState all_open(const RoomGraph& g);
  static WorldState with_closed(const RoomGraph& g,
                                const std::vector<std::string>& closed_names);
  bool is_open(RestaurantId id) const { return open.at(id); }
};

struct Action {
  enum class Kind { Move = 0, Eat = 1 };
  Kind kind = Kind::Move;
  int target = 0;  // room for Move, restaurant index for Eat

  static Action move(RoomId room) { return {Kind::Move, room}; }
  static Action eat(RestaurantId r) { return {Kind::Eat, static_cast<int>(r)}; }
  auto operator<=>(const Action&) const = default;
};

std::string to_string(const Action& a, const RoomGraph& g);

struct Observation {
  RoomId room = 0;
  // Restaurants visible from `room` with their true open status, sorted by
  // restaurant index. Non-visible restaurants are absent.
  std::vector<std::pair<RestaurantId, bool>> visible;
  std::vector<RoomId> reachable;  // sorted
};

// All legal actions at `room`: moves to each neighbor (ascending), then Eat
// when the room hosts an open restaurant. Throws UnknownRoom.
std::vector<Action> legal_actions(const RoomGraph& g, const WorldState& w, RoomId room);

// Deterministic observation function. Throws UnknownRoom.
Observation observe(const RoomGraph& g, const WorldState& w, RoomId room);

// Rooms to traverse from `from` to the restaurant's room, excluding `from`,
// including the destination; empty when already there. Among equally short
// paths the lexicographically smallest sequence wins. Throws Unreachable.
std::vector<RoomId> shortest_path(const RoomGraph& g, RoomId from, RestaurantId to);

struct TrajectoryDef {
  std::string id;
  WorldState world;
  RoomId start_room = 0;
  std::vector<Action> actions;
  // True when the source table's action cells could not be transcribed
  // literally and the sequence was re-derived as the shortest legal completion.
  bool reconstructed = false;
  std::vector<std::string> source_cells;
};

// Throws IllegalTrajectory when the action sequence cannot be replayed
// step-by-step from start_room.
void validate_trajectory(const RoomGraph& g, const TrajectoryDef& t);

// Room occupied after each action, starting at start_room (length = actions+1).
std::vector<RoomId> room_trace(const RoomGraph& g, const TrajectoryDef& t);

// The built-in twelve-trajectory corpus for the default graph.
const std::vector<TrajectoryDef>& builtin_corpus(const RoomGraph& g);
TrajectoryDef load_trajectory(const RoomGraph& g, std::string_view id);  // throws UnknownTrajectory

std::vector<TrajectoryDef> corpus_from_json(const RoomGraph& g, const nlohmann::json& j);
nlohmann::json corpus_to_json(const RoomGraph& g, const std::vector<TrajectoryDef>& corpus);

}  // namespace laip::env
