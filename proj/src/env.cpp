#include "laip/env.hpp"

#include <algorithm>
#include <deque>
#include <set>

namespace laip::env {

EnvironmentSpec EnvironmentSpec::restaurants_default() {
  EnvironmentSpec s;
  s.rooms = {1, 2, 3, 4, 5, 6, 7};
  s.edges = {{1, 2}, {2, 3}, {2, 4}, {4, 5}, {4, 6}, {6, 7}};
  s.restaurants = {{"Chinese", 3}, {"Mexican", 5}, {"Japanese", 7}};
  s.visibility = {
      {"Chinese", {1, 2, 3, 4}},
      {"Mexican", {2, 4, 5, 6}},
      {"Japanese", {4, 6, 7}},
  };
  return s;
}

EnvironmentSpec EnvironmentSpec::from_json(const nlohmann::json& j) {
  EnvironmentSpec s;
  for (const auto& r : j.at("rooms")) s.rooms.push_back(r.get<RoomId>());
  if (j.contains("edges")) {
    for (const auto& e : j.at("edges")) {
      if (!e.is_array() || e.size() != 2)
        throw ValidationError("edge entries must be [a, b] pairs");
      s.edges.emplace_back(e[0].get<RoomId>(), e[1].get<RoomId>());
    }
  } else if (j.contains("adjacency")) {
    // Adjacency-list form; must be symmetric.
    const auto& adj = j.at("adjacency");
    for (auto it = adj.begin(); it != adj.end(); ++it) {
      RoomId a = std::stoi(it.key());
      for (const auto& bj : it.value()) {
        RoomId b = bj.get<RoomId>();
        bool reciprocal = false;
        std::string bkey = std::to_string(b);
        if (adj.contains(bkey)) {
          for (const auto& back : adj.at(bkey))
            if (back.get<RoomId>() == a) reciprocal = true;
        }
        if (!reciprocal)
          throw ValidationError("asymmetric edge " + it.key() + " -> " + bkey);
        if (a < b) s.edges.emplace_back(a, b);
      }
    }
  } else {
    throw ValidationError("environment spec needs 'edges' or 'adjacency'");
  }
  for (const auto& r : j.at("restaurants"))
    s.restaurants.push_back({r.at("name").get<std::string>(), r.at("room").get<RoomId>()});
  for (const auto& [name, rooms] : j.at("visibility").items()) {
    std::vector<RoomId> v;
    for (const auto& r : rooms) v.push_back(r.get<RoomId>());
    s.visibility.emplace_back(name, std::move(v));
  }
  return s;
}

nlohmann::json EnvironmentSpec::to_json() const {
  nlohmann::json j;
  j["rooms"] = rooms;
  auto& ej = j["edges"] = nlohmann::json::array();
  for (const auto& [a, b] : edges) ej.push_back({a, b});
  auto& rj = j["restaurants"] = nlohmann::json::array();
  for (const auto& r : restaurants) rj.push_back({{"name", r.name}, {"room", r.room}});
  auto& vj = j["visibility"] = nlohmann::json::object();
  for (const auto& [name, rooms_v] : visibility) vj[name] = rooms_v;
  return j;
}

RoomGraph RoomGraph::build(const EnvironmentSpec& spec) {
  RoomGraph g;
  g.spec_ = spec;

  if (spec.rooms.empty()) throw ValidationError("environment has no rooms");
  std::set<RoomId> room_set(spec.rooms.begin(), spec.rooms.end());
  if (room_set.size() != spec.rooms.size())
    throw ValidationError("duplicate room identifiers");
  g.rooms_.assign(room_set.begin(), room_set.end());
  for (RoomId r : g.rooms_) g.adj_[r];  // ensure every room has an entry

  for (const auto& [a, b] : spec.edges) {
    if (!room_set.count(a) || !room_set.count(b))
      throw ValidationError("edge references unknown room");
    if (a == b) throw ValidationError("self-loop on room " + std::to_string(a));
    g.adj_[a].push_back(b);
    g.adj_[b].push_back(a);
  }
  for (auto& [room, nbrs] : g.adj_) {
    std::sort(nbrs.begin(), nbrs.end());
    nbrs.erase(std::unique(nbrs.begin(), nbrs.end()), nbrs.end());
  }

  g.restaurants_ = spec.restaurants;
  for (RestaurantId i = 0; i < g.restaurants_.size(); ++i) {
    const Restaurant& r = g.restaurants_[i];
    if (r.name.empty()) throw ValidationError("restaurant with empty name");
    if (!room_set.count(r.room))
      throw ValidationError("restaurant '" + r.name + "' placed in unknown room");
    for (RestaurantId k = 0; k < i; ++k)
      if (g.restaurants_[k].name == r.name)
        throw ValidationError("duplicate restaurant name '" + r.name + "'");
    if (g.room_restaurant_.count(r.room))
      throw ValidationError("room " + std::to_string(r.room) + " hosts two restaurants");
    g.room_restaurant_[r.room] = i;
  }

  g.visible_from_.assign(g.restaurants_.size(), {});
  for (const auto& [name, rooms_v] : spec.visibility) {
    RestaurantId id = g.restaurant_index(name);
    for (RoomId r : rooms_v) {
      if (!room_set.count(r))
        throw ValidationError("visibility for '" + name + "' references unknown room");
      g.visible_from_[id].push_back(r);
    }
  }
  for (RestaurantId i = 0; i < g.restaurants_.size(); ++i) {
    auto& v = g.visible_from_[i];
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
    if (!std::binary_search(v.begin(), v.end(), g.restaurants_[i].room))
      throw ValidationError("restaurant '" + g.restaurants_[i].name +
                            "' is not visible from its own room");
  }

  // Connectivity.
  if (g.rooms_.size() > 1) {
    std::set<RoomId> seen{g.rooms_.front()};
    std::deque<RoomId> q{g.rooms_.front()};
    while (!q.empty()) {
      RoomId cur = q.front();
      q.pop_front();
      for (RoomId n : g.adj_[cur])
        if (seen.insert(n).second) q.push_back(n);
    }
    if (seen.size() != g.rooms_.size())
      throw ValidationError("room graph is disconnected");
  }
  return g;
}

const std::vector<RoomId>& RoomGraph::neighbors(RoomId r) const {
  auto it = adj_.find(r);
  if (it == adj_.end()) throw UnknownRoom("room " + std::to_string(r));
  return it->second;
}

const Restaurant& RoomGraph::restaurant(RestaurantId id) const {
  if (id >= restaurants_.size())
    throw UnknownRestaurant("restaurant index " + std::to_string(id));
  return restaurants_[id];
}

RestaurantId RoomGraph::restaurant_index(std::string_view name) const {
  for (RestaurantId i = 0; i < restaurants_.size(); ++i)
    if (restaurants_[i].name == name) return i;
  throw UnknownRestaurant("restaurant '" + std::string(name) + "'");
}

std::optional<RestaurantId> RoomGraph::restaurant_at(RoomId room) const {
  auto it = room_restaurant_.find(room);
  if (it == room_restaurant_.end()) return std::nullopt;
  return it->second;
}

const std::vector<RoomId>& RoomGraph::visible_from(RestaurantId id) const {
  if (id >= visible_from_.size())
    throw UnknownRestaurant("restaurant index " + std::to_string(id));
  return visible_from_[id];
}

bool RoomGraph::restaurant_visible(RestaurantId id, RoomId room) const {
  const auto& v = visible_from(id);
  return std::binary_search(v.begin(), v.end(), room);
}

WorldState WorldState::all_open(const RoomGraph& g) {
  WorldState w;
  w.open.assign(g.restaurant_count(), true);
  return w;
}

WorldState WorldState::with_closed(const RoomGraph& g,
                                   const std::vector<std::string>& closed_names) {
  WorldState w = all_open(g);
  for (const auto& name : closed_names) w.open[g.restaurant_index(name)] = false;
  return w;
}

std::string to_string(const Action& a, const RoomGraph& g) {
  if (a.kind == Action::Kind::Move) return "Move to Room " + std::to_string(a.target);
  return "Eat at the " + g.restaurant(static_cast<RestaurantId>(a.target)).name +
         " restaurant";
}

std::vector<Action> legal_actions(const RoomGraph& g, const WorldState& w, RoomId room) {
  const auto& nbrs = g.neighbors(room);
  std::vector<Action> out;
  out.reserve(nbrs.size() + 1);
  for (RoomId n : nbrs) out.push_back(Action::move(n));
  if (auto r = g.restaurant_at(room); r && w.is_open(*r)) out.push_back(Action::eat(*r));
  return out;
}

Observation observe(const RoomGraph& g, const WorldState& w, RoomId room) {
  Observation obs;
  obs.room = room;
  obs.reachable = g.neighbors(room);  // throws UnknownRoom
  for (RestaurantId i = 0; i < g.restaurant_count(); ++i)
    if (g.restaurant_visible(i, room)) obs.visible.emplace_back(i, w.is_open(i));
  return obs;
}

std::vector<RoomId> shortest_path(const RoomGraph& g, RoomId from, RestaurantId to) {
  if (!g.has_room(from)) throw UnknownRoom("room " + std::to_string(from));
  RoomId goal = g.restaurant(to).room;
  if (from == goal) return {};

  // BFS from the goal, then walk greedily picking the lowest-indexed neighbor
  // that still lies on a shortest path. Yields the lexicographically smallest
  // of the shortest room sequences.
  std::map<RoomId, int> dist{{goal, 0}};
  std::deque<RoomId> q{goal};
  while (!q.empty()) {
    RoomId cur = q.front();
    q.pop_front();
    for (RoomId n : g.neighbors(cur))
      if (!dist.count(n)) {
        dist[n] = dist[cur] + 1;
        q.push_back(n);
      }
  }
  auto it = dist.find(from);
  if (it == dist.end())
    throw Unreachable("no path from room " + std::to_string(from) + " to " +
                      g.restaurant(to).name);
  std::vector<RoomId> path;
  RoomId cur = from;
  while (cur != goal) {
    for (RoomId n : g.neighbors(cur)) {  // ascending
      auto dn = dist.find(n);
      if (dn != dist.end() && dn->second == dist.at(cur) - 1) {
        path.push_back(n);
        cur = n;
        break;
      }
    }
  }
  return path;
}

void validate_trajectory(const RoomGraph& g, const TrajectoryDef& t) {
  if (!g.has_room(t.start_room))
    throw IllegalTrajectory("trajectory '" + t.id + "' starts in unknown room");
  if (t.world.open.size() != g.restaurant_count())
    throw IllegalTrajectory("trajectory '" + t.id + "' world does not match graph");
  RoomId room = t.start_room;
  for (std::size_t i = 0; i < t.actions.size(); ++i) {
    const auto legal = legal_actions(g, t.world, room);
    if (std::find(legal.begin(), legal.end(), t.actions[i]) == legal.end()) {
      throw IllegalTrajectory("trajectory '" + t.id + "' action " +
                              std::to_string(i + 1) + " (" +
                              to_string(t.actions[i], g) + ") is illegal from room " +
                              std::to_string(room));
    }
    if (t.actions[i].kind == Action::Kind::Move) room = t.actions[i].target;
  }
}

std::vector<RoomId> room_trace(const RoomGraph& g, const TrajectoryDef& t) {
  std::vector<RoomId> rooms{t.start_room};
  for (const Action& a : t.actions)
    rooms.push_back(a.kind == Action::Kind::Move ? a.target : rooms.back());
  (void)g;
  return rooms;
}

namespace {

// The corpus's source table writes its room cells in corridor order
// (hallway rooms 1-2-3-4) while the environment description numbers the
// hallway 1-2-4-6 with restaurant rooms 3/5/7 hanging off it. Cells are
// remapped onto the environment numbering (2->2, 3->4, 4->6) and restaurant
// cells become a Move into the restaurant's room followed by Eat; rows that
// required the remap are flagged reconstructed.
std::vector<TrajectoryDef> make_builtin_corpus(const RoomGraph& g) {
  auto M = [](RoomId r) { return Action::move(r); };
  auto E = [&g](std::string_view name) { return Action::eat(g.restaurant_index(name)); };
  auto world = [&g](std::vector<std::string> closed) {
    return WorldState::with_closed(g, closed);
  };

  std::vector<TrajectoryDef> corpus;
  auto add = [&](std::string id, WorldState w, std::vector<Action> actions,
                 bool reconstructed, std::vector<std::string> cells) {
    TrajectoryDef t;
    t.id = std::move(id);
    t.world = std::move(w);
    t.start_room = 1;
    t.actions = std::move(actions);
    t.reconstructed = reconstructed;
    t.source_cells = std::move(cells);
    validate_trajectory(g, t);
    corpus.push_back(std::move(t));
  };

  add("study1-open", world({}), {M(2), M(4), M(2), M(3), E("Chinese")}, true,
      {"Room 2", "Room 3", "Room 2", "Chinese"});
  add("study1-closed", world({"Japanese"}), {M(2), M(4), M(2), M(3), E("Chinese")}, true,
      {"Room 2", "Room 3", "Room 2", "Chinese"});
  add("t1", world({"Japanese"}), {M(2), M(4), M(2)}, true, {"Room 2", "Room 3", "Room 2"});
  add("t2", world({}), {M(2), M(4), M(6)}, true, {"Room 2", "Room 3", "Room 4"});
  add("t3", world({}), {M(2), M(4), M(5), E("Mexican")}, true,
      {"Room 2", "Room 3", "Mexican"});
  add("t4", world({}), {M(2), M(3), E("Chinese")}, false, {"Room 2", "Chinese"});
  add("t5", world({"Mexican"}), {M(2), M(4), M(6)}, true, {"Room 2", "Room 3", "Room 4"});
  add("t6", world({"Mexican"}), {M(2), M(3), E("Chinese")}, false, {"Room 2", "Chinese"});
  add("t7", world({"Chinese"}), {M(2), M(4), M(5), E("Mexican")}, true,
      {"Room 2", "Room 3", "Mexican"});
  add("t8", world({"Chinese"}), {M(2), M(4), M(6)}, true, {"Room 2", "Room 3", "Room 4"});
  add("t9", world({}), {M(2), M(4), M(2)}, true, {"Room 2", "Room 3", "Room 2"});
  add("t10", world({"Chinese", "Mexican"}), {M(2), M(4), M(6)}, true,
      {"Room 2", "Room 3", "Room 4"});
  return corpus;
}

}  // namespace

const std::vector<TrajectoryDef>& builtin_corpus(const RoomGraph& g) {
  static const std::vector<TrajectoryDef> corpus = make_builtin_corpus(g);
  return corpus;
}

TrajectoryDef load_trajectory(const RoomGraph& g, std::string_view id) {
  for (const auto& t : builtin_corpus(g))
    if (t.id == id) return t;
  throw UnknownTrajectory("trajectory '" + std::string(id) + "'");
}

std::vector<TrajectoryDef> corpus_from_json(const RoomGraph& g, const nlohmann::json& j) {
  std::vector<TrajectoryDef> corpus;
  for (const auto& tj : j.at("trajectories")) {
    TrajectoryDef t;
    t.id = tj.at("id").get<std::string>();
    std::vector<std::string> closed;
    if (tj.contains("closed"))
      for (const auto& c : tj.at("closed")) closed.push_back(c.get<std::string>());
    t.world = WorldState::with_closed(g, closed);
    t.start_room = tj.at("start_room").get<RoomId>();
    for (const auto& aj : tj.at("actions")) {
      if (aj.contains("move"))
        t.actions.push_back(Action::move(aj.at("move").get<RoomId>()));
      else if (aj.contains("eat"))
        t.actions.push_back(Action::eat(g.restaurant_index(aj.at("eat").get<std::string>())));
      else
        throw ValidationError("trajectory action needs 'move' or 'eat'");
    }
    t.reconstructed = tj.value("reconstructed", false);
    if (tj.contains("source_cells"))
      for (const auto& c : tj.at("source_cells")) t.source_cells.push_back(c.get<std::string>());
    validate_trajectory(g, t);
    corpus.push_back(std::move(t));
  }
  return corpus;
}

nlohmann::json corpus_to_json(const RoomGraph& g, const std::vector<TrajectoryDef>& corpus) {
  nlohmann::json out;
  auto& arr = out["trajectories"] = nlohmann::json::array();
  for (const auto& t : corpus) {
    nlohmann::json tj;
    tj["id"] = t.id;
    auto closed = nlohmann::json::array();
    for (RestaurantId i = 0; i < g.restaurant_count(); ++i)
      if (!t.world.is_open(i)) closed.push_back(g.restaurant(i).name);
    tj["closed"] = closed;
    tj["start_room"] = t.start_room;
    auto actions = nlohmann::json::array();
    for (const Action& a : t.actions) {
      if (a.kind == Action::Kind::Move)
        actions.push_back({{"move", a.target}});
      else
        actions.push_back({{"eat", g.restaurant(static_cast<RestaurantId>(a.target)).name}});
    }
    tj["actions"] = actions;
    tj["reconstructed"] = t.reconstructed;
    tj["source_cells"] = t.source_cells;
    arr.push_back(std::move(tj));
  }
  return out;
}

}  // namespace laip::env
