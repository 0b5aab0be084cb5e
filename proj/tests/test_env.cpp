#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <fstream>
#include <random>

#include "laip/env.hpp"
#include "support/brute_oracle.hpp"
#include "support/generators.hpp"

using namespace laip;
using env::Action;

namespace {

env::RoomGraph default_graph() {
  return env::RoomGraph::build(env::EnvironmentSpec::restaurants_default());
}

nlohmann::json read_json(const std::string& path) {
  std::ifstream in(path);
  REQUIRE(in.is_open());
  nlohmann::json j;
  in >> j;
  return j;
}

}  // namespace

TEST_CASE("default environment matches the documented layout") {
  auto g = default_graph();
  CHECK(g.rooms().size() == 7);
  CHECK(g.restaurant_count() == 3);
  CHECK(g.restaurant(g.restaurant_index("Chinese")).room == 3);
  CHECK(g.restaurant(g.restaurant_index("Mexican")).room == 5);
  CHECK(g.restaurant(g.restaurant_index("Japanese")).room == 7);
  CHECK(g.visible_from(g.restaurant_index("Chinese")) == std::vector<env::RoomId>{1, 2, 3, 4});
  CHECK(g.visible_from(g.restaurant_index("Mexican")) == std::vector<env::RoomId>{2, 4, 5, 6});
  CHECK(g.visible_from(g.restaurant_index("Japanese")) == std::vector<env::RoomId>{4, 6, 7});
  CHECK(g.neighbors(2) == std::vector<env::RoomId>{1, 3, 4});
  CHECK(g.neighbors(4) == std::vector<env::RoomId>{2, 5, 6});
}

TEST_CASE("environment data file mirrors the built-in spec") {
  auto file_spec = env::EnvironmentSpec::from_json(
      read_json(std::string(LAIP_DATA_DIR) + "/environments/restaurants.json"));
  auto builtin = env::EnvironmentSpec::restaurants_default();
  CHECK(file_spec.to_json() == builtin.to_json());
}

TEST_CASE("degenerate single-room world is valid") {
  env::EnvironmentSpec spec;
  spec.rooms = {1};
  auto g = env::RoomGraph::build(spec);
  CHECK(g.rooms().size() == 1);
  CHECK(g.restaurant_count() == 0);
  CHECK(env::observe(g, env::WorldState::all_open(g), 1).visible.empty());
}

TEST_CASE("validation failures") {
  SUBCASE("restaurant not visible from its own room") {
    env::EnvironmentSpec spec;
    spec.rooms = {1, 2};
    spec.edges = {{1, 2}};
    spec.restaurants = {{"Lonely", 1}};
    spec.visibility = {{"Lonely", {2}}};
    CHECK_THROWS_AS(env::RoomGraph::build(spec), ValidationError);
    spec.visibility = {};
    CHECK_THROWS_AS(env::RoomGraph::build(spec), ValidationError);
  }
  SUBCASE("self loop") {
    env::EnvironmentSpec spec;
    spec.rooms = {1, 2};
    spec.edges = {{1, 1}, {1, 2}};
    CHECK_THROWS_AS(env::RoomGraph::build(spec), ValidationError);
  }
  SUBCASE("disconnected graph") {
    env::EnvironmentSpec spec;
    spec.rooms = {1, 2, 3};
    spec.edges = {{1, 2}};
    CHECK_THROWS_AS(env::RoomGraph::build(spec), ValidationError);
  }
  SUBCASE("restaurant in unknown room") {
    env::EnvironmentSpec spec;
    spec.rooms = {1};
    spec.restaurants = {{"Ghost", 9}};
    spec.visibility = {{"Ghost", {9}}};
    CHECK_THROWS_AS(env::RoomGraph::build(spec), ValidationError);
  }
  SUBCASE("two restaurants in one room") {
    env::EnvironmentSpec spec;
    spec.rooms = {1, 2};
    spec.edges = {{1, 2}};
    spec.restaurants = {{"A", 1}, {"B", 1}};
    spec.visibility = {{"A", {1}}, {"B", {1}}};
    CHECK_THROWS_AS(env::RoomGraph::build(spec), ValidationError);
  }
  SUBCASE("asymmetric adjacency form") {
    nlohmann::json j{{"rooms", {1, 2}},
                     {"adjacency", {{"1", {2}}, {"2", nlohmann::json::array()}}},
                     {"restaurants", nlohmann::json::array()},
                     {"visibility", nlohmann::json::object()}};
    CHECK_THROWS_AS(env::EnvironmentSpec::from_json(j), ValidationError);
  }
}

TEST_CASE("legal actions") {
  auto g = default_graph();
  auto all_open = env::WorldState::all_open(g);

  CHECK(env::legal_actions(g, all_open, 1) == std::vector<Action>{Action::move(2)});

  auto chinese = g.restaurant_index("Chinese");
  CHECK(env::legal_actions(g, all_open, 3) ==
        std::vector<Action>{Action::move(2), Action::eat(chinese)});

  auto closed = env::WorldState::with_closed(g, {"Chinese"});
  CHECK(env::legal_actions(g, closed, 3) == std::vector<Action>{Action::move(2)});

  CHECK_THROWS_AS(env::legal_actions(g, all_open, 42), UnknownRoom);
}

TEST_CASE("no Eat for a closed restaurant, every room and world") {
  auto g = default_graph();
  for (int mask = 0; mask < 8; ++mask) {
    env::WorldState world = env::WorldState::all_open(g);
    for (env::RestaurantId r = 0; r < 3; ++r) world.open[r] = (mask >> r) & 1;
    for (env::RoomId room : g.rooms()) {
      for (const Action& a : env::legal_actions(g, world, room)) {
        if (a.kind == Action::Kind::Eat) {
          CHECK(world.is_open(static_cast<env::RestaurantId>(a.target)));
          CHECK(g.restaurant(static_cast<env::RestaurantId>(a.target)).room == room);
        }
      }
    }
  }
}

TEST_CASE("observation function") {
  auto g = default_graph();
  auto all_open = env::WorldState::all_open(g);

  auto obs2 = env::observe(g, all_open, 2);
  REQUIRE(obs2.visible.size() == 2);
  CHECK(obs2.visible[0] == std::pair<env::RestaurantId, bool>{g.restaurant_index("Chinese"), true});
  CHECK(obs2.visible[1] == std::pair<env::RestaurantId, bool>{g.restaurant_index("Mexican"), true});
  CHECK(obs2.reachable == std::vector<env::RoomId>{1, 3, 4});

  auto obs1 = env::observe(g, all_open, 1);
  REQUIRE(obs1.visible.size() == 1);
  CHECK(obs1.visible[0].first == g.restaurant_index("Chinese"));

  SUBCASE("closed status is carried") {
    auto world = env::WorldState::with_closed(g, {"Chinese"});
    auto obs = env::observe(g, world, 1);
    CHECK(obs.visible[0].second == false);
  }
  SUBCASE("deterministic") {
    auto a = env::observe(g, all_open, 4);
    auto b = env::observe(g, all_open, 4);
    CHECK(a.visible == b.visible);
    CHECK(a.reachable == b.reachable);
  }
}

TEST_CASE("shortest paths on the default graph") {
  auto g = default_graph();
  CHECK(env::shortest_path(g, 1, g.restaurant_index("Japanese")) ==
        std::vector<env::RoomId>{2, 4, 6, 7});
  CHECK(env::shortest_path(g, 3, g.restaurant_index("Chinese")).empty());
  CHECK(env::shortest_path(g, 7, g.restaurant_index("Chinese")) ==
        std::vector<env::RoomId>{6, 4, 2, 3});
}

TEST_CASE("shortest path matches exhaustive enumeration on random graphs") {
  std::mt19937_64 rng(20240811);
  for (int iter = 0; iter < 40; ++iter) {
    auto g = env::RoomGraph::build(gen::random_graph_spec(rng));
    for (env::RoomId from : g.rooms()) {
      auto got = env::shortest_path(g, from, 0);
      auto expected = brute::best_path(g, from, 0);
      CHECK(got == expected);
    }
  }
}

TEST_CASE("trajectory corpus") {
  auto g = default_graph();
  const auto& corpus = env::builtin_corpus(g);
  REQUIRE(corpus.size() == 12);

  SUBCASE("every row replays legally") {
    for (const auto& t : corpus) CHECK_NOTHROW(env::validate_trajectory(g, t));
  }
  SUBCASE("t3 is the reconstructed shortest completion") {
    auto t3 = env::load_trajectory(g, "t3");
    CHECK(t3.reconstructed);
    CHECK(t3.actions == std::vector<Action>{Action::move(2), Action::move(4), Action::move(5),
                                            Action::eat(g.restaurant_index("Mexican"))});
  }
  SUBCASE("study1-closed") {
    auto t = env::load_trajectory(g, "study1-closed");
    CHECK(t.start_room == 1);
    CHECK(t.actions == std::vector<Action>{Action::move(2), Action::move(4), Action::move(2),
                                           Action::move(3),
                                           Action::eat(g.restaurant_index("Chinese"))});
    CHECK_FALSE(t.world.is_open(g.restaurant_index("Japanese")));
    CHECK(t.world.is_open(g.restaurant_index("Chinese")));
    CHECK(env::room_trace(g, t) == std::vector<env::RoomId>{1, 2, 4, 2, 3, 3});
  }
  SUBCASE("t10 has two closed restaurants") {
    auto t = env::load_trajectory(g, "t10");
    CHECK(t.actions ==
          std::vector<Action>{Action::move(2), Action::move(4), Action::move(6)});
    CHECK_FALSE(t.world.is_open(g.restaurant_index("Chinese")));
    CHECK_FALSE(t.world.is_open(g.restaurant_index("Mexican")));
    CHECK(t.world.is_open(g.restaurant_index("Japanese")));
  }
  SUBCASE("unknown id") {
    CHECK_THROWS_AS(env::load_trajectory(g, "t99"), UnknownTrajectory);
  }
}

TEST_CASE("corpus data file mirrors the built-in corpus") {
  auto g = default_graph();
  auto from_file = env::corpus_from_json(
      g, read_json(std::string(LAIP_DATA_DIR) + "/trajectories/corpus.json"));
  const auto& builtin = env::builtin_corpus(g);
  REQUIRE(from_file.size() == builtin.size());
  for (std::size_t i = 0; i < builtin.size(); ++i) {
    CHECK(from_file[i].id == builtin[i].id);
    CHECK(from_file[i].start_room == builtin[i].start_room);
    CHECK(from_file[i].actions == builtin[i].actions);
    CHECK(from_file[i].world.open == builtin[i].world.open);
    CHECK(from_file[i].reconstructed == builtin[i].reconstructed);
    CHECK(from_file[i].source_cells == builtin[i].source_cells);
  }
}

TEST_CASE("illegal trajectories are rejected") {
  auto g = default_graph();
  env::TrajectoryDef t;
  t.id = "bad";
  t.world = env::WorldState::all_open(g);
  t.start_room = 1;

  SUBCASE("non-adjacent move") {
    t.actions = {Action::move(4)};
    CHECK_THROWS_AS(env::validate_trajectory(g, t), IllegalTrajectory);
  }
  SUBCASE("eating at a distance") {
    t.actions = {Action::move(2), Action::eat(g.restaurant_index("Chinese"))};
    CHECK_THROWS_AS(env::validate_trajectory(g, t), IllegalTrajectory);
  }
  SUBCASE("eating at a closed restaurant") {
    t.world = env::WorldState::with_closed(g, {"Chinese"});
    t.actions = {Action::move(2), Action::move(3), Action::eat(g.restaurant_index("Chinese"))};
    CHECK_THROWS_AS(env::validate_trajectory(g, t), IllegalTrajectory);
  }
}
