#pragma once

#include <map>
#include <string>
#include <vector>

#include "laip/env.hpp"
#include "laip/simplex.hpp"

namespace laip::oracle {

// Baseline open probability before a restaurant has ever been seen.
inline constexpr double kInitialOpenBelief = 0.95;

// The observed agent's belief that each restaurant is open, indexed by
// RestaurantId. Entries become exactly 0 or 1 once the restaurant has been
// visible from a visited room.
struct AgentBelief {
  std::vector<double> open_prob;
};

// Strict total order over the restaurant set, best first.
struct PreferenceOrdering {
  std::vector<env::RestaurantId> ranking;

  std::string label(const env::RoomGraph& g) const;          // "Japanese > Chinese > Mexican"
  std::string statement(const env::RoomGraph& g) const;      // natural-language hypothesis
  bool operator==(const PreferenceOrdering&) const = default;
};

struct NoiseParam {
  double epsilon = 0.01;
};

AgentBelief init_belief(const env::RoomGraph& g);
AgentBelief update_belief(AgentBelief belief, const env::Observation& obs);

// All strict orderings of the graph's restaurants, enumerated in
// lexicographic index order (deterministic hypothesis space).
std::vector<PreferenceOrdering> all_orderings(const env::RoomGraph& g);

// One-step rational policy. The agent heads for its highest-ranked
// restaurant with positive believed-open probability: that goal's first
// shortest-path step (Eat when co-located) receives P(open)*(1-eps) of the
// remaining mass and the believed-closed remainder falls through to the next
// rank. Epsilon plus any mass left after the last rank is spread uniformly
// over the legal moves. With every belief at zero this degrades to uniform
// random movement. Throws NoViableGoal only when no action exists at all.
std::map<env::Action, double> forward_policy(const env::RoomGraph& g,
                                             const AgentBelief& belief,
                                             const PreferenceOrdering& ordering,
                                             env::RoomId room, NoiseParam noise = {});

// Belief held when choosing each action (after observing the current room);
// length = actions + 1, the last entry being the post-trajectory belief.
// Depends only on rooms visited, never on the hypothesis.
std::vector<AgentBelief> belief_trajectory(const env::RoomGraph& g,
                                           const env::TrajectoryDef& traj);

// Product of forward-policy probabilities of the observed actions.
double trajectory_likelihood(const env::RoomGraph& g, const PreferenceOrdering& ordering,
                             const env::TrajectoryDef& traj, NoiseParam noise = {});

// Posterior over all_orderings(g) given the trajectory; prior defaults to
// uniform when empty. Throws DegeneratePosterior if every likelihood is 0.
ProbabilityDistribution optimal_posterior(const env::RoomGraph& g,
                                          const env::TrajectoryDef& traj,
                                          const ProbabilityDistribution& prior = {},
                                          NoiseParam noise = {});

}  // namespace laip::oracle
