#include "laip/oracle.hpp"

#include <algorithm>
#include <numeric>

namespace laip::oracle {

std::string PreferenceOrdering::label(const env::RoomGraph& g) const {
  std::string out;
  for (std::size_t i = 0; i < ranking.size(); ++i) {
    if (i) out += " > ";
    out += g.restaurant(ranking[i]).name;
  }
  return out;
}

std::string PreferenceOrdering::statement(const env::RoomGraph& g) const {
  if (ranking.empty()) return "The agent has no food preferences.";
  std::string out = "The agent prefers " + g.restaurant(ranking[0]).name + " food the most";
  for (std::size_t i = 1; i < ranking.size(); ++i)
    out += ", then " + g.restaurant(ranking[i]).name;
  out += ".";
  return out;
}

AgentBelief init_belief(const env::RoomGraph& g) {
  AgentBelief b;
  b.open_prob.assign(g.restaurant_count(), kInitialOpenBelief);
  return b;
}

AgentBelief update_belief(AgentBelief belief, const env::Observation& obs) {
  for (const auto& [restaurant, open] : obs.visible)
    belief.open_prob.at(restaurant) = open ? 1.0 : 0.0;
  return belief;
}

std::vector<PreferenceOrdering> all_orderings(const env::RoomGraph& g) {
  std::vector<env::RestaurantId> ids(g.restaurant_count());
  std::iota(ids.begin(), ids.end(), 0);
  std::vector<PreferenceOrdering> out;
  do {
    out.push_back(PreferenceOrdering{ids});
  } while (std::next_permutation(ids.begin(), ids.end()));
  return out;
}

std::map<env::Action, double> forward_policy(const env::RoomGraph& g,
                                             const AgentBelief& belief,
                                             const PreferenceOrdering& ordering,
                                             env::RoomId room, NoiseParam noise) {
  const auto& moves = g.neighbors(room);
  std::map<env::Action, double> dist;

  double mass = 1.0 - noise.epsilon;
  for (env::RestaurantId r : ordering.ranking) {
    double p_open = belief.open_prob.at(r);
    if (p_open <= 0.0) continue;
    env::Action step = (g.restaurant(r).room == room)
                           ? env::Action::eat(r)
                           : env::Action::move(shortest_path(g, room, r).front());
    dist[step] += mass * p_open;
    mass *= 1.0 - p_open;
  }

  double assigned = 0.0;
  for (const auto& [a, p] : dist) assigned += p;
  double leftover = 1.0 - assigned;  // epsilon plus any believed-closed remainder

  if (!moves.empty()) {
    double share = leftover / static_cast<double>(moves.size());
    for (env::RoomId n : moves) dist[env::Action::move(n)] += share;
  } else if (!dist.empty()) {
    // Dead-end room whose only option is eating here.
    for (auto& [a, p] : dist) p /= assigned;
  } else {
    throw NoViableGoal("no legal action in room " + std::to_string(room));
  }
  return dist;
}

std::vector<AgentBelief> belief_trajectory(const env::RoomGraph& g,
                                           const env::TrajectoryDef& traj) {
  std::vector<AgentBelief> beliefs;
  AgentBelief belief = init_belief(g);
  env::RoomId room = traj.start_room;
  belief = update_belief(std::move(belief), observe(g, traj.world, room));
  beliefs.push_back(belief);
  for (const env::Action& a : traj.actions) {
    if (a.kind == env::Action::Kind::Move) room = a.target;
    belief = update_belief(std::move(belief), observe(g, traj.world, room));
    beliefs.push_back(belief);
  }
  return beliefs;
}

double trajectory_likelihood(const env::RoomGraph& g, const PreferenceOrdering& ordering,
                             const env::TrajectoryDef& traj, NoiseParam noise) {
  validate_trajectory(g, traj);
  const auto beliefs = belief_trajectory(g, traj);
  const auto rooms = room_trace(g, traj);
  double likelihood = 1.0;
  for (std::size_t t = 0; t < traj.actions.size(); ++t) {
    const auto policy = forward_policy(g, beliefs[t], ordering, rooms[t], noise);
    auto it = policy.find(traj.actions[t]);
    likelihood *= (it == policy.end()) ? 0.0 : it->second;
  }
  return likelihood;
}

ProbabilityDistribution optimal_posterior(const env::RoomGraph& g,
                                          const env::TrajectoryDef& traj,
                                          const ProbabilityDistribution& prior,
                                          NoiseParam noise) {
  const auto orderings = all_orderings(g);
  if (!prior.empty() && prior.size() != orderings.size())
    throw DimensionMismatch("prior size does not match ordering count");
  std::vector<double> masses(orderings.size());
  double total = 0.0;
  for (std::size_t i = 0; i < orderings.size(); ++i) {
    double p = prior.empty() ? 1.0 : prior[i];
    masses[i] = p * trajectory_likelihood(g, orderings[i], traj, noise);
    total += masses[i];
  }
  if (!(total > 0.0))
    throw DegeneratePosterior("every ordering has zero likelihood for trajectory '" +
                              traj.id + "'");
  return ProbabilityDistribution::from_masses(std::move(masses));
}

}  // namespace laip::oracle
