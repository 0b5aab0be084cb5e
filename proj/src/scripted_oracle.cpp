#include "laip/scripted_oracle.hpp"

#include <algorithm>
#include <charconv>

#include "laip/baselines.hpp"

namespace laip::runner {

std::string format_round_trip(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  if (ec != std::errc()) throw Error("double formatting failed");
  return std::string(buf, ptr);
}

namespace {

std::string lines_text(const std::string& prefix, const std::vector<double>& values) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out += "\n";
    out += prefix + std::to_string(i + 1) + ": " + format_round_trip(values[i]);
  }
  return out;
}

std::vector<double> project_policy(const std::map<env::Action, double>& policy,
                                   const std::vector<env::Action>& candidates) {
  std::vector<double> row(candidates.size(), 0.0);
  for (std::size_t j = 0; j < candidates.size(); ++j) {
    auto it = policy.find(candidates[j]);
    if (it != policy.end()) row[j] = it->second;
  }
  return row;
}

}  // namespace

void script_oracle_run(provider::ScriptedBackend& backend, const env::RoomGraph& graph,
                       const prompts::TemplateStore& store,
                       const engine::EngineSettings& settings, const std::string& mode,
                       const env::TrajectoryDef& traj, oracle::NoiseParam noise) {
  if (settings.hypothesis_mode != engine::HypothesisMode::orderings)
    throw ConfigError("the scripted analytic backend needs the orderings hypothesis space");
  const bool is_full = mode == "laip-full";
  const bool is_lcp = mode == "laip-lcp";
  const bool is_baseline = !is_full && !is_lcp;

  env::validate_trajectory(graph, traj);
  const auto hypotheses = engine::ordering_hypotheses(graph);
  const auto statements = hypotheses.statements();
  const auto orderings = oracle::all_orderings(graph);
  const auto beliefs = oracle::belief_trajectory(graph, traj);
  const auto rooms = env::room_trace(graph, traj);
  const engine::RequestBuilder builder(store, settings);

  // Two parallel states: the exact Bayes chain, and the chain the engine
  // will actually hold after parsing (they coincide when the parse floor
  // is disabled).
  ProbabilityDistribution exact_prior = ProbabilityDistribution::uniform(orderings.size());
  ProbabilityDistribution engine_prior = exact_prior;

  for (std::size_t t = 0; t < traj.actions.size(); ++t) {
    const std::vector<env::RoomId> visited(rooms.begin(), rooms.begin() + t + 1);
    const std::string ctx = prompts::render_state_context(store, graph, traj.world, visited);
    const auto candidates = env::legal_actions(graph, traj.world, rooms[t]);
    const std::string action_block = prompts::render_action_list(graph, candidates);

    auto found = std::find(candidates.begin(), candidates.end(), traj.actions[t]);
    if (found == candidates.end())
      throw IllegalTrajectory("observed action not legal at timestep " + std::to_string(t + 1));
    const std::size_t observed = static_cast<std::size_t>(found - candidates.begin());
    const std::string observed_label = env::to_string(candidates[observed], graph);

    engine::LikelihoodMatrix exact_matrix, engine_matrix;
    for (const auto& a : candidates) {
      exact_matrix.action_labels.push_back(env::to_string(a, graph));
      engine_matrix.action_labels.push_back(env::to_string(a, graph));
    }
    for (std::size_t i = 0; i < orderings.size(); ++i) {
      const auto policy = oracle::forward_policy(graph, beliefs[t], orderings[i], rooms[t], noise);
      std::vector<double> row = project_policy(policy, candidates);
      const std::string row_text = lines_text("A", row);
      if (candidates.size() > 1 && !is_baseline)
        backend.add(builder.likelihood_request(ctx, statements[i], action_block,
                                               candidates.size()),
                    row_text);
      // What the engine's parser will hold for this row.
      engine_matrix.rows.push_back(
          candidates.size() == 1
              ? ProbabilityDistribution::uniform(1)
              : provider::parse_distribution(row_text, candidates.size(), settings.parse));
      exact_matrix.rows.push_back(ProbabilityDistribution::from_normalized(row, 1e-9));
    }

    ProbabilityDistribution exact_post =
        engine::posterior_update_math(exact_prior, exact_matrix, observed);
    ProbabilityDistribution engine_post;
    if (is_lcp) {
      const std::string echo = lines_text("H", exact_post.values());
      backend.add(builder.posterior_request(ctx, statements, engine_prior, engine_matrix,
                                            observed_label),
                  echo);
      engine_post = provider::parse_distribution(echo, statements.size(), settings.parse);
    } else if (is_baseline) {
      const auto bmode = baselines::baseline_mode_from_string(mode);
      const std::string echo = lines_text("H", exact_post.values());
      backend.add(baselines::baseline_request(store, settings, bmode, ctx, statements,
                                              engine_prior, action_block, observed_label),
                  echo);
      engine_post = provider::parse_distribution(echo, statements.size(), settings.parse);
    } else {
      engine_post = engine::posterior_update_math(engine_prior, engine_matrix, observed);
    }
    exact_prior = std::move(exact_post);
    engine_prior = std::move(engine_post);
  }
}

engine::RunOutput run_optimal(const env::RoomGraph& graph,
                              const prompts::TemplateStore& store,
                              const env::TrajectoryDef& traj, oracle::NoiseParam noise) {
  env::validate_trajectory(graph, traj);
  engine::RunOutput out;
  out.hypotheses = engine::ordering_hypotheses(graph);
  const auto orderings = oracle::all_orderings(graph);
  out.initial_prior = ProbabilityDistribution::uniform(orderings.size());

  const auto beliefs = oracle::belief_trajectory(graph, traj);
  const auto rooms = env::room_trace(graph, traj);
  ProbabilityDistribution prior = out.initial_prior;
  for (std::size_t t = 0; t < traj.actions.size(); ++t) {
    engine::StepRecord step;
    step.timestep = t + 1;
    const std::vector<env::RoomId> visited(rooms.begin(), rooms.begin() + t + 1);
    step.state_context = prompts::render_state_context(store, graph, traj.world, visited);
    const auto candidates = env::legal_actions(graph, traj.world, rooms[t]);
    for (const auto& a : candidates)
      step.matrix.action_labels.push_back(env::to_string(a, graph));
    for (const auto& ordering : orderings) {
      const auto policy = oracle::forward_policy(graph, beliefs[t], ordering, rooms[t], noise);
      step.matrix.rows.push_back(ProbabilityDistribution::from_normalized(
          project_policy(policy, candidates), 1e-9));
    }
    auto found = std::find(candidates.begin(), candidates.end(), traj.actions[t]);
    if (found == candidates.end())
      throw IllegalTrajectory("observed action not legal at timestep " + std::to_string(t + 1));
    step.observed_index = static_cast<std::size_t>(found - candidates.begin());
    step.observed = step.matrix.action_labels[step.observed_index];
    step.prior = prior;
    step.posterior = engine::posterior_update_math(prior, step.matrix, step.observed_index);
    prior = step.posterior;
    out.steps.push_back(std::move(step));
  }
  return out;
}

}  // namespace laip::runner
