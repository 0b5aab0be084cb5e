#include "laip/baselines.hpp"

#include <algorithm>

namespace laip::baselines {

BaselineMode baseline_mode_from_string(const std::string& s) {
  if (s == "laip-single-cot" || s == "single-cot") return BaselineMode::single_cot;
  if (s == "generic-cot") return BaselineMode::generic_cot;
  if (s == "zero-shot") return BaselineMode::zero_shot;
  throw ConfigError("unknown baseline mode '" + s + "'");
}

const char* baseline_template(BaselineMode mode) {
  switch (mode) {
    case BaselineMode::single_cot: return "single_cot";
    case BaselineMode::generic_cot: return "generic_cot";
    case BaselineMode::zero_shot: return "zero_shot";
  }
  throw ConfigError("unhandled baseline mode");
}

provider::CompletionRequest baseline_request(const prompts::TemplateStore& store,
                                             const engine::EngineSettings& settings,
                                             BaselineMode mode,
                                             const std::string& state_context,
                                             const std::vector<std::string>& hypothesis_texts,
                                             const ProbabilityDistribution& prior,
                                             const std::string& action_block,
                                             const std::string& chosen_action) {
  std::map<std::string, std::string> vars{
      {"observation", state_context},
      {"k", std::to_string(hypothesis_texts.size())},
      {"hypotheses", prompts::render_hypothesis_list(hypothesis_texts, prior)},
      {"action", chosen_action}};
  if (mode == BaselineMode::single_cot) vars["actions"] = action_block;

  provider::CompletionRequest req;
  req.model_id = settings.model_id;
  req.temperature = settings.likelihood_temperature;
  req.seed = settings.seed;
  if (!settings.system_prompt.empty())
    req.messages.push_back({"system", settings.system_prompt});
  req.messages.push_back({"user", store.render(baseline_template(mode), vars)});
  return req;
}

engine::RunOutput run_baseline(const env::RoomGraph& graph,
                               const prompts::TemplateStore& store,
                               provider::Backend& backend, engine::EngineSettings settings,
                               BaselineMode mode, const env::TrajectoryDef& traj) {
  auto [output, error] =
      run_baseline_with_partial(graph, store, backend, std::move(settings), mode, traj);
  if (!error.empty()) throw Error(error);
  return output;
}

std::pair<engine::RunOutput, std::string> run_baseline_with_partial(
    const env::RoomGraph& graph, const prompts::TemplateStore& store,
    provider::Backend& backend, engine::EngineSettings settings, BaselineMode mode,
    const env::TrajectoryDef& traj) {
  engine::RunOutput out;
  std::string error;
  provider::TokenUsage usage;
  try {
    env::validate_trajectory(graph, traj);
    engine::Engine hypothesis_source(graph, store, backend, settings);
    std::vector<engine::Transcript> prior_raw;
    auto [hypotheses, prior] = hypothesis_source.acquire_hypotheses(&prior_raw);
    usage += hypothesis_source.usage();
    out.hypotheses = std::move(hypotheses);
    out.initial_prior = prior;
    const auto statements = out.hypotheses.statements();

    engine::RequestBuilder builder(store, settings);
    const auto rooms = env::room_trace(graph, traj);
    for (std::size_t t = 0; t < traj.actions.size(); ++t) {
      engine::StepRecord step;
      step.timestep = t + 1;
      if (t == 0) step.raw = std::move(prior_raw);

      const std::vector<env::RoomId> visited(rooms.begin(), rooms.begin() + t + 1);
      step.state_context = prompts::render_state_context(store, graph, traj.world, visited);
      const auto candidates = env::legal_actions(graph, traj.world, rooms[t]);
      for (const auto& a : candidates)
        step.matrix.action_labels.push_back(env::to_string(a, graph));
      auto found = std::find(candidates.begin(), candidates.end(), traj.actions[t]);
      if (found == candidates.end())
        throw IllegalTrajectory("observed action is not legal at timestep " +
                                std::to_string(t + 1));
      step.observed_index = static_cast<std::size_t>(found - candidates.begin());
      step.observed = step.matrix.action_labels[step.observed_index];
      const std::string action_block = prompts::render_action_list(graph, candidates);

      provider::CompletionRequest request =
          baseline_request(store, settings, mode, step.state_context, statements, prior,
                           action_block, step.observed);
      ProbabilityDistribution posterior;
      for (int attempt = 0;; ++attempt) {
        provider::CompletionResult result = backend.complete(request);
        usage += result.usage;
        step.raw.push_back({"baseline", provider::request_to_json(request), result.text});
        try {
          posterior = provider::parse_distribution(result.text, statements.size(),
                                                   settings.parse);
          break;
        } catch (const ParseFailure&) {
          if (attempt + 1 >= settings.max_parse_retries) throw;
          request = builder.with_format_reminder(request, result.text, "H");
        }
      }

      step.prior = prior;
      step.posterior = std::move(posterior);
      // Baselines leave the matrix empty: there are no per-hypothesis rows.
      step.matrix.rows.clear();
      prior = step.posterior;
      out.steps.push_back(std::move(step));
    }
  } catch (const std::exception& e) {
    error = e.what();
  }
  out.usage = usage;
  return {std::move(out), std::move(error)};
}

}  // namespace laip::baselines
