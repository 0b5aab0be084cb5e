#pragma once

#include <string>
#include <utility>

#include "laip/engine.hpp"

namespace laip::baselines {

// Comparison configurations that collapse the per-hypothesis loop into a
// single provider call per timestep. They share the engine's hypothesis set,
// candidate actions, and record shapes.
enum class BaselineMode { single_cot, generic_cot, zero_shot };

BaselineMode baseline_mode_from_string(const std::string& s);
const char* baseline_template(BaselineMode mode);

// Request issued at one timestep (exposed so harnesses can reproduce it).
provider::CompletionRequest baseline_request(const prompts::TemplateStore& store,
                                             const engine::EngineSettings& settings,
                                             BaselineMode mode,
                                             const std::string& state_context,
                                             const std::vector<std::string>& hypothesis_texts,
                                             const ProbabilityDistribution& prior,
                                             const std::string& action_block,
                                             const std::string& chosen_action);

engine::RunOutput run_baseline(const env::RoomGraph& graph,
                               const prompts::TemplateStore& store,
                               provider::Backend& backend, engine::EngineSettings settings,
                               BaselineMode mode, const env::TrajectoryDef& traj);

std::pair<engine::RunOutput, std::string> run_baseline_with_partial(
    const env::RoomGraph& graph, const prompts::TemplateStore& store,
    provider::Backend& backend, engine::EngineSettings settings, BaselineMode mode,
    const env::TrajectoryDef& traj);

}  // namespace laip::baselines
