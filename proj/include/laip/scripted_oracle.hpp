#pragma once

#include <string>

#include "laip/engine.hpp"
#include "laip/oracle.hpp"
#include "laip/prompts.hpp"
#include "laip/provider.hpp"

namespace laip::runner {

// Pre-computes every request a run over `traj` will issue under `settings`
// and scripts the analytic observer's answer for it: forward-policy rows for
// per-hypothesis elicitations, Bayes-exact posterior text for
// provider-computed updates and single-call baselines. Probabilities are
// printed with round-trip precision so parsing reproduces them bit-exactly.
// Requires the orderings hypothesis space. Supported modes: laip-full,
// laip-lcp, laip-single-cot, generic-cot, zero-shot.
void script_oracle_run(provider::ScriptedBackend& backend, const env::RoomGraph& graph,
                       const prompts::TemplateStore& store,
                       const engine::EngineSettings& settings, const std::string& mode,
                       const env::TrajectoryDef& traj, oracle::NoiseParam noise = {});

// The analytic observer rendered as a run: per-timestep priors, posteriors,
// and forward-policy likelihood rows, with no provider involved.
engine::RunOutput run_optimal(const env::RoomGraph& graph,
                              const prompts::TemplateStore& store,
                              const env::TrajectoryDef& traj, oracle::NoiseParam noise = {});

// Shortest decimal form that parses back to exactly the same double.
std::string format_round_trip(double v);

}  // namespace laip::runner
