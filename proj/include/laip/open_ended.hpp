#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "laip/engine.hpp"
#include "laip/provider.hpp"

namespace laip::open_ended {

// A generated natural-language action candidate.
struct FreeAction {
  std::string text;
  std::optional<provider::EmbeddingVector> embedding;  // computed lazily
};

// Ground-truth action string matched softly onto the candidate list.
struct SoftObservation {
  std::string text;
  ProbabilityDistribution weights;
  double temperature = 1.0;
};

struct Scene {
  std::string context;          // what the observer sees this timestep
  std::string observed_action;  // the actor's recorded choice, as a string
};

// A free-form scenario: shared situation, per-timestep scenes with recorded
// actor actions, and a fixed hypothesis table usable without a generator.
struct Scenario {
  std::string situation;
  std::vector<Scene> scenes;
  std::vector<std::string> hypothesis_fixture;

  static Scenario from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
};

Scenario load_scenario(const std::filesystem::path& file);

// Numerically stable softmax of sims/temperature.
ProbabilityDistribution softmax_weights(std::span<const double> similarities,
                                        double temperature);

struct OpenEndedSettings {
  engine::EngineSettings engine;
  double tau = 1.0;           // softmax temperature over cosine similarities
  std::size_t n_actions = 6;  // candidates generated per timestep
};

// Elicits k distinct candidate actions for the state. Order is preserved so
// matrix columns stay stable across hypotheses.
std::vector<FreeAction> propose_actions(provider::Backend& backend,
                                        const prompts::TemplateStore& store,
                                        const engine::EngineSettings& settings,
                                        const std::string& state_context, std::size_t k,
                                        std::vector<engine::Transcript>* raw = nullptr,
                                        provider::TokenUsage* usage = nullptr);

// Softmax over cosine similarities between the observation string and each
// candidate. Fills missing candidate embeddings in place.
SoftObservation similarity_weights(provider::EmbeddingBackend& embedder,
                                   const std::string& observed,
                                   std::vector<FreeAction>& candidates,
                                   double temperature);

// posterior_i proportional to prior_i * sum_j weights_j * matrix_ij; reduces
// exactly to the constrained update when the weights are an indicator.
ProbabilityDistribution soft_posterior_update(const ProbabilityDistribution& prior,
                                              const engine::LikelihoodMatrix& matrix,
                                              const SoftObservation& soft_obs);

// Full scenario loop: hypotheses from the fixture (or generated from the
// situation), then per scene: propose actions, elicit per-hypothesis rows,
// soft-match the recorded action, update.
engine::RunOutput run_scenario(const prompts::TemplateStore& store,
                               provider::Backend& backend,
                               provider::EmbeddingBackend& embedder,
                               OpenEndedSettings settings, const Scenario& scenario);

std::pair<engine::RunOutput, std::string> run_scenario_with_partial(
    const prompts::TemplateStore& store, provider::Backend& backend,
    provider::EmbeddingBackend& embedder, OpenEndedSettings settings,
    const Scenario& scenario);

}  // namespace laip::open_ended
