#pragma once

#include <cstdint>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "laip/env.hpp"
#include "laip/oracle.hpp"
#include "laip/parsing.hpp"
#include "laip/prompts.hpp"
#include "laip/provider.hpp"
#include "laip/simplex.hpp"

namespace laip::engine {

struct Hypothesis {
  std::size_t id = 0;  // position within the set
  std::string text;
  // Present when the statement encodes a strict preference ranking.
  std::optional<oracle::PreferenceOrdering> structured;
};

struct HypothesisSet {
  std::vector<Hypothesis> items;

  std::size_t size() const { return items.size(); }
  std::vector<std::string> statements() const;
};

// The built-in hypothesis space of every strict preference ordering.
HypothesisSet ordering_hypotheses(const env::RoomGraph& g);

// Attempts to read a strict ranking out of a free-text statement: all
// restaurant names mentioned exactly once alongside ranking language.
std::optional<oracle::PreferenceOrdering> recognize_ordering(const env::RoomGraph& g,
                                                             const std::string& text);

// Per-hypothesis action likelihoods over a shared candidate list.
struct LikelihoodMatrix {
  std::vector<std::string> action_labels;
  std::vector<ProbabilityDistribution> rows;  // one simplex per hypothesis

  std::size_t hypothesis_count() const { return rows.size(); }
  std::size_t action_count() const { return action_labels.size(); }
  void validate() const;  // throws DimensionMismatch on ragged rows
};

struct Transcript {
  std::string purpose;  // "likelihood[3]", "posterior", ...
  nlohmann::json request;
  std::string response;
};

struct StepRecord {
  std::size_t timestep = 0;  // 1-based
  std::string state_context;
  LikelihoodMatrix matrix;  // empty for single-call baselines
  std::string observed;
  std::size_t observed_index = 0;
  // Soft observation weights over candidate actions (open-ended runs only).
  std::optional<std::vector<double>> obs_weights;
  ProbabilityDistribution prior;
  ProbabilityDistribution posterior;
  std::optional<ProbabilityDistribution> posterior_math;  // kept when the provider computes it
  std::optional<double> llm_posterior_error;              // max |posterior - posterior_math|
  std::vector<Transcript> raw;

  nlohmann::json to_json(bool include_raw = true) const;
  static StepRecord from_json(const nlohmann::json& j);
};

enum class UpdateMode { math, llm };
enum class HypothesisMode { orderings, generate, fixture };
enum class PriorMode { uniform, elicited };

UpdateMode update_mode_from_string(const std::string& s);
HypothesisMode hypothesis_mode_from_string(const std::string& s);

struct EngineSettings {
  std::string model_id = "default";
  std::string system_prompt;
  UpdateMode update = UpdateMode::math;
  HypothesisMode hypothesis_mode = HypothesisMode::orderings;
  PriorMode prior_mode = PriorMode::uniform;
  std::size_t n_hypotheses = 20;
  // Fully rendered scenario prompt for hypothesis generation; empty means
  // the default restaurants template.
  std::string hypothesis_prompt;
  std::vector<std::string> fixture_hypotheses;  // HypothesisMode::fixture
  double hypothesis_temperature = 0.7;  // diversity for generation
  double likelihood_temperature = 0.0;  // stability for elicitation
  std::optional<std::int64_t> seed;
  provider::ParseOptions parse;
  int max_parse_retries = 3;
  bool parallel_hypotheses = false;
};

// Builds every provider request the engine issues, so deterministic harnesses
// can reproduce digests without running the engine.
class RequestBuilder {
 public:
  RequestBuilder(const prompts::TemplateStore& store, const EngineSettings& settings)
      : store_(&store), settings_(&settings) {}

  provider::CompletionRequest hypothesis_request(const std::string& scenario_prompt) const;
  provider::CompletionRequest likelihood_request(const std::string& state_context,
                                                 const std::string& hypothesis_text,
                                                 const std::string& action_block,
                                                 std::size_t n_actions) const;
  provider::CompletionRequest posterior_request(const std::string& state_context,
                                                const std::vector<std::string>& hypothesis_texts,
                                                const ProbabilityDistribution& prior,
                                                const LikelihoodMatrix& matrix,
                                                const std::string& chosen_action) const;
  provider::CompletionRequest with_format_reminder(const provider::CompletionRequest& failed,
                                                   const std::string& bad_response,
                                                   const std::string& label) const;

  const prompts::TemplateStore& store() const { return *store_; }

 private:
  const prompts::TemplateStore* store_;
  const EngineSettings* settings_;
};

// posterior_i proportional to prior_i * sum_j obs_weights_j * matrix_ij.
// With indicator weights this is the classic single-action Bayes update.
ProbabilityDistribution posterior_update_math(const ProbabilityDistribution& prior,
                                              const LikelihoodMatrix& matrix,
                                              const ProbabilityDistribution& obs_weights);
ProbabilityDistribution posterior_update_math(const ProbabilityDistribution& prior,
                                              const LikelihoodMatrix& matrix,
                                              std::size_t observed_index);

struct RunOutput {
  HypothesisSet hypotheses;
  ProbabilityDistribution initial_prior;
  std::vector<StepRecord> steps;
  provider::TokenUsage usage;

  const ProbabilityDistribution& final_posterior() const {
    return steps.empty() ? initial_prior : steps.back().posterior;
  }
};

// The full per-timestep loop: elicit a likelihood row per hypothesis with a
// separate provider call, observe the action, update, and feed the posterior
// forward as the next prior.
class Engine {
 public:
  Engine(const env::RoomGraph& graph, const prompts::TemplateStore& store,
         provider::Backend& backend, EngineSettings settings);

  std::pair<HypothesisSet, ProbabilityDistribution> generate_prior(
      const std::string& scenario_prompt, std::size_t n,
      std::vector<Transcript>* raw = nullptr);

  ProbabilityDistribution elicit_likelihood_row(const std::string& state_context,
                                                const Hypothesis& hypothesis,
                                                const std::string& action_block,
                                                std::size_t n_actions,
                                                std::vector<Transcript>* raw = nullptr);

  ProbabilityDistribution posterior_update_llm(const std::string& state_context,
                                               const HypothesisSet& hypotheses,
                                               const ProbabilityDistribution& prior,
                                               const LikelihoodMatrix& matrix,
                                               const std::string& chosen_action,
                                               std::vector<Transcript>* raw = nullptr);

  // Acquires the hypothesis set per settings and runs every timestep of the
  // trajectory. A failing step aborts with the partial steps preserved in
  // the exception-safe output of previous calls; callers wanting partial
  // records should use run_with_partial.
  RunOutput run(const env::TrajectoryDef& traj);
  // On error, returns what completed and the error text.
  std::pair<RunOutput, std::string> run_with_partial(const env::TrajectoryDef& traj);

  std::pair<HypothesisSet, ProbabilityDistribution> acquire_hypotheses(
      std::vector<Transcript>* raw = nullptr);

  const EngineSettings& settings() const { return settings_; }
  const RequestBuilder& requests() const { return builder_; }
  // Tokens consumed since construction or the last run.
  provider::TokenUsage usage() const {
    std::lock_guard lock(usage_mu_);
    return usage_;
  }

 private:
  ProbabilityDistribution complete_and_parse(provider::CompletionRequest request,
                                             std::size_t k, const std::string& label,
                                             const std::string& purpose,
                                             std::vector<Transcript>* raw);

  const env::RoomGraph* graph_;
  const prompts::TemplateStore* store_;
  provider::Backend* backend_;
  EngineSettings settings_;
  RequestBuilder builder_;
  mutable std::mutex usage_mu_;  // row elicitations may run concurrently
  provider::TokenUsage usage_;
};

}  // namespace laip::engine
