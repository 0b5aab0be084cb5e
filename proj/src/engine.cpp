#include "laip/engine.hpp"

#include <algorithm>
#include <cctype>
#include <future>

namespace laip::engine {

namespace {

std::string lowercase(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return s;
}

}  // namespace

std::vector<std::string> HypothesisSet::statements() const {
  std::vector<std::string> out;
  out.reserve(items.size());
  for (const auto& h : items) out.push_back(h.text);
  return out;
}

HypothesisSet ordering_hypotheses(const env::RoomGraph& g) {
  HypothesisSet set;
  const auto orderings = oracle::all_orderings(g);
  for (std::size_t i = 0; i < orderings.size(); ++i)
    set.items.push_back({i, orderings[i].statement(g), orderings[i]});
  return set;
}

std::optional<oracle::PreferenceOrdering> recognize_ordering(const env::RoomGraph& g,
                                                             const std::string& text) {
  const std::string t = lowercase(text);
  bool has_rank_language = t.find("prefers") != std::string::npos ||
                           t.find("most") != std::string::npos ||
                           t.find("then") != std::string::npos ||
                           t.find(">") != std::string::npos;
  if (!has_rank_language) return std::nullopt;

  std::vector<std::pair<std::size_t, env::RestaurantId>> mentions;
  for (env::RestaurantId i = 0; i < g.restaurant_count(); ++i) {
    const std::string name = lowercase(g.restaurant(i).name);
    auto first = t.find(name);
    if (first == std::string::npos) return std::nullopt;
    if (t.find(name, first + 1) != std::string::npos) return std::nullopt;  // ambiguous
    mentions.emplace_back(first, i);
  }
  std::sort(mentions.begin(), mentions.end());
  oracle::PreferenceOrdering ordering;
  for (const auto& [pos, id] : mentions) ordering.ranking.push_back(id);
  return ordering;
}

void LikelihoodMatrix::validate() const {
  for (const auto& row : rows)
    if (row.size() != action_labels.size())
      throw DimensionMismatch("likelihood matrix is not rectangular");
}

nlohmann::json StepRecord::to_json(bool include_raw) const {
  nlohmann::json j;
  j["timestep"] = timestep;
  j["state_context"] = state_context;
  j["actions"] = matrix.action_labels;
  auto& rows_j = j["matrix"] = nlohmann::json::array();
  for (const auto& row : matrix.rows) rows_j.push_back(row.values());
  j["observed"] = observed;
  j["observed_index"] = observed_index;
  if (obs_weights) j["obs_weights"] = *obs_weights;
  j["prior"] = prior.values();
  j["posterior"] = posterior.values();
  if (posterior_math) j["posterior_math"] = posterior_math->values();
  if (llm_posterior_error) j["llm_posterior_error"] = *llm_posterior_error;
  if (include_raw) {
    auto& raw_j = j["raw"] = nlohmann::json::array();
    for (const auto& t : raw)
      raw_j.push_back({{"purpose", t.purpose}, {"request", t.request}, {"response", t.response}});
  }
  return j;
}

StepRecord StepRecord::from_json(const nlohmann::json& j) {
  StepRecord s;
  s.timestep = j.at("timestep").get<std::size_t>();
  s.state_context = j.at("state_context").get<std::string>();
  s.matrix.action_labels = j.at("actions").get<std::vector<std::string>>();
  for (const auto& row : j.at("matrix"))
    s.matrix.rows.push_back(
        ProbabilityDistribution::from_normalized(row.get<std::vector<double>>(), 1e-6));
  s.observed = j.at("observed").get<std::string>();
  s.observed_index = j.at("observed_index").get<std::size_t>();
  if (j.contains("obs_weights"))
    s.obs_weights = j.at("obs_weights").get<std::vector<double>>();
  s.prior = ProbabilityDistribution::from_normalized(
      j.at("prior").get<std::vector<double>>(), 1e-6);
  s.posterior = ProbabilityDistribution::from_normalized(
      j.at("posterior").get<std::vector<double>>(), 1e-6);
  if (j.contains("posterior_math"))
    s.posterior_math = ProbabilityDistribution::from_normalized(
        j.at("posterior_math").get<std::vector<double>>(), 1e-6);
  if (j.contains("llm_posterior_error"))
    s.llm_posterior_error = j.at("llm_posterior_error").get<double>();
  if (j.contains("raw"))
    for (const auto& t : j.at("raw"))
      s.raw.push_back({t.at("purpose").get<std::string>(), t.at("request"),
                       t.at("response").get<std::string>()});
  return s;
}

UpdateMode update_mode_from_string(const std::string& s) {
  if (s == "math") return UpdateMode::math;
  if (s == "llm") return UpdateMode::llm;
  throw ConfigError("unknown update mode '" + s + "'");
}

HypothesisMode hypothesis_mode_from_string(const std::string& s) {
  if (s == "orderings") return HypothesisMode::orderings;
  if (s == "generate") return HypothesisMode::generate;
  if (s == "fixture") return HypothesisMode::fixture;
  throw ConfigError("unknown hypothesis mode '" + s + "'");
}

provider::CompletionRequest RequestBuilder::hypothesis_request(
    const std::string& scenario_prompt) const {
  provider::CompletionRequest req;
  req.model_id = settings_->model_id;
  req.temperature = settings_->hypothesis_temperature;
  req.seed = settings_->seed;
  if (!settings_->system_prompt.empty())
    req.messages.push_back({"system", settings_->system_prompt});
  req.messages.push_back({"user", scenario_prompt});
  return req;
}

provider::CompletionRequest RequestBuilder::likelihood_request(
    const std::string& state_context, const std::string& hypothesis_text,
    const std::string& action_block, std::size_t n_actions) const {
  provider::CompletionRequest req;
  req.model_id = settings_->model_id;
  req.temperature = settings_->likelihood_temperature;
  req.seed = settings_->seed;
  if (!settings_->system_prompt.empty())
    req.messages.push_back({"system", settings_->system_prompt});
  (void)n_actions;
  req.messages.push_back({"user", store_->render("likelihood",
                                                 {{"observation", state_context},
                                                  {"hypothesis", hypothesis_text},
                                                  {"actions", action_block}})});
  return req;
}

provider::CompletionRequest RequestBuilder::posterior_request(
    const std::string& state_context, const std::vector<std::string>& hypothesis_texts,
    const ProbabilityDistribution& prior, const LikelihoodMatrix& matrix,
    const std::string& chosen_action) const {
  provider::CompletionRequest req;
  req.model_id = settings_->model_id;
  req.temperature = settings_->likelihood_temperature;
  req.seed = settings_->seed;
  if (!settings_->system_prompt.empty())
    req.messages.push_back({"system", settings_->system_prompt});
  std::vector<std::vector<double>> raw_rows;
  for (const auto& row : matrix.rows) raw_rows.push_back(row.values());
  req.messages.push_back(
      {"user", store_->render("posterior_llm",
                              {{"observation", state_context},
                               {"k", std::to_string(hypothesis_texts.size())},
                               {"hypotheses", prompts::render_hypothesis_list(hypothesis_texts, prior)},
                               {"matrix", prompts::render_matrix(raw_rows)},
                               {"action", chosen_action}})});
  return req;
}

provider::CompletionRequest RequestBuilder::with_format_reminder(
    const provider::CompletionRequest& failed, const std::string& bad_response,
    const std::string& label) const {
  provider::CompletionRequest req = failed;
  req.messages.push_back({"assistant", bad_response});
  req.messages.push_back({"user", store_->render("format_reminder", {{"label", label}})});
  return req;
}

ProbabilityDistribution posterior_update_math(const ProbabilityDistribution& prior,
                                              const LikelihoodMatrix& matrix,
                                              const ProbabilityDistribution& obs_weights) {
  matrix.validate();
  if (matrix.hypothesis_count() != prior.size())
    throw DimensionMismatch("matrix row count does not match prior size");
  if (obs_weights.size() != matrix.action_count())
    throw DimensionMismatch("observation weights do not match action count");
  std::vector<double> masses(prior.size());
  double total = 0.0;
  for (std::size_t i = 0; i < prior.size(); ++i) {
    double mixed = 0.0;
    for (std::size_t j = 0; j < obs_weights.size(); ++j)
      mixed += obs_weights[j] * matrix.rows[i][j];
    masses[i] = prior[i] * mixed;
    total += masses[i];
  }
  if (!(total > 0.0))
    throw DegeneratePosterior("weighted likelihood is zero for every hypothesis");
  return ProbabilityDistribution::from_masses(std::move(masses));
}

ProbabilityDistribution posterior_update_math(const ProbabilityDistribution& prior,
                                              const LikelihoodMatrix& matrix,
                                              std::size_t observed_index) {
  if (observed_index >= matrix.action_count())
    throw DimensionMismatch("observed action index out of range");
  std::vector<double> indicator(matrix.action_count(), 0.0);
  indicator[observed_index] = 1.0;
  return posterior_update_math(prior, matrix,
                               ProbabilityDistribution::from_normalized(std::move(indicator)));
}

Engine::Engine(const env::RoomGraph& graph, const prompts::TemplateStore& store,
               provider::Backend& backend, EngineSettings settings)
    : graph_(&graph),
      store_(&store),
      backend_(&backend),
      settings_(std::move(settings)),
      builder_(store, settings_) {}

ProbabilityDistribution Engine::complete_and_parse(provider::CompletionRequest request,
                                                   std::size_t k, const std::string& label,
                                                   const std::string& purpose,
                                                   std::vector<Transcript>* raw) {
  for (int attempt = 0;; ++attempt) {
    provider::CompletionResult result = backend_->complete(request);
    {
      std::lock_guard lock(usage_mu_);
      usage_ += result.usage;
    }
    if (raw) raw->push_back({purpose, provider::request_to_json(request), result.text});
    try {
      return provider::parse_distribution(result.text, k, settings_.parse);
    } catch (const ParseFailure&) {
      if (attempt + 1 >= settings_.max_parse_retries) throw;
      request = builder_.with_format_reminder(request, result.text, label);
    }
  }
}

std::pair<HypothesisSet, ProbabilityDistribution> Engine::generate_prior(
    const std::string& scenario_prompt, std::size_t n, std::vector<Transcript>* raw) {
  provider::CompletionRequest request = builder_.hypothesis_request(scenario_prompt);
  for (int attempt = 0;; ++attempt) {
    provider::CompletionResult result = backend_->complete(request);
    {
      std::lock_guard lock(usage_mu_);
      usage_ += result.usage;
    }
    if (raw) raw->push_back({"hypotheses", provider::request_to_json(request), result.text});
    try {
      auto parsed = provider::parse_hypotheses(result.text, n, settings_.parse);
      HypothesisSet set;
      for (std::size_t i = 0; i < parsed.texts.size(); ++i)
        set.items.push_back(
            {i, parsed.texts[i], recognize_ordering(*graph_, parsed.texts[i])});
      return {std::move(set), std::move(parsed.prior)};
    } catch (const ParseFailure&) {
      if (attempt + 1 >= settings_.max_parse_retries) throw;
      request = builder_.with_format_reminder(request, result.text, "");
    }
  }
}

ProbabilityDistribution Engine::elicit_likelihood_row(const std::string& state_context,
                                                      const Hypothesis& hypothesis,
                                                      const std::string& action_block,
                                                      std::size_t n_actions,
                                                      std::vector<Transcript>* raw) {
  if (n_actions == 0) throw DimensionMismatch("no candidate actions");
  if (n_actions == 1) {
    // Single candidate: the row is determined, no call needed.
    return ProbabilityDistribution::uniform(1);
  }
  auto request =
      builder_.likelihood_request(state_context, hypothesis.text, action_block, n_actions);
  return complete_and_parse(std::move(request), n_actions, "A",
                            "likelihood[" + std::to_string(hypothesis.id) + "]", raw);
}

ProbabilityDistribution Engine::posterior_update_llm(const std::string& state_context,
                                                     const HypothesisSet& hypotheses,
                                                     const ProbabilityDistribution& prior,
                                                     const LikelihoodMatrix& matrix,
                                                     const std::string& chosen_action,
                                                     std::vector<Transcript>* raw) {
  auto request = builder_.posterior_request(state_context, hypotheses.statements(), prior,
                                            matrix, chosen_action);
  return complete_and_parse(std::move(request), hypotheses.size(), "H", "posterior", raw);
}

std::pair<HypothesisSet, ProbabilityDistribution> Engine::acquire_hypotheses(
    std::vector<Transcript>* raw) {
  switch (settings_.hypothesis_mode) {
    case HypothesisMode::orderings: {
      HypothesisSet set = ordering_hypotheses(*graph_);
      const std::size_t n = set.size();
      return {std::move(set), ProbabilityDistribution::uniform(n)};
    }
    case HypothesisMode::generate: {
      std::string prompt = settings_.hypothesis_prompt.empty()
                               ? store_->render("hypothesis_generation",
                                                {{"n", std::to_string(settings_.n_hypotheses)}})
                               : settings_.hypothesis_prompt;
      auto [set, elicited] = generate_prior(prompt, settings_.n_hypotheses, raw);
      if (settings_.prior_mode == PriorMode::uniform)
        return {std::move(set), ProbabilityDistribution::uniform(settings_.n_hypotheses)};
      return {std::move(set), std::move(elicited)};
    }
    case HypothesisMode::fixture: {
      if (settings_.fixture_hypotheses.empty())
        throw ConfigError("fixture hypothesis mode needs fixture_hypotheses");
      HypothesisSet set;
      for (std::size_t i = 0; i < settings_.fixture_hypotheses.size(); ++i)
        set.items.push_back({i, settings_.fixture_hypotheses[i],
                             recognize_ordering(*graph_, settings_.fixture_hypotheses[i])});
      return {std::move(set), ProbabilityDistribution::uniform(set.size())};
    }
  }
  throw ConfigError("unhandled hypothesis mode");
}

RunOutput Engine::run(const env::TrajectoryDef& traj) {
  auto [output, error] = run_with_partial(traj);
  if (!error.empty()) throw Error(error);
  return output;
}

std::pair<RunOutput, std::string> Engine::run_with_partial(const env::TrajectoryDef& traj) {
  RunOutput out;
  usage_ = {};
  std::string error;
  try {
    validate_trajectory(*graph_, traj);
    std::vector<Transcript> prior_raw;
    auto [hypotheses, prior] = acquire_hypotheses(&prior_raw);
    out.hypotheses = std::move(hypotheses);
    out.initial_prior = prior;

    const auto rooms = env::room_trace(*graph_, traj);
    for (std::size_t t = 0; t < traj.actions.size(); ++t) {
      StepRecord step;
      step.timestep = t + 1;
      if (t == 0) step.raw = std::move(prior_raw);

      const std::vector<env::RoomId> visited(rooms.begin(), rooms.begin() + t + 1);
      step.state_context =
          prompts::render_state_context(*store_, *graph_, traj.world, visited);

      const auto candidates = env::legal_actions(*graph_, traj.world, rooms[t]);
      for (const auto& a : candidates)
        step.matrix.action_labels.push_back(env::to_string(a, *graph_));
      const std::string action_block =
          prompts::render_action_list(*graph_, candidates);

      auto found = std::find(candidates.begin(), candidates.end(), traj.actions[t]);
      if (found == candidates.end())
        throw IllegalTrajectory("observed action is not legal at timestep " +
                                std::to_string(t + 1));
      step.observed_index = static_cast<std::size_t>(found - candidates.begin());
      step.observed = step.matrix.action_labels[step.observed_index];

      step.matrix.rows.resize(out.hypotheses.size());
      if (settings_.parallel_hypotheses && out.hypotheses.size() > 1) {
        std::vector<std::future<std::pair<ProbabilityDistribution, std::vector<Transcript>>>>
            futures;
        for (const auto& hyp : out.hypotheses.items)
          futures.push_back(std::async(std::launch::async, [&, hyp] {
            std::vector<Transcript> raw;
            auto row = elicit_likelihood_row(step.state_context, hyp, action_block,
                                             candidates.size(), &raw);
            return std::make_pair(std::move(row), std::move(raw));
          }));
        for (std::size_t i = 0; i < futures.size(); ++i) {
          auto [row, raw] = futures[i].get();  // ordered by hypothesis id
          step.matrix.rows[i] = std::move(row);
          for (auto& tr : raw) step.raw.push_back(std::move(tr));
        }
      } else {
        for (const auto& hyp : out.hypotheses.items)
          step.matrix.rows[hyp.id] = elicit_likelihood_row(
              step.state_context, hyp, action_block, candidates.size(), &step.raw);
      }

      step.prior = prior;
      ProbabilityDistribution post_math =
          posterior_update_math(prior, step.matrix, step.observed_index);
      if (settings_.update == UpdateMode::llm) {
        step.posterior = posterior_update_llm(step.state_context, out.hypotheses, prior,
                                              step.matrix, step.observed, &step.raw);
        step.posterior_math = post_math;
        double max_err = 0.0;
        for (std::size_t i = 0; i < post_math.size(); ++i)
          max_err = std::max(max_err, std::abs(step.posterior[i] - post_math[i]));
        step.llm_posterior_error = max_err;
      } else {
        step.posterior = std::move(post_math);
      }
      prior = step.posterior;
      out.steps.push_back(std::move(step));
    }
  } catch (const std::exception& e) {
    error = e.what();
  }
  out.usage = usage_;
  return {std::move(out), std::move(error)};
}

}  // namespace laip::engine
