#include "laip/open_ended.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>

namespace laip::open_ended {

Scenario Scenario::from_json(const nlohmann::json& j) {
  Scenario s;
  s.situation = j.at("situation").get<std::string>();
  for (const auto& sj : j.at("scenes"))
    s.scenes.push_back({sj.at("context").get<std::string>(),
                        sj.at("observed_action").get<std::string>()});
  if (j.contains("hypotheses"))
    for (const auto& h : j.at("hypotheses"))
      s.hypothesis_fixture.push_back(h.get<std::string>());
  if (s.scenes.empty()) throw ConfigError("scenario has no scenes");
  return s;
}

nlohmann::json Scenario::to_json() const {
  nlohmann::json j;
  j["situation"] = situation;
  auto& scenes_j = j["scenes"] = nlohmann::json::array();
  for (const auto& s : scenes)
    scenes_j.push_back({{"context", s.context}, {"observed_action", s.observed_action}});
  j["hypotheses"] = hypothesis_fixture;
  return j;
}

Scenario load_scenario(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in.is_open()) throw IoError("cannot open scenario file " + file.string());
  nlohmann::json j;
  in >> j;
  return Scenario::from_json(j);
}

ProbabilityDistribution softmax_weights(std::span<const double> similarities,
                                        double temperature) {
  if (similarities.empty()) throw DegenerateInput("no similarities");
  if (!(temperature > 0.0)) throw DegenerateInput("softmax temperature must be positive");
  double top = *std::max_element(similarities.begin(), similarities.end());
  std::vector<double> w(similarities.size());
  double total = 0.0;
  for (std::size_t i = 0; i < similarities.size(); ++i) {
    w[i] = std::exp((similarities[i] - top) / temperature);
    total += w[i];
  }
  for (double& x : w) x /= total;
  return ProbabilityDistribution::from_normalized(std::move(w), 1e-9);
}

std::vector<FreeAction> propose_actions(provider::Backend& backend,
                                        const prompts::TemplateStore& store,
                                        const engine::EngineSettings& settings,
                                        const std::string& state_context, std::size_t k,
                                        std::vector<engine::Transcript>* raw,
                                        provider::TokenUsage* usage) {
  if (k == 0) throw ConfigError("need at least one candidate action");
  provider::CompletionRequest request;
  request.model_id = settings.model_id;
  request.temperature = settings.hypothesis_temperature;  // diversity wanted here too
  request.seed = settings.seed;
  if (!settings.system_prompt.empty())
    request.messages.push_back({"system", settings.system_prompt});
  request.messages.push_back({"user", store.render("propose_actions",
                                                   {{"observation", state_context},
                                                    {"k", std::to_string(k)}})});
  engine::RequestBuilder builder(store, settings);
  for (int attempt = 0;; ++attempt) {
    provider::CompletionResult result = backend.complete(request);
    if (usage) *usage += result.usage;
    if (raw) raw->push_back({"actions", provider::request_to_json(request), result.text});
    try {
      auto items = provider::parse_numbered_list(result.text, k);
      std::set<std::string> unique(items.begin(), items.end());
      if (unique.size() != items.size())
        throw ParseFailure("candidate actions are not distinct");
      std::vector<FreeAction> out;
      for (auto& t : items) out.push_back({std::move(t), std::nullopt});
      return out;
    } catch (const ParseFailure&) {
      if (attempt + 1 >= settings.max_parse_retries) throw;
      request = builder.with_format_reminder(request, result.text, "");
    }
  }
}

SoftObservation similarity_weights(provider::EmbeddingBackend& embedder,
                                   const std::string& observed,
                                   std::vector<FreeAction>& candidates,
                                   double temperature) {
  if (candidates.empty()) throw DegenerateInput("no candidate actions");
  provider::EmbeddingVector obs_vec = embedder.embed(observed);
  std::vector<double> sims;
  sims.reserve(candidates.size());
  for (auto& c : candidates) {
    if (!c.embedding) c.embedding = embedder.embed(c.text);
    sims.push_back(provider::cosine_similarity(obs_vec, *c.embedding));
  }
  SoftObservation soft;
  soft.text = observed;
  soft.temperature = temperature;
  soft.weights = softmax_weights(sims, temperature);
  return soft;
}

ProbabilityDistribution soft_posterior_update(const ProbabilityDistribution& prior,
                                              const engine::LikelihoodMatrix& matrix,
                                              const SoftObservation& soft_obs) {
  return engine::posterior_update_math(prior, matrix, soft_obs.weights);
}

engine::RunOutput run_scenario(const prompts::TemplateStore& store,
                               provider::Backend& backend,
                               provider::EmbeddingBackend& embedder,
                               OpenEndedSettings settings, const Scenario& scenario) {
  auto [output, error] =
      run_scenario_with_partial(store, backend, embedder, std::move(settings), scenario);
  if (!error.empty()) throw Error(error);
  return output;
}

std::pair<engine::RunOutput, std::string> run_scenario_with_partial(
    const prompts::TemplateStore& store, provider::Backend& backend,
    provider::EmbeddingBackend& embedder, OpenEndedSettings settings,
    const Scenario& scenario) {
  engine::RunOutput out;
  std::string error;
  provider::TokenUsage usage;

  engine::EngineSettings& es = settings.engine;
  if (es.system_prompt.empty()) es.system_prompt = scenario.situation;

  try {
    std::vector<engine::Transcript> prior_raw;
    ProbabilityDistribution prior;
    if (es.hypothesis_mode != engine::HypothesisMode::generate) {
      if (scenario.hypothesis_fixture.empty())
        throw ConfigError("scenario ships no hypothesis fixture; use hypothesis mode 'generate'");
      for (std::size_t i = 0; i < scenario.hypothesis_fixture.size(); ++i)
        out.hypotheses.items.push_back({i, scenario.hypothesis_fixture[i], std::nullopt});
      prior = ProbabilityDistribution::uniform(out.hypotheses.size());
    } else {
      // Generate hypotheses from the situation itself.
      std::string prompt = store.render(
          "hypothesis_generation_open",
          {{"situation", scenario.situation}, {"n", std::to_string(es.n_hypotheses)}});
      engine::RequestBuilder builder(store, es);
      provider::CompletionRequest request = builder.hypothesis_request(prompt);
      for (int attempt = 0;; ++attempt) {
        provider::CompletionResult result = backend.complete(request);
        usage += result.usage;
        prior_raw.push_back({"hypotheses", provider::request_to_json(request), result.text});
        try {
          auto parsed = provider::parse_hypotheses(result.text, es.n_hypotheses, es.parse);
          for (std::size_t i = 0; i < parsed.texts.size(); ++i)
            out.hypotheses.items.push_back({i, parsed.texts[i], std::nullopt});
          prior = es.prior_mode == engine::PriorMode::uniform
                      ? ProbabilityDistribution::uniform(es.n_hypotheses)
                      : parsed.prior;
          break;
        } catch (const ParseFailure&) {
          if (attempt + 1 >= es.max_parse_retries) throw;
          request = builder.with_format_reminder(request, result.text, "");
        }
      }
    }
    out.initial_prior = prior;

    engine::RequestBuilder builder(store, es);
    for (std::size_t t = 0; t < scenario.scenes.size(); ++t) {
      const Scene& scene = scenario.scenes[t];
      engine::StepRecord step;
      step.timestep = t + 1;
      if (t == 0) step.raw = std::move(prior_raw);
      step.state_context = scene.context;

      std::vector<FreeAction> candidates = propose_actions(
          backend, store, es, scene.context, settings.n_actions, &step.raw, &usage);
      std::string action_block;
      for (std::size_t i = 0; i < candidates.size(); ++i) {
        if (i) action_block += "\n";
        action_block += "A" + std::to_string(i + 1) + ": " + candidates[i].text;
        step.matrix.action_labels.push_back(candidates[i].text);
      }

      step.matrix.rows.resize(out.hypotheses.size());
      for (const auto& hyp : out.hypotheses.items) {
        provider::CompletionRequest request;
        request.model_id = es.model_id;
        request.temperature = es.likelihood_temperature;
        request.seed = es.seed;
        if (!es.system_prompt.empty())
          request.messages.push_back({"system", es.system_prompt});
        request.messages.push_back(
            {"user", store.render("likelihood_open", {{"observation", scene.context},
                                                      {"hypothesis", hyp.text},
                                                      {"actions", action_block}})});
        for (int attempt = 0;; ++attempt) {
          provider::CompletionResult result = backend.complete(request);
          usage += result.usage;
          step.raw.push_back({"likelihood[" + std::to_string(hyp.id) + "]",
                              provider::request_to_json(request), result.text});
          try {
            step.matrix.rows[hyp.id] =
                provider::parse_distribution(result.text, candidates.size(), es.parse);
            break;
          } catch (const ParseFailure&) {
            if (attempt + 1 >= es.max_parse_retries) throw;
            request = builder.with_format_reminder(request, result.text, "A");
          }
        }
      }

      SoftObservation soft =
          similarity_weights(embedder, scene.observed_action, candidates, settings.tau);
      step.observed = scene.observed_action;
      step.observed_index = soft.weights.argmax();  // closest candidate
      step.obs_weights = soft.weights.values();

      step.prior = prior;
      step.posterior = soft_posterior_update(prior, step.matrix, soft);
      prior = step.posterior;
      out.steps.push_back(std::move(step));
    }
  } catch (const std::exception& e) {
    error = e.what();
  }
  out.usage = usage;
  return {std::move(out), std::move(error)};
}

}  // namespace laip::open_ended
