#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "laip/open_ended.hpp"
#include "support/generators.hpp"

using namespace laip;
using doctest::Approx;

namespace {

prompts::TemplateStore store() {
  return prompts::TemplateStore::load_dir(std::string(LAIP_DATA_DIR) + "/prompts");
}

engine::EngineSettings base_settings() {
  engine::EngineSettings s;
  s.model_id = "scripted";
  s.parse.floor = 0.0;
  s.seed = 3;
  return s;
}

}  // namespace

TEST_CASE("softmax weights") {
  SUBCASE("closed-form two-candidate case") {
    auto w = open_ended::softmax_weights(std::vector<double>{1.0, 0.0}, 1.0);
    double e = std::exp(1.0);
    CHECK(w[0] == Approx(e / (e + 1.0)).epsilon(1e-12));
    CHECK(w[1] == Approx(1.0 / (e + 1.0)).epsilon(1e-12));
  }
  SUBCASE("equal similarities give uniform weights") {
    auto w = open_ended::softmax_weights(std::vector<double>{0.4, 0.4, 0.4, 0.4}, 2.0);
    for (std::size_t i = 0; i < 4; ++i) CHECK(w[i] == Approx(0.25).epsilon(1e-12));
  }
  SUBCASE("shift invariance") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> sim(-1.0, 1.0);
    for (int iter = 0; iter < 500; ++iter) {
      std::vector<double> s(5), shifted(5);
      for (std::size_t i = 0; i < 5; ++i) {
        s[i] = sim(rng);
        shifted[i] = s[i] + 0.37;
      }
      auto a = open_ended::softmax_weights(s, 1.0);
      auto b = open_ended::softmax_weights(shifted, 1.0);
      for (std::size_t i = 0; i < 5; ++i) CHECK(std::abs(a[i] - b[i]) <= 1e-12);
    }
  }
  SUBCASE("low temperature concentrates on the best match") {
    auto w = open_ended::softmax_weights(std::vector<double>{1.0, 0.0, 0.2}, 0.01);
    CHECK(w[0] > 0.999999);
  }
  SUBCASE("temperature must be positive") {
    CHECK_THROWS_AS(open_ended::softmax_weights(std::vector<double>{0.5}, 0.0),
                    DegenerateInput);
  }
}

TEST_CASE("similarity weights from embeddings") {
  provider::MockEmbeddingBackend mock;
  std::vector<open_ended::FreeAction> candidates{{"axis:0", std::nullopt},
                                                 {"axis:1", std::nullopt},
                                                 {"axis:2", std::nullopt}};
  auto soft = open_ended::similarity_weights(mock, "axis:0", candidates, 0.01);
  CHECK(soft.weights[0] > 0.999999);
  CHECK(soft.text == "axis:0");
  // embeddings are cached on the candidates
  for (const auto& c : candidates) CHECK(c.embedding.has_value());

  SUBCASE("identical similarities stay uniform") {
    std::vector<open_ended::FreeAction> same{{"axis:1", std::nullopt},
                                             {"axis:2", std::nullopt}};
    auto w = open_ended::similarity_weights(mock, "axis:0", same, 1.0);
    CHECK(w.weights[0] == Approx(0.5).epsilon(1e-12));
  }
}

TEST_CASE("soft posterior update") {
  SUBCASE("one-hot weights reduce to the constrained update") {
    std::mt19937_64 rng(12);
    for (int iter = 0; iter < 300; ++iter) {
      std::uniform_int_distribution<std::size_t> hdist(2, 6), adist(2, 5);
      std::size_t H = hdist(rng), A = adist(rng);
      auto prior = gen::simplex(rng, H);
      auto m = gen::matrix(rng, H, A);
      std::uniform_int_distribution<std::size_t> obs(0, A - 1);
      std::size_t j = obs(rng);
      std::vector<double> onehot(A, 0.0);
      onehot[j] = 1.0;
      open_ended::SoftObservation soft{
          "obs", ProbabilityDistribution::from_normalized(onehot), 1.0};
      auto a = open_ended::soft_posterior_update(prior, m, soft);
      auto b = engine::posterior_update_math(prior, m, j);
      for (std::size_t i = 0; i < H; ++i) CHECK(std::abs(a[i] - b[i]) <= 1e-12);
    }
  }
  SUBCASE("uniform weights on mirrored rows balance out") {
    engine::LikelihoodMatrix m;
    m.action_labels = {"a", "b"};
    m.rows = {ProbabilityDistribution::from_normalized({0.9, 0.1}),
              ProbabilityDistribution::from_normalized({0.1, 0.9})};
    open_ended::SoftObservation soft{
        "obs", ProbabilityDistribution::from_normalized({0.5, 0.5}), 1.0};
    auto post = open_ended::soft_posterior_update(ProbabilityDistribution::uniform(2), m, soft);
    CHECK(post[0] == Approx(0.5).epsilon(1e-12));
    CHECK(post[1] == Approx(0.5).epsilon(1e-12));
  }
  SUBCASE("posterior is continuous in the softmax temperature") {
    engine::LikelihoodMatrix m;
    m.action_labels = {"a", "b", "c"};
    m.rows = {ProbabilityDistribution::from_normalized({0.7, 0.2, 0.1}),
              ProbabilityDistribution::from_normalized({0.2, 0.5, 0.3})};
    std::vector<double> sims{0.9, 0.1, -0.4};
    auto prior = ProbabilityDistribution::uniform(2);
    for (double tau : {0.5, 1.0, 2.0}) {
      auto w1 = open_ended::softmax_weights(sims, tau);
      auto w2 = open_ended::softmax_weights(sims, tau + 1e-7);
      auto p1 = open_ended::soft_posterior_update(prior, m, {"o", w1, tau});
      auto p2 = open_ended::soft_posterior_update(prior, m, {"o", w2, tau + 1e-7});
      for (std::size_t i = 0; i < 2; ++i) CHECK(std::abs(p1[i] - p2[i]) < 1e-6);
    }
  }
  SUBCASE("dimension mismatch") {
    engine::LikelihoodMatrix m;
    m.action_labels = {"a", "b"};
    m.rows = {ProbabilityDistribution::uniform(2), ProbabilityDistribution::uniform(2)};
    open_ended::SoftObservation bad{"obs", ProbabilityDistribution::uniform(3), 1.0};
    CHECK_THROWS_AS(
        open_ended::soft_posterior_update(ProbabilityDistribution::uniform(2), m, bad),
        DimensionMismatch);
  }
}

TEST_CASE("action proposal") {
  auto s = store();
  auto settings = base_settings();

  SUBCASE("scripted list comes back verbatim, order preserved") {
    provider::CallbackBackend backend([](const provider::CompletionRequest&) {
      return "1. order the soup\n2. order a salad\n3. skip lunch";
    });
    auto actions = open_ended::propose_actions(backend, s, settings, "CTX", 3);
    REQUIRE(actions.size() == 3);
    CHECK(actions[0].text == "order the soup");
    CHECK(actions[2].text == "skip lunch");
  }
  SUBCASE("single candidate") {
    provider::CallbackBackend backend(
        [](const provider::CompletionRequest&) { return "1. the only option"; });
    auto actions = open_ended::propose_actions(backend, s, settings, "CTX", 1);
    REQUIRE(actions.size() == 1);
  }
  SUBCASE("duplicates are rejected after retries") {
    provider::CallbackBackend backend([](const provider::CompletionRequest&) {
      return "1. same thing\n2. same thing";
    });
    CHECK_THROWS_AS(open_ended::propose_actions(backend, s, settings, "CTX", 2),
                    ParseFailure);
  }
}

TEST_CASE("scenario file loads") {
  auto scenario =
      open_ended::load_scenario(std::string(LAIP_DATA_DIR) + "/scenes/office_lunch.json");
  CHECK(scenario.scenes.size() == 4);
  CHECK(scenario.hypothesis_fixture.size() == 20);
  CHECK(scenario.situation.find("surprise birthday party") != std::string::npos);
  for (const auto& scene : scenario.scenes) {
    CHECK_FALSE(scene.context.empty());
    CHECK_FALSE(scene.observed_action.empty());
  }
  SUBCASE("scenes are mandatory") {
    nlohmann::json j{{"situation", "s"}, {"scenes", nlohmann::json::array()}};
    CHECK_THROWS_AS(open_ended::Scenario::from_json(j), ConfigError);
  }
}

TEST_CASE("full scenario run with deterministic doubles") {
  auto s = store();
  open_ended::Scenario scenario;
  scenario.situation = "Two coworkers pick lunch.";
  scenario.scenes = {{"Scene one.", "axis:0"}, {"Scene two.", "axis:2"}};
  scenario.hypothesis_fixture = {"prefers plain food", "prefers adventurous food"};

  open_ended::OpenEndedSettings settings;
  settings.engine = base_settings();
  settings.tau = 0.01;  // concentrate on the matching candidate
  settings.n_actions = 3;

  provider::CallbackBackend backend([](const provider::CompletionRequest& req) {
    const std::string& prompt = req.messages.back().text;
    if (prompt.find("distinct actions") != std::string::npos)
      return std::string("1. axis:0\n2. axis:1\n3. axis:2");
    REQUIRE(prompt.find("Consider the following hypothesis") != std::string::npos);
    if (prompt.find("prefers plain food") != std::string::npos)
      return std::string("A1: 0.8, A2: 0.1, A3: 0.1");
    return std::string("A1: 0.1, A2: 0.1, A3: 0.8");
  });
  provider::MockEmbeddingBackend embedder;

  auto output = open_ended::run_scenario(s, backend, embedder, settings, scenario);
  REQUIRE(output.steps.size() == 2);
  REQUIRE(output.hypotheses.size() == 2);

  // Scene one: observation matches candidate 1 -> posterior ~ (0.8, 0.1)/0.9.
  const auto& st1 = output.steps[0];
  REQUIRE(st1.obs_weights.has_value());
  CHECK(st1.obs_weights->size() == 3);
  CHECK(st1.observed == "axis:0");
  CHECK(st1.observed_index == 0);
  CHECK(st1.posterior[0] == Approx(8.0 / 9.0).epsilon(1e-6));

  // Scene two: observation matches candidate 3, pulling mass back.
  const auto& st2 = output.steps[1];
  CHECK(st2.observed_index == 2);
  CHECK(st2.prior.values() == st1.posterior.values());
  CHECK(st2.posterior.is_simplex(1e-9));
  CHECK(st2.posterior[1] > st2.posterior[0] * 0.1);

  SUBCASE("system prompt carries the situation") {
    bool saw_situation = false;
    for (const auto& step : output.steps)
      for (const auto& t : step.raw)
        for (const auto& msg : t.request.at("messages"))
          if (msg.at("role") == "system" &&
              msg.at("content").get<std::string>().find("Two coworkers") != std::string::npos)
            saw_situation = true;
    CHECK(saw_situation);
  }
}

TEST_CASE("scenario hypothesis generation from the situation") {
  auto s = store();
  open_ended::Scenario scenario;
  scenario.situation = "An office lunch mystery.";
  scenario.scenes = {{"Scene.", "axis:1"}};

  open_ended::OpenEndedSettings settings;
  settings.engine = base_settings();
  settings.engine.hypothesis_mode = engine::HypothesisMode::generate;
  settings.engine.n_hypotheses = 2;
  settings.n_actions = 2;

  provider::CallbackBackend backend([](const provider::CompletionRequest& req) {
    const std::string& prompt = req.messages.back().text;
    if (prompt.find("Write out 2 hypotheses") != std::string::npos)
      return std::string("1. Likes noodles - probability: 0.5\n2. Likes rice - probability: 0.5");
    if (prompt.find("distinct actions") != std::string::npos)
      return std::string("1. axis:1\n2. axis:5");
    return std::string("A1: 0.5, A2: 0.5");
  });
  provider::MockEmbeddingBackend embedder;
  auto output = open_ended::run_scenario(s, backend, embedder, settings, scenario);
  REQUIRE(output.hypotheses.size() == 2);
  CHECK(output.hypotheses.items[0].text == "Likes noodles");
  CHECK(output.steps.size() == 1);

  SUBCASE("fixture required when not generating") {
    settings.engine.hypothesis_mode = engine::HypothesisMode::fixture;
    auto [out, err] =
        open_ended::run_scenario_with_partial(s, backend, embedder, settings, scenario);
    CHECK_FALSE(err.empty());
  }
}
