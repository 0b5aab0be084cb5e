// Acceptance suite: one line per criterion, nonzero exit on any failure.
// Criteria 1-7 are deterministic; criterion 8 needs a configured live
// backend and is skipped otherwise.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "laip/baselines.hpp"
#include "laip/engine.hpp"
#include "laip/metrics.hpp"
#include "laip/open_ended.hpp"
#include "laip/oracle.hpp"
#include "laip/parsing.hpp"
#include "laip/runner.hpp"
#include "laip/scripted_oracle.hpp"
#include "support/brute_oracle.hpp"
#include "support/generators.hpp"

using namespace laip;

namespace {

int failures = 0;

void report(int index, const std::string& name, bool ok, const std::string& detail) {
  std::printf("[%s] %d %s: %s\n", ok ? "PASS" : "FAIL", index, name.c_str(), detail.c_str());
  if (!ok) ++failures;
}

void skip(int index, const std::string& name, const std::string& why) {
  std::printf("[SKIP] %d %s: %s\n", index, name.c_str(), why.c_str());
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.3g", v);
  return buf;
}

env::RoomGraph default_graph() {
  return env::RoomGraph::build(env::EnvironmentSpec::restaurants_default());
}

prompts::TemplateStore load_store() {
  return prompts::TemplateStore::load_dir(std::string(LAIP_DATA_DIR) + "/prompts");
}

// The scripted-equivalence profile: analytic rows parse back bit-exactly, so
// the anti-absorption floor is disabled.
engine::EngineSettings exact_settings(const prompts::TemplateStore& store) {
  engine::EngineSettings settings;
  settings.model_id = "scripted";
  settings.system_prompt = store.raw("system_restaurants");
  settings.hypothesis_mode = engine::HypothesisMode::orderings;
  settings.parse.floor = 0.0;
  settings.seed = 1;
  return settings;
}

void criterion_1_oracle_equivalence() {
  const auto start = std::chrono::steady_clock::now();
  auto g = default_graph();
  auto store = load_store();
  auto settings = exact_settings(store);

  double max_err = 0.0;
  std::size_t trajectories = 0;
  for (const auto& traj : env::builtin_corpus(g)) {
    provider::ScriptedBackend backend;
    runner::script_oracle_run(backend, g, store, settings, "laip-full", traj);
    engine::Engine eng(g, store, backend, settings);
    auto output = eng.run(traj);
    auto expected = oracle::optimal_posterior(g, traj);
    for (std::size_t i = 0; i < expected.size(); ++i)
      max_err = std::max(max_err,
                         std::abs(output.final_posterior()[i] - expected[i]));
    ++trajectories;
  }
  double seconds = std::chrono::duration<double>(
                       std::chrono::steady_clock::now() - start)
                       .count();
  bool ok = trajectories == 12 && max_err <= 1e-9 && seconds < 5.0;
  report(1, "oracle-equivalence",
         ok,
         "12 trajectories, max |dP| = " + fmt(max_err) + " (<= 1e-9), " +
             fmt(seconds) + " s (< 5 s)");
}

void criterion_2_optimal_model() {
  auto g = default_graph();
  double max_err = 0.0;
  for (const auto& traj : env::builtin_corpus(g)) {
    auto got = oracle::optimal_posterior(g, traj);
    auto expected = brute::posterior(g, traj, 0.01);
    for (std::size_t i = 0; i < expected.size(); ++i)
      max_err = std::max(max_err, std::abs(got[i] - expected[i]));
  }
  auto post = oracle::optimal_posterior(g, env::load_trajectory(g, "study1-closed"));
  auto orderings = oracle::all_orderings(g);
  std::string argmax_label = orderings[post.argmax()].label(g);
  bool ok = max_err <= 1e-9 && argmax_label == "Japanese > Chinese > Mexican";
  report(2, "optimal-model-correctness", ok,
         "brute-force max |dP| = " + fmt(max_err) +
             " (<= 1e-9), study1-closed argmax = " + argmax_label);
}

void criterion_3_sequential_batch() {
  std::mt19937_64 rng(301);
  double max_err = 0.0;
  for (int iter = 0; iter < 1000; ++iter) {
    std::uniform_int_distribution<std::size_t> hdist(2, 8), adist(2, 6), tdist(1, 6);
    std::size_t H = hdist(rng), T = tdist(rng);
    auto prior = gen::simplex(rng, H);

    ProbabilityDistribution sequential = prior;
    std::vector<double> product(H, 1.0);
    for (std::size_t t = 0; t < T; ++t) {
      std::size_t A = adist(rng);
      auto m = gen::matrix(rng, H, A);
      std::uniform_int_distribution<std::size_t> obs(0, A - 1);
      std::size_t j = obs(rng);
      sequential = engine::posterior_update_math(sequential, m, j);
      for (std::size_t i = 0; i < H; ++i) product[i] *= m.rows[i][j];
    }
    double z = 0.0;
    std::vector<double> batch(H);
    for (std::size_t i = 0; i < H; ++i) z += (batch[i] = prior[i] * product[i]);
    for (std::size_t i = 0; i < H; ++i)
      max_err = std::max(max_err, std::abs(sequential[i] - batch[i] / z));
  }
  report(3, "sequential-batch-equivalence", max_err <= 1e-9,
         "1000 instances, max |dP| = " + fmt(max_err) + " (<= 1e-9)");
}

void criterion_4_soft_update() {
  std::mt19937_64 rng(401);
  double max_reduction_err = 0.0;
  for (int iter = 0; iter < 1000; ++iter) {
    std::uniform_int_distribution<std::size_t> hdist(2, 8), adist(2, 6);
    std::size_t H = hdist(rng), A = adist(rng);
    auto prior = gen::simplex(rng, H);
    auto m = gen::matrix(rng, H, A);
    std::uniform_int_distribution<std::size_t> obs(0, A - 1);
    std::size_t j = obs(rng);
    std::vector<double> onehot(A, 0.0);
    onehot[j] = 1.0;
    open_ended::SoftObservation soft{
        "o", ProbabilityDistribution::from_normalized(onehot), 1.0};
    auto a = open_ended::soft_posterior_update(prior, m, soft);
    auto b = engine::posterior_update_math(prior, m, j);
    for (std::size_t i = 0; i < H; ++i)
      max_reduction_err = std::max(max_reduction_err, std::abs(a[i] - b[i]));
  }

  std::uniform_real_distribution<double> sim(-1.0, 1.0), shift(-2.0, 2.0);
  double max_shift_err = 0.0;
  for (int iter = 0; iter < 1000; ++iter) {
    std::uniform_int_distribution<std::size_t> adist(2, 6);
    std::size_t A = adist(rng);
    std::vector<double> sims(A), shifted(A);
    double c = shift(rng);
    for (std::size_t i = 0; i < A; ++i) {
      sims[i] = sim(rng);
      shifted[i] = sims[i] + c;
    }
    auto w1 = open_ended::softmax_weights(sims, 1.0);
    auto w2 = open_ended::softmax_weights(shifted, 1.0);
    for (std::size_t i = 0; i < A; ++i)
      max_shift_err = std::max(max_shift_err, std::abs(w1[i] - w2[i]));
  }
  bool ok = max_reduction_err <= 1e-12 && max_shift_err <= 1e-12;
  report(4, "soft-update-reduction", ok,
         "one-hot max |dP| = " + fmt(max_reduction_err) +
             " (<= 1e-12), shift-invariance max |dw| = " + fmt(max_shift_err) +
             " (<= 1e-12)");
}

// Reference correlation computed along a different path than the library
// (direct covariance accumulation; ranks via explicit tie groups).
double ref_pearson(const std::vector<double>& x, const std::vector<double>& y) {
  double n = static_cast<double>(x.size());
  double sx = std::accumulate(x.begin(), x.end(), 0.0);
  double sy = std::accumulate(y.begin(), y.end(), 0.0);
  double sxx = 0.0, syy = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += x[i] * x[i];
    syy += y[i] * y[i];
    sxy += x[i] * y[i];
  }
  return (n * sxy - sx * sy) /
         std::sqrt((n * sxx - sx * sx) * (n * syy - sy * sy));
}

std::vector<double> ref_ranks(const std::vector<double>& x) {
  std::vector<double> ranks(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    double less = 0.0, equal = 0.0;
    for (std::size_t k = 0; k < x.size(); ++k) {
      if (x[k] < x[i]) ++less;
      if (x[k] == x[i]) ++equal;
    }
    ranks[i] = less + 0.5 * (equal + 1.0);
  }
  return ranks;
}

void criterion_5_metric_identities() {
  std::vector<std::string> problems;

  std::vector<double> e1{1.0, 0.0}, e2{0.0, 1.0};
  if (metrics::jsd(e1, e1) != 0.0) problems.push_back("jsd(p,p) != 0");
  if (metrics::hellinger(e1, e1) != 0.0) problems.push_back("hellinger(p,p) != 0");
  if (std::abs(metrics::jsd(e1, e2) - 1.0) > 1e-12) problems.push_back("jsd corners != 1");
  if (std::abs(metrics::hellinger(e1, e2) - 1.0) > 1e-12)
    problems.push_back("hellinger corners != 1");

  std::mt19937_64 rng(501);
  std::uniform_int_distribution<std::size_t> dim(2, 10);
  double worst_sym = 0.0, worst_ident = 0.0, worst_triangle = 0.0;
  for (int iter = 0; iter < 10000; ++iter) {
    std::size_t n = dim(rng);
    auto p = gen::simplex_values(rng, n);
    auto q = gen::simplex_values(rng, n);
    auto r = gen::simplex_values(rng, n);
    worst_sym = std::max(worst_sym, std::abs(metrics::jsd(p, q) - metrics::jsd(q, p)));
    worst_sym = std::max(worst_sym,
                         std::abs(metrics::hellinger(p, q) - metrics::hellinger(q, p)));
    worst_ident = std::max(worst_ident, metrics::jsd(p, p));
    worst_ident = std::max(worst_ident, metrics::hellinger(p, p));
    worst_triangle =
        std::max(worst_triangle, metrics::hellinger(p, q) - metrics::hellinger(p, r) -
                                     metrics::hellinger(r, q));
  }
  if (worst_sym > 1e-12) problems.push_back("symmetry " + fmt(worst_sym));
  if (worst_ident > 1e-12) problems.push_back("identity " + fmt(worst_ident));
  if (worst_triangle > 1e-12) problems.push_back("triangle " + fmt(worst_triangle));

  std::uniform_real_distribution<double> val(-5.0, 5.0);
  std::uniform_int_distribution<int> len(3, 50);
  std::uniform_int_distribution<int> coin(0, 3);
  double worst_corr = 0.0;
  for (int fixture = 0; fixture < 100; ++fixture) {
    int n = len(rng);
    std::vector<double> x(n), y(n);
    for (int i = 0; i < n; ++i) {
      x[i] = val(rng);
      y[i] = val(rng);
      if (coin(rng) == 0 && i > 0) x[i] = x[i - 1];  // inject ties
    }
    worst_corr = std::max(worst_corr,
                          std::abs(metrics::pearson_r(x, y) - ref_pearson(x, y)));
    worst_corr = std::max(
        worst_corr, std::abs(metrics::spearman_rho(x, y) -
                             ref_pearson(ref_ranks(x), ref_ranks(y))));
  }
  if (worst_corr > 1e-9) problems.push_back("correlation oracle " + fmt(worst_corr));

  std::vector<double> a{0.84, 0.91, 0.77, 0.88, 0.95, 0.80, 0.86, 0.90};
  std::vector<double> b{0.61, 0.70, 0.55, 0.74, 0.68, 0.52, 0.66, 0.71};
  if (metrics::two_sample_t(a, b).dof != 14) problems.push_back("8v8 dof != 14");

  std::string detail = problems.empty()
                           ? "identities, 10000-sample properties, 100 correlation "
                             "fixtures (<= 1e-9), 8v8 dof = 14"
                           : problems.front();
  report(5, "metric-identities", problems.empty(), detail);
}

void criterion_6_parser_fuzz() {
  std::mt19937_64 rng(601);
  std::size_t returned = 0, rejected = 0;
  bool all_simplex = true;
  for (int iter = 0; iter < 10000; ++iter) {
    std::string text = gen::fuzz_text(rng);
    for (std::size_t k : {std::size_t(1), std::size_t(2), std::size_t(6)}) {
      try {
        auto d = provider::parse_distribution(text, k);
        ++returned;
        if (!d.is_simplex(1e-9) || d.size() != k) all_simplex = false;
        for (std::size_t i = 0; i < d.size(); ++i)
          if (!(d[i] > 0.0)) all_simplex = false;
      } catch (const Error&) {
        ++rejected;
      }
    }
    try {
      auto h = provider::parse_hypotheses(text, 3);
      ++returned;
      if (!h.prior.is_simplex(1e-9) || h.texts.size() != 3) all_simplex = false;
    } catch (const Error&) {
      ++rejected;
    }
  }
  report(6, "parser-robustness", all_simplex,
         std::to_string(returned) + " parsed / " + std::to_string(rejected) +
             " typed rejections over 40000 calls, every result a simplex");
}

void criterion_7_replay_determinism() {
  namespace fs = std::filesystem;
  auto scratch = fs::temp_directory_path() /
                 ("laip_acceptance_" + std::to_string(::getpid()));
  fs::remove_all(scratch);
  fs::create_directories(scratch);

  runner::ExperimentConfig config;
  config.mode = "laip-full";
  config.trajectories = {"study1-closed", "t3", "t9"};
  config.repetitions = 2;
  config.parse_floor = 0.0;
  config.data_dir = LAIP_DATA_DIR;
  config.backend.kind = "record-scripted-oracle";
  config.backend.cache_path = (scratch / "cache.jsonl").string();

  auto recorded = runner::run_experiment(config);
  runner::persist_runs(recorded, scratch / "recorded");
  auto ws = runner::open_workspace(config);
  runner::emit_report(ws.graph, recorded, scratch / "recorded_report");

  auto replay_config = config;
  replay_config.backend.kind = "replay";
  auto replayed = runner::run_experiment(replay_config);
  runner::persist_runs(replayed, scratch / "replayed");
  runner::emit_report(ws.graph, replayed, scratch / "replayed_report");

  auto slurp = [](const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return std::string(std::istreambuf_iterator<char>(in), {});
  };
  bool ok = true;
  std::string why;
  std::size_t compared = 0;
  for (const auto& rec : recorded) {
    auto a = slurp(scratch / "recorded" / rec.run_id / "steps.jsonl");
    auto b = slurp(scratch / "replayed" / rec.run_id / "steps.jsonl");
    if (a.empty() || a != b) {
      ok = false;
      why = "steps.jsonl differs for " + rec.run_id;
    }
    ++compared;
  }
  for (const char* table :
       {"posteriors.csv", "divergence.csv", "comparison.csv", "summary.txt"}) {
    auto a = slurp(scratch / "recorded_report" / table);
    auto b = slurp(scratch / "replayed_report" / table);
    if (a.empty() || a != b) {
      ok = false;
      why = std::string("report table differs: ") + table;
    }
  }
  for (const auto& rec : replayed)
    if (!rec.ok()) {
      ok = false;
      why = "replayed run failed: " + rec.error;
    }
  report(7, "replay-determinism", ok,
         ok ? std::to_string(compared) + " runs and 4 report tables byte-identical"
            : why);
  fs::remove_all(scratch);
}

void criterion_8_live_smoke() {
  const char* base_url = std::getenv("LAIP_LIVE_BASE_URL");
  if (!base_url || !*base_url) {
    skip(8, "live-smoke", "LAIP_LIVE_BASE_URL not set (optional)");
    return;
  }
  auto g = default_graph();
  auto store = load_store();

  engine::EngineSettings settings;
  settings.model_id = std::getenv("LAIP_LIVE_MODEL") ? std::getenv("LAIP_LIVE_MODEL")
                                                     : "default";
  settings.system_prompt = store.raw("system_restaurants");
  settings.hypothesis_mode = engine::HypothesisMode::orderings;
  settings.seed = 7;

  provider::HttpConfig http;
  http.base_url = base_url;
  provider::HttpBackend backend(http);
  engine::Engine eng(g, store, backend, settings);

  auto traj = env::load_trajectory(g, "study1-closed");
  traj.actions.resize(4);  // four timesteps are enough for the smoke check
  auto [output, error] = eng.run_with_partial(traj);
  bool ok = error.empty() && output.steps.size() == 4;
  std::string argmax_log;
  auto orderings = oracle::all_orderings(g);
  for (const auto& step : output.steps) {
    if (!step.posterior.is_simplex(1e-9)) ok = false;
    argmax_log += (argmax_log.empty() ? "" : " -> ") +
                  orderings[step.posterior.argmax()].label(g);
  }
  report(8, "live-smoke", ok,
         ok ? "4 timesteps, invariants hold, argmax per step: " + argmax_log
            : "error: " + error);
}

}  // namespace

int main() {
  criterion_1_oracle_equivalence();
  criterion_2_optimal_model();
  criterion_3_sequential_batch();
  criterion_4_soft_update();
  criterion_5_metric_identities();
  criterion_6_parser_fuzz();
  criterion_7_replay_determinism();
  criterion_8_live_smoke();
  if (failures == 0) {
    std::printf("acceptance: all criteria passed\n");
    return 0;
  }
  std::printf("acceptance: %d criterion(s) failed\n", failures);
  return 1;
}
