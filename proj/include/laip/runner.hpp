#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "laip/engine.hpp"
#include "laip/metrics.hpp"
#include "laip/open_ended.hpp"
#include "laip/oracle.hpp"

namespace laip::runner {

struct BackendSpec {
  // scripted-oracle | record-scripted-oracle | replay | http | record-http
  std::string kind = "scripted-oracle";
  std::string model = "default";
  std::string base_url;
  std::string api_key_env = "LAIP_API_KEY";
  std::string cache_path;
  // mock | http | replay | record-http (embedding side, open-ended runs)
  std::string embedding_kind = "mock";

  static BackendSpec from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
};

struct ExperimentConfig {
  // laip-full | laip-lcp | laip-single-cot | generic-cot | zero-shot |
  // optimal | open-ended
  std::string mode = "laip-full";
  std::vector<std::string> trajectories;
  std::string scenario_path;  // open-ended runs
  BackendSpec backend;
  int repetitions = 1;
  std::vector<std::int64_t> seeds;  // indexed by repetition; default 1000+rep
  std::string hypothesis_mode = "orderings";
  std::string prior_mode = "uniform";
  std::size_t n_hypotheses = 20;
  double tau = 1.0;
  double epsilon = 0.01;
  double hypothesis_temperature = 0.7;
  double likelihood_temperature = 0.0;
  double parse_floor = 1e-6;
  int max_parse_retries = 3;
  int max_parallel = 1;  // concurrent runs
  bool parallel_hypotheses = false;
  std::size_t open_actions = 6;
  std::string environment = "restaurants";  // builtin name or spec file path
  std::string data_dir;                     // prompts/ and friends
  std::string out_dir = "runs";

  static ExperimentConfig from_json(const nlohmann::json& j);
  static ExperimentConfig from_file(const std::filesystem::path& p);
  nlohmann::json to_json() const;
};

struct RunRecord {
  std::string run_id;
  std::string mode;
  std::string trajectory_id;
  int repetition = 0;
  std::int64_t seed = 0;
  engine::RunOutput output;
  std::string error;  // empty on success
  double wall_ms = 0.0;
  nlohmann::json config_snapshot;

  bool ok() const { return error.empty(); }
};

// Environment + prompt store resolved from a config.
struct Workspace {
  env::RoomGraph graph;
  prompts::TemplateStore store;
  std::string system_prompt;
};
Workspace open_workspace(const ExperimentConfig& config);

// One record per (trajectory, repetition); failed runs carry their error and
// the batch continues. Deterministic under scripted and replay backends.
std::vector<RunRecord> run_experiment(const ExperimentConfig& config);

void persist_runs(const std::vector<RunRecord>& records,
                  const std::filesystem::path& out_dir);
std::vector<RunRecord> load_runs(const std::filesystem::path& out_dir);

struct ComparisonRow {
  std::string mode;
  std::size_t runs = 0;
  metrics::MetricReport report;
  double max_abs_delta = 0.0;  // componentwise, vs the analytic posterior
};

// Aligns each run's final posterior with the analytic observer's and
// aggregates correlation over the concatenated vectors plus mean divergences.
// Hypotheses must carry orderings (or be mapped through `mapping`:
// statement -> ordering label, or "unmapped" to drop). Throws AlignmentError
// when nothing aligns.
std::vector<ComparisonRow> compare_to_oracle(
    const env::RoomGraph& graph, const std::vector<RunRecord>& records,
    oracle::NoiseParam noise = {},
    const std::map<std::string, std::string>* mapping = nullptr);

std::string comparison_csv(const std::vector<ComparisonRow>& rows);

// posteriors.csv, divergence.csv, summary.txt (and comparison.csv when the
// records align with the analytic observer) under out_dir.
void emit_report(const env::RoomGraph& graph, const std::vector<RunRecord>& records,
                 const std::filesystem::path& out_dir, oracle::NoiseParam noise = {});

// Aligned posterior over the orderings space; see compare_to_oracle.
std::vector<double> align_posterior(const env::RoomGraph& graph,
                                    const engine::HypothesisSet& hypotheses,
                                    const ProbabilityDistribution& posterior,
                                    const std::map<std::string, std::string>* mapping);

}  // namespace laip::runner
