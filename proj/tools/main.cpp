#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>

#include <CLI11.hpp>

#include "laip/runner.hpp"
#include "laip/scripted_oracle.hpp"

namespace {

// exit codes: 0 success, 1 partial failure, 2 configuration error
constexpr int kOk = 0;
constexpr int kPartial = 1;
constexpr int kConfigError = 2;

std::string default_data_dir() {
  if (const char* d = std::getenv("LAIP_DATA_DIR"); d && *d) return d;
#ifdef LAIP_DATA_DIR
  return LAIP_DATA_DIR;
#else
  return "data";
#endif
}

laip::runner::ExperimentConfig load_config(const std::string& path,
                                           const std::string& data_dir,
                                           const std::string& cache,
                                           const std::string& out_dir) {
  auto config = laip::runner::ExperimentConfig::from_file(path);
  if (config.data_dir.empty()) config.data_dir = data_dir;
  if (!cache.empty()) config.backend.cache_path = cache;
  if (!out_dir.empty()) config.out_dir = out_dir;
  return config;
}

int run_and_persist(const laip::runner::ExperimentConfig& config) {
  auto records = laip::runner::run_experiment(config);
  laip::runner::persist_runs(records, config.out_dir);
  std::size_t failed = 0;
  for (const auto& rec : records) {
    std::cout << (rec.ok() ? "ok   " : "FAIL ") << rec.run_id;
    if (!rec.ok()) {
      std::cout << "  (" << rec.error << ")";
      ++failed;
    }
    std::cout << "\n";
  }
  std::cout << records.size() << " runs, " << failed << " failed, saved under "
            << config.out_dir << "\n";
  return failed == 0 ? kOk : kPartial;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bayesian inverse planning with provider-elicited hypothesis sets and "
               "action likelihoods"};
  app.require_subcommand(1);

  std::string config_path, data_dir = default_data_dir(), cache_path, out_dir, runs_dir;
  std::string compare_out, mapping_path;
  double epsilon = 0.01;

  auto* run_cmd = app.add_subcommand("run", "Execute the runs described by a config file");
  run_cmd->add_option("--config", config_path, "experiment config (JSON)")->required();
  run_cmd->add_option("--data", data_dir, "data directory (prompts, environments)");
  run_cmd->add_option("--cache", cache_path, "record/replay cache file (JSONL)");
  run_cmd->add_option("--out", out_dir, "output directory for run records");

  auto* replay_cmd =
      app.add_subcommand("replay", "Re-run a config strictly from a recorded cache");
  replay_cmd->add_option("--config", config_path, "experiment config (JSON)")->required();
  replay_cmd->add_option("--cache", cache_path, "recorded cache file (JSONL)")->required();
  replay_cmd->add_option("--data", data_dir, "data directory");
  replay_cmd->add_option("--out", out_dir, "output directory for run records");

  auto* compare_cmd =
      app.add_subcommand("compare", "Compare saved runs against the analytic observer");
  compare_cmd->add_option("--runs", runs_dir, "directory of saved runs")->required();
  compare_cmd->add_option("--out", compare_out, "write the comparison CSV here");
  compare_cmd->add_option("--data", data_dir, "data directory");
  compare_cmd->add_option("--epsilon", epsilon, "action noise for the analytic observer");
  compare_cmd->add_option("--mapping", mapping_path,
                          "JSON object mapping hypothesis text to an ordering label");

  auto* report_cmd = app.add_subcommand("report", "Emit CSV tables and a summary for saved runs");
  report_cmd->add_option("--runs", runs_dir, "directory of saved runs")->required();
  report_cmd->add_option("--out", out_dir, "report output directory")->required();
  report_cmd->add_option("--data", data_dir, "data directory");
  report_cmd->add_option("--epsilon", epsilon, "action noise for the analytic observer");

  auto* list_cmd = app.add_subcommand("list-trajectories", "List the built-in trajectory corpus");
  list_cmd->add_option("--data", data_dir, "data directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? kOk : kConfigError;
  }

  try {
    if (*run_cmd) {
      return run_and_persist(load_config(config_path, data_dir, cache_path, out_dir));
    }
    if (*replay_cmd) {
      auto config = load_config(config_path, data_dir, cache_path, out_dir);
      config.backend.kind = "replay";
      if (config.backend.embedding_kind != "mock") config.backend.embedding_kind = "replay";
      return run_and_persist(config);
    }
    if (*compare_cmd) {
      laip::runner::ExperimentConfig config;
      config.data_dir = data_dir;
      auto ws = laip::runner::open_workspace(config);
      auto records = laip::runner::load_runs(runs_dir);
      std::map<std::string, std::string> mapping;
      if (!mapping_path.empty()) {
        std::ifstream in(mapping_path);
        if (!in.is_open()) throw laip::IoError("cannot open mapping " + mapping_path);
        nlohmann::json j;
        in >> j;
        for (const auto& [k, v] : j.items()) mapping[k] = v.get<std::string>();
      }
      auto rows = laip::runner::compare_to_oracle(ws.graph, records, {epsilon},
                                                  mapping.empty() ? nullptr : &mapping);
      std::string csv = laip::runner::comparison_csv(rows);
      if (compare_out.empty()) {
        std::cout << csv;
      } else {
        std::ofstream out(compare_out, std::ios::trunc | std::ios::binary);
        out << csv;
        std::cout << "wrote " << compare_out << "\n";
      }
      return kOk;
    }
    if (*report_cmd) {
      laip::runner::ExperimentConfig config;
      config.data_dir = data_dir;
      auto ws = laip::runner::open_workspace(config);
      auto records = laip::runner::load_runs(runs_dir);
      if (records.empty()) {
        std::cerr << "no run records under " << runs_dir << "\n";
        return kConfigError;
      }
      laip::runner::emit_report(ws.graph, records, out_dir, {epsilon});
      std::cout << "report written to " << out_dir << "\n";
      std::size_t failed = 0;
      for (const auto& rec : records)
        if (!rec.ok()) ++failed;
      return failed == 0 ? kOk : kPartial;
    }
    if (*list_cmd) {
      laip::runner::ExperimentConfig config;
      config.data_dir = data_dir;
      auto ws = laip::runner::open_workspace(config);
      for (const auto& t : laip::env::builtin_corpus(ws.graph)) {
        std::cout << t.id << ": start Room " << t.start_room << ",";
        for (const auto& a : t.actions) std::cout << " [" << laip::env::to_string(a, ws.graph) << "]";
        std::cout << " |";
        bool any_closed = false;
        for (laip::env::RestaurantId i = 0; i < ws.graph.restaurant_count(); ++i)
          if (!t.world.is_open(i)) {
            std::cout << " " << ws.graph.restaurant(i).name << " closed";
            any_closed = true;
          }
        if (!any_closed) std::cout << " all open";
        if (t.reconstructed) std::cout << " (reconstructed)";
        std::cout << "\n";
      }
      return kOk;
    }
  } catch (const laip::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kPartial;
  }
  return kConfigError;
}
