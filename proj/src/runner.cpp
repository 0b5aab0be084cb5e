#include "laip/runner.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <thread>

#include "laip/baselines.hpp"
#include "laip/reference.hpp"
#include "laip/scripted_oracle.hpp"

namespace laip::runner {

namespace {

std::string csv_num(double v) {
  if (std::isnan(v)) return "";
  return format_round_trip(v);
}

nlohmann::json load_json_file(const std::filesystem::path& p) {
  std::ifstream in(p);
  if (!in.is_open()) throw IoError("cannot open " + p.string());
  nlohmann::json j;
  in >> j;
  return j;
}

void write_text_file(const std::filesystem::path& p, const std::string& text) {
  std::error_code ec;
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path(), ec);
  std::ofstream out(p, std::ios::trunc | std::ios::binary);
  if (!out.is_open()) throw IoError("cannot write " + p.string());
  out << text;
  if (!out.good()) throw IoError("write failed: " + p.string());
}

std::string zero_pad(int value, int width) {
  std::string s = std::to_string(value);
  while (static_cast<int>(s.size()) < width) s.insert(s.begin(), '0');
  return s;
}

}  // namespace

BackendSpec BackendSpec::from_json(const nlohmann::json& j) {
  BackendSpec b;
  b.kind = j.value("kind", b.kind);
  b.model = j.value("model", b.model);
  b.base_url = j.value("base_url", b.base_url);
  b.api_key_env = j.value("api_key_env", b.api_key_env);
  b.cache_path = j.value("cache_path", b.cache_path);
  b.embedding_kind = j.value("embedding_kind", b.embedding_kind);
  return b;
}

nlohmann::json BackendSpec::to_json() const {
  return {{"kind", kind},
          {"model", model},
          {"base_url", base_url},
          {"api_key_env", api_key_env},
          {"cache_path", cache_path},
          {"embedding_kind", embedding_kind}};
}

ExperimentConfig ExperimentConfig::from_json(const nlohmann::json& j) {
  ExperimentConfig c;
  c.mode = j.value("mode", c.mode);
  if (j.contains("trajectories"))
    for (const auto& t : j.at("trajectories")) c.trajectories.push_back(t.get<std::string>());
  c.scenario_path = j.value("scenario", c.scenario_path);
  if (j.contains("backend")) c.backend = BackendSpec::from_json(j.at("backend"));
  c.repetitions = j.value("repetitions", c.repetitions);
  if (j.contains("seeds"))
    for (const auto& s : j.at("seeds")) c.seeds.push_back(s.get<std::int64_t>());
  c.hypothesis_mode = j.value("hypothesis_mode", c.hypothesis_mode);
  c.prior_mode = j.value("prior_mode", c.prior_mode);
  c.n_hypotheses = j.value("n_hypotheses", c.n_hypotheses);
  c.tau = j.value("tau", c.tau);
  c.epsilon = j.value("epsilon", c.epsilon);
  c.hypothesis_temperature = j.value("hypothesis_temperature", c.hypothesis_temperature);
  c.likelihood_temperature = j.value("likelihood_temperature", c.likelihood_temperature);
  c.parse_floor = j.value("parse_floor", c.parse_floor);
  c.max_parse_retries = j.value("max_parse_retries", c.max_parse_retries);
  c.max_parallel = j.value("max_parallel", c.max_parallel);
  c.parallel_hypotheses = j.value("parallel_hypotheses", c.parallel_hypotheses);
  c.open_actions = j.value("open_actions", c.open_actions);
  c.environment = j.value("environment", c.environment);
  c.data_dir = j.value("data_dir", c.data_dir);
  c.out_dir = j.value("out_dir", c.out_dir);
  if (c.repetitions < 1) throw ConfigError("repetitions must be >= 1");
  return c;
}

ExperimentConfig ExperimentConfig::from_file(const std::filesystem::path& p) {
  nlohmann::json j;
  try {
    j = load_json_file(p);
  } catch (const IoError& e) {
    throw ConfigError(e.what());
  }
  try {
    return from_json(j);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("bad config file " + p.string() + ": " + e.what());
  }
}

nlohmann::json ExperimentConfig::to_json() const {
  nlohmann::json j;
  j["mode"] = mode;
  j["trajectories"] = trajectories;
  j["scenario"] = scenario_path;
  j["backend"] = backend.to_json();
  j["repetitions"] = repetitions;
  j["seeds"] = seeds;
  j["hypothesis_mode"] = hypothesis_mode;
  j["prior_mode"] = prior_mode;
  j["n_hypotheses"] = n_hypotheses;
  j["tau"] = tau;
  j["epsilon"] = epsilon;
  j["hypothesis_temperature"] = hypothesis_temperature;
  j["likelihood_temperature"] = likelihood_temperature;
  j["parse_floor"] = parse_floor;
  j["max_parse_retries"] = max_parse_retries;
  j["max_parallel"] = max_parallel;
  j["parallel_hypotheses"] = parallel_hypotheses;
  j["open_actions"] = open_actions;
  j["environment"] = environment;
  j["out_dir"] = out_dir;
  return j;
}

Workspace open_workspace(const ExperimentConfig& config) {
  std::string data_dir = config.data_dir;
  if (data_dir.empty()) {
    if (const char* d = std::getenv("LAIP_DATA_DIR"); d && *d) data_dir = d;
    else throw ConfigError("no data_dir in config and LAIP_DATA_DIR is unset");
  }
  const std::filesystem::path data(data_dir);

  env::EnvironmentSpec spec;
  bool builtin_env = config.environment == "restaurants";
  if (builtin_env) {
    spec = env::EnvironmentSpec::restaurants_default();
  } else {
    spec = env::EnvironmentSpec::from_json(load_json_file(config.environment));
  }
  Workspace ws{env::RoomGraph::build(spec), prompts::TemplateStore::load_dir(data / "prompts"),
               ""};
  ws.system_prompt = builtin_env && ws.store.has("system_restaurants")
                         ? ws.store.raw("system_restaurants")
                         : prompts::render_environment_rules(ws.graph);
  return ws;
}

namespace {

engine::EngineSettings make_settings(const ExperimentConfig& config, const Workspace& ws,
                                     std::int64_t seed) {
  engine::EngineSettings s;
  s.model_id = config.backend.model;
  s.system_prompt = ws.system_prompt;
  s.update = config.mode == "laip-lcp" ? engine::UpdateMode::llm : engine::UpdateMode::math;
  s.hypothesis_mode = engine::hypothesis_mode_from_string(config.hypothesis_mode);
  s.prior_mode = config.prior_mode == "elicited" ? engine::PriorMode::elicited
                                                 : engine::PriorMode::uniform;
  s.n_hypotheses = config.n_hypotheses;
  s.hypothesis_temperature = config.hypothesis_temperature;
  s.likelihood_temperature = config.likelihood_temperature;
  s.seed = seed;
  s.parse.floor = config.parse_floor;
  s.max_parse_retries = config.max_parse_retries;
  s.parallel_hypotheses = config.parallel_hypotheses;
  return s;
}

std::shared_ptr<provider::Backend> make_backend(const ExperimentConfig& config,
                                                const Workspace& ws,
                                                const engine::EngineSettings& settings,
                                                const env::TrajectoryDef* traj,
                                                std::shared_ptr<provider::ReplayCache> cache) {
  const std::string& kind = config.backend.kind;
  auto scripted = [&] {
    auto sb = std::make_shared<provider::ScriptedBackend>();
    if (!traj)
      throw ConfigError("the scripted analytic backend only supports constrained trajectories");
    script_oracle_run(*sb, ws.graph, ws.store, settings, config.mode, *traj,
                      {config.epsilon});
    return sb;
  };
  if (kind == "scripted-oracle") return scripted();
  if (kind == "record-scripted-oracle") {
    if (!cache) throw ConfigError("backend kind '" + kind + "' needs backend.cache_path");
    return std::make_shared<provider::RecordingBackend>(scripted(), cache);
  }
  if (kind == "replay") {
    if (!cache) throw ConfigError("replay backend needs backend.cache_path");
    return std::make_shared<provider::ReplayBackend>(cache);
  }
  if (kind == "http" || kind == "record-http") {
    if (config.backend.base_url.empty())
      throw ConfigError("http backend needs backend.base_url");
    provider::HttpConfig http;
    http.base_url = config.backend.base_url;
    http.api_key_env = config.backend.api_key_env;
    auto inner = std::make_shared<provider::HttpBackend>(http);
    if (kind == "http") return inner;
    if (!cache) throw ConfigError("record-http backend needs backend.cache_path");
    return std::make_shared<provider::RecordingBackend>(inner, cache);
  }
  throw ConfigError("unknown backend kind '" + kind + "'");
}

std::shared_ptr<provider::EmbeddingBackend> make_embedder(
    const ExperimentConfig& config, std::shared_ptr<provider::ReplayCache> cache) {
  const std::string& kind = config.backend.embedding_kind;
  if (kind == "mock") return std::make_shared<provider::MockEmbeddingBackend>();
  if (kind == "replay") {
    if (!cache) throw ConfigError("replay embeddings need backend.cache_path");
    return std::make_shared<provider::CachedEmbeddingBackend>(nullptr, cache);
  }
  if (kind == "http" || kind == "record-http") {
    if (config.backend.base_url.empty())
      throw ConfigError("http embeddings need backend.base_url");
    provider::HttpConfig http;
    http.base_url = config.backend.base_url;
    http.api_key_env = config.backend.api_key_env;
    auto inner = std::make_shared<provider::HttpEmbeddingBackend>(http);
    if (kind == "http") return inner;
    if (!cache) throw ConfigError("record-http embeddings need backend.cache_path");
    return std::make_shared<provider::CachedEmbeddingBackend>(inner, cache);
  }
  throw ConfigError("unknown embedding backend kind '" + kind + "'");
}

struct Job {
  std::string trajectory_id;  // empty for open-ended
  int repetition = 0;
  std::int64_t seed = 0;
};

RunRecord execute_job(const ExperimentConfig& config, const Workspace& ws, const Job& job,
                      std::shared_ptr<provider::ReplayCache> cache) {
  RunRecord rec;
  rec.mode = config.mode;
  rec.trajectory_id = job.trajectory_id.empty() ? "scenario" : job.trajectory_id;
  rec.repetition = job.repetition;
  rec.seed = job.seed;
  rec.run_id = config.mode + "/" + rec.trajectory_id + "/rep" + zero_pad(job.repetition, 3);
  rec.config_snapshot = config.to_json();

  const auto start = std::chrono::steady_clock::now();
  try {
    engine::EngineSettings settings = make_settings(config, ws, job.seed);
    if (config.mode == "open-ended") {
      open_ended::Scenario scenario = open_ended::load_scenario(config.scenario_path);
      auto backend = make_backend(config, ws, settings, nullptr, cache);
      auto embedder = make_embedder(config, cache);
      open_ended::OpenEndedSettings os;
      settings.system_prompt.clear();  // the scenario's situation takes over
      os.engine = settings;
      os.tau = config.tau;
      os.n_actions = config.open_actions;
      auto [output, error] =
          open_ended::run_scenario_with_partial(ws.store, *backend, *embedder, os, scenario);
      rec.output = std::move(output);
      rec.error = std::move(error);
    } else {
      env::TrajectoryDef traj = env::load_trajectory(ws.graph, job.trajectory_id);
      if (config.mode == "optimal") {
        rec.output = run_optimal(ws.graph, ws.store, traj, {config.epsilon});
      } else if (config.mode == "laip-full" || config.mode == "laip-lcp") {
        auto backend = make_backend(config, ws, settings, &traj, cache);
        engine::Engine eng(ws.graph, ws.store, *backend, settings);
        auto [output, error] = eng.run_with_partial(traj);
        rec.output = std::move(output);
        rec.error = std::move(error);
      } else {
        auto bmode = baselines::baseline_mode_from_string(config.mode);
        auto backend = make_backend(config, ws, settings, &traj, cache);
        auto [output, error] = baselines::run_baseline_with_partial(
            ws.graph, ws.store, *backend, settings, bmode, traj);
        rec.output = std::move(output);
        rec.error = std::move(error);
      }
    }
  } catch (const std::exception& e) {
    rec.error = e.what();
  }
  rec.wall_ms = std::chrono::duration<double, std::milli>(
                    std::chrono::steady_clock::now() - start)
                    .count();
  return rec;
}

}  // namespace

std::vector<RunRecord> run_experiment(const ExperimentConfig& config) {
  Workspace ws = open_workspace(config);

  std::shared_ptr<provider::ReplayCache> cache;
  if (!config.backend.cache_path.empty())
    cache = std::make_shared<provider::ReplayCache>(config.backend.cache_path);

  std::vector<Job> jobs;
  const bool open_mode = config.mode == "open-ended";
  if (open_mode && config.scenario_path.empty())
    throw ConfigError("open-ended mode needs a scenario file");
  if (!open_mode && config.trajectories.empty())
    throw ConfigError("no trajectories configured");
  for (int rep = 0; rep < config.repetitions; ++rep) {
    std::int64_t seed = rep < static_cast<int>(config.seeds.size())
                            ? config.seeds[rep]
                            : 1000 + rep;
    if (open_mode) {
      jobs.push_back({"", rep, seed});
    } else {
      for (const auto& t : config.trajectories) jobs.push_back({t, rep, seed});
    }
  }

  std::vector<RunRecord> records(jobs.size());
  const int workers = std::clamp(config.max_parallel, 1, static_cast<int>(jobs.size()));
  if (workers <= 1) {
    for (std::size_t i = 0; i < jobs.size(); ++i)
      records[i] = execute_job(config, ws, jobs[i], cache);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w)
      pool.emplace_back([&] {
        for (std::size_t i = next.fetch_add(1); i < jobs.size(); i = next.fetch_add(1))
          records[i] = execute_job(config, ws, jobs[i], cache);
      });
    for (auto& th : pool) th.join();
  }
  return records;
}

void persist_runs(const std::vector<RunRecord>& records,
                  const std::filesystem::path& out_dir) {
  for (const auto& rec : records) {
    const std::filesystem::path dir = out_dir / rec.run_id;

    nlohmann::json run;
    run["run_id"] = rec.run_id;
    run["mode"] = rec.mode;
    run["trajectory"] = rec.trajectory_id;
    run["repetition"] = rec.repetition;
    run["seed"] = rec.seed;
    run["config"] = rec.config_snapshot;
    auto& hyps = run["hypotheses"] = nlohmann::json::array();
    for (const auto& h : rec.output.hypotheses.items) {
      nlohmann::json hj{{"text", h.text}};
      if (h.structured) hj["ordering"] = h.structured->ranking;
      else hj["ordering"] = nullptr;
      hyps.push_back(std::move(hj));
    }
    run["initial_prior"] = rec.output.initial_prior.values();
    run["final_posterior"] = rec.output.final_posterior().values();
    run["error"] = rec.error;
    write_text_file(dir / "run.json", run.dump(2) + "\n");

    std::string steps;
    for (const auto& step : rec.output.steps) steps += step.to_json(true).dump() + "\n";
    write_text_file(dir / "steps.jsonl", steps);

    nlohmann::json meta;
    meta["wall_ms"] = rec.wall_ms;
    meta["prompt_tokens"] = rec.output.usage.prompt_tokens;
    meta["completion_tokens"] = rec.output.usage.completion_tokens;
    write_text_file(dir / "meta.json", meta.dump(2) + "\n");
  }
}

std::vector<RunRecord> load_runs(const std::filesystem::path& out_dir) {
  std::vector<std::filesystem::path> run_files;
  if (!std::filesystem::is_directory(out_dir))
    throw IoError("run directory not found: " + out_dir.string());
  for (const auto& entry : std::filesystem::recursive_directory_iterator(out_dir))
    if (entry.is_regular_file() && entry.path().filename() == "run.json")
      run_files.push_back(entry.path());
  std::sort(run_files.begin(), run_files.end());

  std::vector<RunRecord> records;
  for (const auto& file : run_files) {
    nlohmann::json run = load_json_file(file);
    RunRecord rec;
    rec.run_id = run.at("run_id").get<std::string>();
    rec.mode = run.at("mode").get<std::string>();
    rec.trajectory_id = run.at("trajectory").get<std::string>();
    rec.repetition = run.at("repetition").get<int>();
    rec.seed = run.at("seed").get<std::int64_t>();
    rec.config_snapshot = run.value("config", nlohmann::json::object());
    rec.error = run.value("error", std::string());
    std::size_t idx = 0;
    for (const auto& hj : run.at("hypotheses")) {
      engine::Hypothesis h;
      h.id = idx++;
      h.text = hj.at("text").get<std::string>();
      if (hj.contains("ordering") && hj.at("ordering").is_array()) {
        oracle::PreferenceOrdering ord;
        for (const auto& r : hj.at("ordering"))
          ord.ranking.push_back(r.get<env::RestaurantId>());
        h.structured = std::move(ord);
      }
      rec.output.hypotheses.items.push_back(std::move(h));
    }
    rec.output.initial_prior = ProbabilityDistribution::from_normalized(
        run.at("initial_prior").get<std::vector<double>>(), 1e-6);

    std::ifstream steps_in(file.parent_path() / "steps.jsonl");
    std::string line;
    while (std::getline(steps_in, line)) {
      if (line.empty()) continue;
      rec.output.steps.push_back(engine::StepRecord::from_json(nlohmann::json::parse(line)));
    }
    auto meta_path = file.parent_path() / "meta.json";
    if (std::filesystem::exists(meta_path)) {
      nlohmann::json meta = load_json_file(meta_path);
      rec.wall_ms = meta.value("wall_ms", 0.0);
      rec.output.usage.prompt_tokens = meta.value("prompt_tokens", 0);
      rec.output.usage.completion_tokens = meta.value("completion_tokens", 0);
    }
    records.push_back(std::move(rec));
  }
  return records;
}

std::vector<double> align_posterior(const env::RoomGraph& graph,
                                    const engine::HypothesisSet& hypotheses,
                                    const ProbabilityDistribution& posterior,
                                    const std::map<std::string, std::string>* mapping) {
  const auto orderings = oracle::all_orderings(graph);
  std::map<std::string, std::size_t> by_label;
  for (std::size_t i = 0; i < orderings.size(); ++i)
    by_label[orderings[i].label(graph)] = i;

  std::vector<double> aligned(orderings.size(), 0.0);
  double mapped = 0.0;
  for (const auto& h : hypotheses.items) {
    std::optional<std::size_t> target;
    if (h.structured) {
      auto it = by_label.find(h.structured->label(graph));
      if (it != by_label.end()) target = it->second;
    } else if (mapping) {
      auto it = mapping->find(h.text);
      if (it != mapping->end() && it->second != "unmapped") {
        auto lt = by_label.find(it->second);
        if (lt == by_label.end())
          throw AlignmentError("mapping names unknown ordering '" + it->second + "'");
        target = lt->second;
      }
    }
    if (target) {
      aligned[*target] += posterior[h.id];
      mapped += posterior[h.id];
    }
  }
  if (!(mapped > 0.0))
    throw AlignmentError("no hypothesis could be aligned with the orderings space");
  for (double& v : aligned) v /= mapped;  // unmapped mass is dropped
  return aligned;
}

std::vector<ComparisonRow> compare_to_oracle(
    const env::RoomGraph& graph, const std::vector<RunRecord>& records,
    oracle::NoiseParam noise, const std::map<std::string, std::string>* mapping) {
  std::vector<const RunRecord*> sorted;
  for (const auto& r : records)
    if (r.ok() && r.mode != "open-ended") sorted.push_back(&r);
  std::sort(sorted.begin(), sorted.end(),
            [](const RunRecord* a, const RunRecord* b) { return a->run_id < b->run_id; });
  if (sorted.empty()) throw AlignmentError("no comparable runs");

  std::map<std::string, std::vector<const RunRecord*>> by_mode;
  for (const auto* r : sorted) by_mode[r->mode].push_back(r);

  std::vector<ComparisonRow> rows;
  for (const auto& [mode, group] : by_mode) {
    ComparisonRow row;
    row.mode = mode;
    row.runs = group.size();
    std::vector<double> model_concat, oracle_concat;
    double jsd_sum = 0.0, hell_sum = 0.0, max_delta = 0.0;
    for (const auto* rec : group) {
      env::TrajectoryDef traj = env::load_trajectory(graph, rec->trajectory_id);
      const auto oracle_post = oracle::optimal_posterior(graph, traj, {}, noise);
      const auto aligned = align_posterior(graph, rec->output.hypotheses,
                                           rec->output.final_posterior(), mapping);
      for (std::size_t i = 0; i < aligned.size(); ++i) {
        model_concat.push_back(aligned[i]);
        oracle_concat.push_back(oracle_post[i]);
        max_delta = std::max(max_delta, std::abs(aligned[i] - oracle_post[i]));
      }
      jsd_sum += metrics::jsd(aligned, oracle_post.values());
      hell_sum += metrics::hellinger(aligned, oracle_post.values());
    }
    row.report.jsd = jsd_sum / static_cast<double>(group.size());
    row.report.hellinger = hell_sum / static_cast<double>(group.size());
    row.report.pearson_r = metrics::pearson_r(model_concat, oracle_concat);
    row.report.spearman_rho = metrics::spearman_rho(model_concat, oracle_concat);
    row.report.t_stat = std::nan("");
    row.report.cohens_d = std::nan("");
    row.report.p_value = std::nan("");
    row.max_abs_delta = max_delta;
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string comparison_csv(const std::vector<ComparisonRow>& rows) {
  std::string csv = "mode,runs,pearson_r,spearman_rho,jsd_mean,hellinger_mean,max_abs_delta\n";
  for (const auto& row : rows) {
    csv += row.mode + "," + std::to_string(row.runs) + "," + csv_num(row.report.pearson_r) +
           "," + csv_num(row.report.spearman_rho) + "," + csv_num(row.report.jsd) + "," +
           csv_num(row.report.hellinger) + "," + csv_num(row.max_abs_delta) + "\n";
  }
  return csv;
}

void emit_report(const env::RoomGraph& graph, const std::vector<RunRecord>& records,
                 const std::filesystem::path& out_dir, oracle::NoiseParam noise) {
  if (records.empty()) throw ConfigError("no run records to report on");
  std::vector<const RunRecord*> sorted;
  for (const auto& r : records) sorted.push_back(&r);
  std::sort(sorted.begin(), sorted.end(),
            [](const RunRecord* a, const RunRecord* b) { return a->run_id < b->run_id; });

  // Final posterior per hypothesis, one row per (run, hypothesis).
  std::string posteriors =
      "mode,run_id,trajectory,hypothesis_index,hypothesis,probability\n";
  for (const auto* rec : sorted) {
    if (!rec->ok()) continue;
    const auto& post = rec->output.final_posterior();
    for (std::size_t i = 0; i < post.size(); ++i) {
      std::string text = i < rec->output.hypotheses.size()
                             ? rec->output.hypotheses.items[i].text
                             : "";
      std::replace(text.begin(), text.end(), ',', ';');
      posteriors += rec->mode + "," + rec->run_id + "," + rec->trajectory_id + "," +
                    std::to_string(i + 1) + "," + text + "," + csv_num(post[i]) + "\n";
    }
  }
  write_text_file(out_dir / "posteriors.csv", posteriors);

  // Divergence between consecutive posteriors, T-1 rows per T-step run.
  std::string divergence = "mode,run_id,trajectory,from_timestep,to_timestep,jsd,hellinger\n";
  for (const auto* rec : sorted) {
    if (!rec->ok()) continue;
    const auto& steps = rec->output.steps;
    for (std::size_t t = 0; t + 1 < steps.size(); ++t) {
      double j = metrics::jsd(steps[t].posterior.values(), steps[t + 1].posterior.values());
      double h =
          metrics::hellinger(steps[t].posterior.values(), steps[t + 1].posterior.values());
      divergence += rec->mode + "," + rec->run_id + "," + rec->trajectory_id + "," +
                    std::to_string(steps[t].timestep) + "," +
                    std::to_string(steps[t + 1].timestep) + "," + csv_num(j) + "," +
                    csv_num(h) + "\n";
    }
  }
  write_text_file(out_dir / "divergence.csv", divergence);

  // Human-readable summary. Wall-clock stays out so replays reproduce the
  // report byte-for-byte.
  std::string summary;
  std::size_t failed = 0;
  std::int64_t prompt_tokens = 0, completion_tokens = 0;
  for (const auto* rec : sorted) {
    if (!rec->ok()) ++failed;
    prompt_tokens += rec->output.usage.prompt_tokens;
    completion_tokens += rec->output.usage.completion_tokens;
  }
  summary += "runs: " + std::to_string(sorted.size()) + "\n";
  summary += "failed: " + std::to_string(failed) + "\n";
  summary += "prompt_tokens: " + std::to_string(prompt_tokens) + "\n";
  summary += "completion_tokens: " + std::to_string(completion_tokens) + "\n";
  for (const auto* rec : sorted)
    if (!rec->ok())
      summary += "error " + rec->run_id + ": " + rec->error + "\n";

  try {
    auto rows = compare_to_oracle(graph, records, noise);
    write_text_file(out_dir / "comparison.csv", comparison_csv(rows));
    summary += "\ncomparison vs analytic observer:\n";
    for (const auto& row : rows) {
      summary += "  " + row.mode + ": r=" + csv_num(row.report.pearson_r) +
                 " rho=" + csv_num(row.report.spearman_rho) +
                 " jsd=" + csv_num(row.report.jsd) +
                 " hellinger=" + csv_num(row.report.hellinger) +
                 " max|dP|=" + csv_num(row.max_abs_delta) + "\n";
    }
  } catch (const Error&) {
    summary += "\ncomparison vs analytic observer: not available for these runs\n";
  }
  summary += "\n" + reference::summary_block();
  write_text_file(out_dir / "summary.txt", summary);
}

}  // namespace laip::runner

namespace laip::reference {

std::string summary_block() {
  char buf[1024];
  std::snprintf(
      buf, sizeof(buf),
      "reference values (earlier hosted-model runs; reporting anchors, not targets):\n"
      "  closed-world walk-back, mass on the consistent hypothesis:\n"
      "    full=%.3f generic-cot=%.3f zero-shot=%.3f react=%.3f reflexion=%.3f\n"
      "  ten-trajectory comparison, strongest model:\n"
      "    pearson full=%.3f lcp=%.3f single-cot=%.3f generic-cot=%.3f zero-shot=%.3f\n"
      "    jsd     full=%.3f lcp=%.3f single-cot=%.3f generic-cot=%.3f zero-shot=%.3f\n"
      "  open-ended scenario, mass on the actor's true preferences:\n"
      "    full=%.3f zero-shot=%.3f\n",
      kStudy1ClosedTopHypothesis.laip_full, kStudy1ClosedTopHypothesis.generic_cot,
      kStudy1ClosedTopHypothesis.zero_shot, kStudy1ClosedTopHypothesis.react,
      kStudy1ClosedTopHypothesis.reflexion, kStudy2StrongestModel.pearson_full,
      kStudy2StrongestModel.pearson_llm_posterior, kStudy2StrongestModel.pearson_single_cot,
      kStudy2StrongestModel.pearson_generic_cot, kStudy2StrongestModel.pearson_zero_shot,
      kStudy2StrongestModel.jsd_full, kStudy2StrongestModel.jsd_llm_posterior,
      kStudy2StrongestModel.jsd_single_cot, kStudy2StrongestModel.jsd_generic_cot,
      kStudy2StrongestModel.jsd_zero_shot, kOpenEndedAlice.laip_true_preferences,
      kOpenEndedAlice.zero_shot_true_preferences);
  return buf;
}

}  // namespace laip::reference
