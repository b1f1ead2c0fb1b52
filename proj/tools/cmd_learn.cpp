#include <filesystem>
#include <memory>

#include "cli_common.hpp"
#include "mtgbn/io.hpp"

namespace cli {

namespace {

namespace fs = std::filesystem;

struct LearnOpts {
  std::string method;
  std::vector<std::string> task_patterns;
  std::string config_path;
  std::string out_dir;
  bool center = false;
  bool standardize = false;
  std::uint64_t seed = 0;
  LearnFlags flags;
};

std::string join(const std::string& dir, const std::string& name) {
  return (fs::path(dir) / name).string();
}

std::string qtrace_csv(const std::vector<mtgbn::EmIterRecord>& records) {
  std::string out = "iter,n_draws,q_new,q_prev,delta,se,accept_rate,step_size,fired\n";
  for (const auto& r : records) {
    out += std::to_string(r.iter) + ',' + std::to_string(r.n_draws) + ',' +
           mtgbn::format_double(r.q_new) + ',' + mtgbn::format_double(r.q_prev) + ',' +
           mtgbn::format_double(r.q_new - r.q_prev) + ',' + mtgbn::format_double(r.delta_se) +
           ',' + mtgbn::format_double(r.accept_rate) + ',' +
           mtgbn::format_double(r.step_size) + ',' + (r.fired ? "1" : "0") + '\n';
  }
  return out;
}

// One JSON object per line; wall-clock times live here, never in the CSVs.
std::string run_log_lines(const std::vector<mtgbn::EmIterRecord>& records,
                          const std::vector<mtgbn::ScoredDag>& dags) {
  std::string out;
  for (const auto& r : records) {
    json line;
    line["event"] = "em_iteration";
    line["iter"] = r.iter;
    line["n_draws"] = r.n_draws;
    json_put_double(line, "q_new", r.q_new);
    json_put_double(line, "q_prev", r.q_prev);
    json_put_double(line, "delta_se", r.delta_se);
    line["accept_rate"] = r.accept_rate;
    line["step_size"] = r.step_size;
    line["fired"] = r.fired;
    line["task_scores"] = r.task_scores;
    line["wall_seconds"] = r.wall_seconds;
    out += line.dump() + '\n';
  }
  json done;
  done["event"] = "done";
  done["em_iters_used"] = static_cast<int>(records.size());
  json scores = json::array();
  for (const auto& d : dags) scores.push_back(d.score);
  done["final_scores"] = scores;
  out += done.dump() + '\n';
  return out;
}

}  // namespace

void register_learn(CLI::App& app) {
  auto* sub = app.add_subcommand("learn", "Learn one structure per task from CSV datasets");
  auto o = std::make_shared<LearnOpts>();

  sub->add_option("--method", o->method, "mtgbn, sig, or avg")
      ->check(CLI::IsMember({"mtgbn", "sig", "avg"}));
  sub->add_option("--tasks", o->task_patterns, "Task CSV files (globs allowed)");
  sub->add_option("--config", o->config_path, "JSON config or manifest to start from");
  sub->add_option("--out", o->out_dir, "Output directory")->required();
  sub->add_flag("--center", o->center, "Subtract column means before learning");
  sub->add_flag("--standardize", o->standardize, "Center and scale columns to unit variance");
  sub->add_option("--seed", o->seed, "Root random seed");
  add_learn_flags(sub, o->flags);

  sub->callback([sub, o]() {
    json defaults;
    defaults["method"] = "mtgbn";
    defaults["tasks"] = json::array();
    defaults["center"] = false;
    defaults["standardize"] = false;
    defaults["seed"] = 0;
    learn_flag_defaults(defaults);

    ConfigLayers layers(sub, defaults, o->config_path);
    layers.overlay("--method", "method", o->method);
    layers.overlay("--tasks", "tasks", o->task_patterns);
    layers.overlay("--center", "center", o->center);
    layers.overlay("--standardize", "standardize", o->standardize);
    layers.overlay("--seed", "seed", o->seed);
    overlay_learn_flags(layers, o->flags);

    const json& cfg = layers.get();
    const std::string method = cfg.at("method").get<std::string>();
    const auto patterns = cfg.at("tasks").get<std::vector<std::string>>();
    if (patterns.empty()) throw mtgbn::ConfigError("learn: no --tasks given");
    const std::vector<std::string> task_files = expand_patterns(patterns);

    const bool center = cfg.at("center").get<bool>();
    const bool standardize = cfg.at("standardize").get<bool>();
    LoadedTasks loaded = load_tasks(task_files, center, standardize);
    std::vector<mtgbn::TaskData> tasks;
    tasks.reserve(loaded.data.size());
    for (auto& mat : loaded.data) tasks.push_back(mtgbn::TaskData::from_data(std::move(mat)));
    const int m = static_cast<int>(tasks.size());

    mtgbn::RunConfig run = run_config_from(cfg);
    run.seed = cfg.at("seed").get<std::uint64_t>();
    const double corr_threshold = cfg.at("corr_skeleton").get<double>();

    mtgbn::McemResult result;
    const std::vector<mtgbn::Dag> dags =
        run_method(method, tasks, loaded.names, run, corr_threshold, &result);

    ensure_dir(o->out_dir);
    std::vector<std::string> outputs;
    for (int i = 0; i < m; ++i) {
      const std::string name = indexed_name("dag", i + 1, m, ".txt");
      mtgbn::write_dag(join(o->out_dir, name), dags[i]);
      outputs.push_back(name);
    }
    json extra;
    if (method == "mtgbn") {
      mtgbn::atomic_write_text(join(o->out_dir, "qtrace.csv"), qtrace_csv(result.records));
      outputs.push_back("qtrace.csv");
      mtgbn::atomic_write_text(join(o->out_dir, "run.log"),
                               run_log_lines(result.records, result.dags));
      outputs.push_back("run.log");
      extra["em_iters_used"] = result.em_iters_used;
    }
    if (method == "avg") {
      extra["note"] = "single pooled-data structure replicated for every task";
    }
    extra["seeds"] = {{"root", cfg.at("seed").get<std::uint64_t>()},
                      {"derivation", "fixed per-stream tags from the root seed"}};

    // The manifest echoes the resolved file list, not the patterns, so a re-run
    // reads exactly the same inputs even if the glob would match more today.
    json cfg_echo = cfg;
    json resolved = json::array();
    for (const auto& path : task_files) {
      resolved.push_back(std::filesystem::weakly_canonical(path).string());
    }
    cfg_echo["tasks"] = resolved;

    std::vector<std::string> inputs = task_files;
    if (!o->config_path.empty()) inputs.push_back(o->config_path);
    write_manifest(o->out_dir, "learn", cfg_echo, inputs, outputs, extra);
  });
}

}  // namespace cli
