#include "cli_common.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <set>

#include "mtgbn/errors.hpp"
#include "mtgbn/io.hpp"
#include "mtgbn/rng.hpp"
#include "mtgbn/search.hpp"

#ifndef MTGBN_VERSION
#define MTGBN_VERSION "0.0.0-unversioned"
#endif

namespace cli {

std::string version_string() { return MTGBN_VERSION; }

void json_put_double(json& obj, const std::string& key, double value) {
  if (std::isnan(value)) {
    obj[key] = nullptr;
  } else if (std::isinf(value)) {
    obj[key] = value > 0 ? "inf" : "-inf";
  } else {
    obj[key] = value;
  }
}

double json_get_double(const json& obj, const std::string& key) {
  const json& v = obj.at(key);
  if (v.is_null()) return std::numeric_limits<double>::quiet_NaN();
  if (v.is_string()) {
    const std::string s = v.get<std::string>();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    throw mtgbn::ConfigError("config: cannot read '" + s + "' as a number for " + key);
  }
  if (!v.is_number()) throw mtgbn::ConfigError("config: " + key + " must be a number");
  return v.get<double>();
}

ConfigLayers::ConfigLayers(CLI::App* sub, json defaults, const std::string& config_path)
    : sub_(sub), cfg_(std::move(defaults)) {
  if (config_path.empty()) return;
  json file;
  try {
    file = json::parse(mtgbn::read_text_file(config_path));
  } catch (const json::exception& e) {
    throw mtgbn::ConfigError(config_path + ": " + e.what());
  }
  if (file.contains("config")) file = file.at("config");  // manifests re-run directly
  if (!file.is_object()) throw mtgbn::ConfigError(config_path + ": config must be a JSON object");
  for (const auto& [key, value] : file.items()) {
    if (!cfg_.contains(key)) {
      throw mtgbn::ConfigError(config_path + ": unknown config key '" + key + "'");
    }
    cfg_[key] = value;
  }
}

void ConfigLayers::overlay_double(const std::string& flag, const std::string& key, double value) {
  if (sub_->count(flag) > 0) json_put_double(cfg_, key, value);
}

double ConfigLayers::get_double(const std::string& key) const {
  return json_get_double(cfg_, key);
}

void ensure_dir(const std::string& path) {
  std::error_code ec;
  std::filesystem::create_directories(path, ec);
  if (ec) throw mtgbn::IoError("cannot create directory " + path + ": " + ec.message());
}

std::string indexed_name(const std::string& stem, int index, int count, const std::string& ext) {
  int width = 2;
  for (int v = count; v >= 100; v /= 10) ++width;
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%0*d", width, index);
  return stem + "_" + buf + ext;
}

void write_manifest(const std::string& out_dir, const std::string& command, const json& cfg,
                    const std::vector<std::string>& inputs, const std::vector<std::string>& outputs,
                    const json& extra) {
  for (const auto& name : outputs) {
    if (!std::filesystem::exists(std::filesystem::path(out_dir) / name)) {
      throw mtgbn::IoError("manifest lists missing output " + name);
    }
  }
  const auto now = std::chrono::system_clock::now();
  const std::time_t tt = std::chrono::system_clock::to_time_t(now);
  char stamp[32];
  std::strftime(stamp, sizeof(stamp), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&tt));

  json manifest;
  manifest["command"] = command;
  manifest["version"] = version_string();
  manifest["timestamp"] = stamp;
  manifest["config"] = cfg;
  json ins = json::array();
  for (const auto& path : inputs) {
    ins.push_back({{"path", path},
                   {"absolute", std::filesystem::weakly_canonical(path).string()}});
  }
  manifest["inputs"] = ins;
  manifest["outputs"] = outputs;
  for (const auto& [key, value] : extra.items()) manifest[key] = value;
  mtgbn::atomic_write_text((std::filesystem::path(out_dir) / "manifest.json").string(),
                           manifest.dump(2) + "\n");
}

std::vector<std::string> expand_patterns(const std::vector<std::string>& patterns) {
  std::vector<std::string> out;
  for (const auto& pattern : patterns) {
    auto matched = mtgbn::expand_glob(pattern);
    out.insert(out.end(), matched.begin(), matched.end());
  }
  return out;
}

const mtgbn::Dag& LoadedGraph::as_dag() const {
  if (!directed) throw mtgbn::ConfigError("directed graph required, got an undirected file");
  return dag.front();
}

mtgbn::UGraph LoadedGraph::adjacency(const std::string& from) const {
  if (!directed) return ugraph.front();
  if (from == "moral") return mtgbn::moralize(dag.front());
  return mtgbn::skeleton(dag.front());
}

LoadedGraph load_graph(const std::string& path) {
  const std::string text = mtgbn::read_text_file(path);
  bool undirected = false;
  size_t start = 0;
  while (start < text.size()) {
    size_t end = text.find('\n', start);
    if (end == std::string::npos) end = text.size();
    const std::string line = text.substr(start, end - start);
    start = end + 1;
    const size_t first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    if (line.find("--") != std::string::npos) {
      undirected = true;
      break;
    }
  }
  LoadedGraph g;
  g.directed = !undirected;
  if (undirected) {
    g.ugraph.push_back(mtgbn::read_ugraph(path));
  } else {
    g.dag.push_back(mtgbn::read_dag(path));
  }
  return g;
}

LoadedTasks load_tasks(const std::vector<std::string>& paths, bool center, bool standardize) {
  if (paths.empty()) throw mtgbn::ConfigError("no task files given");
  LoadedTasks out;
  for (const auto& path : paths) {
    mtgbn::CsvMatrix csv = mtgbn::read_csv_matrix(path);
    if (csv.values.rows() < 1) throw mtgbn::ConfigError(path + ": no data rows");
    if (out.data.empty()) {
      out.names = csv.header;
    } else if (csv.values.cols() != out.data.front().cols()) {
      throw mtgbn::ConfigError(path + ": column count differs from " + paths.front());
    } else if (!csv.header.empty() && !out.names.empty() && csv.header != out.names) {
      throw mtgbn::ConfigError(path + ": header differs from " + paths.front());
    }
    out.data.push_back(std::move(csv.values));
  }
  if (out.names.empty()) {
    for (Eigen::Index j = 0; j < out.data.front().cols(); ++j) {
      out.names.push_back("X" + std::to_string(j + 1));
    }
  }
  if (center || standardize) {
    for (auto& mat : out.data) {
      const Eigen::RowVectorXd mean = mat.colwise().mean();
      mat.rowwise() -= mean;
      if (standardize) {
        for (Eigen::Index j = 0; j < mat.cols(); ++j) {
          const double sd = std::sqrt(mat.col(j).squaredNorm() /
                                      std::max<Eigen::Index>(1, mat.rows() - 1));
          if (sd <= 0.0) {
            throw mtgbn::ConfigError("standardize: column " + std::to_string(j + 1) +
                                     " has zero variance");
          }
          mat.col(j) /= sd;
        }
      }
    }
  }
  return out;
}

namespace {

std::vector<std::pair<int, int>> union_correlation_skeleton(
    const std::vector<mtgbn::TaskData>& tasks, double threshold) {
  std::set<std::pair<int, int>> pairs;
  for (const auto& task : tasks) {
    for (auto pr : mtgbn::correlation_skeleton(task, threshold)) pairs.insert(pr);
  }
  return {pairs.begin(), pairs.end()};
}

}  // namespace

std::vector<mtgbn::Dag> run_method(const std::string& method,
                                   const std::vector<mtgbn::TaskData>& tasks,
                                   const std::vector<std::string>& names, mtgbn::RunConfig run,
                                   double corr_threshold, mtgbn::McemResult* mcem_out) {
  if (corr_threshold >= 0.0) {
    run.search.candidate_skeleton = union_correlation_skeleton(tasks, corr_threshold);
  }
  std::vector<mtgbn::Dag> dags;
  if (method == "sig") {
    for (size_t i = 0; i < tasks.size(); ++i) {
      mtgbn::SearchConfig cfg = run.search;
      cfg.seed = mtgbn::mix64(run.seed ^ mtgbn::mix64(0x51900000ull + i));
      dags.push_back(mtgbn::learn_sig(tasks[i], cfg, names).dag);
    }
  } else if (method == "avg") {
    mtgbn::SearchConfig cfg = run.search;
    cfg.seed = mtgbn::mix64(run.seed ^ mtgbn::mix64(0xA7600000ull));
    const mtgbn::Dag pooled = mtgbn::learn_avg(tasks, cfg, names).dag;
    dags.assign(tasks.size(), pooled);
  } else if (method == "mtgbn") {
    const std::vector<mtgbn::Dag> inits = mtgbn::sig_inits(tasks, run.search, names);
    mtgbn::McemResult result = mtgbn::run_mcem(tasks, inits, run);
    for (const auto& scored : result.dags) dags.push_back(scored.dag);
    if (mcem_out) *mcem_out = std::move(result);
  } else {
    throw mtgbn::ConfigError("unknown method '" + method + "'");
  }
  return dags;
}

void add_learn_flags(CLI::App* sub, LearnFlags& f) {
  sub->add_option("--nu0", f.nu0, "Degrees of freedom (0 selects p+2)");
  sub->add_option("--epsilon", f.epsilon,
                  "EM stopping tolerance (default 0.01*m*p; inf stops after one iteration)");
  sub->add_option("--max-em-iters", f.max_em_iters, "EM iteration cap");
  sub->add_option("--jobs", f.jobs, "Worker threads for per-task search");
  sub->add_option("--hmc-samples", f.hmc_samples, "Retained covariance draws per E-step");
  sub->add_option("--hmc-burnin", f.hmc_burnin, "Discarded warm-up iterations per chain");
  sub->add_option("--hmc-thin", f.hmc_thin, "Keep every k-th post-warm-up draw");
  sub->add_option("--hmc-leapfrog", f.hmc_leapfrog, "Leapfrog steps per proposal");
  sub->add_option("--hmc-step", f.hmc_step, "Initial leapfrog step size");
  sub->add_flag("--hmc-no-adapt", f.hmc_no_adapt, "Disable warm-up step-size adaptation");
  sub->add_option("--hmc-target-accept", f.hmc_target_accept, "Adaptation target acceptance rate");
  sub->add_option("--max-parents", f.max_parents, "Parent-set size cap");
  sub->add_option("--search-iters", f.search_iters, "Applied-move cap per climb");
  sub->add_option("--restarts", f.restarts, "Random-restart climbs beyond the initial structure");
  sub->add_option("--corr-skeleton", f.corr_skeleton,
                  "Restrict candidate edges to pairs with |correlation| above this threshold");
}

void learn_flag_defaults(json& cfg) {
  const LearnFlags d;
  cfg["nu0"] = d.nu0;
  json_put_double(cfg, "epsilon", d.epsilon);
  cfg["max_em_iters"] = d.max_em_iters;
  cfg["jobs"] = d.jobs;
  cfg["hmc_samples"] = d.hmc_samples;
  cfg["hmc_burnin"] = d.hmc_burnin;
  cfg["hmc_thin"] = d.hmc_thin;
  cfg["hmc_leapfrog"] = d.hmc_leapfrog;
  cfg["hmc_step"] = d.hmc_step;
  cfg["hmc_adapt"] = !d.hmc_no_adapt;
  cfg["hmc_target_accept"] = d.hmc_target_accept;
  cfg["max_parents"] = d.max_parents;
  cfg["search_iters"] = d.search_iters;
  cfg["restarts"] = d.restarts;
  cfg["corr_skeleton"] = d.corr_skeleton;
}

void overlay_learn_flags(ConfigLayers& layers, const LearnFlags& f) {
  layers.overlay("--nu0", "nu0", f.nu0);
  layers.overlay_double("--epsilon", "epsilon", f.epsilon);
  layers.overlay("--max-em-iters", "max_em_iters", f.max_em_iters);
  layers.overlay("--jobs", "jobs", f.jobs);
  layers.overlay("--hmc-samples", "hmc_samples", f.hmc_samples);
  layers.overlay("--hmc-burnin", "hmc_burnin", f.hmc_burnin);
  layers.overlay("--hmc-thin", "hmc_thin", f.hmc_thin);
  layers.overlay("--hmc-leapfrog", "hmc_leapfrog", f.hmc_leapfrog);
  layers.overlay("--hmc-step", "hmc_step", f.hmc_step);
  layers.overlay("--hmc-no-adapt", "hmc_adapt", !f.hmc_no_adapt);
  layers.overlay("--hmc-target-accept", "hmc_target_accept", f.hmc_target_accept);
  layers.overlay("--max-parents", "max_parents", f.max_parents);
  layers.overlay("--search-iters", "search_iters", f.search_iters);
  layers.overlay("--restarts", "restarts", f.restarts);
  layers.overlay("--corr-skeleton", "corr_skeleton", f.corr_skeleton);
}

mtgbn::RunConfig run_config_from(const json& cfg) {
  mtgbn::RunConfig run;
  run.hp.nu0 = cfg.at("nu0").get<double>();
  run.epsilon = json_get_double(cfg, "epsilon");
  run.max_em_iters = cfg.at("max_em_iters").get<int>();
  run.jobs = cfg.at("jobs").get<int>();
  run.hmc.n_samples = cfg.at("hmc_samples").get<int>();
  run.hmc.burn_in = cfg.at("hmc_burnin").get<int>();
  run.hmc.thin = cfg.at("hmc_thin").get<int>();
  run.hmc.n_leapfrog = cfg.at("hmc_leapfrog").get<int>();
  run.hmc.step_size = cfg.at("hmc_step").get<double>();
  run.hmc.adapt_step_size = cfg.at("hmc_adapt").get<bool>();
  run.hmc.target_accept = cfg.at("hmc_target_accept").get<double>();
  run.search.max_parents = cfg.at("max_parents").get<int>();
  run.search.max_iters = cfg.at("search_iters").get<int>();
  run.search.restarts = cfg.at("restarts").get<int>();
  return run;
}

}  // namespace cli
