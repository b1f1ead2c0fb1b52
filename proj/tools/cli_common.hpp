#pragma once

#include <limits>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "mtgbn/graph.hpp"
#include "mtgbn/likelihood.hpp"
#include "mtgbn/mcem.hpp"

namespace cli {

using nlohmann::json;

std::string version_string();

// Effective configuration: built-in defaults, overlaid by the --config file
// (plain config object, or a manifest whose "config" member is used), overlaid
// by explicitly passed flags. Unknown file keys are a ConfigError.
class ConfigLayers {
 public:
  ConfigLayers(CLI::App* sub, json defaults, const std::string& config_path);

  // Records a flag value when the user actually passed the flag.
  template <typename T>
  void overlay(const std::string& flag, const std::string& key, const T& value) {
    if (sub_->count(flag) > 0) cfg_[key] = value;
  }
  void overlay_double(const std::string& flag, const std::string& key, double value);

  const json& get() const { return cfg_; }
  double get_double(const std::string& key) const;

 private:
  CLI::App* sub_;
  json cfg_;
};

// NaN maps to null, infinities to "inf"/"-inf" strings (JSON has no non-finite
// numbers); get_double inverts the mapping.
void json_put_double(json& obj, const std::string& key, double value);
double json_get_double(const json& obj, const std::string& key);

// Creates the directory (and parents) if needed; IoError on failure.
void ensure_dir(const std::string& path);

// data_01.csv-style names: zero-padded 1-based index, width from the count.
std::string indexed_name(const std::string& stem, int index, int count, const std::string& ext);

// Written last, after every listed output exists.
void write_manifest(const std::string& out_dir, const std::string& command, const json& cfg,
                    const std::vector<std::string>& inputs, const std::vector<std::string>& outputs,
                    const json& extra = json::object());

// Expands each pattern (glob or literal path) and concatenates in pattern order.
std::vector<std::string> expand_patterns(const std::vector<std::string>& patterns);

// A graph file holding directed edges parses to dag; "--" edges parse to
// undirected. Files with no edge lines count as directed.
struct LoadedGraph {
  bool directed = false;
  std::vector<mtgbn::Dag> dag;      // size 1 when directed
  std::vector<mtgbn::UGraph> ugraph;  // size 1 when undirected

  const mtgbn::Dag& as_dag() const;
  mtgbn::UGraph adjacency(const std::string& from) const;  // from: skeleton|moral
};
LoadedGraph load_graph(const std::string& path);

// Task CSVs -> matrices + agreed column names (header when present, X1..Xp
// otherwise); enforces a common column count.
struct LoadedTasks {
  std::vector<Eigen::MatrixXd> data;
  std::vector<std::string> names;
};
LoadedTasks load_tasks(const std::vector<std::string>& paths, bool center, bool standardize);

// Runs one learner in memory. method: mtgbn | sig | avg. A nonnegative
// corr_threshold enables a candidate skeleton (union of per-task correlation
// skeletons). mcem_out, when given, receives the full EM result for mtgbn.
std::vector<mtgbn::Dag> run_method(const std::string& method,
                                   const std::vector<mtgbn::TaskData>& tasks,
                                   const std::vector<std::string>& names, mtgbn::RunConfig run,
                                   double corr_threshold, mtgbn::McemResult* mcem_out);

// Shared learner flag block (learn and compare take identical knobs).
struct LearnFlags {
  double nu0 = 0.0;
  double epsilon = std::numeric_limits<double>::quiet_NaN();
  int max_em_iters = 20;
  int jobs = 1;
  int hmc_samples = 200;
  int hmc_burnin = 500;
  int hmc_thin = 2;
  int hmc_leapfrog = 20;
  double hmc_step = 0.01;
  bool hmc_no_adapt = false;
  double hmc_target_accept = 0.7;
  int max_parents = 5;
  int search_iters = 100;
  int restarts = 0;
  double corr_skeleton = -1.0;  // negative: no candidate skeleton
};

void add_learn_flags(CLI::App* sub, LearnFlags& f);
void learn_flag_defaults(json& cfg);
void overlay_learn_flags(ConfigLayers& layers, const LearnFlags& f);
// Builds the typed RunConfig from the effective configuration (seed and
// record-keeping fields are the caller's).
mtgbn::RunConfig run_config_from(const json& cfg);

void register_simulate(CLI::App& app);
void register_learn(CLI::App& app);
void register_eval(CLI::App& app);
void register_compare(CLI::App& app);

}  // namespace cli
