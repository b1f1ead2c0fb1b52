#pragma once

#include <cstdint>
#include <limits>
#include <vector>

#include "mtgbn/hmc.hpp"
#include "mtgbn/search.hpp"

namespace mtgbn {

// Full monotone-EM run settings. Zero-valued hyperparameter fields are filled
// from the data (p, m from the tasks; nu0 = p + 2); a NaN epsilon selects the
// default tolerance 1e-2 * m * p.
struct RunConfig {
  HyperParams hp{0.0, 0, 0};
  HmcConfig hmc;
  SearchConfig search;
  double epsilon = std::numeric_limits<double>::quiet_NaN();
  int max_em_iters = 20;
  std::uint64_t seed = 0;
  int jobs = 1;               // worker threads for the per-task maximization step
  bool record_chains = false;
};

// Per-iteration bookkeeping, one row per EM iteration (serialized to the run log).
struct EmIterRecord {
  int iter = 0;
  double q_new = 0.0;        // objective of the updated structures
  double q_prev = 0.0;       // objective of the previous structures, same draws
  double delta_se = 0.0;     // Monte-Carlo standard error of (q_new - q_prev)
  double accept_rate = 0.0;
  double step_size = 0.0;
  int n_draws = 0;
  bool fired = false;        // convergence criterion satisfied this iteration
  std::vector<double> task_scores;
  double wall_seconds = 0.0;
};

struct McemResult {
  std::vector<ScoredDag> dags;
  std::vector<double> q_trace;       // objective after each iteration's M-step
  std::vector<double> q_prev_trace;  // matching before-M-step values
  int em_iters_used = 0;
  std::vector<Chain> chains;         // filled when RunConfig::record_chains
  std::vector<EmIterRecord> records;
};

// Monte-Carlo EM objective: average over covariance draws of the total
// (structure prior + data marginal) score of all tasks.
double q_tilde(const std::vector<Dag>& dags, const std::vector<TaskData>& tasks,
               const std::vector<SpdMatrix>& sigma_samples, const HyperParams& hp);

// Alternates covariance sampling (warm-started chains) with per-task greedy
// structure maximization, starting from `init_dags`. Stops when the change in
// the objective stays within epsilon plus its Monte-Carlo standard error on two
// consecutive iterations (draw count doubles after the first firing, capped at
// 8x the configured count), or after max_em_iters. ChainDiverged is rethrown
// with the EM iteration attached.
McemResult run_mcem(const std::vector<TaskData>& tasks, const std::vector<Dag>& init_dags,
                    const RunConfig& cfg);

// Convenience initializer matching the reference pipeline: per-task single-task
// BIC structures as the EM starting point.
std::vector<Dag> sig_inits(const std::vector<TaskData>& tasks, const SearchConfig& cfg,
                           const std::vector<std::string>& names = {});

}  // namespace mtgbn
