#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "mtgbn/graph.hpp"
#include "mtgbn/likelihood.hpp"

namespace mtgbn {

// Hill-climbing settings shared by all structure learners.
struct SearchConfig {
  int max_parents = 5;
  int max_iters = 100;  // applied-move limit per climb
  int restarts = 0;     // additional random-start climbs beyond the given init
  std::uint64_t seed = 0;
  // Allowed undirected pairs; edges outside the set are never proposed.
  std::optional<std::vector<std::pair<int, int>>> candidate_skeleton;

  void validate() const;
};

// Search result: the structure, its score under the learner's objective, and the
// score after each applied move of the winning climb (non-decreasing).
struct ScoredDag {
  Dag dag;
  double score = 0.0;
  std::vector<double> trace;
};

// Monte-Carlo structure score: sum over covariance draws of the task's log marginal
// likelihood plus the log prior weight of the structure's decomposable cover.
double mc_score(const Dag& dag, const TaskData& task,
                const std::vector<SpdMatrix>& sigma_samples, const HyperParams& hp);

// Greedy add/delete/reverse search maximizing mc_score, starting from `init`,
// with optional random restarts; deterministic for a fixed config.
ScoredDag hill_climb(const TaskData& task, const std::vector<SpdMatrix>& sigma_samples,
                     const HyperParams& hp, const SearchConfig& cfg, const Dag& init);

// Single-task baseline: the same greedy search driven by the Gaussian BIC score
// (per-node penalty (|parents|+1) * log(n) / 2). Requires raw data rows.
// Nodes take the given names, or X1..Xp when omitted.
ScoredDag learn_sig(const TaskData& task, const SearchConfig& cfg,
                    const std::vector<std::string>& names = {});

// Pooled baseline: all task rows concatenated, then learn_sig on the pool.
// The returned structure stands for every task.
ScoredDag learn_avg(const std::vector<TaskData>& tasks, const SearchConfig& cfg,
                    const std::vector<std::string>& names = {});

// Pairs whose absolute sample correlation exceeds `threshold`; usable as a
// candidate skeleton. Zero-variance columns yield no pairs.
std::vector<std::pair<int, int>> correlation_skeleton(const TaskData& task, double threshold);

}  // namespace mtgbn
