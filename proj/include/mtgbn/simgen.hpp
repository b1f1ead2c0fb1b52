#pragma once

#include <cstdint>
#include <vector>

#include "mtgbn/graph.hpp"
#include "mtgbn/likelihood.hpp"
#include "mtgbn/stats.hpp"

namespace mtgbn {

// Synthetic generation settings: shared covariance, per-task sparsified
// precision matrices, Gaussian observations.
struct SynthSpec {
  int m = 0;
  int p = 0;
  std::vector<int> n;       // per-task sample sizes; a single value broadcasts
  double density = 0.3;     // target |E|/p^2, in (0,1)
  double nu0 = 0.0;         // 0 selects p + 2
  int max_retries = 100;    // per-task redraw cap for the positive-definite check
  std::uint64_t seed = 0;

  void validate() const;
};

struct SynthOutput {
  SpdMatrix sigma_h_true;
  std::vector<UGraph> graphs;              // conditional-independence structures
  std::vector<Eigen::MatrixXd> precisions; // thresholded precision matrices
  std::vector<TaskData> tasks;
  // Redraws used per task: the accepted attempt's index, or max_retries when
  // every attempt needed the diagonal repair described at generate_synthetic.
  std::vector<int> retries;
};

// Draws the shared covariance uniformly among unit-trace SPD matrices, then per
// task: inverse-Wishart covariance, precision thresholded at the quantile whose
// edge count best matches the target density, redraw until the thresholded
// precision is positive definite, observations from its inverse.
//
// Thresholding a dense precision rarely leaves it positive definite once p
// grows past ~8, so redraws alone stall at realistic sizes. When max_retries
// redraws all fail, the candidate with the least-negative minimum eigenvalue is
// repaired by a diagonal shift just past that eigenvalue. The shift preserves
// the zero pattern, the surviving off-diagonal values, and hence the graph; it
// only shrinks the implied partial correlations. Throws RetriesExhausted only
// if even the repaired matrix fails its definiteness check.
SynthOutput generate_synthetic(const SynthSpec& spec);

// Benchmark perturbation settings; positions are unordered node pairs, of which
// ceil(level * p(p-1)/2) are modified per generated network.
struct PerturbSpec {
  double level = 0.0;
  int m = 0;
  std::uint64_t seed = 0;

  void validate() const;
};

// Independent perturbed copies of `base`: an empty selected pair gains an edge
// oriented along the base topological order (opposite orientation if that would
// cycle); an occupied pair is deleted or reversed with equal probability, a
// cycle-creating reversal degrading to deletion. Every output is acyclic and
// each selected pair is modified at most once.
std::vector<Dag> perturb_benchmark(const Dag& base, const PerturbSpec& spec);

// n rows from the linear structural-equation model on `dag`: each node is the
// weighted sum of its parents plus unit Gaussian noise, weights drawn once per
// call, uniform on [-1,-0.5] U [0.5,1].
Eigen::MatrixXd sample_sem_data(const Dag& dag, int n, Rng& rng);

// Random DAG with the exact edge count: random node order, random distinct pairs
// oriented along it. Throws DomainError if num_edges exceeds p(p-1)/2.
Dag random_dag(int p, int num_edges, Rng& rng);

}  // namespace mtgbn
