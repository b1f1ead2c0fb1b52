#pragma once

// Shared utilities for the unit tests and the release-gate checks: small-graph
// enumeration, random problem construction, quadrature, and Monte-Carlo error
// estimation. Everything here is deterministic given the passed-in Rng.

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "mtgbn/graph.hpp"
#include "mtgbn/likelihood.hpp"
#include "mtgbn/rng.hpp"
#include "mtgbn/simgen.hpp"
#include "mtgbn/stats.hpp"

namespace testutil {

inline std::vector<std::string> node_names(int p) {
  std::vector<std::string> names;
  names.reserve(p);
  for (int i = 0; i < p; ++i) names.push_back("X" + std::to_string(i + 1));
  return names;
}

// Every DAG on three labeled nodes (exactly 25 of them): iterate over all
// assignments of {none, ->, <-} to the three unordered pairs and keep the
// acyclic ones.
inline std::vector<mtgbn::Dag> all_three_node_dags() {
  const std::vector<std::pair<int, int>> pairs = {{0, 1}, {0, 2}, {1, 2}};
  std::vector<mtgbn::Dag> dags;
  for (int code = 0; code < 27; ++code) {
    int c = code;
    std::vector<std::pair<int, int>> edges;
    for (const auto& [a, b] : pairs) {
      int state = c % 3;
      c /= 3;
      if (state == 1) edges.emplace_back(a, b);
      if (state == 2) edges.emplace_back(b, a);
    }
    try {
      dags.emplace_back(node_names(3), edges);
    } catch (const mtgbn::Error&) {
      // cyclic assignment; skip
    }
  }
  return dags;
}

// Well-conditioned random SPD matrix: A A^T + p I scaled to O(1) entries.
inline mtgbn::SpdMatrix random_spd(int p, mtgbn::Rng& rng, double scale = 1.0) {
  Eigen::MatrixXd a(p, p);
  for (int i = 0; i < p; ++i)
    for (int j = 0; j < p; ++j) a(i, j) = rng.normal();
  Eigen::MatrixXd m = a * a.transpose() / p + Eigen::MatrixXd::Identity(p, p);
  return mtgbn::SpdMatrix(scale * m);
}

// Random task with data drawn from a random SPD covariance.
inline mtgbn::TaskData random_task(int p, int n, mtgbn::Rng& rng) {
  mtgbn::SpdMatrix cov = random_spd(p, rng);
  return mtgbn::TaskData::from_data(mtgbn::sample_mvn(cov, n, rng));
}

// Simpson's rule on a uniform grid; n_intervals must be even.
inline double simpson(const std::function<double(double)>& f, double lo, double hi,
                      int n_intervals) {
  const double h = (hi - lo) / n_intervals;
  double acc = f(lo) + f(hi);
  for (int i = 1; i < n_intervals; ++i) acc += f(lo + i * h) * (i % 2 == 1 ? 4.0 : 2.0);
  return acc * h / 3.0;
}

// Monte-Carlo standard error of the mean via batch means (guards against
// autocorrelation in MCMC output).
inline double batch_se(const std::vector<double>& xs, int n_batches = 50) {
  const int n = static_cast<int>(xs.size());
  const int batch = n / n_batches;
  std::vector<double> means;
  for (int b = 0; b < n_batches; ++b) {
    double s = 0.0;
    for (int i = b * batch; i < (b + 1) * batch; ++i) s += xs[i];
    means.push_back(s / batch);
  }
  double grand = 0.0;
  for (double m : means) grand += m;
  grand /= n_batches;
  double var = 0.0;
  for (double m : means) var += (m - grand) * (m - grand);
  var /= (n_batches - 1);
  return std::sqrt(var / n_batches);
}

inline double mean_of(const std::vector<double>& xs) {
  double s = 0.0;
  for (double x : xs) s += x;
  return s / static_cast<double>(xs.size());
}

inline double variance_of(const std::vector<double>& xs) {
  const double mu = mean_of(xs);
  double s = 0.0;
  for (double x : xs) s += (x - mu) * (x - mu);
  return s / static_cast<double>(xs.size() - 1);
}

// Undirected-pair symmetric difference between two DAGs' skeletons plus
// orientation flips counted on ordered pairs (the directed Hamming distance on
// adjacency-matrix entries).
inline int directed_hamming(const mtgbn::Dag& a, const mtgbn::Dag& b) {
  int dist = 0;
  const int p = a.num_nodes();
  for (int i = 0; i < p; ++i)
    for (int j = 0; j < p; ++j)
      if (i != j && a.has_edge(i, j) != b.has_edge(i, j)) ++dist;
  return dist;
}

}  // namespace testutil
