#pragma once

#include <Eigen/Dense>
#include <vector>

#include "mtgbn/graph.hpp"
#include "mtgbn/stats.hpp"

namespace mtgbn {

// One task's observations with cached zero-mean sufficient statistics.
struct TaskData {
  Eigen::MatrixXd data;  // n x p, may be empty when constructed from moments
  Eigen::MatrixXd s;     // p x p zero-mean sample covariance
  int n = 0;

  static TaskData from_data(Eigen::MatrixXd data);
  static TaskData from_moments(Eigen::MatrixXd s, int n);
  int dim() const { return static_cast<int>(s.rows()); }
};

// Shared-prior hyperparameters: degrees of freedom, node count, task count.
struct HyperParams {
  double nu0 = 0.0;
  int p = 0;
  int m = 0;

  // Throws DomainError unless nu0 > p-1, p >= 1, m >= 0.
  void validate() const;
  static HyperParams standard(int p, int m) {
    return HyperParams{static_cast<double>(p) + 2.0, p, m};
  }
};

// Per-clique factor of the decomposable covariance prior's log normalizing
// constant: ((nu0+|C|-1)/2) * (logdet sigma_CC - |C| log 2) - lmvgamma(|C|, (nu0+|C|-1)/2).
// Empty subsets contribute 0.
double hiw_subset_term(const SpdMatrix& sigma, const std::vector<int>& subset, double nu0);

// Log normalizing constant of the decomposable covariance prior over the given
// clique/separator sequence: sum of clique terms minus sum of separator terms.
double log_h(const SpdMatrix& sigma, const CliqueSequence& cs, double nu0);

// One subset's factor of the structure-conditional data marginal:
// (nu0/2) logdet sigma_h_CC + lmvgamma(|C|, (nu0+n)/2) - (n|C|/2) log pi
//   - ((nu0+n)/2) logdet (sigma_h + n S)_CC - lmvgamma(|C|, nu0/2).
// `posterior` must be sigma_h + n*S for the task. Empty subsets contribute 0.
double marginal_family_term(const SpdMatrix& sigma_h, const SpdMatrix& posterior, int n,
                            const std::vector<int>& subset, double nu0);

// Log marginal likelihood of a task's data given its DAG and the shared covariance:
// product over nodes of family-term / parent-term, in log space.
double log_marginal_task(const TaskData& task, const Dag& dag, const SpdMatrix& sigma_h,
                         const HyperParams& hp);

// Unnormalized log posterior of the shared covariance given all task structures
// (via their decomposable covers) and data.
double log_post_kernel_sigma_h(const SpdMatrix& sigma_h, const std::vector<TaskData>& tasks,
                               const std::vector<CliqueSequence>& covers,
                               const HyperParams& hp);

// Same posterior expressed in the unconstrained triangular parameterization,
// including the reparameterization volume term: for diagonal position i (1-based)
// the linear coefficient is m*nu0 + p - i + 2. Additive constants dropped.
double log_density_v(const CholState& v, const std::vector<TaskData>& tasks,
                     const std::vector<CliqueSequence>& covers, const HyperParams& hp);

// Gradient of log_density_v with respect to the free triangular entries.
// Lower-triangular p x p matrix; strict upper zero. The contract is agreement
// with central finite differences of log_density_v.
Eigen::MatrixXd grad_log_density_v(const CholState& v, const std::vector<TaskData>& tasks,
                                   const std::vector<CliqueSequence>& covers,
                                   const HyperParams& hp);

}  // namespace mtgbn
