#include "mtgbn/likelihood.hpp"

#include <algorithm>
#include <cmath>

namespace mtgbn {

TaskData TaskData::from_data(Eigen::MatrixXd data) {
  TaskData t;
  t.n = static_cast<int>(data.rows());
  t.s = sample_cov(data);
  t.data = std::move(data);
  return t;
}

TaskData TaskData::from_moments(Eigen::MatrixXd s, int n) {
  if (s.rows() != s.cols() || s.rows() == 0) {
    throw DimensionMismatch("TaskData: covariance must be square and non-empty");
  }
  if (n < 1) throw DomainError("TaskData: need n >= 1");
  TaskData t;
  t.s = std::move(s);
  t.n = n;
  return t;
}

void HyperParams::validate() const {
  if (p < 1) throw DomainError("HyperParams: p must be at least 1");
  if (m < 0) throw DomainError("HyperParams: m must be non-negative");
  if (!(nu0 > p - 1)) throw DomainError("HyperParams: need nu0 > p - 1");
}

namespace {

void check_tasks(const std::vector<TaskData>& tasks,
                 const std::vector<CliqueSequence>& covers, const HyperParams& hp) {
  hp.validate();
  if (tasks.size() != covers.size()) {
    throw DimensionMismatch("tasks and covers must have equal length");
  }
  for (const auto& t : tasks) {
    if (t.dim() != hp.p) throw DimensionMismatch("task dimension does not match hp.p");
    if (t.n < 1) throw DomainError("task has no observations");
  }
}

// sigma_h + n * S, symmetrized; SPD because sigma_h is PD and S is PSD.
SpdMatrix posterior_scale(const SpdMatrix& sigma_h, const TaskData& task) {
  Eigen::MatrixXd m = sigma_h.mat() + static_cast<double>(task.n) * task.s;
  return SpdMatrix(std::move(m));
}

}  // namespace

double hiw_subset_term(const SpdMatrix& sigma, const std::vector<int>& subset, double nu0) {
  if (subset.empty()) return 0.0;
  const int c = static_cast<int>(subset.size());
  const double a = (nu0 + c - 1) / 2.0;
  return a * (logdet_sub(sigma, subset) - c * std::log(2.0)) - lmvgamma(c, a);
}

double log_h(const SpdMatrix& sigma, const CliqueSequence& cs, double nu0) {
  if (cs.cliques.empty()) throw DomainError("log_h: clique sequence is empty");
  double out = 0.0;
  for (const auto& c : cs.cliques) out += hiw_subset_term(sigma, c, nu0);
  for (const auto& s : cs.separators) out -= hiw_subset_term(sigma, s, nu0);
  return out;
}

double marginal_family_term(const SpdMatrix& sigma_h, const SpdMatrix& posterior, int n,
                            const std::vector<int>& subset, double nu0) {
  if (subset.empty()) return 0.0;
  const int c = static_cast<int>(subset.size());
  const double nun = nu0 + n;
  return nu0 / 2.0 * logdet_sub(sigma_h, subset) + lmvgamma(c, nun / 2.0) -
         n * c / 2.0 * std::log(M_PI) - nun / 2.0 * logdet_sub(posterior, subset) -
         lmvgamma(c, nu0 / 2.0);
}

double log_marginal_task(const TaskData& task, const Dag& dag, const SpdMatrix& sigma_h,
                         const HyperParams& hp) {
  hp.validate();
  if (task.dim() != hp.p || dag.num_nodes() != hp.p || sigma_h.dim() != hp.p) {
    throw DimensionMismatch("log_marginal_task: dimensions disagree");
  }
  const SpdMatrix posterior = posterior_scale(sigma_h, task);
  double out = 0.0;
  for (int k = 0; k < hp.p; ++k) {
    const std::vector<int>& parents = dag.parents(k);
    std::vector<int> family = parents;
    family.insert(std::lower_bound(family.begin(), family.end(), k), k);
    out += marginal_family_term(sigma_h, posterior, task.n, family, hp.nu0) -
           marginal_family_term(sigma_h, posterior, task.n, parents, hp.nu0);
  }
  return out;
}

double log_post_kernel_sigma_h(const SpdMatrix& sigma_h, const std::vector<TaskData>& tasks,
                               const std::vector<CliqueSequence>& covers,
                               const HyperParams& hp) {
  check_tasks(tasks, covers, hp);
  if (sigma_h.dim() != hp.p) {
    throw DimensionMismatch("log_post_kernel_sigma_h: sigma_h dimension mismatch");
  }
  double out = 0.0;
  for (size_t i = 0; i < tasks.size(); ++i) {
    const SpdMatrix posterior = posterior_scale(sigma_h, tasks[i]);
    out += hp.nu0 / 2.0 * sigma_h.logdet() + log_h(posterior, covers[i], hp.nu0) -
           (hp.nu0 + tasks[i].n) / 2.0 * posterior.logdet();
  }
  return out;
}

double log_density_v(const CholState& v, const std::vector<TaskData>& tasks,
                     const std::vector<CliqueSequence>& covers, const HyperParams& hp) {
  check_tasks(tasks, covers, hp);
  if (v.dim() != hp.p) throw DimensionMismatch("log_density_v: state dimension mismatch");
  const int p = hp.p;
  const double m = static_cast<double>(tasks.size());
  const SpdMatrix sigma_h = inverse_transform(v);
  double out = 0.0;
  for (size_t i = 0; i < tasks.size(); ++i) {
    const SpdMatrix posterior = posterior_scale(sigma_h, tasks[i]);
    out += log_h(posterior, covers[i], hp.nu0) -
           (hp.nu0 + tasks[i].n) / 2.0 * posterior.logdet();
  }
  // Prior determinant term and reparameterization volume, linear in the log-diagonal.
  for (int i = 1; i <= p; ++i) out += (m * hp.nu0 + p - i + 2) * v(i - 1, i - 1);
  return out;
}

Eigen::MatrixXd grad_log_density_v(const CholState& v, const std::vector<TaskData>& tasks,
                                   const std::vector<CliqueSequence>& covers,
                                   const HyperParams& hp) {
  check_tasks(tasks, covers, hp);
  if (v.dim() != hp.p) throw DimensionMismatch("grad_log_density_v: state dimension mismatch");
  const int p = hp.p;
  const double m = static_cast<double>(tasks.size());

  // Rebuild the triangular factor; sigma_h = L L^T.
  Eigen::MatrixXd l = v.v();
  for (int i = 0; i < p; ++i) l(i, i) = std::exp(l(i, i));
  if (!l.allFinite()) throw Overflow("grad_log_density_v: factor is not finite");
  const SpdMatrix sigma_h = SpdMatrix(l * l.transpose());

  // d/dL of logdet (sigma_h + nS)_CC is 2 * lower(I_C^T (sigma_h + nS)_CC^{-1} I_C L);
  // coefficients (nu0+|C|-1)/2 on cliques, minus separators, minus (nu0+n)/2 on the
  // full-matrix determinant, each scaled by the 2 from the derivative.
  Eigen::MatrixXd grad_l = Eigen::MatrixXd::Zero(p, p);
  for (size_t i = 0; i < tasks.size(); ++i) {
    const SpdMatrix posterior = posterior_scale(sigma_h, tasks[i]);
    auto add_subset = [&](const std::vector<int>& c, double sign) {
      if (c.empty()) return;
      const int cs = static_cast<int>(c.size());
      Eigen::MatrixXd sub(cs, cs);
      for (int a = 0; a < cs; ++a) {
        for (int b = 0; b < cs; ++b) sub(a, b) = posterior(c[a], c[b]);
      }
      Eigen::LLT<Eigen::MatrixXd> llt(sub);
      if (llt.info() != Eigen::Success) {
        throw NotPositiveDefinite("grad_log_density_v: submatrix not positive definite");
      }
      Eigen::MatrixXd rows(cs, p);
      for (int a = 0; a < cs; ++a) rows.row(a) = l.row(c[a]);
      const Eigen::MatrixXd scaled = llt.solve(rows);
      const double coeff = sign * (hp.nu0 + cs - 1);
      for (int a = 0; a < cs; ++a) grad_l.row(c[a]) += coeff * scaled.row(a);
    };
    for (const auto& c : covers[i].cliques) add_subset(c, +1.0);
    for (const auto& s : covers[i].separators) add_subset(s, -1.0);
    grad_l -= (hp.nu0 + tasks[i].n) * posterior.solve(l);
  }
  // Chain rule to the unconstrained entries: diagonal picks up the factor l_ii,
  // then the linear volume/prior coefficients.
  Eigen::MatrixXd grad_v = Eigen::MatrixXd::Zero(p, p);
  for (int i = 0; i < p; ++i) {
    for (int j = 0; j < i; ++j) grad_v(i, j) = grad_l(i, j);
    grad_v(i, i) = grad_l(i, i) * l(i, i) + (m * hp.nu0 + p - (i + 1) + 2);
  }
  if (!grad_v.allFinite()) throw NonFinite("grad_log_density_v: gradient is not finite");
  return grad_v;
}

}  // namespace mtgbn
