#include "mtgbn/simgen.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>

namespace mtgbn {

void SynthSpec::validate() const {
  if (m < 1) throw ConfigError("simulate: m must be positive");
  if (p < 1) throw ConfigError("simulate: p must be positive");
  if (n.empty() || (n.size() != 1 && static_cast<int>(n.size()) != m)) {
    throw ConfigError("simulate: n must hold one value or one per task");
  }
  for (int v : n) {
    if (v < 1) throw ConfigError("simulate: sample sizes must be positive");
  }
  if (!(density > 0.0 && density < 1.0)) {
    throw ConfigError("simulate: density must lie in (0,1)");
  }
  if (max_retries < 1) throw ConfigError("simulate: max_retries must be positive");
  if (nu0 != 0.0 && !(nu0 > p - 1)) throw ConfigError("simulate: need nu0 > p - 1");
}

namespace {

std::vector<std::string> default_names(int p) {
  std::vector<std::string> names;
  names.reserve(p);
  for (int i = 1; i <= p; ++i) names.push_back("X" + std::to_string(i));
  return names;
}

// Threshold whose strict exceedance keeps the edge count closest to the target
// density (edges counted as ordered pairs over p^2 positions, so k unordered
// pairs give density 2k/p^2). Ties prefer the sparser choice.
double density_threshold(const Eigen::MatrixXd& omega, double density) {
  const int p = static_cast<int>(omega.rows());
  std::vector<double> mags;
  mags.reserve(p * (p - 1) / 2);
  for (int i = 0; i < p; ++i) {
    for (int j = i + 1; j < p; ++j) mags.push_back(std::abs(omega(i, j)));
  }
  std::sort(mags.begin(), mags.end(), std::greater<double>());
  const int total = static_cast<int>(mags.size());
  int best_k = 0;
  double best_gap = density;  // gap at k = 0
  for (int k = 1; k <= total; ++k) {
    const double gap = std::abs(2.0 * k / (p * p) - density);
    if (gap < best_gap) {
      best_gap = gap;
      best_k = k;
    }
  }
  if (best_k == 0) return mags.empty() ? 0.0 : mags.front() + 1.0;
  if (best_k == total) return 0.0;
  return (mags[best_k - 1] + mags[best_k]) / 2.0;
}

// Records one finished task: graph from the precision's zero pattern, covariance
// by inversion, data sampled from it.
void finish_task(SynthOutput& out, const std::vector<std::string>& names,
                 Eigen::MatrixXd omega, int n_l, int retries, Rng& task_rng) {
  const int p = static_cast<int>(omega.rows());
  UGraph graph(names);
  for (int i = 0; i < p; ++i) {
    for (int j = i + 1; j < p; ++j) {
      if (omega(i, j) != 0.0) graph.add_edge(i, j);
    }
  }
  const SpdMatrix omega_spd(omega);
  SpdMatrix sigma_l(omega_spd.inverse());
  out.graphs.push_back(std::move(graph));
  out.precisions.push_back(std::move(omega));
  out.tasks.push_back(TaskData::from_data(sample_mvn(sigma_l, n_l, task_rng)));
  out.retries.push_back(retries);
}

}  // namespace

SynthOutput generate_synthetic(const SynthSpec& spec) {
  spec.validate();
  const int p = spec.p;
  const double nu0 = spec.nu0 == 0.0 ? static_cast<double>(p) + 2.0 : spec.nu0;
  const auto names = default_names(p);
  Rng root(spec.seed);

  Rng shared_rng = root.derive(0);
  SynthOutput out{sample_uniform_spd_unit_trace(p, shared_rng), {}, {}, {}, {}};

  for (int l = 0; l < spec.m; ++l) {
    const int n_l = spec.n.size() == 1 ? spec.n[0] : spec.n[l];
    Rng task_rng = root.derive(l + 1);
    bool done = false;
    Eigen::MatrixXd best_omega;
    double best_min_eig = -std::numeric_limits<double>::infinity();
    for (int attempt = 0; attempt < spec.max_retries && !done; ++attempt) {
      const SpdMatrix sigma_tilde = sample_inverse_wishart(out.sigma_h_true, nu0, task_rng);
      const Eigen::MatrixXd omega_tilde = sigma_tilde.inverse();
      const double threshold = density_threshold(omega_tilde, spec.density);

      Eigen::MatrixXd omega = Eigen::MatrixXd::Zero(p, p);
      omega.diagonal() = omega_tilde.diagonal();
      for (int i = 0; i < p; ++i) {
        for (int j = i + 1; j < p; ++j) {
          if (std::abs(omega_tilde(i, j)) > threshold) {
            omega(i, j) = omega(j, i) = omega_tilde(i, j);
          }
        }
      }
      Eigen::LLT<Eigen::MatrixXd> llt(omega);
      if (llt.info() != Eigen::Success || (llt.matrixLLT().diagonal().array() <= 0.0).any()) {
        // Thresholding broke positive definiteness; remember the least-bad
        // candidate for the repair path, then redraw.
        const double min_eig =
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(omega).eigenvalues().minCoeff();
        if (min_eig > best_min_eig) {
          best_min_eig = min_eig;
          best_omega = std::move(omega);
        }
        continue;
      }
      finish_task(out, names, std::move(omega), n_l, attempt, task_rng);
      done = true;
    }
    if (!done) {
      // No redraw sparsified cleanly. Shift the best candidate's diagonal just
      // past its most negative eigenvalue; the zero pattern and the surviving
      // off-diagonal values are untouched.
      const double shift = 1.05 * std::max(0.0, -best_min_eig) +
                           1e-6 * best_omega.diagonal().mean();
      best_omega.diagonal().array() += shift;
      Eigen::LLT<Eigen::MatrixXd> llt(best_omega);
      if (llt.info() != Eigen::Success ||
          (llt.matrixLLT().diagonal().array() <= 0.0).any()) {
        throw RetriesExhausted("simulate: task " + std::to_string(l) + " exceeded " +
                               std::to_string(spec.max_retries) + " redraws");
      }
      finish_task(out, names, std::move(best_omega), n_l, spec.max_retries, task_rng);
    }
  }
  return out;
}

void PerturbSpec::validate() const {
  if (!(level >= 0.0 && level <= 1.0)) {
    throw ConfigError("perturb: level must lie in [0,1]");
  }
  if (m < 1) throw ConfigError("perturb: m must be positive");
}

std::vector<Dag> perturb_benchmark(const Dag& base, const PerturbSpec& spec) {
  spec.validate();
  const int p = base.num_nodes();
  const auto topo = base.topological_order();
  std::vector<int> rank(p);
  for (int i = 0; i < p; ++i) rank[topo[i]] = i;

  // All unordered pairs in a fixed order; each output draws its prefix sample.
  std::vector<std::pair<int, int>> all_pairs;
  all_pairs.reserve(p * (p - 1) / 2);
  for (int i = 0; i < p; ++i) {
    for (int j = i + 1; j < p; ++j) all_pairs.emplace_back(i, j);
  }
  const int total = static_cast<int>(all_pairs.size());
  const int count = static_cast<int>(std::ceil(spec.level * total));

  Rng root(spec.seed);
  std::vector<Dag> out;
  out.reserve(spec.m);
  for (int g = 0; g < spec.m; ++g) {
    Rng rng = root.derive(g + 1);
    // Partial Fisher-Yates: the first `count` entries are a uniform sample
    // without replacement.
    auto pairs = all_pairs;
    for (int i = 0; i < count; ++i) {
      const int j = i + static_cast<int>(rng.below(total - i));
      std::swap(pairs[i], pairs[j]);
    }
    Dag dag = base;
    for (int i = 0; i < count; ++i) {
      auto [a, b] = pairs[i];
      if (dag.has_edge(a, b) || dag.has_edge(b, a)) {
        const int src = dag.has_edge(a, b) ? a : b;
        const int dst = src == a ? b : a;
        if (rng.uniform() < 0.5) {
          dag = dag.without_edge(src, dst);
        } else {
          Dag removed = dag.without_edge(src, dst);
          // Reversal only if legal; otherwise the redraw collapses to deletion.
          dag = removed.can_add_edge(dst, src) ? removed.with_edge(dst, src)
                                               : std::move(removed);
        }
      } else {
        const int src = rank[a] < rank[b] ? a : b;
        const int dst = src == a ? b : a;
        if (dag.can_add_edge(src, dst)) {
          dag = dag.with_edge(src, dst);
        } else {
          dag = dag.with_edge(dst, src);  // opposite orientation is always legal
        }
      }
    }
    out.push_back(std::move(dag));
  }
  return out;
}

Eigen::MatrixXd sample_sem_data(const Dag& dag, int n, Rng& rng) {
  if (n < 1) throw DomainError("sample_sem_data: need at least one row");
  const int p = dag.num_nodes();
  // One weight per edge, drawn up front in (src, dst) order.
  std::vector<std::pair<int, int>> es = dag.edges();
  std::vector<double> weights(es.size());
  for (size_t e = 0; e < es.size(); ++e) {
    const double mag = rng.uniform(0.5, 1.0);
    weights[e] = rng.uniform() < 0.5 ? -mag : mag;
  }
  std::vector<std::vector<std::pair<int, double>>> weighted_parents(p);
  for (size_t e = 0; e < es.size(); ++e) {
    weighted_parents[es[e].second].emplace_back(es[e].first, weights[e]);
  }
  const auto topo = dag.topological_order();
  Eigen::MatrixXd data(n, p);
  for (int row = 0; row < n; ++row) {
    for (int node : topo) {
      double value = rng.normal();
      for (auto [parent, w] : weighted_parents[node]) value += w * data(row, parent);
      data(row, node) = value;
    }
  }
  return data;
}

Dag random_dag(int p, int num_edges, Rng& rng) {
  if (p < 1) throw DomainError("random_dag: p must be positive");
  const int total = p * (p - 1) / 2;
  if (num_edges < 0 || num_edges > total) {
    throw DomainError("random_dag: edge count out of range");
  }
  std::vector<int> position(p);
  for (int i = 0; i < p; ++i) position[i] = i;
  for (int i = p - 1; i > 0; --i) std::swap(position[i], position[rng.below(i + 1)]);

  std::vector<std::pair<int, int>> pairs;
  pairs.reserve(total);
  for (int i = 0; i < p; ++i) {
    for (int j = i + 1; j < p; ++j) pairs.emplace_back(i, j);
  }
  for (int i = 0; i < num_edges; ++i) {
    const int j = i + static_cast<int>(rng.below(total - i));
    std::swap(pairs[i], pairs[j]);
  }
  std::vector<std::pair<int, int>> edges;
  edges.reserve(num_edges);
  for (int i = 0; i < num_edges; ++i) {
    auto [a, b] = pairs[i];
    if (position[a] < position[b]) {
      edges.emplace_back(a, b);
    } else {
      edges.emplace_back(b, a);
    }
  }
  return Dag(default_names(p), edges);
}

}  // namespace mtgbn
