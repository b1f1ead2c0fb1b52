#include <doctest.h>

#include <cmath>
#include <numeric>
#include <vector>

#include "helpers.hpp"
#include "mtgbn/likelihood.hpp"

using namespace mtgbn;
using testutil::node_names;
using testutil::random_spd;
using testutil::simpson;

namespace {

// Straight-line re-implementation of the multivariate gamma function in log
// space, written independently of the library's version.
double naive_lmvgamma(int d, double a) {
  double out = d * (d - 1) / 4.0 * std::log(M_PI);
  for (int j = 1; j <= d; ++j) out += std::lgamma(a - (j - 1) / 2.0);
  return out;
}

// Clique/separator normalizing sum computed with plain Eigen determinants and
// no shared code with the library implementation.
double naive_clique_sum(const Eigen::MatrixXd& sigma, const CliqueSequence& cs,
                        double nu0) {
  auto term = [&](const std::vector<int>& set) {
    if (set.empty()) return 0.0;
    const int c = static_cast<int>(set.size());
    Eigen::MatrixXd sub(c, c);
    for (int a = 0; a < c; ++a)
      for (int b = 0; b < c; ++b) sub(a, b) = sigma(set[a], set[b]);
    const double a = (nu0 + c - 1) / 2.0;
    return a * std::log((sub / 2.0).determinant()) - naive_lmvgamma(c, a);
  };
  double out = 0.0;
  for (const auto& c : cs.cliques) out += term(c);
  for (const auto& s : cs.separators) out -= term(s);
  return out;
}

TaskData correlated_pair_task(int n, double rho, Rng& rng) {
  Eigen::MatrixXd cov(2, 2);
  cov << 1.0, rho, rho, 1.0;
  return TaskData::from_data(sample_mvn(SpdMatrix(cov), n, rng));
}

}  // namespace

TEST_SUITE("likelihood") {

TEST_CASE("scalar prior weight follows the closed form") {
  const double nu0 = 3.5, s = 1.7;
  Eigen::MatrixXd m(1, 1);
  m << s;
  CliqueSequence cs;
  cs.cliques = {{0}};
  cs.histories = {{0}};
  double expect = (nu0 / 2.0) * (std::log(s) - std::log(2.0)) - std::lgamma(nu0 / 2.0);
  CHECK(log_h(SpdMatrix(m), cs, nu0) == doctest::Approx(expect).epsilon(1e-13));
}

TEST_CASE("singleton cliques at the identity sum exactly") {
  // Three isolated nodes, nu0 = 4: each contributes -2 log 2, total -6 log 2.
  CliqueSequence cs = decomposable_cover(Dag(node_names(3)));
  SpdMatrix eye(Eigen::MatrixXd::Identity(3, 3));
  CHECK(log_h(eye, cs, 4.0) == doctest::Approx(-6.0 * std::log(2.0)).epsilon(1e-13));
}

TEST_CASE("clique sum matches a naive determinant-based evaluation") {
  Rng rng(31);
  UGraph path(node_names(3), {{0, 1}, {1, 2}});
  CliqueSequence cs = clique_sequence(path);
  for (int trial = 0; trial < 10; ++trial) {
    SpdMatrix sigma = random_spd(3, rng);
    double nu0 = 3.0 + 2.0 * rng.uniform();
    CHECK(log_h(sigma, cs, nu0) ==
          doctest::Approx(naive_clique_sum(sigma.mat(), cs, nu0)).epsilon(1e-10));
  }
}

TEST_CASE("clique sum is invariant under node relabeling") {
  Rng rng(32);
  const int p = 5;
  for (int trial = 0; trial < 10; ++trial) {
    UGraph g = triangulate(UGraph(node_names(p), {{0, 1}, {1, 2}, {2, 3}, {3, 4}, {0, 4}}));
    SpdMatrix sigma = random_spd(p, rng);
    double base = log_h(sigma, clique_sequence(g), 6.0);

    // Apply a random permutation to both the graph and the matrix.
    std::vector<int> perm(p);
    std::iota(perm.begin(), perm.end(), 0);
    for (int i = p - 1; i > 0; --i) std::swap(perm[i], perm[rng.below(i + 1)]);
    UGraph relabeled(node_names(p));
    for (auto [a, b] : g.edges()) relabeled.add_edge(perm[a], perm[b]);
    Eigen::MatrixXd sp(p, p);
    for (int i = 0; i < p; ++i)
      for (int j = 0; j < p; ++j) sp(perm[i], perm[j]) = sigma(i, j);
    CHECK(log_h(SpdMatrix(sp), clique_sequence(relabeled), 6.0) ==
          doctest::Approx(base).epsilon(1e-10));
  }
}

TEST_CASE("clique sum rejects an empty sequence") {
  CliqueSequence empty;
  SpdMatrix eye(Eigen::MatrixXd::Identity(2, 2));
  CHECK_THROWS_AS(log_h(eye, empty, 4.0), DomainError);
}

TEST_CASE("scalar data marginal equals the conjugate closed form") {
  Rng rng(33);
  const int n = 12;
  Eigen::MatrixXd data(n, 1);
  for (int i = 0; i < n; ++i) data(i, 0) = rng.normal() * 1.4;
  TaskData task = TaskData::from_data(data);
  const double S = task.s(0, 0), sh = 0.8;
  HyperParams hp{3.0, 1, 1};
  Eigen::MatrixXd m(1, 1);
  m << sh;
  double expect = (hp.nu0 / 2.0) * std::log(sh) + std::lgamma((hp.nu0 + n) / 2.0) -
                  (n / 2.0) * std::log(M_PI) -
                  ((hp.nu0 + n) / 2.0) * std::log(sh + n * S) - std::lgamma(hp.nu0 / 2.0);
  CHECK(log_marginal_task(task, Dag({"A"}), SpdMatrix(m), hp) ==
        doctest::Approx(expect).epsilon(1e-12));
}

TEST_CASE("scalar data marginal equals direct numerical integration") {
  // The family term is the integral of the Gaussian likelihood against the
  // conjugate inverse-gamma-type prior on the variance; verify by Simpson
  // quadrature in t = log(variance).
  Rng rng(34);
  const int n = 10;
  Eigen::MatrixXd data(n, 1);
  for (int i = 0; i < n; ++i) data(i, 0) = rng.normal() * 0.9 + 0.2;
  TaskData task = TaskData::from_data(data);
  const double nu0 = 3.5, sh = 1.3;
  HyperParams hp{nu0, 1, 1};

  double ssq = 0.0;
  for (int i = 0; i < n; ++i) ssq += data(i, 0) * data(i, 0);
  auto log_integrand = [&](double t) {
    const double sigma = std::exp(t);
    double log_lik = -n / 2.0 * std::log(2.0 * M_PI * sigma) - ssq / (2.0 * sigma);
    double log_prior = (nu0 / 2.0) * std::log(sh / 2.0) - std::lgamma(nu0 / 2.0) -
                       (nu0 + 2.0) / 2.0 * std::log(sigma) - sh / (2.0 * sigma);
    return log_lik + log_prior + t;  // + t: change of variable d(sigma) = sigma dt
  };
  // Shift by the max for a stable linear-scale integral.
  double peak = log_integrand(0.0);
  for (double t = -12.0; t <= 12.0; t += 0.01) peak = std::max(peak, log_integrand(t));
  const double shift = peak;
  double integral =
      simpson([&](double t) { return std::exp(log_integrand(t) - shift); }, -14.0, 14.0, 8000);
  double expect = shift + std::log(integral);

  Eigen::MatrixXd m(1, 1);
  m << sh;
  CHECK(log_marginal_task(task, Dag({"A"}), SpdMatrix(m), hp) ==
        doctest::Approx(expect).epsilon(1e-7));
}

TEST_CASE("complete-network marginal telescopes to one full-set term") {
  Rng rng(35);
  const int p = 3, n = 20;
  TaskData task = testutil::random_task(p, n, rng);
  SpdMatrix sigma_h = random_spd(p, rng);
  HyperParams hp = HyperParams::standard(p, 1);
  Dag complete(node_names(p), {{0, 1}, {0, 2}, {1, 2}});
  SpdMatrix posterior(sigma_h.mat() + static_cast<double>(n) * task.s);
  double expect = marginal_family_term(sigma_h, posterior, n, {0, 1, 2}, hp.nu0);
  CHECK(log_marginal_task(task, complete, sigma_h, hp) ==
        doctest::Approx(expect).epsilon(1e-11));
}

TEST_CASE("marginal is equal across orientation-equivalent structures") {
  Rng rng(36);
  TaskData task = correlated_pair_task(30, 0.6, rng);
  SpdMatrix sigma_h = random_spd(2, rng);
  HyperParams hp = HyperParams::standard(2, 1);
  Dag fwd(node_names(2), {{0, 1}});
  Dag bwd(node_names(2), {{1, 0}});
  CHECK(log_marginal_task(task, fwd, sigma_h, hp) ==
        doctest::Approx(log_marginal_task(task, bwd, sigma_h, hp)).epsilon(1e-12));
}

TEST_CASE("marginal prefers the true edge on correlated data") {
  int wins = 0;
  SpdMatrix eye(Eigen::MatrixXd::Identity(2, 2));
  HyperParams hp = HyperParams::standard(2, 1);
  Dag with(node_names(2), {{0, 1}});
  Dag without(node_names(2));
  for (int seed = 0; seed < 100; ++seed) {
    Rng rng(1000 + seed);
    TaskData task = correlated_pair_task(50, 0.8, rng);
    if (log_marginal_task(task, with, eye, hp) > log_marginal_task(task, without, eye, hp))
      ++wins;
  }
  CHECK(wins >= 95);
}

TEST_CASE("posterior kernel matches a naive re-evaluation") {
  Rng rng(37);
  const int p = 3;
  std::vector<TaskData> tasks = {testutil::random_task(p, 15, rng),
                                 testutil::random_task(p, 25, rng)};
  std::vector<CliqueSequence> covers = {
      decomposable_cover(random_dag(p, 2, rng)),
      decomposable_cover(random_dag(p, 3, rng))};
  HyperParams hp = HyperParams::standard(p, 2);
  SpdMatrix sigma_h = random_spd(p, rng);

  double naive = 0.0;
  for (size_t i = 0; i < tasks.size(); ++i) {
    Eigen::MatrixXd post = sigma_h.mat() + static_cast<double>(tasks[i].n) * tasks[i].s;
    naive += hp.nu0 / 2.0 * std::log(sigma_h.mat().determinant());
    naive += naive_clique_sum(post, covers[i], hp.nu0);
    naive -= (hp.nu0 + tasks[i].n) / 2.0 * std::log(post.determinant());
  }
  CHECK(log_post_kernel_sigma_h(sigma_h, tasks, covers, hp) ==
        doctest::Approx(naive).epsilon(1e-10));
}

TEST_CASE("kernel over duplicated tasks doubles") {
  Rng rng(38);
  const int p = 2;
  TaskData task = testutil::random_task(p, 20, rng);
  CliqueSequence cover = decomposable_cover(Dag(node_names(p), {{0, 1}}));
  SpdMatrix sigma_h = random_spd(p, rng);
  double one = log_post_kernel_sigma_h(sigma_h, {task}, {cover}, HyperParams::standard(p, 1));
  double two = log_post_kernel_sigma_h(sigma_h, {task, task}, {cover, cover},
                                       HyperParams::standard(p, 2));
  CHECK(two == doctest::Approx(2.0 * one).epsilon(1e-13));
}

TEST_CASE("unconstrained density differs from the kernel by the volume term") {
  Rng rng(39);
  const int p = 3;
  std::vector<TaskData> tasks = {testutil::random_task(p, 12, rng),
                                 testutil::random_task(p, 30, rng)};
  std::vector<CliqueSequence> covers = {
      decomposable_cover(random_dag(p, 3, rng)),
      decomposable_cover(random_dag(p, 1, rng))};
  HyperParams hp = HyperParams::standard(p, 2);
  for (int trial = 0; trial < 10; ++trial) {
    Eigen::MatrixXd vm = Eigen::MatrixXd::Zero(p, p);
    for (int i = 0; i < p; ++i)
      for (int j = 0; j <= i; ++j) vm(i, j) = 0.6 * rng.normal();
    CholState v(vm);
    double volume = 0.0;
    for (int i = 1; i <= p; ++i) volume += (p - i + 2) * vm(i - 1, i - 1);
    double direct = log_post_kernel_sigma_h(inverse_transform(v), tasks, covers, hp);
    CHECK(log_density_v(v, tasks, covers, hp) ==
          doctest::Approx(direct + volume).epsilon(1e-8));
  }
}

TEST_CASE("with no tasks only the volume term remains") {
  const int p = 4;
  HyperParams hp{static_cast<double>(p) + 2.0, p, 0};
  Eigen::MatrixXd vm = Eigen::MatrixXd::Zero(p, p);
  vm(0, 0) = 0.3;
  vm(2, 1) = -1.1;
  vm(3, 3) = 0.7;
  double expect = (p - 1 + 2) * 0.3 + (p - 4 + 2) * 0.7;
  CHECK(log_density_v(CholState(vm), {}, {}, hp) == doctest::Approx(expect).epsilon(1e-13));
  Eigen::MatrixXd g = grad_log_density_v(CholState(vm), {}, {}, hp);
  for (int i = 0; i < p; ++i) {
    CHECK(g(i, i) == doctest::Approx(p - (i + 1) + 2.0));
    for (int j = 0; j < i; ++j) CHECK(g(i, j) == doctest::Approx(0.0));
  }
}

TEST_CASE("scalar unconstrained density follows the hand-derived form") {
  Rng rng(40);
  const int n = 50;
  Eigen::MatrixXd data(n, 1);
  for (int i = 0; i < n; ++i) data(i, 0) = 1.2 * rng.normal();
  TaskData task = TaskData::from_data(data);
  const double S = task.s(0, 0);
  HyperParams hp = HyperParams::standard(1, 1);
  const double nu0 = hp.nu0;
  std::vector<CliqueSequence> covers = {decomposable_cover(Dag({"A"}))};
  for (double vv : {-1.0, -0.2, 0.5, 1.3}) {
    Eigen::MatrixXd vm(1, 1);
    vm << vv;
    double sigma = std::exp(2.0 * vv);
    double expect = (nu0 + 2.0) * vv - (n / 2.0) * std::log(sigma + n * S) -
                    (nu0 / 2.0) * std::log(2.0) - std::lgamma(nu0 / 2.0);
    CHECK(log_density_v(CholState(vm), {task}, covers, hp) ==
          doctest::Approx(expect).epsilon(1e-11));
    // And its derivative.
    double grad_expect = (nu0 + 2.0) - n * sigma / (sigma + n * S);
    CHECK(grad_log_density_v(CholState(vm), {task}, covers, hp)(0, 0) ==
          doctest::Approx(grad_expect).epsilon(1e-10));
  }
}

TEST_CASE("gradient agrees with central finite differences") {
  Rng rng(41);
  const int p = 4, m = 3;
  std::vector<TaskData> tasks;
  std::vector<CliqueSequence> covers;
  for (int i = 0; i < m; ++i) {
    tasks.push_back(testutil::random_task(p, 10 + 10 * i, rng));
    covers.push_back(decomposable_cover(random_dag(p, 3, rng)));
  }
  HyperParams hp = HyperParams::standard(p, m);
  Eigen::MatrixXd vm = Eigen::MatrixXd::Zero(p, p);
  for (int i = 0; i < p; ++i)
    for (int j = 0; j <= i; ++j) vm(i, j) = 0.4 * rng.normal();
  CholState v(vm);
  Eigen::MatrixXd g = grad_log_density_v(v, tasks, covers, hp);
  const double h = 1e-5;
  for (int i = 0; i < p; ++i)
    for (int j = 0; j <= i; ++j) {
      Eigen::MatrixXd up = vm, dn = vm;
      up(i, j) += h;
      dn(i, j) -= h;
      double fd = (log_density_v(CholState(up), tasks, covers, hp) -
                   log_density_v(CholState(dn), tasks, covers, hp)) /
                  (2.0 * h);
      CHECK(std::abs(g(i, j) - fd) <= 1e-5 * std::max(1.0, std::abs(fd)));
    }
}

TEST_CASE("scale direction of the scalar posterior has an interior mode") {
  Rng rng(42);
  const int n = 50;
  Eigen::MatrixXd data(n, 1);
  for (int i = 0; i < n; ++i) data(i, 0) = rng.normal();
  TaskData task = TaskData::from_data(data);
  HyperParams hp = HyperParams::standard(1, 1);
  std::vector<CliqueSequence> covers = {decomposable_cover(Dag({"A"}))};
  std::vector<double> values;
  for (double vv = -6.0; vv <= 6.0; vv += 0.25) {
    Eigen::MatrixXd vm(1, 1);
    vm << vv;
    values.push_back(log_density_v(CholState(vm), {task}, covers, hp));
  }
  size_t argmax = std::max_element(values.begin(), values.end()) - values.begin();
  CHECK(argmax > 0);
  CHECK(argmax + 1 < values.size());
  CHECK(values[argmax] > values.front() + 5.0);
  CHECK(values[argmax] > values.back() + 5.0);
}

TEST_CASE("hyperparameters and dimensions are validated") {
  CHECK_THROWS_AS((HyperParams{2.0, 3, 1}.validate()), DomainError);  // nu0 <= p-1
  CHECK_THROWS_AS((HyperParams{3.0, 0, 1}.validate()), DomainError);
  Rng rng(43);
  TaskData task = testutil::random_task(2, 5, rng);
  SpdMatrix bad = random_spd(3, rng);
  CHECK_THROWS_AS(log_marginal_task(task, Dag(node_names(2), {}), bad,
                                    HyperParams::standard(2, 1)),
                  DimensionMismatch);
}

TEST_CASE("moment-constructed tasks validate their inputs") {
  CHECK_THROWS_AS(TaskData::from_moments(Eigen::MatrixXd::Zero(2, 3), 5), DimensionMismatch);
  CHECK_THROWS_AS(TaskData::from_moments(Eigen::MatrixXd::Identity(2, 2), 0), DomainError);
  TaskData t = TaskData::from_moments(Eigen::MatrixXd::Identity(2, 2), 7);
  CHECK(t.n == 7);
  CHECK(t.dim() == 2);
}

}  // TEST_SUITE
