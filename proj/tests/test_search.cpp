#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "helpers.hpp"
#include "mtgbn/search.hpp"

using namespace mtgbn;
using testutil::all_three_node_dags;
using testutil::node_names;
using testutil::random_spd;

namespace {

std::vector<SpdMatrix> draw_sigmas(int p, int count, Rng& rng) {
  std::vector<SpdMatrix> out;
  SpdMatrix scale = random_spd(p, rng);
  for (int i = 0; i < count; ++i)
    out.push_back(sample_inverse_wishart(scale, p + 4.0, rng));
  return out;
}

// Exhaustive best over all 25 three-node structures.
std::pair<Dag, double> brute_force_best(const TaskData& task,
                                        const std::vector<SpdMatrix>& sigmas,
                                        const HyperParams& hp) {
  std::vector<Dag> all = all_three_node_dags();
  double best = -std::numeric_limits<double>::infinity();
  size_t best_i = 0;
  for (size_t i = 0; i < all.size(); ++i) {
    double s = mc_score(all[i], task, sigmas, hp);
    if (s > best) {
      best = s;
      best_i = i;
    }
  }
  return {all[best_i], best};
}

}  // namespace

TEST_SUITE("search") {

TEST_CASE("three labeled nodes admit exactly 25 structures") {
  CHECK(all_three_node_dags().size() == 25);
}

TEST_CASE("single-draw score is the marginal plus the prior weight") {
  Rng rng(61);
  const int p = 3;
  TaskData task = testutil::random_task(p, 20, rng);
  HyperParams hp = HyperParams::standard(p, 1);
  Dag dag = random_dag(p, 2, rng);
  SpdMatrix sigma = random_spd(p, rng);
  double expect = log_marginal_task(task, dag, sigma, hp) +
                  log_h(sigma, decomposable_cover(dag), hp.nu0);
  CHECK(mc_score(dag, task, {sigma}, hp) == doctest::Approx(expect).epsilon(1e-12));
}

TEST_CASE("duplicated draws double the score") {
  Rng rng(62);
  const int p = 3;
  TaskData task = testutil::random_task(p, 15, rng);
  HyperParams hp = HyperParams::standard(p, 1);
  Dag dag = random_dag(p, 3, rng);
  SpdMatrix sigma = random_spd(p, rng);
  double one = mc_score(dag, task, {sigma}, hp);
  CHECK(mc_score(dag, task, {sigma, sigma}, hp) == doctest::Approx(2.0 * one).epsilon(1e-13));
}

TEST_CASE("multi-draw score matches a naive per-draw loop") {
  Rng rng(63);
  const int p = 3;
  TaskData task = testutil::random_task(p, 25, rng);
  HyperParams hp = HyperParams::standard(p, 1);
  std::vector<SpdMatrix> sigmas = draw_sigmas(p, 5, rng);
  for (const Dag& dag : all_three_node_dags()) {
    double naive = 0.0;
    CliqueSequence cover = decomposable_cover(dag);
    for (const auto& s : sigmas)
      naive += log_marginal_task(task, dag, s, hp) + log_h(s, cover, hp.nu0);
    CHECK(mc_score(dag, task, sigmas, hp) == doctest::Approx(naive).epsilon(1e-11));
  }
}

TEST_CASE("greedy search attains the exhaustive optimum on three nodes") {
  int hits = 0;
  for (int instance = 0; instance < 10; ++instance) {
    Rng rng(700 + instance);
    TaskData task = testutil::random_task(3, 30, rng);
    HyperParams hp = HyperParams::standard(3, 1);
    std::vector<SpdMatrix> sigmas = draw_sigmas(3, 4, rng);
    auto [best_dag, best_score] = brute_force_best(task, sigmas, hp);
    SearchConfig cfg;
    cfg.restarts = 5;
    cfg.seed = 9000 + instance;
    ScoredDag got = hill_climb(task, sigmas, hp, cfg, Dag(node_names(3)));
    if (got.score >= best_score - 1e-9) ++hits;
    CHECK(got.score <= best_score + 1e-9);  // never exceeds the true optimum
  }
  CHECK(hits >= 9);
}

TEST_CASE("independent columns learn an empty structure") {
  int empties = 0;
  for (int seed = 0; seed < 10; ++seed) {
    Rng rng(810 + seed);
    SpdMatrix eye(Eigen::MatrixXd::Identity(3, 3));
    TaskData task = TaskData::from_data(sample_mvn(eye, 500, rng));
    HyperParams hp = HyperParams::standard(3, 1);
    std::vector<SpdMatrix> sigmas;
    for (int i = 0; i < 4; ++i)
      sigmas.push_back(sample_inverse_wishart(eye, 7.0, rng));
    SearchConfig cfg;
    cfg.seed = seed;
    ScoredDag got = hill_climb(task, sigmas, hp, cfg, Dag(node_names(3)));
    if (got.dag.num_edges() == 0) ++empties;
  }
  CHECK(empties >= 9);
}

TEST_CASE("search started at the optimum stays there") {
  Rng rng(64);
  TaskData task = testutil::random_task(3, 30, rng);
  HyperParams hp = HyperParams::standard(3, 1);
  std::vector<SpdMatrix> sigmas = draw_sigmas(3, 4, rng);
  auto [best_dag, best_score] = brute_force_best(task, sigmas, hp);
  SearchConfig cfg;  // no restarts: pure climb from the init
  ScoredDag got = hill_climb(task, sigmas, hp, cfg, best_dag);
  CHECK(got.dag == best_dag);
  CHECK(got.score == doctest::Approx(best_score).epsilon(1e-12));
}

TEST_CASE("climb trace is non-decreasing and ends at the reported score") {
  Rng rng(65);
  TaskData task = testutil::random_task(4, 40, rng);
  HyperParams hp = HyperParams::standard(4, 1);
  std::vector<SpdMatrix> sigmas = draw_sigmas(4, 3, rng);
  SearchConfig cfg;
  cfg.restarts = 2;
  cfg.seed = 3;
  ScoredDag got = hill_climb(task, sigmas, hp, cfg, Dag(node_names(4)));
  REQUIRE(!got.trace.empty());
  for (size_t i = 1; i < got.trace.size(); ++i) CHECK(got.trace[i] >= got.trace[i - 1]);
  CHECK(got.trace.back() == doctest::Approx(got.score).epsilon(1e-12));
  // The reported score is the score of the reported structure.
  CHECK(mc_score(got.dag, task, sigmas, hp) == doctest::Approx(got.score).epsilon(1e-9));
}

TEST_CASE("parent budget is a hard constraint") {
  Rng rng(66);
  const int p = 5;
  TaskData task = testutil::random_task(p, 60, rng);
  HyperParams hp = HyperParams::standard(p, 1);
  std::vector<SpdMatrix> sigmas = draw_sigmas(p, 3, rng);
  SearchConfig cfg;
  cfg.max_parents = 1;
  cfg.restarts = 2;
  cfg.seed = 8;
  ScoredDag got = hill_climb(task, sigmas, hp, cfg, Dag(node_names(p)));
  for (int i = 0; i < p; ++i) CHECK(got.dag.parents(i).size() <= 1);
}

TEST_CASE("candidate skeleton restricts proposed edges") {
  Rng rng(67);
  const int p = 4;
  TaskData task = testutil::random_task(p, 60, rng);
  HyperParams hp = HyperParams::standard(p, 1);
  std::vector<SpdMatrix> sigmas = draw_sigmas(p, 3, rng);
  SearchConfig cfg;
  cfg.candidate_skeleton = std::vector<std::pair<int, int>>{{0, 1}, {2, 3}};
  cfg.restarts = 3;
  cfg.seed = 12;
  ScoredDag got = hill_climb(task, sigmas, hp, cfg, Dag(node_names(p)));
  for (auto [src, dst] : got.dag.edges()) {
    std::pair<int, int> key{std::min(src, dst), std::max(src, dst)};
    bool allowed = key == std::pair<int, int>{0, 1} || key == std::pair<int, int>{2, 3};
    CHECK(allowed);
  }
}

TEST_CASE("single-task learner recovers a strongly coupled pair") {
  Rng rng(68);
  const int n = 300;
  Eigen::MatrixXd data(n, 3);
  for (int i = 0; i < n; ++i) {
    double x = rng.normal();
    data(i, 0) = x;
    data(i, 1) = 0.95 * x + 0.3 * rng.normal();
    data(i, 2) = rng.normal();
  }
  SearchConfig cfg;
  cfg.seed = 1;
  ScoredDag got = learn_sig(TaskData::from_data(data), cfg);
  CHECK((got.dag.has_edge(0, 1) || got.dag.has_edge(1, 0)));
  CHECK_FALSE(got.dag.has_edge(0, 2));
  CHECK_FALSE(got.dag.has_edge(2, 0));
  CHECK(got.dag.names() == node_names(3));
}

TEST_CASE("constant columns stay isolated") {
  Rng rng(69);
  const int n = 80;
  Eigen::MatrixXd data(n, 3);
  for (int i = 0; i < n; ++i) {
    double x = rng.normal();
    data(i, 0) = x;
    data(i, 1) = 0.9 * x + 0.4 * rng.normal();
    data(i, 2) = 0.0;
  }
  SearchConfig cfg;
  ScoredDag got = learn_sig(TaskData::from_data(data), cfg);
  for (auto [src, dst] : got.dag.edges()) {
    CHECK(src != 2);
    CHECK(dst != 2);
  }
}

TEST_CASE("pooled learner with one task equals the single-task learner") {
  Rng rng(70);
  TaskData task = testutil::random_task(3, 50, rng);
  SearchConfig cfg;
  cfg.seed = 2;
  ScoredDag sig = learn_sig(task, cfg);
  ScoredDag avg = learn_avg({task}, cfg);
  CHECK(avg.dag == sig.dag);
  CHECK(avg.score == doctest::Approx(sig.score).epsilon(1e-12));
}

TEST_CASE("pooling two identical tasks equals doubling the rows") {
  Rng rng(71);
  const int n = 40, p = 3;
  SpdMatrix cov = random_spd(p, rng);
  Eigen::MatrixXd rows = sample_mvn(cov, n, rng);
  TaskData task = TaskData::from_data(rows);
  Eigen::MatrixXd doubled(2 * n, p);
  doubled << rows, rows;
  SearchConfig cfg;
  cfg.seed = 3;
  ScoredDag avg = learn_avg({task, task}, cfg);
  ScoredDag pooled = learn_sig(TaskData::from_data(doubled), cfg);
  CHECK(avg.dag == pooled.dag);
  CHECK(avg.score == doctest::Approx(pooled.score).epsilon(1e-10));
}

TEST_CASE("correlation screen finds exactly the coupled pairs") {
  Rng rng(72);
  const int n = 500;
  Eigen::MatrixXd data(n, 4);
  for (int i = 0; i < n; ++i) {
    double x = rng.normal(), y = rng.normal();
    data(i, 0) = x;
    data(i, 1) = 0.9 * x + 0.2 * rng.normal();
    data(i, 2) = y;
    data(i, 3) = 0.0;  // constant column pairs with nothing
  }
  auto pairs = correlation_skeleton(TaskData::from_data(data), 0.5);
  REQUIRE(pairs.size() == 1);
  CHECK(pairs[0] == std::pair<int, int>{0, 1});
}

TEST_CASE("search configuration is validated") {
  SearchConfig cfg;
  cfg.max_parents = -1;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = SearchConfig{};
  cfg.max_iters = 0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = SearchConfig{};
  cfg.restarts = -1;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = SearchConfig{};
  cfg.max_parents = 0;  // legal: restricts the search to the empty graph
  CHECK_NOTHROW(cfg.validate());
}

TEST_CASE("dimension mismatches are rejected") {
  Rng rng(73);
  TaskData task = testutil::random_task(3, 10, rng);
  HyperParams hp = HyperParams::standard(3, 1);
  std::vector<SpdMatrix> sigmas = {random_spd(2, rng)};
  CHECK_THROWS_AS(mc_score(Dag(node_names(3)), task, sigmas, hp), DimensionMismatch);
  CHECK_THROWS_AS(mc_score(Dag(node_names(4)), task, {random_spd(3, rng)}, hp),
                  DimensionMismatch);
}

}  // TEST_SUITE
