#include "mtgbn/mcem.hpp"

#include <chrono>
#include <cmath>

#include "mtgbn/parallel.hpp"
#include "mtgbn/rng.hpp"

namespace mtgbn {

namespace {

// Per-draw total score of one structure assignment; mean over draws is q_tilde.
std::vector<double> per_draw_scores(const std::vector<Dag>& dags,
                                    const std::vector<CliqueSequence>& covers,
                                    const std::vector<TaskData>& tasks,
                                    const std::vector<SpdMatrix>& sigma_samples,
                                    const HyperParams& hp) {
  std::vector<double> out(sigma_samples.size(), 0.0);
  for (size_t l = 0; l < sigma_samples.size(); ++l) {
    for (size_t i = 0; i < tasks.size(); ++i) {
      out[l] += log_h(sigma_samples[l], covers[i], hp.nu0) +
                log_marginal_task(tasks[i], dags[i], sigma_samples[l], hp);
    }
  }
  return out;
}

std::vector<CliqueSequence> covers_of(const std::vector<Dag>& dags) {
  std::vector<CliqueSequence> covers;
  covers.reserve(dags.size());
  for (const auto& d : dags) covers.push_back(decomposable_cover(d));
  return covers;
}

double mean_of(const std::vector<double>& x) {
  double s = 0.0;
  for (double v : x) s += v;
  return s / static_cast<double>(x.size());
}

}  // namespace

double q_tilde(const std::vector<Dag>& dags, const std::vector<TaskData>& tasks,
               const std::vector<SpdMatrix>& sigma_samples, const HyperParams& hp) {
  if (dags.size() != tasks.size()) {
    throw DimensionMismatch("q_tilde: dags and tasks must have equal length");
  }
  if (sigma_samples.empty()) throw DomainError("q_tilde: need at least one draw");
  hp.validate();
  return mean_of(per_draw_scores(dags, covers_of(dags), tasks, sigma_samples, hp));
}

std::vector<Dag> sig_inits(const std::vector<TaskData>& tasks, const SearchConfig& cfg,
                           const std::vector<std::string>& names) {
  std::vector<Dag> out;
  out.reserve(tasks.size());
  for (size_t i = 0; i < tasks.size(); ++i) {
    SearchConfig task_cfg = cfg;
    task_cfg.seed = mix64(cfg.seed ^ mix64(0x51900000ULL + i));
    out.push_back(learn_sig(tasks[i], task_cfg, names).dag);
  }
  return out;
}

McemResult run_mcem(const std::vector<TaskData>& tasks, const std::vector<Dag>& init_dags,
                    const RunConfig& cfg) {
  if (tasks.empty()) throw DomainError("run_mcem: need at least one task");
  if (tasks.size() != init_dags.size()) {
    throw DimensionMismatch("run_mcem: init structure count must match task count");
  }
  const int m = static_cast<int>(tasks.size());
  const int p = tasks[0].dim();
  for (const auto& t : tasks) {
    if (t.dim() != p) throw DimensionMismatch("run_mcem: task dimensions disagree");
  }
  for (const auto& d : init_dags) {
    if (d.num_nodes() != p) throw DimensionMismatch("run_mcem: init dimension mismatch");
  }

  HyperParams hp = cfg.hp;
  if (hp.p == 0) hp.p = p;
  if (hp.m == 0) hp.m = m;
  if (hp.nu0 == 0.0) hp.nu0 = static_cast<double>(p) + 2.0;
  hp.validate();
  if (hp.p != p || hp.m != m) {
    throw DimensionMismatch("run_mcem: hyperparameters disagree with the data");
  }
  const double eps =
      std::isnan(cfg.epsilon) ? 1e-2 * static_cast<double>(m) * p : cfg.epsilon;
  if (eps < 0.0) throw ConfigError("run_mcem: epsilon must be non-negative");
  if (cfg.max_em_iters < 1) throw ConfigError("run_mcem: max_em_iters must be positive");
  cfg.hmc.validate();
  cfg.search.validate();

  // First-iteration covariance start: average task covariance plus a ridge so the
  // matrix is positive definite even when every task has n < p.
  Eigen::MatrixXd mean_s = Eigen::MatrixXd::Zero(p, p);
  for (const auto& t : tasks) mean_s += t.s;
  mean_s /= static_cast<double>(m);
  const double ridge = std::max(1e-6, 1e-3 * mean_s.trace() / p);
  SpdMatrix sigma_current(mean_s + ridge * Eigen::MatrixXd::Identity(p, p));

  McemResult result;
  std::vector<Dag> dags = init_dags;
  auto covers = covers_of(dags);
  const int n0 = cfg.hmc.n_samples;
  int n_draws = n0;
  bool fired_last = false;

  for (int t = 1; t <= cfg.max_em_iters; ++t) {
    const auto t_start = std::chrono::steady_clock::now();

    HmcConfig hmc_cfg = cfg.hmc;
    hmc_cfg.n_samples = n_draws;
    hmc_cfg.seed = mix64(cfg.seed ^ mix64(0xE5000000ULL + t));
    Chain chain;
    try {
      chain = sample_sigma_h(tasks, covers, hp, hmc_cfg, sigma_current);
    } catch (const ChainDiverged& e) {
      throw ChainDiverged(std::string(e.what()) + " (EM iteration " + std::to_string(t) + ")",
                          t);
    }
    const std::vector<SpdMatrix>& samples = chain.samples;

    const std::vector<double> prev_draws = per_draw_scores(dags, covers, tasks, samples, hp);
    const double q_prev = mean_of(prev_draws);

    // Maximization: independent per-task climbs warm-started at the current
    // structures; derived seeds keep the result identical at any worker count.
    std::vector<ScoredDag> updated;
    updated.reserve(m);
    for (int i = 0; i < m; ++i) updated.push_back(ScoredDag{dags[i], 0.0, {}});
    parallel_for(m, cfg.jobs, [&](int i) {
      SearchConfig scfg = cfg.search;
      scfg.seed = mix64(cfg.seed ^ mix64(0x3E000000ULL + t * 4096ULL + i));
      updated[i] = hill_climb(tasks[i], samples, hp, scfg, dags[i]);
    });
    for (int i = 0; i < m; ++i) dags[i] = updated[i].dag;
    covers = covers_of(dags);

    const std::vector<double> new_draws = per_draw_scores(dags, covers, tasks, samples, hp);
    const double q_new = mean_of(new_draws);
    const int n = static_cast<int>(samples.size());
    double var = 0.0;
    const double delta = q_new - q_prev;
    for (int l = 0; l < n; ++l) {
      const double d = (new_draws[l] - prev_draws[l]) - delta;
      var += d * d;
    }
    const double se = n > 1 ? std::sqrt(var / (n - 1) / n) : 0.0;

    result.q_trace.push_back(q_new);
    result.q_prev_trace.push_back(q_prev);
    result.em_iters_used = t;
    result.dags = updated;
    if (cfg.record_chains) result.chains.push_back(chain);
    sigma_current = samples.back();

    const bool fire = std::abs(delta) <= eps + se;
    EmIterRecord rec;
    rec.iter = t;
    rec.q_new = q_new;
    rec.q_prev = q_prev;
    rec.delta_se = se;
    rec.accept_rate = chain.accept_rate;
    rec.step_size = chain.final_step_size;
    rec.n_draws = n;
    rec.fired = fire;
    for (const auto& sd : updated) rec.task_scores.push_back(sd.score);
    rec.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
    result.records.push_back(std::move(rec));

    if (fire && (std::isinf(eps) || fired_last)) break;
    if (fire) n_draws = std::min(2 * n_draws, 8 * n0);
    fired_last = fire;
  }
  return result;
}

}  // namespace mtgbn
