#include "mtgbn/hmc.hpp"

#include <cmath>
#include <deque>

#include "mtgbn/errors.hpp"
#include "mtgbn/rng.hpp"

namespace mtgbn {

void HmcConfig::validate() const {
  if (n_samples < 1) throw ConfigError("hmc: n_samples must be positive");
  if (n_leapfrog < 1) throw ConfigError("hmc: n_leapfrog must be positive");
  if (!(step_size > 0.0)) throw ConfigError("hmc: step_size must be positive");
  if (burn_in < 0) throw ConfigError("hmc: burn_in must be non-negative");
  if (thin < 1) throw ConfigError("hmc: thin must be positive");
  if (!(target_accept > 0.0 && target_accept < 1.0)) {
    throw ConfigError("hmc: target_accept must lie in (0,1)");
  }
  if (mass_diag.size() > 0 && (mass_diag.array() <= 0.0).any()) {
    throw ConfigError("hmc: mass diagonal must be positive");
  }
}

namespace {

Eigen::VectorXd mass_vector(const HmcConfig& cfg, int packed) {
  if (cfg.mass_diag.size() == 0) return Eigen::VectorXd::Ones(packed);
  if (cfg.mass_diag.size() != packed) {
    throw DimensionMismatch("hmc: mass diagonal has wrong length");
  }
  return cfg.mass_diag;
}

void require_finite(const Eigen::VectorXd& x, const char* what) {
  if (!x.allFinite()) throw NonFinite(std::string("leapfrog: ") + what + " not finite");
}

}  // namespace

std::pair<CholState, Eigen::VectorXd> leapfrog(const CholState& v,
                                               const Eigen::VectorXd& momentum,
                                               const HmcConfig& cfg, const Target& target) {
  const int p = v.dim();
  const Eigen::VectorXd mass = mass_vector(cfg, v.packed_size());
  const double eps = cfg.step_size;

  Eigen::VectorXd q = v.packed();
  Eigen::VectorXd r = momentum;
  if (r.size() != q.size()) throw DimensionMismatch("leapfrog: momentum has wrong length");

  auto grad_packed = [&](const Eigen::VectorXd& pos) {
    CholState state = CholState::from_packed(p, pos);
    Eigen::MatrixXd g = target.grad(state);
    return CholState(std::move(g)).packed();
  };

  r += eps / 2.0 * grad_packed(q);
  require_finite(r, "half-kick momentum");
  q += eps * (r.array() / mass.array()).matrix();
  require_finite(q, "drift position");
  r += eps / 2.0 * grad_packed(q);
  require_finite(r, "final momentum");
  return {CholState::from_packed(p, q), std::move(r)};
}

Chain run_chain(const Target& target, int p, const HmcConfig& cfg, const CholState& init) {
  cfg.validate();
  if (init.dim() != p) throw DimensionMismatch("run_chain: init dimension mismatch");
  const int packed = init.packed_size();
  const Eigen::VectorXd mass = mass_vector(cfg, packed);
  Rng rng(cfg.seed);

  HmcConfig live = cfg;  // live.step_size mutates under adaptation
  CholState v = init;
  double log_f = target.log_density(v);
  if (!std::isfinite(log_f)) {
    throw NonFinite("run_chain: initial state has non-finite log density");
  }

  // Dual-averaging state for step-size adaptation toward target_accept.
  const double adapt_mu = std::log(10.0 * cfg.step_size);
  const double adapt_gamma = 0.05, adapt_t0 = 10.0, adapt_kappa = 0.75;
  double adapt_hbar = 0.0, adapt_logeps_bar = std::log(cfg.step_size);

  const int total = cfg.burn_in + cfg.n_samples * cfg.thin;
  Chain chain;
  chain.samples.reserve(cfg.n_samples);
  chain.log_density_trace.reserve(cfg.n_samples);
  std::deque<char> window;  // recent accept flags for the divergence check
  long kept_accepts = 0, kept_iters = 0;

  for (int iter = 1; iter <= total; ++iter) {
    // Fresh momentum ~ N(0, M).
    Eigen::VectorXd r0(packed);
    for (int k = 0; k < packed; ++k) r0[k] = rng.normal() * std::sqrt(mass[k]);

    double accept_prob = 0.0;
    bool accepted = false;
    try {
      CholState v_new = v;
      Eigen::VectorXd r = r0;
      for (int step = 0; step < cfg.n_leapfrog; ++step) {
        std::tie(v_new, r) = leapfrog(v_new, r, live, target);
      }
      const double log_f_new = target.log_density(v_new);
      if (std::isfinite(log_f_new)) {
        const double kin0 = 0.5 * (r0.array().square() / mass.array()).sum();
        const double kin1 = 0.5 * (r.array().square() / mass.array()).sum();
        const double log_alpha =
            std::min(0.0, (log_f_new - kin1) - (log_f - kin0));
        accept_prob = std::exp(log_alpha);
        if (std::log(1.0 - rng.uniform()) <= log_alpha) {
          v = v_new;
          log_f = log_f_new;
          // Momentum negation keeps the proposal symmetric; the next iteration
          // refreshes momentum anyway.
          accepted = true;
        }
      }
    } catch (const NonFinite&) {  // unusable trajectory counts as a rejection
      accepted = false;
    } catch (const Overflow&) {
      accepted = false;
    } catch (const NotPositiveDefinite&) {
      accepted = false;
    }

    window.push_back(accepted ? 1 : 0);
    if (window.size() > 100) window.pop_front();
    if (window.size() == 100) {
      int acc = 0;
      for (char c : window) acc += c;
      if (acc / 100.0 < 0.01) {
        throw ChainDiverged("hmc: acceptance below 0.01 over a 100-iteration window at iteration " +
                            std::to_string(iter));
      }
    }

    if (iter <= cfg.burn_in && cfg.adapt_step_size) {
      // Dual averaging (Nesterov-style) on log step size.
      const double t = static_cast<double>(iter);
      const double frac = 1.0 / (t + adapt_t0);
      adapt_hbar = (1.0 - frac) * adapt_hbar + frac * (cfg.target_accept - accept_prob);
      const double logeps = adapt_mu - std::sqrt(t) / adapt_gamma * adapt_hbar;
      const double eta = std::pow(t, -adapt_kappa);
      adapt_logeps_bar = eta * logeps + (1.0 - eta) * adapt_logeps_bar;
      live.step_size = std::exp(logeps);
      if (iter == cfg.burn_in) live.step_size = std::exp(adapt_logeps_bar);
    }

    if (iter > cfg.burn_in) {
      ++kept_iters;
      if (accepted) ++kept_accepts;
      if ((iter - cfg.burn_in) % cfg.thin == 0) {
        chain.samples.push_back(inverse_transform(v));
        chain.log_density_trace.push_back(log_f);
      }
    }
    if (cfg.record_trace) {
      TraceRow row;
      row.iter = iter;
      row.log_density = log_f;
      row.accepted = accepted;
      row.v_diag.resize(v.dim());
      for (int d = 0; d < v.dim(); ++d) row.v_diag[d] = v(d, d);
      chain.trace.push_back(std::move(row));
    }
  }
  chain.accept_rate = kept_iters > 0 ? static_cast<double>(kept_accepts) / kept_iters : 0.0;
  chain.final_step_size = live.step_size;
  return chain;
}

Chain sample_sigma_h(const std::vector<TaskData>& tasks,
                     const std::vector<CliqueSequence>& covers, const HyperParams& hp,
                     const HmcConfig& cfg, const SpdMatrix& init) {
  Target target;
  target.log_density = [&tasks, &covers, hp](const CholState& v) {
    try {
      return log_density_v(v, tasks, covers, hp);
    } catch (const Overflow&) {
      throw NonFinite("sample_sigma_h: log density overflow");
    } catch (const NotPositiveDefinite&) {
      throw NonFinite("sample_sigma_h: log density lost positive definiteness");
    }
  };
  target.grad = [&tasks, &covers, hp](const CholState& v) {
    try {
      return grad_log_density_v(v, tasks, covers, hp);
    } catch (const Overflow&) {
      throw NonFinite("sample_sigma_h: gradient overflow");
    } catch (const NotPositiveDefinite&) {
      throw NonFinite("sample_sigma_h: gradient lost positive definiteness");
    }
  };
  return run_chain(target, hp.p, cfg, transform(init));
}

}  // namespace mtgbn
