#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <vector>

#include "mtgbn/likelihood.hpp"
#include "mtgbn/stats.hpp"

namespace mtgbn {

// Hamiltonian Monte Carlo settings for the shared-covariance sampler.
struct HmcConfig {
  int n_samples = 200;    // retained draws
  int n_leapfrog = 20;    // leapfrog steps per proposal
  double step_size = 0.01;
  Eigen::VectorXd mass_diag;  // packed-length diagonal mass; empty means identity
  int burn_in = 500;
  int thin = 2;                  // keep every thin-th post-burn-in draw
  std::uint64_t seed = 0;
  bool adapt_step_size = true;   // dual averaging during burn-in only
  double target_accept = 0.7;
  bool record_trace = false;     // per-iteration diagnostics in Chain::trace

  void validate() const;
};

// Log-density and gradient callbacks over the unconstrained triangular state.
// Either may throw NonFinite to signal an unusable point.
struct Target {
  std::function<double(const CholState&)> log_density;
  std::function<Eigen::MatrixXd(const CholState&)> grad;
};

// Per-iteration diagnostic row (recorded only when HmcConfig::record_trace).
struct TraceRow {
  int iter = 0;
  double log_density = 0.0;
  bool accepted = false;
  std::vector<double> v_diag;
};

// Output of one chain: retained covariance draws, matching log-density values,
// post-burn-in acceptance rate, and the (possibly adapted) final step size.
struct Chain {
  std::vector<SpdMatrix> samples;
  std::vector<double> log_density_trace;  // aligned with samples
  double accept_rate = 0.0;
  double final_step_size = 0.0;
  std::vector<TraceRow> trace;
};

// One leapfrog step: half momentum kick, full drift with the inverse mass,
// half momentum kick. Returns the updated (state, momentum). Throws NonFinite
// if any intermediate quantity leaves the finite range.
std::pair<CholState, Eigen::VectorXd> leapfrog(const CholState& v,
                                               const Eigen::VectorXd& momentum,
                                               const HmcConfig& cfg, const Target& target);

// Samples the shared covariance from its structure-conditional posterior by HMC in
// the unconstrained parameterization, starting at `init`. Retains n_samples draws
// after burn-in and thinning. Throws ChainDiverged if acceptance over a
// 100-iteration window drops below 0.01.
Chain sample_sigma_h(const std::vector<TaskData>& tasks,
                     const std::vector<CliqueSequence>& covers, const HyperParams& hp,
                     const HmcConfig& cfg, const SpdMatrix& init);

// Generic driver over an arbitrary target (used by tests and sample_sigma_h).
Chain run_chain(const Target& target, int p, const HmcConfig& cfg, const CholState& init);

}  // namespace mtgbn
