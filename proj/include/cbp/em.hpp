#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "cbp/control.hpp"
#include "cbp/offspring.hpp"
#include "cbp/sample.hpp"

namespace cbp {

struct EmConfig {
  double tol = 1e-6;
  std::int64_t max_iters = 50000;
  ControlKind kind = ControlKind::binomial;
  int s_max = 3;
};

struct EmFit {
  OffspringDistribution p{std::vector<double>{1.0, 0.0}};  // placeholder until fitted
  double theta = 0.0;
  double m = 0.0;       // mean of p
  double sigma2 = 0.0;  // variance of p
  double mu = 0.0;      // mu(theta)
  std::int64_t iterations = 0;
  bool converged = false;
  double loglik = 0.0;  // exact observed-data log-likelihood at the fit
};

struct EmTraceRow {
  std::int64_t iteration;  // 0 is the initial point
  std::vector<double> p;
  double theta;
  double loglik;  // exact observed-data log-likelihood at this iterate
};

// E-step, progenitors observed: row l, column k holds E[Z_l(k) | data] under
// offspring law p. Does not depend on theta. Row sums equal phi_l and
// k-weighted row sums equal z_{l+1}.
std::vector<std::vector<double>> e_step_progenitors(const ProgenitorSample& sample,
                                                    const OffspringDistribution& p);

// Same expectations by brute-force enumeration of every configuration
// (exponential cost; reference implementation for tests).
std::vector<std::vector<double>> e_step_progenitors_enum(const ProgenitorSample& sample,
                                                         const OffspringDistribution& p);

struct SizesEStep {
  std::vector<std::vector<double>> expected_counts;  // rows l, columns k
  double delta_expected = 0.0;                       // E[Delta_{n-1} | data]
};

// E-step, sizes only: progenitor counts are latent, so expectations also run
// over the control law (hence the family argument).
SizesEStep e_step_sizes(const SizesSample& sample, const OffspringDistribution& p,
                        const ControlFamily& family);
SizesEStep e_step_sizes_enum(const SizesSample& sample, const OffspringDistribution& p,
                             const ControlFamily& family);

// M-step: p_k <- column sum / delta_expected, theta <- mu_inverse of
// delta_expected / y_nminus1. Throws DomainError when the ratio falls outside
// mu's range for the family.
std::pair<std::vector<double>, double> m_step(
    const std::vector<std::vector<double>>& expected_counts, double delta_expected,
    double y_nminus1, ControlKind kind);

// Alternate E and M steps until max(|p change|, |theta change|) < cfg.tol or
// cfg.max_iters is reached. When trace is non-null, appends one row per
// iteration (plus the initial point) with the exact log-likelihood evaluated
// at each iterate.
EmFit em_fit_progenitors(const ProgenitorSample& sample, const std::vector<double>& init_p,
                         double init_theta, const EmConfig& cfg,
                         std::vector<EmTraceRow>* trace = nullptr);
EmFit em_fit_sizes(const SizesSample& sample, const std::vector<double>& init_p,
                   double init_theta, const EmConfig& cfg,
                   std::vector<EmTraceRow>* trace = nullptr);

struct StartResult {
  bool failed = false;
  std::string error;        // set when failed
  std::optional<EmFit> fit; // set when not failed
};

struct MultiStartResult {
  EmFit best;
  std::int64_t best_start = -1;  // start index of `best`
  std::vector<StartResult> starts;
};

// Runs em_fit_sizes from n_starts random initial points: p from a flat
// Dirichlet, theta from a uniform draw mapped into the family's domain. Start
// i is seeded with derive_seed(master_seed, i), so results are reproducible
// and independent of thread count. Best fit = greatest exact log-likelihood
// among converged starts (ties to the lowest index); if no start converged,
// the best non-converged fit is returned with its flag left false. Throws
// DegenerateError when every start failed outright.
MultiStartResult multi_start(const SizesSample& sample, std::int64_t n_starts,
                             std::uint64_t master_seed, const EmConfig& cfg,
                             int n_threads = 0);

}  // namespace cbp
