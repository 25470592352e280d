#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "cbp/em.hpp"

namespace cbp {

enum class Scheme { progenitors, sizes };

std::string to_string(Scheme scheme);
Scheme scheme_from_string(const std::string& name);

struct BootstrapConfig {
  std::int64_t n_reps = 500;
  std::int64_t n_generations = 30;
  std::int64_t z0 = 1;
  std::uint64_t master_seed = 1;
  // Multi-start width used when re-fitting sizes-scheme replicates (a full
  // 300-start search per replicate would dominate the runtime).
  std::int64_t sizes_starts = 10;
  EmConfig em;
  int n_threads = 0;
};

struct BootstrapSummary {
  std::vector<std::string> param_names;         // p0..ps, m, sigma2, mu
  std::vector<std::vector<double>> replicates;  // [param][successful replicate]
  std::vector<double> mse;                      // mean squared deviation from truth
  std::int64_t n_success = 0;
  std::int64_t n_failed = 0;   // excluded replicates, extinct paths included
  std::int64_t n_extinct = 0;  // subset of n_failed that went extinct
};

// Parametric bootstrap: simulates cfg.n_reps processes from (fit.p, theta)
// under cfg.em.kind, re-fits each with the EM matching `scheme`, and
// summarizes the re-fit estimates against `truth` (ordered as param_names).
// Replicate r draws every random number from seeds derived from
// (master_seed, r), so results are reproducible and thread-count independent.
// Extinct paths (Z_n = 0) are excluded and counted.
BootstrapSummary bootstrap(const EmFit& fit, Scheme scheme, const BootstrapConfig& cfg,
                           const std::vector<double>& truth);

// Per-parameter relative efficiency b.mse / a.mse (> 1 means a is the more
// accurate summary). Zero denominators yield +infinity unless both MSEs are
// zero, which yields 1.
std::vector<double> efficiency(const BootstrapSummary& a, const BootstrapSummary& b);

}  // namespace cbp
