#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "cbp/control.hpp"
#include "cbp/em.hpp"
#include "cbp/offspring.hpp"
#include "cbp/sample.hpp"

namespace cbp {

// Exact observed-data log-likelihood for the sizes-only sample: each
// transition contributes log of the control pmf mixed over the feasible
// progenitor counts against convolution powers of p. Returns -infinity when
// some transition has zero probability; offending_generation (when non-null)
// receives that generation's index, or -1 when the value is finite.
double loglik_sizes(const SizesSample& sample, const OffspringDistribution& p,
                    const ControlFamily& family,
                    std::int64_t* offending_generation = nullptr);

// Same for the progenitor-observed sample: one control pmf factor and one
// convolution-power factor per transition.
double loglik_progenitors(const ProgenitorSample& sample, const OffspringDistribution& p,
                          const ControlFamily& family,
                          std::int64_t* offending_generation = nullptr);

// Small-sample corrected Akaike criterion -2 loglik + 2 k n / (n - k - 1).
// Requires n_obs > n_params + 1.
double aic(double loglik, std::int64_t n_params, std::int64_t n_obs);
// Uncorrected variant -2 loglik + 2 k.
double aic_plain(double loglik, std::int64_t n_params);

struct ScanCell {
  ControlKind kind;
  int s_max = 0;
  bool failed = false;
  std::string error;          // set when failed
  std::optional<EmFit> fit;   // set when not failed
  double loglik = 0.0;
  double aic = 0.0;
  std::int64_t iterations = 0;
};

struct ScanResult {
  std::vector<ScanCell> cells;   // s_max-major, then family order as given
  std::int64_t best_index = -1;  // minimum-AIC cell, -1 when every cell failed
};

// Fits each (family, s_max) cell by the progenitor-scheme EM from the
// uniform initial point (p flat on 0..s_max, theta 1/2) and scores it.
// n_obs for the AIC correction is (n+1) sizes + n progenitor counts.
// Per-cell failures are recorded in the cell, not thrown.
ScanResult scan_progenitors(const ProgenitorSample& sample,
                            const std::vector<ControlKind>& families,
                            const std::vector<int>& s_max_grid, const EmConfig& cfg,
                            bool plain_aic = false, int n_threads = 0);

// Sizes-only variant: each cell runs a multi-start EM (cell c seeded with
// derive_seed(master_seed, c)); n_obs is the n+1 observed sizes.
ScanResult scan_sizes(const SizesSample& sample, const std::vector<ControlKind>& families,
                      const std::vector<int>& s_max_grid, const EmConfig& cfg,
                      std::int64_t n_starts, std::uint64_t master_seed,
                      bool plain_aic = false, int n_threads = 0);

}  // namespace cbp
