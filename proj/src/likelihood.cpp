#include "cbp/likelihood.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

#include "cbp/conv.hpp"
#include "cbp/errors.hpp"
#include "cbp/parallel.hpp"
#include "cbp/rng.hpp"

namespace cbp {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double finish(double value, std::int64_t offending, std::int64_t* out) {
  if (out) *out = offending;
  return value;
}

}  // namespace

double loglik_sizes(const SizesSample& sample, const OffspringDistribution& p,
                    const ControlFamily& family, std::int64_t* offending_generation) {
  sample.validate();
  const int s_max = p.s_max();
  const std::int64_t n = sample.n();
  std::int64_t phi_max = 0, width = 1;
  std::vector<std::pair<std::int64_t, std::int64_t>> ranges(static_cast<std::size_t>(n));
  for (std::int64_t l = 0; l < n; ++l) {
    std::int64_t z_l = sample.z[static_cast<std::size_t>(l)];
    if (z_l == 0) continue;
    std::int64_t zn = sample.z[static_cast<std::size_t>(l) + 1];
    auto range = sizes_phi_range(family, z_l, zn, s_max);
    ranges[static_cast<std::size_t>(l)] = range;
    if (range.first > range.second) return finish(kNegInf, l, offending_generation);
    phi_max = std::max(phi_max, range.second);
    width = std::max(width, zn + 1);
  }
  ConvPowers conv(p.probs(), phi_max, width);
  double total = 0.0;
  for (std::int64_t l = 0; l < n; ++l) {
    std::int64_t z_l = sample.z[static_cast<std::size_t>(l)];
    if (z_l == 0) continue;  // 0 -> 0 happens with probability 1
    std::int64_t zn = sample.z[static_cast<std::size_t>(l) + 1];
    auto [lo, hi] = ranges[static_cast<std::size_t>(l)];
    double mx = kNegInf;
    for (std::int64_t phi = lo; phi <= hi; ++phi)
      mx = std::max(mx, family.log_pmf(z_l, phi) + conv.log_at(phi, zn));
    if (mx == kNegInf) return finish(kNegInf, l, offending_generation);
    double acc = 0.0;
    for (std::int64_t phi = lo; phi <= hi; ++phi)
      acc += std::exp(family.log_pmf(z_l, phi) + conv.log_at(phi, zn) - mx);
    total += mx + std::log(acc);
  }
  return finish(total, -1, offending_generation);
}

double loglik_progenitors(const ProgenitorSample& sample, const OffspringDistribution& p,
                          const ControlFamily& family, std::int64_t* offending_generation) {
  sample.validate();
  const int s_max = p.s_max();
  const std::int64_t n = sample.n();
  std::int64_t phi_max = 0, width = 1;
  for (std::int64_t l = 0; l < n; ++l) {
    phi_max = std::max(phi_max, sample.phi[static_cast<std::size_t>(l)]);
    width = std::max(width, sample.z[static_cast<std::size_t>(l) + 1] + 1);
  }
  if (s_max < 0) throw DomainError("offspring law must not be empty");
  ConvPowers conv(p.probs(), phi_max, width);
  double total = 0.0;
  for (std::int64_t l = 0; l < n; ++l) {
    std::int64_t z_l = sample.z[static_cast<std::size_t>(l)];
    std::int64_t phi = sample.phi[static_cast<std::size_t>(l)];
    std::int64_t zn = sample.z[static_cast<std::size_t>(l) + 1];
    double term = family.log_pmf(z_l, phi) + conv.log_at(phi, zn);
    if (term == kNegInf) return finish(kNegInf, l, offending_generation);
    total += term;
  }
  return finish(total, -1, offending_generation);
}

double aic(double loglik, std::int64_t n_params, std::int64_t n_obs) {
  if (n_params < 0) throw DomainError("AIC needs a nonnegative parameter count");
  if (n_obs <= n_params + 1)
    throw DomainError("AIC small-sample correction needs n_obs > n_params + 1");
  double k = static_cast<double>(n_params);
  double n = static_cast<double>(n_obs);
  return -2.0 * loglik + 2.0 * k * n / (n - k - 1.0);
}

double aic_plain(double loglik, std::int64_t n_params) {
  if (n_params < 0) throw DomainError("AIC needs a nonnegative parameter count");
  return -2.0 * loglik + 2.0 * static_cast<double>(n_params);
}

namespace {

// Grid scaffolding shared by both scan variants: builds the cell list in
// s_max-major order, runs `fill` per cell (catching per-cell failures), and
// marks the minimum-AIC cell.
ScanResult run_scan(const std::vector<ControlKind>& families, const std::vector<int>& s_max_grid,
                    int n_threads,
                    const std::function<void(ScanCell&, std::int64_t)>& fill) {
  if (families.empty() || s_max_grid.empty())
    throw DomainError("scan needs at least one family and one s_max value");
  ScanResult result;
  for (int s : s_max_grid)
    for (ControlKind kind : families)
      result.cells.push_back(ScanCell{kind, s, false, "", std::nullopt, 0.0, 0.0, 0});
  parallel_for(static_cast<std::int64_t>(result.cells.size()), resolve_threads(n_threads),
               [&](std::int64_t i) {
                 auto& cell = result.cells[static_cast<std::size_t>(i)];
                 try {
                   fill(cell, i);
                 } catch (const std::exception& e) {
                   cell.failed = true;
                   cell.error = e.what();
                   cell.fit.reset();
                 }
               });
  for (std::size_t i = 0; i < result.cells.size(); ++i) {
    const auto& cell = result.cells[i];
    if (cell.failed) continue;
    if (result.best_index < 0 ||
        cell.aic < result.cells[static_cast<std::size_t>(result.best_index)].aic)
      result.best_index = static_cast<std::int64_t>(i);
  }
  return result;
}

}  // namespace

ScanResult scan_progenitors(const ProgenitorSample& sample,
                            const std::vector<ControlKind>& families,
                            const std::vector<int>& s_max_grid, const EmConfig& cfg,
                            bool plain_aic, int n_threads) {
  sample.validate();
  std::int64_t n = sample.n();
  std::int64_t n_obs = (n + 1) + n;  // observed sizes plus observed progenitor counts
  return run_scan(families, s_max_grid, n_threads, [&](ScanCell& cell, std::int64_t) {
    EmConfig cell_cfg = cfg;
    cell_cfg.kind = cell.kind;
    cell_cfg.s_max = cell.s_max;
    std::vector<double> init_p(static_cast<std::size_t>(cell.s_max) + 1,
                               1.0 / (cell.s_max + 1));
    EmFit fit = em_fit_progenitors(sample, init_p, 0.5, cell_cfg);
    cell.loglik = fit.loglik;
    cell.iterations = fit.iterations;
    std::int64_t k = cell.s_max + 1;
    cell.aic = plain_aic ? aic_plain(fit.loglik, k) : aic(fit.loglik, k, n_obs);
    cell.fit = std::move(fit);
  });
}

ScanResult scan_sizes(const SizesSample& sample, const std::vector<ControlKind>& families,
                      const std::vector<int>& s_max_grid, const EmConfig& cfg,
                      std::int64_t n_starts, std::uint64_t master_seed, bool plain_aic,
                      int n_threads) {
  sample.validate();
  std::int64_t n_obs = sample.n() + 1;
  return run_scan(families, s_max_grid, n_threads, [&](ScanCell& cell, std::int64_t index) {
    EmConfig cell_cfg = cfg;
    cell_cfg.kind = cell.kind;
    cell_cfg.s_max = cell.s_max;
    auto ms = multi_start(sample, n_starts, derive_seed(master_seed, static_cast<std::uint64_t>(index)),
                          cell_cfg, 1);
    cell.loglik = ms.best.loglik;
    cell.iterations = ms.best.iterations;
    std::int64_t k = cell.s_max + 1;
    cell.aic = plain_aic ? aic_plain(ms.best.loglik, k) : aic(ms.best.loglik, k, n_obs);
    cell.fit = std::move(ms.best);
  });
}

}  // namespace cbp
