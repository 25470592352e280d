#include "cbp/em.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "cbp/conv.hpp"
#include "cbp/errors.hpp"
#include "cbp/likelihood.hpp"
#include "cbp/parallel.hpp"
#include "cbp/rng.hpp"
#include "cbp/trees.hpp"

namespace cbp {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double lchoose(std::int64_t n, std::int64_t k) {
  if (k < 0 || k > n) return kNegInf;
  return std::lgamma(static_cast<double>(n) + 1.0) -
         std::lgamma(static_cast<double>(k) + 1.0) -
         std::lgamma(static_cast<double>(n - k) + 1.0);
}

void check_init(const std::vector<double>& init_p, double init_theta, const EmConfig& cfg) {
  if (cfg.tol <= 0.0) throw DomainError("EM tolerance must be positive");
  if (cfg.max_iters < 1) throw DomainError("EM needs max_iters >= 1");
  if (static_cast<int>(init_p.size()) != cfg.s_max + 1)
    throw DomainError("initial offspring law must have s_max + 1 entries");
  ControlFamily::validate_theta(cfg.kind, init_theta);
}

// log of the multinomial weight phi! / prod z(k)! * prod p_k^z(k).
double log_multinomial(const Configuration& config, const std::vector<double>& probs) {
  double lw = std::lgamma(static_cast<double>(config.progenitors()) + 1.0);
  for (std::size_t k = 0; k < config.counts.size(); ++k) {
    std::int64_t c = config.counts[k];
    if (c == 0) continue;
    if (probs[k] == 0.0) return kNegInf;
    lw += static_cast<double>(c) * std::log(probs[k]) -
          std::lgamma(static_cast<double>(c) + 1.0);
  }
  return lw;
}

// Per-generation bookkeeping for the sizes scheme. lo and the combinatorial
// part of the control log-pmf depend only on (z_l, z_next, s_max, kind), so
// they are cached across EM iterations; hi can move with theta for the
// unbounded families and the cache grows lazily.
struct SizesGen {
  std::int64_t index;   // generation number in the sample
  std::int64_t z_l;
  std::int64_t z_next;
  std::int64_t lo;
  std::vector<double> log_base;  // combinatorial term at phi = lo + i

  void ensure(std::int64_t hi, ControlKind kind) {
    for (std::int64_t phi = lo + static_cast<std::int64_t>(log_base.size()); phi <= hi; ++phi) {
      switch (kind) {
        case ControlKind::binomial:
          log_base.push_back(lchoose(z_l, phi));
          break;
        case ControlKind::poisson:
          log_base.push_back(-std::lgamma(static_cast<double>(phi) + 1.0));
          break;
        case ControlKind::negative_binomial:
          log_base.push_back(lchoose(phi + z_l - 1, phi));
          break;
      }
    }
  }
};

// theta-dependent scalars of the control log-pmf: log w(phi) = log_base +
// phi * theta_term + scale_term.
void control_terms(ControlKind kind, double theta, std::int64_t z_l, double& theta_term,
                   double& scale_term) {
  switch (kind) {
    case ControlKind::binomial:
      theta_term = std::log(theta);
      scale_term = -static_cast<double>(z_l) * std::log1p(theta);
      break;
    case ControlKind::poisson:
      theta_term = std::log(static_cast<double>(z_l) * theta);
      scale_term = -static_cast<double>(z_l) * theta;
      break;
    case ControlKind::negative_binomial:
      theta_term = std::log(theta);
      scale_term = static_cast<double>(z_l) * std::log1p(-theta);
      break;
  }
}

[[noreturn]] void throw_zero_mass(std::int64_t generation) {
  throw DegenerateError("transition at generation " + std::to_string(generation) +
                        " has zero probability under the current parameters");
}

[[noreturn]] void throw_infeasible(std::int64_t generation) {
  throw SchemaError("inconsistent sample: no feasible configuration for the transition at generation " +
                    std::to_string(generation));
}

// E-step row for one sizes-scheme generation. Returns E[phi_l] and fills
// row[k] = E[Z_l(k)]. Fast path: exact log-sum-exp denominator, linear
// numerators under per-generation shifts; falls back to full log-space
// numerators when the conservation identities degrade.
double sizes_gen_estep(const SizesGen& g, std::int64_t hi, const ConvPowers& conv,
                       const std::vector<double>& probs, double theta_term,
                       double scale_term, std::vector<double>& row,
                       std::vector<double>& lt_buf) {
  const std::int64_t lo = g.lo;
  const std::int64_t zn = g.z_next;
  const int s_max = static_cast<int>(probs.size()) - 1;

  lt_buf.resize(static_cast<std::size_t>(hi - lo + 1));
  double max_lt = kNegInf;
  for (std::int64_t phi = lo; phi <= hi; ++phi) {
    double lt = g.log_base[static_cast<std::size_t>(phi - lo)] +
                static_cast<double>(phi) * theta_term + scale_term + conv.log_at(phi, zn);
    lt_buf[static_cast<std::size_t>(phi - lo)] = lt;
    max_lt = std::max(max_lt, lt);
  }
  if (max_lt == kNegInf) throw_zero_mass(g.index);

  double den = 0.0, ephi_num = 0.0;
  for (std::int64_t phi = lo; phi <= hi; ++phi) {
    double e = std::exp(lt_buf[static_cast<std::size_t>(phi - lo)] - max_lt);
    den += e;
    ephi_num += static_cast<double>(phi) * e;
  }
  double ephi = ephi_num / den;
  double log_den = max_lt + std::log(den);

  std::fill(row.begin(), row.end(), 0.0);
  const std::int64_t phi0 = std::max<std::int64_t>(lo, 1);
  if (phi0 > hi) return ephi;  // only phi = 0 feasible: all expected counts 0

  double shift = kNegInf;
  for (std::int64_t phi = phi0; phi <= hi; ++phi)
    shift = std::max(shift, g.log_base[static_cast<std::size_t>(phi - lo)] +
                                static_cast<double>(phi) * theta_term + scale_term +
                                conv.log_scale(phi - 1));
  for (std::int64_t phi = phi0; phi <= hi; ++phi) {
    double a = g.log_base[static_cast<std::size_t>(phi - lo)] +
               static_cast<double>(phi) * theta_term + scale_term + conv.log_scale(phi - 1) -
               shift;
    double c = std::exp(a) * static_cast<double>(phi);
    if (c == 0.0) continue;
    const auto& prev = conv.scaled_row(phi - 1);
    auto prev_len = static_cast<std::int64_t>(prev.size());
    for (int k = 0; k <= s_max; ++k) {
      std::int64_t x = zn - k;
      if (x >= 0 && x < prev_len) row[static_cast<std::size_t>(k)] += c * prev[static_cast<std::size_t>(x)];
    }
  }
  for (int k = 0; k <= s_max; ++k) {
    double num = row[static_cast<std::size_t>(k)];
    row[static_cast<std::size_t>(k)] =
        num > 0.0 ? probs[static_cast<std::size_t>(k)] * std::exp(std::log(num) + shift - log_den)
                  : 0.0;
  }

  double sum = 0.0, ksum = 0.0;
  for (int k = 0; k <= s_max; ++k) {
    sum += row[static_cast<std::size_t>(k)];
    ksum += static_cast<double>(k) * row[static_cast<std::size_t>(k)];
  }
  bool ok = std::abs(ksum - static_cast<double>(zn)) <=
                1e-6 * std::max<double>(1.0, static_cast<double>(zn)) &&
            std::abs(sum - ephi) <= 1e-6 * std::max(1.0, ephi);
  if (!ok) {
    // Exact log-space numerators (rare: extreme dynamic range in the weights).
    for (int k = 0; k <= s_max; ++k) {
      if (probs[static_cast<std::size_t>(k)] == 0.0) {
        row[static_cast<std::size_t>(k)] = 0.0;
        continue;
      }
      double mx = kNegInf;
      for (std::int64_t phi = phi0; phi <= hi; ++phi) {
        double v = g.log_base[static_cast<std::size_t>(phi - lo)] +
                   static_cast<double>(phi) * theta_term + scale_term +
                   std::log(static_cast<double>(phi)) + conv.log_at(phi - 1, zn - k);
        lt_buf[static_cast<std::size_t>(phi - lo)] = v;
        mx = std::max(mx, v);
      }
      if (mx == kNegInf) {
        row[static_cast<std::size_t>(k)] = 0.0;
        continue;
      }
      double acc = 0.0;
      for (std::int64_t phi = phi0; phi <= hi; ++phi)
        acc += std::exp(lt_buf[static_cast<std::size_t>(phi - lo)] - mx);
      row[static_cast<std::size_t>(k)] =
          probs[static_cast<std::size_t>(k)] * std::exp(mx + std::log(acc) - log_den);
    }
  }
  return ephi;
}

// Shared state for a sizes-scheme fit: per-generation caches plus scratch.
struct SizesWorkspace {
  std::vector<SizesGen> gens;
  std::int64_t n = 0;
  double y = 0.0;

  SizesWorkspace(const SizesSample& sample, int s_max) {
    n = sample.n();
    for (std::int64_t l = 0; l < n; ++l) {
      y += static_cast<double>(sample.z[static_cast<std::size_t>(l)]);
      std::int64_t z_l = sample.z[static_cast<std::size_t>(l)];
      if (z_l == 0) continue;
      std::int64_t zn = sample.z[static_cast<std::size_t>(l) + 1];
      std::int64_t lo =
          zn > 0 ? (zn + static_cast<std::int64_t>(s_max) - 1) / s_max : 0;
      gens.push_back(SizesGen{l, z_l, zn, lo, {}});
    }
  }
};

// One sizes-scheme E-step over the workspace: fills expected counts (indexed
// like the sample generations) and returns E[Delta].
double sizes_estep_pass(SizesWorkspace& ws, const OffspringDistribution& p,
                        const ControlFamily& family, int s_max,
                        std::vector<std::vector<double>>& counts) {
  std::int64_t phi_max = 0, width = 1;
  std::vector<std::int64_t> his(ws.gens.size());
  for (std::size_t i = 0; i < ws.gens.size(); ++i) {
    auto& g = ws.gens[i];
    auto [lo, hi] = sizes_phi_range(family, g.z_l, g.z_next, s_max);
    if (lo > hi) throw_infeasible(g.index);
    his[i] = hi;
    g.ensure(hi, family.kind());
    phi_max = std::max(phi_max, hi);
    width = std::max(width, g.z_next + 1);
  }
  ConvPowers conv(p.probs(), phi_max, width);
  double delta = 0.0;
  std::vector<double> lt_buf;
  std::vector<double> row(static_cast<std::size_t>(s_max) + 1, 0.0);
  for (std::size_t i = 0; i < ws.gens.size(); ++i) {
    auto& g = ws.gens[i];
    double theta_term = 0.0, scale_term = 0.0;
    control_terms(family.kind(), family.theta(), g.z_l, theta_term, scale_term);
    delta += sizes_gen_estep(g, his[i], conv, p.probs(), theta_term, scale_term, row, lt_buf);
    counts[static_cast<std::size_t>(g.index)] = row;
  }
  return delta;
}

std::vector<std::vector<double>> zero_counts(std::int64_t n, int s_max) {
  return std::vector<std::vector<double>>(
      static_cast<std::size_t>(n), std::vector<double>(static_cast<std::size_t>(s_max) + 1, 0.0));
}

EmFit finish_fit(const OffspringDistribution& p, double theta, ControlKind kind,
                 std::int64_t iterations, bool converged, double loglik) {
  EmFit fit{p, theta, p.mean(), p.variance(), ControlFamily::mu_value(kind, theta),
            iterations, converged, loglik};
  return fit;
}

}  // namespace

std::vector<std::vector<double>> e_step_progenitors(const ProgenitorSample& sample,
                                                    const OffspringDistribution& p) {
  sample.validate();
  const int s_max = p.s_max();
  const std::int64_t n = sample.n();
  std::int64_t phi_max = 0, width = 1;
  for (std::int64_t l = 0; l < n; ++l) {
    std::int64_t phi = sample.phi[static_cast<std::size_t>(l)];
    std::int64_t zn = sample.z[static_cast<std::size_t>(l) + 1];
    if (zn > phi * static_cast<std::int64_t>(s_max)) throw_infeasible(l);
    phi_max = std::max(phi_max, phi);
    width = std::max(width, zn + 1);
  }
  ConvPowers conv(p.probs(), phi_max, width);
  auto counts = zero_counts(n, s_max);
  for (std::int64_t l = 0; l < n; ++l) {
    std::int64_t phi = sample.phi[static_cast<std::size_t>(l)];
    if (phi == 0) continue;  // next size is 0 and no progenitors to attribute
    std::int64_t zn = sample.z[static_cast<std::size_t>(l) + 1];
    double log_den = conv.log_at(phi, zn);
    if (log_den == kNegInf) throw_zero_mass(l);
    auto& row = counts[static_cast<std::size_t>(l)];
    for (int k = 0; k <= s_max; ++k) {
      double pk = p[k];
      if (pk == 0.0) continue;
      double log_num = conv.log_at(phi - 1, zn - k);
      if (log_num == kNegInf) continue;
      row[static_cast<std::size_t>(k)] =
          pk * static_cast<double>(phi) * std::exp(log_num - log_den);
    }
  }
  return counts;
}

std::vector<std::vector<double>> e_step_progenitors_enum(const ProgenitorSample& sample,
                                                         const OffspringDistribution& p) {
  sample.validate();
  const int s_max = p.s_max();
  const std::int64_t n = sample.n();
  auto counts = zero_counts(n, s_max);
  for (std::int64_t l = 0; l < n; ++l) {
    std::int64_t phi = sample.phi[static_cast<std::size_t>(l)];
    std::int64_t zn = sample.z[static_cast<std::size_t>(l) + 1];
    auto configs = enumerate_fixed(phi, zn, s_max);
    if (configs.empty()) throw_infeasible(l);
    if (phi == 0) continue;
    std::vector<double> lw(configs.size());
    double mx = kNegInf;
    for (std::size_t c = 0; c < configs.size(); ++c) {
      lw[c] = log_multinomial(configs[c], p.probs());
      mx = std::max(mx, lw[c]);
    }
    if (mx == kNegInf) throw_zero_mass(l);
    double den = 0.0;
    for (double v : lw) den += std::exp(v - mx);
    auto& row = counts[static_cast<std::size_t>(l)];
    for (std::size_t c = 0; c < configs.size(); ++c) {
      double w = std::exp(lw[c] - mx) / den;
      for (int k = 0; k <= s_max; ++k)
        row[static_cast<std::size_t>(k)] +=
            w * static_cast<double>(configs[c].counts[static_cast<std::size_t>(k)]);
    }
  }
  return counts;
}

SizesEStep e_step_sizes(const SizesSample& sample, const OffspringDistribution& p,
                        const ControlFamily& family) {
  sample.validate();
  const int s_max = p.s_max();
  SizesWorkspace ws(sample, s_max);
  SizesEStep result;
  result.expected_counts = zero_counts(ws.n, s_max);
  result.delta_expected = sizes_estep_pass(ws, p, family, s_max, result.expected_counts);
  return result;
}

SizesEStep e_step_sizes_enum(const SizesSample& sample, const OffspringDistribution& p,
                             const ControlFamily& family) {
  sample.validate();
  const int s_max = p.s_max();
  const std::int64_t n = sample.n();
  SizesEStep result;
  result.expected_counts = zero_counts(n, s_max);
  result.delta_expected = 0.0;
  for (std::int64_t l = 0; l < n; ++l) {
    std::int64_t z_l = sample.z[static_cast<std::size_t>(l)];
    if (z_l == 0) continue;
    std::int64_t zn = sample.z[static_cast<std::size_t>(l) + 1];
    auto [lo, hi] = sizes_phi_range(family, z_l, zn, s_max);
    if (lo > hi) throw_infeasible(l);
    // Flatten all (phi, configuration) pairs with their joint log-weights.
    std::vector<double> lw;
    std::vector<const Configuration*> refs;
    std::vector<std::vector<Configuration>> blocks;
    for (std::int64_t phi = lo; phi <= hi; ++phi)
      blocks.push_back(enumerate_fixed(phi, zn, s_max));
    double mx = kNegInf;
    std::vector<double> phis;
    for (std::int64_t phi = lo; phi <= hi; ++phi) {
      double lpmf = family.log_pmf(z_l, phi);
      for (const auto& config : blocks[static_cast<std::size_t>(phi - lo)]) {
        double v = lpmf + log_multinomial(config, p.probs());
        lw.push_back(v);
        refs.push_back(&config);
        phis.push_back(static_cast<double>(phi));
        mx = std::max(mx, v);
      }
    }
    if (refs.empty()) throw_infeasible(l);
    if (mx == kNegInf) throw_zero_mass(l);
    double den = 0.0;
    for (double v : lw) den += std::exp(v - mx);
    auto& row = result.expected_counts[static_cast<std::size_t>(l)];
    double ephi = 0.0;
    for (std::size_t c = 0; c < refs.size(); ++c) {
      double w = std::exp(lw[c] - mx) / den;
      ephi += w * phis[c];
      for (int k = 0; k <= s_max; ++k)
        row[static_cast<std::size_t>(k)] +=
            w * static_cast<double>(refs[c]->counts[static_cast<std::size_t>(k)]);
    }
    result.delta_expected += ephi;
  }
  return result;
}

std::pair<std::vector<double>, double> m_step(
    const std::vector<std::vector<double>>& expected_counts, double delta_expected,
    double y_nminus1, ControlKind kind) {
  if (!(delta_expected > 0.0))
    throw DomainError("M-step needs a positive expected progenitor total");
  if (!(y_nminus1 > 0.0)) throw DomainError("M-step needs a positive population total");
  if (expected_counts.empty()) throw DomainError("M-step needs expected counts");
  std::size_t cols = expected_counts.front().size();
  std::vector<double> p_next(cols, 0.0);
  for (const auto& row : expected_counts) {
    if (row.size() != cols) throw DomainError("expected-counts rows must have equal length");
    for (std::size_t k = 0; k < cols; ++k) p_next[k] += row[k];
  }
  for (double& v : p_next) v /= delta_expected;
  // Guard against accumulated rounding drift over many iterations.
  double sum = 0.0;
  for (double v : p_next) sum += v;
  if (!(sum > 0.0)) throw DomainError("M-step produced an empty offspring law");
  for (double& v : p_next) v /= sum;
  double theta_next = ControlFamily::mu_inverse(kind, delta_expected / y_nminus1);
  return {p_next, theta_next};
}

EmFit em_fit_progenitors(const ProgenitorSample& sample, const std::vector<double>& init_p,
                         double init_theta, const EmConfig& cfg,
                         std::vector<EmTraceRow>* trace) {
  sample.validate();
  sample.validate_for(cfg.kind, cfg.s_max);
  check_init(init_p, init_theta, cfg);
  std::int64_t n = sample.n();
  double y = 0.0, delta = 0.0;
  for (std::int64_t l = 0; l < n; ++l) {
    y += static_cast<double>(sample.z[static_cast<std::size_t>(l)]);
    delta += static_cast<double>(sample.phi[static_cast<std::size_t>(l)]);
  }
  if (delta <= 0.0)
    throw DegenerateError("no progenitors observed; the offspring law is unidentifiable");

  OffspringDistribution p(init_p);
  double theta = init_theta;
  auto push_trace = [&](std::int64_t iteration) {
    if (!trace) return;
    ControlFamily family(cfg.kind, theta);
    trace->push_back(EmTraceRow{iteration, p.probs(), theta,
                                loglik_progenitors(sample, p, family)});
  };
  push_trace(0);

  std::int64_t iterations = cfg.max_iters;
  bool converged = false;
  for (std::int64_t i = 1; i <= cfg.max_iters; ++i) {
    auto counts = e_step_progenitors(sample, p);
    auto [p_next, theta_next] = m_step(counts, delta, y, cfg.kind);
    double diff = std::abs(theta_next - theta);
    for (int k = 0; k <= cfg.s_max; ++k)
      diff = std::max(diff, std::abs(p_next[static_cast<std::size_t>(k)] - p[k]));
    p = OffspringDistribution(p_next);
    theta = theta_next;
    push_trace(i);
    if (diff < cfg.tol) {
      iterations = i;
      converged = true;
      break;
    }
  }
  ControlFamily family(cfg.kind, theta);
  return finish_fit(p, theta, cfg.kind, iterations, converged,
                    loglik_progenitors(sample, p, family));
}

EmFit em_fit_sizes(const SizesSample& sample, const std::vector<double>& init_p,
                   double init_theta, const EmConfig& cfg, std::vector<EmTraceRow>* trace) {
  sample.validate();
  sample.validate_for(cfg.kind, cfg.s_max);
  check_init(init_p, init_theta, cfg);
  SizesWorkspace ws(sample, cfg.s_max);
  if (!(ws.y > 0.0))
    throw DegenerateError("no individuals observed; the offspring law is unidentifiable");
  if (ws.gens.empty())
    throw DegenerateError("no progenitors observed; the offspring law is unidentifiable");

  OffspringDistribution p(init_p);
  double theta = init_theta;
  auto push_trace = [&](std::int64_t iteration) {
    if (!trace) return;
    ControlFamily family(cfg.kind, theta);
    trace->push_back(EmTraceRow{iteration, p.probs(), theta, loglik_sizes(sample, p, family)});
  };
  push_trace(0);

  auto counts = zero_counts(ws.n, cfg.s_max);
  std::int64_t iterations = cfg.max_iters;
  bool converged = false;
  for (std::int64_t i = 1; i <= cfg.max_iters; ++i) {
    ControlFamily family(cfg.kind, theta);
    double delta = sizes_estep_pass(ws, p, family, cfg.s_max, counts);
    auto [p_next, theta_next] = m_step(counts, delta, ws.y, cfg.kind);
    double diff = std::abs(theta_next - theta);
    for (int k = 0; k <= cfg.s_max; ++k)
      diff = std::max(diff, std::abs(p_next[static_cast<std::size_t>(k)] - p[k]));
    p = OffspringDistribution(p_next);
    theta = theta_next;
    push_trace(i);
    if (diff < cfg.tol) {
      iterations = i;
      converged = true;
      break;
    }
  }
  ControlFamily family(cfg.kind, theta);
  return finish_fit(p, theta, cfg.kind, iterations, converged, loglik_sizes(sample, p, family));
}

MultiStartResult multi_start(const SizesSample& sample, std::int64_t n_starts,
                             std::uint64_t master_seed, const EmConfig& cfg, int n_threads) {
  if (n_starts < 1) throw DomainError("multi_start needs n_starts >= 1");
  MultiStartResult result;
  result.starts.resize(static_cast<std::size_t>(n_starts));
  parallel_for(n_starts, resolve_threads(n_threads), [&](std::int64_t i) {
    Pcg32 rng(derive_seed(master_seed, static_cast<std::uint64_t>(i)));
    std::vector<double> p0 = sample_dirichlet_uniform(cfg.s_max + 1, rng);
    double theta0;
    if (cfg.kind == ControlKind::negative_binomial) {
      theta0 = rng.uniform_open();
    } else {
      double q = rng.uniform_open();
      theta0 = q / (1.0 - q);
    }
    auto& slot = result.starts[static_cast<std::size_t>(i)];
    try {
      slot.fit = em_fit_sizes(sample, p0, theta0, cfg);
    } catch (const std::exception& e) {
      slot.failed = true;
      slot.error = e.what();
    }
  });

  std::int64_t best_converged = -1, best_any = -1;
  for (std::int64_t i = 0; i < n_starts; ++i) {
    const auto& slot = result.starts[static_cast<std::size_t>(i)];
    if (slot.failed) continue;
    if (best_any < 0 ||
        slot.fit->loglik > result.starts[static_cast<std::size_t>(best_any)].fit->loglik)
      best_any = i;
    if (slot.fit->converged &&
        (best_converged < 0 ||
         slot.fit->loglik > result.starts[static_cast<std::size_t>(best_converged)].fit->loglik))
      best_converged = i;
  }
  std::int64_t chosen = best_converged >= 0 ? best_converged : best_any;
  if (chosen < 0) {
    std::string first;
    std::int64_t failures = 0;
    for (const auto& slot : result.starts) {
      if (!slot.failed) continue;
      ++failures;
      if (first.empty()) first = slot.error;
    }
    throw DegenerateError("all " + std::to_string(failures) +
                          " EM starts failed; first error: " + first);
  }
  result.best = *result.starts[static_cast<std::size_t>(chosen)].fit;
  result.best_start = chosen;
  return result;
}

}  // namespace cbp
