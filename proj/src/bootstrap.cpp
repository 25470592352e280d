#include "cbp/bootstrap.hpp"

#include <cmath>
#include <limits>

#include "cbp/errors.hpp"
#include "cbp/parallel.hpp"
#include "cbp/rng.hpp"
#include "cbp/simulate.hpp"

namespace cbp {

std::string to_string(Scheme scheme) {
  return scheme == Scheme::progenitors ? "progenitors" : "sizes";
}

Scheme scheme_from_string(const std::string& name) {
  if (name == "progenitors") return Scheme::progenitors;
  if (name == "sizes") return Scheme::sizes;
  throw SchemaError("unknown scheme '" + name + "' (expected progenitors or sizes)");
}

namespace {

enum class RepStatus { success, extinct, failed };

struct RepOutcome {
  RepStatus status = RepStatus::failed;
  std::vector<double> estimates;
};

std::vector<double> fit_params(const EmFit& fit) {
  std::vector<double> out = fit.p.probs();
  out.push_back(fit.m);
  out.push_back(fit.sigma2);
  out.push_back(fit.mu);
  return out;
}

}  // namespace

BootstrapSummary bootstrap(const EmFit& fit, Scheme scheme, const BootstrapConfig& cfg,
                           const std::vector<double>& truth) {
  if (cfg.n_reps < 1) throw DomainError("bootstrap needs n_reps >= 1");
  if (cfg.n_generations < 1) throw DomainError("bootstrap needs n_generations >= 1");
  if (cfg.z0 < 0) throw DomainError("bootstrap needs z0 >= 0");
  if (cfg.sizes_starts < 1) throw DomainError("bootstrap needs sizes_starts >= 1");
  if (cfg.em.s_max != fit.p.s_max())
    throw DomainError("bootstrap EM s_max must match the generating fit");
  int s_max = fit.p.s_max();
  std::size_t n_params = static_cast<std::size_t>(s_max) + 4;  // p0..ps, m, sigma2, mu
  if (truth.size() != n_params)
    throw DomainError("bootstrap truth vector length must be s_max + 4");
  ControlFamily family(cfg.em.kind, fit.theta);

  std::vector<RepOutcome> outcomes(static_cast<std::size_t>(cfg.n_reps));
  parallel_for(cfg.n_reps, resolve_threads(cfg.n_threads), [&](std::int64_t r) {
    std::uint64_t rep_master = derive_seed(cfg.master_seed, static_cast<std::uint64_t>(r));
    std::uint64_t sim_seed = derive_seed(rep_master, 0);
    std::uint64_t refit_seed = derive_seed(rep_master, 1);
    auto& outcome = outcomes[static_cast<std::size_t>(r)];
    FullTreeSample tree = simulate(fit.p, family, cfg.z0, cfg.n_generations, sim_seed);
    if (tree.sizes().back() == 0) {
      outcome.status = RepStatus::extinct;
      return;
    }
    try {
      EmFit refit = [&] {
        if (scheme == Scheme::progenitors) {
          std::vector<double> init_p(static_cast<std::size_t>(s_max) + 1,
                                     1.0 / (s_max + 1));
          return em_fit_progenitors(project_progenitors(tree), init_p, 0.5, cfg.em);
        }
        return multi_start(project_sizes(tree), cfg.sizes_starts, refit_seed, cfg.em, 1).best;
      }();
      outcome.estimates = fit_params(refit);
      outcome.status = RepStatus::success;
    } catch (const std::exception&) {
      outcome.status = RepStatus::failed;
    }
  });

  BootstrapSummary summary;
  for (int k = 0; k <= s_max; ++k) summary.param_names.push_back("p" + std::to_string(k));
  summary.param_names.push_back("m");
  summary.param_names.push_back("sigma2");
  summary.param_names.push_back("mu");
  summary.replicates.resize(n_params);
  for (const auto& outcome : outcomes) {
    if (outcome.status == RepStatus::success) {
      ++summary.n_success;
      for (std::size_t j = 0; j < n_params; ++j)
        summary.replicates[j].push_back(outcome.estimates[j]);
    } else {
      ++summary.n_failed;
      if (outcome.status == RepStatus::extinct) ++summary.n_extinct;
    }
  }
  if (summary.n_success == 0)
    throw DegenerateError("every bootstrap replicate was extinct or failed to re-fit");
  summary.mse.resize(n_params, 0.0);
  for (std::size_t j = 0; j < n_params; ++j) {
    double acc = 0.0;
    for (double v : summary.replicates[j]) {
      double d = v - truth[j];
      acc += d * d;
    }
    summary.mse[j] = acc / static_cast<double>(summary.n_success);
  }
  return summary;
}

std::vector<double> efficiency(const BootstrapSummary& a, const BootstrapSummary& b) {
  if (a.param_names != b.param_names)
    throw DomainError("efficiency needs summaries over the same parameters");
  std::vector<double> eff(a.mse.size());
  for (std::size_t j = 0; j < a.mse.size(); ++j) {
    if (a.mse[j] == 0.0)
      eff[j] = b.mse[j] == 0.0 ? 1.0 : std::numeric_limits<double>::infinity();
    else
      eff[j] = b.mse[j] / a.mse[j];
  }
  return eff;
}

}  // namespace cbp
