#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "doctest.h"

#include "cbp/bootstrap.hpp"
#include "cbp/errors.hpp"
#include "cbp/offspring.hpp"

using namespace cbp;

namespace {

EmFit make_fit(std::vector<double> p, double theta, ControlKind kind) {
  EmFit fit;
  fit.p = OffspringDistribution(std::move(p));
  fit.theta = theta;
  fit.m = fit.p.mean();
  fit.sigma2 = fit.p.variance();
  fit.mu = ControlFamily::mu_value(kind, theta);
  return fit;
}

std::vector<double> truth_of(const EmFit& fit) {
  auto t = fit.p.probs();
  t.push_back(fit.m);
  t.push_back(fit.sigma2);
  t.push_back(fit.mu);
  return t;
}

void check_mse_matches_replicates(const BootstrapSummary& s, const std::vector<double>& truth) {
  REQUIRE(s.mse.size() == truth.size());
  for (std::size_t j = 0; j < s.mse.size(); ++j) {
    double acc = 0.0;
    for (double v : s.replicates[j]) {
      double d = v - truth[j];
      acc += d * d;
    }
    CHECK(s.mse[j] == doctest::Approx(acc / static_cast<double>(s.n_success)).epsilon(1e-14));
  }
}

}  // namespace

TEST_CASE("scheme names round-trip") {
  CHECK(scheme_from_string("progenitors") == Scheme::progenitors);
  CHECK(scheme_from_string("sizes") == Scheme::sizes);
  CHECK(to_string(Scheme::progenitors) == "progenitors");
  CHECK(to_string(Scheme::sizes) == "sizes");
  CHECK_THROWS_AS(scheme_from_string("trees"), SchemaError);
}

TEST_CASE("progenitor-scheme bootstrap is reproducible and thread-independent") {
  auto fit = make_fit({0.1211, 0.2528, 0.3308, 0.2953}, 1.5552825552825553,
                      ControlKind::binomial);
  BootstrapConfig cfg;
  cfg.n_reps = 60;
  cfg.n_generations = 12;
  cfg.master_seed = 5;
  auto truth = truth_of(fit);

  auto a = bootstrap(fit, Scheme::progenitors, cfg, truth);
  cfg.n_threads = 3;
  auto b = bootstrap(fit, Scheme::progenitors, cfg, truth);
  CHECK(a.n_success == b.n_success);
  CHECK(a.n_extinct == b.n_extinct);
  REQUIRE(a.mse.size() == 7);
  for (std::size_t j = 0; j < a.mse.size(); ++j) CHECK(a.mse[j] == b.mse[j]);
  REQUIRE(a.replicates.size() == b.replicates.size());
  for (std::size_t j = 0; j < a.replicates.size(); ++j)
    CHECK(a.replicates[j] == b.replicates[j]);

  CHECK(a.n_success + a.n_failed == 60);
  CHECK(a.n_extinct <= a.n_failed);
  CHECK(a.n_success >= 1);
  CHECK(a.param_names ==
        std::vector<std::string>{"p0", "p1", "p2", "p3", "m", "sigma2", "mu"});
  for (const auto& series : a.replicates)
    CHECK(series.size() == static_cast<std::size_t>(a.n_success));
  check_mse_matches_replicates(a, truth);
}

TEST_CASE("a fresh master seed changes the replicate draws") {
  auto fit = make_fit({0.1211, 0.2528, 0.3308, 0.2953}, 1.5552825552825553,
                      ControlKind::binomial);
  BootstrapConfig cfg;
  cfg.n_reps = 40;
  cfg.n_generations = 10;
  cfg.master_seed = 5;
  auto truth = truth_of(fit);
  auto a = bootstrap(fit, Scheme::progenitors, cfg, truth);
  cfg.master_seed = 6;
  auto b = bootstrap(fit, Scheme::progenitors, cfg, truth);
  bool differs = a.n_success != b.n_success;
  if (!differs && a.n_success > 0) differs = a.replicates[0] != b.replicates[0];
  CHECK(differs);
}

TEST_CASE("extinct paths are excluded and counted") {
  // Supercritical but with a wide extinction window: p0 draws and phi = 0
  // both kill young paths, while survivors grow enough to re-fit.
  auto fit = make_fit({0.3, 0.0, 0.0, 0.7}, 4.0, ControlKind::binomial);
  BootstrapConfig cfg;
  cfg.n_reps = 60;
  cfg.n_generations = 5;
  cfg.master_seed = 11;
  auto truth = truth_of(fit);
  auto s = bootstrap(fit, Scheme::progenitors, cfg, truth);
  CHECK(s.n_success + s.n_failed == 60);
  CHECK(s.n_extinct >= 1);
  CHECK(s.n_extinct <= s.n_failed);
  CHECK(s.n_success >= 1);
  check_mse_matches_replicates(s, truth);
}

TEST_CASE("all-extinct bootstrap degenerates loudly") {
  auto fit = make_fit({1.0, 0.0}, 1.5, ControlKind::binomial);
  BootstrapConfig cfg;
  cfg.n_reps = 5;
  cfg.n_generations = 3;
  cfg.em.s_max = 1;
  CHECK_THROWS_AS(bootstrap(fit, Scheme::progenitors, cfg, truth_of(fit)), DegenerateError);
}

TEST_CASE("configuration validation") {
  auto fit = make_fit({0.5, 0.5}, 1.0, ControlKind::binomial);
  auto truth = truth_of(fit);
  BootstrapConfig cfg;
  cfg.em.s_max = 1;

  BootstrapConfig bad = cfg;
  bad.n_reps = 0;
  CHECK_THROWS_AS(bootstrap(fit, Scheme::progenitors, bad, truth), DomainError);
  bad = cfg;
  bad.n_generations = 0;
  CHECK_THROWS_AS(bootstrap(fit, Scheme::progenitors, bad, truth), DomainError);
  bad = cfg;
  bad.z0 = -1;
  CHECK_THROWS_AS(bootstrap(fit, Scheme::progenitors, bad, truth), DomainError);
  bad = cfg;
  bad.sizes_starts = 0;
  CHECK_THROWS_AS(bootstrap(fit, Scheme::sizes, bad, truth), DomainError);
  bad = cfg;
  bad.em.s_max = 3;  // does not match the generating fit
  CHECK_THROWS_AS(bootstrap(fit, Scheme::progenitors, bad, truth), DomainError);
  CHECK_THROWS_AS(bootstrap(fit, Scheme::progenitors, cfg, {1.0, 2.0}), DomainError);
}

TEST_CASE("efficiency ratios") {
  BootstrapSummary a, b;
  a.param_names = {"m", "mu", "p0"};
  b.param_names = {"m", "mu", "p0"};
  a.mse = {0.01, 0.0, 0.0};
  b.mse = {0.04, 0.5, 0.0};
  auto eff = efficiency(a, b);
  REQUIRE(eff.size() == 3);
  CHECK(eff[0] == doctest::Approx(4.0).epsilon(1e-14));  // b is four times worse
  CHECK(std::isinf(eff[1]));
  CHECK(eff[1] > 0);
  CHECK(eff[2] == doctest::Approx(1.0).epsilon(1e-14));  // both exact: a tie

  b.param_names = {"m", "mu"};
  CHECK_THROWS_AS(efficiency(a, b), DomainError);
}

TEST_CASE("sizes-scheme bootstrap smoke: reproducible across thread counts") {
  auto fit = make_fit({0.2, 0.2, 0.6}, 4.0, ControlKind::binomial);
  BootstrapConfig cfg;
  cfg.n_reps = 6;
  cfg.n_generations = 5;
  cfg.z0 = 3;
  cfg.sizes_starts = 2;
  cfg.em.s_max = 2;
  cfg.em.max_iters = 3000;
  cfg.master_seed = 7;
  auto truth = truth_of(fit);
  auto a = bootstrap(fit, Scheme::sizes, cfg, truth);
  cfg.n_threads = 2;
  auto b = bootstrap(fit, Scheme::sizes, cfg, truth);
  CHECK(a.n_success == b.n_success);
  REQUIRE(a.mse.size() == b.mse.size());
  for (std::size_t j = 0; j < a.mse.size(); ++j) CHECK(a.mse[j] == b.mse[j]);
  CHECK(a.n_success >= 1);
  CHECK(a.param_names == std::vector<std::string>{"p0", "p1", "p2", "m", "sigma2", "mu"});
}
