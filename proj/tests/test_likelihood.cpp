#include <cmath>
#include <functional>
#include <vector>

#include "doctest.h"

#include "cbp/control.hpp"
#include "cbp/em.hpp"
#include "cbp/errors.hpp"
#include "cbp/likelihood.hpp"
#include "cbp/sample.hpp"
#include "test_util.hpp"

using namespace cbp;

TEST_CASE("closed-form chains") {
  // certain extinction: p0 = 1 makes 1 -> 0 a probability-one event
  SizesSample dead{{1, 0}};
  ControlFamily f(ControlKind::binomial, 1.0);
  CHECK(loglik_sizes(dead, OffspringDistribution({1.0, 0.0}), f) ==
        doctest::Approx(0.0).epsilon(1e-14));

  // 1 -> 1 with p1 = 1: the only uncertainty is phi = 1, probability q = 1/2
  SizesSample unit{{1, 1}};
  CHECK(loglik_sizes(unit, OffspringDistribution({0.0, 1.0}), f) ==
        doctest::Approx(std::log(0.5)).epsilon(1e-13));
  ProgenitorSample unit_prog{{1, 1}, {1}};
  CHECK(loglik_progenitors(unit_prog, OffspringDistribution({0.0, 1.0}), f) ==
        doctest::Approx(std::log(0.5)).epsilon(1e-13));
}

TEST_CASE("hand-enumerated chain: (2, 2, 1), uniform offspring on {0,1,2}") {
  OffspringDistribution p({1.0 / 3, 1.0 / 3, 1.0 / 3});
  ControlFamily f(ControlKind::binomial, 1.0);  // q = 1/2

  // P(2 -> 2) = 2q(1-q)*p(2 via 1) + q^2*p(2 via 2) = 1/6 + 1/12 = 1/4
  // P(2 -> 1) = 1/6 + 1/18 = 2/9
  SizesSample sz{{2, 2, 1}};
  CHECK(loglik_sizes(sz, p, f) == doctest::Approx(std::log(1.0 / 18)).epsilon(1e-13));

  // with observed progenitor counts phi = (2, 1)
  ProgenitorSample prog{{2, 2, 1}, {2, 1}};
  CHECK(loglik_progenitors(prog, p, f) == doctest::Approx(std::log(1.0 / 72)).epsilon(1e-13));
}

TEST_CASE("impossible transitions return -inf and name the generation") {
  OffspringDistribution p({0.0, 1.0});  // exactly one child per progenitor
  ControlFamily f(ControlKind::binomial, 1.0);
  SizesSample sz{{1, 1, 2}};  // 1 -> 2 impossible when s_max = 1
  std::int64_t offending = -1;
  double ll = loglik_sizes(sz, p, f, &offending);
  CHECK(std::isinf(ll));
  CHECK(ll < 0);
  CHECK(offending == 1);

  ProgenitorSample prog{{2, 2}, {1}};  // one progenitor cannot make two
  offending = -1;
  CHECK(std::isinf(loglik_progenitors(prog, p, f, &offending)));
  CHECK(offending == 0);

  // zero-probability category rather than infeasible count: offspring come
  // in pairs, so an odd total is unreachable even though 3 < 2 * s_max
  OffspringDistribution pairs({0.5, 0.0, 0.5});
  SizesSample odd{{2, 3}};
  offending = -1;
  CHECK(std::isinf(loglik_sizes(odd, pairs, ControlFamily(ControlKind::poisson, 1.0),
                                &offending)));
  CHECK(offending == 0);

  // extinction stays reachable through the control even when p_0 = 0: the
  // only surviving term is phi = 0, so the likelihood is P[phi(2) = 0]
  OffspringDistribution no_zero({0.0, 0.5, 0.5});
  SizesSample ext{{2, 0}};
  double ll_ext = loglik_sizes(ext, no_zero, ControlFamily(ControlKind::poisson, 1.0));
  CHECK(ll_ext == doctest::Approx(-2.0).epsilon(1e-12));
}

TEST_CASE("sizes likelihood marginalizes the progenitor likelihood") {
  // exp(loglik_sizes) = sum over phi paths of exp(loglik_progenitors)
  OffspringDistribution p({0.3, 0.45, 0.25});
  for (auto kind : {ControlKind::binomial, ControlKind::poisson,
                    ControlKind::negative_binomial}) {
    ControlFamily f(kind, kind == ControlKind::negative_binomial ? 0.45 : 1.3);
    for (const std::vector<std::int64_t>& z :
         {std::vector<std::int64_t>{2, 3, 1}, {1, 2, 4}, {3, 2, 0}, {2, 4, 3}}) {
      SizesSample sz{z};
      double target = loglik_sizes(sz, p, f);

      std::function<double(std::size_t, double)> walk = [&](std::size_t l,
                                                            double acc) -> double {
        if (l + 1 == z.size()) return std::exp(acc);
        auto [lo, hi] = sizes_phi_range(f, z[l], z[l + 1], p.s_max());
        double total = 0.0;
        for (std::int64_t phi = lo; phi <= hi; ++phi) {
          ProgenitorSample step{{z[l], z[l + 1]}, {phi}};
          double term = loglik_progenitors(step, p, f);
          if (std::isinf(term)) continue;
          total += walk(l + 1, acc + term);
        }
        return total;
      };
      double marginal = walk(0, 0.0);
      CHECK(std::exp(target) == doctest::Approx(marginal).epsilon(1e-10));
    }
  }
}

TEST_CASE("likelihood of the frozen tree at its own fit") {
  auto tree = test_util::load_tree();
  auto prog = project_progenitors(tree);
  EmConfig cfg;
  auto fit = em_fit_progenitors(prog, {0.25, 0.25, 0.25, 0.25}, 0.5, cfg);
  ControlFamily f(ControlKind::binomial, fit.theta);
  CHECK(loglik_progenitors(prog, fit.p, f) == doctest::Approx(fit.loglik).epsilon(1e-12));
  CHECK(std::abs(fit.loglik - (-166.2663)) < 1e-3);
}

TEST_CASE("small-sample AIC reproduces the reference model-selection table") {
  // twelve (loglik, aic) pairs at k = s_max + 1, n_obs = 61
  struct Row {
    double ll, aic;
    int k;
  };
  const Row rows[] = {
      {-166.2663, 341.2469, 4}, {-164.8032, 340.6973, 5}, {-164.8032, 343.1620, 6},
      {-164.8032, 345.7196, 7}, {-176.1572, 361.0288, 4}, {-174.6942, 360.4792, 5},
      {-174.6942, 362.9439, 6}, {-174.6942, 365.5015, 7}, {-170.9058, 350.5259, 4},
      {-169.4427, 349.9763, 5}, {-169.4427, 352.4410, 6}, {-169.4427, 354.9986, 7},
  };
  for (const auto& r : rows) CHECK(std::abs(aic(r.ll, r.k, 61) - r.aic) < 1e-3);
}

TEST_CASE("AIC formulas and domain checks") {
  CHECK(aic_plain(-10.0, 3) == doctest::Approx(26.0).epsilon(1e-12));
  CHECK(aic_plain(-10.0, 0) == doctest::Approx(20.0).epsilon(1e-12));
  // correction term 2k(n)/(n-k-1)
  CHECK(aic(-10.0, 3, 10) == doctest::Approx(20.0 + 2.0 * 3 * 10 / 6.0).epsilon(1e-12));
  CHECK(aic(-10.0, 3, 5) == doctest::Approx(20.0 + 2.0 * 3 * 5 / 1.0).epsilon(1e-12));
  CHECK_THROWS_AS(aic(-10.0, 3, 4), DomainError);   // n_obs must exceed k + 1
  CHECK_THROWS_AS(aic(-10.0, -1, 10), DomainError);
  CHECK_THROWS_AS(aic_plain(-10.0, -1), DomainError);
}

TEST_CASE("progenitor-scheme scan ranks the true family first") {
  auto tree = test_util::load_tree();
  auto prog = project_progenitors(tree);
  EmConfig cfg;
  std::vector<ControlKind> fams{ControlKind::binomial, ControlKind::negative_binomial,
                                ControlKind::poisson};
  auto res = scan_progenitors(prog, fams, {3, 4}, cfg);
  REQUIRE(res.cells.size() == 6);
  REQUIRE(res.best_index >= 0);
  const auto& best = res.cells[static_cast<std::size_t>(res.best_index)];
  CHECK(best.kind == ControlKind::binomial);
  CHECK(best.s_max == 4);
  // cells arrive s_max-major in the requested family order
  CHECK(res.cells[0].kind == ControlKind::binomial);
  CHECK(res.cells[0].s_max == 3);
  CHECK(res.cells[1].kind == ControlKind::negative_binomial);
  CHECK(res.cells[3].s_max == 4);
  for (const auto& cell : res.cells) {
    REQUIRE_FALSE(cell.failed);
    CHECK(cell.fit.has_value());
    CHECK(std::isfinite(cell.aic));
  }
  // per-row minimum is the binomial column
  CHECK(res.cells[0].aic < res.cells[1].aic);
  CHECK(res.cells[0].aic < res.cells[2].aic);
  CHECK(res.cells[3].aic < res.cells[4].aic);
  CHECK(res.cells[3].aic < res.cells[5].aic);
  CHECK_THROWS_AS(scan_progenitors(prog, {}, {3}, cfg), DomainError);
  CHECK_THROWS_AS(scan_progenitors(prog, fams, {}, cfg), DomainError);
}

TEST_CASE("sizes-scheme scan is reproducible across thread counts") {
  SizesSample sz{{1, 2, 2, 4, 3}};
  EmConfig cfg;
  cfg.s_max = 2;
  cfg.max_iters = 20000;
  std::vector<ControlKind> fams{ControlKind::binomial, ControlKind::poisson};
  auto a = scan_sizes(sz, fams, {2}, cfg, 4, 7, false, 1);
  auto b = scan_sizes(sz, fams, {2}, cfg, 4, 7, false, 2);
  REQUIRE(a.cells.size() == 2);
  CHECK(a.best_index == b.best_index);
  for (std::size_t i = 0; i < a.cells.size(); ++i) {
    CHECK(a.cells[i].loglik == b.cells[i].loglik);
    CHECK(a.cells[i].aic == b.cells[i].aic);
  }
}
