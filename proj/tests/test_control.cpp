#include <cmath>
#include <vector>

#include "doctest.h"

#include "cbp/control.hpp"
#include "cbp/errors.hpp"

using namespace cbp;

TEST_CASE("kind name round-trip") {
  for (auto kind : {ControlKind::binomial, ControlKind::poisson, ControlKind::negative_binomial})
    CHECK(control_kind_from_string(to_string(kind)) == kind);
  CHECK_THROWS_AS(control_kind_from_string("geometric"), SchemaError);
}

TEST_CASE("theta domains") {
  CHECK_THROWS_AS(ControlFamily(ControlKind::binomial, 0.0), DomainError);
  CHECK_THROWS_AS(ControlFamily(ControlKind::binomial, -1.0), DomainError);
  CHECK_THROWS_AS(ControlFamily(ControlKind::poisson, 0.0), DomainError);
  CHECK_THROWS_AS(ControlFamily(ControlKind::negative_binomial, 1.0), DomainError);
  CHECK_THROWS_AS(ControlFamily(ControlKind::negative_binomial, 0.0), DomainError);
  CHECK_NOTHROW(ControlFamily(ControlKind::binomial, 1e6));
  CHECK_NOTHROW(ControlFamily(ControlKind::negative_binomial, 0.999));
}

TEST_CASE("binomial control pmf: P[phi(1)=1] = q = theta/(1+theta)") {
  ControlFamily f(ControlKind::binomial, 1.5);  // q = 0.6
  CHECK(f.pmf(1, 1) == doctest::Approx(0.6).epsilon(1e-12));
  CHECK(f.pmf(1, 0) == doctest::Approx(0.4).epsilon(1e-12));
  CHECK(f.pmf(2, 1) == doctest::Approx(2 * 0.6 * 0.4).epsilon(1e-12));
  CHECK(f.pmf(2, 3) == 0.0);  // beyond binomial support
  CHECK(f.mu() == doctest::Approx(0.6).epsilon(1e-12));
}

TEST_CASE("poisson control pmf: P[phi(3)=0] = exp(-3*theta)") {
  ControlFamily f(ControlKind::poisson, 2.0);
  CHECK(f.pmf(3, 0) == doctest::Approx(std::exp(-6.0)).epsilon(1e-12));
  CHECK(f.pmf(3, 2) == doctest::Approx(std::exp(-6.0) * 36.0 / 2.0).epsilon(1e-12));
  CHECK(f.mu() == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("negative binomial control pmf") {
  ControlFamily f(ControlKind::negative_binomial, 0.4);
  // P[NB(k=2 successes) counts j=3 failures] = C(4,3) 0.4^3 0.6^2
  CHECK(f.pmf(2, 3) == doctest::Approx(4 * 0.064 * 0.36).epsilon(1e-12));
  CHECK(f.pmf(1, 0) == doctest::Approx(0.6).epsilon(1e-12));
  CHECK(f.mu() == doctest::Approx(0.4 / 0.6).epsilon(1e-12));
}

TEST_CASE("phi(k) is a k-fold iid sum: pmf equals self-convolution") {
  for (auto kind : {ControlKind::binomial, ControlKind::poisson, ControlKind::negative_binomial}) {
    double theta = kind == ControlKind::negative_binomial ? 0.35 : 0.8;
    ControlFamily f(kind, theta);
    std::int64_t top = f.phi_upper(3) + 3;
    for (std::int64_t j = 0; j <= 12; ++j) {
      double conv = 0.0;
      for (std::int64_t i = 0; i <= j; ++i) conv += f.pmf(1, i) * f.pmf(2, j - i);
      CHECK(f.pmf(3, j) == doctest::Approx(conv).epsilon(1e-10));
    }
    // mass sums to ~1 over the truncation window
    double total = 0.0;
    for (std::int64_t j = 0; j <= top; ++j) total += f.pmf(3, j);
    CHECK(total == doctest::Approx(1.0).epsilon(1e-9));
  }
}

TEST_CASE("phi(0) is the point mass at zero") {
  for (auto kind : {ControlKind::binomial, ControlKind::poisson, ControlKind::negative_binomial}) {
    ControlFamily f(kind, 0.5);
    CHECK(f.pmf(0, 0) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(f.pmf(0, 3) == 0.0);
  }
}

TEST_CASE("mu matches a central finite difference of the pmf mean") {
  for (auto kind : {ControlKind::binomial, ControlKind::poisson, ControlKind::negative_binomial}) {
    double theta = kind == ControlKind::negative_binomial ? 0.45 : 1.2;
    ControlFamily f(kind, theta);
    std::int64_t top = f.phi_upper(1) + 8;
    double mean = 0.0;
    for (std::int64_t j = 0; j <= top; ++j) mean += static_cast<double>(j) * f.pmf(1, j);
    CHECK(f.mu() == doctest::Approx(mean).epsilon(1e-8));

    double h = 1e-6;
    double up = ControlFamily::mu_value(kind, theta + h);
    double dn = ControlFamily::mu_value(kind, theta - h);
    CHECK(f.mu_prime() == doctest::Approx((up - dn) / (2 * h)).epsilon(1e-6));
  }
}

TEST_CASE("mu_inverse round-trips and rejects out-of-range values") {
  for (auto kind : {ControlKind::binomial, ControlKind::poisson, ControlKind::negative_binomial}) {
    for (double theta : {0.2, 0.55, 0.9}) {
      double mu = ControlFamily::mu_value(kind, theta);
      CHECK(ControlFamily::mu_inverse(kind, mu) == doctest::Approx(theta).epsilon(1e-12));
    }
  }
  CHECK_THROWS_AS(ControlFamily::mu_inverse(ControlKind::binomial, 1.0), DomainError);
  CHECK_THROWS_AS(ControlFamily::mu_inverse(ControlKind::binomial, 1.3), DomainError);
  CHECK_THROWS_AS(ControlFamily::mu_inverse(ControlKind::poisson, 0.0), DomainError);
  CHECK_THROWS_AS(ControlFamily::mu_inverse(ControlKind::negative_binomial, 0.0), DomainError);
  CHECK_NOTHROW(ControlFamily::mu_inverse(ControlKind::poisson, 5.0));
  CHECK_NOTHROW(ControlFamily::mu_inverse(ControlKind::negative_binomial, 5.0));
}

TEST_CASE("log_A1 ties the pmf normalization together") {
  // P[phi(1)=j] = a(j) theta^j / A_1(theta) with a(j) the family's base weights;
  // at j=0, a(0)=1 for every family, so pmf(1,0) = exp(-log_A1).
  for (auto kind : {ControlKind::binomial, ControlKind::poisson, ControlKind::negative_binomial}) {
    double theta = kind == ControlKind::negative_binomial ? 0.3 : 2.5;
    ControlFamily f(kind, theta);
    CHECK(f.pmf(1, 0) == doctest::Approx(std::exp(-f.log_A1())).epsilon(1e-12));
  }
}

TEST_CASE("phi_upper: exact binomial support, mass-covering truncation otherwise") {
  ControlFamily b(ControlKind::binomial, 1.5);
  CHECK(b.phi_upper(7) == 7);
  for (auto kind : {ControlKind::poisson, ControlKind::negative_binomial}) {
    ControlFamily f(kind, kind == ControlKind::poisson ? 2.0 : 0.45);
    std::int64_t hi = f.phi_upper(5);
    double tail_mass = 0.0;
    for (std::int64_t j = 0; j <= hi; ++j) tail_mass += f.pmf(5, j);
    CHECK(tail_mass >= 1.0 - 1e-11);
  }
}

TEST_CASE("sizes_phi_range: feasibility floor and family ceiling") {
  ControlFamily b(ControlKind::binomial, 1.0);
  auto [lo, hi] = sizes_phi_range(b, 5, 7, 3);
  CHECK(lo == 3);  // ceil(7/3)
  CHECK(hi == 5);  // at most z_l progenitors under binomial control
  auto [lo0, hi0] = sizes_phi_range(b, 4, 0, 3);
  CHECK(lo0 == 0);
  CHECK(hi0 == 4);
  auto [lo_inf, hi_inf] = sizes_phi_range(b, 1, 9, 3);  // needs phi >= 3 > z_l
  CHECK(lo_inf > hi_inf);

  ControlFamily pois(ControlKind::poisson, 0.4);
  auto [plo, phi_hi] = sizes_phi_range(pois, 2, 11, 2);
  CHECK(plo == 6);
  CHECK(phi_hi >= plo);  // unbounded support: ceiling comes from mass truncation

  CHECK_THROWS_AS(sizes_phi_range(b, -1, 0, 3), DomainError);
  CHECK_THROWS_AS(sizes_phi_range(b, 1, 1, 0), DomainError);
}

TEST_CASE("sample_phi respects the support and the mean") {
  Pcg32 rng(123);
  ControlFamily b(ControlKind::binomial, 1.5);
  double sum = 0.0;
  const int n = 20000;
  for (int i = 0; i < n; ++i) {
    auto v = b.sample_phi(12, rng);
    CHECK(v >= 0);
    CHECK(v <= 12);
    sum += static_cast<double>(v);
  }
  CHECK(sum / n == doctest::Approx(12 * 0.6).epsilon(0.01));
  CHECK(b.sample_phi(0, rng) == 0);
}
