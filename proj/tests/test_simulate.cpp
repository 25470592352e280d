#include <cmath>

#include "doctest.h"

#include "cbp/control.hpp"
#include "cbp/offspring.hpp"
#include "cbp/sample.hpp"
#include "cbp/simulate.hpp"

using namespace cbp;

namespace {
const OffspringDistribution kP({0.10838916108389161, 0.2708729127087291,
                                0.33856614338566143, 0.28217178282171784});
}

TEST_CASE("simulation is a pure function of the seed") {
  ControlFamily f(ControlKind::binomial, 1.5);
  auto a = simulate(kP, f, 1, 30, 42);
  auto b = simulate(kP, f, 1, 30, 42);
  CHECK(a.counts() == b.counts());
  auto c = simulate(kP, f, 1, 30, 43);
  CHECK(a.counts() != c.counts());
}

TEST_CASE("structural invariants hold on every path") {
  for (auto kind : {ControlKind::binomial, ControlKind::poisson, ControlKind::negative_binomial}) {
    double theta = kind == ControlKind::negative_binomial ? 0.35 : 1.5;
    ControlFamily f(kind, theta);
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      auto tree = simulate(kP, f, 2, 12, seed);
      CHECK(tree.n() == 12);
      auto prog = project_progenitors(tree);
      CHECK_NOTHROW(prog.validate_for(kind, 3));
      // extinction is absorbing
      auto z = tree.sizes();
      for (std::size_t l = 0; l + 1 < z.size(); ++l)
        if (z[l] == 0) CHECK(z[l + 1] == 0);
    }
  }
}

TEST_CASE("an empty starting generation stays empty") {
  ControlFamily f(ControlKind::binomial, 1.5);
  auto tree = simulate(kP, f, 0, 5, 7);
  for (auto z : tree.sizes()) CHECK(z == 0);
  for (const auto& row : tree.counts())
    for (auto c : row) CHECK(c == 0);
}

TEST_CASE("one-step mean matches tau = m * mu") {
  // E[Z_1 | Z_0 = z0] = z0 * mu(theta) * m for every family.
  const std::int64_t z0 = 30;
  for (auto kind : {ControlKind::binomial, ControlKind::poisson, ControlKind::negative_binomial}) {
    double theta = kind == ControlKind::negative_binomial ? 0.375 : 1.5;
    ControlFamily f(kind, theta);
    double tau = kP.mean() * f.mu();
    double sum = 0.0;
    const int reps = 4000;
    for (int r = 0; r < reps; ++r) {
      auto tree = simulate(kP, f, z0, 1, 1000 + static_cast<std::uint64_t>(r));
      sum += static_cast<double>(tree.sizes()[1]);
    }
    double mean = sum / reps;
    double expected = static_cast<double>(z0) * tau;
    // se of the mean is ~sqrt(z0 * var)/sqrt(reps); keep a wide 5-sigma band
    CHECK(std::abs(mean - expected) < 0.06 * expected);
  }
}

TEST_CASE("progenitor counts respect the control support") {
  ControlFamily b(ControlKind::binomial, 0.8);
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    auto tree = simulate(kP, b, 3, 10, seed);
    auto z = tree.sizes();
    auto phi = tree.phis();
    for (std::size_t l = 0; l < phi.size(); ++l) CHECK(phi[l] <= z[l]);
  }
}
