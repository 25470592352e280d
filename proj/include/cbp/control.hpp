#pragma once

#include <cstdint>
#include <string>
#include <utility>

#include "cbp/rng.hpp"

namespace cbp {

enum class ControlKind { binomial, poisson, negative_binomial };

std::string to_string(ControlKind kind);
ControlKind control_kind_from_string(const std::string& name);

// Power-series control law: P[phi(k) = j] = a_k(j) theta^j / A_k(theta) with
// A_k = A_1^k, so phi(k) is distributed as a sum of k iid copies of phi(1).
//   binomial:          phi(k) ~ Bin(k, q),  q = theta/(1+theta),  theta in (0,inf)
//   poisson:           phi(k) ~ Poisson(k theta),                 theta in (0,inf)
//   negative_binomial: phi(k) ~ NB(k, 1-theta) failures,          theta in (0,1)
class ControlFamily {
 public:
  ControlFamily(ControlKind kind, double theta);  // validates theta
  ControlKind kind() const { return kind_; }
  double theta() const { return theta_; }

  // Migration parameter mu(theta) = E[phi(1)] and its derivative.
  double mu() const;
  double mu_prime() const;
  // log A_1(theta); A_k = exp(k * log_A1).
  double log_A1() const;

  // pmf of phi(k) at j (k = 0 is the point mass at 0 for every family).
  double log_pmf(std::int64_t k, std::int64_t j) const;
  double pmf(std::int64_t k, std::int64_t j) const;

  // Smallest upper truncation point F with P[phi(k) <= F] >= 1 - tail when the
  // summation is representable, otherwise a conservative tail bound. Binomial
  // support is exact (F = k).
  std::int64_t phi_upper(std::int64_t k, double tail = 1e-12) const;

  std::int64_t sample_phi(std::int64_t k, Pcg32& rng) const;

  static double mu_value(ControlKind kind, double theta);
  static double mu_prime_value(ControlKind kind, double theta);
  // Inverse of mu; throws DomainError when x is outside mu's range for the
  // family (e.g. x >= 1 for binomial).
  static double mu_inverse(ControlKind kind, double x);
  static void validate_theta(ControlKind kind, double theta);

 private:
  ControlKind kind_;
  double theta_;
};

// Progenitor-count window [lo, hi] to sum over for a sizes-only transition
// z_l -> z_next with offspring support 0..s_max: lo is forced by feasibility
// (phi * s_max >= z_next), hi is the family's support bound (binomial) or its
// 1 - 1e-12 cumulative-mass truncation point (poisson, negative binomial),
// never below lo. Returns lo > hi when no feasible count exists.
std::pair<std::int64_t, std::int64_t> sizes_phi_range(const ControlFamily& family,
                                                      std::int64_t z_l, std::int64_t z_next,
                                                      int s_max);

}  // namespace cbp
