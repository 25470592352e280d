#pragma once

#include <vector>

#include "cbp/control.hpp"
#include "cbp/offspring.hpp"
#include "cbp/sample.hpp"

namespace cbp {

// Closed-form complete-data maximum-likelihood estimates.
struct CompleteMle {
  ControlKind kind;
  OffspringDistribution p_hat;
  double m_hat;
  double sigma2_hat;
  double mu_hat;
  double theta_hat;
  double tau_hat;  // = m_hat * mu_hat
};

// p_hat_k = Y_{n-1}(k)/Delta_{n-1},  mu_hat = Delta_{n-1}/Y_{n-1},
// theta_hat = mu^{-1}(mu_hat),  m_hat = (Y_n - Z_0)/Delta_{n-1},
// sigma2_hat = sum (k - m_hat)^2 p_hat_k,  tau_hat = (Y_n - Z_0)/Y_{n-1}.
CompleteMle estimate(const FullTreeSample& sample, ControlKind kind);

struct Interval {
  double lo;
  double hi;
};

struct CompleteCis {
  double level;
  std::vector<Interval> p;  // one per offspring category
  Interval m, sigma2, mu, tau;
};

// Asymptotic intervals at the given level (e.g. 0.95).
CompleteCis confidence_intervals(const CompleteMle& mle, const FullTreeSample& sample,
                                 double level);

// Standard normal quantile (inverse cdf). Rational approximation refined by a
// Halley step against erfc; absolute error well below 1e-8.
double normal_quantile(double prob);
double normal_cdf(double x);

}  // namespace cbp
