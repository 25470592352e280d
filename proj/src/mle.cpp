#include "cbp/mle.hpp"

#include <cmath>

#include "cbp/errors.hpp"

namespace cbp {

CompleteMle estimate(const FullTreeSample& sample, ControlKind kind) {
  int n = sample.n();
  int s = sample.s_max();
  std::int64_t delta = sample.Delta(n - 1);
  std::int64_t y_prev = sample.Y(n - 1);
  std::int64_t y_all = sample.Y(n);
  if (delta <= 0)
    throw DegenerateError("sample is extinct before observation: no progenitors recorded");
  if (y_prev <= 0) throw DegenerateError("sample has no population mass before generation n");

  std::vector<double> p(static_cast<std::size_t>(s) + 1);
  for (int k = 0; k <= s; ++k)
    p[static_cast<std::size_t>(k)] =
        static_cast<double>(sample.Yk(n - 1, k)) / static_cast<double>(delta);
  OffspringDistribution p_hat(p);

  double mu_hat = static_cast<double>(delta) / static_cast<double>(y_prev);
  double theta_hat = ControlFamily::mu_inverse(kind, mu_hat);
  double m_hat = static_cast<double>(y_all - sample.z0()) / static_cast<double>(delta);
  double tau_hat = static_cast<double>(y_all - sample.z0()) / static_cast<double>(y_prev);

  double sigma2 = 0.0;
  for (int k = 0; k <= s; ++k) {
    double d = static_cast<double>(k) - m_hat;
    sigma2 += d * d * p_hat[k];
  }
  return CompleteMle{kind, p_hat, m_hat, sigma2, mu_hat, theta_hat, tau_hat};
}

CompleteCis confidence_intervals(const CompleteMle& mle, const FullTreeSample& sample,
                                 double level) {
  if (!(level > 0.0 && level < 1.0))
    throw DomainError("confidence level must be inside (0,1)");
  int n = sample.n();
  double delta = static_cast<double>(sample.Delta(n - 1));
  double y_prev = static_cast<double>(sample.Y(n - 1));
  double z = normal_quantile(1.0 - (1.0 - level) / 2.0);

  CompleteCis cis;
  cis.level = level;
  int s = mle.p_hat.s_max();
  for (int k = 0; k <= s; ++k) {
    double pk = mle.p_hat[k];
    double half = z * std::sqrt(pk * (1.0 - pk) / delta);
    cis.p.push_back({pk - half, pk + half});
  }
  {
    double half = z * std::sqrt(mle.sigma2_hat / delta);
    cis.m = {mle.m_hat - half, mle.m_hat + half};
  }
  {
    // Plug-in variance of (X - m)^2: fourth central moment minus sigma^4.
    double m4 = 0.0;
    for (int k = 0; k <= s; ++k) {
      double d = static_cast<double>(k) - mle.m_hat;
      m4 += d * d * d * d * mle.p_hat[k];
    }
    double v = m4 - mle.sigma2_hat * mle.sigma2_hat;
    double half = z * std::sqrt(std::max(v, 0.0) / delta);
    cis.sigma2 = {mle.sigma2_hat - half, mle.sigma2_hat + half};
  }
  double tmp = mle.theta_hat * ControlFamily::mu_prime_value(mle.kind, mle.theta_hat);
  {
    double half = z * std::sqrt(tmp / y_prev);
    cis.mu = {mle.mu_hat - half, mle.mu_hat + half};
  }
  {
    double v = mle.sigma2_hat * mle.mu_hat + mle.m_hat * mle.m_hat * tmp;
    double half = z * std::sqrt(v / y_prev);
    cis.tau = {mle.tau_hat - half, mle.tau_hat + half};
  }
  return cis;
}

namespace {
// Acklam's rational approximation to the standard normal quantile.
double quantile_seed(double p) {
  static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                             -2.759285104469687e+02, 1.383577518672690e+02,
                             -3.066479806614716e+01, 2.506628277459239e+00};
  static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                             -1.556989798598866e+02, 6.680131188771972e+01,
                             -1.328068155288572e+01};
  static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                             -2.400758277161838e+00, -2.549732539343734e+00,
                             4.374664141464968e+00,  2.938163982698783e+00};
  static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                             2.445134137142996e+00, 3.754408661907416e+00};
  const double plow = 0.02425;
  if (p < plow) {
    double q = std::sqrt(-2.0 * std::log(p));
    return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
           ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  if (p > 1.0 - plow) {
    double q = std::sqrt(-2.0 * std::log(1.0 - p));
    return -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
           ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  double q = p - 0.5;
  double r = q * q;
  return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
         (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
}
}  // namespace

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

double normal_quantile(double prob) {
  if (!(prob > 0.0 && prob < 1.0))
    throw DomainError("normal quantile needs a probability inside (0,1)");
  double x = quantile_seed(prob);
  // One Halley refinement against the exact cdf.
  static const double inv_sqrt2pi = 0.3989422804014327;
  double e = normal_cdf(x) - prob;
  double u = e / (inv_sqrt2pi * std::exp(-x * x / 2.0));
  x -= u / (1.0 + x * u / 2.0);
  return x;
}

}  // namespace cbp
