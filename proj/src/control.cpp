#include "cbp/control.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "cbp/errors.hpp"

namespace cbp {

namespace {
constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double lchoose(std::int64_t n, std::int64_t k) {
  if (k < 0 || k > n) return kNegInf;
  return std::lgamma(static_cast<double>(n) + 1.0) -
         std::lgamma(static_cast<double>(k) + 1.0) -
         std::lgamma(static_cast<double>(n - k) + 1.0);
}
}  // namespace

std::string to_string(ControlKind kind) {
  switch (kind) {
    case ControlKind::binomial: return "binomial";
    case ControlKind::poisson: return "poisson";
    case ControlKind::negative_binomial: return "negative_binomial";
  }
  return "unknown";
}

ControlKind control_kind_from_string(const std::string& name) {
  if (name == "binomial") return ControlKind::binomial;
  if (name == "poisson") return ControlKind::poisson;
  if (name == "negative_binomial" || name == "negative-binomial" || name == "negbin")
    return ControlKind::negative_binomial;
  throw SchemaError("unknown control family: " + name);
}

void ControlFamily::validate_theta(ControlKind kind, double theta) {
  if (!std::isfinite(theta) || theta <= 0.0)
    throw DomainError("control parameter theta must be finite and > 0 for the " +
                      to_string(kind) + " family");
  if (kind == ControlKind::negative_binomial && theta >= 1.0)
    throw DomainError("control parameter theta must be in (0,1) for the negative_binomial family");
}

ControlFamily::ControlFamily(ControlKind kind, double theta)
    : kind_(kind), theta_(theta) {
  validate_theta(kind, theta);
}

double ControlFamily::mu_value(ControlKind kind, double theta) {
  switch (kind) {
    case ControlKind::binomial: return theta / (1.0 + theta);
    case ControlKind::poisson: return theta;
    case ControlKind::negative_binomial: return theta / (1.0 - theta);
  }
  return 0.0;
}

double ControlFamily::mu_prime_value(ControlKind kind, double theta) {
  switch (kind) {
    case ControlKind::binomial: return 1.0 / ((1.0 + theta) * (1.0 + theta));
    case ControlKind::poisson: return 1.0;
    case ControlKind::negative_binomial: return 1.0 / ((1.0 - theta) * (1.0 - theta));
  }
  return 0.0;
}

double ControlFamily::mu_inverse(ControlKind kind, double x) {
  if (!std::isfinite(x) || x <= 0.0)
    throw DomainError("mu must be finite and > 0 to invert for the " + to_string(kind) +
                      " family");
  switch (kind) {
    case ControlKind::binomial:
      if (x >= 1.0)
        throw DomainError("mu >= 1 is outside the range of the binomial control family");
      return x / (1.0 - x);
    case ControlKind::poisson:
      return x;
    case ControlKind::negative_binomial:
      return x / (1.0 + x);
  }
  return 0.0;
}

double ControlFamily::mu() const { return mu_value(kind_, theta_); }
double ControlFamily::mu_prime() const { return mu_prime_value(kind_, theta_); }

double ControlFamily::log_A1() const {
  switch (kind_) {
    case ControlKind::binomial: return std::log1p(theta_);
    case ControlKind::poisson: return theta_;
    case ControlKind::negative_binomial: return -std::log1p(-theta_);
  }
  return 0.0;
}

double ControlFamily::log_pmf(std::int64_t k, std::int64_t j) const {
  if (k < 0 || j < 0) return kNegInf;
  if (k == 0) return j == 0 ? 0.0 : kNegInf;
  double kd = static_cast<double>(k);
  double jd = static_cast<double>(j);
  switch (kind_) {
    case ControlKind::binomial:
      if (j > k) return kNegInf;
      return lchoose(k, j) + jd * std::log(theta_) - kd * std::log1p(theta_);
    case ControlKind::poisson:
      return jd * std::log(kd * theta_) - kd * theta_ - std::lgamma(jd + 1.0);
    case ControlKind::negative_binomial:
      return lchoose(j + k - 1, j) + jd * std::log(theta_) + kd * std::log1p(-theta_);
  }
  return kNegInf;
}

double ControlFamily::pmf(std::int64_t k, std::int64_t j) const {
  double lp = log_pmf(k, j);
  return lp == kNegInf ? 0.0 : std::exp(lp);
}

std::int64_t ControlFamily::phi_upper(std::int64_t k, double tail) const {
  if (k <= 0) return 0;
  if (kind_ == ControlKind::binomial) return k;
  double mean, sd;
  if (kind_ == ControlKind::poisson) {
    mean = static_cast<double>(k) * theta_;
    sd = std::sqrt(mean);
  } else {
    mean = static_cast<double>(k) * theta_ / (1.0 - theta_);
    sd = std::sqrt(static_cast<double>(k) * theta_) / (1.0 - theta_);
  }
  // Exact leading-term summation when pmf(k, 0) is representable.
  if (log_pmf(k, 0) > -700.0) {
    double pr = pmf(k, 0);
    double cum = pr;
    std::int64_t j = 0;
    std::int64_t hard_cap = static_cast<std::int64_t>(mean + 50.0 * sd) + 1000;
    while (cum < 1.0 - tail && j < hard_cap) {
      ++j;
      double jd = static_cast<double>(j);
      if (kind_ == ControlKind::poisson)
        pr *= mean / jd;
      else
        pr *= theta_ * (static_cast<double>(k) + jd - 1.0) / jd;
      cum += pr;
    }
    return j;
  }
  // Conservative bound: mass beyond mean + 12 sd + 50 is far below any tail
  // tolerance used here.
  return static_cast<std::int64_t>(std::ceil(mean + 12.0 * sd)) + 50;
}

std::pair<std::int64_t, std::int64_t> sizes_phi_range(const ControlFamily& family,
                                                      std::int64_t z_l, std::int64_t z_next,
                                                      int s_max) {
  if (z_l < 0 || z_next < 0) throw DomainError("generation sizes must be nonnegative");
  if (s_max < 1) throw DomainError("sizes_phi_range needs s_max >= 1");
  std::int64_t lo =
      z_next > 0 ? (z_next + static_cast<std::int64_t>(s_max) - 1) / s_max : 0;
  std::int64_t hi;
  if (family.kind() == ControlKind::binomial)
    hi = z_l;
  else
    hi = std::max(family.phi_upper(z_l), lo);
  return {lo, hi};
}

std::int64_t ControlFamily::sample_phi(std::int64_t k, Pcg32& rng) const {
  if (k < 0) throw DomainError("control sampling needs population size >= 0");
  if (k == 0) return 0;
  switch (kind_) {
    case ControlKind::binomial:
      return sample_binomial(k, theta_ / (1.0 + theta_), rng);
    case ControlKind::poisson:
      return sample_poisson(static_cast<double>(k) * theta_, rng);
    case ControlKind::negative_binomial:
      return sample_negative_binomial(k, theta_, rng);
  }
  return 0;
}

}  // namespace cbp
