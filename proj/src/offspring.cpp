#include "cbp/offspring.hpp"

#include <cmath>
#include <utility>

#include "cbp/errors.hpp"

namespace cbp {

OffspringDistribution::OffspringDistribution(std::vector<double> probs)
    : probs_(std::move(probs)) {
  if (probs_.size() < 2)
    throw DomainError("offspring distribution needs s_max >= 1 (at least two entries)");
  double sum = 0.0;
  for (double p : probs_) {
    if (!(p >= 0.0 && p <= 1.0 + 1e-12) || !std::isfinite(p))
      throw DomainError("offspring probabilities must lie in [0,1]");
    sum += p;
  }
  if (std::fabs(sum - 1.0) > 1e-12)
    throw DomainError("offspring probabilities must sum to 1 (within 1e-12)");
}

double OffspringDistribution::mean() const {
  double m = 0.0;
  for (std::size_t k = 1; k < probs_.size(); ++k) m += static_cast<double>(k) * probs_[k];
  return m;
}

double OffspringDistribution::variance() const {
  double m = mean();
  double v = 0.0;
  for (std::size_t k = 0; k < probs_.size(); ++k) {
    double d = static_cast<double>(k) - m;
    v += d * d * probs_[k];
  }
  return v;
}

}  // namespace cbp
