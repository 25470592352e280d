#pragma once

#include <vector>

namespace cbp {

// Offspring law p_0..p_{s_max} of a single progenitor.
class OffspringDistribution {
 public:
  // Validates: at least two entries (s_max >= 1), entries in [0,1],
  // sum equal to 1 within 1e-12.
  explicit OffspringDistribution(std::vector<double> probs);

  const std::vector<double>& probs() const { return probs_; }
  double operator[](int k) const { return probs_[static_cast<std::size_t>(k)]; }
  int s_max() const { return static_cast<int>(probs_.size()) - 1; }

  double mean() const;
  double variance() const;

 private:
  std::vector<double> probs_;
};

}  // namespace cbp
