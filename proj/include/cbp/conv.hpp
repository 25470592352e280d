#pragma once

#include <cstdint>
#include <vector>

namespace cbp {

// Convolution powers of a finitely supported offspring law: row phi holds the
// pmf of the sum of phi i.i.d. offspring counts, for phi = 0..phi_max.
//
// Rows are stored scaled so that each row's largest entry is 1, with the true
// magnitude recovered through a per-row log scale; this keeps long products
// of small probabilities representable far past double underflow. Rows can be
// truncated to the first `width` support points. Truncation is prefix-exact:
// entries below `width` are identical to those of the untruncated table,
// because convolution against a nonnegative-support law never feeds back
// mass from higher indices.
class ConvPowers {
 public:
  // Truncated table: row phi covers x = 0..min(width, phi*s_max + 1) - 1.
  ConvPowers(const std::vector<double>& probs, std::int64_t phi_max, std::int64_t width);
  // Full-support table (width = phi_max * s_max + 1).
  ConvPowers(const std::vector<double>& probs, std::int64_t phi_max);

  std::int64_t phi_max() const { return static_cast<std::int64_t>(rows_.size()) - 1; }
  std::int64_t width() const { return width_; }
  int s_max() const { return s_max_; }

  // Probability mass at x in linear space; may over/underflow for extreme
  // rows, in which case prefer log_at / scaled_at.
  double at(std::int64_t phi, std::int64_t x) const;
  // Exact log mass, -infinity where the mass is zero.
  double log_at(std::int64_t phi, std::int64_t x) const;
  // Row-scaled mass: at(phi, x) = scaled_at(phi, x) * exp(log_scale(phi)).
  double scaled_at(std::int64_t phi, std::int64_t x) const;
  double log_scale(std::int64_t phi) const;
  // Direct view of a scaled row (for hot loops; indices beyond size are zero).
  const std::vector<double>& scaled_row(std::int64_t phi) const;
  // Linear-space sum of the stored row (equals 1 when the row is untruncated
  // and the base law is a proper pmf).
  double row_sum(std::int64_t phi) const;

 private:
  void check_phi(std::int64_t phi) const;

  int s_max_ = 0;
  std::int64_t width_ = 0;
  std::vector<std::vector<double>> rows_;
  std::vector<double> log_scale_;
};

}  // namespace cbp
