#pragma once

#include <cstdint>
#include <vector>

#include "cbp/control.hpp"

namespace cbp {

// Full family tree up to generation n: the counts z_l(k) of generation-l
// progenitors with exactly k offspring, l = 0..n-1, k = 0..s_max.
// Generation sizes and progenitor counts are derived columns:
//   phi_l = sum_k z_l(k),  Z_{l+1} = sum_k k z_l(k),  Z_0 = z0.
class FullTreeSample {
 public:
  FullTreeSample(std::int64_t z0, std::vector<std::vector<std::int64_t>> counts);

  std::int64_t z0() const { return z0_; }
  const std::vector<std::vector<std::int64_t>>& counts() const { return counts_; }
  int n() const { return static_cast<int>(counts_.size()); }
  int s_max() const { return counts_.empty() ? 0 : static_cast<int>(counts_[0].size()) - 1; }

  std::vector<std::int64_t> sizes() const;  // Z_0..Z_n
  std::vector<std::int64_t> phis() const;   // phi_0..phi_{n-1}

  // Cumulative reductions through generation `through_l` inclusive.
  std::int64_t Y(int through_l) const;               // sum of Z_0..Z_l
  std::int64_t Delta(int through_l) const;           // sum of phi_0..phi_l
  std::int64_t Yk(int through_l, int k) const;       // sum of z_0(k)..z_l(k)

  // First `generations` rows as a sample of their own.
  FullTreeSample prefix(int generations) const;

 private:
  std::int64_t z0_;
  std::vector<std::vector<std::int64_t>> counts_;
};

// Generation sizes plus progenitor counts (phi observed, offspring split not).
struct ProgenitorSample {
  std::vector<std::int64_t> z;    // Z_0..Z_n
  std::vector<std::int64_t> phi;  // phi_0..phi_{n-1}

  int n() const { return static_cast<int>(phi.size()); }
  // Structural checks: lengths, nonnegativity, phi = 0 forces next size 0.
  void validate() const;
  // Model-feasibility checks for a declared family and offspring bound:
  // z_{l+1} <= s_max * phi_l, and phi_l <= z_l for binomial control.
  void validate_for(ControlKind kind, int s_max) const;
};

// Generation sizes only.
struct SizesSample {
  std::vector<std::int64_t> z;  // Z_0..Z_n

  int n() const { return static_cast<int>(z.size()) - 1; }
  void validate() const;
  // For binomial control z_{l+1} <= s_max * z_l; all families: 0 stays 0.
  void validate_for(ControlKind kind, int s_max) const;
};

ProgenitorSample project_progenitors(const FullTreeSample& sample);
SizesSample project_sizes(const FullTreeSample& sample);

}  // namespace cbp
