#pragma once

#include <cstdint>
#include <vector>

namespace cbp {

// One offspring-configuration vector z(0..s_max): z(k) progenitors with
// exactly k offspring.
struct Configuration {
  std::vector<std::int64_t> counts;

  std::int64_t progenitors() const {
    std::int64_t s = 0;
    for (std::int64_t c : counts) s += c;
    return s;
  }
  std::int64_t offspring() const {
    std::int64_t s = 0;
    for (std::size_t k = 1; k < counts.size(); ++k)
      s += static_cast<std::int64_t>(k) * counts[k];
    return s;
  }
  bool operator==(const Configuration& other) const { return counts == other.counts; }
};

// All configurations with sum z(k) = phi_star and sum k z(k) = z_next, in
// ascending lexicographic order of (z(0), z(1), ...). Empty when infeasible.
std::vector<Configuration> enumerate_fixed(std::int64_t phi_star, std::int64_t z_next,
                                           int s_max);

struct RangedEntry {
  std::int64_t phi_star;
  Configuration config;
};

// Union over phi_star = 1..z_l of enumerate_fixed, each entry tagged; when
// z_next = 0 the (0, zero vector) entry is appended at the end so conditional
// laws over this support normalize.
std::vector<RangedEntry> enumerate_ranged(std::int64_t z_l, std::int64_t z_next,
                                          int s_max);

// Cardinalities, computed by dynamic programming (never by materializing the
// lists). Additions are overflow-checked; overflow raises a domain error.
std::uint64_t count_b(std::int64_t phi_star, std::int64_t z_next, int s_max);
std::uint64_t count_b_star(std::int64_t z_l, std::int64_t z_next, int s_max);

// Maxima over z_next = 0..s_max*z_l (with phi_star = z_l for count_b).
std::uint64_t b_max(std::int64_t z_l, int s_max);
std::uint64_t b_star_max(std::int64_t z_l, int s_max);

struct BmaxRow {
  std::int64_t z;
  std::uint64_t b_max;
  std::uint64_t b_star_max;
};

// Rows z = 1..z_max, sharing one DP table (much cheaper than per-row calls).
std::vector<BmaxRow> bmax_table(std::int64_t z_max, int s_max);

}  // namespace cbp
