#include "cbp/trees.hpp"

#include <algorithm>
#include <limits>

#include "cbp/errors.hpp"

namespace cbp {

namespace {

std::uint64_t add_checked(std::uint64_t a, std::uint64_t b) {
  if (a > std::numeric_limits<std::uint64_t>::max() - b)
    throw DomainError("configuration count overflows 64 bits");
  return a + b;
}

std::uint64_t mul_checked(std::uint64_t a, std::uint64_t b) {
  if (a != 0 && b > std::numeric_limits<std::uint64_t>::max() / a)
    throw DomainError("configuration count overflows 64 bits");
  return a * b;
}

// T[c][z] = number of partitions of z into at most c parts, each in 1..s_max
// (equivalently: configurations with z offspring among at most c progenitors
// having nonzero offspring counts bounded by s_max). Built by the box
// recurrence T_s[c][z] = T_s[c-1][z] + T_{s-1}[c][z-c].
std::vector<std::vector<std::uint64_t>> partition_table(std::int64_t c_max,
                                                        std::int64_t z_tot, int s_max) {
  auto rows = static_cast<std::size_t>(c_max) + 1;
  auto cols = static_cast<std::size_t>(z_tot) + 1;
  std::vector<std::vector<std::uint64_t>> prev(rows, std::vector<std::uint64_t>(cols, 0));
  for (std::size_t c = 0; c < rows; ++c) prev[c][0] = 1;  // s = 0 base
  for (int s = 1; s <= s_max; ++s) {
    std::vector<std::vector<std::uint64_t>> cur(rows, std::vector<std::uint64_t>(cols, 0));
    cur[0][0] = 1;
    for (std::size_t c = 1; c < rows; ++c) {
      cur[c][0] = 1;
      for (std::size_t z = 1; z < cols; ++z) {
        std::uint64_t v = cur[c - 1][z];
        if (z >= c) v = add_checked(v, prev[c][z - c]);
        cur[c][z] = v;
      }
    }
    prev = std::move(cur);
  }
  return prev;
}

void enumerate_tail(std::int64_t remaining_progenitors, std::int64_t remaining_offspring,
                    int k, int s_max, std::vector<std::int64_t>& partial,
                    std::vector<Configuration>& out) {
  if (k == s_max) {
    if (remaining_progenitors * static_cast<std::int64_t>(s_max) == remaining_offspring) {
      partial[static_cast<std::size_t>(k)] = remaining_progenitors;
      out.push_back(Configuration{partial});
      partial[static_cast<std::size_t>(k)] = 0;
    }
    return;
  }
  // After assigning t progenitors to k offspring each, the rest must absorb
  // the remaining offspring with per-head loads in (k+1)..s_max.
  for (std::int64_t t = 0; t <= remaining_progenitors; ++t) {
    std::int64_t w = remaining_offspring - t * static_cast<std::int64_t>(k);
    if (w < 0) break;
    std::int64_t r = remaining_progenitors - t;
    if (w < r * static_cast<std::int64_t>(k + 1)) continue;
    if (w > r * static_cast<std::int64_t>(s_max)) continue;
    partial[static_cast<std::size_t>(k)] = t;
    enumerate_tail(r, w, k + 1, s_max, partial, out);
    partial[static_cast<std::size_t>(k)] = 0;
  }
}

}  // namespace

std::vector<Configuration> enumerate_fixed(std::int64_t phi_star, std::int64_t z_next,
                                           int s_max) {
  if (s_max < 1) throw DomainError("enumerate_fixed needs s_max >= 1");
  if (phi_star < 0 || z_next < 0)
    throw DomainError("enumerate_fixed needs nonnegative phi_star and z_next");
  std::vector<Configuration> out;
  if (z_next > phi_star * static_cast<std::int64_t>(s_max)) return out;
  std::vector<std::int64_t> partial(static_cast<std::size_t>(s_max) + 1, 0);
  // The k = 0 slot is handled by the general tail starting at k = 0 with the
  // convention that zero-offspring heads contribute nothing to z_next.
  enumerate_tail(phi_star, z_next, 0, s_max, partial, out);
  return out;
}

std::vector<RangedEntry> enumerate_ranged(std::int64_t z_l, std::int64_t z_next,
                                          int s_max) {
  if (z_l < 1) throw DomainError("enumerate_ranged needs z_l >= 1");
  if (z_next < 0) throw DomainError("enumerate_ranged needs nonnegative z_next");
  std::vector<RangedEntry> out;
  for (std::int64_t phi = 1; phi <= z_l; ++phi)
    for (auto& config : enumerate_fixed(phi, z_next, s_max))
      out.push_back(RangedEntry{phi, std::move(config)});
  if (z_next == 0)
    out.push_back(RangedEntry{
        0, Configuration{std::vector<std::int64_t>(static_cast<std::size_t>(s_max) + 1, 0)}});
  return out;
}

std::uint64_t count_b(std::int64_t phi_star, std::int64_t z_next, int s_max) {
  if (s_max < 1) throw DomainError("count_b needs s_max >= 1");
  if (phi_star < 0 || z_next < 0)
    throw DomainError("count_b needs nonnegative phi_star and z_next");
  if (z_next > phi_star * static_cast<std::int64_t>(s_max)) return 0;
  std::int64_t c = std::min(phi_star, z_next);
  auto table = partition_table(c, z_next, s_max);
  return table[static_cast<std::size_t>(c)][static_cast<std::size_t>(z_next)];
}

std::uint64_t count_b_star(std::int64_t z_l, std::int64_t z_next, int s_max) {
  if (s_max < 1) throw DomainError("count_b_star needs s_max >= 1");
  if (z_l < 1) throw DomainError("count_b_star needs z_l >= 1");
  if (z_next < 0) throw DomainError("count_b_star needs nonnegative z_next");
  if (z_next > z_l * static_cast<std::int64_t>(s_max)) return 0;
  std::int64_t c_cap = std::min(z_l, z_next);
  auto table = partition_table(c_cap, z_next, s_max);
  std::uint64_t total = 0;
  for (std::int64_t c = 1; c <= c_cap; ++c)
    total = add_checked(total, table[static_cast<std::size_t>(c)][static_cast<std::size_t>(z_next)]);
  if (z_l > z_next) {
    // Extra progenitors beyond z_next can only add zero-offspring heads.
    std::uint64_t top =
        table[static_cast<std::size_t>(c_cap)][static_cast<std::size_t>(z_next)];
    total = add_checked(total, mul_checked(static_cast<std::uint64_t>(z_l - z_next), top));
  }
  return total;
}

std::uint64_t b_max(std::int64_t z_l, int s_max) {
  auto rows = bmax_table(z_l, s_max);
  return rows.back().b_max;
}

std::uint64_t b_star_max(std::int64_t z_l, int s_max) {
  auto rows = bmax_table(z_l, s_max);
  return rows.back().b_star_max;
}

std::vector<BmaxRow> bmax_table(std::int64_t z_max, int s_max) {
  if (s_max < 1) throw DomainError("bmax_table needs s_max >= 1");
  if (z_max < 1) throw DomainError("bmax_table needs z_max >= 1");
  std::int64_t z_tot = z_max * static_cast<std::int64_t>(s_max);
  auto table = partition_table(z_max, z_tot, s_max);
  // Prefix sums over the part-count dimension for the starred counts.
  std::vector<std::vector<std::uint64_t>> prefix(table.size());
  prefix[0] = std::vector<std::uint64_t>(table[0].size(), 0);
  for (std::size_t c = 1; c < table.size(); ++c) {
    prefix[c].resize(table[c].size());
    for (std::size_t z = 0; z < table[c].size(); ++z)
      prefix[c][z] = add_checked(prefix[c - 1][z], table[c][z]);
  }
  std::vector<BmaxRow> rows;
  rows.reserve(static_cast<std::size_t>(z_max));
  for (std::int64_t zl = 1; zl <= z_max; ++zl) {
    std::uint64_t best_b = 0;
    std::uint64_t best_bs = 0;
    for (std::int64_t zn = 0; zn <= zl * static_cast<std::int64_t>(s_max); ++zn) {
      std::int64_t c = std::min(zl, zn);
      std::uint64_t b = table[static_cast<std::size_t>(c)][static_cast<std::size_t>(zn)];
      best_b = std::max(best_b, b);
      std::uint64_t bs = prefix[static_cast<std::size_t>(c)][static_cast<std::size_t>(zn)];
      if (zl > zn)
        bs = add_checked(bs, mul_checked(static_cast<std::uint64_t>(zl - zn), b));
      best_bs = std::max(best_bs, bs);
    }
    rows.push_back(BmaxRow{zl, best_b, best_bs});
  }
  return rows;
}

}  // namespace cbp
