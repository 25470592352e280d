#include "cbp/sample.hpp"

#include <string>
#include <utility>

#include "cbp/errors.hpp"

namespace cbp {

FullTreeSample::FullTreeSample(std::int64_t z0,
                               std::vector<std::vector<std::int64_t>> counts)
    : z0_(z0), counts_(std::move(counts)) {
  if (z0_ < 0) throw SchemaError("initial population size must be >= 0");
  if (counts_.empty()) throw SchemaError("full tree sample needs at least one generation row");
  std::size_t width = counts_[0].size();
  if (width < 2) throw SchemaError("full tree sample needs s_max >= 1 (at least two count columns)");
  for (std::size_t l = 0; l < counts_.size(); ++l) {
    if (counts_[l].size() != width)
      throw SchemaError("full tree sample rows must all have the same number of columns");
    for (std::int64_t c : counts_[l])
      if (c < 0) throw SchemaError("full tree counts must be >= 0");
  }
}

std::vector<std::int64_t> FullTreeSample::sizes() const {
  std::vector<std::int64_t> z(counts_.size() + 1);
  z[0] = z0_;
  for (std::size_t l = 0; l < counts_.size(); ++l) {
    std::int64_t next = 0;
    for (std::size_t k = 1; k < counts_[l].size(); ++k)
      next += static_cast<std::int64_t>(k) * counts_[l][k];
    z[l + 1] = next;
  }
  return z;
}

std::vector<std::int64_t> FullTreeSample::phis() const {
  std::vector<std::int64_t> phi(counts_.size());
  for (std::size_t l = 0; l < counts_.size(); ++l) {
    std::int64_t f = 0;
    for (std::int64_t c : counts_[l]) f += c;
    phi[l] = f;
  }
  return phi;
}

std::int64_t FullTreeSample::Y(int through_l) const {
  auto z = sizes();
  std::int64_t y = 0;
  for (int l = 0; l <= through_l && l < static_cast<int>(z.size()); ++l) y += z[l];
  return y;
}

std::int64_t FullTreeSample::Delta(int through_l) const {
  auto phi = phis();
  std::int64_t d = 0;
  for (int l = 0; l <= through_l && l < static_cast<int>(phi.size()); ++l) d += phi[l];
  return d;
}

std::int64_t FullTreeSample::Yk(int through_l, int k) const {
  std::int64_t y = 0;
  for (int l = 0; l <= through_l && l < n(); ++l) y += counts_[l][static_cast<std::size_t>(k)];
  return y;
}

FullTreeSample FullTreeSample::prefix(int generations) const {
  if (generations < 1 || generations > n())
    throw SchemaError("prefix length must be in [1, n]");
  std::vector<std::vector<std::int64_t>> head(counts_.begin(), counts_.begin() + generations);
  return FullTreeSample(z0_, std::move(head));
}

void ProgenitorSample::validate() const {
  if (z.size() < 2 || phi.size() + 1 != z.size())
    throw SchemaError("progenitor sample needs sizes Z_0..Z_n and phi_0..phi_{n-1}");
  for (std::int64_t v : z)
    if (v < 0) throw SchemaError("generation sizes must be >= 0");
  for (std::size_t l = 0; l < phi.size(); ++l) {
    if (phi[l] < 0) throw SchemaError("progenitor counts must be >= 0");
    if (phi[l] == 0 && z[l + 1] != 0)
      throw SchemaError("inconsistent sample: zero progenitors in generation " +
                        std::to_string(l) + " but nonzero next size");
    if (z[l] == 0 && phi[l] != 0)
      throw SchemaError("inconsistent sample: empty generation " + std::to_string(l) +
                        " has progenitors");
  }
}

void ProgenitorSample::validate_for(ControlKind kind, int s_max) const {
  validate();
  if (s_max < 1) throw SchemaError("s_max must be >= 1");
  for (std::size_t l = 0; l < phi.size(); ++l) {
    if (kind == ControlKind::binomial && phi[l] > z[l])
      throw SchemaError("inconsistent sample: generation " + std::to_string(l) +
                        " has more progenitors than individuals under binomial control");
    if (z[l + 1] > phi[l] * static_cast<std::int64_t>(s_max))
      throw SchemaError("inconsistent sample: generation " + std::to_string(l + 1) +
                        " exceeds s_max * phi of its parent generation");
  }
}

void SizesSample::validate() const {
  if (z.size() < 2) throw SchemaError("sizes sample needs at least Z_0 and Z_1");
  for (std::int64_t v : z)
    if (v < 0) throw SchemaError("generation sizes must be >= 0");
  for (std::size_t l = 0; l + 1 < z.size(); ++l)
    if (z[l] == 0 && z[l + 1] != 0)
      throw SchemaError("inconsistent sample: generation " + std::to_string(l) +
                        " is extinct but generation " + std::to_string(l + 1) + " is not");
}

void SizesSample::validate_for(ControlKind kind, int s_max) const {
  validate();
  if (s_max < 1) throw SchemaError("s_max must be >= 1");
  if (kind == ControlKind::binomial) {
    for (std::size_t l = 0; l + 1 < z.size(); ++l)
      if (z[l + 1] > z[l] * static_cast<std::int64_t>(s_max))
        throw SchemaError("inconsistent sample: generation " + std::to_string(l + 1) +
                          " exceeds s_max * Z of its parent generation under binomial control");
  }
}

ProgenitorSample project_progenitors(const FullTreeSample& sample) {
  ProgenitorSample out;
  out.z = sample.sizes();
  out.phi = sample.phis();
  return out;
}

SizesSample project_sizes(const FullTreeSample& sample) {
  SizesSample out;
  out.z = sample.sizes();
  return out;
}

}  // namespace cbp
