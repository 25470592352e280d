#include "cbp/rng.hpp"

#include <cmath>

#include "cbp/errors.hpp"

namespace cbp {

namespace {
constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ull;
}

std::uint64_t mix64(std::uint64_t x) {
  x += kGolden;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
  return mix64(master + (index + 1) * kGolden);
}

Pcg32::Pcg32(std::uint64_t seed, std::uint64_t stream)
    : state_(0), inc_((stream << 1u) | 1u) {
  next();
  state_ += seed;
  next();
}

std::uint32_t Pcg32::next() {
  std::uint64_t old = state_;
  state_ = old * 6364136223846793005ull + inc_;
  auto xorshifted = static_cast<std::uint32_t>(((old >> 18u) ^ old) >> 27u);
  auto rot = static_cast<std::uint32_t>(old >> 59u);
  return (xorshifted >> rot) | (xorshifted << ((-rot) & 31u));
}

double Pcg32::uniform() { return next() * 0x1p-32; }

double Pcg32::uniform_open() { return (next() + 0.5) * 0x1p-32; }

int sample_discrete(const std::vector<double>& probs, Pcg32& rng) {
  double u = rng.uniform();
  double cum = 0.0;
  for (std::size_t k = 0; k + 1 < probs.size(); ++k) {
    cum += probs[k];
    if (u < cum) return static_cast<int>(k);
  }
  return static_cast<int>(probs.size()) - 1;
}

std::int64_t sample_binomial(std::int64_t n, double q, Pcg32& rng) {
  if (n < 0) throw DomainError("binomial sampler: n must be >= 0");
  if (q < 0.0 || q > 1.0) throw DomainError("binomial sampler: q must be in [0,1]");
  std::int64_t count = 0;
  for (std::int64_t i = 0; i < n; ++i)
    if (rng.uniform() < q) ++count;
  return count;
}

namespace {
// Inversion for a small Poisson rate (exp(lambda) representable with room).
std::int64_t poisson_small(double lambda, Pcg32& rng) {
  double u = rng.uniform();
  double pr = std::exp(-lambda);
  double cum = pr;
  std::int64_t j = 0;
  while (u >= cum && j < 1000) {
    ++j;
    pr *= lambda / static_cast<double>(j);
    cum += pr;
  }
  return j;
}
}  // namespace

std::int64_t sample_poisson(double lambda, Pcg32& rng) {
  if (lambda < 0.0 || !std::isfinite(lambda))
    throw DomainError("poisson sampler: rate must be finite and >= 0");
  if (lambda == 0.0) return 0;
  std::int64_t total = 0;
  // Poisson(a+b) = Poisson(a) + Poisson(b): chunk to keep inversion stable.
  while (lambda > 16.0) {
    total += poisson_small(16.0, rng);
    lambda -= 16.0;
  }
  return total + poisson_small(lambda, rng);
}

std::int64_t sample_negative_binomial(std::int64_t k, double theta, Pcg32& rng) {
  if (k < 0) throw DomainError("negative binomial sampler: k must be >= 0");
  if (theta <= 0.0 || theta >= 1.0)
    throw DomainError("negative binomial sampler: theta must be in (0,1)");
  double log_theta = std::log(theta);
  std::int64_t total = 0;
  for (std::int64_t i = 0; i < k; ++i) {
    // Geometric (failures before a success): floor(log U / log theta).
    total += static_cast<std::int64_t>(std::log(rng.uniform_open()) / log_theta);
  }
  return total;
}

std::vector<double> sample_dirichlet_uniform(int dim, Pcg32& rng) {
  if (dim < 1) throw DomainError("dirichlet sampler: dimension must be >= 1");
  std::vector<double> e(dim);
  double sum = 0.0;
  for (int i = 0; i < dim; ++i) {
    e[i] = -std::log(rng.uniform_open());
    sum += e[i];
  }
  for (double& x : e) x /= sum;
  return e;
}

}  // namespace cbp
