#pragma once

#include <cstdint>
#include <vector>

namespace cbp {

// splitmix64 finalizer. Used to derive independent per-stream seeds from a
// master seed so that results never depend on thread scheduling.
std::uint64_t mix64(std::uint64_t x);

// Seed of the index-th child stream of `master`.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index);

// PCG-XSH-RR 64/32. Small, fast, and bit-reproducible across platforms,
// unlike the std:: distributions whose algorithms are implementation-defined.
class Pcg32 {
 public:
  explicit Pcg32(std::uint64_t seed, std::uint64_t stream = 0);

  std::uint32_t next();
  // Uniform on [0,1) with 32-bit resolution.
  double uniform();
  // Uniform on the open interval (0,1); safe for log() and q/(1-q).
  double uniform_open();

 private:
  std::uint64_t state_;
  std::uint64_t inc_;
};

// Exact inversion / composition samplers (platform-stable by construction).
// probs must sum to 1; returns an index in [0, probs.size()).
int sample_discrete(const std::vector<double>& probs, Pcg32& rng);
// Sum of n Bernoulli(q) trials; exact for any n, O(n).
std::int64_t sample_binomial(std::int64_t n, double q, Pcg32& rng);
// Exact via additivity: split into chunks with rate <= 16, each by inversion.
std::int64_t sample_poisson(double lambda, Pcg32& rng);
// Number of failures before the k-th success, failure probability theta;
// exact as a sum of k inverted geometrics.
std::int64_t sample_negative_binomial(std::int64_t k, double theta, Pcg32& rng);
// Dirichlet(1,...,1): normalized standard exponentials.
std::vector<double> sample_dirichlet_uniform(int dim, Pcg32& rng);

}  // namespace cbp
