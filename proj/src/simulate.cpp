#include "cbp/simulate.hpp"

#include "cbp/errors.hpp"

namespace cbp {

FullTreeSample simulate(const OffspringDistribution& offspring,
                        const ControlFamily& family, std::int64_t z0,
                        int n_generations, std::uint64_t seed) {
  if (n_generations < 1) throw SchemaError("simulate needs n_generations >= 1");
  if (z0 < 0) throw SchemaError("simulate needs z0 >= 0");
  Pcg32 rng(seed);
  int s = offspring.s_max();
  std::vector<std::vector<std::int64_t>> counts(
      static_cast<std::size_t>(n_generations),
      std::vector<std::int64_t>(static_cast<std::size_t>(s) + 1, 0));
  std::int64_t z = z0;
  for (int l = 0; l < n_generations; ++l) {
    std::int64_t phi = family.sample_phi(z, rng);
    std::int64_t next = 0;
    for (std::int64_t i = 0; i < phi; ++i) {
      int k = sample_discrete(offspring.probs(), rng);
      ++counts[static_cast<std::size_t>(l)][static_cast<std::size_t>(k)];
      next += k;
    }
    z = next;
  }
  return FullTreeSample(z0, std::move(counts));
}

}  // namespace cbp
