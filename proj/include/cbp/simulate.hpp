#pragma once

#include <cstdint>

#include "cbp/control.hpp"
#include "cbp/offspring.hpp"
#include "cbp/sample.hpp"

namespace cbp {

// Forward simulation: each generation draws phi_l from the control law at the
// current size, then phi_l iid offspring counts from p. The seed fully
// determines the output.
FullTreeSample simulate(const OffspringDistribution& offspring,
                        const ControlFamily& family, std::int64_t z0,
                        int n_generations, std::uint64_t seed);

}  // namespace cbp
