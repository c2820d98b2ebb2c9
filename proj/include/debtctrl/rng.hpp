#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

#include "common.hpp"

namespace debtctrl {

// splitmix64 finalizer; spreads structured seeds (base xor small index) into
// well-mixed engine seeds.
constexpr std::uint64_t mix_seed(std::uint64_t base, std::uint64_t stream) {
    std::uint64_t z = base + 0x9E3779B97F4A7C15ull * (stream + 1ull);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

// Standard-normal stream with a fully specified algorithm: mt19937_64 words
// mapped to (0, 1] uniforms and fed through Box-Muller. Unlike
// std::normal_distribution, output is identical on every implementation,
// which the reproducibility contract requires.
class NormalStream {
  public:
    explicit NormalStream(std::uint64_t seed) : engine_(seed) {}

    NormalStream(std::uint64_t base, std::uint64_t stream) : engine_(mix_seed(base, stream)) {}

    Real operator()() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        // u1 in (0, 1] keeps the log finite; u2 in [0, 1)
        const Real u1 = (static_cast<Real>(engine_() >> 11) + 1.0) * 0x1.0p-53;
        const Real u2 = static_cast<Real>(engine_() >> 11) * 0x1.0p-53;
        const Real radius = std::sqrt(-2.0 * std::log(u1));
        const Real angle = 2.0 * std::numbers::pi_v<Real> * u2;
        spare_ = radius * std::sin(angle);
        have_spare_ = true;
        return radius * std::cos(angle);
    }

  private:
    std::mt19937_64 engine_;
    Real spare_ = 0.0;
    bool have_spare_ = false;
};

}  // namespace debtctrl
