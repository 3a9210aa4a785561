#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <span>

namespace efelab {

/// Seeded generator with platform-independent draws. The standard
/// distributions are implementation-defined, so we derive uniforms by hand.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    /// Uniform on the open interval (0, 1).
    double uniform_open() noexcept {
        return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
    }

    /// Unit-rate exponential, strictly positive.
    double exponential() noexcept { return -std::log(uniform_open()); }

    /// Inverse-CDF draw from nonnegative weights summing to ~1.
    std::size_t categorical(std::span<double const> probs) noexcept {
        double const u = uniform_open();
        double acc = 0.0;
        std::size_t last_positive = 0;
        for (std::size_t i = 0; i < probs.size(); ++i) {
            if (probs[i] <= 0.0) continue;
            last_positive = i;
            acc += probs[i];
            if (u < acc) return i;
        }
        return last_positive;
    }

  private:
    std::mt19937_64 engine_;
};

}  // namespace efelab
