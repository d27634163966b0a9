#pragma once

#include <cmath>
#include <cstdint>

namespace pieces {

// SplitMix64. Stateless mixing makes streams reproducible across platforms;
// all randomness in the project flows through this generator.
class SplitMix64 {
  public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    // Uniform on (0, 1]; never returns 0, so -log is always finite.
    double next_unit() {
        return (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53;
    }

    // Exponential(1) by inverse CDF.
    double next_exp() { return -std::log(next_unit()); }

  private:
    std::uint64_t state_;
};

}  // namespace pieces
