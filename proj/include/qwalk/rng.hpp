#pragma once

#include <cstdint>

namespace qwalk {

/// Independent random streams used by the walk engine.
enum class Stream : std::uint64_t { quasimomentum = 1, coin_noise = 2 };

/// Counter-based generator: every draw is a pure function of
/// (seed, stream, trajectory, counter), so the schedule of parallel workers
/// cannot change any value. Mixing uses the splitmix64 finalizer.
class CounterRng {
  public:
    CounterRng(std::uint64_t seed, Stream stream, std::uint64_t trajectory) noexcept;

    std::uint64_t bits(std::uint64_t counter) const noexcept;

    /// Uniform on [0, 1) with 53 random bits.
    double uniform(std::uint64_t counter) const noexcept;

    /// Standard normal via Box-Muller from counters 2c and 2c+1.
    double normal(std::uint64_t counter) const noexcept;

  private:
    std::uint64_t key_;
};

std::uint64_t splitmix64(std::uint64_t x) noexcept;

}  // namespace qwalk
