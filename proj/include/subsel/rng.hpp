#pragma once

#include <cstddef>
#include <cstdint>
#include <random>

namespace subsel {

/// Seeded random stream. All stochastic engine decisions are drawn from one
/// stream on the coordinating thread.
class RngStream {
  public:
    explicit RngStream(std::uint64_t seed) : seed_(seed), engine_(seed) {}

    std::uint64_t seed() const noexcept { return seed_; }
    std::mt19937_64& engine() noexcept { return engine_; }

    /// Uniform integer in [0, n). n must be positive.
    std::size_t index(std::size_t n) {
        return std::uniform_int_distribution<std::size_t>(0, n - 1)(engine_);
    }
    double uniform() { return std::uniform_real_distribution<double>(0.0, 1.0)(engine_); }
    std::size_t poisson(double mean) {
        if (mean <= 0.0) return 0;
        return static_cast<std::size_t>(std::poisson_distribution<long long>(mean)(engine_));
    }

  private:
    std::uint64_t seed_;
    std::mt19937_64 engine_;
};

/// splitmix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Child seed for (island, round) under a master seed.
constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t island, std::uint64_t round) noexcept {
    return mix64(mix64(mix64(master) ^ island) ^ (round + 0x632be59bd9b4e019ULL));
}

} // namespace subsel
