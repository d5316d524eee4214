#pragma once

#include <cstdint>
#include <random>

namespace numsmooth {

// Deterministic per-sample random streams. Every Monte Carlo sample draws
// from its own engine seeded by (seed, level, sample index, attempt), so the
// generated numbers do not depend on scheduling or thread count.
inline constexpr std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline constexpr std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t level,
                                        std::uint64_t index, std::uint64_t attempt = 0) {
    std::uint64_t h = splitmix64(seed ^ 0x6a09e667f3bcc908ULL);
    h = splitmix64(h ^ splitmix64(level + 0x3c6ef372fe94f82aULL));
    h = splitmix64(h ^ splitmix64(index + 0xa54ff53a5f1d36f1ULL));
    h = splitmix64(h ^ splitmix64(attempt + 0x510e527fade682d1ULL));
    return h;
}

class NormalStream {
public:
    explicit NormalStream(std::uint64_t seed) : engine_(seed) {}

    double next() { return normal_(engine_); }

    void fill(double* out, std::size_t n) {
        for (std::size_t i = 0; i < n; ++i) out[i] = normal_(engine_);
    }

private:
    std::mt19937_64 engine_;
    std::normal_distribution<double> normal_{0.0, 1.0};
};

} // namespace numsmooth
