#pragma once

#include <cstdint>
#include <random>

namespace halp {

/// splitmix64 finalizer; used to derive independent child seeds.
std::uint64_t mix_seed(std::uint64_t x) noexcept;

/// Seed for stream `stream` of a run seeded with `seed`.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) noexcept;

/// Seeded generator with distribution code kept in-tree so that sequences
/// are identical across standard library implementations.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(mix_seed(seed)) {}

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform on [0, 1) with 53 random bits.
    double uniform();

    /// Uniform integer in [0, n).
    std::uint64_t below(std::uint64_t n);

    double normal();

    /// Gamma(shape, 1), Marsaglia-Tsang squeeze method; shape < 1 handled by
    /// the U^{1/shape} boost.
    double gamma(double shape);

    /// Beta(alpha, beta) as the ratio G_a / (G_a + G_b).
    double beta(double alpha, double beta);

private:
    std::mt19937_64 engine_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace halp
