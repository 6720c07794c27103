#pragma once

#include <array>
#include <cstdint>

namespace vrseq {

// Deterministic 64-bit generator (xoshiro256++ seeded through splitmix64).
// The state is four words, which makes checkpointed training trivially
// resumable and keeps the draw sequence identical across platforms --
// std::normal_distribution offers no such guarantee.
class Rng {
public:
    explicit Rng(std::uint64_t seed);

    std::uint64_t next_u64();

    // uniform in [0, 1)
    double uniform();
    double uniform(double lo, double hi);
    // uniform integer in [0, n), n >= 1
    std::uint64_t uniform_int(std::uint64_t n);
    // standard normal via Box-Muller (no cached spare, so state is just the engine)
    double normal();

    std::array<std::uint64_t, 4> state() const { return s_; }
    void set_state(const std::array<std::uint64_t, 4>& s) { s_ = s; }

    // Derive an unrelated stream from (seed, stream index); used for
    // per-identity data generation and per-epoch validation passes.
    static std::uint64_t mix(std::uint64_t seed, std::uint64_t stream);

private:
    std::array<std::uint64_t, 4> s_{};
};

}  // namespace vrseq
