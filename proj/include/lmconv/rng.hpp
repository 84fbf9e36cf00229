#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <random>

namespace lmconv {

/// Stream ids keep paired simulations (P side, Q side, resampling) disjoint.
enum class StreamId : std::uint32_t {
    Primary = 0,
    Dual = 1,
    Bootstrap = 2,
    Auxiliary = 3,
};

/// Counter-based random source addressed by (seed, index, stream).
///
/// Each substream is the ChaCha20 keystream for key = hash(seed) and
/// nonce = (index, stream), so any path can be regenerated on its own and
/// ensemble output does not depend on how paths are split across workers.
class Substream {
public:
    using result_type = std::uint64_t;

    Substream(std::uint64_t seed, std::uint64_t index, StreamId stream = StreamId::Primary);

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

    result_type operator()();

    /// Uniform on the open interval (0, 1) with 53 random bits.
    double uniform();
    double exponential();
    double normal();
    bool bernoulli(double p);
    /// True with probability exactly 2^-k: k leading random bits all zero.
    bool dyadic(int k);

private:
    void refill();

    std::array<unsigned char, 32> key_{};
    std::array<unsigned char, 12> nonce_{};
    std::uint32_t next_block_ = 0;
    std::array<std::uint64_t, 32> buffer_{};
    std::size_t position_ = 32;
    std::normal_distribution<double> gaussian_{0.0, 1.0};
};

}  // namespace lmconv
