#include "lmconv/rng.hpp"

#include <cmath>
#include <cstring>
#include <stdexcept>

#include <sodium.h>

namespace lmconv {
namespace {

void ensure_sodium() {
    static const int status = sodium_init();
    if (status < 0) throw std::runtime_error("libsodium initialisation failed");
}

void store_le64(unsigned char* out, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out[i] = static_cast<unsigned char>(v >> (8 * i));
}

}  // namespace

Substream::Substream(std::uint64_t seed, std::uint64_t index, StreamId stream) {
    ensure_sodium();
    unsigned char seed_bytes[8];
    store_le64(seed_bytes, seed);
    crypto_generichash(key_.data(), key_.size(), seed_bytes, sizeof seed_bytes, nullptr, 0);
    store_le64(nonce_.data(), index);
    const auto sid = static_cast<std::uint32_t>(stream);
    for (int i = 0; i < 4; ++i) nonce_[8 + i] = static_cast<unsigned char>(sid >> (8 * i));
}

void Substream::refill() {
    static_assert(sizeof(buffer_) % 64 == 0, "refill works in whole ChaCha20 blocks");
    unsigned char zeros[sizeof(buffer_)] = {};
    unsigned char out[sizeof(buffer_)];
    crypto_stream_chacha20_ietf_xor_ic(out, zeros, sizeof out, nonce_.data(), next_block_, key_.data());
    next_block_ += static_cast<std::uint32_t>(sizeof out / 64);
    for (std::size_t i = 0; i < buffer_.size(); ++i) {
        std::uint64_t v = 0;
        for (int b = 7; b >= 0; --b) v = (v << 8) | out[8 * i + static_cast<std::size_t>(b)];
        buffer_[i] = v;
    }
    position_ = 0;
}

Substream::result_type Substream::operator()() {
    if (position_ == buffer_.size()) refill();
    return buffer_[position_++];
}

double Substream::uniform() {
    const std::uint64_t bits = (*this)() >> 11;
    return (static_cast<double>(bits) + 0.5) * 0x1.0p-53;
}

double Substream::exponential() { return -std::log(uniform()); }

double Substream::normal() { return gaussian_(*this); }

bool Substream::bernoulli(double p) { return uniform() < p; }

bool Substream::dyadic(int k) {
    while (k >= 64) {
        if ((*this)() != 0) return false;
        k -= 64;
    }
    if (k <= 0) return true;
    return ((*this)() >> (64 - k)) == 0;
}

}  // namespace lmconv
