#include "randfield/rng.hpp"

#include <cmath>

namespace randfield {

namespace {

constexpr std::uint32_t kPhiloxM0 = 0xD2511F53u;
constexpr std::uint32_t kPhiloxM1 = 0xCD9E8D57u;
constexpr std::uint32_t kPhiloxW0 = 0x9E3779B9u;
constexpr std::uint32_t kPhiloxW1 = 0xBB67AE85u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& lo, std::uint32_t& hi) {
    const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
    lo = static_cast<std::uint32_t>(p);
    hi = static_cast<std::uint32_t>(p >> 32);
}

inline void round_once(std::array<std::uint32_t, 4>& c, const std::array<std::uint32_t, 2>& k) {
    std::uint32_t lo0, hi0, lo1, hi1;
    mulhilo(kPhiloxM0, c[0], lo0, hi0);
    mulhilo(kPhiloxM1, c[2], lo1, hi1);
    c = {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
}

}  // namespace

namespace philox {

std::array<std::uint32_t, 4> block(const std::array<std::uint32_t, 4>& counter,
                                   const std::array<std::uint32_t, 2>& key) {
    std::array<std::uint32_t, 4> c = counter;
    std::array<std::uint32_t, 2> k = key;
    for (int r = 0; r < 10; ++r) {
        if (r > 0) {
            k[0] += kPhiloxW0;
            k[1] += kPhiloxW1;
        }
        round_once(c, k);
    }
    return c;
}

}  // namespace philox

std::uint64_t mix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

std::uint64_t derive_stream(std::uint64_t base, std::initializer_list<std::uint64_t> path) {
    std::uint64_t s = base;
    for (std::uint64_t c : path) s = mix64(s ^ mix64(c));
    return s;
}

std::uint64_t RandomStream::raw64(std::uint64_t i) const {
    const std::array<std::uint32_t, 4> ctr = {
        static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(i >> 32),
        static_cast<std::uint32_t>(stream_), static_cast<std::uint32_t>(stream_ >> 32)};
    const auto out = philox::block(ctr, key_);
    return (static_cast<std::uint64_t>(out[1]) << 32) | out[0];
}

double RandomStream::uniform(std::uint64_t i) const {
    // (raw >> 11) in [0, 2^53); +0.5 keeps the value strictly inside (0,1).
    return ((raw64(i) >> 11) + 0.5) * 0x1.0p-53;
}

double RandomStream::normal(std::uint64_t i) const {
    const std::uint64_t b = i >> 1;
    if (b != cached_block_) {
        // Normals live in the upper half of the 64-bit index space, so they
        // never collide with uniform(i) blocks on the same stream.
        const std::uint64_t u0 = raw64((1ull << 63) | (2 * b));
        const std::uint64_t u1 = raw64((1ull << 63) | (2 * b + 1));
        const double a = ((u0 >> 11) + 0.5) * 0x1.0p-53;
        const double t = ((u1 >> 11) + 0.5) * 0x1.0p-53;
        const double rad = std::sqrt(-2.0 * std::log(a));
        cached_z_[0] = rad * std::cos(6.283185307179586476925286766559 * t);
        cached_z_[1] = rad * std::sin(6.283185307179586476925286766559 * t);
        cached_block_ = b;
    }
    return cached_z_[i & 1];
}

}  // namespace randfield
