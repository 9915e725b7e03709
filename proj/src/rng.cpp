#include "gcf/rng.hpp"

#include <cmath>
#include <numbers>

#include "gcf/error.hpp"

namespace gcf {

namespace {

std::uint64_t splitmix64(std::uint64_t& x) {
    x += 0x9E3779B97F4A7C15ull;
    std::uint64_t z = x;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

std::uint64_t fnv1a64(std::string_view s) {
    std::uint64_t h = 0xCBF29CE484222325ull;
    for (char c : s) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001B3ull;
    }
    return h;
}

}  // namespace

Rng::Rng(std::uint64_t seed) : seed_(seed) {
    std::uint64_t x = seed;
    for (auto& word : state_) word = splitmix64(x);
}

std::uint64_t Rng::next_u64() {
    auto& s = state_;
    const std::uint64_t result = rotl(s[0] + s[3], 23) + s[0];
    const std::uint64_t t = s[1] << 17;
    s[2] ^= s[0];
    s[3] ^= s[1];
    s[1] ^= s[2];
    s[0] ^= s[3];
    s[2] ^= t;
    s[3] = rotl(s[3], 45);
    return result;
}

double Rng::next_double() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

std::uint64_t Rng::uniform_below(std::uint64_t bound) {
    require(bound > 0, "invalid_argument", "uniform_below: bound must be positive");
    // Rejection sampling over the top range keeps the modulo unbiased.
    const std::uint64_t threshold = (0 - bound) % bound;
    std::uint64_t u;
    do {
        u = next_u64();
    } while (u < threshold);
    return u % bound;
}

double Rng::next_gaussian() {
    // u1 in (0, 1] so the log is finite.
    const double u1 = 1.0 - next_double();
    const double u2 = next_double();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

Rng Rng::split(std::string_view label) const {
    std::uint64_t x = seed_ ^ fnv1a64(label);
    return Rng(splitmix64(x));
}

Rng Rng::split(std::uint64_t index) const {
    std::uint64_t x = seed_ ^ (0x9E3779B97F4A7C15ull * (index + 1));
    return Rng(splitmix64(x));
}

}  // namespace gcf
