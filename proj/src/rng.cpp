#include "pide/rng.hpp"

#include <cmath>
#include <stdexcept>

namespace pide {

std::uint64_t splitmix64(std::uint64_t& x) {
    std::uint64_t z = (x += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

std::uint64_t derive_seed(std::uint64_t master_seed, std::uint64_t tag, std::uint64_t index) {
    std::uint64_t x = master_seed;
    std::uint64_t h = splitmix64(x);
    x ^= tag * 0x9e3779b97f4a7c15ULL;
    h ^= splitmix64(x);
    x ^= (index + 1) * 0xd1342543de82ef95ULL;
    h ^= splitmix64(x);
    return h;
}

Rng::Rng(std::uint64_t seed) {
    // Expand the seed with splitmix64; xoshiro must not start all-zero.
    for (auto& s : state_) s = splitmix64(seed);
    if ((state_[0] | state_[1] | state_[2] | state_[3]) == 0) state_[0] = 1;
}

Rng Rng::stream(std::uint64_t master_seed, std::uint64_t tag, std::uint64_t index) {
    return Rng(derive_seed(master_seed, tag, index));
}

static inline std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
}

std::uint64_t Rng::next_u64() {
    // xoshiro256++
    const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
}

double Rng::uniform01() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double Rng::uniform01_open() {
    return (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53;
}

double Rng::uniform(double a, double b) {
    return a + (b - a) * uniform01();
}

double Rng::normal() {
    if (has_cached_) {
        has_cached_ = false;
        return cached_normal_;
    }
    const double u1 = uniform01_open();
    const double u2 = uniform01();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 6.283185307179586476925286766559 * u2;
    cached_normal_ = r * std::sin(theta);
    has_cached_ = true;
    return r * std::cos(theta);
}

void Rng::normal_fill(std::span<double> out) {
    for (auto& v : out) v = normal();
}

std::uint64_t Rng::poisson(double mean) {
    if (mean < 0.0) throw std::invalid_argument("poisson: negative mean");
    if (mean == 0.0) return 0;
    if (mean > 600.0) throw std::invalid_argument("poisson: mean too large for inversion sampler");
    // Multiplication method; exact for moderate means.
    const double limit = std::exp(-mean);
    std::uint64_t k = 0;
    double p = 1.0;
    do {
        ++k;
        p *= uniform01_open();
    } while (p > limit);
    return k - 1;
}

}  // namespace pide
