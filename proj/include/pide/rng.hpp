#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace pide {

// Deterministic counter-derived random streams. Every Monte Carlo trial owns
// a stream derived from (master_seed, tag, index), so results do not depend
// on thread count or execution order. Distributions are implemented here
// rather than taken from <random> so that output is identical across
// standard library implementations.
class Rng {
public:
    explicit Rng(std::uint64_t seed);

    // stream(master, tag, index): independent stream for one trial/purpose.
    static Rng stream(std::uint64_t master_seed, std::uint64_t tag, std::uint64_t index);

    std::uint64_t next_u64();
    double uniform01();          // in [0, 1)
    double uniform01_open();     // in (0, 1]
    double uniform(double a, double b);
    double normal();             // standard normal (Box-Muller, pair-cached)
    void normal_fill(std::span<double> out);
    std::uint64_t poisson(double mean);

private:
    std::uint64_t state_[4];
    double cached_normal_ = 0.0;
    bool has_cached_ = false;
};

std::uint64_t splitmix64(std::uint64_t& x);

// Hash a (master, tag, index) triple into a stream seed.
std::uint64_t derive_seed(std::uint64_t master_seed, std::uint64_t tag, std::uint64_t index);

// Stream tags used across the project (documented so dumps are reproducible).
namespace stream_tag {
inline constexpr std::uint64_t kNoiseGauss = 0x67617573;
inline constexpr std::uint64_t kNoiseEvents = 0x65766e74;
inline constexpr std::uint64_t kNoiseMarks = 0x6d61726b;
inline constexpr std::uint64_t kProbe = 0x70726f62;
inline constexpr std::uint64_t kBatchPhi1 = 0x62617431;
inline constexpr std::uint64_t kBatchPhi2 = 0x62617432;
inline constexpr std::uint64_t kOracle = 0x6f72636c;
inline constexpr std::uint64_t kStudy = 0x73747564;
}  // namespace stream_tag

}  // namespace pide
