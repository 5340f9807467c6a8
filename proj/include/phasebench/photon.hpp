#pragma once

#include <array>
#include <cstdint>

#include "phasebench/field.hpp"
#include "phasebench/grid.hpp"

namespace phasebench {

/// Identifies one reproducible random stream. Distinct (master_seed,
/// stream_index) pairs give independent streams.
struct SeedSpec
{
    std::uint64_t master_seed = 0;
    std::uint64_t stream_index = 0;

    friend bool operator==(const SeedSpec&, const SeedSpec&) = default;
};

/// Counter-keyed generator: xoshiro256** seeded through splitmix64 from
/// (master_seed, stream_index, counter). Every pixel owns its generator, so
/// draws do not depend on the order in which pixels are visited.
class KeyedRng
{
  public:
    KeyedRng(const SeedSpec& seed, std::uint64_t counter);

    std::uint64_t next();

    /// Uniform double in [0, 1) with 53 random bits.
    double uniform();

  private:
    std::array<std::uint64_t, 4> s_;
};

/// One Poisson draw: sequential-search inversion below mean 10, transformed
/// rejection (PTRS) at and above it.
std::uint32_t sample_poisson(double mu, KeyedRng& rng);

/// Independent Poisson draw per pixel. Output is bit-identical for identical
/// (mean, seed), whatever the thread count.
CountFrame sample_poisson_frame(const IntensityMap& mean, const SeedSpec& seed, unsigned threads = 1);

/// Per-frame expected intensities for reference shifts 0, pi/2, pi, 3pi/2,
/// scaled so the four frame means sum exactly to the single-frame budget n0.
std::array<IntensityMap, 4> split_budget_psm(const ComplexField& reference, const ComplexField& object, double n0);

/// The four reference shifts, in frame order.
inline constexpr std::array<double, 4> kPsmShifts = {0.0, 0.5 * kPi, kPi, 1.5 * kPi};

} // namespace phasebench
