#include "phasebench/photon.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <thread>
#include <vector>

#include "phasebench/field.hpp"
#include "phasebench/scene.hpp"

namespace phasebench {
namespace {

std::uint64_t splitmix64(std::uint64_t& state)
{
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

constexpr std::uint64_t rotl(std::uint64_t x, int k)
{
    return (x << k) | (x >> (64 - k));
}

std::uint32_t poisson_inversion(double mu, KeyedRng& rng)
{
    const double u = rng.uniform();
    double p = std::exp(-mu);
    double cdf = p;
    std::uint32_t k = 0;
    // The cap only matters if rounding leaves the cdf a hair below u.
    while (u > cdf && k < 1000)
    {
        ++k;
        p *= mu / static_cast<double>(k);
        cdf += p;
    }
    return k;
}

// Hormann (1993), "The transformed rejection method for generating Poisson
// random variables", algorithm PTRS.
std::uint32_t poisson_ptrs(double mu, KeyedRng& rng)
{
    const double slam = std::sqrt(mu);
    const double loglam = std::log(mu);
    const double b = 0.931 + 2.53 * slam;
    const double a = -0.059 + 0.02483 * b;
    const double inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
    const double vr = 0.9277 - 3.6224 / (b - 2.0);
    for (;;)
    {
        const double u = rng.uniform() - 0.5;
        const double v = rng.uniform();
        const double us = 0.5 - std::abs(u);
        const double k = std::floor((2.0 * a / us + b) * u + mu + 0.43);
        if (us >= 0.07 && v <= vr)
            return static_cast<std::uint32_t>(k);
        if (k < 0.0 || (us < 0.013 && v > us))
            continue;
        if (std::log(v) + std::log(inv_alpha) - std::log(a / (us * us) + b) <= -mu + k * loglam - std::lgamma(k + 1.0))
            return static_cast<std::uint32_t>(k);
    }
}

} // namespace

KeyedRng::KeyedRng(const SeedSpec& seed, std::uint64_t counter)
{
    std::uint64_t state = seed.master_seed;
    std::uint64_t key = splitmix64(state);
    state = key ^ seed.stream_index;
    key = splitmix64(state);
    state = key ^ counter;
    for (auto& word : s_)
        word = splitmix64(state);
}

std::uint64_t KeyedRng::next()
{
    const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
}

double KeyedRng::uniform()
{
    return static_cast<double>(next() >> 11) * 0x1.0p-53;
}

std::uint32_t sample_poisson(double mu, KeyedRng& rng)
{
    if (!(mu >= 0.0) || !std::isfinite(mu))
        throw DomainError("Poisson mean must be finite and nonnegative");
    if (mu > 1e9)
        throw DomainError("Poisson mean too large for 32-bit counts");
    if (mu == 0.0)
        return 0;
    return mu < 10.0 ? poisson_inversion(mu, rng) : poisson_ptrs(mu, rng);
}

CountFrame sample_poisson_frame(const IntensityMap& mean, const SeedSpec& seed, unsigned threads)
{
    for (double m : mean)
        if (!(m >= 0.0) || !std::isfinite(m))
            throw DomainError("Poisson frame mean must be finite and nonnegative");

    CountFrame out(mean.shape());
    auto work = [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i)
        {
            KeyedRng rng(seed, i);
            out[i] = sample_poisson(mean[i], rng);
        }
    };

    const std::size_t n = mean.size();
    const std::size_t workers = std::clamp<std::size_t>(threads, 1, std::max<std::size_t>(1, n / 1024));
    if (workers == 1)
    {
        work(0, n);
        return out;
    }
    std::vector<std::jthread> pool;
    const std::size_t chunk = (n + workers - 1) / workers;
    for (std::size_t w = 0; w < workers; ++w)
    {
        const std::size_t begin = w * chunk;
        const std::size_t end = std::min(n, begin + chunk);
        if (begin < end)
            pool.emplace_back(work, begin, end);
    }
    pool.clear();
    return out;
}

std::array<IntensityMap, 4> split_budget_psm(const ComplexField& reference, const ComplexField& object, double n0)
{
    if (!(n0 > 0.0) || !std::isfinite(n0))
        throw DomainError("photon budget must be positive");
    std::array<IntensityMap, 4> frames;
    double total = 0.0;
    for (std::size_t k = 0; k < 4; ++k)
    {
        frames[k] = interfere(apply_phase_shift(reference, kPsmShifts[k]), object);
        total += mean(frames[k]);
    }
    if (!(total > 0.0))
        throw DomainError("scene produces no light");
    const double factor = n0 / total;
    for (auto& frame : frames)
        for (auto& v : frame)
            v *= factor;
    return frames;
}

} // namespace phasebench
