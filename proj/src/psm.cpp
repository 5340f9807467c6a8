#include "phasebench/psm.hpp"

#include <cmath>

#include "phasebench/field.hpp"

namespace phasebench {
namespace {

template <typename Frame>
PhaseMap estimate(const BasicPsmFrameSet<Frame>& set, const PhaseMap& reference_phase)
{
    set.validate();
    require_same_shape(set.shape(), reference_phase.shape(), "estimate_phase_psm");
    const auto& f = set.frames;
    PhaseMap out(set.shape());
    for (std::size_t i = 0; i < out.size(); ++i)
    {
        const double num = static_cast<double>(f[3][i]) - static_cast<double>(f[1][i]);
        const double den = static_cast<double>(f[0][i]) - static_cast<double>(f[2][i]);
        const double relative = (num == 0.0 && den == 0.0) ? 0.0 : std::atan2(num, den);
        out[i] = wrap_phase(relative + reference_phase[i]);
    }
    return out;
}

} // namespace

PhaseMap estimate_phase_psm(const PsmFrameSet& frames, const PhaseMap& reference_phase)
{
    return estimate(frames, reference_phase);
}

PhaseMap estimate_phase_psm(const PsmIntensitySet& frames, const PhaseMap& reference_phase)
{
    return estimate(frames, reference_phase);
}

GroundTruth make_ground_truth(const SceneConfig& scene, GroundTruthMode mode, double n0_hll, const SeedSpec& seed,
                              unsigned threads)
{
    const SceneFields fields = synthesize(scene);
    if (mode == GroundTruthMode::Noiseless)
        return {phase_of(fields.object), std::nullopt};

    GroundTruth out;
    if (n0_hll < kMinHighLightBudget)
        out.warning = "high-light budget " + std::to_string(n0_hll) + " is below " +
                      std::to_string(kMinHighLightBudget) + " counts per pixel";
    const auto means = split_budget_psm(fields.reference, fields.object, n0_hll);
    PsmFrameSet set;
    for (std::size_t k = 0; k < 4; ++k)
        set.frames[k] = sample_poisson_frame(means[k], {seed.master_seed, seed.stream_index + k}, threads);
    out.phase = estimate_phase_psm(set, phase_of(fields.reference));
    return out;
}

} // namespace phasebench
