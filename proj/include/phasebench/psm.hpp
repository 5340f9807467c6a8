#pragma once

#include <array>
#include <optional>
#include <string>

#include "phasebench/grid.hpp"
#include "phasebench/photon.hpp"
#include "phasebench/scene.hpp"

namespace phasebench {

/// Four interferograms recorded with reference shifts 0, pi/2, pi, 3pi/2.
template <typename Frame>
struct BasicPsmFrameSet
{
    std::array<Frame, 4> frames;

    const GridShape& shape() const { return frames[0].shape(); }

    void validate() const
    {
        for (const auto& f : frames)
            require_same_shape(frames[0].shape(), f.shape(), "PSM frame set");
    }
};

using PsmFrameSet = BasicPsmFrameSet<CountFrame>;
using PsmIntensitySet = BasicPsmFrameSet<IntensityMap>;

/// Four-step estimate of the absolute object phase,
/// wrap(atan2(I_3pi/2 - I_pi/2, I_0 - I_pi) + phi_R). Pixels where both
/// differences vanish get relative phase 0.
PhaseMap estimate_phase_psm(const PsmFrameSet& frames, const PhaseMap& reference_phase);
PhaseMap estimate_phase_psm(const PsmIntensitySet& frames, const PhaseMap& reference_phase);

enum class GroundTruthMode
{
    Noiseless,
    SimulatedHighLight,
};

inline constexpr double kMinHighLightBudget = 5000.0;

struct GroundTruth
{
    PhaseMap phase;
    /// Set when the high-light budget is below the recommended minimum.
    std::optional<std::string> warning;
};

/// Reference phase map for error evaluation: either wrap(arg O) exactly, or the
/// PSM estimate from four Poisson frames whose summed budget is n0_hll.
/// The four frames use streams seed.stream_index + 0..3.
GroundTruth make_ground_truth(const SceneConfig& scene, GroundTruthMode mode, double n0_hll, const SeedSpec& seed,
                              unsigned threads = 1);

} // namespace phasebench
