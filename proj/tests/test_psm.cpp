#include <gtest/gtest.h>

#include <cmath>

#include "phasebench/field.hpp"
#include "phasebench/metrics.hpp"
#include "phasebench/psm.hpp"

using namespace phasebench;

namespace {

PsmIntensitySet noiseless_frames(const ComplexField& r, const ComplexField& o)
{
    PsmIntensitySet set;
    for (std::size_t k = 0; k < 4; ++k)
        set.frames[k] = interfere(apply_phase_shift(r, kPsmShifts[k]), o);
    return set;
}

PsmIntensitySet single(double a, double b, double c, double d)
{
    PsmIntensitySet set;
    const double v[4] = {a, b, c, d};
    for (std::size_t k = 0; k < 4; ++k)
        set.frames[k] = IntensityMap(GridShape(1, 1), v[k]);
    return set;
}

} // namespace

TEST(Psm, QuarterTurnExample)
{
    const PsmIntensitySet set = single(3.4142135623730951, 0.5857864376269049, 0.5857864376269049,
                                       3.4142135623730951);
    EXPECT_NEAR(estimate_phase_psm(set, PhaseMap(GridShape(1, 1)))[0], kPi / 4, 1e-12);
}

TEST(Psm, ShiftSignConventionFromForwardModel)
{
    const GridShape s(1, 1);
    for (double d : {-2.9, -1.0, 0.25, kPi / 4, 2.0, kPi})
    {
        const PsmIntensitySet set = noiseless_frames(ComplexField(s, 1.0), ComplexField(s, std::polar(1.0, d)));
        EXPECT_NEAR(estimate_phase_psm(set, PhaseMap(s))[0], wrap_phase(d), 1e-12) << d;
    }
}

TEST(Psm, DegenerateAndZeroRelativePhase)
{
    const GridShape s(1, 1);
    EXPECT_EQ(estimate_phase_psm(single(2.0, 2.0, 2.0, 2.0), PhaseMap(s))[0], 0.0);
    const PsmIntensitySet same = noiseless_frames(ComplexField(s, 1.0), ComplexField(s, 1.0));
    EXPECT_EQ(same.frames[1][0], same.frames[3][0]);
    EXPECT_EQ(estimate_phase_psm(same, PhaseMap(s))[0], 0.0);
}

TEST(Psm, AddsReferencePhaseBack)
{
    const GridShape s(1, 1);
    const PhaseMap ref(s, 2.5);
    EXPECT_NEAR(estimate_phase_psm(single(3.0, 1.0, 1.0, 3.0), ref)[0], wrap_phase(2.5 + kPi / 4), 1e-12);
}

TEST(Psm, NoiselessRoundTripOnDefaultScene)
{
    const SceneFields f = synthesize(SceneConfig{});
    const PhaseMap est = estimate_phase_psm(noiseless_frames(f.reference, f.object), phase_of(f.reference));
    const PhaseMap truth = phase_of(f.object);
    for (std::size_t i = 0; i < est.size(); ++i)
        ASSERT_LT(std::abs(wrap_phase(est[i] - truth[i])), 1e-10) << i;
}

TEST(Psm, ExposureInvariantAndAntisymmetric)
{
    SceneConfig scene;
    scene.shape = GridShape(32, 32);
    scene.lens = scene.lens.centered_on(scene.shape);
    const SceneFields f = synthesize(scene);
    const PsmIntensitySet set = noiseless_frames(f.reference, f.object);
    const PhaseMap zero(scene.shape);
    const PhaseMap base = estimate_phase_psm(set, zero);

    PsmIntensitySet bright = set;
    for (auto& fr : bright.frames)
        for (auto& v : fr)
            v *= 37.5;
    const PhaseMap scaled = estimate_phase_psm(bright, zero);
    for (std::size_t i = 0; i < base.size(); ++i)
        EXPECT_NEAR(wrap_phase(scaled[i] - base[i]), 0.0, 1e-12);

    // Exchanging the quadrature pair negates the phase; exchanging both pairs
    // flips both atan2 arguments, which is a half-turn rather than a negation.
    PsmIntensitySet quadrature;
    quadrature.frames = {set.frames[0], set.frames[3], set.frames[2], set.frames[1]};
    PsmIntensitySet both;
    both.frames = {set.frames[2], set.frames[3], set.frames[0], set.frames[1]};
    const PhaseMap neg = estimate_phase_psm(quadrature, zero);
    const PhaseMap half = estimate_phase_psm(both, zero);
    for (std::size_t i = 0; i < base.size(); ++i)
    {
        EXPECT_NEAR(wrap_phase(neg[i] + base[i]), 0.0, 1e-12);
        EXPECT_NEAR(std::abs(wrap_phase(half[i] - base[i])), kPi, 1e-12);
    }
}

TEST(Psm, CountFramesMatchIntensityPath)
{
    PsmFrameSet counts;
    PsmIntensitySet reals;
    const std::uint32_t v[4] = {7, 2, 1, 9};
    for (std::size_t k = 0; k < 4; ++k)
    {
        counts.frames[k] = CountFrame(GridShape(2, 1), v[k]);
        reals.frames[k] = to_intensity(counts.frames[k]);
    }
    const PhaseMap ref(GridShape(2, 1), 0.1);
    EXPECT_EQ(estimate_phase_psm(counts, ref), estimate_phase_psm(reals, ref));
}

TEST(Psm, ShapeMismatch)
{
    PsmIntensitySet set = single(1, 2, 3, 4);
    set.frames[2] = IntensityMap(GridShape(2, 1));
    EXPECT_THROW(estimate_phase_psm(set, PhaseMap(GridShape(1, 1))), DimensionError);
    EXPECT_THROW(estimate_phase_psm(single(1, 2, 3, 4), PhaseMap(GridShape(2, 1))), DimensionError);
}

TEST(GroundTruth, NoiselessIsExactArg)
{
    const SceneConfig scene;
    const GroundTruth t = make_ground_truth(scene, GroundTruthMode::Noiseless, 0.0, {1, 0});
    EXPECT_EQ(t.phase, phase_of(synthesize(scene).object));
    EXPECT_FALSE(t.warning);
}

TEST(GroundTruth, HighLightIsCloseToTruthAndReproducible)
{
    const SceneConfig scene;
    const PhaseMap exact = phase_of(synthesize(scene).object);
    const GroundTruth a = make_ground_truth(scene, GroundTruthMode::SimulatedHighLight, 5000.0, {1, 0});
    const GroundTruth b = make_ground_truth(scene, GroundTruthMode::SimulatedHighLight, 5000.0, {2, 0});
    EXPECT_FALSE(a.warning);
    EXPECT_LT(rms_wrapped_error(a.phase, exact), 0.05);
    EXPECT_LT(rms_wrapped_error(a.phase, b.phase), 0.05);
    EXPECT_GT(rms_wrapped_error(a.phase, b.phase), 0.0);
    EXPECT_EQ(a.phase, make_ground_truth(scene, GroundTruthMode::SimulatedHighLight, 5000.0, {1, 0}, 4).phase);
}

TEST(GroundTruth, LowBudgetWarnsButRuns)
{
    const GroundTruth t = make_ground_truth(SceneConfig{}, GroundTruthMode::SimulatedHighLight, 400.0, {1, 0});
    ASSERT_TRUE(t.warning);
    EXPECT_NE(t.warning->find("5000"), std::string::npos);
}
