#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "phasebench/metrics.hpp"

using namespace phasebench;

TEST(RmsWrappedError, Examples)
{
    const GridShape s(4, 4);
    PhaseMap a(s, 1.234);
    EXPECT_EQ(rms_wrapped_error(a, a), 0.0);

    const PhaseMap near_pi(s, kPi - 0.1);
    const PhaseMap near_minus_pi(s, -kPi + 0.1);
    EXPECT_NEAR(rms_wrapped_error(near_pi, near_minus_pi), 0.2, 1e-12);

    PhaseMap checker(s);
    for (std::size_t y = 0; y < 4; ++y)
        for (std::size_t x = 0; x < 4; ++x)
            checker(x, y) = (x + y) % 2 ? 0.3 : -0.3;
    EXPECT_NEAR(rms_wrapped_error(checker, PhaseMap(s)), 0.3, 1e-15);
}

TEST(RmsWrappedError, SymmetricAndOffsetInvariant)
{
    std::mt19937_64 gen(4);
    std::uniform_real_distribution<double> u(-kPi, kPi);
    const GridShape s(16, 16);
    PhaseMap a(s);
    PhaseMap b(s);
    for (std::size_t i = 0; i < s.pixels(); ++i)
    {
        a[i] = u(gen);
        b[i] = u(gen);
    }
    EXPECT_NEAR(rms_wrapped_error(a, b), rms_wrapped_error(b, a), 1e-14);
    PhaseMap a2 = a;
    PhaseMap b2 = b;
    for (std::size_t i = 0; i < s.pixels(); ++i)
    {
        a2[i] = wrap_phase(a[i] + 2.2);
        b2[i] = wrap_phase(b[i] + 2.2);
    }
    EXPECT_NEAR(rms_wrapped_error(a2, b2), rms_wrapped_error(a, b), 1e-12);
}

TEST(RmsWrappedError, PistonRemovalAndBorder)
{
    const GridShape s(8, 8);
    PhaseMap a(s, 0.0);
    PhaseMap b(s, 0.0);
    for (std::size_t i = 0; i < s.pixels(); ++i)
        b[i] = wrap_phase(3.0 + (i % 2 ? 0.05 : -0.05));
    EXPECT_NEAR(rms_wrapped_error(a, b, true), 0.05, 1e-12);
    EXPECT_GT(rms_wrapped_error(a, b), 2.9);

    // Errors confined to the outer ring disappear with border = 1.
    PhaseMap c(s, 0.0);
    for (std::size_t x = 0; x < 8; ++x)
    {
        c(x, 0) = 1.0;
        c(x, 7) = 1.0;
        c(0, x) = 1.0;
        c(7, x) = 1.0;
    }
    EXPECT_EQ(rms_wrapped_error(a, c, false, 1), 0.0);
    EXPECT_GT(rms_wrapped_error(a, c), 0.5);
    EXPECT_THROW(rms_wrapped_error(a, c, false, 4), DomainError);
    EXPECT_THROW(rms_wrapped_error(a, PhaseMap(GridShape(8, 7))), DimensionError);
}

TEST(WrappedDifference, PerPixel)
{
    const PhaseMap a(GridShape(1, 1), 3.0);
    const PhaseMap b(GridShape(1, 1), -3.0);
    EXPECT_NEAR(wrapped_difference(a, b)[0], 6.0 - kTwoPi, 1e-15);
}

TEST(NoiseGain, ExamplesAndErrors)
{
    EXPECT_EQ(noise_gain(0.8, 0.2), 4.0);
    EXPECT_EQ(noise_gain(0.1, 0.1), 1.0);
    EXPECT_THROW(noise_gain(0.5, 0.0), DomainError);
    EXPECT_THROW(noise_gain(-0.5, 0.1), DomainError);
}

TEST(PowerLaw, ExactPowerLaw)
{
    std::vector<std::pair<double, double>> pts;
    for (double n0 : {10.0, 20.0, 58.0, 112.0, 225.0, 450.0, 800.0})
        pts.emplace_back(n0, 2.0 * std::pow(n0, -0.5));
    const PowerLawFit f = fit_power_law(pts);
    EXPECT_NEAR(f.exponent, -0.5, 1e-12);
    EXPECT_NEAR(f.prefactor, 2.0, 1e-12);
    EXPECT_NEAR(f.exponent_ci95, 0.0, 1e-10);
    EXPECT_NEAR(f.r_squared, 1.0, 1e-12);
}

TEST(PowerLaw, ConstantSeries)
{
    const PowerLawFit f = fit_power_law({{1.0, 3.0}, {10.0, 3.0}, {100.0, 3.0}});
    EXPECT_NEAR(f.exponent, 0.0, 1e-14);
    EXPECT_NEAR(f.prefactor, 3.0, 1e-12);
}

TEST(PowerLaw, NoisyDataAndStudentInterval)
{
    std::mt19937_64 gen(8);
    std::normal_distribution<double> noise(0.0, 0.02);
    std::vector<std::pair<double, double>> pts;
    const double n0s[] = {10.0, 20.0, 58.0, 112.0, 225.0, 450.0, 800.0};
    for (double n0 : n0s)
        pts.emplace_back(n0, 1.5 * std::pow(n0, -0.25) * std::exp(noise(gen)));
    const PowerLawFit f = fit_power_law(pts);
    EXPECT_NEAR(f.exponent, -0.25, 0.05);

    // Slope standard error by hand; 2.570581836 is the 97.5% t quantile at 5 dof.
    double mx = 0.0, my = 0.0;
    for (const auto& [x, y] : pts)
    {
        mx += std::log(x) / 7.0;
        my += std::log(y) / 7.0;
    }
    double sxx = 0.0, sxy = 0.0;
    for (const auto& [x, y] : pts)
    {
        sxx += (std::log(x) - mx) * (std::log(x) - mx);
        sxy += (std::log(x) - mx) * (std::log(y) - my);
    }
    const double slope = sxy / sxx;
    double sse = 0.0;
    for (const auto& [x, y] : pts)
    {
        const double r = std::log(y) - my - slope * (std::log(x) - mx);
        sse += r * r;
    }
    const double se = std::sqrt(sse / 5.0 / sxx);
    EXPECT_NEAR(f.exponent, slope, 1e-12);
    EXPECT_NEAR(f.exponent_ci95 / se, 2.570581836, 1e-8);
}

TEST(PowerLaw, ScalingEquivariance)
{
    std::vector<std::pair<double, double>> pts{{10, 0.9}, {20, 0.7}, {58, 0.41}, {112, 0.3}, {225, 0.22}};
    const PowerLawFit f = fit_power_law(pts);
    // A power-of-two scale is exact in binary floating point.
    auto scaled = pts;
    for (auto& p : scaled)
        p.second *= 4.0;
    const PowerLawFit g = fit_power_law(scaled);
    EXPECT_EQ(g.exponent, f.exponent);
    EXPECT_EQ(g.prefactor, 4.0 * f.prefactor);
    for (auto& p : scaled)
        p.second *= 0.37;
    const PowerLawFit h = fit_power_law(scaled);
    EXPECT_NEAR(h.exponent, f.exponent, 1e-12);
    EXPECT_NEAR(h.prefactor, 4.0 * 0.37 * f.prefactor, 1e-12);
}

TEST(PowerLaw, Errors)
{
    EXPECT_THROW(fit_power_law({{1, 1}, {2, 2}}), DomainError);
    EXPECT_THROW(fit_power_law({{1, 1}, {2, 0}, {3, 3}}), DomainError);
    EXPECT_THROW(fit_power_law({{5, 1}, {5, 2}, {5, 3}}), DomainError);
}

TEST(Aggregate, MeansPerBudget)
{
    std::vector<SweepRecord> recs;
    recs.push_back({20, {1, 0}, 0.4, 0.2, 2.0, 10, true});
    recs.push_back({10, {1, 1}, 0.8, 0.2, 4.0, 12, true});
    recs.push_back({10, {1, 2}, 0.6, 0.3, 2.0, 14, true});
    const auto pts = aggregate(recs);
    ASSERT_EQ(pts.size(), 2u);
    EXPECT_EQ(pts[0].n0, 10.0);
    EXPECT_EQ(pts[0].runs, 2u);
    EXPECT_NEAR(pts[0].e_ps, 0.7, 1e-15);
    EXPECT_NEAR(pts[0].gain, 3.0, 1e-15);
    EXPECT_EQ(pts[1].runs, 1u);
}

TEST(SweepCsv, RoundTrip)
{
    std::vector<SweepRecord> recs;
    recs.push_back({10, {1, 0}, 0.123456789012345678, 0.05, 2.469135780246913, 17, true});
    recs.push_back({800, {1, 34}, 1e-3, 7e-4, 1.4285714285714286, 9, true});
    const std::string text = sweep_csv(recs);
    EXPECT_EQ(text.substr(0, text.find('\n')), kSweepCsvHeader);
    const auto back = parse_sweep_csv(text);
    ASSERT_EQ(back.size(), 2u);
    for (std::size_t i = 0; i < 2; ++i)
    {
        EXPECT_EQ(back[i].n0, recs[i].n0);
        EXPECT_EQ(back[i].seed.stream_index, recs[i].seed.stream_index);
        EXPECT_EQ(back[i].e_ps, recs[i].e_ps);
        EXPECT_EQ(back[i].e_co, recs[i].e_co);
        EXPECT_EQ(back[i].gain, recs[i].gain);
        EXPECT_EQ(back[i].iters_co, recs[i].iters_co);
    }
    EXPECT_THROW(parse_sweep_csv("n0,seed\n1,2\n"), IoError);
}
