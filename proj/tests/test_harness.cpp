#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "phasebench/harness.hpp"
#include "phasebench/phm_io.hpp"

using namespace phasebench;
namespace fs = std::filesystem;

namespace {

class TempDir
{
  public:
    explicit TempDir(const std::string& name)
      : path_(fs::temp_directory_path() / ("phasebench_" + name))
    {
        fs::remove_all(path_);
        fs::create_directories(path_);
    }
    ~TempDir() { fs::remove_all(path_); }
    const fs::path& path() const { return path_; }

  private:
    fs::path path_;
};

std::string slurp(const fs::path& p)
{
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

ExperimentConfig quick_config()
{
    ExperimentConfig c;
    c.n0_list = {10, 58, 225};
    c.seeds_per_point = 2;
    c.persist_artifacts = false;
    return c;
}

} // namespace

TEST(Config, ParsesKeysAndComments)
{
    const ExperimentConfig c = parse_config(R"(# study settings
grid.width = 64
grid.height = 32
tilt.kx = 4   # cycles per width
tilt.ky = -3
n0_list = 10, 20,40
seeds_per_point = 3
master_seed = 18446744073709551615
opt.mode = alternating
opt.alpha = 0.25
opt.init = zero
ground_truth = simulated_hll
n0_hll = 9000
reference = known
shot_noise = false
border = 2
remove_piston = true
threads = 4
)");
    EXPECT_EQ(c.scene.shape, GridShape(64, 32));
    EXPECT_EQ(c.scene.tilt.kx, 4.0);
    EXPECT_EQ(c.scene.tilt.ky, -3.0);
    // Grid change without an explicit centre recentres the lens.
    EXPECT_EQ(c.scene.lens.center_x, 31.5);
    EXPECT_EQ(c.scene.lens.center_y, 15.5);
    EXPECT_EQ(c.n0_list, (std::vector<double>{10, 20, 40}));
    EXPECT_EQ(c.seeds_per_point, 3);
    EXPECT_EQ(c.master_seed, 18446744073709551615ull);
    EXPECT_EQ(c.mode, OptimizerMode::Alternating);
    EXPECT_FALSE(c.optimizer.auto_alpha);
    EXPECT_EQ(c.optimizer.alpha, 0.25);
    EXPECT_EQ(c.optimizer.init_mode, InitMode::Zero);
    EXPECT_EQ(c.truth_mode, GroundTruthMode::SimulatedHighLight);
    EXPECT_EQ(c.n0_hll, 9000.0);
    EXPECT_EQ(c.reference_source, ReferenceSource::Known);
    EXPECT_FALSE(c.shot_noise);
    EXPECT_EQ(c.border, 2u);
    EXPECT_TRUE(c.remove_piston);
    EXPECT_EQ(c.threads, 4u);
}

TEST(Config, RejectsBadInput)
{
    auto fails_on_line = [](const std::string& text, const std::string& line) {
        try
        {
            parse_config(text);
        }
        catch (const ConfigError& e)
        {
            return std::string(e.what()).find("line " + line) != std::string::npos;
        }
        return false;
    };
    EXPECT_TRUE(fails_on_line("grid.width = 8\nbogus = 1\n", "2"));
    EXPECT_TRUE(fails_on_line("seeds_per_point = 2\nseeds_per_point = 3\n", "2"));
    EXPECT_TRUE(fails_on_line("opt.alpha = lots\n", "1"));
    EXPECT_TRUE(fails_on_line("no equals sign\n", "1"));
    EXPECT_TRUE(fails_on_line("opt.mode = sideways\n", "1"));
    EXPECT_THROW(parse_config("n0_list = 10, -5\n"), ConfigError);
    EXPECT_THROW(parse_config("seeds_per_point = 0\n"), ConfigError);
    EXPECT_THROW(parse_config("tilt.kx = 64\n"), ConfigError);
    EXPECT_THROW(parse_config("opt.window_radius = 0\n"), ConfigError);
    EXPECT_THROW(load_config("/nonexistent/phasebench.cfg"), IoError);
}

TEST(Config, TextRoundTrip)
{
    ExperimentConfig c = parse_config("grid.width = 96\nlens.center_x = 10.25\nopt.alpha = 1e-3\n"
                                      "opt.t_init = 0.5\nn0_list = 1, 2.5, 800\ncalibration_n0 = 300\n");
    const std::string text = to_config_text(c);
    const ExperimentConfig back = parse_config(text);
    EXPECT_EQ(to_config_text(back), text);
    EXPECT_EQ(back.scene.lens.center_x, 10.25);
    EXPECT_EQ(back.optimizer.t_init, 0.5);
    EXPECT_EQ(back.n0_list, c.n0_list);
    EXPECT_EQ(to_config_text(parse_config(to_config_text(ExperimentConfig{}))), to_config_text(ExperimentConfig{}));
}

TEST(Config, FileLoadingLayersOnBase)
{
    TempDir dir("cfg");
    {
        std::ofstream out(dir.path() / "a.cfg");
        out << "seeds_per_point = 7\n";
    }
    ExperimentConfig base;
    base.master_seed = 99;
    const ExperimentConfig c = load_config(dir.path() / "a.cfg", base);
    EXPECT_EQ(c.seeds_per_point, 7);
    EXPECT_EQ(c.master_seed, 99u);
}

TEST(Harness, RunSingleIsBitReproducible)
{
    const ExperimentConfig c = quick_config();
    const SweepRecord a = run_single(c, 58.0, {3, 11});
    const SweepRecord b = run_single(c, 58.0, {3, 11});
    EXPECT_EQ(a.e_ps, b.e_ps);
    EXPECT_EQ(a.e_co, b.e_co);
    EXPECT_EQ(a.iters_co, b.iters_co);
    const SweepRecord other = run_single(c, 58.0, {3, 12});
    EXPECT_NE(a.e_co, other.e_co);
}

TEST(Harness, EstimatorsReceiveEqualPhotons)
{
    const ExperimentConfig c = quick_config();
    const ExperimentContext ctx = prepare_experiment(c);
    for (double n0 : {1.0, 58.0, 800.0})
    {
        const RunOutcome r = run_single_detailed(c, ctx, n0, {1, 0});
        EXPECT_NEAR(r.psm_photons, r.opt_photons, 1e-9 * r.opt_photons);
        EXPECT_NEAR(r.opt_photons, n0 * 128 * 128, 1e-9 * r.opt_photons);
    }
    EXPECT_THROW(run_single_detailed(c, ctx, 0.0, {1, 0}), DomainError);
}

TEST(Harness, CalibratedReferenceMatchesKnownOnGridCarrier)
{
    ExperimentConfig known = quick_config();
    known.reference_source = ReferenceSource::Known;
    const ExperimentContext a = prepare_experiment(known);
    const ExperimentContext b = prepare_experiment(quick_config());
    for (std::size_t i = 0; i < a.estimator_reference.size(); ++i)
        ASSERT_LT(std::abs(a.estimator_reference[i] - b.estimator_reference[i]), 1e-9);
}

TEST(Harness, PersistedArtifactsReproduceRecord)
{
    TempDir dir("artifacts");
    ExperimentConfig c = quick_config();
    c.out_dir = dir.path();
    c.persist_artifacts = true;
    c.n0_list = {20, 112, 450};
    c.seeds_per_point = 1;
    const SweepResult r = run_sweep(c);
    ASSERT_EQ(r.records.size(), 3u);

    const PhaseMap truth = read_phm<PhaseMap>(dir.path() / "truth_phase.phm");
    const SweepRecord& rec = r.records[1];
    const fs::path run = dir.path() / "runs" / "n0_112_run1";
    const PhaseMap ps = read_phm<PhaseMap>(run / "phase_ps.phm");
    const PhaseMap co = read_phm<PhaseMap>(run / "phase_co.phm");
    EXPECT_EQ(rms_wrapped_error(ps, truth), rec.e_ps);
    EXPECT_EQ(rms_wrapped_error(co, truth), rec.e_co);
    EXPECT_EQ(noise_gain(rms_wrapped_error(ps, truth), rms_wrapped_error(co, truth)), rec.gain);
    EXPECT_EQ(phase_of(read_phm<ComplexField>(run / "field_co.phm")), co);

    // The persisted frames reproduce the estimates.
    PsmFrameSet frames;
    for (std::size_t k = 0; k < 4; ++k)
        frames.frames[k] = read_phm<CountFrame>(run / ("frame_psm_" + std::to_string(k) + ".phm"));
    const ExperimentContext ctx = prepare_experiment(c);
    const SceneFields f = expose(ctx.unit_fields, 112.0);
    ComplexField ref = ctx.estimator_reference;
    const double s = std::abs(f.reference[0]) / std::abs(ctx.unit_fields.reference[0]);
    for (auto& v : ref)
        v *= s;
    EXPECT_EQ(estimate_phase_psm(frames, phase_of(ref)), ps);
    const ReconstructionReport rep = reconstruct(read_phm<CountFrame>(run / "frame_opt.phm"), ref, c.optimizer);
    EXPECT_EQ(phase_of(rep.field), co);

    const std::string trace = slurp(run / "cost_trace.csv");
    EXPECT_EQ(trace.substr(0, trace.find('\n')), "iteration,cost,step_size,grad_norm");
    EXPECT_EQ(std::count(trace.begin(), trace.end(), '\n'), rec.iters_co + 2);

    const auto parsed = parse_sweep_csv(slurp(dir.path() / "sweep.csv"));
    ASSERT_EQ(parsed.size(), 3u);
    EXPECT_EQ(parsed[1].e_co, rec.e_co);
    EXPECT_TRUE(fs::exists(dir.path() / "fits.csv"));
    EXPECT_TRUE(fs::exists(dir.path() / "summary.txt"));
    EXPECT_EQ(to_config_text(load_config(dir.path() / "config.txt")), to_config_text(c));
}

TEST(Harness, SweepIsThreadInvariant)
{
    ExperimentConfig c = quick_config();
    const SweepResult one = run_sweep(c);
    c.threads = 3;
    const SweepResult three = run_sweep(c);
    EXPECT_EQ(sweep_csv(one.records), sweep_csv(three.records));
    EXPECT_EQ(one.cost_traces, three.cost_traces);
    EXPECT_EQ(one.records.size(), 6u);
    EXPECT_TRUE(one.failures.empty());
}

TEST(Harness, SweepErrorWhenEveryRunFails)
{
    TempDir dir("sweep_error");
    {
        // A file where the runs directory should go makes every run fail.
        std::ofstream block(dir.path() / "runs");
        block << "x";
    }
    ExperimentConfig c = quick_config();
    c.out_dir = dir.path();
    c.persist_artifacts = true;
    try
    {
        run_sweep(c);
        FAIL() << "expected SweepError";
    }
    catch (const SweepError& e)
    {
        EXPECT_EQ(e.n0(), 10.0);
    }
}

TEST(Harness, HalvingWithoutShotNoiseChangesNothing)
{
    ExperimentConfig c = quick_config();
    c.shot_noise = false;
    c.truth_mode = GroundTruthMode::SimulatedHighLight;
    c.n0_hll = 6000;
    const HalvingReport r = halve_budget_check(c, 225.0);
    EXPECT_EQ(r.half.n0, 112.5);
    EXPECT_NEAR(r.ps_ratio, 1.0, 0.01);
    EXPECT_NEAR(r.co_ratio, 1.0, 0.01);
}

TEST(Harness, NoiselessTruthWithoutShotNoiseLeavesPsmExact)
{
    ExperimentConfig c = quick_config();
    c.shot_noise = false;
    c.reference_source = ReferenceSource::Known;
    const ExperimentContext ctx = prepare_experiment(c);
    const RunOutcome r = run_single_detailed(c, ctx, 10.0, {1, 0});
    EXPECT_LT(r.record.e_ps, 1e-10);
    EXPECT_GT(r.record.e_co, 0.0);
}
