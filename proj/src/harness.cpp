#include "phasebench/harness.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <exception>
#include <fstream>
#include <map>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include "phasebench/field.hpp"
#include "phasebench/phm_io.hpp"
#include "phasebench/photon.hpp"

namespace phasebench {
namespace {

std::string trim(std::string_view s)
{
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos)
        return {};
    const auto last = s.find_last_not_of(" \t\r");
    return std::string(s.substr(first, last - first + 1));
}

std::string lower(std::string s)
{
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

class LineError
{
  public:
    explicit LineError(std::size_t line)
      : line_(line)
    {}
    [[noreturn]] void fail(const std::string& msg) const
    {
        throw ConfigError("config line " + std::to_string(line_) + ": " + msg);
    }

  private:
    std::size_t line_;
};

double to_double(const std::string& v, const LineError& at)
{
    double out = 0.0;
    const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
    if (res.ec != std::errc{} || res.ptr != v.data() + v.size() || !std::isfinite(out))
        at.fail("expected a number, got '" + v + "'");
    return out;
}

template <typename Int>
Int to_int(const std::string& v, const LineError& at)
{
    Int out{};
    const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
    if (res.ec != std::errc{} || res.ptr != v.data() + v.size())
        at.fail("expected an integer, got '" + v + "'");
    return out;
}

bool to_bool(const std::string& v, const LineError& at)
{
    const std::string s = lower(v);
    if (s == "true" || s == "1" || s == "yes" || s == "on")
        return true;
    if (s == "false" || s == "0" || s == "no" || s == "off")
        return false;
    at.fail("expected a boolean, got '" + v + "'");
}

std::vector<double> to_list(const std::string& v, const LineError& at)
{
    std::vector<double> out;
    std::string cell;
    std::istringstream in(v);
    while (std::getline(in, cell, ','))
    {
        cell = trim(cell);
        if (cell.empty())
            at.fail("empty entry in list");
        out.push_back(to_double(cell, at));
    }
    if (out.empty())
        at.fail("list is empty");
    return out;
}

std::string join(const std::vector<double>& xs)
{
    std::string out;
    for (std::size_t i = 0; i < xs.size(); ++i)
        out += (i ? ", " : "") + format_double(xs[i]);
    return out;
}

std::string bool_text(bool b) { return b ? "true" : "false"; }

std::string run_dir_name(double n0, std::uint64_t run)
{
    return "n0_" + format_double(n0) + "_run" + std::to_string(run);
}

void write_text(const std::filesystem::path& path, const std::string& text)
{
    write_file_bytes(path, std::vector<std::uint8_t>(text.begin(), text.end()));
}

std::string cost_trace_csv(const ReconstructionReport& report)
{
    std::string out = "iteration,cost,step_size,grad_norm\n";
    if (!report.cost_trace.empty())
        out += "0," + format_double(report.cost_trace.front()) + ",0,0\n";
    for (const auto& r : report.records)
        out += std::to_string(r.iteration) + "," + format_double(r.cost) + "," + format_double(r.step_size) + "," +
               format_double(r.grad_norm) + "\n";
    return out;
}

ComplexField scaled(const ComplexField& f, double s)
{
    ComplexField out(f.shape());
    for (std::size_t i = 0; i < f.size(); ++i)
        out[i] = f[i] * s;
    return out;
}

double total(const IntensityMap& m)
{
    double s = 0.0;
    for (double v : m)
        s += v;
    return s;
}

SweepPoint mean_point(double n0, const std::vector<SweepRecord>& records)
{
    auto points = aggregate(records);
    if (points.size() != 1)
        throw SweepError("every run at n0 = " + format_double(n0) + " failed", n0);
    return points.front();
}

} // namespace

void ExperimentConfig::validate() const
{
    scene.validate();
    if (!(amplitude_ratio > 0.0) || !std::isfinite(amplitude_ratio))
        throw ConfigError("amplitude_ratio must be positive");
    if (n0_list.empty())
        throw ConfigError("n0_list must not be empty");
    for (double n0 : n0_list)
        if (!(n0 > 0.0) || !std::isfinite(n0))
            throw ConfigError("n0_list entries must be positive");
    if (seeds_per_point < 1)
        throw ConfigError("seeds_per_point must be at least 1");
    optimizer.validate();
    if (2 * border >= scene.shape.width() || 2 * border >= scene.shape.height())
        throw ConfigError("border crop leaves no pixels");
    if (truth_mode == GroundTruthMode::SimulatedHighLight && !(n0_hll > 0.0))
        throw ConfigError("n0_hll must be positive");
    if (!(calibration_n0 >= 0.0))
        throw ConfigError("calibration_n0 must be nonnegative");
    if (threads < 1)
        throw ConfigError("threads must be at least 1");
}

SceneConfig ExperimentConfig::effective_scene() const
{
    SceneConfig s = scene;
    s.lens.amplitude = amplitude_ratio * scene.tilt.amplitude;
    return s;
}

ExperimentConfig parse_config(std::string_view text, ExperimentConfig cfg)
{
    int radius = cfg.optimizer.window.radius();
    double sigma = cfg.optimizer.window.sigma();
    bool window_set = false;
    bool grid_set = false;
    bool center_set = false;
    std::size_t width = cfg.scene.shape.width();
    std::size_t height = cfg.scene.shape.height();
    std::set<std::string> seen;

    std::istringstream in{std::string(text)};
    std::string raw;
    std::size_t lineno = 0;
    while (std::getline(in, raw))
    {
        ++lineno;
        const LineError at(lineno);
        if (const auto hash = raw.find('#'); hash != std::string::npos)
            raw.erase(hash);
        const std::string line = trim(raw);
        if (line.empty())
            continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            at.fail("expected 'key = value'");
        const std::string key = lower(trim(line.substr(0, eq)));
        const std::string value = trim(line.substr(eq + 1));
        if (value.empty())
            at.fail("missing value for '" + key + "'");
        if (!seen.insert(key).second)
            at.fail("duplicate key '" + key + "'");
        auto& opt = cfg.optimizer;

        if (key == "grid.width")
        {
            width = to_int<std::size_t>(value, at);
            grid_set = true;
        }
        else if (key == "grid.height")
        {
            height = to_int<std::size_t>(value, at);
            grid_set = true;
        }
        else if (key == "tilt.kx")
            cfg.scene.tilt.kx = to_double(value, at);
        else if (key == "tilt.ky")
            cfg.scene.tilt.ky = to_double(value, at);
        else if (key == "tilt.amplitude")
            cfg.scene.tilt.amplitude = to_double(value, at);
        else if (key == "tilt.phase0")
            cfg.scene.tilt.phase0 = to_double(value, at);
        else if (key == "lens.focal_length")
            cfg.scene.lens.focal_length = to_double(value, at);
        else if (key == "lens.wavelength")
            cfg.scene.lens.wavelength = to_double(value, at);
        else if (key == "lens.pixel_pitch")
            cfg.scene.lens.pixel_pitch = to_double(value, at);
        else if (key == "lens.center_x")
        {
            cfg.scene.lens.center_x = to_double(value, at);
            center_set = true;
        }
        else if (key == "lens.center_y")
        {
            cfg.scene.lens.center_y = to_double(value, at);
            center_set = true;
        }
        else if (key == "amplitude_ratio")
            cfg.amplitude_ratio = to_double(value, at);
        else if (key == "n0_list")
            cfg.n0_list = to_list(value, at);
        else if (key == "seeds_per_point")
            cfg.seeds_per_point = to_int<int>(value, at);
        else if (key == "master_seed")
            cfg.master_seed = to_int<std::uint64_t>(value, at);
        else if (key == "opt.mode")
        {
            const std::string m = lower(value);
            if (m == "gradient")
                cfg.mode = OptimizerMode::Gradient;
            else if (m == "alternating")
                cfg.mode = OptimizerMode::Alternating;
            else
                at.fail("opt.mode must be gradient or alternating");
        }
        else if (key == "opt.alpha")
        {
            if (lower(value) == "auto")
                opt.auto_alpha = true;
            else
            {
                opt.alpha = to_double(value, at);
                opt.auto_alpha = false;
            }
        }
        else if (key == "opt.alpha_balance")
            opt.alpha_balance = to_double(value, at);
        else if (key == "opt.window_radius")
        {
            radius = to_int<int>(value, at);
            window_set = true;
        }
        else if (key == "opt.window_sigma")
        {
            sigma = to_double(value, at);
            window_set = true;
        }
        else if (key == "opt.max_iters")
            opt.max_iters = to_int<int>(value, at);
        else if (key == "opt.rel_tol")
            opt.rel_tol = to_double(value, at);
        else if (key == "opt.ls_shrink")
            opt.ls_shrink = to_double(value, at);
        else if (key == "opt.ls_slope")
            opt.ls_slope = to_double(value, at);
        else if (key == "opt.ls_max_shrinks")
            opt.ls_max_shrinks = to_int<int>(value, at);
        else if (key == "opt.t_init")
        {
            if (lower(value) == "auto")
                opt.t_init.reset();
            else
                opt.t_init = to_double(value, at);
        }
        else if (key == "opt.weight_floor")
            opt.weight_floor = to_double(value, at);
        else if (key == "opt.init")
        {
            const std::string m = lower(value);
            if (m == "sideband")
                opt.init_mode = InitMode::Sideband;
            else if (m == "zero")
                opt.init_mode = InitMode::Zero;
            else
                at.fail("opt.init must be sideband or zero");
        }
        else if (key == "opt.sideband_margin")
            opt.sideband_margin = to_double(value, at);
        else if (key == "opt.adapt_alpha")
            opt.adapt_alpha = to_bool(value, at);
        else if (key == "opt.alpha_adapt_factor")
            opt.alpha_adapt_factor = to_double(value, at);
        else if (key == "remove_piston")
            cfg.remove_piston = to_bool(value, at);
        else if (key == "border")
            cfg.border = to_int<std::size_t>(value, at);
        else if (key == "ground_truth")
        {
            const std::string m = lower(value);
            if (m == "noiseless")
                cfg.truth_mode = GroundTruthMode::Noiseless;
            else if (m == "simulated_hll")
                cfg.truth_mode = GroundTruthMode::SimulatedHighLight;
            else
                at.fail("ground_truth must be noiseless or simulated_hll");
        }
        else if (key == "n0_hll")
            cfg.n0_hll = to_double(value, at);
        else if (key == "reference")
        {
            const std::string m = lower(value);
            if (m == "known")
                cfg.reference_source = ReferenceSource::Known;
            else if (m == "calibrated")
                cfg.reference_source = ReferenceSource::Calibrated;
            else
                at.fail("reference must be known or calibrated");
        }
        else if (key == "calibration_n0")
            cfg.calibration_n0 = to_double(value, at);
        else if (key == "shot_noise")
            cfg.shot_noise = to_bool(value, at);
        else if (key == "out_dir")
            cfg.out_dir = value;
        else if (key == "persist_artifacts")
            cfg.persist_artifacts = to_bool(value, at);
        else if (key == "threads")
            cfg.threads = to_int<unsigned>(value, at);
        else
            at.fail("unknown key '" + key + "'");
    }

    try
    {
        if (grid_set)
        {
            cfg.scene.shape = GridShape(width, height);
            if (!center_set)
                cfg.scene.lens = cfg.scene.lens.centered_on(cfg.scene.shape);
        }
        if (window_set)
            cfg.optimizer.window = PenaltyWindow::gaussian(radius, sigma);
        cfg.validate();
    }
    catch (const ConfigError&)
    {
        throw;
    }
    catch (const Error& e)
    {
        throw ConfigError(e.what());
    }
    return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path, ExperimentConfig base)
{
    const auto bytes = read_file_bytes(path);
    return parse_config(std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()), std::move(base));
}

std::string to_config_text(const ExperimentConfig& cfg)
{
    const auto& s = cfg.scene;
    const auto& o = cfg.optimizer;
    std::ostringstream out;
    out << "grid.width = " << s.shape.width() << "\n"
        << "grid.height = " << s.shape.height() << "\n"
        << "tilt.kx = " << format_double(s.tilt.kx) << "\n"
        << "tilt.ky = " << format_double(s.tilt.ky) << "\n"
        << "tilt.amplitude = " << format_double(s.tilt.amplitude) << "\n"
        << "tilt.phase0 = " << format_double(s.tilt.phase0) << "\n"
        << "lens.focal_length = " << format_double(s.lens.focal_length) << "\n"
        << "lens.wavelength = " << format_double(s.lens.wavelength) << "\n"
        << "lens.pixel_pitch = " << format_double(s.lens.pixel_pitch) << "\n"
        << "lens.center_x = " << format_double(s.lens.center_x) << "\n"
        << "lens.center_y = " << format_double(s.lens.center_y) << "\n"
        << "amplitude_ratio = " << format_double(cfg.amplitude_ratio) << "\n"
        << "n0_list = " << join(cfg.n0_list) << "\n"
        << "seeds_per_point = " << cfg.seeds_per_point << "\n"
        << "master_seed = " << cfg.master_seed << "\n"
        << "opt.mode = " << (cfg.mode == OptimizerMode::Gradient ? "gradient" : "alternating") << "\n"
        << "opt.alpha = " << (o.auto_alpha ? std::string("auto") : format_double(o.alpha)) << "\n"
        << "opt.alpha_balance = " << format_double(o.alpha_balance) << "\n"
        << "opt.window_radius = " << o.window.radius() << "\n"
        << "opt.window_sigma = " << format_double(o.window.sigma()) << "\n"
        << "opt.max_iters = " << o.max_iters << "\n"
        << "opt.rel_tol = " << format_double(o.rel_tol) << "\n"
        << "opt.ls_shrink = " << format_double(o.ls_shrink) << "\n"
        << "opt.ls_slope = " << format_double(o.ls_slope) << "\n"
        << "opt.ls_max_shrinks = " << o.ls_max_shrinks << "\n"
        << "opt.t_init = " << (o.t_init ? format_double(*o.t_init) : std::string("auto")) << "\n"
        << "opt.weight_floor = " << format_double(o.weight_floor) << "\n"
        << "opt.init = " << (o.init_mode == InitMode::Sideband ? "sideband" : "zero") << "\n"
        << "opt.sideband_margin = " << format_double(o.sideband_margin) << "\n"
        << "opt.adapt_alpha = " << bool_text(o.adapt_alpha) << "\n"
        << "opt.alpha_adapt_factor = " << format_double(o.alpha_adapt_factor) << "\n"
        << "remove_piston = " << bool_text(cfg.remove_piston) << "\n"
        << "border = " << cfg.border << "\n"
        << "ground_truth = "
        << (cfg.truth_mode == GroundTruthMode::Noiseless ? "noiseless" : "simulated_hll") << "\n"
        << "n0_hll = " << format_double(cfg.n0_hll) << "\n"
        << "reference = " << (cfg.reference_source == ReferenceSource::Known ? "known" : "calibrated") << "\n"
        << "calibration_n0 = " << format_double(cfg.calibration_n0) << "\n"
        << "shot_noise = " << bool_text(cfg.shot_noise) << "\n";
    if (!cfg.out_dir.empty())
        out << "out_dir = " << cfg.out_dir.string() << "\n";
    out << "persist_artifacts = " << bool_text(cfg.persist_artifacts) << "\n"
        << "threads = " << cfg.threads << "\n";
    return out.str();
}

ExperimentContext prepare_experiment(const ExperimentConfig& cfg)
{
    cfg.validate();
    const SceneConfig scene = cfg.effective_scene();
    ExperimentContext ctx;
    ctx.unit_fields = synthesize(scene);

    if (cfg.reference_source == ReferenceSource::Known)
        ctx.estimator_reference = ctx.unit_fields.reference;
    else
    {
        IntensityMap calibration = make_calibration_frame(scene.shape, scene.tilt);
        if (cfg.calibration_n0 > 0.0)
        {
            const double scale = cfg.calibration_n0 / mean(calibration);
            const CountFrame counts = sample_poisson_frame(
                scale_to_budget(calibration, cfg.calibration_n0),
                {cfg.master_seed, kReservedStreamBase + 16}, cfg.threads);
            calibration = to_intensity(counts);
            for (auto& v : calibration)
                v /= scale;
        }
        ctx.estimator_reference = make_tilted_plane(scene.shape, estimate_tilt(calibration));
    }
    ctx.truth = make_ground_truth(scene, cfg.truth_mode, cfg.n0_hll, {cfg.master_seed, kReservedStreamBase},
                                  cfg.threads);
    return ctx;
}

RunOutcome run_single_detailed(const ExperimentConfig& cfg, const ExperimentContext& ctx, double n0,
                               const SeedSpec& seed, unsigned threads)
{
    if (!(n0 > 0.0) || !std::isfinite(n0))
        throw DomainError("photon budget must be positive");
    const std::uint64_t run = seed.stream_index;
    if (run >= kReservedStreamBase / 8)
        throw DomainError("run index too large");

    const SceneFields fields = expose(ctx.unit_fields, n0);
    // One common factor scales both beams; the estimators' reference gets it too.
    const double exposure = std::abs(fields.reference[0]) / std::abs(ctx.unit_fields.reference[0]);
    const ComplexField reference = scaled(ctx.estimator_reference, exposure);
    const PhaseMap reference_phase = phase_of(reference);

    const auto psm_means = split_budget_psm(fields.reference, fields.object, n0);
    const IntensityMap opt_mean = interfere(fields.reference, fields.object);

    RunOutcome out;
    out.opt_photons = total(opt_mean);
    for (const auto& m : psm_means)
        out.psm_photons += total(m);

    const bool persist = cfg.persist_artifacts && !cfg.out_dir.empty();
    const auto dir = cfg.out_dir / "runs" / run_dir_name(n0, run);
    if (persist)
        std::filesystem::create_directories(dir);

    auto run_optimizer = [&](const auto& frame) {
        try
        {
            return cfg.mode == OptimizerMode::Gradient ? reconstruct(frame, reference, cfg.optimizer)
                                                       : reconstruct_alternating(frame, reference, cfg.optimizer);
        }
        catch (const StagnationError& e)
        {
            out.stagnation = e.what();
            return e.partial();
        }
    };

    if (cfg.shot_noise)
    {
        PsmFrameSet set;
        for (std::size_t k = 0; k < 4; ++k)
            set.frames[k] = sample_poisson_frame(psm_means[k], {seed.master_seed, 8 * run + k}, threads);
        const CountFrame opt_frame = sample_poisson_frame(opt_mean, {seed.master_seed, 8 * run + 4}, threads);
        out.phase_ps = estimate_phase_psm(set, reference_phase);
        out.report = run_optimizer(opt_frame);
        if (persist)
        {
            for (std::size_t k = 0; k < 4; ++k)
                write_phm(dir / ("frame_psm_" + std::to_string(k) + ".phm"), set.frames[k]);
            write_phm(dir / "frame_opt.phm", opt_frame);
        }
    }
    else
    {
        PsmIntensitySet set;
        set.frames = psm_means;
        out.phase_ps = estimate_phase_psm(set, reference_phase);
        out.report = run_optimizer(opt_mean);
        if (persist)
        {
            for (std::size_t k = 0; k < 4; ++k)
                write_phm(dir / ("frame_psm_" + std::to_string(k) + ".phm"), psm_means[k]);
            write_phm(dir / "frame_opt.phm", opt_mean);
        }
    }
    out.phase_co = phase_of(out.report.field);

    SweepRecord& rec = out.record;
    rec.n0 = n0;
    rec.seed = seed;
    rec.e_ps = rms_wrapped_error(out.phase_ps, ctx.truth.phase, cfg.remove_piston, cfg.border);
    rec.e_co = rms_wrapped_error(out.phase_co, ctx.truth.phase, cfg.remove_piston, cfg.border);
    rec.gain = noise_gain(rec.e_ps, rec.e_co);
    rec.iters_co = out.report.iterations;
    rec.converged = out.report.converged && !out.stagnation;

    if (persist)
    {
        write_phm(dir / "phase_ps.phm", out.phase_ps);
        write_phm(dir / "phase_co.phm", out.phase_co);
        write_phm(dir / "field_co.phm", out.report.field);
        write_text(dir / "cost_trace.csv", cost_trace_csv(out.report));
    }
    return out;
}

SweepRecord run_single(const ExperimentConfig& cfg, double n0, const SeedSpec& seed)
{
    const ExperimentContext ctx = prepare_experiment(cfg);
    if (cfg.persist_artifacts && !cfg.out_dir.empty())
    {
        std::filesystem::create_directories(cfg.out_dir);
        write_phm(cfg.out_dir / "truth_phase.phm", ctx.truth.phase);
    }
    return run_single_detailed(cfg, ctx, n0, seed, cfg.threads).record;
}

namespace {

struct Job
{
    double n0;
    std::uint64_t run;
};

struct JobResult
{
    std::optional<RunOutcome> outcome;
    std::string error;
};

std::vector<JobResult> run_jobs(const ExperimentConfig& cfg, const ExperimentContext& ctx,
                                const std::vector<Job>& jobs)
{
    std::vector<JobResult> results(jobs.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < jobs.size(); i = next++)
        {
            try
            {
                results[i].outcome = run_single_detailed(cfg, ctx, jobs[i].n0, {cfg.master_seed, jobs[i].run});
                // Keep memory flat on long sweeps.
                results[i].outcome->report.records.shrink_to_fit();
            }
            catch (const std::exception& e)
            {
                results[i].error = e.what();
            }
        }
    };
    const unsigned n = std::max(1u, std::min<unsigned>(cfg.threads, static_cast<unsigned>(jobs.size())));
    {
        std::vector<std::jthread> pool;
        for (unsigned t = 1; t < n; ++t)
            pool.emplace_back(worker);
        worker();
    }
    return results;
}

void write_context(const ExperimentConfig& cfg, const ExperimentContext& ctx)
{
    if (!cfg.persist_artifacts || cfg.out_dir.empty())
        return;
    std::filesystem::create_directories(cfg.out_dir);
    write_phm(cfg.out_dir / "truth_phase.phm", ctx.truth.phase);
    write_phm(cfg.out_dir / "reference.phm", ctx.unit_fields.reference);
    write_phm(cfg.out_dir / "object.phm", ctx.unit_fields.object);
    write_text(cfg.out_dir / "config.txt", to_config_text(cfg));
}

std::string summarize(const ExperimentConfig& cfg, const SweepResult& r)
{
    std::ostringstream out;
    out << "phasebench sweep\n";
    out << "grid " << cfg.scene.shape.str() << ", seeds per point " << cfg.seeds_per_point << ", master seed "
        << cfg.master_seed << ", mode " << (cfg.mode == OptimizerMode::Gradient ? "gradient" : "alternating")
        << "\n";
    if (r.truth_warning)
        out << "warning: " << *r.truth_warning << "\n";
    out << "\n";
    char line[256];
    std::snprintf(line, sizeof line, "%10s %5s %10s %10s %10s %10s %8s %8s\n", "n0", "runs", "e_ps", "e_co", "gain",
                  "gain_sd", "iters", "conv");
    out << line;
    for (const auto& p : r.points)
    {
        double iters = 0.0;
        int converged = 0;
        for (const auto& rec : r.records)
            if (rec.n0 == p.n0)
            {
                iters += rec.iters_co;
                converged += rec.converged ? 1 : 0;
            }
        std::snprintf(line, sizeof line, "%10g %5zu %10.5f %10.5f %10.4f %10.4f %8.1f %5d/%zu\n", p.n0, p.runs, p.e_ps,
                      p.e_co, p.gain, p.gain_sd, iters / static_cast<double>(p.runs), converged, p.runs);
        out << line;
    }
    out << "\n";
    auto fit_line = [&](const char* name, const PowerLawFit& f) {
        std::snprintf(line, sizeof line, "%-5s exponent %+.4f +- %.4f  prefactor %.5g  r2 %.4f\n", name, f.exponent,
                      f.exponent_ci95, f.prefactor, f.r_squared);
        out << line;
    };
    if (r.points.size() >= 3)
    {
        fit_line("e_ps", r.fits.e_ps);
        fit_line("e_co", r.fits.e_co);
        fit_line("gain", r.fits.gain);
    }
    else
        out << "fewer than 3 budgets; no power-law fits\n";
    if (!r.failures.empty())
    {
        out << "\nfailed runs:\n";
        for (const auto& f : r.failures)
            out << "  " << f << "\n";
    }
    return out.str();
}

} // namespace

SweepResult run_sweep(const ExperimentConfig& cfg)
{
    const ExperimentContext ctx = prepare_experiment(cfg);
    write_context(cfg, ctx);

    std::vector<Job> jobs;
    const auto seeds = static_cast<std::uint64_t>(cfg.seeds_per_point);
    for (std::size_t p = 0; p < cfg.n0_list.size(); ++p)
        for (std::uint64_t s = 0; s < seeds; ++s)
            jobs.push_back({cfg.n0_list[p], p * seeds + s});
    const auto results = run_jobs(cfg, ctx, jobs);

    SweepResult out;
    out.truth_warning = ctx.truth.warning;
    for (std::size_t p = 0; p < cfg.n0_list.size(); ++p)
    {
        bool any = false;
        for (std::uint64_t s = 0; s < seeds; ++s)
        {
            const auto& res = results[p * seeds + s];
            const auto& job = jobs[p * seeds + s];
            if (res.outcome)
            {
                any = true;
                out.records.push_back(res.outcome->record);
                out.cost_traces.push_back(res.outcome->report.cost_trace);
            }
            else
                out.failures.push_back("n0 = " + format_double(job.n0) + ", run " + std::to_string(job.run) + ": " +
                                       res.error);
        }
        if (!any)
            throw SweepError("every run at n0 = " + format_double(cfg.n0_list[p]) + " failed: " +
                                 out.failures.back(),
                             cfg.n0_list[p]);
    }

    out.points = aggregate(out.records);
    if (out.points.size() >= 3)
        out.fits = fit_sweep(out.points);
    out.summary = summarize(cfg, out);

    if (!cfg.out_dir.empty())
    {
        std::filesystem::create_directories(cfg.out_dir);
        write_text(cfg.out_dir / "sweep.csv", sweep_csv(out.records));
        if (out.points.size() >= 3)
            write_text(cfg.out_dir / "fits.csv", fits_csv(out.fits));
        write_text(cfg.out_dir / "summary.txt", out.summary);
    }
    return out;
}

HalvingReport halve_budget_check(const ExperimentConfig& cfg, double n0)
{
    if (!(n0 > 0.0) || !std::isfinite(n0))
        throw DomainError("photon budget must be positive");
    const ExperimentContext ctx = prepare_experiment(cfg);
    write_context(cfg, ctx);

    HalvingReport out;
    out.n0 = n0;
    const auto seeds = static_cast<std::uint64_t>(cfg.seeds_per_point);
    std::vector<Job> jobs;
    for (std::uint64_t s = 0; s < seeds; ++s)
        jobs.push_back({n0, s});
    for (std::uint64_t s = 0; s < seeds; ++s)
        jobs.push_back({n0 / 2.0, seeds + s});
    const auto results = run_jobs(cfg, ctx, jobs);

    std::vector<SweepRecord> full;
    std::vector<SweepRecord> half;
    for (std::size_t i = 0; i < jobs.size(); ++i)
        if (results[i].outcome)
            (i < seeds ? full : half).push_back(results[i].outcome->record);
    out.full = mean_point(n0, full);
    out.half = mean_point(n0 / 2.0, half);
    out.ps_ratio = out.half.e_ps / out.full.e_ps;
    out.co_ratio = out.half.e_co / out.full.e_co;
    return out;
}

} // namespace phasebench
