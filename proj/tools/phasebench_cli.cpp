// Command-line front end for the phasebench library.

#include <CLI11.hpp>

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "phasebench/field.hpp"
#include "phasebench/harness.hpp"
#include "phasebench/phm_io.hpp"

namespace fs = std::filesystem;
using namespace phasebench;

namespace {

enum Exit
{
    kOk = 0,
    kConfigError = 2,
    kNumericalError = 3,
    kIoError = 4,
};

struct Globals
{
    std::optional<std::string> config;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out;
    std::optional<unsigned> threads;
};

ExperimentConfig load(const Globals& g)
{
    ExperimentConfig cfg = g.config ? load_config(*g.config) : ExperimentConfig{};
    if (g.seed)
        cfg.master_seed = *g.seed;
    if (g.out)
        cfg.out_dir = *g.out;
    if (g.threads)
        cfg.threads = *g.threads;
    cfg.validate();
    return cfg;
}

fs::path out_dir(const ExperimentConfig& cfg)
{
    const fs::path dir = cfg.out_dir.empty() ? fs::path(".") : cfg.out_dir;
    fs::create_directories(dir);
    return dir;
}

void write_text(const fs::path& path, const std::string& text)
{
    write_file_bytes(path, std::vector<std::uint8_t>(text.begin(), text.end()));
}

ComplexField exposed_reference(const ExperimentContext& ctx, double n0)
{
    const SceneFields fields = expose(ctx.unit_fields, n0);
    const double s = std::abs(fields.reference[0]) / std::abs(ctx.unit_fields.reference[0]);
    ComplexField r = ctx.estimator_reference;
    for (auto& v : r)
        v *= s;
    return r;
}

int cmd_synth(const ExperimentConfig& cfg, double n0, bool sample)
{
    const fs::path dir = out_dir(cfg);
    const ExperimentContext ctx = prepare_experiment(cfg);
    const SceneFields fields = expose(ctx.unit_fields, n0);
    write_phm(dir / "reference.phm", fields.reference);
    write_phm(dir / "object.phm", fields.object);
    write_phm(dir / "truth_phase.phm", ctx.truth.phase);

    const auto psm = split_budget_psm(fields.reference, fields.object, n0);
    const IntensityMap single = interfere(fields.reference, fields.object);
    for (std::size_t k = 0; k < 4; ++k)
    {
        const std::string name = "psm_" + std::to_string(k);
        if (sample)
            write_phm(dir / (name + ".phm"),
                      sample_poisson_frame(psm[k], {cfg.master_seed, k}, cfg.threads));
        else
            write_phm(dir / (name + ".phm"), psm[k]);
    }
    if (sample)
        write_phm(dir / "opt.phm", sample_poisson_frame(single, {cfg.master_seed, 4}, cfg.threads));
    else
        write_phm(dir / "opt.phm", single);
    if (ctx.truth.warning)
        std::cerr << "warning: " << *ctx.truth.warning << "\n";
    std::cout << "wrote scene to " << dir.string() << "\n";
    return kOk;
}

int cmd_psm(const ExperimentConfig& cfg, const std::vector<std::string>& frames, bool csv)
{
    PsmIntensitySet set;
    for (std::size_t k = 0; k < 4; ++k)
        set.frames[k] = read_phm_intensity(frames[k]);
    const ExperimentContext ctx = prepare_experiment(cfg);
    require_same_shape(set.shape(), ctx.estimator_reference.shape(), "psm frames");
    const PhaseMap phase = estimate_phase_psm(set, phase_of(ctx.estimator_reference));

    const fs::path dir = out_dir(cfg);
    write_phm(dir / "phase_ps.phm", phase);
    if (csv)
        write_text(dir / "phase_ps.csv", to_csv(phase));
    std::cout << "E_PS " << format_double(rms_wrapped_error(phase, ctx.truth.phase, cfg.remove_piston, cfg.border))
              << "\n";
    return kOk;
}

int cmd_opt(ExperimentConfig cfg, const std::string& frame_path, const std::string& mode, bool csv)
{
    cfg.mode = mode == "alternating" ? OptimizerMode::Alternating : OptimizerMode::Gradient;
    const IntensityMap frame = read_phm_intensity(frame_path);
    const ExperimentContext ctx = prepare_experiment(cfg);
    require_same_shape(frame.shape(), ctx.estimator_reference.shape(), "optimization frame");
    // The frame mean is the single-exposure budget.
    const ComplexField r = exposed_reference(ctx, mean(frame));

    const fs::path dir = out_dir(cfg);
    int status = kOk;
    ReconstructionReport report;
    try
    {
        report = cfg.mode == OptimizerMode::Gradient ? reconstruct(frame, r, cfg.optimizer)
                                                     : reconstruct_alternating(frame, r, cfg.optimizer);
    }
    catch (const StagnationError& e)
    {
        std::cerr << "error: " << e.what() << "\n";
        report = e.partial();
        status = kNumericalError;
    }
    const PhaseMap phase = phase_of(report.field);
    write_phm(dir / "phase_co.phm", phase);
    write_phm(dir / "field_co.phm", report.field);
    std::string trace = "iteration,cost,step_size,grad_norm\n";
    if (!report.cost_trace.empty())
        trace += "0," + format_double(report.cost_trace.front()) + ",0,0\n";
    for (const auto& rec : report.records)
        trace += std::to_string(rec.iteration) + "," + format_double(rec.cost) + "," + format_double(rec.step_size) +
                 "," + format_double(rec.grad_norm) + "\n";
    write_text(dir / "cost_trace.csv", trace);
    if (csv)
        write_text(dir / "phase_co.csv", to_csv(phase));
    std::cout << "iterations " << report.iterations << (report.converged ? " (converged)" : " (not converged)")
              << "\nE_CO " << format_double(rms_wrapped_error(phase, ctx.truth.phase, cfg.remove_piston, cfg.border))
              << "\n";
    return status;
}

int cmd_sweep(const ExperimentConfig& cfg)
{
    const SweepResult r = run_sweep(cfg);
    std::cout << r.summary;
    return kOk;
}

int cmd_fit(const ExperimentConfig& cfg, const std::string& input, bool have_out)
{
    const auto bytes = read_file_bytes(input);
    const auto records = parse_sweep_csv(std::string(bytes.begin(), bytes.end()));
    const auto fits = fit_sweep(aggregate(records));
    const std::string text = fits_csv(fits);
    if (have_out)
        write_text(out_dir(cfg) / "fits.csv", text);
    std::cout << text;
    return kOk;
}

int cmd_halve(const ExperimentConfig& cfg, double n0)
{
    const HalvingReport r = halve_budget_check(cfg, n0);
    std::cout << "n0 " << format_double(r.n0) << " -> " << format_double(r.n0 / 2.0) << "\n"
              << "e_ps " << format_double(r.full.e_ps) << " -> " << format_double(r.half.e_ps) << "  ratio "
              << format_double(r.ps_ratio) << "\n"
              << "e_co " << format_double(r.full.e_co) << " -> " << format_double(r.half.e_co) << "  ratio "
              << format_double(r.co_ratio) << "\n";
    return kOk;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Photon-limited phase retrieval benchmark"};
    app.require_subcommand(1);
    app.fallthrough();

    Globals g;
    app.add_option("--config", g.config, "key = value configuration file");
    app.add_option("--seed", g.seed, "master seed");
    app.add_option("--out", g.out, "output directory");
    app.add_option("--threads", g.threads, "worker threads")->check(CLI::PositiveNumber);

    double synth_n0 = 225.0;
    bool synth_sample = false;
    auto* synth = app.add_subcommand("synth", "write scene fields and interferograms");
    synth->add_option("--n0", synth_n0, "single-frame budget, counts per pixel")->check(CLI::PositiveNumber);
    synth->add_flag("--sample", synth_sample, "write Poisson counts instead of expected intensities");

    std::vector<std::string> psm_frames;
    bool psm_csv = false;
    auto* psm = app.add_subcommand("psm", "four phase-shifted frames -> phase map");
    psm->add_option("frames", psm_frames, "frames for shifts 0, pi/2, pi, 3pi/2")->required()->expected(4);
    psm->add_flag("--csv", psm_csv, "also write a CSV phase map (grids up to 64x64)");

    std::string opt_frame;
    std::string opt_mode = "gradient";
    bool opt_csv = false;
    auto* opt = app.add_subcommand("opt", "one frame -> phase map by constrained optimization");
    opt->add_option("frame", opt_frame, "interferogram")->required();
    opt->add_option("--mode", opt_mode, "gradient or alternating")
        ->check(CLI::IsMember({"gradient", "alternating"}));
    opt->add_flag("--csv", opt_csv, "also write a CSV phase map (grids up to 64x64)");

    auto* sweep = app.add_subcommand("sweep", "run the photon-budget study");

    std::string fit_input;
    auto* fit = app.add_subcommand("fit", "sweep CSV -> power-law fits");
    fit->add_option("input", fit_input, "sweep.csv")->required();

    double halve_n0 = 225.0;
    auto* halve = app.add_subcommand("halve-check", "error ratios when the budget is halved");
    halve->add_option("--n0", halve_n0, "full budget")->check(CLI::PositiveNumber);

    try
    {
        app.parse(argc, argv);
    }
    catch (const CLI::ParseError& e)
    {
        const int code = app.exit(e);
        return code == 0 ? kOk : kConfigError;
    }

    try
    {
        const ExperimentConfig cfg = load(g);
        if (*synth)
            return cmd_synth(cfg, synth_n0, synth_sample);
        if (*psm)
            return cmd_psm(cfg, psm_frames, psm_csv);
        if (*opt)
            return cmd_opt(cfg, opt_frame, opt_mode, opt_csv);
        if (*sweep)
            return cmd_sweep(cfg);
        if (*fit)
            return cmd_fit(cfg, fit_input, g.out.has_value());
        if (*halve)
            return cmd_halve(cfg, halve_n0);
    }
    catch (const ConfigError& e)
    {
        std::cerr << "config error: " << e.what() << "\n";
        return kConfigError;
    }
    catch (const IoError& e)
    {
        std::cerr << "I/O error: " << e.what() << "\n";
        return kIoError;
    }
    catch (const fs::filesystem_error& e)
    {
        std::cerr << "I/O error: " << e.what() << "\n";
        return kIoError;
    }
    catch (const Error& e)
    {
        std::cerr << "error: " << e.what() << "\n";
        return kNumericalError;
    }
    return kOk;
}
