#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "phasebench/metrics.hpp"
#include "phasebench/optimizer.hpp"
#include "phasebench/psm.hpp"
#include "phasebench/scene.hpp"

namespace phasebench {

enum class OptimizerMode
{
    Gradient,
    Alternating,
};

enum class ReferenceSource
{
    /// The estimators use the simulated reference field directly.
    Known,
    /// The tilt is re-estimated from straight-line calibration fringes.
    Calibrated,
};

struct ExperimentConfig
{
    SceneConfig scene;
    /// |O| / |R|; applied to the lens amplitude at synthesis.
    double amplitude_ratio = 1.0;

    std::vector<double> n0_list{10, 20, 58, 112, 225, 450, 800};
    int seeds_per_point = 5;
    std::uint64_t master_seed = 1;

    OptimizerConfig optimizer;
    OptimizerMode mode = OptimizerMode::Gradient;

    bool remove_piston = false;
    /// Pixels cropped from every edge before computing RMS errors.
    std::size_t border = 0;

    GroundTruthMode truth_mode = GroundTruthMode::Noiseless;
    double n0_hll = 20000.0;

    ReferenceSource reference_source = ReferenceSource::Calibrated;
    /// Mean counts of the calibration frame; 0 means noiseless.
    double calibration_n0 = 0.0;

    /// When false the estimators see expected intensities instead of counts.
    bool shot_noise = true;

    std::filesystem::path out_dir;
    bool persist_artifacts = true;
    unsigned threads = 1;

    void validate() const;
    /// Scene with the amplitude ratio applied.
    SceneConfig effective_scene() const;
};

/// Parses `key = value` lines (`#` starts a comment) on top of `base`.
/// Unknown keys and malformed values throw ConfigError naming the line.
ExperimentConfig parse_config(std::string_view text, ExperimentConfig base = {});
ExperimentConfig load_config(const std::filesystem::path& path, ExperimentConfig base = {});

/// Canonical `key = value` dump; parse_config(to_config_text(c)) reproduces c.
std::string to_config_text(const ExperimentConfig& cfg);

/// Stream layout: run r draws its PSM frames from streams 8r + 0..3 and its
/// optimization frame from 8r + 4. Ground truth and calibration use streams
/// above kReservedStreamBase.
inline constexpr std::uint64_t kReservedStreamBase = std::uint64_t{1} << 60;

/// Everything a caller may want from one run beyond the record.
struct RunOutcome
{
    SweepRecord record;
    PhaseMap phase_ps;
    PhaseMap phase_co;
    /// Total expected photons (summed over pixels and frames) per estimator.
    double psm_photons = 0.0;
    double opt_photons = 0.0;
    ReconstructionReport report;
    std::optional<std::string> stagnation;
};

/// Inputs shared by every run of one configuration.
struct ExperimentContext
{
    SceneFields unit_fields;
    /// Reference the estimators use, at unit exposure.
    ComplexField estimator_reference;
    GroundTruth truth;
};

ExperimentContext prepare_experiment(const ExperimentConfig& cfg);

/// seed.stream_index is the run index.
RunOutcome run_single_detailed(const ExperimentConfig& cfg, const ExperimentContext& ctx, double n0,
                               const SeedSpec& seed, unsigned threads = 1);
SweepRecord run_single(const ExperimentConfig& cfg, double n0, const SeedSpec& seed);

/// Thrown when every seed of some N0 failed.
class SweepError : public NumericalError
{
  public:
    SweepError(const std::string& what, double n0)
      : NumericalError(what)
      , n0_(n0)
    {}
    double n0() const noexcept { return n0_; }

  private:
    double n0_;
};

struct SweepResult
{
    /// In n0_list order, seeds innermost; failed runs are omitted.
    std::vector<SweepRecord> records;
    std::vector<SweepPoint> points;
    SweepFits fits;
    /// Cost traces of every successful run, parallel to records.
    std::vector<std::vector<double>> cost_traces;
    std::vector<std::string> failures;
    std::optional<std::string> truth_warning;
    std::string summary;
};

/// Runs n0_list x seeds, aggregates and fits. Writes sweep.csv, fits.csv and
/// summary.txt when out_dir is set.
SweepResult run_sweep(const ExperimentConfig& cfg);

struct HalvingReport
{
    double n0 = 0.0;
    SweepPoint full;
    SweepPoint half;
    double ps_ratio = 0.0;
    double co_ratio = 0.0;
};

/// E(n0 / 2) / E(n0) for both estimators, averaged over seeds_per_point seeds.
HalvingReport halve_budget_check(const ExperimentConfig& cfg, double n0);

} // namespace phasebench
