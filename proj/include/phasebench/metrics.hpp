#pragma once

#include <string>
#include <utility>
#include <vector>

#include "phasebench/grid.hpp"
#include "phasebench/photon.hpp"

namespace phasebench {

/// Outcome of one (N0, seed) experiment.
struct SweepRecord
{
    double n0 = 0.0;
    SeedSpec seed;
    double e_ps = 0.0;
    double e_co = 0.0;
    double gain = 0.0;
    int iters_co = 0;
    bool converged = true;
};

struct PowerLawFit
{
    double exponent = 0.0;
    double exponent_ci95 = 0.0;
    double prefactor = 0.0;
    double r_squared = 0.0;
};

/// RMS over pixels of wrap(a - b). With remove_piston the circular mean of the
/// wrapped difference is removed first; `border` pixels are cropped from
/// every edge before averaging.
double rms_wrapped_error(const PhaseMap& a, const PhaseMap& b, bool remove_piston = false, std::size_t border = 0);

/// Per-pixel wrap(a - b), for difference-map exports.
PhaseMap wrapped_difference(const PhaseMap& a, const PhaseMap& b);

/// G = e_ps / e_co.
double noise_gain(double e_ps, double e_co);

/// Least squares line through (log n0, log y); the exponent's 95% interval is
/// the Student-t (n - 2 dof) quantile times the slope's standard error.
PowerLawFit fit_power_law(const std::vector<std::pair<double, double>>& points);

/// Per-N0 aggregate over seeds.
struct SweepPoint
{
    double n0 = 0.0;
    std::size_t runs = 0;
    double e_ps = 0.0;
    double e_co = 0.0;
    double gain = 0.0;
    double e_ps_sd = 0.0;
    double e_co_sd = 0.0;
    double gain_sd = 0.0;
};

/// Groups records by N0 (ascending) and averages each series.
std::vector<SweepPoint> aggregate(const std::vector<SweepRecord>& records);

struct SweepFits
{
    PowerLawFit e_ps;
    PowerLawFit e_co;
    PowerLawFit gain;
};

SweepFits fit_sweep(const std::vector<SweepPoint>& points);

inline constexpr const char* kSweepCsvHeader = "n0,seed,e_ps,e_co,gain,iters_co";
inline constexpr const char* kFitsCsvHeader = "series,exponent,ci95,prefactor,r2";

/// `seed` is written as the run's stream index.
std::string sweep_csv(const std::vector<SweepRecord>& records);
std::vector<SweepRecord> parse_sweep_csv(const std::string& text);
std::string fits_csv(const SweepFits& fits);

} // namespace phasebench
