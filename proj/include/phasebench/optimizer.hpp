#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "phasebench/errors.hpp"
#include "phasebench/grid.hpp"

namespace phasebench {

/// Neighbourhood weights w_pq of the smoothness penalty. Taps cover the
/// (2 radius + 1)^2 square minus its centre; the weight depends only on the
/// distance |p - q|, so w_pq == w_qp.
class PenaltyWindow
{
  public:
    struct Tap
    {
        int dx;
        int dy;
        double weight;
    };

    PenaltyWindow() = default;

    /// w = exp(-d^2 / (2 sigma^2)), unnormalized.
    static PenaltyWindow gaussian(int radius, double sigma);

    /// Any nonnegative decreasing-or-not profile of the distance.
    static PenaltyWindow radial(int radius, const std::function<double(double)>& profile);

    int radius() const noexcept { return radius_; }
    double sigma() const noexcept { return sigma_; }
    const std::vector<Tap>& taps() const noexcept { return taps_; }
    double total_weight() const noexcept { return total_weight_; }

  private:
    int radius_ = 0;
    double sigma_ = 0.0;
    double total_weight_ = 0.0;
    std::vector<Tap> taps_;
};

enum class InitMode
{
    Zero,
    Sideband,
};

struct OptimizerConfig
{
    /// Penalty strength. Ignored by reconstruct*() when auto_alpha is set.
    double alpha = 0.0;
    /// Pick alpha at run start so that alpha |grad psi| = alpha_balance |grad data|.
    bool auto_alpha = true;
    double alpha_balance = 0.5;
    PenaltyWindow window = PenaltyWindow::gaussian(3, 1.5);
    int max_iters = 200;
    double rel_tol = 1e-3;
    double ls_shrink = 0.5;
    double ls_slope = 1e-4;
    int ls_max_shrinks = 60;
    /// Initial trial step; when unset, 1 / (max beta^2 (max|R| + max|O0|)^2).
    std::optional<double> t_init;
    double weight_floor = 0.0;
    InitMode init_mode = InitMode::Sideband;
    /// Sideband init keeps spectral bins whose projection on the carrier
    /// direction is below -sideband_margin * |k|.
    double sideband_margin = 0.5;
    /// Alternating mode: multiplicative update of the penalty-step weight.
    bool adapt_alpha = true;
    double alpha_adapt_factor = 1.25;

    void validate() const;
};

struct IterationRecord
{
    int iteration;
    double cost;
    double step_size;
    double grad_norm;
};

struct ReconstructionReport
{
    ComplexField field;
    int iterations = 0;
    double final_cost = 0.0;
    /// Cost of the initial estimate followed by the cost after every accepted step.
    std::vector<double> cost_trace;
    std::vector<IterationRecord> records;
    bool converged = false;
    /// Penalty strength used for the objective.
    double alpha = 0.0;
    /// Alternating mode: the adapted weight of the penalty sub-step.
    double penalty_step_weight = 0.0;
};

/// Backtracking failed to find a decrease; carries the iterate reached so far.
class StagnationError : public NumericalError
{
  public:
    StagnationError(const std::string& what, ReconstructionReport partial)
      : NumericalError(what)
      , partial_(std::move(partial))
    {}

    const ReconstructionReport& partial() const noexcept { return partial_; }

  private:
    ReconstructionReport partial_;
};

/// beta = sqrt(max(I, floor)).
IntensityMap data_weights(const CountFrame& counts, double floor = 0.0);
IntensityMap data_weights(const IntensityMap& counts, double floor = 0.0);

/// psi = sum_p sum_{q in N_p} w_pq |O_p - O_q|^2 over ordered pairs, with
/// neighbourhoods truncated at the grid edge.
double penalty(const ComplexField& o, const PenaltyWindow& w);

/// Wirtinger derivative d psi / d O_p^* = 2 sum_q w_pq (O_p - O_q).
ComplexField penalty_gradient(const ComplexField& o, const PenaltyWindow& w);

/// sum_p beta_p^2 (I_p - |R_p + O_p|^2)^2 + alpha psi(O), alpha = cfg.alpha.
double cost(const ComplexField& o, const ComplexField& r, const CountFrame& counts, const OptimizerConfig& cfg);
double cost(const ComplexField& o, const ComplexField& r, const IntensityMap& frame, const OptimizerConfig& cfg);

/// Wirtinger derivative of cost() with respect to O^*:
/// -2 beta^2 (I - |R + O|^2)(O + R) + alpha d psi / d O^*.
ComplexField gradient(const ComplexField& o, const ComplexField& r, const CountFrame& counts,
                      const OptimizerConfig& cfg);
ComplexField gradient(const ComplexField& o, const ComplexField& r, const IntensityMap& frame,
                      const OptimizerConfig& cfg);

/// Carrier frequency (cycles per grid extent) of a tilted reference: the
/// strongest bin of its spectrum.
std::pair<double, double> reference_carrier(const ComplexField& r);

/// Object estimate from the +1 order: keep the half of the spectrum on the
/// -k side of the carrier, invert, divide by R^*.
ComplexField sideband_estimate(const IntensityMap& frame, const ComplexField& r, double margin);

/// Gradient descent with Armijo backtracking on the full cost. Count frames
/// are cast to reals once; real-valued (noiseless) frames are accepted too.
ReconstructionReport reconstruct(const CountFrame& counts, const ComplexField& r, const OptimizerConfig& cfg);
ReconstructionReport reconstruct(const IntensityMap& frame, const ComplexField& r, const OptimizerConfig& cfg);

/// Alternates a backtracked data-fit step and a backtracked penalty step,
/// rebalancing the penalty-step weight each outer iteration.
ReconstructionReport reconstruct_alternating(const CountFrame& counts, const ComplexField& r,
                                             const OptimizerConfig& cfg);
ReconstructionReport reconstruct_alternating(const IntensityMap& frame, const ComplexField& r,
                                             const OptimizerConfig& cfg);

} // namespace phasebench
