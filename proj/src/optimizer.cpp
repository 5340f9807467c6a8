#include "phasebench/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "phasebench/fft.hpp"

namespace phasebench {
namespace {

double squared_norm(const ComplexField& f)
{
    double s = 0.0;
    for (const auto& v : f)
        s += std::norm(v);
    return s;
}

double max_abs(const ComplexField& f)
{
    double m = 0.0;
    for (const auto& v : f)
        m = std::max(m, std::abs(v));
    return m;
}

ComplexField step(const ComplexField& o, const ComplexField& direction, double t)
{
    ComplexField out(o.shape());
    for (std::size_t i = 0; i < o.size(); ++i)
        out[i] = o[i] - t * direction[i];
    return out;
}

double relative_change(const ComplexField& before, const ComplexField& after)
{
    double diff = 0.0;
    for (std::size_t i = 0; i < before.size(); ++i)
        diff += std::norm(after[i] - before[i]);
    const double base = squared_norm(before);
    if (base == 0.0)
        return diff == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
    return std::sqrt(diff / base);
}

void accumulate_penalty(const ComplexField& o, const PenaltyWindow& w, double* psi, ComplexField* grad, double scale)
{
    const auto width = static_cast<std::ptrdiff_t>(o.width());
    const auto height = static_cast<std::ptrdiff_t>(o.height());
    double total = 0.0;
    for (const auto& tap : w.taps())
    {
        const std::ptrdiff_t x0 = std::max<std::ptrdiff_t>(0, -tap.dx);
        const std::ptrdiff_t x1 = std::min<std::ptrdiff_t>(width, width - tap.dx);
        const std::ptrdiff_t y0 = std::max<std::ptrdiff_t>(0, -tap.dy);
        const std::ptrdiff_t y1 = std::min<std::ptrdiff_t>(height, height - tap.dy);
        const double g = 2.0 * tap.weight * scale;
        for (std::ptrdiff_t y = y0; y < y1; ++y)
        {
            const std::size_t row = static_cast<std::size_t>(y * width);
            const std::size_t nrow = static_cast<std::size_t>((y + tap.dy) * width);
            for (std::ptrdiff_t x = x0; x < x1; ++x)
            {
                const Complex diff = o[row + static_cast<std::size_t>(x)] - o[nrow + static_cast<std::size_t>(x + tap.dx)];
                if (psi)
                    total += tap.weight * std::norm(diff);
                if (grad)
                    (*grad)[row + static_cast<std::size_t>(x)] += g * diff;
            }
        }
    }
    if (psi)
        *psi = total;
}

/// Everything that stays fixed during one reconstruction.
struct Problem
{
    const ComplexField& reference;
    IntensityMap intensity;
    std::vector<double> beta2;
    const PenaltyWindow& window;

    Problem(const IntensityMap& frame, const ComplexField& r, const OptimizerConfig& cfg)
      : reference(r)
      , intensity(frame)
      , beta2(frame.size())
      , window(cfg.window)
    {
        require_same_shape(frame.shape(), r.shape(), "optimizer");
        for (std::size_t i = 0; i < frame.size(); ++i)
        {
            if (!(intensity[i] >= 0.0) || !std::isfinite(intensity[i]))
                throw DomainError("frame values must be finite and nonnegative");
            beta2[i] = std::max(intensity[i], cfg.weight_floor);
        }
    }

    double data_cost(const ComplexField& o) const
    {
        require_same_shape(o.shape(), reference.shape(), "cost");
        double c = 0.0;
        for (std::size_t i = 0; i < o.size(); ++i)
        {
            const double residual = intensity[i] - std::norm(reference[i] + o[i]);
            c += beta2[i] * residual * residual;
        }
        return c;
    }

    ComplexField data_gradient(const ComplexField& o) const
    {
        require_same_shape(o.shape(), reference.shape(), "gradient");
        ComplexField g(o.shape());
        for (std::size_t i = 0; i < o.size(); ++i)
        {
            const Complex sum = reference[i] + o[i];
            const double residual = intensity[i] - std::norm(sum);
            g[i] = -2.0 * beta2[i] * residual * sum;
        }
        return g;
    }

    double penalty_cost(const ComplexField& o) const
    {
        double psi = 0.0;
        accumulate_penalty(o, window, &psi, nullptr, 1.0);
        return psi;
    }

    void add_penalty_gradient(const ComplexField& o, ComplexField& g, double alpha) const
    {
        if (alpha != 0.0)
            accumulate_penalty(o, window, nullptr, &g, alpha);
    }

    double cost(const ComplexField& o, double alpha) const
    {
        return data_cost(o) + (alpha != 0.0 ? alpha * penalty_cost(o) : 0.0);
    }

    ComplexField gradient(const ComplexField& o, double alpha) const
    {
        ComplexField g = data_gradient(o);
        add_penalty_gradient(o, g, alpha);
        return g;
    }

    double max_beta2() const { return beta2.empty() ? 0.0 : *std::max_element(beta2.begin(), beta2.end()); }
};

struct LineSearchResult
{
    ComplexField point;
    double value;
    double t;
};

template <typename Objective>
std::optional<LineSearchResult> backtrack(const Objective& objective, const ComplexField& o, double value,
                                          const ComplexField& direction, double direction_sq, double t0,
                                          const OptimizerConfig& cfg)
{
    double t = t0;
    for (int k = 0; k <= cfg.ls_max_shrinks; ++k)
    {
        ComplexField candidate = step(o, direction, t);
        const double candidate_value = objective(candidate);
        if (std::isfinite(candidate_value) && candidate_value <= value - cfg.ls_slope * t * direction_sq)
            return LineSearchResult{std::move(candidate), candidate_value, t};
        t *= cfg.ls_shrink;
    }
    return std::nullopt;
}

struct Start
{
    ComplexField field;
    double alpha;
    double t_init;
};

double default_step(const Problem& p, const ComplexField& o0)
{
    const double scale = p.max_beta2() * std::pow(max_abs(p.reference) + max_abs(o0), 2);
    return scale > 0.0 ? 1.0 / scale : 1.0;
}

double balanced_alpha(const Problem& p, const ComplexField& o, double balance)
{
    const double data_norm = std::sqrt(squared_norm(p.data_gradient(o)));
    ComplexField pg(o.shape());
    p.add_penalty_gradient(o, pg, 1.0);
    const double pen_norm = std::sqrt(squared_norm(pg));
    return pen_norm > 0.0 ? balance * data_norm / pen_norm : 0.0;
}

Start prepare(const Problem& p, const ComplexField& r, const OptimizerConfig& cfg)
{
    Start s{cfg.init_mode == InitMode::Sideband ? sideband_estimate(p.intensity, r, cfg.sideband_margin)
                                                : ComplexField(r.shape()),
            cfg.alpha, 0.0};
    s.t_init = cfg.t_init.value_or(default_step(p, s.field));
    if (!cfg.auto_alpha)
        return s;
    if (cfg.init_mode == InitMode::Sideband)
    {
        s.alpha = balanced_alpha(p, s.field, cfg.alpha_balance);
        return s;
    }
    // A zero start has no penalty gradient; balance after one data-only step.
    const ComplexField g = p.data_gradient(s.field);
    const double g2 = squared_norm(g);
    const auto objective = [&](const ComplexField& x) { return p.data_cost(x); };
    const auto first = backtrack(objective, s.field, p.data_cost(s.field), g, g2, s.t_init, cfg);
    s.alpha = first ? balanced_alpha(p, first->point, cfg.alpha_balance) : 0.0;
    return s;
}

ReconstructionReport begin_report(const Problem& p, const Start& s)
{
    ReconstructionReport report;
    report.field = s.field;
    report.alpha = s.alpha;
    report.penalty_step_weight = s.alpha;
    report.final_cost = p.cost(s.field, s.alpha);
    report.cost_trace.push_back(report.final_cost);
    return report;
}

[[noreturn]] void stagnate(ReconstructionReport& report, int iteration)
{
    report.converged = false;
    throw StagnationError("line search found no decrease within the shrink limit at iteration " +
                              std::to_string(iteration),
                          std::move(report));
}

} // namespace

PenaltyWindow PenaltyWindow::gaussian(int radius, double sigma)
{
    if (!(sigma > 0.0))
        throw DomainError("penalty window sigma must be positive");
    PenaltyWindow w = radial(radius, [sigma](double d) { return std::exp(-d * d / (2.0 * sigma * sigma)); });
    w.sigma_ = sigma;
    return w;
}

PenaltyWindow PenaltyWindow::radial(int radius, const std::function<double(double)>& profile)
{
    if (radius < 1)
        throw DomainError("penalty window radius must be at least 1");
    PenaltyWindow w;
    w.radius_ = radius;
    for (int dy = -radius; dy <= radius; ++dy)
        for (int dx = -radius; dx <= radius; ++dx)
        {
            if (dx == 0 && dy == 0)
                continue;
            const double weight = profile(std::hypot(static_cast<double>(dx), static_cast<double>(dy)));
            if (!(weight >= 0.0) || !std::isfinite(weight))
                throw DomainError("penalty weights must be finite and nonnegative");
            w.taps_.push_back({dx, dy, weight});
            w.total_weight_ += weight;
        }
    return w;
}

void OptimizerConfig::validate() const
{
    if (!(alpha >= 0.0) || !std::isfinite(alpha))
        throw ConfigError("alpha must be finite and nonnegative");
    if (!(alpha_balance > 0.0))
        throw ConfigError("alpha_balance must be positive");
    if (window.taps().empty())
        throw ConfigError("penalty window is empty");
    if (max_iters < 1)
        throw ConfigError("max_iters must be positive");
    if (!(rel_tol > 0.0))
        throw ConfigError("rel_tol must be positive");
    if (!(ls_shrink > 0.0 && ls_shrink < 1.0))
        throw ConfigError("ls_shrink must lie in (0, 1)");
    if (!(ls_slope > 0.0 && ls_slope < 1.0))
        throw ConfigError("ls_slope must lie in (0, 1)");
    if (ls_max_shrinks < 0)
        throw ConfigError("ls_max_shrinks must be nonnegative");
    if (t_init && !(*t_init > 0.0))
        throw ConfigError("t_init must be positive");
    if (!(weight_floor >= 0.0))
        throw ConfigError("weight_floor must be nonnegative");
    if (!(sideband_margin >= 0.0 && sideband_margin < 1.0))
        throw ConfigError("sideband_margin must lie in [0, 1)");
    if (!(alpha_adapt_factor > 1.0))
        throw ConfigError("alpha_adapt_factor must exceed 1");
}

IntensityMap data_weights(const CountFrame& counts, double floor)
{
    return data_weights(to_intensity(counts), floor);
}

IntensityMap data_weights(const IntensityMap& counts, double floor)
{
    if (!(floor >= 0.0))
        throw DomainError("weight floor must be nonnegative");
    IntensityMap out(counts.shape());
    for (std::size_t i = 0; i < counts.size(); ++i)
        out[i] = std::sqrt(std::max(counts[i], floor));
    return out;
}

double penalty(const ComplexField& o, const PenaltyWindow& w)
{
    double psi = 0.0;
    accumulate_penalty(o, w, &psi, nullptr, 1.0);
    return psi;
}

ComplexField penalty_gradient(const ComplexField& o, const PenaltyWindow& w)
{
    ComplexField g(o.shape());
    accumulate_penalty(o, w, nullptr, &g, 1.0);
    return g;
}

double cost(const ComplexField& o, const ComplexField& r, const CountFrame& counts, const OptimizerConfig& cfg)
{
    return cost(o, r, to_intensity(counts), cfg);
}

double cost(const ComplexField& o, const ComplexField& r, const IntensityMap& frame, const OptimizerConfig& cfg)
{
    require_same_shape(o.shape(), r.shape(), "cost");
    return Problem(frame, r, cfg).cost(o, cfg.alpha);
}

ComplexField gradient(const ComplexField& o, const ComplexField& r, const CountFrame& counts,
                      const OptimizerConfig& cfg)
{
    return gradient(o, r, to_intensity(counts), cfg);
}

ComplexField gradient(const ComplexField& o, const ComplexField& r, const IntensityMap& frame,
                      const OptimizerConfig& cfg)
{
    require_same_shape(o.shape(), r.shape(), "gradient");
    return Problem(frame, r, cfg).gradient(o, cfg.alpha);
}

std::pair<double, double> reference_carrier(const ComplexField& r)
{
    const ComplexField spectrum = fft2(r);
    std::size_t best = 0;
    double best_mag = -1.0;
    for (std::size_t i = 0; i < spectrum.size(); ++i)
    {
        const double m = std::abs(spectrum[i]);
        if (m > best_mag)
        {
            best_mag = m;
            best = i;
        }
    }
    return {signed_frequency(best % r.width(), r.width()), signed_frequency(best / r.width(), r.height())};
}

ComplexField sideband_estimate(const IntensityMap& counts, const ComplexField& r, double margin)
{
    require_same_shape(counts.shape(), r.shape(), "sideband_estimate");
    const auto [kx, ky] = reference_carrier(r);
    const double k = std::hypot(kx, ky);
    if (k == 0.0)
        throw DomainError("sideband initialization needs a tilted reference");

    ComplexField spectrum(counts.shape());
    for (std::size_t i = 0; i < counts.size(); ++i)
        spectrum[i] = counts[i];
    spectrum = fft2(spectrum);

    // R^* O sits at -k; keep bins clearly on that side of the DC line.
    const std::size_t w = counts.width();
    const std::size_t h = counts.height();
    for (std::size_t y = 0; y < h; ++y)
        for (std::size_t x = 0; x < w; ++x)
        {
            const double projection = (signed_frequency(x, w) * kx + signed_frequency(y, h) * ky) / k;
            if (!(projection < -margin * k))
                spectrum(x, y) = Complex{};
        }
    ComplexField order = ifft2(spectrum);
    for (std::size_t i = 0; i < order.size(); ++i)
    {
        const double rr = std::norm(r[i]);
        order[i] = rr > 0.0 ? order[i] * r[i] / rr : Complex{};
    }
    return order;
}

ReconstructionReport reconstruct(const CountFrame& counts, const ComplexField& r, const OptimizerConfig& cfg)
{
    return reconstruct(to_intensity(counts), r, cfg);
}

ReconstructionReport reconstruct(const IntensityMap& frame, const ComplexField& r, const OptimizerConfig& cfg)
{
    cfg.validate();
    const Problem p(frame, r, cfg);
    const Start s = prepare(p, r, cfg);
    ReconstructionReport report = begin_report(p, s);
    const auto objective = [&](const ComplexField& x) { return p.cost(x, s.alpha); };

    ComplexField o = s.field;
    double value = report.final_cost;
    for (int it = 1; it <= cfg.max_iters; ++it)
    {
        const ComplexField g = p.gradient(o, s.alpha);
        const double g2 = squared_norm(g);
        if (g2 == 0.0)
        {
            report.converged = true;
            break;
        }
        auto accepted = backtrack(objective, o, value, g, g2, s.t_init, cfg);
        if (!accepted)
            stagnate(report, it);
        const double change = relative_change(o, accepted->point);
        o = std::move(accepted->point);
        value = accepted->value;
        report.field = o;
        report.final_cost = value;
        report.iterations = it;
        report.cost_trace.push_back(value);
        report.records.push_back({it, value, accepted->t, std::sqrt(g2)});
        if (change < cfg.rel_tol)
        {
            report.converged = true;
            break;
        }
    }
    return report;
}

ReconstructionReport reconstruct_alternating(const CountFrame& counts, const ComplexField& r,
                                             const OptimizerConfig& cfg)
{
    return reconstruct_alternating(to_intensity(counts), r, cfg);
}

ReconstructionReport reconstruct_alternating(const IntensityMap& frame, const ComplexField& r,
                                             const OptimizerConfig& cfg)
{
    cfg.validate();
    const Problem p(frame, r, cfg);
    const Start s = prepare(p, r, cfg);
    ReconstructionReport report = begin_report(p, s);
    const double alpha = s.alpha;
    double weight = s.alpha;

    const auto data_objective = [&](const ComplexField& x) { return p.data_cost(x); };
    const auto full_objective = [&](const ComplexField& x) { return p.cost(x, alpha); };

    ComplexField o = s.field;
    double value = report.final_cost;
    for (int it = 1; it <= cfg.max_iters; ++it)
    {
        // (a) data fit alone.
        const ComplexField gd = p.data_gradient(o);
        const double gd2 = squared_norm(gd);
        ComplexField after_data = o;
        double data_drop = 0.0;
        double t_used = 0.0;
        if (gd2 > 0.0)
        {
            const double before = p.data_cost(o);
            auto accepted = backtrack(data_objective, o, before, gd, gd2, s.t_init, cfg);
            if (!accepted)
                stagnate(report, it);
            data_drop = before - accepted->value;
            t_used = accepted->t;
            after_data = std::move(accepted->point);
        }

        // (b) weighted penalty alone.
        ComplexField candidate = after_data;
        double penalty_drop = 0.0;
        if (weight > 0.0)
        {
            ComplexField gp(o.shape());
            p.add_penalty_gradient(after_data, gp, weight);
            const double gp2 = squared_norm(gp);
            if (gp2 > 0.0)
            {
                const auto pen_objective = [&](const ComplexField& x) { return weight * p.penalty_cost(x); };
                const double before = pen_objective(after_data);
                auto accepted = backtrack(pen_objective, after_data, before, gp, gp2, s.t_init, cfg);
                if (accepted)
                {
                    penalty_drop = before - accepted->value;
                    candidate = std::move(accepted->point);
                }
            }
        }

        double candidate_value = full_objective(candidate);
        double grad_norm = std::sqrt(gd2);
        if (!(candidate_value <= value))
        {
            // The pair of sub-steps raised the objective: fall back to one
            // backtracked step on the full cost.
            const ComplexField g = p.gradient(o, alpha);
            const double g2 = squared_norm(g);
            auto accepted = backtrack(full_objective, o, value, g, g2, s.t_init, cfg);
            if (!accepted)
                stagnate(report, it);
            candidate = std::move(accepted->point);
            candidate_value = accepted->value;
            t_used = accepted->t;
            grad_norm = std::sqrt(g2);
        }

        if (cfg.adapt_alpha && weight > 0.0)
        {
            if (penalty_drop > 2.0 * data_drop)
                weight /= cfg.alpha_adapt_factor;
            else if (penalty_drop < 0.5 * data_drop)
                weight *= cfg.alpha_adapt_factor;
        }

        const double change = relative_change(o, candidate);
        o = std::move(candidate);
        value = candidate_value;
        report.field = o;
        report.final_cost = value;
        report.iterations = it;
        report.penalty_step_weight = weight;
        report.cost_trace.push_back(value);
        report.records.push_back({it, value, t_used, grad_norm});
        if (change < cfg.rel_tol)
        {
            report.converged = true;
            break;
        }
    }
    return report;
}

} // namespace phasebench
