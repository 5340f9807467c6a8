#include "phasebench/metrics.hpp"

#include <boost/math/distributions/students_t.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>
#include <sstream>

#include "phasebench/field.hpp"
#include "phasebench/phm_io.hpp"

namespace phasebench {
namespace {

double parse_number(const std::string& field, std::size_t line)
{
    double v = 0.0;
    const auto* begin = field.data();
    const auto* end = field.data() + field.size();
    const auto res = std::from_chars(begin, end, v);
    if (res.ec != std::errc{} || res.ptr != end)
        throw IoError("sweep CSV line " + std::to_string(line) + ": bad number '" + field + "'");
    return v;
}

std::vector<std::string> split_commas(const std::string& line)
{
    std::vector<std::string> out;
    std::string cell;
    std::istringstream in(line);
    while (std::getline(in, cell, ','))
        out.push_back(cell);
    return out;
}

void mean_sd(const std::vector<double>& xs, double& m, double& sd)
{
    m = 0.0;
    for (double x : xs)
        m += x;
    m /= static_cast<double>(xs.size());
    double ss = 0.0;
    for (double x : xs)
        ss += (x - m) * (x - m);
    sd = xs.size() > 1 ? std::sqrt(ss / static_cast<double>(xs.size() - 1)) : 0.0;
}

} // namespace

PhaseMap wrapped_difference(const PhaseMap& a, const PhaseMap& b)
{
    require_same_shape(a.shape(), b.shape(), "wrapped_difference");
    PhaseMap out(a.shape());
    for (std::size_t i = 0; i < a.size(); ++i)
        out[i] = wrap_phase(a[i] - b[i]);
    return out;
}

double rms_wrapped_error(const PhaseMap& a, const PhaseMap& b, bool remove_piston, std::size_t border)
{
    require_same_shape(a.shape(), b.shape(), "rms_wrapped_error");
    if (2 * border >= a.width() || 2 * border >= a.height())
        throw DomainError("border crop leaves no pixels");

    std::vector<double> diff;
    diff.reserve(a.size());
    for (std::size_t y = border; y < a.height() - border; ++y)
        for (std::size_t x = border; x < a.width() - border; ++x)
            diff.push_back(wrap_phase(a(x, y) - b(x, y)));

    if (remove_piston)
    {
        Complex sum{};
        for (double d : diff)
            sum += std::polar(1.0, d);
        const double piston = sum == Complex{} ? 0.0 : std::arg(sum);
        for (double& d : diff)
            d = wrap_phase(d - piston);
    }
    double ss = 0.0;
    for (double d : diff)
        ss += d * d;
    return std::sqrt(ss / static_cast<double>(diff.size()));
}

double noise_gain(double e_ps, double e_co)
{
    if (!(e_co > 0.0))
        throw DomainError("noise gain needs a positive optimization error");
    if (!(e_ps >= 0.0))
        throw DomainError("noise gain needs a nonnegative reference error");
    return e_ps / e_co;
}

PowerLawFit fit_power_law(const std::vector<std::pair<double, double>>& points)
{
    if (points.size() < 3)
        throw DomainError("power-law fit needs at least 3 points");
    for (const auto& [x, y] : points)
        if (!(x > 0.0) || !(y > 0.0) || !std::isfinite(x) || !std::isfinite(y))
            throw DomainError("power-law fit needs positive finite values");

    // Logs are taken of ratios to the first point, so scaling every y by a
    // power of two leaves the slope bit-identical.
    const auto n = static_cast<double>(points.size());
    const double x0 = points.front().first;
    const double y0 = points.front().second;
    std::vector<double> lx;
    std::vector<double> ly;
    for (const auto& [x, y] : points)
    {
        lx.push_back(std::log(x / x0));
        ly.push_back(std::log(y / y0));
    }
    double mx = 0.0;
    double my = 0.0;
    for (std::size_t i = 0; i < lx.size(); ++i)
    {
        mx += lx[i];
        my += ly[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0.0;
    double sxy = 0.0;
    double syy = 0.0;
    for (std::size_t i = 0; i < lx.size(); ++i)
    {
        sxx += (lx[i] - mx) * (lx[i] - mx);
        sxy += (lx[i] - mx) * (ly[i] - my);
        syy += (ly[i] - my) * (ly[i] - my);
    }
    if (sxx == 0.0)
        throw DomainError("power-law fit needs at least two distinct n0 values");

    PowerLawFit fit;
    fit.exponent = sxy / sxx;
    const double intercept = my - fit.exponent * mx;
    fit.prefactor = y0 * std::exp(intercept - fit.exponent * std::log(x0));

    double sse = 0.0;
    for (std::size_t i = 0; i < lx.size(); ++i)
    {
        const double r = ly[i] - (intercept + fit.exponent * lx[i]);
        sse += r * r;
    }
    const double dof = n - 2.0;
    if (dof > 0.0)
    {
        const double se = std::sqrt(sse / dof / sxx);
        boost::math::students_t dist(dof);
        fit.exponent_ci95 = boost::math::quantile(dist, 0.975) * se;
    }
    fit.r_squared = syy > 0.0 ? std::clamp(1.0 - sse / syy, 0.0, 1.0) : 1.0;
    return fit;
}

std::vector<SweepPoint> aggregate(const std::vector<SweepRecord>& records)
{
    std::map<double, std::vector<const SweepRecord*>> groups;
    for (const auto& r : records)
        groups[r.n0].push_back(&r);
    std::vector<SweepPoint> out;
    for (const auto& [n0, group] : groups)
    {
        std::vector<double> ps;
        std::vector<double> co;
        std::vector<double> g;
        for (const auto* r : group)
        {
            ps.push_back(r->e_ps);
            co.push_back(r->e_co);
            g.push_back(r->gain);
        }
        SweepPoint p;
        p.n0 = n0;
        p.runs = group.size();
        mean_sd(ps, p.e_ps, p.e_ps_sd);
        mean_sd(co, p.e_co, p.e_co_sd);
        mean_sd(g, p.gain, p.gain_sd);
        out.push_back(p);
    }
    return out;
}

SweepFits fit_sweep(const std::vector<SweepPoint>& points)
{
    std::vector<std::pair<double, double>> ps;
    std::vector<std::pair<double, double>> co;
    std::vector<std::pair<double, double>> g;
    for (const auto& p : points)
    {
        ps.emplace_back(p.n0, p.e_ps);
        co.emplace_back(p.n0, p.e_co);
        g.emplace_back(p.n0, p.gain);
    }
    return {fit_power_law(ps), fit_power_law(co), fit_power_law(g)};
}

std::string sweep_csv(const std::vector<SweepRecord>& records)
{
    std::string out = std::string(kSweepCsvHeader) + "\n";
    for (const auto& r : records)
    {
        out += format_double(r.n0) + "," + std::to_string(r.seed.stream_index) + "," + format_double(r.e_ps) + "," +
               format_double(r.e_co) + "," + format_double(r.gain) + "," + std::to_string(r.iters_co) + "\n";
    }
    return out;
}

std::vector<SweepRecord> parse_sweep_csv(const std::string& text)
{
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line) || line != kSweepCsvHeader)
        throw IoError(std::string("sweep CSV must start with header ") + kSweepCsvHeader);
    std::vector<SweepRecord> out;
    std::size_t lineno = 1;
    while (std::getline(in, line))
    {
        ++lineno;
        if (line.empty())
            continue;
        const auto cells = split_commas(line);
        if (cells.size() != 6)
            throw IoError("sweep CSV line " + std::to_string(lineno) + ": expected 6 fields");
        SweepRecord r;
        r.n0 = parse_number(cells[0], lineno);
        r.seed.stream_index = static_cast<std::uint64_t>(parse_number(cells[1], lineno));
        r.e_ps = parse_number(cells[2], lineno);
        r.e_co = parse_number(cells[3], lineno);
        r.gain = parse_number(cells[4], lineno);
        r.iters_co = static_cast<int>(parse_number(cells[5], lineno));
        out.push_back(r);
    }
    return out;
}

std::string fits_csv(const SweepFits& fits)
{
    std::string out = std::string(kFitsCsvHeader) + "\n";
    auto row = [&](const char* name, const PowerLawFit& f) {
        out += std::string(name) + "," + format_double(f.exponent) + "," + format_double(f.exponent_ci95) + "," +
               format_double(f.prefactor) + "," + format_double(f.r_squared) + "\n";
    };
    row("e_ps", fits.e_ps);
    row("e_co", fits.e_co);
    row("gain", fits.gain);
    return out;
}

} // namespace phasebench
