#include "phasebench/scene.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "phasebench/fft.hpp"

namespace phasebench {

void TiltSpec::validate(const GridShape& shape) const
{
    if (!(amplitude > 0.0) || !std::isfinite(amplitude))
        throw DomainError("tilt amplitude must be positive");
    if (!std::isfinite(kx) || !std::isfinite(ky) || !std::isfinite(phase0))
        throw DomainError("tilt parameters must be finite");
    if (std::abs(kx) >= static_cast<double>(shape.width()) / 2.0 ||
        std::abs(ky) >= static_cast<double>(shape.height()) / 2.0)
        throw DomainError("tilt exceeds the Nyquist limit of a " + shape.str() + " grid");
}

void LensSpec::validate() const
{
    if (!(focal_length > 0.0) || !(wavelength > 0.0) || !(pixel_pitch > 0.0) || !(amplitude > 0.0))
        throw DomainError("lens focal length, wavelength, pitch and amplitude must be positive");
    if (!std::isfinite(center_x) || !std::isfinite(center_y))
        throw DomainError("lens center must be finite");
}

LensSpec LensSpec::centered_on(const GridShape& shape) const
{
    LensSpec out = *this;
    out.center_x = (static_cast<double>(shape.width()) - 1.0) / 2.0;
    out.center_y = (static_cast<double>(shape.height()) - 1.0) / 2.0;
    return out;
}

ComplexField make_tilted_plane(const GridShape& shape, const TiltSpec& tilt)
{
    tilt.validate(shape);
    ComplexField out(shape);
    const double w = static_cast<double>(shape.width());
    const double h = static_cast<double>(shape.height());
    for (std::size_t y = 0; y < shape.height(); ++y)
        for (std::size_t x = 0; x < shape.width(); ++x)
        {
            const double phase = kTwoPi * (tilt.kx * static_cast<double>(x) / w + tilt.ky * static_cast<double>(y) / h) +
                                 tilt.phase0;
            out(x, y) = std::polar(tilt.amplitude, phase);
        }
    return out;
}

double quadratic_phase(const LensSpec& lens, double x, double y)
{
    const double dx = x - lens.center_x;
    const double dy = y - lens.center_y;
    return -kPi * lens.pixel_pitch * lens.pixel_pitch * (dx * dx + dy * dy) / (lens.wavelength * lens.focal_length);
}

ComplexField make_quadratic_front(const GridShape& shape, const LensSpec& lens)
{
    lens.validate();
    ComplexField out(shape);
    for (std::size_t y = 0; y < shape.height(); ++y)
        for (std::size_t x = 0; x < shape.width(); ++x)
        {
            const double phase = wrap_phase(quadratic_phase(lens, static_cast<double>(x), static_cast<double>(y)));
            out(x, y) = std::polar(lens.amplitude, phase);
        }
    return out;
}

Complex shift_phasor(double theta)
{
    if (!std::isfinite(theta))
        throw DomainError("phase shift must be finite");
    const double quarters = theta / (0.5 * kPi);
    const double nearest = std::round(quarters);
    if (std::abs(quarters - nearest) < 1e-12 && std::abs(nearest) < 1e15)
    {
        switch (((static_cast<long long>(nearest) % 4) + 4) % 4)
        {
        case 0:
            return {1.0, 0.0};
        case 1:
            return {0.0, -1.0};
        case 2:
            return {-1.0, 0.0};
        default:
            return {0.0, 1.0};
        }
    }
    return std::polar(1.0, -theta);
}

ComplexField apply_phase_shift(const ComplexField& r, double theta)
{
    const Complex phasor = shift_phasor(theta);
    ComplexField out(r.shape());
    for (std::size_t i = 0; i < r.size(); ++i)
        out[i] = r[i] * phasor;
    return out;
}

IntensityMap scale_to_budget(const IntensityMap& i, double n0)
{
    if (!(n0 > 0.0) || !std::isfinite(n0))
        throw DomainError("photon budget must be positive");
    const double m = mean(i);
    if (!(m > 0.0))
        throw DomainError("cannot scale an all-zero intensity map");
    const double factor = n0 / m;
    IntensityMap out(i.shape());
    for (std::size_t k = 0; k < i.size(); ++k)
        out[k] = i[k] * factor;
    return out;
}

TiltSpec estimate_tilt(const IntensityMap& calibration)
{
    const GridShape shape = calibration.shape();
    const std::size_t w = shape.width();
    const std::size_t h = shape.height();
    ComplexField data(shape);
    for (std::size_t i = 0; i < calibration.size(); ++i)
        data[i] = calibration[i];
    const ComplexField spectrum = fft2(data);

    std::vector<double> magnitude(spectrum.size());
    for (std::size_t i = 0; i < spectrum.size(); ++i)
        magnitude[i] = std::abs(spectrum[i]);

    // The peak is located on a Hann-windowed, mean-free copy: the conjugate
    // fringe order leaks far less into it, which keeps the log-parabola
    // refinement honest for off-grid carriers.
    auto hann = [](std::size_t i, std::size_t n) {
        return n < 8 ? 1.0 : 0.5 - 0.5 * std::cos(kTwoPi * static_cast<double>(i) / static_cast<double>(n));
    };
    double level = 0.0;
    for (double v : calibration)
        level += v;
    level /= static_cast<double>(calibration.size());
    for (std::size_t y = 0; y < h; ++y)
        for (std::size_t x = 0; x < w; ++x)
            data(x, y) = (calibration(x, y) - level) * hann(x, w) * hann(y, h);
    const ComplexField windowed = fft2(data);
    std::vector<double> located(windowed.size());
    for (std::size_t i = 0; i < windowed.size(); ++i)
        located[i] = std::abs(windowed[i]);

    std::size_t best = 0;
    double best_loc = -1.0;
    for (std::size_t y = 0; y < h; ++y)
        for (std::size_t x = 0; x < w; ++x)
        {
            const double fx = signed_frequency(x, w);
            const double fy = signed_frequency(y, h);
            const bool upper = fx > 0.0 || (fx == 0.0 && fy > 0.0);
            if (!upper)
                continue;
            if (located[y * w + x] > best_loc)
            {
                best_loc = located[y * w + x];
                best = y * w + x;
            }
        }

    std::vector<double> sorted = magnitude;
    std::nth_element(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(sorted.size() / 2), sorted.end());
    const double median = sorted[sorted.size() / 2];
    // Rounding noise alone can beat 3x a near-zero median; also demand the
    // peak be visible against the DC level.
    const double floor = std::max(3.0 * median, 1e-9 * magnitude[0]);
    const double best_mag = magnitude[best];
    if (best_loc <= 0.0 || !(best_mag > floor))
        throw CalibrationError("no fringe carrier above 3x the median spectral magnitude");

    const std::size_t bx = best % w;
    const std::size_t by = best / w;
    const double tiny = 1e-10 * best_loc;
    auto refine = [&](double left, double centre, double right) {
        const double a = std::log(std::max(left, tiny));
        const double b = std::log(std::max(centre, tiny));
        const double c = std::log(std::max(right, tiny));
        const double denom = a - 2.0 * b + c;
        if (denom >= 0.0)
            return 0.0;
        return std::clamp(0.5 * (a - c) / denom, -0.5, 0.5);
    };
    const double dx = w >= 3 ? refine(located[by * w + (bx + w - 1) % w], best_loc, located[by * w + (bx + 1) % w])
                             : 0.0;
    const double dy = h >= 3 ? refine(located[((by + h - 1) % h) * w + bx], best_loc, located[((by + 1) % h) * w + bx])
                             : 0.0;

    TiltSpec out;
    out.kx = signed_frequency(bx, w) + dx;
    out.ky = signed_frequency(by, h) + dy;
    const Complex peak = spectrum[best] / static_cast<double>(spectrum.size());
    out.amplitude = std::abs(peak);
    out.phase0 = wrap_phase(std::arg(peak));
    return out;
}

IntensityMap make_calibration_frame(const GridShape& shape, const TiltSpec& tilt)
{
    return interfere(make_tilted_plane(shape, tilt), ComplexField(shape, Complex{1.0, 0.0}));
}

void SceneConfig::validate() const
{
    if (shape.empty())
        throw DomainError("scene grid is empty");
    tilt.validate(shape);
    lens.validate();
}

SceneFields synthesize(const SceneConfig& scene)
{
    scene.validate();
    return {make_tilted_plane(scene.shape, scene.tilt), make_quadratic_front(scene.shape, scene.lens)};
}

SceneFields expose(const SceneFields& fields, double n0)
{
    if (!(n0 > 0.0) || !std::isfinite(n0))
        throw DomainError("photon budget must be positive");
    const double m = mean(interfere(fields.reference, fields.object));
    if (!(m > 0.0))
        throw DomainError("scene produces no light");
    const double gain = std::sqrt(n0 / m);
    SceneFields out = fields;
    for (auto& v : out.reference)
        v *= gain;
    for (auto& v : out.object)
        v *= gain;
    return out;
}

} // namespace phasebench
