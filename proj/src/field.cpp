#include "phasebench/field.hpp"

#include <cmath>

namespace phasebench {

IntensityMap interfere(const ComplexField& r, const ComplexField& o)
{
    require_same_shape(r.shape(), o.shape(), "interfere");
    IntensityMap out(r.shape());
    for (std::size_t i = 0; i < r.size(); ++i)
    {
        const Complex a = r[i];
        const Complex b = o[i];
        // r*.o + r.o* = 2 Re(r* o); written with commuting products so that
        // swapping the arguments gives a bit-identical result.
        const double cross = 2.0 * (a.real() * b.real() + a.imag() * b.imag());
        const double value = (std::norm(a) + std::norm(b)) + cross;
        out[i] = value > 0.0 ? value : 0.0;
    }
    return out;
}

double wrap_phase(double x)
{
    if (!std::isfinite(x))
        throw DomainError("wrap_phase: non-finite angle");
    // remainder() lands in [-pi, pi]; fold the closed lower end onto +pi.
    double r = std::remainder(x, kTwoPi);
    if (r <= -kPi)
        r += kTwoPi;
    return r;
}

PhaseMap phase_of(const ComplexField& f)
{
    PhaseMap out(f.shape());
    for (std::size_t i = 0; i < f.size(); ++i)
    {
        const Complex v = f[i];
        out[i] = (v == Complex{}) ? 0.0 : wrap_phase(std::arg(v));
    }
    return out;
}

PhaseMap wrap_all(std::span<const double> values, GridShape shape)
{
    PhaseMap out(shape);
    if (values.size() != out.size())
        throw DimensionError("wrap_all: payload length does not match shape");
    for (std::size_t i = 0; i < values.size(); ++i)
        out[i] = wrap_phase(values[i]);
    return out;
}

} // namespace phasebench
