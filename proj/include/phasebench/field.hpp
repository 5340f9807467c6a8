#pragma once

#include <numbers>

#include "phasebench/grid.hpp"

namespace phasebench {

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Square-law detection of two superposed fields:
/// |r|^2 + |o|^2 + r*.o + r.o*, clamped at zero against rounding.
IntensityMap interfere(const ComplexField& r, const ComplexField& o);

/// Reduces an angle to (-pi, pi]. Throws DomainError for non-finite input.
double wrap_phase(double x);

/// Pixelwise arg() in (-pi, pi]; zero-amplitude pixels get phase 0.
PhaseMap phase_of(const ComplexField& f);

/// Pixelwise wrap of an arbitrary real grid.
PhaseMap wrap_all(std::span<const double> values, GridShape shape);

} // namespace phasebench
