#pragma once

#include "phasebench/field.hpp"
#include "phasebench/grid.hpp"

namespace phasebench {

/// Tilted plane wave: amplitude * exp(i (2 pi (kx x / W + ky y / H) + phase0)).
/// kx, ky are in cycles per grid extent.
struct TiltSpec
{
    double kx = 8.0;
    double ky = 6.0;
    double amplitude = 1.0;
    double phase0 = 0.0;

    void validate(const GridShape& shape) const;
};

/// Thin-lens quadratic front with phase -pi pitch^2 r^2 / (lambda f), r in pixels.
struct LensSpec
{
    double focal_length = 0.1;       // m
    double wavelength = 632.8e-9;    // m, He-Ne
    double pixel_pitch = 3.0e-6;     // m
    double center_x = 63.5;          // px
    double center_y = 63.5;          // px
    double amplitude = 1.0;

    void validate() const;

    /// Same lens centred on the grid.
    LensSpec centered_on(const GridShape& shape) const;
};

ComplexField make_tilted_plane(const GridShape& shape, const TiltSpec& tilt);
ComplexField make_quadratic_front(const GridShape& shape, const LensSpec& lens);

/// Unwrapped phase of the quadratic front at (x, y).
double quadratic_phase(const LensSpec& lens, double x, double y);

/// Returns exp(-i theta) with exact components at multiples of pi/2.
Complex shift_phasor(double theta);

/// Pixelwise r * exp(-i theta). With this sign the interferogram cross term is
/// 2|R||O| cos(phi_O - phi_R + theta).
ComplexField apply_phase_shift(const ComplexField& r, double theta);

/// Rescales the map so its mean equals n0 counts per pixel.
IntensityMap scale_to_budget(const IntensityMap& i, double n0);

/// Recovers the reference tilt from straight-line calibration fringes (a tilted
/// plane against an untilted, unit-amplitude plane). The carrier sign is
/// reported in the half-plane kx > 0 (or kx == 0, ky > 0); amplitude and phase0
/// are read from the peak bin, so amplitude is |R| times the calibration
/// object's amplitude. Throws CalibrationError when no fringe peak stands out.
TiltSpec estimate_tilt(const IntensityMap& calibration);

/// Noiseless straight-line fringes of the reference against a unit plane.
IntensityMap make_calibration_frame(const GridShape& shape, const TiltSpec& tilt);

/// Everything needed to synthesize the test scene.
struct SceneConfig
{
    GridShape shape{128, 128};
    TiltSpec tilt{};
    LensSpec lens{};

    void validate() const;
};

struct SceneFields
{
    ComplexField reference;
    ComplexField object;
};

/// Unit-exposure reference and object fields of the scene.
SceneFields synthesize(const SceneConfig& scene);

/// Fields scaled by a common factor so that the single-frame interferogram
/// |R + O|^2 averages n0 counts per pixel.
SceneFields expose(const SceneFields& fields, double n0);

} // namespace phasebench
