#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "phasebench/errors.hpp"

namespace phasebench {

using Complex = std::complex<double>;

/// Width and height of a rectangular pixel grid. A default-constructed shape
/// is empty (0x0); every shape built from explicit dimensions is at least 1x1.
class GridShape
{
  public:
    GridShape() = default;

    GridShape(std::size_t width, std::size_t height)
      : width_(width)
      , height_(height)
    {
        if (width == 0 || height == 0)
            throw DomainError("grid dimensions must be positive");
        if (width > std::numeric_limits<std::size_t>::max() / height / sizeof(Complex))
            throw DomainError("grid too large");
    }

    std::size_t width() const noexcept { return width_; }
    std::size_t height() const noexcept { return height_; }
    std::size_t pixels() const noexcept { return width_ * height_; }
    bool empty() const noexcept { return pixels() == 0; }

    friend bool operator==(const GridShape&, const GridShape&) = default;

    std::string str() const { return std::to_string(width_) + "x" + std::to_string(height_); }

  private:
    std::size_t width_ = 0;
    std::size_t height_ = 0;
};

inline void require_same_shape(const GridShape& a, const GridShape& b, const char* what)
{
    if (a != b)
        throw DimensionError(std::string(what) + ": shape mismatch " + a.str() + " vs " + b.str());
}

/// Row-major 2D grid. The tag parameter keeps grids of different meaning
/// (phases, intensities, fields) from being mixed up at compile time.
template <typename T, typename Tag>
class Grid
{
  public:
    using value_type = T;

    Grid() = default;

    explicit Grid(GridShape shape, T fill = T{})
      : shape_(shape)
      , values_(shape.pixels(), fill)
    {}

    Grid(GridShape shape, std::vector<T> values)
      : shape_(shape)
      , values_(std::move(values))
    {
        if (values_.size() != shape_.pixels())
            throw DimensionError("grid payload length does not match shape " + shape_.str());
    }

    const GridShape& shape() const noexcept { return shape_; }
    std::size_t width() const noexcept { return shape_.width(); }
    std::size_t height() const noexcept { return shape_.height(); }
    std::size_t size() const noexcept { return values_.size(); }

    T& operator()(std::size_t x, std::size_t y) { return values_[y * shape_.width() + x]; }
    const T& operator()(std::size_t x, std::size_t y) const { return values_[y * shape_.width() + x]; }
    T& operator[](std::size_t i) { return values_[i]; }
    const T& operator[](std::size_t i) const { return values_[i]; }

    std::span<T> values() noexcept { return values_; }
    std::span<const T> values() const noexcept { return values_; }

    auto begin() noexcept { return values_.begin(); }
    auto end() noexcept { return values_.end(); }
    auto begin() const noexcept { return values_.begin(); }
    auto end() const noexcept { return values_.end(); }

    friend bool operator==(const Grid&, const Grid&) = default;

  private:
    GridShape shape_;
    std::vector<T> values_;
};

struct ComplexFieldTag;
struct PhaseMapTag;
struct IntensityMapTag;
struct CountFrameTag;

/// Complex amplitudes; |value|^2 is in expected photon counts per exposure.
using ComplexField = Grid<Complex, ComplexFieldTag>;
/// Wrapped phases in radians, each in (-pi, pi].
using PhaseMap = Grid<double, PhaseMapTag>;
/// Expected (noiseless) photon counts per pixel, nonnegative.
using IntensityMap = Grid<double, IntensityMapTag>;
/// Detected photon counts of one exposure.
using CountFrame = Grid<std::uint32_t, CountFrameTag>;

template <typename T, typename Tag>
double mean(const Grid<T, Tag>& g)
{
    double sum = 0.0;
    for (const auto& v : g)
        sum += static_cast<double>(v);
    return g.size() == 0 ? 0.0 : sum / static_cast<double>(g.size());
}

/// Casts a count frame to reals once, for use in floating point pipelines.
inline IntensityMap to_intensity(const CountFrame& frame)
{
    IntensityMap out(frame.shape());
    for (std::size_t i = 0; i < frame.size(); ++i)
        out[i] = static_cast<double>(frame[i]);
    return out;
}

} // namespace phasebench
