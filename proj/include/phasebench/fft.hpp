#pragma once

#include "phasebench/grid.hpp"

namespace phasebench {

/// Unnormalized 2D DFT, X[k] = sum_n x[n] exp(-2 pi i k.n / N).
ComplexField fft2(const ComplexField& in);

/// Inverse 2D DFT including the 1/N normalization.
ComplexField ifft2(const ComplexField& in);

/// Signed frequency (in cycles per grid extent) of DFT bin `bin` on an axis of `n` samples.
inline double signed_frequency(std::size_t bin, std::size_t n)
{
    return bin <= n / 2 ? static_cast<double>(bin) : static_cast<double>(bin) - static_cast<double>(n);
}

} // namespace phasebench
