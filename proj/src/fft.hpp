#pragma once

#include <complex>
#include <vector>

namespace msfi::detail {

/// Unnormalized complex DFT on a row-major d-dimensional grid, in place.
/// sign = -1: forward (e^{-i...}), sign = +1: backward (e^{+i...}).
/// Thread-safe; plans are cached per (dims, sign) behind a lock.
void fft_nd(std::complex<double>* data, const std::vector<int>& dims, int sign);

}  // namespace msfi::detail
