#pragma once

// Radix-2 iterative Cooley-Tukey transform. Inputs shorter than the
// transform size are zero-padded; the size must be a power of two.

#include <complex>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "vispro/common.hpp"

namespace vispro {

using Complex = std::complex<double>;

inline std::vector<Complex> fft(std::span<const Complex> input, std::size_t size) {
    if (!is_power_of_two(size)) {
        throw UserError("fft: size " + std::to_string(size) + " is not a power of two");
    }
    if (input.size() > size) {
        throw UserError("fft: input length " + std::to_string(input.size()) +
                        " exceeds transform size " + std::to_string(size));
    }

    std::vector<Complex> a(size, Complex{0.0, 0.0});
    for (std::size_t i = 0; i < input.size(); ++i) a[i] = input[i];

    // Bit-reversal permutation.
    for (std::size_t i = 1, j = 0; i < size; ++i) {
        std::size_t bit = size >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(a[i], a[j]);
    }

    for (std::size_t len = 2; len <= size; len <<= 1) {
        const double angle = -2.0 * M_PI / static_cast<double>(len);
        const std::size_t half = len / 2;
        std::vector<Complex> twiddle(half);
        for (std::size_t k = 0; k < half; ++k) {
            twiddle[k] = std::polar(1.0, angle * static_cast<double>(k));
        }
        for (std::size_t start = 0; start < size; start += len) {
            for (std::size_t k = 0; k < half; ++k) {
                const Complex even = a[start + k];
                const Complex odd = a[start + k + half] * twiddle[k];
                a[start + k] = even + odd;
                a[start + k + half] = even - odd;
            }
        }
    }
    return a;
}

inline std::vector<Complex> fft(const std::vector<Complex>& input, std::size_t size) {
    return fft(std::span<const Complex>(input), size);
}

}  // namespace vispro
