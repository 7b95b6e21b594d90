/*
 * Copyright 2026 The tinyml-workbench Authors
 *
 * SPDX-License-Identifier: Apache-2.0
 */

#pragma once

#include <bit>
#include <cmath>
#include <complex>
#include <numbers>
#include <span>
#include <vector>

#include "tinyml/core/error.hpp"

namespace tinyml::dsp {

using Complex = std::complex<double>;

inline bool is_power_of_two(std::size_t n) { return n >= 1 && std::has_single_bit(n); }

/// Iterative radix-2 decimation-in-time FFT with precomputed twiddles and
/// bit-reversal table. Sized once, reused per frame.
class RealFft {
public:
    explicit RealFft(std::size_t n) : n_(n), twiddle_(n / 2), bitrev_(n), work_(n) {
        if (n < 2 || !is_power_of_two(n))
            fail(ErrorCode::InvalidArgument, "FFT length must be a power of two >= 2, got " + std::to_string(n));
        const unsigned bits = static_cast<unsigned>(std::countr_zero(n));
        for (std::size_t i = 0; i < n; ++i) {
            std::size_t r = 0;
            for (unsigned b = 0; b < bits; ++b)
                if (i & (std::size_t{1} << b)) r |= std::size_t{1} << (bits - 1 - b);
            bitrev_[i] = r;
        }
        for (std::size_t k = 0; k < n / 2; ++k)
            twiddle_[k] = std::polar(1.0, -2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(n));
    }

    std::size_t size() const { return n_; }
    std::size_t bins() const { return n_ / 2 + 1; }

    /// One-sided spectrum: out[k] = sum_t x[t] exp(-2 pi i k t / n), k = 0..n/2.
    void forward(std::span<const double> x, std::span<Complex> out) {
        require(x.size() == n_, "FFT input length mismatch");
        require(out.size() == bins(), "FFT output length mismatch");
        for (std::size_t i = 0; i < n_; ++i) work_[bitrev_[i]] = Complex(x[i], 0.0);
        for (std::size_t len = 2; len <= n_; len <<= 1) {
            const std::size_t half = len / 2, step = n_ / len;
            for (std::size_t base = 0; base < n_; base += len) {
                for (std::size_t j = 0; j < half; ++j) {
                    const Complex t = twiddle_[j * step] * work_[base + j + half];
                    work_[base + j + half] = work_[base + j] - t;
                    work_[base + j] += t;
                }
            }
        }
        for (std::size_t k = 0; k < bins(); ++k) out[k] = work_[k];
    }

private:
    std::size_t n_;
    std::vector<Complex> twiddle_;
    std::vector<std::size_t> bitrev_;
    std::vector<Complex> work_;
};

inline std::vector<Complex> fft_real(std::span<const double> signal) {
    if (signal.size() < 2 || !is_power_of_two(signal.size()))
        fail(ErrorCode::InvalidArgument,
             "FFT length must be a power of two >= 2, got " + std::to_string(signal.size()));
    RealFft fft(signal.size());
    std::vector<Complex> out(fft.bins());
    fft.forward(signal, out);
    return out;
}

}  // namespace tinyml::dsp
