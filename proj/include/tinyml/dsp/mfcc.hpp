/*
 * Copyright 2026 The tinyml-workbench Authors
 *
 * SPDX-License-Identifier: Apache-2.0
 */

#pragma once

#include <cmath>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "tinyml/core/error.hpp"
#include "tinyml/dataset/dataset.hpp"
#include "tinyml/dsp/fft.hpp"

namespace tinyml::dsp {

struct MfccConfig {
    std::size_t frame_len = 512;  // 32 ms at 16 kHz
    std::size_t frame_stride = 256;
    std::size_t mel_filters = 26;
    std::size_t coefficients = 13;
    std::size_t fft_len = 512;

    void validate() const {
        require(fft_len >= 2 && is_power_of_two(fft_len), "mfcc fft_len must be a power of two");
        require(frame_len >= 2 && frame_len <= fft_len, "frame_len must lie in [2, fft_len]");
        require(frame_stride >= 1, "frame_stride must be >= 1");
        require(mel_filters >= 1, "mel_filters must be >= 1");
        require(coefficients >= 1 && coefficients <= mel_filters, "coefficients must lie in [1, mel_filters]");
    }

    std::size_t frame_count(std::size_t window_len) const {
        return window_len < frame_len ? 0 : 1 + (window_len - frame_len) / frame_stride;
    }

    friend bool operator==(const MfccConfig&, const MfccConfig&) = default;
};

inline double hz_to_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }
inline double mel_to_hz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

/// Frame-major MFCCs: Hamming window, power spectrum, triangular mel
/// filterbank over [0, sample_rate/2], natural log, orthonormal DCT-II.
class MfccExtractor {
public:
    MfccExtractor(const MfccConfig& cfg, double sample_rate, std::size_t window_len)
        : cfg_((cfg.validate(), cfg)),
          window_len_(window_len),
          frames_(cfg.frame_count(window_len)),
          fft_(cfg.fft_len),
          hamming_(cfg.frame_len),
          frame_(cfg.fft_len, 0.0),
          spectrum_(fft_.bins()),
          power_(fft_.bins()),
          mel_energy_(cfg.mel_filters),
          filterbank_(cfg.mel_filters * fft_.bins(), 0.0),
          dct_(cfg.coefficients * cfg.mel_filters) {
        require(sample_rate > 0.0, "sample_rate must be positive");
        if (frames_ == 0)
            fail(ErrorCode::InvalidArgument, "window of " + std::to_string(window_len) +
                                                 " samples is shorter than one frame (" +
                                                 std::to_string(cfg.frame_len) + ")");
        const double two_pi = 2.0 * std::numbers::pi;
        for (std::size_t i = 0; i < cfg.frame_len; ++i)
            hamming_[i] = 0.54 - 0.46 * std::cos(two_pi * static_cast<double>(i) / static_cast<double>(cfg.frame_len - 1));

        const std::size_t nb = fft_.bins();
        const double mel_hi = hz_to_mel(sample_rate / 2.0);
        std::vector<double> centers(cfg.mel_filters + 2);
        for (std::size_t m = 0; m < centers.size(); ++m)
            centers[m] = mel_to_hz(mel_hi * static_cast<double>(m) / static_cast<double>(cfg.mel_filters + 1));
        for (std::size_t m = 0; m < cfg.mel_filters; ++m) {
            const double lo = centers[m], mid = centers[m + 1], hi = centers[m + 2];
            for (std::size_t k = 0; k < nb; ++k) {
                const double f = static_cast<double>(k) * sample_rate / static_cast<double>(cfg.fft_len);
                double w = 0.0;
                if (f > lo && f <= mid) w = (f - lo) / (mid - lo);
                else if (f > mid && f < hi) w = (hi - f) / (hi - mid);
                filterbank_[m * nb + k] = w;
            }
        }

        const auto nf = static_cast<double>(cfg.mel_filters);
        for (std::size_t c = 0; c < cfg.coefficients; ++c) {
            const double norm = c == 0 ? std::sqrt(1.0 / nf) : std::sqrt(2.0 / nf);
            for (std::size_t m = 0; m < cfg.mel_filters; ++m)
                dct_[c * cfg.mel_filters + m] =
                    norm * std::cos(std::numbers::pi * static_cast<double>(c) * (static_cast<double>(m) + 0.5) / nf);
        }
    }

    std::size_t frame_count() const { return frames_; }
    std::size_t feature_count() const { return frames_ * cfg_.coefficients; }

    void compute(std::span<const double> window, std::span<double> out) {
        require(window.size() == window_len_, "mfcc needs a mono window of the configured length");
        require(out.size() == feature_count(), "feature buffer size mismatch");
        const std::size_t nb = fft_.bins();
        for (std::size_t f = 0; f < frames_; ++f) {
            const auto start = f * cfg_.frame_stride;
            for (std::size_t i = 0; i < cfg_.frame_len; ++i) frame_[i] = window[start + i] * hamming_[i];
            fft_.forward(frame_, spectrum_);
            for (std::size_t k = 0; k < nb; ++k) power_[k] = std::norm(spectrum_[k]) / static_cast<double>(cfg_.fft_len);
            for (std::size_t m = 0; m < cfg_.mel_filters; ++m) {
                double e = 0.0;
                for (std::size_t k = 0; k < nb; ++k) e += filterbank_[m * nb + k] * power_[k];
                mel_energy_[m] = std::log(e + 1e-10);
            }
            for (std::size_t c = 0; c < cfg_.coefficients; ++c) {
                double acc = 0.0;
                for (std::size_t m = 0; m < cfg_.mel_filters; ++m) acc += dct_[c * cfg_.mel_filters + m] * mel_energy_[m];
                out[f * cfg_.coefficients + c] = acc;
            }
        }
    }

private:
    MfccConfig cfg_;
    std::size_t window_len_;
    std::size_t frames_;
    RealFft fft_;
    std::vector<double> hamming_;
    std::vector<double> frame_;
    std::vector<Complex> spectrum_;
    std::vector<double> power_;
    std::vector<double> mel_energy_;
    std::vector<double> filterbank_;  // mel_filters x bins
    std::vector<double> dct_;         // coefficients x mel_filters
};

inline std::vector<double> mfcc(const dataset::LabeledWindow& win, const MfccConfig& cfg, double sample_rate) {
    if (win.channels != 1)
        fail(ErrorCode::InvalidArgument, "mfcc needs a mono window, got " + std::to_string(win.channels) + " channels");
    MfccExtractor ex(cfg, sample_rate, win.window_len);
    std::vector<double> out(ex.feature_count());
    ex.compute(win.data, out);
    return out;
}

}  // namespace tinyml::dsp
