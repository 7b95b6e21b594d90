/*
 * Copyright 2026 The tinyml-workbench Authors
 *
 * SPDX-License-Identifier: Apache-2.0
 */

#pragma once

#include <cmath>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "tinyml/core/error.hpp"
#include "tinyml/dataset/dataset.hpp"
#include "tinyml/dsp/fft.hpp"
#include "tinyml/dsp/filter.hpp"

namespace tinyml::dsp {

inline constexpr double kLogFloor = 1e-10;

struct SpectralConfig {
    double scale = 1.0;
    double filter_cutoff = 8.0;  // Hz
    unsigned filter_order = 2;
    std::size_t fft_len = 128;
    std::size_t power_bins = 16;

    void validate(double sample_rate) const {
        require(fft_len >= 2 && is_power_of_two(fft_len), "spectral fft_len must be a power of two");
        require(power_bins >= 1 && power_bins <= fft_len / 2, "power_bins must lie in [1, fft_len/2]");
        require(filter_order >= 1, "filter_order must be >= 1");
        require(filter_cutoff > 0.0 && filter_cutoff < sample_rate / 2.0,
                "filter_cutoff must lie in (0, sample_rate/2)");
    }

    friend bool operator==(const SpectralConfig&, const SpectralConfig&) = default;
};

inline constexpr std::size_t kImuChannels = 3;

inline std::size_t spectral_feature_count(const SpectralConfig& cfg) { return kImuChannels * (1 + cfg.power_bins); }

/// Per-axis spectral analysis: scale, causal low-pass, mean removal, then the
/// RMS and log10 band powers of the first fft_len samples (zero-padded when
/// the window is shorter). The DC bin is skipped; bins 1..fft_len/2 are
/// grouped into power_bins contiguous bands.
class SpectralExtractor {
public:
    SpectralExtractor(const SpectralConfig& cfg, double sample_rate, std::size_t window_len)
        : cfg_((cfg.validate(sample_rate), cfg)),
          window_len_(window_len),
          filter_(cfg.filter_cutoff, cfg.filter_order, sample_rate),
          fft_(cfg.fft_len),
          channel_(window_len),
          frame_(cfg.fft_len),
          spectrum_(fft_.bins()) {
        require(window_len >= 1, "window_len must be >= 1");
        const std::size_t m = cfg.fft_len / 2;
        for (std::size_t b = 0; b <= cfg.power_bins; ++b) edges_.push_back(1 + b * m / cfg.power_bins);
    }

    std::size_t feature_count() const { return spectral_feature_count(cfg_); }

    /// Band b covers one-sided bins [edge(b), edge(b+1)).
    std::size_t band_edge(std::size_t b) const { return edges_[b]; }

    void compute(std::span<const double> window, std::span<double> out) {
        require(window.size() == kImuChannels * window_len_, "spectral features need a 3-channel window");
        require(out.size() == feature_count(), "feature buffer size mismatch");
        const auto n = static_cast<double>(window_len_);
        std::size_t o = 0;
        for (std::size_t c = 0; c < kImuChannels; ++c) {
            auto in = window.subspan(c * window_len_, window_len_);
            filter_.reset();
            double mean = 0.0;
            for (std::size_t t = 0; t < window_len_; ++t) {
                channel_[t] = filter_.step(cfg_.scale * in[t]);
                mean += channel_[t];
            }
            mean /= n;
            double ss = 0.0;
            for (auto& v : channel_) {
                v -= mean;
                ss += v * v;
            }
            out[o++] = std::sqrt(ss / n);

            for (std::size_t t = 0; t < cfg_.fft_len; ++t) frame_[t] = t < window_len_ ? channel_[t] : 0.0;
            fft_.forward(frame_, spectrum_);
            const auto len = static_cast<double>(cfg_.fft_len);
            for (std::size_t b = 0; b < cfg_.power_bins; ++b) {
                double acc = 0.0;
                for (std::size_t k = edges_[b]; k < edges_[b + 1]; ++k) acc += std::norm(spectrum_[k]) / len;
                acc /= static_cast<double>(edges_[b + 1] - edges_[b]);
                out[o++] = std::log10(acc + kLogFloor);
            }
        }
    }

private:
    SpectralConfig cfg_;
    std::size_t window_len_;
    ButterworthLowpass filter_;
    RealFft fft_;
    std::vector<double> channel_;
    std::vector<double> frame_;
    std::vector<Complex> spectrum_;
    std::vector<std::size_t> edges_;
};

inline std::vector<double> spectral_features(const dataset::LabeledWindow& win, const SpectralConfig& cfg,
                                             double sample_rate) {
    if (win.channels != kImuChannels)
        fail(ErrorCode::InvalidArgument,
             "spectral features need a 3-channel window, got " + std::to_string(win.channels));
    SpectralExtractor ex(cfg, sample_rate, win.window_len);
    std::vector<double> out(ex.feature_count());
    ex.compute(win.data, out);
    return out;
}

}  // namespace tinyml::dsp
