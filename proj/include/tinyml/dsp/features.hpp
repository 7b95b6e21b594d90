/*
 * Copyright 2026 The tinyml-workbench Authors
 *
 * SPDX-License-Identifier: Apache-2.0
 */

#pragma once

#include <cmath>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "tinyml/core/error.hpp"
#include "tinyml/core/matrix.hpp"
#include "tinyml/dataset/dataset.hpp"
#include "tinyml/dsp/mfcc.hpp"
#include "tinyml/dsp/spectral.hpp"

namespace tinyml::dsp {

/// Everything needed to turn a raw stream into feature vectors: the framing
/// (rate, window, hop) plus the block for the dataset kind. Only the block
/// matching `kind` is used.
struct DspConfig {
    dataset::Kind kind = dataset::Kind::Gesture;
    double sample_rate = 100.0;
    std::size_t window_len = 200;
    std::size_t stride = 50;
    SpectralConfig spectral;
    MfccConfig mfcc;

    static DspConfig gesture_defaults() { return {}; }

    static DspConfig keyword_defaults() {
        DspConfig c;
        c.kind = dataset::Kind::Keyword;
        c.sample_rate = 16000.0;
        c.window_len = 16000;
        c.stride = 4000;
        return c;
    }

    static DspConfig defaults_for(dataset::Kind k) {
        return k == dataset::Kind::Gesture ? gesture_defaults() : keyword_defaults();
    }

    std::size_t channels() const { return kind == dataset::Kind::Gesture ? kImuChannels : 1; }

    std::size_t feature_count() const {
        return kind == dataset::Kind::Gesture ? spectral_feature_count(spectral)
                                              : mfcc.frame_count(window_len) * mfcc.coefficients;
    }

    void validate() const {
        require(sample_rate > 0.0, "sample_rate must be positive");
        require(window_len >= 1 && stride >= 1, "window_len and stride must be >= 1");
        if (kind == dataset::Kind::Gesture) {
            spectral.validate(sample_rate);
        } else {
            mfcc.validate();
            require(mfcc.frame_count(window_len) >= 1, "window shorter than one MFCC frame");
        }
    }

    /// Identifies the feature layout; two configs with the same id produce
    /// interchangeable feature vectors.
    std::string layout_id() const {
        std::ostringstream os;
        os.precision(9);
        if (kind == dataset::Kind::Gesture) {
            os << "spectral/v1 rate=" << sample_rate << " win=" << window_len << " scale=" << spectral.scale
               << " cutoff=" << spectral.filter_cutoff << " order=" << spectral.filter_order
               << " fft=" << spectral.fft_len << " bins=" << spectral.power_bins << " fit=truncate-or-pad";
        } else {
            os << "mfcc/v1 rate=" << sample_rate << " win=" << window_len << " frame=" << mfcc.frame_len
               << " hop=" << mfcc.frame_stride << " mel=" << mfcc.mel_filters << " coef=" << mfcc.coefficients
               << " fft=" << mfcc.fft_len;
        }
        return os.str();
    }

    friend bool operator==(const DspConfig&, const DspConfig&) = default;
};

/// Kind-dispatching wrapper around the two extractors.
class FeatureExtractor {
public:
    explicit FeatureExtractor(const DspConfig& cfg)
        : cfg_((cfg.validate(), cfg)), impl_(make(cfg)) {}

    const DspConfig& config() const { return cfg_; }
    std::size_t feature_count() const { return cfg_.feature_count(); }

    /// window is channel-major, channels() * window_len values.
    void compute(std::span<const double> window, std::span<double> out) {
        std::visit([&](auto& ex) { ex.compute(window, out); }, impl_);
    }

private:
    using Impl = std::variant<SpectralExtractor, MfccExtractor>;

    static Impl make(const DspConfig& c) {
        if (c.kind == dataset::Kind::Gesture) return Impl(std::in_place_type<SpectralExtractor>, c.spectral, c.sample_rate, c.window_len);
        return Impl(std::in_place_type<MfccExtractor>, c.mfcc, c.sample_rate, c.window_len);
    }

    DspConfig cfg_;
    Impl impl_;
};

/// Feature matrix for a dataset. Row i belongs to ds.windows[i]. mean/stddev
/// are per-column population statistics of this matrix; zero-variance
/// columns report stddev 1 so they normalize to 0 rather than dividing by 0.
struct FeatureSet {
    std::string layout_id;
    std::vector<std::string> labels;
    Matrix<double> features;
    std::vector<std::size_t> targets;
    std::vector<double> mean;
    std::vector<double> stddev;
    std::string error;

    std::size_t size() const { return features.rows(); }
    bool ok() const { return error.empty(); }
};

inline void column_stats(const Matrix<double>& m, std::vector<double>& mean, std::vector<double>& stddev) {
    mean.assign(m.cols(), 0.0);
    stddev.assign(m.cols(), 0.0);
    if (m.empty()) return;
    const auto n = static_cast<double>(m.rows());
    for (std::size_t r = 0; r < m.rows(); ++r)
        for (std::size_t c = 0; c < m.cols(); ++c) mean[c] += m(r, c);
    for (auto& v : mean) v /= n;
    for (std::size_t r = 0; r < m.rows(); ++r)
        for (std::size_t c = 0; c < m.cols(); ++c) stddev[c] += (m(r, c) - mean[c]) * (m(r, c) - mean[c]);
    for (auto& v : stddev) {
        v = std::sqrt(v / n);
        if (!(v > 1e-12)) v = 1.0;
    }
}

inline FeatureSet featurize(const dataset::Dataset& ds, const DspConfig& cfg) {
    FeatureSet fs{cfg.layout_id(), ds.labels, {}, {}, {}, {}, {}};
    if (ds.kind != cfg.kind)
        fail(ErrorCode::KindMismatch, "kind mismatch: " + dataset::to_string(ds.kind) + " dataset with " +
                                          dataset::to_string(cfg.kind) + " DSP config");
    if (ds.windows.empty()) {
        fs.error = "no windows";
        return fs;
    }
    FeatureExtractor ex(cfg);
    fs.features = Matrix<double>(ds.windows.size(), ex.feature_count());
    fs.targets.reserve(ds.windows.size());
    for (std::size_t i = 0; i < ds.windows.size(); ++i) {
        const auto& w = ds.windows[i];
        if (w.channels != cfg.channels() || w.window_len != cfg.window_len)
            fail(ErrorCode::InvalidArgument, "window " + w.origin.source_id + "@" + std::to_string(w.origin.start) +
                                                 " does not match the DSP framing");
        ex.compute(w.data, fs.features.row(i));
        fs.targets.push_back(ds.label_index(w.label));
    }
    column_stats(fs.features, fs.mean, fs.stddev);
    return fs;
}

}  // namespace tinyml::dsp
