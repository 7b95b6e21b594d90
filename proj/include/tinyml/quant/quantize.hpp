/*
 * Copyright 2026 The tinyml-workbench Authors
 *
 * SPDX-License-Identifier: Apache-2.0
 */

#pragma once

#include <algorithm>
#include <cassert>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "tinyml/core/error.hpp"
#include "tinyml/core/matrix.hpp"
#include "tinyml/model/evaluation.hpp"
#include "tinyml/model/network.hpp"

namespace tinyml::quant {

inline constexpr int kQMin = -128;
inline constexpr int kQMax = 127;

/// Per-tensor affine mapping: real = scale * (q - zero_point).
struct QuantParams {
    float scale = 1.0f;
    std::int8_t zero_point = 0;

    std::int8_t quantize(double x) const {
        const double q = std::round(x / static_cast<double>(scale)) + zero_point;
        return static_cast<std::int8_t>(std::clamp(q, static_cast<double>(kQMin), static_cast<double>(kQMax)));
    }

    double dequantize(std::int8_t q) const { return static_cast<double>(scale) * (q - zero_point); }

    friend bool operator==(const QuantParams&, const QuantParams&) = default;
};

struct ActivationRange {
    double lo = 0.0;
    double hi = 0.0;
};

inline constexpr double kDegenerateHalfWidth = 1e-6;

inline ActivationRange widen_degenerate(ActivationRange r) {
    if (r.hi - r.lo < 2.0 * kDegenerateHalfWidth) {
        const double c = 0.5 * (r.lo + r.hi);
        r = {c - kDegenerateHalfWidth, c + kDegenerateHalfWidth};
    }
    return r;
}

/// Affine int8 params covering [lo, hi] extended to include 0, so real zero
/// is exactly representable.
inline QuantParams affine_params(ActivationRange r) {
    r = widen_degenerate(r);
    const double lo = std::min(r.lo, 0.0), hi = std::max(r.hi, 0.0);
    QuantParams p;
    p.scale = static_cast<float>((hi - lo) / 255.0);
    const double zp = std::round(kQMin - lo / static_cast<double>(p.scale));
    p.zero_point = static_cast<std::int8_t>(std::clamp(zp, static_cast<double>(kQMin), static_cast<double>(kQMax)));
    return p;
}

/// Symmetric per-tensor params: zero_point 0, scale = max|w| / 127. An
/// all-zero tensor gets scale 1.
inline QuantParams symmetric_params(std::span<const double> w) {
    double m = 0.0;
    for (double v : w) m = std::max(m, std::abs(v));
    return {m > 0.0 ? static_cast<float>(m / kQMax) : 1.0f, 0};
}

inline std::vector<std::int8_t> quantize_tensor(std::span<const double> w, const QuantParams& p) {
    std::vector<std::int8_t> q(w.size());
    for (std::size_t i = 0; i < w.size(); ++i) q[i] = p.quantize(w[i]);
    return q;
}

/// Observed pre-activation ranges per layer boundary over a calibration set.
/// Boundary 0 is the normalized network input; boundary l+1 is the output of
/// dense layer l before its activation. Softmax is not a boundary.
inline std::vector<ActivationRange> calibrate(const model::ModelParams& p, const Matrix<double>& calib) {
    if (calib.empty()) fail(ErrorCode::InvalidArgument, "calibration set is empty");
    if (calib.rows() < 10)
        fail(ErrorCode::InvalidArgument,
             "calibration needs at least 10 rows, got " + std::to_string(calib.rows()));
    const std::size_t L = p.layers.size();
    std::vector<ActivationRange> ranges(L + 1, {std::numeric_limits<double>::infinity(),
                                                -std::numeric_limits<double>::infinity()});
    auto observe = [](ActivationRange& r, double v) {
        r.lo = std::min(r.lo, v);
        r.hi = std::max(r.hi, v);
    };
    for (std::size_t row = 0; row < calib.rows(); ++row) {
        std::vector<double> a = model::normalize(p, calib.row(row));
        for (double v : a) observe(ranges[0], v);
        for (std::size_t l = 0; l < L; ++l) {
            const auto& layer = p.layers[l];
            std::vector<double> next(layer.out);
            for (std::size_t o = 0; o < layer.out; ++o) {
                double acc = layer.bias[o];
                for (std::size_t i = 0; i < layer.in; ++i) acc += layer.weights[o * layer.in + i] * a[i];
                observe(ranges[l + 1], acc);
                next[o] = std::max(acc, 0.0);
            }
            a = std::move(next);
        }
    }
    for (auto& r : ranges) r = widen_degenerate(r);
    return ranges;
}

struct QuantizedLayer {
    std::size_t in = 0;
    std::size_t out = 0;
    QuantParams weight;
    std::vector<std::int8_t> weights;  // out x in, row-major
    std::vector<std::int32_t> bias;    // at scale input_scale * weight_scale

    friend bool operator==(const QuantizedLayer&, const QuantizedLayer&) = default;
};

struct QuantizedModel {
    model::Topology topology;
    std::vector<QuantizedLayer> layers;
    std::vector<QuantParams> activations;  // one per boundary, layers.size() + 1
    std::vector<float> norm_mean;
    std::vector<float> norm_std;
    std::vector<std::string> labels;

    friend bool operator==(const QuantizedModel&, const QuantizedModel&) = default;
};

// Worst-case |sum w_q * (x_q - zp)| for one output: 127 * 255 per term.
inline constexpr std::int64_t kMaxProductMagnitude = std::int64_t{kQMax} * 255;

inline std::int64_t accumulator_headroom(std::size_t fan_in) {
    return std::int64_t{std::numeric_limits<std::int32_t>::max()} - static_cast<std::int64_t>(fan_in) * kMaxProductMagnitude;
}

inline QuantizedModel quantize(const model::ModelParams& p, const std::vector<ActivationRange>& ranges) {
    p.validate();
    const std::size_t L = p.layers.size();
    require(ranges.size() == L + 1, "need one activation range per layer boundary");
    QuantizedModel qm{p.topology, {}, {}, {}, {}, p.labels};
    qm.norm_mean.assign(p.norm_mean.begin(), p.norm_mean.end());
    qm.norm_std.assign(p.norm_std.begin(), p.norm_std.end());

    for (std::size_t b = 0; b <= L; ++b) {
        ActivationRange r = ranges[b];
        // Hidden outputs pass through relu, so only [0, hi] is reachable.
        if (b > 0 && b < L) r = {0.0, std::max(r.hi, 0.0)};
        qm.activations.push_back(affine_params(r));
    }
    for (std::size_t l = 0; l < L; ++l) {
        const auto& src = p.layers[l];
        const std::int64_t headroom = accumulator_headroom(src.in);
        require(headroom > 0, "layer fan-in too large for a 32-bit accumulator");
        QuantizedLayer q{src.in, src.out, symmetric_params(src.weights), {}, {}};
        q.weights = quantize_tensor(src.weights, q.weight);
        const double bias_scale = static_cast<double>(qm.activations[l].scale) * static_cast<double>(q.weight.scale);
        for (double b : src.bias) {
            const double v = std::round(b / bias_scale);
            q.bias.push_back(static_cast<std::int32_t>(
                std::clamp(v, -static_cast<double>(headroom), static_cast<double>(headroom))));
        }
        qm.layers.push_back(std::move(q));
    }
    return qm;
}

/// Real multiplier as a Q31 mantissa and power-of-two exponent:
/// M ~= mantissa * 2^(exponent - 31).
struct FixedMultiplier {
    std::int32_t mantissa = 0;
    int exponent = 0;

    static FixedMultiplier from(double m) {
        if (m <= 0.0) return {};
        int exp = 0;
        const double frac = std::frexp(m, &exp);
        auto q = static_cast<std::int64_t>(std::llround(frac * static_cast<double>(std::int64_t{1} << 31)));
        if (q == (std::int64_t{1} << 31)) {
            q /= 2;
            ++exp;
        }
        return {static_cast<std::int32_t>(q), exp};
    }

    /// round(x * M), ties away from zero, saturated to int32.
    std::int32_t apply(std::int32_t x) const {
        const std::int64_t prod = std::int64_t{x} * mantissa;
        const int shift = 31 - exponent;
        std::int64_t r;
        if (shift <= 0) {
            const long double v = static_cast<long double>(prod) * std::ldexp(1.0L, -shift);
            r = static_cast<std::int64_t>(std::clamp<long double>(v, std::numeric_limits<std::int32_t>::min(),
                                                                  std::numeric_limits<std::int32_t>::max()));
        } else if (shift >= 63) {
            r = 0;
        } else {
            const std::int64_t half = std::int64_t{1} << (shift - 1);
            const std::int64_t mag = prod < 0 ? -prod : prod;
            r = (mag + half) >> shift;
            if (prod < 0) r = -r;
        }
        return static_cast<std::int32_t>(
            std::clamp<std::int64_t>(r, std::numeric_limits<std::int32_t>::min(), std::numeric_limits<std::int32_t>::max()));
    }
};

/// Integer inference engine over a QuantizedModel. Owns fixed scratch sized
/// at construction; run() does not allocate.
class QuantizedRunner {
public:
    explicit QuantizedRunner(const QuantizedModel& qm) : qm_(&qm) {
        std::size_t widest = qm.topology.input_dim;
        for (const auto& l : qm.layers) {
            widest = std::max(widest, l.out);
            const double m = static_cast<double>(qm.activations[multipliers_.size()].scale) *
                             static_cast<double>(l.weight.scale);
            const std::size_t next = multipliers_.size() + 1;
            multipliers_.push_back(FixedMultiplier::from(m / static_cast<double>(qm.activations[next].scale)));
            assert(static_cast<std::int64_t>(l.in) * kMaxProductMagnitude <
                   std::int64_t{std::numeric_limits<std::int32_t>::max()});
        }
        act_a_.resize(widest);
        act_b_.resize(widest);
        acc_.resize(widest);
    }

    std::size_t scratch_bytes() const { return act_a_.size() * 2 + acc_.size() * sizeof(std::int32_t); }

    /// features: raw (un-normalized) vector; probs: output_dim entries.
    void run(std::span<const double> features, std::span<double> probs) {
        const auto& qm = *qm_;
        if (features.size() != qm.topology.input_dim)
            fail(ErrorCode::InvalidArgument, "feature length " + std::to_string(features.size()) +
                                                 " does not match input_dim " + std::to_string(qm.topology.input_dim));
        require(probs.size() == qm.topology.output_dim, "probability buffer size mismatch");

        const QuantParams& in_q = qm.activations[0];
        for (std::size_t i = 0; i < features.size(); ++i) {
            const float z = (static_cast<float>(features[i]) - qm.norm_mean[i]) / qm.norm_std[i];
            act_a_[i] = in_q.quantize(static_cast<double>(z));
        }

        std::int8_t* cur = act_a_.data();
        std::int8_t* nxt = act_b_.data();
        const std::size_t L = qm.layers.size();
        for (std::size_t l = 0; l < L; ++l) {
            const auto& layer = qm.layers[l];
            const std::int32_t in_zp = qm.activations[l].zero_point;
            for (std::size_t o = 0; o < layer.out; ++o) {
                std::int32_t acc = layer.bias[o];
                const std::int8_t* w = layer.weights.data() + o * layer.in;
                for (std::size_t i = 0; i < layer.in; ++i) acc += std::int32_t{w[i]} * (std::int32_t{cur[i]} - in_zp);
                acc_[o] = acc;
            }
            if (l + 1 == L) {
                const double s = static_cast<double>(qm.activations[l].scale) * static_cast<double>(layer.weight.scale);
                for (std::size_t o = 0; o < layer.out; ++o) probs[o] = static_cast<double>(acc_[o]) * s;
                break;
            }
            const QuantParams& out_q = qm.activations[l + 1];
            for (std::size_t o = 0; o < layer.out; ++o) {
                std::int32_t q = multipliers_[l].apply(acc_[o]) + out_q.zero_point;
                q = std::clamp<std::int32_t>(q, out_q.zero_point, kQMax);  // relu folded into the clamp
                nxt[o] = static_cast<std::int8_t>(q);
            }
            std::swap(cur, nxt);
        }
        model::softmax_inplace(probs);
    }

private:
    const QuantizedModel* qm_;
    std::vector<FixedMultiplier> multipliers_;
    std::vector<std::int8_t> act_a_;
    std::vector<std::int8_t> act_b_;
    std::vector<std::int32_t> acc_;
};

inline std::vector<double> q_forward(const QuantizedModel& qm, std::span<const double> features) {
    QuantizedRunner runner(qm);
    std::vector<double> probs(qm.topology.output_dim);
    runner.run(features, probs);
    return probs;
}

inline model::EvalReport evaluate(const QuantizedModel& qm, const dsp::FeatureSet& test, double min_confidence) {
    QuantizedRunner runner(qm);
    std::vector<double> probs(qm.topology.output_dim);
    return model::evaluate_with(
        [&](std::span<const double> x) {
            runner.run(x, probs);
            return probs;
        },
        test, min_confidence);
}

}  // namespace tinyml::quant
