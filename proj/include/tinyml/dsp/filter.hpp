/*
 * Copyright 2026 The tinyml-workbench Authors
 *
 * SPDX-License-Identifier: Apache-2.0
 */

#pragma once

#include <cmath>
#include <numbers>
#include <span>
#include <vector>

#include "tinyml/core/error.hpp"

namespace tinyml::dsp {

// Direct form II transposed second-order section, a0 normalized to 1.
struct Biquad {
    double b0 = 1, b1 = 0, b2 = 0, a1 = 0, a2 = 0;
    double z1 = 0, z2 = 0;

    double step(double x) {
        const double y = b0 * x + z1;
        z1 = b1 * x - a1 * y + z2;
        z2 = b2 * x - a2 * y;
        return y;
    }
};

/// Causal Butterworth low-pass as a cascade of bilinear-transformed sections
/// (prewarped at the cutoff). Odd orders get one first-order section.
class ButterworthLowpass {
public:
    ButterworthLowpass(double cutoff, unsigned order, double sample_rate) {
        require(sample_rate > 0.0, "sample_rate must be positive");
        if (!(cutoff > 0.0 && cutoff < sample_rate / 2.0))
            fail(ErrorCode::InvalidArgument, "lowpass cutoff must lie in (0, sample_rate/2)");
        require(order >= 1, "filter order must be >= 1");
        const double w0 = 2.0 * std::numbers::pi * cutoff / sample_rate;
        const double cw = std::cos(w0);
        for (unsigned k = 0; k < order / 2; ++k) {
            const double q = 1.0 / (2.0 * std::sin(std::numbers::pi * (2.0 * k + 1.0) / (2.0 * order)));
            const double alpha = std::sin(w0) / (2.0 * q);
            const double a0 = 1.0 + alpha;
            Biquad s;
            s.b0 = (1.0 - cw) / 2.0 / a0;
            s.b1 = (1.0 - cw) / a0;
            s.b2 = s.b0;
            s.a1 = -2.0 * cw / a0;
            s.a2 = (1.0 - alpha) / a0;
            sections_.push_back(s);
        }
        if (order % 2 == 1) {
            const double k = std::tan(w0 / 2.0);
            Biquad s;
            s.b0 = s.b1 = k / (1.0 + k);
            s.a1 = (k - 1.0) / (k + 1.0);
            sections_.push_back(s);
        }
    }

    void reset() {
        for (auto& s : sections_) s.z1 = s.z2 = 0.0;
    }

    double step(double x) {
        for (auto& s : sections_) x = s.step(x);
        return x;
    }

    /// Filters from zero initial state; in and out may alias.
    void apply(std::span<const double> in, std::span<double> out) {
        reset();
        for (std::size_t i = 0; i < in.size(); ++i) out[i] = step(in[i]);
    }

private:
    std::vector<Biquad> sections_;
};

inline std::vector<double> lowpass(std::span<const double> signal, double cutoff, unsigned order, double sample_rate) {
    ButterworthLowpass f(cutoff, order, sample_rate);
    std::vector<double> out(signal.size());
    f.apply(signal, out);
    return out;
}

}  // namespace tinyml::dsp
