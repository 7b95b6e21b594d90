/*
 * Copyright 2026 The tinyml-workbench Authors
 *
 * SPDX-License-Identifier: Apache-2.0
 */

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "tinyml/core/error.hpp"
#include "tinyml/core/random.hpp"
#include "tinyml/dataset/recording.hpp"
#include "tinyml/dsp/filter.hpp"

// Reproducible stand-ins for hand-collected data. Every generator is a pure
// function of (class, seed, count).
namespace tinyml::dataset {

inline constexpr double kImuRate = 100.0;
inline constexpr std::size_t kGestureSamples = 200;  // 2 s
inline constexpr double kAudioRate = 16000.0;
inline constexpr std::size_t kKeywordSamples = 16000;  // 1 s

inline const std::vector<std::string>& gesture_classes() {
    static const std::vector<std::string> v{"updown", "leftright", "circle", "idle"};
    return v;
}

inline const std::vector<std::string>& keyword_classes() {
    static const std::vector<std::string> v{"red", "green", "blue", "noise"};
    return v;
}

namespace synth_detail {

// 4 whole cycles in a 128-sample FFT span at 100 Hz, so no truncation leakage.
inline constexpr double kMotionHz = 3.125;
inline constexpr double kMotionAmplitude = 1.0;  // g
inline constexpr double kImuNoiseSigma = 0.05;   // g

struct Formant {
    std::array<double, 3> hz;
};

// Three fixed bands per color; no center frequency is shared between classes.
inline const Formant& formant_for(const std::string& cls) {
    static const Formant red{{350.0, 1000.0, 1900.0}};
    static const Formant green{{550.0, 1400.0, 2600.0}};
    static const Formant blue{{800.0, 2200.0, 3300.0}};
    if (cls == "red") return red;
    if (cls == "green") return green;
    return blue;
}

inline constexpr std::array<double, 3> kBandGain{1.0, 0.6, 0.35};
inline constexpr double kUtteranceSeconds = 0.5;
// Onset may push up to 20% of the utterance past either edge of the clip, so
// training sees the partial views a sliding window produces.
inline constexpr double kOnsetMinSeconds = -0.1;
inline constexpr double kOnsetMaxSeconds = 0.6;
inline constexpr double kUtterancePeak = 0.3;
inline constexpr double kNoiseCutoffHz = 6000.0;
inline constexpr double kSnrDb = 20.0;

inline double uniform(Rng& rng, double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); }

/// White Gaussian noise through a 2nd-order Butterworth low-pass, rescaled to
/// the requested RMS.
inline std::vector<double> bandlimited_noise(Rng& rng, std::size_t n, double rms) {
    std::normal_distribution<double> g(0.0, 1.0);
    std::vector<double> v(n);
    for (auto& x : v) x = g(rng);
    dsp::ButterworthLowpass lp(kNoiseCutoffHz, 2, kAudioRate);
    lp.apply(v, v);
    double ss = 0.0;
    for (double x : v) ss += x * x;
    const double scale = rms / std::sqrt(ss / static_cast<double>(n));
    for (auto& x : v) x *= scale;
    return v;
}

// RMS of the 20 dB background under a nominal utterance; the noise class is
// drawn around the same level so silence between words looks like "noise".
inline double nominal_background_rms() {
    double band_power = 0.0;
    for (double a : kBandGain) band_power += a * a / 2.0;
    const double hann_rms = std::sqrt(3.0 / 8.0);
    return kUtterancePeak * std::sqrt(band_power) * hann_rms / std::pow(10.0, kSnrDb / 20.0);
}

}  // namespace synth_detail

inline std::vector<Recording> synth_gesture(const std::string& cls, std::uint64_t seed, std::size_t count) {
    using namespace synth_detail;
    const auto& classes = gesture_classes();
    if (std::find(classes.begin(), classes.end(), cls) == classes.end())
        fail(ErrorCode::InvalidArgument, "unknown gesture class '" + cls + "'");
    require(count >= 1, "count must be >= 1");

    std::vector<Recording> out;
    out.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        auto rng = make_rng(seed, "gesture:" + cls, i);
        const double phase = uniform(rng, 0.0, 2.0 * std::numbers::pi);
        const double amp = kMotionAmplitude * uniform(rng, 0.8, 1.2);
        std::normal_distribution<double> noise(0.0, kImuNoiseSigma);

        Recording rec{cls, kImuRate, std::vector<std::vector<double>>(3, std::vector<double>(kGestureSamples)),
                      cls + "_" + std::to_string(seed) + "_" + std::to_string(i)};
        for (std::size_t t = 0; t < kGestureSamples; ++t) {
            const double arg = 2.0 * std::numbers::pi * kMotionHz * static_cast<double>(t) / kImuRate + phase;
            std::array<double, 3> xyz{0.0, 0.0, 0.0};
            if (cls == "updown") {
                xyz[2] = amp * std::sin(arg);
            } else if (cls == "leftright") {
                xyz[0] = amp * std::sin(arg);
            } else if (cls == "circle") {
                xyz[0] = amp * std::cos(arg);
                xyz[1] = amp * std::sin(arg);
            }
            for (std::size_t c = 0; c < 3; ++c) rec.samples[c][t] = xyz[c] + noise(rng);
        }
        out.push_back(std::move(rec));
    }
    return out;
}

inline std::vector<Recording> synth_keyword(const std::string& cls, std::uint64_t seed, std::size_t count) {
    using namespace synth_detail;
    const auto& classes = keyword_classes();
    if (std::find(classes.begin(), classes.end(), cls) == classes.end())
        fail(ErrorCode::InvalidArgument, "unknown keyword class '" + cls + "'");
    require(count >= 1, "count must be >= 1");

    const double background = nominal_background_rms();
    std::vector<Recording> out;
    out.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        auto rng = make_rng(seed, "keyword:" + cls, i);
        Recording rec{cls, kAudioRate, {}, cls + "_" + std::to_string(seed) + "_" + std::to_string(i)};
        if (cls == "noise") {
            rec.samples.push_back(bandlimited_noise(rng, kKeywordSamples, background * uniform(rng, 0.6, 1.6)));
            out.push_back(std::move(rec));
            continue;
        }

        const auto& f = formant_for(cls);
        const double amp = kUtterancePeak * uniform(rng, 0.8, 1.2);
        const double onset = uniform(rng, kOnsetMinSeconds, kOnsetMaxSeconds);
        const auto start = static_cast<std::ptrdiff_t>(std::floor(onset * kAudioRate));
        const auto len = static_cast<std::ptrdiff_t>(kUtteranceSeconds * kAudioRate);
        std::array<double, 3> phase{};
        for (auto& p : phase) p = uniform(rng, 0.0, 2.0 * std::numbers::pi);

        std::vector<double> voice(kKeywordSamples, 0.0);
        double active_power = 0.0;
        for (std::ptrdiff_t t = 0; t < len; ++t) {
            const double env = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(t) /
                                                   static_cast<double>(len - 1));
            const double time = static_cast<double>(start + t) / kAudioRate;
            double v = 0.0;
            for (std::size_t b = 0; b < 3; ++b)
                v += kBandGain[b] * std::sin(2.0 * std::numbers::pi * f.hz[b] * time + phase[b]);
            v *= amp * env;
            active_power += v * v;
            if (start + t >= 0 && start + t < static_cast<std::ptrdiff_t>(kKeywordSamples))
                voice[static_cast<std::size_t>(start + t)] = v;
        }
        const double noise_rms = std::sqrt(active_power / static_cast<double>(len)) / std::pow(10.0, kSnrDb / 20.0);
        auto noise = bandlimited_noise(rng, kKeywordSamples, noise_rms);
        for (std::size_t t = 0; t < kKeywordSamples; ++t) voice[t] += noise[t];
        rec.samples.push_back(std::move(voice));
        out.push_back(std::move(rec));
    }
    return out;
}

/// Continuous background at the nominal noise-class level, for streaming
/// tests and demos. `samples` at 16 kHz.
inline std::vector<double> synth_background(std::uint64_t seed, std::size_t samples) {
    auto rng = make_rng(seed, "background");
    return synth_detail::bandlimited_noise(rng, samples, synth_detail::nominal_background_rms());
}

/// A plain sine, used for format checks.
inline Recording synth_tone(double hz, double seconds, double sample_rate, double amplitude) {
    const auto n = static_cast<std::size_t>(seconds * sample_rate);
    Recording rec{"tone", sample_rate, std::vector<std::vector<double>>(1, std::vector<double>(n)), "tone"};
    for (std::size_t t = 0; t < n; ++t)
        rec.samples[0][t] = amplitude * std::sin(2.0 * std::numbers::pi * hz * static_cast<double>(t) / sample_rate);
    return rec;
}

}  // namespace tinyml::dataset
