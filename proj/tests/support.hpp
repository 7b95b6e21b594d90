/*
 * Copyright 2026 The tinyml-workbench Authors
 *
 * SPDX-License-Identifier: Apache-2.0
 */

#pragma once

#include <atomic>
#include <complex>
#include <filesystem>
#include <map>
#include <memory>
#include <numbers>
#include <string>
#include <vector>

#include <unistd.h>

#include "tinyml/tinyml.hpp"

namespace tinyml::testing {

namespace fs = std::filesystem;

/// Scratch directory removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& tag = "t") {
        static std::atomic<int> counter{0};
        path_ = fs::temp_directory_path() /
                ("tinyml_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
        fs::remove_all(path_);
        fs::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const fs::path& path() const { return path_; }
    fs::path operator/(const std::string& name) const { return path_ / name; }

private:
    fs::path path_;
};

inline std::vector<std::complex<double>> naive_dft(std::span<const double> x) {
    const std::size_t n = x.size();
    std::vector<std::complex<double>> out(n / 2 + 1);
    for (std::size_t k = 0; k <= n / 2; ++k) {
        std::complex<double> acc{0.0, 0.0};
        for (std::size_t t = 0; t < n; ++t) {
            const double a = -2.0 * std::numbers::pi * static_cast<double>(k * t % n) / static_cast<double>(n);
            acc += x[t] * std::complex<double>(std::cos(a), std::sin(a));
        }
        out[k] = acc;
    }
    return out;
}

inline std::vector<dataset::Recording> synth_all(dataset::Kind kind, std::size_t per_class, std::uint64_t seed) {
    std::vector<dataset::Recording> recs;
    const auto& classes = kind == dataset::Kind::Gesture ? dataset::gesture_classes() : dataset::keyword_classes();
    for (const auto& c : classes) {
        auto r = kind == dataset::Kind::Gesture ? dataset::synth_gesture(c, seed, per_class)
                                                : dataset::synth_keyword(c, seed, per_class);
        recs.insert(recs.end(), r.begin(), r.end());
    }
    return recs;
}

/// Trained float and quantized models on the default synthetic corpus,
/// built once per process.
struct Trained {
    pipeline::ProjectConfig config;
    dataset::Dataset train;
    dataset::Dataset test;
    dsp::FeatureSet train_features;
    dsp::FeatureSet test_features;
    model::ModelParams params;
    quant::QuantizedModel qmodel;
};

inline const Trained& trained(dataset::Kind kind) {
    static std::map<dataset::Kind, std::unique_ptr<Trained>> cache;
    auto& slot = cache[kind];
    if (!slot) {
        auto t = std::make_unique<Trained>();
        t->config = pipeline::ProjectConfig::defaults(kind, 42);
        const auto& c = t->config;
        const auto ds = dataset::make_dataset(kind, synth_all(kind, 40, 42), c.dsp.window_len, c.dsp.stride);
        std::tie(t->train, t->test) = dataset::split(ds, c.split);
        t->train_features = dsp::featurize(t->train, c.dsp);
        t->test_features = dsp::featurize(t->test, c.dsp);
        t->params = model::train(t->train_features, c.train, c.hidden).params;
        t->qmodel = quant::quantize(t->params, quant::calibrate(t->params, t->train_features.features));
        slot = std::move(t);
    }
    return *slot;
}

/// Background noise with one keyword recording written over it at `at`.
inline std::vector<double> stream_with_keyword(const std::string& cls, std::uint64_t seed, double seconds,
                                               std::size_t at) {
    auto s = dataset::synth_background(seed, static_cast<std::size_t>(seconds * dataset::kAudioRate));
    const auto word = dataset::synth_keyword(cls, seed, 1)[0].samples[0];
    for (std::size_t i = 0; i < word.size() && at + i < s.size(); ++i) s[at + i] = word[i];
    return s;
}

inline std::vector<runtime::ActionEvent> stream_all(runtime::StreamClassifier& sc, std::span<const double> mono,
                                                    std::size_t chunk) {
    std::vector<runtime::ActionEvent> events;
    for (std::size_t off = 0; off < mono.size(); off += chunk) {
        auto e = sc.push_samples(mono.subspan(off, std::min(chunk, mono.size() - off)));
        events.insert(events.end(), e.begin(), e.end());
    }
    return events;
}

}  // namespace tinyml::testing
