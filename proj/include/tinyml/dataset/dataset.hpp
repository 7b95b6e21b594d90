/*
 * Copyright 2026 The tinyml-workbench Authors
 *
 * SPDX-License-Identifier: Apache-2.0
 */

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <map>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "tinyml/core/error.hpp"
#include "tinyml/core/random.hpp"
#include "tinyml/dataset/recording.hpp"

namespace tinyml::dataset {

enum class Kind : std::uint8_t { Gesture = 0, Keyword = 1 };

inline std::string to_string(Kind k) { return k == Kind::Gesture ? "gesture" : "keyword"; }

inline Kind parse_kind(std::string_view s) {
    if (s == "gesture") return Kind::Gesture;
    if (s == "keyword") return Kind::Keyword;
    fail(ErrorCode::InvalidArgument, "unknown kind '" + std::string(s) + "' (expected gesture|keyword)");
}

struct WindowOrigin {
    std::string source_id;
    std::size_t start = 0;

    friend bool operator==(const WindowOrigin&, const WindowOrigin&) = default;
    friend auto operator<=>(const WindowOrigin&, const WindowOrigin&) = default;
};

/// Fixed-size slice of a recording. data is channel-major, exactly
/// channels * window_len values.
struct LabeledWindow {
    std::string label;
    std::size_t channels = 0;
    std::size_t window_len = 0;
    std::vector<double> data;
    WindowOrigin origin;

    std::span<const double> channel(std::size_t c) const {
        return std::span<const double>(data).subspan(c * window_len, window_len);
    }
};

struct Dataset {
    Kind kind = Kind::Gesture;
    std::vector<std::string> labels;
    std::vector<LabeledWindow> windows;

    std::size_t label_index(std::string_view label) const {
        auto it = std::find(labels.begin(), labels.end(), label);
        require(it != labels.end(), "label '" + std::string(label) + "' not in label table");
        return static_cast<std::size_t>(it - labels.begin());
    }

    void validate() const {
        require(!labels.empty(), "dataset has no labels");
        auto sorted = labels;
        std::sort(sorted.begin(), sorted.end());
        require(std::adjacent_find(sorted.begin(), sorted.end()) == sorted.end(), "duplicate labels in dataset");
        for (const auto& w : windows) {
            (void)label_index(w.label);
            require(w.data.size() == w.channels * w.window_len, "window data size mismatch");
        }
    }
};

struct SplitSpec {
    double train_fraction = 0.8;
    std::uint64_t seed = 0;
};

/// Cuts a recording into windows at offsets 0, stride, 2*stride, ... and
/// drops the trailing partial window. A recording shorter than one window
/// yields nothing and a warning.
inline std::vector<LabeledWindow> window(const Recording& rec, std::size_t window_len, std::size_t stride) {
    require(stride >= 1, "stride must be >= 1");
    require(window_len >= 1, "window_len must be >= 1");
    std::vector<LabeledWindow> out;
    if (window_len > rec.length()) {
        warn("recording '" + rec.source_id + "' has " + std::to_string(rec.length()) +
             " samples, shorter than window of " + std::to_string(window_len));
        return out;
    }
    for (std::size_t start = 0; start + window_len <= rec.length(); start += stride) {
        LabeledWindow w{rec.label, rec.channels(), window_len, {}, {rec.source_id, start}};
        w.data.reserve(rec.channels() * window_len);
        for (const auto& ch : rec.samples)
            w.data.insert(w.data.end(), ch.begin() + static_cast<std::ptrdiff_t>(start),
                          ch.begin() + static_cast<std::ptrdiff_t>(start + window_len));
        out.push_back(std::move(w));
    }
    return out;
}

/// Builds a dataset from recordings. Labels are ordered by first appearance
/// unless an explicit label table is given.
inline Dataset make_dataset(Kind kind, const std::vector<Recording>& recs, std::size_t window_len,
                            std::size_t stride, std::vector<std::string> labels = {}) {
    Dataset ds{kind, std::move(labels), {}};
    for (const auto& r : recs) {
        r.validate();
        if (std::find(ds.labels.begin(), ds.labels.end(), r.label) == ds.labels.end()) ds.labels.push_back(r.label);
        auto ws = window(r, window_len, stride);
        std::move(ws.begin(), ws.end(), std::back_inserter(ds.windows));
    }
    ds.validate();
    return ds;
}

/// Per-label stratified split: within each label the windows are shuffled
/// under the seed, floor(fraction * n) go to train and the rest to test.
inline std::pair<Dataset, Dataset> split(const Dataset& ds, const SplitSpec& spec) {
    require(spec.train_fraction > 0.0 && spec.train_fraction < 1.0, "train_fraction must lie in (0, 1)");
    std::vector<std::vector<std::size_t>> by_label(ds.labels.size());
    for (std::size_t i = 0; i < ds.windows.size(); ++i) by_label[ds.label_index(ds.windows[i].label)].push_back(i);

    Dataset train{ds.kind, ds.labels, {}}, test{ds.kind, ds.labels, {}};
    for (std::size_t l = 0; l < by_label.size(); ++l) {
        auto& idx = by_label[l];
        if (idx.size() < 2)
            fail(ErrorCode::InvalidArgument,
                 "label '" + ds.labels[l] + "' has " + std::to_string(idx.size()) + " window(s); split needs >= 2");
        auto rng = make_rng(spec.seed, "split", l);
        std::shuffle(idx.begin(), idx.end(), rng);
        const auto n_train = static_cast<std::size_t>(std::floor(spec.train_fraction * static_cast<double>(idx.size())));
        for (std::size_t k = 0; k < idx.size(); ++k)
            (k < n_train ? train : test).windows.push_back(ds.windows[idx[k]]);
    }
    return {std::move(train), std::move(test)};
}

/// Loads `<root>/<label>/<recording>.{csv|wav}`. Directory and file order are
/// sorted so the result does not depend on filesystem enumeration order.
inline std::vector<Recording> load_directory(const std::filesystem::path& root, Kind kind, double imu_sample_rate) {
    namespace fs = std::filesystem;
    if (!fs::is_directory(root)) fail(ErrorCode::Io, "dataset root '" + root.string() + "' is not a directory");
    std::vector<fs::path> label_dirs;
    for (const auto& e : fs::directory_iterator(root))
        if (e.is_directory()) label_dirs.push_back(e.path());
    std::sort(label_dirs.begin(), label_dirs.end());

    std::vector<Recording> recs;
    const std::string want = kind == Kind::Gesture ? ".csv" : ".wav";
    for (const auto& dir : label_dirs) {
        std::vector<fs::path> files;
        for (const auto& e : fs::directory_iterator(dir)) {
            if (!e.is_regular_file()) continue;
            auto ext = e.path().extension().string();
            if (ext == ".csv" || ext == ".wav") {
                if (ext != want)
                    fail(ErrorCode::KindMismatch, "kind mismatch: " + e.path().string() + " in a " + to_string(kind) +
                                                      " dataset");
                files.push_back(e.path());
            }
        }
        std::sort(files.begin(), files.end());
        const auto label = dir.filename().string();
        for (const auto& f : files)
            recs.push_back(kind == Kind::Gesture ? load_csv_recording(f, label, imu_sample_rate)
                                                 : load_wav_recording(f, label));
    }
    return recs;
}

}  // namespace tinyml::dataset
