/*
 * Copyright 2026 The tinyml-workbench Authors
 *
 * SPDX-License-Identifier: Apache-2.0
 */

#pragma once

#include <charconv>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "tinyml/core/error.hpp"
#include "tinyml/dataset/dataset.hpp"
#include "tinyml/dataset/synth.hpp"
#include "tinyml/dsp/features.hpp"
#include "tinyml/model/evaluation.hpp"
#include "tinyml/model/training.hpp"
#include "tinyml/quant/budget.hpp"
#include "tinyml/quant/quantize.hpp"
#include "tinyml/runtime/blob.hpp"

// Project-level workflow: config file, dataset on disk, and the
// split -> features -> train -> test -> quantize -> export stages.
namespace tinyml::pipeline {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

inline constexpr double kAccuracyBar = 0.90;
inline constexpr double kMaxQuantizedDrop = 0.02;

struct ProjectConfig {
    dataset::Kind kind = dataset::Kind::Gesture;
    fs::path dataset_root;
    fs::path work_dir;
    dataset::SplitSpec split;
    dsp::DspConfig dsp;
    std::vector<std::size_t> hidden{20, 10};
    model::TrainConfig train;
    runtime::RuntimeConfig runtime;
    double min_confidence = model::kDefaultMinConfidence;
    double accuracy_bar = kAccuracyBar;
    double max_quantized_drop = kMaxQuantizedDrop;

    static ProjectConfig defaults(dataset::Kind kind, std::uint64_t seed = 42) {
        ProjectConfig c;
        c.kind = kind;
        c.dataset_root = "data/" + dataset::to_string(kind);
        c.work_dir = "out/" + dataset::to_string(kind);
        c.split.seed = seed;
        c.dsp = runtime::canonicalize(dsp::DspConfig::defaults_for(kind));
        c.train.seed = seed;
        return c;
    }

    void set_seed(std::uint64_t seed) {
        split.seed = seed;
        train.seed = seed;
    }
};

inline json to_json(const ProjectConfig& c) {
    json j;
    j["kind"] = dataset::to_string(c.kind);
    j["dataset_root"] = c.dataset_root.generic_string();
    j["work_dir"] = c.work_dir.generic_string();
    j["split"] = {{"train_fraction", c.split.train_fraction}, {"seed", c.split.seed}};
    json d;
    d["sample_rate"] = c.dsp.sample_rate;
    d["window_len"] = c.dsp.window_len;
    d["stride"] = c.dsp.stride;
    if (c.kind == dataset::Kind::Gesture) {
        d["spectral"] = {{"scale", c.dsp.spectral.scale},
                         {"filter_cutoff", c.dsp.spectral.filter_cutoff},
                         {"filter_order", c.dsp.spectral.filter_order},
                         {"fft_len", c.dsp.spectral.fft_len},
                         {"power_bins", c.dsp.spectral.power_bins}};
    } else {
        d["mfcc"] = {{"frame_len", c.dsp.mfcc.frame_len},
                     {"frame_stride", c.dsp.mfcc.frame_stride},
                     {"mel_filters", c.dsp.mfcc.mel_filters},
                     {"coefficients", c.dsp.mfcc.coefficients},
                     {"fft_len", c.dsp.mfcc.fft_len}};
    }
    j["dsp"] = d;
    j["topology"] = {{"hidden", c.hidden}};
    j["train"] = {{"epochs", c.train.epochs},
                  {"batch_size", c.train.batch_size},
                  {"learning_rate", c.train.learning_rate},
                  {"seed", c.train.seed},
                  {"augment", c.train.augment},
                  {"confidence_threshold", c.train.confidence_threshold}};
    j["test"] = {{"min_confidence", c.min_confidence},
                 {"accuracy_bar", c.accuracy_bar},
                 {"max_quantized_drop", c.max_quantized_drop}};
    j["runtime"] = {{"min_confidence", c.runtime.min_confidence},
                    {"smoothing_window", c.runtime.smoothing_window},
                    {"event_cooldown", c.runtime.event_cooldown}};
    return j;
}

/// Reads a project file. Missing keys keep their defaults; relative paths
/// resolve against the config file's directory.
inline ProjectConfig load_project_config(const fs::path& path) {
    std::ifstream in(path);
    if (!in) fail(ErrorCode::Io, "cannot open config '" + path.string() + "'");
    json j;
    try {
        j = json::parse(in);
    } catch (const json::exception& e) {
        fail(ErrorCode::Parse, path.string() + ": " + e.what());
    }
    try {
        auto c = ProjectConfig::defaults(dataset::parse_kind(j.at("kind").get<std::string>()));
        const auto base = path.parent_path();
        auto resolve = [&](const std::string& p) { return fs::path(p).is_absolute() ? fs::path(p) : base / p; };
        c.dataset_root = resolve(j.value("dataset_root", c.dataset_root.string()));
        c.work_dir = resolve(j.value("work_dir", c.work_dir.string()));
        if (j.contains("split")) {
            const auto& s = j["split"];
            c.split.train_fraction = s.value("train_fraction", c.split.train_fraction);
            c.split.seed = s.value("seed", c.split.seed);
        }
        if (j.contains("dsp")) {
            const auto& d = j["dsp"];
            c.dsp.sample_rate = d.value("sample_rate", c.dsp.sample_rate);
            c.dsp.window_len = d.value("window_len", c.dsp.window_len);
            c.dsp.stride = d.value("stride", c.dsp.stride);
            if (d.contains("spectral")) {
                const auto& s = d["spectral"];
                c.dsp.spectral.scale = s.value("scale", c.dsp.spectral.scale);
                c.dsp.spectral.filter_cutoff = s.value("filter_cutoff", c.dsp.spectral.filter_cutoff);
                c.dsp.spectral.filter_order = s.value("filter_order", c.dsp.spectral.filter_order);
                c.dsp.spectral.fft_len = s.value("fft_len", c.dsp.spectral.fft_len);
                c.dsp.spectral.power_bins = s.value("power_bins", c.dsp.spectral.power_bins);
            }
            if (d.contains("mfcc")) {
                const auto& m = d["mfcc"];
                c.dsp.mfcc.frame_len = m.value("frame_len", c.dsp.mfcc.frame_len);
                c.dsp.mfcc.frame_stride = m.value("frame_stride", c.dsp.mfcc.frame_stride);
                c.dsp.mfcc.mel_filters = m.value("mel_filters", c.dsp.mfcc.mel_filters);
                c.dsp.mfcc.coefficients = m.value("coefficients", c.dsp.mfcc.coefficients);
                c.dsp.mfcc.fft_len = m.value("fft_len", c.dsp.mfcc.fft_len);
            }
        }
        c.dsp = runtime::canonicalize(c.dsp);
        if (j.contains("topology")) c.hidden = j["topology"].value("hidden", c.hidden);
        if (j.contains("train")) {
            const auto& t = j["train"];
            c.train.epochs = t.value("epochs", c.train.epochs);
            c.train.batch_size = t.value("batch_size", c.train.batch_size);
            c.train.learning_rate = t.value("learning_rate", c.train.learning_rate);
            c.train.seed = t.value("seed", c.train.seed);
            c.train.augment = t.value("augment", c.train.augment);
            c.train.confidence_threshold = t.value("confidence_threshold", c.train.confidence_threshold);
        }
        if (j.contains("test")) {
            const auto& t = j["test"];
            c.min_confidence = t.value("min_confidence", c.min_confidence);
            c.accuracy_bar = t.value("accuracy_bar", c.accuracy_bar);
            c.max_quantized_drop = t.value("max_quantized_drop", c.max_quantized_drop);
        }
        if (j.contains("runtime")) {
            const auto& r = j["runtime"];
            c.runtime.min_confidence = r.value("min_confidence", c.runtime.min_confidence);
            c.runtime.smoothing_window = r.value("smoothing_window", c.runtime.smoothing_window);
            c.runtime.event_cooldown = r.value("event_cooldown", c.runtime.event_cooldown);
        }
        c.dsp.kind = c.kind;
        c.dsp.validate();
        c.train.validate();
        c.runtime.validate();
        return c;
    } catch (const json::exception& e) {
        fail(ErrorCode::Parse, path.string() + ": " + e.what());
    }
}

inline void write_text(const fs::path& path, const std::string& text) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream f(path, std::ios::binary);
    if (!f || !f.write(text.data(), static_cast<std::streamsize>(text.size())))
        fail(ErrorCode::Io, "cannot write '" + path.string() + "'");
}

inline void write_config(const ProjectConfig& c, const fs::path& path) { write_text(path, to_json(c).dump(2) + "\n"); }

inline std::string read_text(const fs::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) fail(ErrorCode::Io, "cannot open '" + path.string() + "'");
    std::ostringstream os;
    os << f.rdbuf();
    return os.str();
}

// Shortest round-trip text for a double.
inline std::string fmt(double v) {
    char buf[32];
    auto r = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, r.ptr);
}

/// Writes per-class synthetic recordings under `out/<label>/`. Returns the
/// number of files written.
inline std::size_t synthesize(dataset::Kind kind, const fs::path& out, std::size_t per_class, std::uint64_t seed) {
    require(per_class >= 1, "per-class count must be >= 1");
    const auto& classes = kind == dataset::Kind::Gesture ? dataset::gesture_classes() : dataset::keyword_classes();
    std::size_t written = 0;
    for (const auto& cls : classes) {
        const auto dir = out / cls;
        std::error_code ec;
        fs::create_directories(dir, ec);
        if (ec) fail(ErrorCode::Io, "cannot create '" + dir.string() + "': " + ec.message());
        const auto recs = kind == dataset::Kind::Gesture ? dataset::synth_gesture(cls, seed, per_class)
                                                         : dataset::synth_keyword(cls, seed, per_class);
        for (std::size_t i = 0; i < recs.size(); ++i) {
            std::ostringstream name;
            name << cls << '_' << std::setw(3) << std::setfill('0') << i;
            if (kind == dataset::Kind::Gesture) dataset::write_csv_recording(recs[i], dir / (name.str() + ".csv"));
            else dataset::write_wav_recording(recs[i], dir / (name.str() + ".wav"));
            ++written;
        }
    }
    return written;
}

inline dataset::Dataset load_dataset(const ProjectConfig& c) {
    const auto recs = dataset::load_directory(c.dataset_root, c.kind, c.dsp.sample_rate);
    if (recs.empty()) fail(ErrorCode::InvalidArgument, "no recordings under '" + c.dataset_root.string() + "'");
    std::vector<std::string> labels;
    for (const auto& r : recs) {
        if (r.sample_rate != c.dsp.sample_rate)
            fail(ErrorCode::InvalidArgument, r.source_id + ": sample rate " + fmt(r.sample_rate) +
                                                 " Hz does not match the configured " + fmt(c.dsp.sample_rate) + " Hz");
        if (std::find(labels.begin(), labels.end(), r.label) == labels.end()) labels.push_back(r.label);
    }
    if (labels.size() < 2)
        fail(ErrorCode::InvalidArgument, "dataset has " + std::to_string(labels.size()) + " class; need at least 2");
    return dataset::make_dataset(c.kind, recs, c.dsp.window_len, c.dsp.stride, labels);
}

/// Paths relative to the dataset root keep manifests independent of where
/// the project lives.
inline std::string relative_source(const ProjectConfig& c, const std::string& source_id) {
    return fs::path(source_id).lexically_relative(c.dataset_root).generic_string();
}

inline std::string split_manifest(const ProjectConfig& c, const dataset::Dataset& train, const dataset::Dataset& test) {
    std::ostringstream os;
    os << "set,label,source,start\n";
    for (const auto* part : {&train, &test})
        for (const auto& w : part->windows)
            os << (part == &train ? "train" : "test") << ',' << w.label << ',' << relative_source(c, w.origin.source_id)
               << ',' << w.origin.start << '\n';
    return os.str();
}

/// Row per window, label as the last column.
inline std::string features_csv(const dsp::FeatureSet& fs) {
    std::ostringstream os;
    for (std::size_t c = 0; c < fs.features.cols(); ++c) os << 'f' << c << ',';
    os << "label\n";
    for (std::size_t r = 0; r < fs.size(); ++r) {
        for (double v : fs.features.row(r)) os << fmt(v) << ',';
        os << fs.labels[fs.targets[r]] << '\n';
    }
    return os.str();
}

inline std::string history_csv(const std::vector<model::EpochStats>& h) {
    std::ostringstream os;
    os << "epoch,loss,accuracy\n";
    for (const auto& e : h) os << e.epoch << ',' << fmt(e.loss) << ',' << fmt(e.accuracy) << '\n';
    return os.str();
}

inline json model_json(const model::ModelParams& p, const ProjectConfig& c) {
    json j;
    j["format"] = "tinyml-float-model";
    j["version"] = 1;
    j["kind"] = dataset::to_string(c.kind);
    j["layout_id"] = c.dsp.layout_id();
    j["labels"] = p.labels;
    j["dims"] = p.topology.dims();
    j["norm_mean"] = p.norm_mean;
    j["norm_std"] = p.norm_std;
    auto layers = json::array();
    for (const auto& l : p.layers) layers.push_back({{"weights", l.weights}, {"bias", l.bias}});
    j["layers"] = layers;
    return j;
}

inline void save_model(const model::ModelParams& p, const ProjectConfig& c, const fs::path& path) {
    write_text(path, model_json(p, c).dump() + "\n");
}

/// Loads a float model and checks it was trained with this project's DSP
/// layout.
inline model::ModelParams load_model(const fs::path& path, const ProjectConfig& c) {
    json j;
    try {
        j = json::parse(read_text(path));
        if (j.at("format") != "tinyml-float-model") fail(ErrorCode::Parse, path.string() + ": not a float model file");
        if (j.at("layout_id").get<std::string>() != c.dsp.layout_id())
            fail(ErrorCode::KindMismatch, path.string() + ": feature layout '" + j["layout_id"].get<std::string>() +
                                              "' does not match the project's '" + c.dsp.layout_id() + "'");
        model::ModelParams p;
        const auto dims = j.at("dims").get<std::vector<std::size_t>>();
        require(dims.size() >= 2, "model needs at least one layer");
        p.topology = {dims.front(), std::vector<std::size_t>(dims.begin() + 1, dims.end() - 1), dims.back()};
        p.labels = j.at("labels").get<std::vector<std::string>>();
        p.norm_mean = j.at("norm_mean").get<std::vector<double>>();
        p.norm_std = j.at("norm_std").get<std::vector<double>>();
        const auto& layers = j.at("layers");
        for (std::size_t l = 0; l < layers.size(); ++l)
            p.layers.push_back({dims.at(l), dims.at(l + 1), layers[l].at("weights").get<std::vector<double>>(),
                                layers[l].at("bias").get<std::vector<double>>()});
        p.validate();
        return p;
    } catch (const json::exception& e) {
        fail(ErrorCode::Parse, path.string() + ": " + e.what());
    }
}

struct Prepared {
    dataset::Dataset train;
    dataset::Dataset test;
    dsp::FeatureSet train_features;
    dsp::FeatureSet test_features;
};

inline Prepared prepare(const ProjectConfig& c) {
    const auto ds = load_dataset(c);
    auto [train, test] = dataset::split(ds, c.split);
    auto tf = dsp::featurize(train, c.dsp);
    auto vf = dsp::featurize(test, c.dsp);
    if (!tf.ok()) fail(ErrorCode::InvalidArgument, "training split: " + tf.error);
    if (!vf.ok()) fail(ErrorCode::InvalidArgument, "test split: " + vf.error);
    return {std::move(train), std::move(test), std::move(tf), std::move(vf)};
}

struct TrainOutcome {
    model::TrainResult result;
    model::EvalReport report;
    bool passed = false;
};

inline TrainOutcome train_and_test(const ProjectConfig& c, const Prepared& data) {
    TrainOutcome out;
    out.result = model::train(data.train_features, c.train, c.hidden);
    out.report = model::evaluate(out.result.params, data.test_features, c.min_confidence);
    out.passed = out.report.accuracy >= c.accuracy_bar;
    return out;
}

struct QuantOutcome {
    quant::QuantizedModel model;
    std::vector<std::uint8_t> blob;
    quant::BudgetReport budget;
    model::EvalReport float_report;
    model::EvalReport quant_report;
    double argmax_agreement = 0.0;
    double max_probability_delta = 0.0;
    bool passed = false;
};

inline QuantOutcome quantize_project(const ProjectConfig& c, const model::ModelParams& p, const Prepared& data) {
    QuantOutcome out;
    const auto ranges = quant::calibrate(p, data.train_features.features);
    out.model = quant::quantize(p, ranges);
    out.blob = runtime::encode_blob(out.model, c.dsp, c.runtime);
    out.budget = quant::budget_report(out.model, c.dsp, c.runtime);
    out.float_report = model::evaluate(p, data.test_features, c.min_confidence);
    out.quant_report = quant::evaluate(out.model, data.test_features, c.min_confidence);

    std::size_t agree = 0;
    quant::QuantizedRunner runner(out.model);
    std::vector<double> qp(out.model.topology.output_dim);
    const auto& tf = data.test_features;
    for (std::size_t r = 0; r < tf.size(); ++r) {
        const auto fp = model::forward(p, tf.features.row(r));
        runner.run(tf.features.row(r), qp);
        if (model::argmax(fp) == model::argmax(qp)) ++agree;
        for (std::size_t k = 0; k < fp.size(); ++k)
            out.max_probability_delta = std::max(out.max_probability_delta, std::abs(fp[k] - qp[k]));
    }
    out.argmax_agreement = static_cast<double>(agree) / static_cast<double>(tf.size());
    out.passed = out.budget.fits && (out.float_report.accuracy - out.quant_report.accuracy) <= c.max_quantized_drop + 1e-12;
    return out;
}

/// C array rendering of a blob for linking into firmware.
inline std::string blob_c_header(const std::vector<std::uint8_t>& blob, const std::string& symbol) {
    std::ostringstream os;
    os << "// Generated model image (" << blob.size() << " bytes).\n#pragma once\n\n#include <stddef.h>\n"
       << "#include <stdint.h>\n\n"
       << "static const uint8_t " << symbol << "[] = {";
    for (std::size_t i = 0; i < blob.size(); ++i) {
        if (i % 12 == 0) os << "\n   ";
        os << " 0x" << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(blob[i]) << ',';
    }
    os << std::dec << "\n};\nstatic const size_t " << symbol << "_len = " << blob.size() << ";\n";
    return os.str();
}

}  // namespace tinyml::pipeline
