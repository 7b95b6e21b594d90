/*
 * Copyright 2026 The tinyml-workbench Authors
 *
 * SPDX-License-Identifier: Apache-2.0
 */

#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <iomanip>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "tinyml/core/error.hpp"
#include "tinyml/dsp/features.hpp"
#include "tinyml/model/network.hpp"
#include "tinyml/quant/quantize.hpp"
#include "tinyml/runtime/actions.hpp"
#include "tinyml/runtime/blob.hpp"

namespace tinyml::runtime {

struct ActionEvent {
    std::uint64_t timestamp = 0;  // stream sample index one past the window's last sample
    std::string label;
    double confidence = 0.0;
    Action action = Action::None;

    friend bool operator==(const ActionEvent&, const ActionEvent&) = default;
};

/// `<sample_index>\t<label>\t<confidence>\t<action>` with 4 decimals.
inline std::string format_event(const ActionEvent& e) {
    std::ostringstream os;
    os << e.timestamp << '\t' << e.label << '\t' << std::fixed << std::setprecision(4) << e.confidence << '\t'
       << to_string(e.action);
    return os.str();
}

/// Per-hop view for verbose monitoring.
struct WindowResult {
    std::uint64_t timestamp = 0;
    std::span<const double> probabilities;  // this window
    std::span<const double> smoothed;       // moving average over the last K windows
};

/// Continuous classifier over one sample stream. All buffers are sized at
/// construction: the sample ring holds exactly one window and the smoother
/// exactly K probability vectors.
///
/// Every `stride` samples (once a full window is buffered) the window is
/// featurized, run through the integer model and averaged with the previous
/// K-1 outputs. An event fires when the smoothed top class reaches
/// min_confidence, maps to an action other than None, at least
/// event_cooldown hops have passed since the last event, and the same class
/// is not still latched from an event it already produced. The latch
/// releases as soon as the smoothed top class changes or drops below
/// min_confidence, so one sustained utterance yields one event.
class StreamClassifier {
public:
    StreamClassifier(quant::QuantizedModel qm, const dsp::DspConfig& dsp_cfg, const RuntimeConfig& rt)
        : model_(std::move(qm)),
          dsp_((dsp_cfg.validate(), dsp_cfg)),
          rt_((rt.validate(), rt)),
          extractor_(dsp_),
          runner_(model_),
          channels_(dsp_.channels()),
          window_len_(dsp_.window_len),
          ring_(channels_ * window_len_, 0.0f),
          window_(channels_ * window_len_, 0.0),
          features_(extractor_.feature_count()),
          probs_(model_.topology.output_dim),
          history_(rt_.smoothing_window * model_.topology.output_dim, 0.0),
          smoothed_(model_.topology.output_dim) {
        if (extractor_.feature_count() != model_.topology.input_dim)
            fail(ErrorCode::KindMismatch, "DSP feature count does not match model input_dim");
        require(model_.labels.size() == model_.topology.output_dim, "model label table is incomplete");
        for (const auto& l : model_.labels) actions_.push_back(action_map(l));
    }

    explicit StreamClassifier(const Blob& blob) : StreamClassifier(blob.model, blob.dsp, blob.runtime) {}

    // runner_ points into model_.
    StreamClassifier(const StreamClassifier&) = delete;
    StreamClassifier& operator=(const StreamClassifier&) = delete;

    std::size_t channels() const { return channels_; }
    std::size_t window_len() const { return window_len_; }
    std::size_t stride() const { return dsp_.stride; }
    std::uint64_t samples_seen() const { return seen_; }
    const std::vector<std::string>& labels() const { return model_.labels; }
    const RuntimeConfig& runtime_config() const { return rt_; }

    void set_window_observer(std::function<void(const WindowResult&)> obs) { observer_ = std::move(obs); }

    /// Bytes reserved by the streaming buffers; constant for the object's life.
    std::size_t buffer_capacity_bytes() const {
        return ring_.capacity() * sizeof(float) +
               (window_.capacity() + features_.capacity() + probs_.capacity() + history_.capacity() +
                smoothed_.capacity()) *
                   sizeof(double);
    }

    /// chunk is channel-major: channels() blocks of `frames` samples each.
    /// At most one window of frames per call.
    std::vector<ActionEvent> push_samples(std::span<const double> chunk, std::size_t frames) {
        require(chunk.size() == channels_ * frames, "chunk size must equal channels * frames");
        if (frames > window_len_)
            fail(ErrorCode::InvalidArgument, "chunk of " + std::to_string(frames) +
                                                 " frames exceeds one window (" + std::to_string(window_len_) + ")");
        std::vector<ActionEvent> events;
        for (std::size_t t = 0; t < frames; ++t) {
            for (std::size_t c = 0; c < channels_; ++c)
                ring_[c * window_len_ + head_] = static_cast<float>(chunk[c * frames + t]);
            head_ = (head_ + 1) % window_len_;
            ++seen_;
            if (seen_ >= window_len_ && (seen_ - window_len_) % dsp_.stride == 0) {
                if (auto e = classify_window()) events.push_back(std::move(*e));
            }
        }
        return events;
    }

    /// Convenience for mono streams.
    std::vector<ActionEvent> push_samples(std::span<const double> mono) {
        require(channels_ == 1, "multi-channel streams need an explicit frame count");
        return push_samples(mono, mono.size());
    }

private:
    std::optional<ActionEvent> classify_window() {
        // head_ now points at the oldest sample.
        for (std::size_t c = 0; c < channels_; ++c)
            for (std::size_t t = 0; t < window_len_; ++t)
                window_[c * window_len_ + t] = ring_[c * window_len_ + (head_ + t) % window_len_];
        extractor_.compute(window_, features_);
        runner_.run(features_, probs_);

        const std::size_t k = probs_.size();
        std::copy(probs_.begin(), probs_.end(), history_.begin() + static_cast<std::ptrdiff_t>(slot_ * k));
        slot_ = (slot_ + 1) % rt_.smoothing_window;
        filled_ = std::min(filled_ + 1, rt_.smoothing_window);
        std::fill(smoothed_.begin(), smoothed_.end(), 0.0);
        for (std::size_t s = 0; s < filled_; ++s)
            for (std::size_t j = 0; j < k; ++j) smoothed_[j] += history_[s * k + j];
        for (auto& v : smoothed_) v /= static_cast<double>(filled_);

        if (observer_) observer_(WindowResult{seen_, probs_, smoothed_});

        const std::size_t top = model::argmax(smoothed_);
        const double conf = smoothed_[top];
        const bool confident = conf >= static_cast<double>(rt_.min_confidence) && actions_[top] != Action::None;
        if (latched_ && (!confident || *latched_ != top)) latched_.reset();
        if (!confident || latched_) return std::nullopt;
        if (last_event_ && seen_ - *last_event_ < rt_.event_cooldown * dsp_.stride) return std::nullopt;

        last_event_ = seen_;
        latched_ = top;
        return ActionEvent{seen_, model_.labels[top], conf, actions_[top]};
    }

    quant::QuantizedModel model_;
    dsp::DspConfig dsp_;
    RuntimeConfig rt_;
    dsp::FeatureExtractor extractor_;
    quant::QuantizedRunner runner_;
    std::size_t channels_;
    std::size_t window_len_;
    std::vector<Action> actions_;

    std::vector<float> ring_;
    std::size_t head_ = 0;
    std::uint64_t seen_ = 0;
    std::vector<double> window_;
    std::vector<double> features_;
    std::vector<double> probs_;
    std::vector<double> history_;  // K x classes
    std::size_t slot_ = 0;
    std::size_t filled_ = 0;
    std::vector<double> smoothed_;

    std::optional<std::uint64_t> last_event_;
    std::optional<std::size_t> latched_;
    std::function<void(const WindowResult&)> observer_;
};

}  // namespace tinyml::runtime
