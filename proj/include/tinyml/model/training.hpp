/*
 * Copyright 2026 The tinyml-workbench Authors
 *
 * SPDX-License-Identifier: Apache-2.0
 */

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <random>
#include <vector>

#include "tinyml/core/error.hpp"
#include "tinyml/core/matrix.hpp"
#include "tinyml/core/random.hpp"
#include "tinyml/dsp/features.hpp"
#include "tinyml/model/network.hpp"

namespace tinyml::model {

struct TrainConfig {
    std::size_t epochs = 100;
    std::size_t batch_size = 16;
    double learning_rate = 0.005;
    std::uint64_t seed = 0;
    bool augment = true;
    double augment_sigma = 0.1;
    // Training-time rejection threshold; only reported, never used to drop rows.
    double confidence_threshold = 0.91;

    void validate() const {
        require(epochs >= 1, "epochs must be >= 1");
        require(batch_size >= 1, "batch_size must be >= 1");
        require(learning_rate >= 0.0 && std::isfinite(learning_rate), "learning_rate must be finite and >= 0");
        require(confidence_threshold > 0.0 && confidence_threshold < 1.0, "confidence_threshold must lie in (0, 1)");
    }
};

/// Rows are normalized feature vectors (the network's input space).
struct Batch {
    Matrix<double> inputs;
    std::vector<std::size_t> targets;

    std::size_t size() const { return inputs.rows(); }
};

/// Gradients with the same shapes as the layers.
struct Gradients {
    std::vector<std::vector<double>> weights;
    std::vector<std::vector<double>> bias;
};

inline double batch_loss(const ModelParams& p, const Batch& batch) {
    double total = 0.0;
    for (std::size_t r = 0; r < batch.size(); ++r)
        total += cross_entropy(forward_normalized(p, batch.inputs.row(r)), batch.targets[r]);
    return total / static_cast<double>(batch.size());
}

/// Backpropagation of the mean cross-entropy over the batch. Per-example
/// contributions are summed in row order.
inline double compute_gradients(const ModelParams& p, const Batch& batch, Gradients& g) {
    require(batch.size() >= 1, "batch must not be empty");
    const std::size_t L = p.layers.size();
    g.weights.resize(L);
    g.bias.resize(L);
    for (std::size_t l = 0; l < L; ++l) {
        g.weights[l].assign(p.layers[l].weights.size(), 0.0);
        g.bias[l].assign(p.layers[l].bias.size(), 0.0);
    }

    std::vector<std::vector<double>> acts(L + 1);
    double total = 0.0;
    for (std::size_t r = 0; r < batch.size(); ++r) {
        auto in = batch.inputs.row(r);
        acts[0].assign(in.begin(), in.end());
        for (std::size_t l = 0; l < L; ++l) {
            const auto& layer = p.layers[l];
            acts[l + 1].assign(layer.out, 0.0);
            for (std::size_t o = 0; o < layer.out; ++o) {
                double acc = layer.bias[o];
                for (std::size_t i = 0; i < layer.in; ++i) acc += layer.weights[o * layer.in + i] * acts[l][i];
                acts[l + 1][o] = (l + 1 < L) ? std::max(acc, 0.0) : acc;
            }
        }
        softmax_inplace(acts[L]);
        const std::size_t y = batch.targets[r];
        require(y < p.topology.output_dim, "target index out of range");
        total += cross_entropy(acts[L], y);

        // dL/dlogits = softmax - onehot. When the clamp is active the true
        // gradient is 0 for the true-class term; that regime is numerically
        // irrelevant for training so the unclamped form is used.
        std::vector<double> delta = acts[L];
        delta[y] -= 1.0;
        for (std::size_t l = L; l-- > 0;) {
            const auto& layer = p.layers[l];
            auto& gw = g.weights[l];
            auto& gb = g.bias[l];
            for (std::size_t o = 0; o < layer.out; ++o) {
                gb[o] += delta[o];
                for (std::size_t i = 0; i < layer.in; ++i) gw[o * layer.in + i] += delta[o] * acts[l][i];
            }
            if (l == 0) break;
            std::vector<double> prev(layer.in, 0.0);
            for (std::size_t o = 0; o < layer.out; ++o)
                for (std::size_t i = 0; i < layer.in; ++i) prev[i] += layer.weights[o * layer.in + i] * delta[o];
            for (std::size_t i = 0; i < layer.in; ++i)
                if (acts[l][i] <= 0.0) prev[i] = 0.0;
            delta = std::move(prev);
        }
    }
    const double inv = 1.0 / static_cast<double>(batch.size());
    for (std::size_t l = 0; l < L; ++l) {
        for (auto& v : g.weights[l]) v *= inv;
        for (auto& v : g.bias[l]) v *= inv;
    }
    return total * inv;
}

/// One vanilla SGD step. Returns the mean batch loss before the update.
inline double train_step(ModelParams& p, const Batch& batch, double learning_rate) {
    Gradients g;
    const double mean_loss = compute_gradients(p, batch, g);
    if (learning_rate == 0.0) return mean_loss;
    for (std::size_t l = 0; l < p.layers.size(); ++l) {
        auto& layer = p.layers[l];
        for (std::size_t k = 0; k < layer.weights.size(); ++k) layer.weights[k] -= learning_rate * g.weights[l][k];
        for (std::size_t k = 0; k < layer.bias.size(); ++k) layer.bias[k] -= learning_rate * g.bias[l][k];
    }
    return mean_loss;
}

/// Feature-space augmentation: additive N(0, sigma^2) on every normalized
/// feature. Labels are untouched.
inline Batch augment(const Batch& batch, std::uint64_t seed, bool enabled = true, double sigma = 0.1) {
    if (!enabled) return batch;
    Batch out = batch;
    auto rng = make_rng(seed, "augment");
    std::normal_distribution<double> g(0.0, sigma);
    for (auto& v : out.inputs.data()) v += g(rng);
    return out;
}

struct EpochStats {
    std::size_t epoch = 0;
    double loss = 0.0;
    double accuracy = 0.0;
};

struct TrainResult {
    ModelParams params;
    std::vector<EpochStats> history;
    // Training rows whose top probability falls below cfg.confidence_threshold
    // after the final epoch.
    std::size_t below_threshold = 0;
};

inline Batch normalized_batch(const ModelParams& p, const dsp::FeatureSet& fs) {
    Batch b{Matrix<double>(fs.size(), fs.features.cols()), fs.targets};
    for (std::size_t r = 0; r < fs.size(); ++r) {
        auto z = normalize(p, fs.features.row(r));
        std::copy(z.begin(), z.end(), b.inputs.row(r).begin());
    }
    return b;
}

/// Shuffled mini-batch SGD. Normalization statistics are taken from `train`
/// and frozen into the returned params.
inline TrainResult train(const dsp::FeatureSet& train_set, const TrainConfig& cfg,
                         std::vector<std::size_t> hidden = {20, 10}) {
    cfg.validate();
    require(train_set.ok() && train_set.size() > 0, "training set is empty");
    {
        auto t = train_set.targets;
        std::sort(t.begin(), t.end());
        if (std::unique(t.begin(), t.end()) - t.begin() < 2)
            fail(ErrorCode::InvalidArgument, "training needs at least 2 classes present, got 1");
    }
    require(train_set.labels.size() >= 2, "training needs at least 2 classes");

    Topology topo{train_set.features.cols(), std::move(hidden), train_set.labels.size()};
    TrainResult res{init(topo, cfg.seed), {}, 0};
    res.params.norm_mean = train_set.mean;
    res.params.norm_std = train_set.stddev;
    res.params.labels = train_set.labels;

    const Batch all = normalized_batch(res.params, train_set);
    const std::size_t n = all.size();
    std::vector<std::size_t> order(n);
    Batch mb;
    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        std::iota(order.begin(), order.end(), std::size_t{0});
        auto rng = make_rng(cfg.seed, "shuffle", epoch);
        std::shuffle(order.begin(), order.end(), rng);

        double loss_sum = 0.0;
        for (std::size_t start = 0, b = 0; start < n; start += cfg.batch_size, ++b) {
            const std::size_t count = std::min(cfg.batch_size, n - start);
            mb.inputs = Matrix<double>(count, all.inputs.cols());
            mb.targets.resize(count);
            for (std::size_t k = 0; k < count; ++k) {
                auto src = all.inputs.row(order[start + k]);
                std::copy(src.begin(), src.end(), mb.inputs.row(k).begin());
                mb.targets[k] = all.targets[order[start + k]];
            }
            const auto step_seed = cfg.seed ^ (0x9E3779B97F4A7C15ull * (epoch * 1000003ull + b + 1));
            const Batch used = augment(mb, step_seed, cfg.augment, cfg.augment_sigma);
            loss_sum += train_step(res.params, used, cfg.learning_rate) * static_cast<double>(count);
        }

        std::size_t correct = 0;
        for (std::size_t r = 0; r < n; ++r)
            if (argmax(forward_normalized(res.params, all.inputs.row(r))) == all.targets[r]) ++correct;
        res.history.push_back({epoch + 1, loss_sum / static_cast<double>(n),
                               static_cast<double>(correct) / static_cast<double>(n)});
    }
    for (std::size_t r = 0; r < n; ++r) {
        auto pr = forward_normalized(res.params, all.inputs.row(r));
        if (pr[argmax(pr)] < cfg.confidence_threshold) ++res.below_threshold;
    }
    return res;
}

}  // namespace tinyml::model
