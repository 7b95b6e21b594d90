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
#include <span>
#include <string>
#include <vector>

#include "tinyml/core/error.hpp"
#include "tinyml/core/random.hpp"

namespace tinyml::model {

struct Topology {
    std::size_t input_dim = 0;
    std::vector<std::size_t> hidden{20, 10};
    std::size_t output_dim = 0;

    /// input, hidden..., output
    std::vector<std::size_t> dims() const {
        std::vector<std::size_t> d{input_dim};
        d.insert(d.end(), hidden.begin(), hidden.end());
        d.push_back(output_dim);
        return d;
    }

    std::size_t layer_count() const { return hidden.size() + 1; }

    void validate() const {
        for (auto d : dims()) require(d >= 1, "all topology dimensions must be >= 1");
    }

    friend bool operator==(const Topology&, const Topology&) = default;
};

/// Fully connected layer, weights row-major (out x in).
struct DenseLayer {
    std::size_t in = 0;
    std::size_t out = 0;
    std::vector<double> weights;
    std::vector<double> bias;

    double w(std::size_t o, std::size_t i) const { return weights[o * in + i]; }

    friend bool operator==(const DenseLayer&, const DenseLayer&) = default;
};

struct ModelParams {
    Topology topology;
    std::vector<DenseLayer> layers;
    std::vector<double> norm_mean;
    std::vector<double> norm_std;
    std::vector<std::string> labels;

    void validate() const {
        topology.validate();
        const auto d = topology.dims();
        require(layers.size() == topology.layer_count(), "layer count does not match topology");
        for (std::size_t l = 0; l < layers.size(); ++l) {
            const auto& L = layers[l];
            require(L.in == d[l] && L.out == d[l + 1], "layer shape does not match topology");
            require(L.weights.size() == L.in * L.out && L.bias.size() == L.out, "layer tensor size mismatch");
            for (double v : L.weights) require(std::isfinite(v), "non-finite weight");
            for (double v : L.bias) require(std::isfinite(v), "non-finite bias");
        }
        require(norm_mean.size() == topology.input_dim && norm_std.size() == topology.input_dim,
                "normalization vectors must have input_dim entries");
        require(labels.empty() || labels.size() == topology.output_dim, "label table size must equal output_dim");
    }

    friend bool operator==(const ModelParams&, const ModelParams&) = default;
};

/// He-style uniform init: weights ~ U(-sqrt(6/fan_in), +sqrt(6/fan_in)),
/// biases zero. Normalization starts as identity.
inline ModelParams init(const Topology& topology, std::uint64_t seed) {
    topology.validate();
    ModelParams p{topology, {}, std::vector<double>(topology.input_dim, 0.0),
                  std::vector<double>(topology.input_dim, 1.0), {}};
    const auto d = topology.dims();
    auto rng = make_rng(seed, "init");
    for (std::size_t l = 0; l + 1 < d.size(); ++l) {
        const double bound = std::sqrt(6.0 / static_cast<double>(d[l]));
        std::uniform_real_distribution<double> u(-bound, bound);
        DenseLayer L{d[l], d[l + 1], std::vector<double>(d[l] * d[l + 1]), std::vector<double>(d[l + 1], 0.0)};
        for (auto& w : L.weights) w = u(rng);
        p.layers.push_back(std::move(L));
    }
    return p;
}

inline void softmax_inplace(std::span<double> v) {
    const double mx = *std::max_element(v.begin(), v.end());
    double sum = 0.0;
    for (auto& x : v) {
        x = std::exp(x - mx);
        sum += x;
    }
    for (auto& x : v) x /= sum;
}

inline std::vector<double> softmax(std::span<const double> logits) {
    std::vector<double> v(logits.begin(), logits.end());
    softmax_inplace(v);
    return v;
}

inline std::vector<double> normalize(const ModelParams& p, std::span<const double> features) {
    if (features.size() != p.topology.input_dim)
        fail(ErrorCode::InvalidArgument, "feature length " + std::to_string(features.size()) +
                                             " does not match input_dim " + std::to_string(p.topology.input_dim));
    std::vector<double> z(features.size());
    for (std::size_t i = 0; i < z.size(); ++i) z[i] = (features[i] - p.norm_mean[i]) / p.norm_std[i];
    return z;
}

/// Logits for an already-normalized input.
inline std::vector<double> logits_normalized(const ModelParams& p, std::span<const double> z) {
    std::vector<double> a(z.begin(), z.end());
    for (std::size_t l = 0; l < p.layers.size(); ++l) {
        const auto& L = p.layers[l];
        std::vector<double> next(L.out);
        for (std::size_t o = 0; o < L.out; ++o) {
            double acc = L.bias[o];
            for (std::size_t i = 0; i < L.in; ++i) acc += L.weights[o * L.in + i] * a[i];
            next[o] = (l + 1 < p.layers.size()) ? std::max(acc, 0.0) : acc;
        }
        a = std::move(next);
    }
    return a;
}

inline std::vector<double> forward_normalized(const ModelParams& p, std::span<const double> z) {
    auto v = logits_normalized(p, z);
    softmax_inplace(v);
    return v;
}

/// z-score normalize, dense+relu hidden layers, dense output, softmax.
inline std::vector<double> forward(const ModelParams& p, std::span<const double> features) {
    return forward_normalized(p, normalize(p, features));
}

inline constexpr double kProbabilityClamp = 1e-12;

inline double cross_entropy(std::span<const double> probs, std::size_t label) {
    return -std::log(std::max(probs[label], kProbabilityClamp));
}

inline double loss(const ModelParams& p, std::span<const double> features, std::size_t label_index) {
    require(label_index < p.topology.output_dim, "label index out of range");
    return cross_entropy(forward(p, features), label_index);
}

inline std::size_t argmax(std::span<const double> v) {
    return static_cast<std::size_t>(std::max_element(v.begin(), v.end()) - v.begin());
}

}  // namespace tinyml::model
