/*
 * Copyright 2026 The tinyml-workbench Authors
 *
 * SPDX-License-Identifier: Apache-2.0
 */

#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <random>

#include "support.hpp"

using namespace tinyml;

namespace {

Matrix<double> random_rows(std::size_t rows, std::size_t cols, std::uint64_t seed, double sigma = 1.0) {
    auto rng = make_rng(seed, "rows");
    std::normal_distribution<double> n(0.0, sigma);
    Matrix<double> m(rows, cols);
    for (auto& v : m.data()) v = n(rng);
    return m;
}

model::ModelParams zeroed(model::ModelParams p) {
    for (auto& l : p.layers) {
        std::fill(l.weights.begin(), l.weights.end(), 0.0);
        std::fill(l.bias.begin(), l.bias.end(), 0.0);
    }
    return p;
}

// 50 fresh recordings per class, distinct from the training corpus.
const dsp::FeatureSet& holdout(dataset::Kind kind) {
    static std::map<dataset::Kind, dsp::FeatureSet> cache;
    auto it = cache.find(kind);
    if (it == cache.end()) {
        const auto& t = tinyml::testing::trained(kind);
        const auto ds = dataset::make_dataset(kind, tinyml::testing::synth_all(kind, 50, 777), t.config.dsp.window_len,
                                              t.config.dsp.stride, t.train.labels);
        it = cache.emplace(kind, dsp::featurize(ds, t.config.dsp)).first;
    }
    return it->second;
}

}  // namespace

TEST(Calibrate, ZeroNetworkRangesWidened) {
    const auto p = zeroed(model::init({4, {3}, 2}, 1));
    const auto ranges = quant::calibrate(p, Matrix<double>(12, 4, 0.0));
    ASSERT_EQ(ranges.size(), 3u);  // input, hidden, logits; softmax has no boundary
    for (const auto& r : ranges) {
        EXPECT_DOUBLE_EQ(r.lo, -1e-6);
        EXPECT_DOUBLE_EQ(r.hi, 1e-6);
    }
}

TEST(Calibrate, SupersetRangesContainSubset) {
    const auto p = model::init({6, {5, 4}, 3}, 2);
    const auto a = random_rows(20, 6, 1);
    const auto b = random_rows(20, 6, 2, 3.0);
    Matrix<double> ab = a;
    for (std::size_t r = 0; r < b.rows(); ++r) ab.append_row(b.row(r));
    const auto ra = quant::calibrate(p, a), rab = quant::calibrate(p, ab);
    for (std::size_t i = 0; i < ra.size(); ++i) {
        EXPECT_LE(rab[i].lo, ra[i].lo);
        EXPECT_GE(rab[i].hi, ra[i].hi);
    }
}

TEST(Calibrate, NeedsRows) {
    const auto p = model::init({3, {2}, 2}, 1);
    EXPECT_THROW(quant::calibrate(p, Matrix<double>()), Error);
    EXPECT_THROW(quant::calibrate(p, Matrix<double>(9, 3)), Error);
}

TEST(Quantize, ExactGridRoundTrips) {
    std::vector<double> w;
    for (int i = -127; i <= 127; ++i) w.push_back(i * 0.01);
    const auto qp = quant::symmetric_params(w);
    EXPECT_NEAR(qp.scale, 0.01, 1e-9);
    EXPECT_EQ(qp.zero_point, 0);
    const auto q = quant::quantize_tensor(w, qp);
    for (std::size_t i = 0; i < w.size(); ++i) {
        EXPECT_EQ(q[i], static_cast<std::int8_t>(static_cast<int>(i) - 127));
        EXPECT_NEAR(qp.dequantize(q[i]), w[i], 1e-6);
    }
}

TEST(Quantize, RoundTripWithinHalfScale) {
    for (std::uint64_t s = 0; s < 50; ++s) {
        const auto m = random_rows(1, 300, s, 0.1 + static_cast<double>(s));
        const std::span<const double> w = m.row(0);
        const auto qp = quant::symmetric_params(w);
        const auto q = quant::quantize_tensor(w, qp);
        for (std::size_t i = 0; i < w.size(); ++i)
            EXPECT_LE(std::abs(qp.dequantize(q[i]) - w[i]), qp.scale / 2.0 + 1e-9);

        // affine activations behave the same inside their range
        double lo = *std::min_element(w.begin(), w.end()), hi = *std::max_element(w.begin(), w.end());
        const auto ap = quant::affine_params({lo, hi});
        for (double x : w) EXPECT_LE(std::abs(ap.dequantize(ap.quantize(x)) - x), ap.scale / 2.0 + 1e-9);
    }
}

TEST(Quantize, ZeroTensorScaleOne) {
    const std::vector<double> w(10, 0.0);
    const auto qp = quant::symmetric_params(w);
    EXPECT_EQ(qp.scale, 1.0f);
    for (auto q : quant::quantize_tensor(w, qp)) EXPECT_EQ(q, 0);
}

TEST(Quantize, IdempotentOnGrid) {
    for (const auto& qp : {quant::QuantParams{0.037f, 0}, quant::affine_params({-0.3, 2.2}),
                           quant::affine_params({0.0, 5.0})})
        for (int q = -128; q <= 127; ++q) {
            const auto v = static_cast<std::int8_t>(q);
            EXPECT_EQ(qp.quantize(qp.dequantize(v)), v);
        }
}

TEST(Quantize, ZeroIsExactlyRepresentable) {
    for (auto r : {quant::ActivationRange{-1.0, 3.0}, {0.5, 3.0}, {-4.0, -1.0}, {0.0, 0.0}}) {
        const auto qp = quant::affine_params(r);
        EXPECT_EQ(qp.dequantize(qp.quantize(0.0)), 0.0);
        EXPECT_GT(qp.scale, 0.0f);
    }
}

TEST(FixedMultiplier, MatchesRoundedProduct) {
    auto rng = make_rng(4, "mult");
    std::uniform_real_distribution<double> m(1e-6, 3.0);
    std::uniform_int_distribution<std::int32_t> x(-2000000, 2000000);
    for (int i = 0; i < 2000; ++i) {
        const double mult = m(rng);
        const auto f = quant::FixedMultiplier::from(mult);
        const std::int32_t v = x(rng);
        EXPECT_LE(std::abs(f.apply(v) - std::llround(v * mult)), 1) << mult << " " << v;
    }
}

TEST(QForward, ZeroNetIsExactlyUniform) {
    auto p = zeroed(model::init({4, {3}, 4}, 1));
    const auto qm = quant::quantize(p, quant::calibrate(p, random_rows(10, 4, 1)));
    for (double v : quant::q_forward(qm, std::vector<double>{1, 2, 3, 4})) EXPECT_EQ(v, 0.25);
}

TEST(QForward, AgreesWithFloatOnHoldout) {
    for (auto kind : {dataset::Kind::Gesture, dataset::Kind::Keyword}) {
        const auto& t = tinyml::testing::trained(kind);
        const auto& h = holdout(kind);
        ASSERT_EQ(h.size(), 200u);
        std::size_t agree = 0;
        double worst = 0.0;
        for (std::size_t r = 0; r < h.size(); ++r) {
            const auto fp = model::forward(t.params, h.features.row(r));
            const auto qp = quant::q_forward(t.qmodel, h.features.row(r));
            agree += model::argmax(fp) == model::argmax(qp);
            EXPECT_NEAR(std::accumulate(qp.begin(), qp.end(), 0.0), 1.0, 1e-6);
            for (std::size_t k = 0; k < fp.size(); ++k) worst = std::max(worst, std::abs(fp[k] - qp[k]));
        }
        EXPECT_GE(static_cast<double>(agree) / 200.0, 0.98) << dataset::to_string(kind);
        EXPECT_LT(worst, 0.05) << dataset::to_string(kind);
    }
}

TEST(QForward, AccuracyDropWithinTwoPoints) {
    for (auto kind : {dataset::Kind::Gesture, dataset::Kind::Keyword}) {
        const auto& t = tinyml::testing::trained(kind);
        const double f = model::evaluate(t.params, t.test_features, 0.6).accuracy;
        const double q = quant::evaluate(t.qmodel, t.test_features, 0.6).accuracy;
        EXPECT_LE(f - q, 0.02) << dataset::to_string(kind);
    }
}

TEST(QuantizedModel, DequantizedWeightsNearOriginals) {
    const auto& t = tinyml::testing::trained(dataset::Kind::Gesture);
    for (std::size_t l = 0; l < t.params.layers.size(); ++l) {
        const auto& ql = t.qmodel.layers[l];
        for (std::size_t k = 0; k < ql.weights.size(); ++k)
            EXPECT_LE(std::abs(ql.weight.dequantize(ql.weights[k]) - t.params.layers[l].weights[k]),
                      ql.weight.scale / 2.0 + 1e-9);
    }
}

TEST(Budget, Constants) {
    EXPECT_EQ(quant::kFlashBudget, 1048576u);
    EXPECT_EQ(quant::kRamBudget, 262144u);
}

TEST(Budget, DefaultGestureModelFits) {
    const auto& t = tinyml::testing::trained(dataset::Kind::Gesture);
    EXPECT_EQ(t.qmodel.topology.dims(), (std::vector<std::size_t>{51, 20, 10, 4}));
    const auto r = quant::budget_report(t.qmodel, t.config.dsp, t.config.runtime);
    EXPECT_LT(r.flash_bytes, 16u * 1024);
    EXPECT_TRUE(r.fits);
    EXPECT_EQ(r.flash_bytes, runtime::encode_blob(t.qmodel, t.config.dsp, t.config.runtime).size());
}

TEST(Budget, DefaultKeywordModelFits) {
    const auto& t = tinyml::testing::trained(dataset::Kind::Keyword);
    EXPECT_TRUE(quant::budget_report(t.qmodel, t.config.dsp, t.config.runtime).fits);
}

TEST(Budget, LargeModelDoesNotFit) {
    auto p = model::init({600, {600}, 600}, 1);
    const auto qm = quant::quantize(p, quant::calibrate(p, random_rows(10, 600, 2)));
    dsp::DspConfig dsp = dsp::DspConfig::defaults_for(dataset::Kind::Gesture);
    const auto r = quant::budget_report(qm, dsp, {});
    EXPECT_GT(r.ram_bytes, 262144u);
    EXPECT_FALSE(r.fits);
}
