/*
 * Copyright 2026 The tinyml-workbench Authors
 *
 * SPDX-License-Identifier: Apache-2.0
 */

#include <gtest/gtest.h>

#include <cstring>
#include <numeric>
#include <random>

#include "support.hpp"

using namespace tinyml;
using tinyml::testing::TempDir;

namespace {

const tinyml::testing::Trained& kw() { return tinyml::testing::trained(dataset::Kind::Keyword); }
const tinyml::testing::Trained& ge() { return tinyml::testing::trained(dataset::Kind::Gesture); }

std::vector<std::uint8_t> gesture_blob() { return runtime::encode_blob(ge().qmodel, ge().config.dsp, ge().config.runtime); }

ErrorCode decode_error(std::span<const std::uint8_t> bytes) {
    try {
        runtime::decode_blob(bytes);
    } catch (const Error& e) {
        return e.code();
    }
    ADD_FAILURE() << "decode succeeded";
    return ErrorCode::InvalidArgument;
}

std::vector<double> random_features(std::size_t n, std::uint64_t seed, const std::vector<double>& mean,
                                    const std::vector<double>& sd) {
    auto rng = make_rng(seed, "features");
    std::normal_distribution<double> g(0.0, 1.5);
    std::vector<double> v(n);
    for (std::size_t i = 0; i < n; ++i) v[i] = mean[i] + sd[i] * g(rng);
    return v;
}

}  // namespace

TEST(Blob, MagicAndHeader) {
    const auto b = gesture_blob();
    ASSERT_GE(b.size(), 16u);
    EXPECT_EQ(b[0], 0x54);
    EXPECT_EQ(b[1], 0x4E);
    EXPECT_EQ(b[2], 0x59);
    EXPECT_EQ(b[3], 0x4D);
    EXPECT_EQ(b[4] | (b[5] << 8), 1);  // version
    EXPECT_EQ(b[6], 0);                // gesture
    const std::uint32_t len = b[8] | (b[9] << 8) | (b[10] << 16) | (static_cast<std::uint32_t>(b[11]) << 24);
    EXPECT_EQ(len, b.size() - 16);
}

TEST(Blob, ExportLoadRoundTripBitIdentical) {
    for (const auto* t : {&ge(), &kw()}) {
        TempDir d;
        const auto bytes = runtime::export_blob(t->qmodel, t->config.dsp, t->config.runtime, d / "m.tnym");
        EXPECT_EQ(bytes, std::filesystem::file_size(d / "m.tnym"));
        EXPECT_EQ(bytes, quant::budget_report(t->qmodel, t->config.dsp, t->config.runtime).flash_bytes);
        const auto loaded = runtime::load_blob(d / "m.tnym");
        EXPECT_EQ(loaded.model, t->qmodel);
        EXPECT_EQ(loaded.runtime, t->config.runtime);
        EXPECT_EQ(loaded.dsp.layout_id(), t->config.dsp.layout_id());
        for (std::uint64_t s = 0; s < 100; ++s) {
            const auto x = random_features(t->qmodel.topology.input_dim, s, t->params.norm_mean, t->params.norm_std);
            const auto a = quant::q_forward(t->qmodel, x), b = quant::q_forward(loaded.model, x);
            ASSERT_EQ(std::memcmp(a.data(), b.data(), a.size() * sizeof(double)), 0);
        }
        EXPECT_EQ(runtime::encode_blob(loaded.model, loaded.dsp, loaded.runtime), runtime::read_bytes(d / "m.tnym"));
    }
}

TEST(Blob, PayloadCorruptionFailsCrc) {
    const auto good = gesture_blob();
    auto rng = make_rng(1, "corrupt");
    std::uniform_int_distribution<std::size_t> pos(16, good.size() - 1);
    std::uniform_int_distribution<int> bit(0, 7);
    for (int i = 0; i < 20; ++i) {
        auto bad = good;
        bad[pos(rng)] ^= static_cast<std::uint8_t>(1u << bit(rng));
        EXPECT_EQ(decode_error(bad), ErrorCode::CrcMismatch);
    }
}

TEST(Blob, DistinctHeaderErrors) {
    const auto good = gesture_blob();
    try {
        runtime::decode_blob(std::vector<std::uint8_t>{});
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::TruncatedHeader);
        EXPECT_NE(std::string(e.what()).find("truncated header"), std::string::npos);
    }
    auto bad = good;
    bad[0] = 'X';
    try {
        runtime::decode_blob(bad);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::BadMagic);
        EXPECT_NE(std::string(e.what()).find("bad magic"), std::string::npos);
    }
    bad = good;
    bad[4] = 2;
    EXPECT_EQ(decode_error(bad), ErrorCode::UnsupportedVersion);
    bad = good;
    bad.resize(bad.size() - 5);
    EXPECT_EQ(decode_error(bad), ErrorCode::Truncated);
}

TEST(Blob, FormatLimits) {
    auto qm = ge().qmodel;
    qm.topology.input_dim = 70000;
    EXPECT_THROW(runtime::encode_blob(qm, ge().config.dsp, ge().config.runtime), Error);
}

TEST(Actions, FixedMapping) {
    using runtime::Action;
    EXPECT_EQ(runtime::action_map("red"), Action::LedRed);
    EXPECT_EQ(runtime::action_map("green"), Action::LedGreen);
    EXPECT_EQ(runtime::action_map("blue"), Action::LedBlue);
    EXPECT_EQ(runtime::action_map("noise"), Action::None);
    EXPECT_EQ(runtime::action_map("updown"), Action::DirectionUpDown);
    EXPECT_EQ(runtime::action_map("leftright"), Action::DirectionLeftRight);
    EXPECT_EQ(runtime::action_map("circle"), Action::DirectionCircle);
    EXPECT_EQ(runtime::action_map("idle"), Action::None);
    EXPECT_EQ(runtime::to_string(Action::LedRed), "LED_RED");
}

TEST(Actions, UnknownLabelWarns) {
    ScopedWarningCapture cap;
    EXPECT_EQ(runtime::action_map("unknownlabel"), runtime::Action::None);
    EXPECT_EQ(cap.messages().size(), 1u);
}

TEST(Stream, EventLineFormat) {
    EXPECT_EQ(runtime::format_event({32000, "red", 0.73456, runtime::Action::LedRed}), "32000\tred\t0.7346\tLED_RED");
}

TEST(Stream, NoiseProducesNoEvents) {
    runtime::StreamClassifier sc(kw().qmodel, kw().config.dsp, kw().config.runtime);
    const auto noise = dataset::synth_background(5, 30 * 16000);
    EXPECT_TRUE(tinyml::testing::stream_all(sc, noise, 4000).empty());
}

TEST(Stream, RedUtteranceGivesOneEvent) {
    const std::size_t at = 2 * 16000;
    for (std::uint64_t seed : {42u, 1u, 2u, 3u, 4u}) {
        runtime::StreamClassifier sc(kw().qmodel, kw().config.dsp, kw().config.runtime);
        const auto s = tinyml::testing::stream_with_keyword("red", seed, 6.0, at);
        const auto events = tinyml::testing::stream_all(sc, s, 4000);
        ASSERT_EQ(events.size(), 1u) << "seed " << seed;
        EXPECT_EQ(events[0].action, runtime::Action::LedRed);
        EXPECT_GE(events[0].timestamp, at);
        EXPECT_LE(events[0].timestamp, at + 16000 + 4 * 4000);
        EXPECT_GE(events[0].confidence, 0.6);
    }
}

TEST(Stream, EachColorMapsToItsLed) {
    const std::map<std::string, runtime::Action> want{
        {"green", runtime::Action::LedGreen}, {"blue", runtime::Action::LedBlue}};
    for (const auto& [cls, action] : want) {
        runtime::StreamClassifier sc(kw().qmodel, kw().config.dsp, kw().config.runtime);
        const auto events = tinyml::testing::stream_all(sc, tinyml::testing::stream_with_keyword(cls, 7, 5.0, 32000), 4000);
        ASSERT_EQ(events.size(), 1u) << cls;
        EXPECT_EQ(events[0].action, action);
    }
}

TEST(Stream, UnreachableThresholdSilences) {
    auto rt = kw().config.runtime;
    rt.min_confidence = 1.0f;
    runtime::StreamClassifier sc(kw().qmodel, kw().config.dsp, rt);
    auto s = tinyml::testing::stream_with_keyword("red", 42, 6.0, 32000);
    const auto more = tinyml::testing::stream_with_keyword("blue", 3, 4.0, 16000);
    s.insert(s.end(), more.begin(), more.end());
    EXPECT_TRUE(tinyml::testing::stream_all(sc, s, 4000).empty());
}

TEST(Stream, FixedMemorySmootherAndCooldown) {
    runtime::StreamClassifier sc(kw().qmodel, kw().config.dsp, kw().config.runtime);
    const auto cap = sc.buffer_capacity_bytes();
    std::size_t windows = 0;
    sc.set_window_observer([&](const runtime::WindowResult& w) {
        ++windows;
        EXPECT_NEAR(std::accumulate(w.smoothed.begin(), w.smoothed.end(), 0.0), 1.0, 1e-6);
    });
    // utterances every 1.5 s, closer than the window so cooldown and latch are exercised
    std::vector<double> s = dataset::synth_background(9, 20 * 16000);
    const char* words[] = {"red", "green", "blue"};
    for (std::size_t k = 0; k < 12; ++k) {
        const auto w = dataset::synth_keyword(words[k % 3], 100 + k, 1)[0].samples[0];
        std::copy(w.begin(), w.end(), s.begin() + static_cast<std::ptrdiff_t>(16000 + k * 24000));
    }
    std::vector<runtime::ActionEvent> events;
    for (std::size_t off = 0; off < s.size(); off += 1000) {
        auto e = sc.push_samples(std::span<const double>(s).subspan(off, 1000));
        events.insert(events.end(), e.begin(), e.end());
        ASSERT_EQ(sc.buffer_capacity_bytes(), cap);
    }
    EXPECT_EQ(windows, (s.size() - 16000) / 4000 + 1);
    EXPECT_GE(events.size(), 6u);
    for (std::size_t i = 1; i < events.size(); ++i)
        EXPECT_GE(events[i].timestamp - events[i - 1].timestamp, 2u * 4000);
    for (const auto& e : events) EXPECT_GE(e.confidence, 0.6);
}

TEST(Stream, ChunkingInvariance) {
    auto s = tinyml::testing::stream_with_keyword("green", 11, 10.0, 3 * 16000);
    const auto red = dataset::synth_keyword("red", 12, 1)[0].samples[0];
    std::copy(red.begin(), red.end(), s.begin() + 7 * 16000);
    std::vector<std::vector<runtime::ActionEvent>> runs;
    for (std::size_t chunk : {1u, 4000u, 777u, 16000u}) {
        runtime::StreamClassifier sc(kw().qmodel, kw().config.dsp, kw().config.runtime);
        runs.push_back(tinyml::testing::stream_all(sc, s, chunk));
    }
    EXPECT_EQ(runs[0].size(), 2u);
    for (std::size_t i = 1; i < runs.size(); ++i) EXPECT_EQ(runs[i], runs[0]);
}

TEST(Stream, GestureDirections) {
    runtime::StreamClassifier sc(ge().qmodel, ge().config.dsp, ge().config.runtime);
    const auto rec = dataset::synth_gesture("leftright", 5, 1)[0];
    std::vector<double> chunk;
    for (const auto& ch : rec.samples) chunk.insert(chunk.end(), ch.begin(), ch.end());
    const auto events = sc.push_samples(chunk, rec.length());
    ASSERT_EQ(events.size(), 1u);
    EXPECT_EQ(events[0].action, runtime::Action::DirectionLeftRight);
    EXPECT_EQ(events[0].timestamp, 200u);
}

TEST(Stream, OversizedChunkRejected) {
    runtime::StreamClassifier sc(kw().qmodel, kw().config.dsp, kw().config.runtime);
    EXPECT_THROW(sc.push_samples(std::vector<double>(16001)), Error);
}
