/*
 * Copyright 2026 The tinyml-workbench Authors
 *
 * SPDX-License-Identifier: Apache-2.0
 */

#include <gtest/gtest.h>

#include <cstdio>
#include <sys/wait.h>

#include "support.hpp"

using namespace tinyml;
using tinyml::testing::TempDir;
namespace fs = std::filesystem;

namespace {

struct Result {
    int status = -1;
    std::string out;
};

Result cli(const std::string& args, const fs::path& cwd) {
    const std::string cmd = "cd '" + cwd.string() + "' && '" TINYML_CLI "' " + args + " 2>&1";
    Result r;
    FILE* p = ::popen(cmd.c_str(), "r");
    if (!p) return r;
    char buf[4096];
    std::size_t n;
    while ((n = std::fread(buf, 1, sizeof buf, p)) > 0) r.out.append(buf, n);
    const int st = ::pclose(p);
    r.status = WIFEXITED(st) ? WEXITSTATUS(st) : -1;
    return r;
}

std::size_t count_files(const fs::path& root, std::size_t* dirs = nullptr) {
    std::size_t files = 0, d = 0;
    for (const auto& e : fs::recursive_directory_iterator(root)) {
        if (e.is_regular_file()) ++files;
        if (e.is_directory()) ++d;
    }
    if (dirs) *dirs = d;
    return files;
}

std::size_t count_lines_with(const std::string& text, const std::string& needle) {
    std::size_t n = 0;
    std::istringstream is(text);
    for (std::string line; std::getline(is, line);) n += line.find(needle) != std::string::npos;
    return n;
}

}  // namespace

TEST(Cli, SynthWritesPerClassFilesDeterministically) {
    TempDir d;
    ASSERT_EQ(cli("synth --kind gesture --out a --count 40 --seed 42", d.path()).status, 0);
    ASSERT_EQ(cli("synth --kind gesture --out b --count 40 --seed 42", d.path()).status, 0);
    std::size_t dirs = 0;
    EXPECT_EQ(count_files(d / "a", &dirs), 160u);
    EXPECT_EQ(dirs, 4u);
    for (const auto& e : fs::recursive_directory_iterator(d / "a")) {
        if (!e.is_regular_file()) continue;
        const auto other = d / "b" / fs::relative(e.path(), d / "a");
        EXPECT_EQ(pipeline::read_text(e.path()), pipeline::read_text(other)) << e.path();
    }
}

TEST(Cli, SynthZeroCountIsUserError) {
    TempDir d;
    const auto r = cli("synth --kind keyword --out x --count 0", d.path());
    EXPECT_EQ(r.status, 1);
    EXPECT_NE(r.out.find("error"), std::string::npos);
}

TEST(Cli, GestureWorkflow) {
    TempDir d;
    ASSERT_EQ(cli("synth --kind gesture --out data --count 40 --write-config p.json", d.path()).status, 0);
    EXPECT_EQ(cli("--config p.json ingest", d.path()).status, 0);
    EXPECT_EQ(cli("--config p.json split", d.path()).status, 0);
    EXPECT_EQ(cli("--config p.json features", d.path()).status, 0);
    EXPECT_TRUE(fs::exists(d / "out/gesture/features.json"));

    const auto train = cli("--config p.json train", d.path());
    ASSERT_EQ(train.status, 0) << train.out;
    const auto report = nlohmann::json::parse(pipeline::read_text(d / "out/gesture/report.json"));
    EXPECT_GE(report["accuracy"].get<double>(), 0.90);
    EXPECT_EQ(report["confusion"].size(), 4u);
    for (const char* l : {"circle", "idle", "leftright", "updown"})
        EXPECT_NE(train.out.find(std::string("\n") + l), std::string::npos) << l;
    EXPECT_EQ(cli("--config p.json test", d.path()).status, 0);

    const auto q = cli("--config p.json quantize", d.path());
    ASSERT_EQ(q.status, 0) << q.out;
    const auto budget = nlohmann::json::parse(pipeline::read_text(d / "out/gesture/budget.json"));
    EXPECT_TRUE(budget["fits"].get<bool>());
    EXPECT_EQ(budget["flash_bytes"].get<std::size_t>(), fs::file_size(d / "out/gesture/model.tnym"));

    EXPECT_EQ(cli("--config p.json bench", d.path()).status, 0);
    EXPECT_EQ(cli("--config p.json export --out m.h", d.path()).status, 0);
    EXPECT_NE(pipeline::read_text(d / "m.h").find("tinyml_model[]"), std::string::npos);

    const auto run = cli("--config p.json run --input data/updown/updown_000.csv", d.path());
    EXPECT_EQ(run.status, 0);
    EXPECT_EQ(count_lines_with(run.out, "DIRECTION_UPDOWN"), 1u) << run.out;

    dataset::write_wav_recording(dataset::synth_tone(440.0, 1.0, 16000.0, 0.5), d / "tone.wav");
    const auto mismatch = cli("--config p.json run --input tone.wav", d.path());
    EXPECT_EQ(mismatch.status, 1);
    EXPECT_NE(mismatch.out.find("kind mismatch"), std::string::npos);
}

TEST(Cli, OneClassDatasetFailsBeforeTraining) {
    TempDir d;
    ASSERT_EQ(cli("synth --kind gesture --out data --count 5 --write-config p.json", d.path()).status, 0);
    for (const char* l : {"circle", "idle", "leftright"}) fs::remove_all(d / "data" / l);
    const auto r = cli("--config p.json train", d.path());
    EXPECT_EQ(r.status, 1);
    EXPECT_NE(r.out.find("class"), std::string::npos);
    EXPECT_FALSE(fs::exists(d / "out/gesture/model.json"));
}

TEST(Cli, KeywordRunAndChunking) {
    TempDir d;
    ASSERT_EQ(cli("synth --kind keyword --out data --count 40 --write-config p.json", d.path()).status, 0);
    ASSERT_EQ(cli("--config p.json train", d.path()).status, 0);
    ASSERT_EQ(cli("--config p.json quantize", d.path()).status, 0);

    dataset::Recording rec{"", 16000.0, {tinyml::testing::stream_with_keyword("red", 42, 5.0, 32000)}, ""};
    dataset::write_wav_recording(rec, d / "red.wav");
    const auto a = cli("run --blob out/keyword/model.tnym --input red.wav", d.path());
    const auto b = cli("run --blob out/keyword/model.tnym --input red.wav --chunk 1", d.path());
    ASSERT_EQ(a.status, 0) << a.out;
    EXPECT_EQ(count_lines_with(a.out, "LED_RED"), 1u) << a.out;
    EXPECT_EQ(a.out, b.out);

    const auto v = cli("run --blob out/keyword/model.tnym --input red.wav --verbose", d.path());
    EXPECT_GT(count_lines_with(v.out, "# "), 10u);

    const auto gesture_csv = d / "g.csv";
    dataset::write_csv_recording(dataset::synth_gesture("circle", 1, 1)[0], gesture_csv);
    const auto mismatch = cli("run --blob out/keyword/model.tnym --input g.csv", d.path());
    EXPECT_EQ(mismatch.status, 1);
    EXPECT_NE(mismatch.out.find("kind mismatch"), std::string::npos);
}

TEST(Cli, BenchOversizedModelExitsTwo) {
    TempDir d;
    const auto r = cli("bench --kind keyword --hidden 1024,256", d.path());
    EXPECT_EQ(r.status, 2) << r.out;
    EXPECT_NE(r.out.find("false"), std::string::npos);
    EXPECT_EQ(cli("bench --kind gesture --hidden 20,10", d.path()).status, 0);
}

TEST(Cli, MissingConfigIsUserError) {
    TempDir d;
    EXPECT_EQ(cli("train", d.path()).status, 1);
    EXPECT_EQ(cli("--config nope.json train", d.path()).status, 1);
}
