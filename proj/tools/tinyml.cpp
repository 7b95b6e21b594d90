/*
 * Copyright 2026 The tinyml-workbench Authors
 *
 * SPDX-License-Identifier: Apache-2.0
 */

// Command-line front end for the workbench. Exit status: 0 success,
// 1 user or validation error, 2 accuracy or budget bar not met.

#include <cstdio>
#include <fstream>
#include <iomanip>
#include <map>
#include <set>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "tinyml/tinyml.hpp"

namespace {

using namespace tinyml;
namespace fs = std::filesystem;
using pipeline::json;

constexpr int kExitOk = 0;
constexpr int kExitUser = 1;
constexpr int kExitBar = 2;

struct Globals {
    std::string config;
    std::optional<std::uint64_t> seed;
    bool verbose = false;
};

pipeline::ProjectConfig project(const Globals& g) {
    if (g.config.empty()) fail(ErrorCode::InvalidArgument, "--config is required for this command");
    auto c = pipeline::load_project_config(g.config);
    if (g.seed) c.set_seed(*g.seed);
    return c;
}

void write_json(const fs::path& path, const json& j) { pipeline::write_text(path, j.dump(2) + "\n"); }

fs::path model_path(const pipeline::ProjectConfig& c, const std::string& override_path) {
    return override_path.empty() ? c.work_dir / "model.json" : fs::path(override_path);
}

fs::path blob_path(const pipeline::ProjectConfig& c) { return c.work_dir / "model.tnym"; }

// ---- synth ----------------------------------------------------------------

struct SynthArgs {
    std::string kind;
    std::string out;
    std::size_t count = 40;
    std::string write_config;
};

int cmd_synth(const Globals& g, const SynthArgs& a) {
    std::optional<pipeline::ProjectConfig> cfg;
    if (!g.config.empty()) cfg = project(g);
    const auto kind = !a.kind.empty() ? dataset::parse_kind(a.kind)
                      : cfg ? cfg->kind
                            : (fail(ErrorCode::InvalidArgument, "--kind is required without --config"), dataset::Kind{});
    const fs::path out = !a.out.empty() ? fs::path(a.out)
                         : cfg ? cfg->dataset_root
                               : (fail(ErrorCode::InvalidArgument, "--out is required without --config"), fs::path{});
    const std::uint64_t seed = g.seed.value_or(cfg ? cfg->split.seed : 42);
    if (a.count == 0) fail(ErrorCode::InvalidArgument, "--count must be >= 1");
    const auto n = pipeline::synthesize(kind, out, a.count, seed);
    std::cout << "wrote " << n << " recordings to " << out.string() << "\n";

    if (!a.write_config.empty()) {
        auto c = pipeline::ProjectConfig::defaults(kind, seed);
        const fs::path cfg_path = a.write_config;
        const auto base = fs::absolute(cfg_path).parent_path();
        c.dataset_root = fs::absolute(out).lexically_relative(base);
        c.work_dir = fs::path("out") / dataset::to_string(kind);
        pipeline::write_config(c, cfg_path);
        std::cout << "wrote config " << cfg_path.string() << "\n";
    }
    return kExitOk;
}

// ---- ingest / split / features -------------------------------------------

int cmd_ingest(const Globals& g) {
    const auto c = project(g);
    const auto ds = pipeline::load_dataset(c);
    std::map<std::string, std::pair<std::size_t, std::size_t>> counts;  // recordings, windows
    std::map<std::string, std::set<std::string>> sources;
    for (const auto& w : ds.windows) {
        sources[w.label].insert(w.origin.source_id);
        ++counts[w.label].second;
    }
    json j;
    j["kind"] = dataset::to_string(c.kind);
    j["layout_id"] = c.dsp.layout_id();
    j["labels"] = json::array();
    std::ostringstream os;
    os << "kind " << dataset::to_string(c.kind) << ", " << ds.labels.size() << " classes, " << ds.windows.size()
       << " windows\n";
    for (const auto& l : ds.labels) {
        const auto recs = sources[l].size();
        const auto wins = counts[l].second;
        os << "  " << l << ": " << recs << " recordings, " << wins << " windows\n";
        j["labels"].push_back({{"label", l}, {"recordings", recs}, {"windows", wins}});
    }
    std::cout << os.str();
    write_json(c.work_dir / "dataset.json", j);
    return kExitOk;
}

int cmd_split(const Globals& g) {
    const auto c = project(g);
    const auto ds = pipeline::load_dataset(c);
    const auto [train, test] = dataset::split(ds, c.split);
    pipeline::write_text(c.work_dir / "split.csv", pipeline::split_manifest(c, train, test));
    for (const auto& l : ds.labels) {
        auto count = [&](const dataset::Dataset& d) {
            return std::count_if(d.windows.begin(), d.windows.end(), [&](const auto& w) { return w.label == l; });
        };
        std::cout << l << ": train " << count(train) << ", test " << count(test) << "\n";
    }
    std::cout << "wrote " << (c.work_dir / "split.csv").string() << "\n";
    return kExitOk;
}

int cmd_features(const Globals& g) {
    const auto c = project(g);
    const auto data = pipeline::prepare(c);
    pipeline::write_text(c.work_dir / "features_train.csv", pipeline::features_csv(data.train_features));
    pipeline::write_text(c.work_dir / "features_test.csv", pipeline::features_csv(data.test_features));
    write_json(c.work_dir / "features.json", {{"layout_id", c.dsp.layout_id()},
                                              {"feature_count", c.dsp.feature_count()},
                                              {"labels", data.train_features.labels},
                                              {"train_rows", data.train_features.size()},
                                              {"test_rows", data.test_features.size()}});
    std::cout << "layout " << c.dsp.layout_id() << ": " << data.train_features.size() << " train rows, "
              << data.test_features.size() << " test rows\n";
    return kExitOk;
}

// ---- train / test ---------------------------------------------------------

void write_report(const fs::path& dir, const std::string& stem, const model::EvalReport& r) {
    pipeline::write_text(dir / (stem + ".txt"), model::format_report(r));
    write_json(dir / (stem + ".json"), model::report_json(r));
}

int cmd_train(const Globals& g) {
    const auto c = project(g);
    const auto data = pipeline::prepare(c);
    const auto out = pipeline::train_and_test(c, data);
    if (g.verbose)
        for (const auto& e : out.result.history)
            std::cerr << "epoch " << e.epoch << " loss " << e.loss << " accuracy " << e.accuracy << "\n";
    pipeline::save_model(out.result.params, c, c.work_dir / "model.json");
    pipeline::write_text(c.work_dir / "history.csv", pipeline::history_csv(out.result.history));
    pipeline::write_text(c.work_dir / "split.csv", pipeline::split_manifest(c, data.train, data.test));
    write_report(c.work_dir, "report", out.report);
    std::cout << model::format_report(out.report);
    if (out.result.below_threshold)
        std::cout << "note: " << out.result.below_threshold << " training rows have top probability below "
                  << c.train.confidence_threshold << "\n";
    if (!out.passed) {
        std::cout << "FAIL: accuracy " << out.report.accuracy << " below bar " << c.accuracy_bar << "\n";
        return kExitBar;
    }
    return kExitOk;
}

int cmd_test(const Globals& g, const std::string& model_override, std::optional<double> min_conf) {
    auto c = project(g);
    if (min_conf) c.min_confidence = *min_conf;
    const auto p = pipeline::load_model(model_path(c, model_override), c);
    const auto data = pipeline::prepare(c);
    const auto r = model::evaluate(p, data.test_features, c.min_confidence);
    write_report(c.work_dir, "test_report", r);
    std::cout << model::format_report(r);
    if (r.accuracy < c.accuracy_bar) {
        std::cout << "FAIL: accuracy " << r.accuracy << " below bar " << c.accuracy_bar << "\n";
        return kExitBar;
    }
    return kExitOk;
}

// ---- quantize / export ----------------------------------------------------

int cmd_quantize(const Globals& g, const std::string& model_override) {
    const auto c = project(g);
    const auto p = pipeline::load_model(model_path(c, model_override), c);
    const auto data = pipeline::prepare(c);
    const auto q = pipeline::quantize_project(c, p, data);
    const auto bytes = runtime::export_blob(q.model, c.dsp, c.runtime, blob_path(c));
    require(bytes == q.budget.flash_bytes, "blob size differs from budget flash figure");

    pipeline::write_text(c.work_dir / "budget.txt", quant::format_budget(q.budget));
    write_json(c.work_dir / "budget.json", quant::budget_json(q.budget));
    write_report(c.work_dir, "quant_report", q.quant_report);
    const double drop = q.float_report.accuracy - q.quant_report.accuracy;
    json summary;
    summary["float_accuracy"] = q.float_report.accuracy;
    summary["quantized_accuracy"] = q.quant_report.accuracy;
    summary["accuracy_drop"] = drop;
    summary["argmax_agreement"] = q.argmax_agreement;
    summary["max_probability_delta"] = q.max_probability_delta;
    summary["fits"] = q.budget.fits;
    write_json(c.work_dir / "quant_summary.json", summary);

    std::cout << quant::format_budget(q.budget);
    std::cout << "float accuracy " << pipeline::fmt(q.float_report.accuracy) << ", quantized accuracy "
              << pipeline::fmt(q.quant_report.accuracy) << ", argmax agreement "
              << pipeline::fmt(q.argmax_agreement) << "\n";
    std::cout << "wrote " << blob_path(c).string() << " (" << bytes << " bytes)\n";
    if (!q.budget.fits) {
        std::cout << "FAIL: model does not fit the device budget\n";
        return kExitBar;
    }
    if (drop > c.max_quantized_drop + 1e-12) {
        std::cout << "FAIL: quantized accuracy drop " << drop << " exceeds " << c.max_quantized_drop << "\n";
        return kExitBar;
    }
    return kExitOk;
}

int cmd_export(const Globals& g, std::string blob, std::string out, const std::string& symbol) {
    if (blob.empty()) blob = blob_path(project(g)).string();
    const auto bytes = runtime::read_bytes(blob);
    (void)runtime::decode_blob(bytes);  // refuse to export a damaged image
    if (out.empty()) out = (fs::path(blob).replace_extension(".h")).string();
    pipeline::write_text(out, pipeline::blob_c_header(bytes, symbol));
    std::cout << "wrote " << out << " (" << bytes.size() << " bytes of model)\n";
    return kExitOk;
}

// ---- run ------------------------------------------------------------------

void print_events(const std::vector<runtime::ActionEvent>& events) {
    for (const auto& e : events) std::cout << runtime::format_event(e) << "\n";
}

void stream_recording(runtime::StreamClassifier& sc, const dataset::Recording& rec, std::size_t chunk) {
    std::vector<double> buf;
    for (std::size_t off = 0; off < rec.length(); off += chunk) {
        const auto n = std::min(chunk, rec.length() - off);
        buf.clear();
        for (const auto& ch : rec.samples) buf.insert(buf.end(), ch.begin() + off, ch.begin() + off + n);
        print_events(sc.push_samples(buf, n));
    }
}

// One frame per line, values separated by commas or whitespace.
void stream_text(runtime::StreamClassifier& sc, std::istream& in, std::size_t chunk) {
    const auto ch = sc.channels();
    std::vector<std::vector<double>> pending(ch);
    auto flush = [&] {
        if (pending[0].empty()) return;
        std::vector<double> buf;
        for (const auto& p : pending) buf.insert(buf.end(), p.begin(), p.end());
        print_events(sc.push_samples(buf, pending[0].size()));
        for (auto& p : pending) p.clear();
    };
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        for (auto& c : line)
            if (c == ',' || c == '\t' || c == ';') c = ' ';
        std::istringstream ls(line);
        std::vector<double> vals;
        std::string tok;
        while (ls >> tok) {
            double v = 0.0;
            if (!dataset::detail::parse_double(tok, v) || !std::isfinite(v))
                fail(ErrorCode::Parse, "line " + std::to_string(lineno) + ": not a number '" + tok + "'");
            vals.push_back(v);
        }
        if (vals.empty()) continue;
        if (vals.size() != ch)
            fail(ErrorCode::KindMismatch, "kind mismatch: line " + std::to_string(lineno) + " has " +
                                              std::to_string(vals.size()) + " values, model expects " +
                                              std::to_string(ch) + " per frame");
        for (std::size_t c = 0; c < ch; ++c) pending[c].push_back(vals[c]);
        if (pending[0].size() == chunk) flush();
    }
    flush();
}

struct RunArgs {
    std::string blob;
    std::string input;
    std::size_t chunk = 0;
    std::optional<double> min_conf;
};

int cmd_run(const Globals& g, const RunArgs& a) {
    std::string blob = a.blob;
    if (blob.empty()) blob = blob_path(project(g)).string();
    auto b = runtime::load_blob(blob);
    if (a.min_conf) b.runtime.min_confidence = static_cast<float>(*a.min_conf);
    runtime::StreamClassifier sc(b);
    const std::size_t chunk = a.chunk == 0 ? sc.stride() : a.chunk;
    if (chunk > sc.window_len())
        fail(ErrorCode::InvalidArgument, "--chunk " + std::to_string(chunk) + " exceeds one window (" +
                                             std::to_string(sc.window_len()) + " samples)");
    if (g.verbose) {
        std::cout << "# window\t" << [&] {
            std::string s;
            for (std::size_t i = 0; i < sc.labels().size(); ++i) s += (i ? "\t" : "") + sc.labels()[i];
            return s;
        }() << "\n";
        sc.set_window_observer([](const runtime::WindowResult& w) {
            std::ostringstream os;
            os << "# " << w.timestamp << std::fixed << std::setprecision(4);
            for (double p : w.smoothed) os << '\t' << p;
            std::cout << os.str() << "\n";
        });
    }

    const auto kind = b.dsp.kind;
    if (a.input == "-") {
        stream_text(sc, std::cin, chunk);
        return kExitOk;
    }
    const fs::path in = a.input;
    const auto ext = in.extension().string();
    if (ext == ".wav") {
        if (kind != dataset::Kind::Keyword)
            fail(ErrorCode::KindMismatch, "kind mismatch: " + dataset::to_string(kind) +
                                              " model cannot take WAV audio input");
        const auto rec = dataset::load_wav_recording(in, "");
        if (rec.sample_rate != b.dsp.sample_rate)
            fail(ErrorCode::InvalidArgument, "input is " + pipeline::fmt(rec.sample_rate) + " Hz, model expects " +
                                                 pipeline::fmt(b.dsp.sample_rate) + " Hz");
        stream_recording(sc, rec, chunk);
    } else if (ext == ".csv") {
        if (kind != dataset::Kind::Gesture)
            fail(ErrorCode::KindMismatch, "kind mismatch: " + dataset::to_string(kind) +
                                              " model cannot take accelerometer CSV input");
        stream_recording(sc, dataset::load_csv_recording(in, "", b.dsp.sample_rate), chunk);
    } else {
        std::ifstream f(in);
        if (!f) fail(ErrorCode::Io, "cannot open '" + in.string() + "'");
        stream_text(sc, f, chunk);
    }
    return kExitOk;
}

// ---- bench ----------------------------------------------------------------

struct BenchArgs {
    std::string blob;
    std::string kind;
    std::vector<std::size_t> hidden;
    std::size_t classes = 4;
};

quant::QuantizedModel fabricate(const dsp::DspConfig& dsp, const std::vector<std::size_t>& hidden,
                                std::size_t classes, std::uint64_t seed) {
    model::Topology t{dsp.feature_count(), hidden, classes};
    auto p = model::init(t, seed);
    for (std::size_t k = 0; k < classes; ++k) p.labels.push_back("class" + std::to_string(k));
    Matrix<double> calib(16, t.input_dim);
    auto rng = make_rng(seed, "bench");
    std::normal_distribution<double> n(0.0, 1.0);
    for (std::size_t r = 0; r < calib.rows(); ++r)
        for (auto& v : calib.row(r)) v = n(rng);
    return quant::quantize(p, quant::calibrate(p, calib));
}

int cmd_bench(const Globals& g, const BenchArgs& a) {
    quant::BudgetReport r;
    if (!a.hidden.empty()) {
        std::optional<pipeline::ProjectConfig> cfg;
        if (!g.config.empty()) cfg = project(g);
        const auto kind = !a.kind.empty() ? dataset::parse_kind(a.kind)
                          : cfg ? cfg->kind
                                : (fail(ErrorCode::InvalidArgument, "--kind or --config needed with --hidden"),
                                   dataset::Kind{});
        const auto dsp = cfg && cfg->kind == kind ? cfg->dsp : runtime::canonicalize(dsp::DspConfig::defaults_for(kind));
        const auto rt = cfg ? cfg->runtime : runtime::RuntimeConfig{};
        const auto qm = fabricate(dsp, a.hidden, a.classes, g.seed.value_or(42));
        r = quant::budget_report(qm, dsp, rt);
    } else {
        const std::string path = !a.blob.empty() ? a.blob : blob_path(project(g)).string();
        const auto b = runtime::load_blob(path);
        r = quant::budget_report(b.model, b.dsp, b.runtime);
    }
    std::cout << quant::format_budget(r);
    if (g.verbose) std::cout << quant::budget_json(r).dump(2) << "\n";
    return r.fits ? kExitOk : kExitBar;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"TinyML workbench: synthesize, train, quantize, export and stream small classifiers"};
    app.require_subcommand(1);
    app.fallthrough();
    Globals g;
    std::uint64_t seed = 0;
    app.add_option("--config", g.config, "project config file (JSON)");
    auto* seed_opt = app.add_option("--seed", seed, "override every seed in the config");
    app.add_flag("--verbose,-v", g.verbose, "extra diagnostics");

    SynthArgs sa;
    auto* synth = app.add_subcommand("synth", "write a synthetic labeled dataset");
    synth->add_option("--kind", sa.kind, "gesture | keyword");
    synth->add_option("--out", sa.out, "output directory (default: config dataset_root)");
    synth->add_option("--count", sa.count, "recordings per class")->capture_default_str();
    synth->add_option("--write-config", sa.write_config, "also write a default project config here");

    auto* ingest = app.add_subcommand("ingest", "load and validate the dataset, summarize per class");
    auto* split = app.add_subcommand("split", "write the train/test split manifest");
    auto* features = app.add_subcommand("features", "extract feature tables for both splits");

    auto* train = app.add_subcommand("train", "train, evaluate on the test split, save the float model");

    std::string model_override;
    std::optional<double> test_conf;
    auto* test = app.add_subcommand("test", "evaluate a saved float model on the test split");
    test->add_option("--model", model_override, "float model file (default: <work_dir>/model.json)");
    test->add_option("--min-confidence", test_conf, "override the rejection threshold");

    auto* quantize = app.add_subcommand("quantize", "int8-quantize, export the blob, report the budget");
    quantize->add_option("--model", model_override, "float model file (default: <work_dir>/model.json)");

    std::string ex_blob, ex_out, ex_symbol = "tinyml_model";
    auto* exp = app.add_subcommand("export", "render a blob as a C header");
    exp->add_option("--blob", ex_blob, "blob file (default: <work_dir>/model.tnym)");
    exp->add_option("--out", ex_out, "header path (default: blob path with .h)");
    exp->add_option("--symbol", ex_symbol, "array name")->capture_default_str();

    RunArgs ra;
    auto* run = app.add_subcommand("run", "stream samples through a blob and print action events");
    run->add_option("--blob", ra.blob, "blob file (default: <work_dir>/model.tnym)");
    run->add_option("--input", ra.input, "WAV, CSV, or text frames; '-' reads stdin")->required();
    run->add_option("--chunk", ra.chunk, "samples per push (default: stride)");
    run->add_option("--min-confidence", ra.min_conf, "override the blob's event threshold");

    BenchArgs ba;
    auto* bench = app.add_subcommand("bench", "report flash and RAM against the device budget");
    bench->add_option("--blob", ba.blob, "blob file (default: <work_dir>/model.tnym)");
    bench->add_option("--kind", ba.kind, "gesture | keyword, with --hidden");
    bench->add_option("--hidden", ba.hidden, "hidden sizes of a fabricated model, e.g. 512,256")->delimiter(',');
    bench->add_option("--classes", ba.classes, "output classes of a fabricated model")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kExitOk : kExitUser;
    }
    if (*seed_opt) g.seed = seed;

    tinyml::set_warning_sink([](std::string_view m) { std::cerr << "warning: " << m << "\n"; });
    try {
        if (*synth) return cmd_synth(g, sa);
        if (*ingest) return cmd_ingest(g);
        if (*split) return cmd_split(g);
        if (*features) return cmd_features(g);
        if (*train) return cmd_train(g);
        if (*test) return cmd_test(g, model_override, test_conf);
        if (*quantize) return cmd_quantize(g, model_override);
        if (*exp) return cmd_export(g, ex_blob, ex_out, ex_symbol);
        if (*run) return cmd_run(g, ra);
        if (*bench) return cmd_bench(g, ba);
    } catch (const tinyml::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUser;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUser;
    }
    return kExitUser;
}
