/*
 * Copyright 2026 The tinyml-workbench Authors
 *
 * SPDX-License-Identifier: Apache-2.0
 */

#pragma once

#include <algorithm>
#include <cstdint>
#include <iomanip>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>

#include "tinyml/dsp/features.hpp"
#include "tinyml/quant/quantize.hpp"
#include "tinyml/runtime/blob.hpp"

namespace tinyml::quant {

// Target board: 1 MB flash, 256 KB RAM.
inline constexpr std::size_t kFlashBudget = 1'048'576;
inline constexpr std::size_t kRamBudget = 262'144;

/// Memory estimate for the deployed model. Sizes assume the target's 32-bit
/// floats. The loader materializes every tensor, so weights count against
/// RAM as well as flash.
struct BudgetReport {
    std::size_t flash_bytes = 0;
    std::size_t tensor_bytes = 0;      // int8 weights, int32 biases, f32 norm vectors, quant params
    std::size_t window_bytes = 0;      // sample ring buffer
    std::size_t dsp_scratch_bytes = 0; // FFT frame, spectra, feature vector
    std::size_t activation_bytes = 0;  // two int8 ping-pong buffers + int32 accumulators
    std::size_t smoother_bytes = 0;    // K probability vectors
    std::size_t ram_bytes = 0;
    bool fits = false;
};

inline BudgetReport budget_report(const QuantizedModel& qm, const dsp::DspConfig& dsp_cfg,
                                  const runtime::RuntimeConfig& rt) {
    BudgetReport r;
    r.flash_bytes = runtime::encoded_size(qm);

    const auto dims = qm.topology.dims();
    std::size_t widest = 0;
    for (auto d : dims) widest = std::max(widest, d);
    for (std::size_t l = 0; l + 1 < dims.size(); ++l) r.tensor_bytes += dims[l] * dims[l + 1] + 4 * dims[l + 1] + 5;
    r.tensor_bytes += 2 * 4 * qm.topology.input_dim + 5 * dims.size();

    r.window_bytes = 4 * dsp_cfg.channels() * dsp_cfg.window_len;
    const std::size_t features = 4 * qm.topology.input_dim;
    if (dsp_cfg.kind == dataset::Kind::Gesture) {
        const auto n = dsp_cfg.spectral.fft_len;
        r.dsp_scratch_bytes = 4 * dsp_cfg.window_len + 8 * n + 8 * (n / 2 + 1) + features;
    } else {
        const auto& m = dsp_cfg.mfcc;
        r.dsp_scratch_bytes = 8 * m.fft_len + 4 * (m.fft_len / 2 + 1) + 4 * m.mel_filters + features;
    }
    r.activation_bytes = 2 * widest + 4 * widest;
    r.smoother_bytes = 4 * rt.smoothing_window * qm.topology.output_dim;
    r.ram_bytes = r.tensor_bytes + r.window_bytes + r.dsp_scratch_bytes + r.activation_bytes + r.smoother_bytes;
    r.fits = r.flash_bytes <= kFlashBudget && r.ram_bytes <= kRamBudget;
    return r;
}

inline std::string format_budget(const BudgetReport& r) {
    std::ostringstream os;
    auto line = [&](const char* name, std::size_t v, std::size_t budget = 0) {
        os << std::left << std::setw(20) << name << std::right << std::setw(10) << v;
        if (budget) os << " / " << std::setw(9) << budget << "  (" << std::fixed << std::setprecision(2)
                       << 100.0 * static_cast<double>(v) / static_cast<double>(budget) << "%)";
        os << "\n";
    };
    line("flash_bytes", r.flash_bytes, kFlashBudget);
    line("ram_bytes", r.ram_bytes, kRamBudget);
    line("  tensors", r.tensor_bytes);
    line("  window", r.window_bytes);
    line("  dsp_scratch", r.dsp_scratch_bytes);
    line("  activations", r.activation_bytes);
    line("  smoother", r.smoother_bytes);
    os << std::left << std::setw(20) << "fits" << std::right << std::setw(10) << (r.fits ? "true" : "false") << "\n";
    return os.str();
}

inline nlohmann::ordered_json budget_json(const BudgetReport& r) {
    return {{"flash_bytes", r.flash_bytes},       {"ram_bytes", r.ram_bytes},
            {"flash_budget", kFlashBudget},        {"ram_budget", kRamBudget},
            {"tensor_bytes", r.tensor_bytes},      {"window_bytes", r.window_bytes},
            {"dsp_scratch_bytes", r.dsp_scratch_bytes}, {"activation_bytes", r.activation_bytes},
            {"smoother_bytes", r.smoother_bytes},  {"fits", r.fits}};
}

}  // namespace tinyml::quant
