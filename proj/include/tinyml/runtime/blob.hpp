/*
 * Copyright 2026 The tinyml-workbench Authors
 *
 * SPDX-License-Identifier: Apache-2.0
 */

#pragma once

#include <algorithm>
#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <span>
#include <string>
#include <vector>

#include <zlib.h>

#include "tinyml/core/error.hpp"
#include "tinyml/dsp/features.hpp"
#include "tinyml/quant/quantize.hpp"

// Deployable model image. All fields little-endian.
//
//   header (16 bytes)
//     magic "TNYM" | version u16 | kind u8 | reserved u8 | payload_len u32 | payload_crc32 u32
//   payload
//     dsp block      tag u8 (0 spectral, 1 mfcc), block fields (f32/u32 in declaration order),
//                    then framing: sample_rate f32 | window_len u32 | stride u32
//     topology       n_layers u8 | (n_layers + 1) x dim u16
//     normalization  norm_mean f32[input_dim] | norm_std f32[input_dim]
//     per layer      weight scale f32 | zero_point i8 | weights i8[out*in] | bias i32[out]
//     activations    (n_layers + 1) x (scale f32 | zero_point i8)
//     labels         count u8 | count x (len u8 | utf-8 bytes)
//     runtime        min_confidence f32 | smoothing K u8 | cooldown u8
namespace tinyml::runtime {

inline constexpr std::array<std::uint8_t, 4> kBlobMagic{0x54, 0x4E, 0x59, 0x4D};  // "TNYM"
inline constexpr std::uint16_t kBlobVersion = 1;
inline constexpr std::size_t kBlobHeaderSize = 16;

struct RuntimeConfig {
    float min_confidence = 0.6f;
    std::size_t smoothing_window = 4;  // K
    std::size_t event_cooldown = 2;    // in windows (hops)

    void validate() const {
        require(min_confidence >= 0.0f && min_confidence <= 1.0f, "min_confidence must lie in [0, 1]");
        require(smoothing_window >= 1 && smoothing_window <= 255, "smoothing window must lie in [1, 255]");
        require(event_cooldown <= 255, "event cooldown must be <= 255");
    }

    friend bool operator==(const RuntimeConfig&, const RuntimeConfig&) = default;
};

struct Blob {
    quant::QuantizedModel model;
    dsp::DspConfig dsp;
    RuntimeConfig runtime;
};

/// Rounds every real-valued DSP field through f32, the precision the blob
/// stores, so an in-memory config compares equal to its reloaded copy.
inline dsp::DspConfig canonicalize(dsp::DspConfig c) {
    auto f = [](double& v) { v = static_cast<double>(static_cast<float>(v)); };
    f(c.sample_rate);
    f(c.spectral.scale);
    f(c.spectral.filter_cutoff);
    return c;
}

inline std::uint32_t crc32_of(std::span<const std::uint8_t> bytes) {
    return static_cast<std::uint32_t>(::crc32(0L, bytes.data(), static_cast<uInt>(bytes.size())));
}

namespace detail {

class Writer {
public:
    template <typename T>
    void put(T v) {
        using U = std::make_unsigned_t<T>;
        const auto u = static_cast<U>(v);
        for (std::size_t i = 0; i < sizeof(T); ++i) out_.push_back(static_cast<std::uint8_t>(u >> (8 * i)));
    }
    void f32(float v) { put(std::bit_cast<std::uint32_t>(v)); }
    void u8(std::size_t v, const char* what) {
        if (v > 0xFF) fail(ErrorCode::FormatLimit, std::string(what) + " exceeds 255");
        put(static_cast<std::uint8_t>(v));
    }
    void u16(std::size_t v, const char* what) {
        if (v > 0xFFFF) fail(ErrorCode::FormatLimit, std::string(what) + " exceeds 65535");
        put(static_cast<std::uint16_t>(v));
    }
    void u32(std::size_t v, const char* what) {
        if (v > 0xFFFFFFFFull) fail(ErrorCode::FormatLimit, std::string(what) + " exceeds u32");
        put(static_cast<std::uint32_t>(v));
    }
    void bytes(const void* p, std::size_t n) {
        const auto* b = static_cast<const std::uint8_t*>(p);
        out_.insert(out_.end(), b, b + n);
    }
    std::vector<std::uint8_t>& out() { return out_; }

private:
    std::vector<std::uint8_t> out_;
};

class Reader {
public:
    explicit Reader(std::span<const std::uint8_t> in) : in_(in) {}

    template <typename T>
    T get() {
        need(sizeof(T));
        using U = std::make_unsigned_t<T>;
        U u = 0;
        for (std::size_t i = 0; i < sizeof(T); ++i) u |= static_cast<U>(static_cast<U>(in_[pos_ + i]) << (8 * i));
        pos_ += sizeof(T);
        return static_cast<T>(u);
    }
    float f32() { return std::bit_cast<float>(get<std::uint32_t>()); }
    std::span<const std::uint8_t> take(std::size_t n) {
        need(n);
        auto s = in_.subspan(pos_, n);
        pos_ += n;
        return s;
    }
    bool done() const { return pos_ == in_.size(); }

private:
    void need(std::size_t n) const {
        if (pos_ + n > in_.size()) fail(ErrorCode::Truncated, "truncated payload");
    }
    std::span<const std::uint8_t> in_;
    std::size_t pos_ = 0;
};

}  // namespace detail

/// Size in bytes of the image encode_blob would produce, computed from shapes
/// alone.
inline std::size_t encoded_size(const quant::QuantizedModel& qm) {
    std::size_t n = kBlobHeaderSize;
    n += 1 + 5 * 4 + 4 + 4 + 4;  // dsp tag, five 4-byte block fields (either kind), framing
    const auto dims = qm.topology.dims();
    n += 1 + 2 * dims.size();
    n += 2 * 4 * qm.topology.input_dim;
    for (std::size_t l = 0; l + 1 < dims.size(); ++l) n += 4 + 1 + dims[l] * dims[l + 1] + 4 * dims[l + 1];
    n += 5 * dims.size();
    n += 1;
    for (const auto& s : qm.labels) n += 1 + s.size();
    n += 4 + 1 + 1;
    return n;
}

inline std::vector<std::uint8_t> encode_blob(const quant::QuantizedModel& qm, const dsp::DspConfig& dsp_cfg,
                                             const RuntimeConfig& rt) {
    dsp_cfg.validate();
    rt.validate();
    const auto dims = qm.topology.dims();
    require(qm.layers.size() == qm.topology.layer_count() && qm.activations.size() == qm.layers.size() + 1,
            "quantized model is incomplete");
    if (dsp_cfg.feature_count() != qm.topology.input_dim)
        fail(ErrorCode::KindMismatch, "DSP feature count " + std::to_string(dsp_cfg.feature_count()) +
                                          " does not match model input_dim " + std::to_string(qm.topology.input_dim));
    require(qm.labels.size() == qm.topology.output_dim, "label table size must equal output_dim");

    detail::Writer w;
    if (dsp_cfg.kind == dataset::Kind::Gesture) {
        const auto& s = dsp_cfg.spectral;
        w.put(std::uint8_t{0});
        w.f32(static_cast<float>(s.scale));
        w.f32(static_cast<float>(s.filter_cutoff));
        w.u32(s.filter_order, "filter_order");
        w.u32(s.fft_len, "fft_len");
        w.u32(s.power_bins, "power_bins");
    } else {
        const auto& m = dsp_cfg.mfcc;
        w.put(std::uint8_t{1});
        w.u32(m.frame_len, "frame_len");
        w.u32(m.frame_stride, "frame_stride");
        w.u32(m.mel_filters, "mel_filters");
        w.u32(m.coefficients, "coefficients");
        w.u32(m.fft_len, "fft_len");
    }
    w.f32(static_cast<float>(dsp_cfg.sample_rate));
    w.u32(dsp_cfg.window_len, "window_len");
    w.u32(dsp_cfg.stride, "stride");

    w.u8(qm.layers.size(), "layer count");
    for (auto d : dims) w.u16(d, "layer dimension");
    for (float v : qm.norm_mean) w.f32(v);
    for (float v : qm.norm_std) w.f32(v);
    for (const auto& l : qm.layers) {
        w.f32(l.weight.scale);
        w.put(l.weight.zero_point);
        w.bytes(l.weights.data(), l.weights.size());
        for (auto b : l.bias) w.put(b);
    }
    for (const auto& a : qm.activations) {
        w.f32(a.scale);
        w.put(a.zero_point);
    }
    w.u8(qm.labels.size(), "label count");
    for (const auto& name : qm.labels) {
        w.u8(name.size(), "label length");
        w.bytes(name.data(), name.size());
    }
    w.f32(rt.min_confidence);
    w.u8(rt.smoothing_window, "smoothing window");
    w.u8(rt.event_cooldown, "event cooldown");

    const auto& payload = w.out();
    detail::Writer h;
    h.bytes(kBlobMagic.data(), kBlobMagic.size());
    h.put(kBlobVersion);
    h.put(static_cast<std::uint8_t>(dsp_cfg.kind));
    h.put(std::uint8_t{0});
    h.u32(payload.size(), "payload length");
    h.put(crc32_of(payload));
    auto out = std::move(h.out());
    out.insert(out.end(), payload.begin(), payload.end());
    return out;
}

inline Blob decode_blob(std::span<const std::uint8_t> bytes) {
    if (bytes.size() < kBlobHeaderSize) fail(ErrorCode::TruncatedHeader, "truncated header");
    if (!std::equal(kBlobMagic.begin(), kBlobMagic.end(), bytes.begin())) fail(ErrorCode::BadMagic, "bad magic");
    detail::Reader hdr(bytes.subspan(4, kBlobHeaderSize - 4));
    const auto version = hdr.get<std::uint16_t>();
    if (version != kBlobVersion)
        fail(ErrorCode::UnsupportedVersion, "unsupported version " + std::to_string(version));
    const auto kind_byte = hdr.get<std::uint8_t>();
    (void)hdr.get<std::uint8_t>();
    const auto payload_len = hdr.get<std::uint32_t>();
    const auto crc = hdr.get<std::uint32_t>();
    if (bytes.size() - kBlobHeaderSize < payload_len) fail(ErrorCode::Truncated, "truncated payload");
    if (bytes.size() - kBlobHeaderSize > payload_len) fail(ErrorCode::Parse, "trailing bytes after payload");
    const auto payload = bytes.subspan(kBlobHeaderSize, payload_len);
    if (crc32_of(payload) != crc) fail(ErrorCode::CrcMismatch, "CRC mismatch");
    if (kind_byte > 1) fail(ErrorCode::Parse, "unknown model kind " + std::to_string(kind_byte));

    Blob blob;
    detail::Reader r(payload);
    auto& d = blob.dsp;
    d.kind = static_cast<dataset::Kind>(kind_byte);
    const auto tag = r.get<std::uint8_t>();
    if (tag != kind_byte) fail(ErrorCode::Parse, "DSP block does not match model kind");
    if (tag == 0) {
        d.spectral.scale = r.f32();
        d.spectral.filter_cutoff = r.f32();
        d.spectral.filter_order = r.get<std::uint32_t>();
        d.spectral.fft_len = r.get<std::uint32_t>();
        d.spectral.power_bins = r.get<std::uint32_t>();
    } else {
        d.mfcc.frame_len = r.get<std::uint32_t>();
        d.mfcc.frame_stride = r.get<std::uint32_t>();
        d.mfcc.mel_filters = r.get<std::uint32_t>();
        d.mfcc.coefficients = r.get<std::uint32_t>();
        d.mfcc.fft_len = r.get<std::uint32_t>();
    }
    d.sample_rate = r.f32();
    d.window_len = r.get<std::uint32_t>();
    d.stride = r.get<std::uint32_t>();

    auto& qm = blob.model;
    const auto n_layers = r.get<std::uint8_t>();
    if (n_layers < 1) fail(ErrorCode::Parse, "model has no layers");
    std::vector<std::size_t> dims;
    for (std::size_t i = 0; i <= n_layers; ++i) dims.push_back(r.get<std::uint16_t>());
    qm.topology.input_dim = dims.front();
    qm.topology.output_dim = dims.back();
    qm.topology.hidden.assign(dims.begin() + 1, dims.end() - 1);
    for (std::size_t i = 0; i < dims.front(); ++i) qm.norm_mean.push_back(r.f32());
    for (std::size_t i = 0; i < dims.front(); ++i) qm.norm_std.push_back(r.f32());
    for (std::size_t l = 0; l < n_layers; ++l) {
        quant::QuantizedLayer q{dims[l], dims[l + 1], {}, {}, {}};
        q.weight.scale = r.f32();
        q.weight.zero_point = r.get<std::int8_t>();
        auto w = r.take(q.in * q.out);
        q.weights.assign(reinterpret_cast<const std::int8_t*>(w.data()),
                         reinterpret_cast<const std::int8_t*>(w.data()) + w.size());
        for (std::size_t o = 0; o < q.out; ++o) q.bias.push_back(r.get<std::int32_t>());
        qm.layers.push_back(std::move(q));
    }
    for (std::size_t b = 0; b <= n_layers; ++b) {
        quant::QuantParams a;
        a.scale = r.f32();
        a.zero_point = r.get<std::int8_t>();
        qm.activations.push_back(a);
    }
    const auto n_labels = r.get<std::uint8_t>();
    for (std::size_t i = 0; i < n_labels; ++i) {
        const auto len = r.get<std::uint8_t>();
        auto s = r.take(len);
        qm.labels.emplace_back(reinterpret_cast<const char*>(s.data()), s.size());
    }
    blob.runtime.min_confidence = r.f32();
    blob.runtime.smoothing_window = r.get<std::uint8_t>();
    blob.runtime.event_cooldown = r.get<std::uint8_t>();
    if (!r.done()) fail(ErrorCode::Parse, "unparsed bytes at end of payload");

    if (qm.labels.size() != qm.topology.output_dim) fail(ErrorCode::Parse, "label table does not match output_dim");
    try {
        d.validate();
        blob.runtime.validate();
    } catch (const Error& e) {
        fail(ErrorCode::Parse, std::string("invalid configuration in blob: ") + e.what());
    }
    if (d.feature_count() != qm.topology.input_dim) fail(ErrorCode::Parse, "DSP feature count does not match model");
    return blob;
}

/// Writes the blob and returns its size in bytes.
inline std::size_t export_blob(const quant::QuantizedModel& qm, const dsp::DspConfig& dsp_cfg,
                               const RuntimeConfig& rt, const std::filesystem::path& path) {
    const auto bytes = encode_blob(qm, dsp_cfg, rt);
    std::ofstream f(path, std::ios::binary);
    if (!f || !f.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size())))
        fail(ErrorCode::Io, "cannot write '" + path.string() + "'");
    return bytes.size();
}

inline std::vector<std::uint8_t> read_bytes(const std::filesystem::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) fail(ErrorCode::Io, "cannot open '" + path.string() + "'");
    return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

inline Blob load_blob(const std::filesystem::path& path) { return decode_blob(read_bytes(path)); }

}  // namespace tinyml::runtime
