/*
 * Copyright 2026 The tinyml-workbench Authors
 *
 * SPDX-License-Identifier: Apache-2.0
 */

#pragma once

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <sstream>
#include <string>
#include <vector>

#include "tinyml/core/error.hpp"

namespace tinyml::dataset {

/// A labeled multi-channel time series. Samples are channel-major:
/// samples[c][t].
struct Recording {
    std::string label;
    double sample_rate = 0.0;
    std::vector<std::vector<double>> samples;
    std::string source_id;

    std::size_t channels() const { return samples.size(); }
    std::size_t length() const { return samples.empty() ? 0 : samples.front().size(); }

    void validate() const {
        require(sample_rate > 0.0, "recording '" + source_id + "': sample_rate must be positive");
        require(channels() == 1 || channels() == 3,
                "recording '" + source_id + "': channel count must be 1 or 3");
        for (const auto& ch : samples) {
            require(ch.size() == length(), "recording '" + source_id + "': channels differ in length");
            for (double v : ch) require(std::isfinite(v), "recording '" + source_id + "': non-finite sample");
        }
    }
};

namespace detail {

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

inline bool parse_double(std::string_view s, double& out) {
    s = trim(s);
    if (s.empty()) return false;
    if (s.front() == '+') s.remove_prefix(1);
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    return ec == std::errc() && ptr == s.data() + s.size();
}

inline std::vector<char> read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorCode::Io, "cannot open '" + path.string() + "'");
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

template <typename T>
T read_le(const unsigned char* p) {
    T v{};
    for (std::size_t i = 0; i < sizeof(T); ++i) v |= static_cast<T>(static_cast<T>(p[i]) << (8 * i));
    return v;
}

}  // namespace detail

/// Parses x,y,z rows (no header). Row numbers in errors are 1-based.
inline Recording parse_csv_recording(std::string_view text, std::string label, double sample_rate,
                                     std::string source_id = {}) {
    require(sample_rate > 0.0, "sample_rate must be positive");
    Recording rec{std::move(label), sample_rate, std::vector<std::vector<double>>(3), std::move(source_id)};
    std::size_t row = 0;
    while (!text.empty()) {
        auto eol = text.find('\n');
        auto line = text.substr(0, eol);
        text = eol == std::string_view::npos ? std::string_view{} : text.substr(eol + 1);
        ++row;
        if (detail::trim(line).empty()) {
            // Tolerate a trailing newline only.
            if (detail::trim(text).empty()) break;
            fail(ErrorCode::Parse, "row " + std::to_string(row) + ": empty row");
        }
        std::array<double, 3> xyz{};
        std::size_t field = 0;
        while (true) {
            auto comma = line.find(',');
            auto tok = line.substr(0, comma);
            if (field >= 3 || !detail::parse_double(tok, xyz[field]))
                fail(ErrorCode::Parse, "row " + std::to_string(row) + ": expected 3 numeric fields");
            ++field;
            if (comma == std::string_view::npos) break;
            line = line.substr(comma + 1);
        }
        if (field != 3) fail(ErrorCode::Parse, "row " + std::to_string(row) + ": expected 3 numeric fields");
        for (std::size_t c = 0; c < 3; ++c) {
            if (!std::isfinite(xyz[c]))
                fail(ErrorCode::Parse, "row " + std::to_string(row) + ": non-finite value");
            rec.samples[c].push_back(xyz[c]);
        }
    }
    if (rec.length() == 0) fail(ErrorCode::Parse, "empty recording");
    return rec;
}

inline Recording load_csv_recording(const std::filesystem::path& path, std::string label, double sample_rate) {
    auto bytes = detail::read_file(path);
    try {
        return parse_csv_recording(std::string_view(bytes.data(), bytes.size()), std::move(label), sample_rate,
                                   path.string());
    } catch (const Error& e) {
        fail(e.code(), path.string() + ": " + e.what());
    }
}

/// Decodes a mono 16-bit PCM RIFF/WAVE image. Samples are scaled by 1/32768.
inline Recording parse_wav_recording(const std::vector<char>& bytes, std::string label, std::string source_id = {}) {
    const auto* p = reinterpret_cast<const unsigned char*>(bytes.data());
    const std::size_t n = bytes.size();
    if (n < 12) fail(ErrorCode::TruncatedHeader, "truncated header");
    if (std::memcmp(p, "RIFF", 4) != 0 || std::memcmp(p + 8, "WAVE", 4) != 0)
        fail(ErrorCode::Parse, "not a RIFF/WAVE file");

    bool have_fmt = false;
    std::uint16_t channels = 0, bits = 0;
    std::uint32_t rate = 0;
    std::size_t pos = 12;
    while (true) {
        if (pos + 8 > n) fail(ErrorCode::TruncatedHeader, "truncated header");
        std::uint32_t chunk_len = detail::read_le<std::uint32_t>(p + pos + 4);
        const unsigned char* id = p + pos;
        pos += 8;
        if (std::memcmp(id, "fmt ", 4) == 0) {
            if (chunk_len < 16 || pos + 16 > n) fail(ErrorCode::TruncatedHeader, "truncated header");
            std::uint16_t format = detail::read_le<std::uint16_t>(p + pos);
            channels = detail::read_le<std::uint16_t>(p + pos + 2);
            rate = detail::read_le<std::uint32_t>(p + pos + 4);
            bits = detail::read_le<std::uint16_t>(p + pos + 14);
            // 0xFFFE (extensible) is accepted only when it wraps plain PCM.
            if (format == 0xFFFE && chunk_len >= 40 && pos + 40 <= n)
                format = detail::read_le<std::uint16_t>(p + pos + 24);
            if (format != 1) fail(ErrorCode::Parse, "compressed format not supported (PCM required)");
            if (channels != 1) fail(ErrorCode::Parse, "mono required");
            if (bits != 16) fail(ErrorCode::Parse, "16-bit samples required");
            if (rate == 0) fail(ErrorCode::Parse, "sample rate must be positive");
            have_fmt = true;
        } else if (std::memcmp(id, "data", 4) == 0) {
            if (!have_fmt) fail(ErrorCode::Parse, "data chunk precedes fmt chunk");
            std::size_t avail = std::min<std::size_t>(chunk_len, n - pos);
            if (avail != chunk_len) fail(ErrorCode::Truncated, "truncated data chunk");
            Recording rec{std::move(label), static_cast<double>(rate), std::vector<std::vector<double>>(1),
                          std::move(source_id)};
            rec.samples[0].reserve(avail / 2);
            for (std::size_t i = 0; i + 1 < avail; i += 2)
                rec.samples[0].push_back(static_cast<std::int16_t>(detail::read_le<std::uint16_t>(p + pos + i)) /
                                         32768.0);
            if (rec.length() == 0) fail(ErrorCode::Parse, "empty recording");
            return rec;
        }
        pos += chunk_len + (chunk_len & 1u);
    }
}

inline Recording load_wav_recording(const std::filesystem::path& path, std::string label) {
    auto bytes = detail::read_file(path);
    try {
        return parse_wav_recording(bytes, std::move(label), path.string());
    } catch (const Error& e) {
        fail(e.code(), path.string() + ": " + e.what());
    }
}

/// Writes a 3-channel recording as x,y,z rows. Values use shortest
/// round-trip formatting so a reload is exact.
inline void write_csv_recording(const Recording& rec, const std::filesystem::path& path) {
    require(rec.channels() == 3, "CSV recordings carry exactly 3 channels");
    std::string out;
    char buf[32];
    for (std::size_t t = 0; t < rec.length(); ++t) {
        for (std::size_t c = 0; c < 3; ++c) {
            auto res = std::to_chars(buf, buf + sizeof buf, rec.samples[c][t]);
            out.append(buf, res.ptr);
            out.push_back(c == 2 ? '\n' : ',');
        }
    }
    std::ofstream f(path, std::ios::binary);
    if (!f || !f.write(out.data(), static_cast<std::streamsize>(out.size())))
        fail(ErrorCode::Io, "cannot write '" + path.string() + "'");
}

inline std::vector<char> encode_wav(const Recording& rec) {
    require(rec.channels() == 1, "WAV output is mono");
    const auto rate = static_cast<std::uint32_t>(std::lround(rec.sample_rate));
    const auto data_len = static_cast<std::uint32_t>(rec.length() * 2);
    std::vector<char> out;
    out.reserve(44 + data_len);
    auto put = [&](std::uint64_t v, int bytes) {
        for (int i = 0; i < bytes; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
    };
    auto tag = [&](const char* s) { out.insert(out.end(), s, s + 4); };
    tag("RIFF");
    put(36 + data_len, 4);
    tag("WAVE");
    tag("fmt ");
    put(16, 4);
    put(1, 2);
    put(1, 2);
    put(rate, 4);
    put(rate * 2, 4);
    put(2, 2);
    put(16, 2);
    tag("data");
    put(data_len, 4);
    for (double v : rec.samples[0]) {
        long q = std::lround(v * 32768.0);
        q = std::clamp(q, -32768L, 32767L);
        put(static_cast<std::uint16_t>(static_cast<std::int16_t>(q)), 2);
    }
    return out;
}

inline void write_wav_recording(const Recording& rec, const std::filesystem::path& path) {
    auto bytes = encode_wav(rec);
    std::ofstream f(path, std::ios::binary);
    if (!f || !f.write(bytes.data(), static_cast<std::streamsize>(bytes.size())))
        fail(ErrorCode::Io, "cannot write '" + path.string() + "'");
}

}  // namespace tinyml::dataset
