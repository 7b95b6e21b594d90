/*
 * Copyright 2026 The tinyml-workbench Authors
 *
 * SPDX-License-Identifier: Apache-2.0
 */

#pragma once

#include <functional>
#include <iostream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace tinyml {

/// Broad failure categories. The CLI maps these onto exit statuses, and the
/// blob loader uses the finer-grained ones so callers can tell a corrupted
/// file from a truncated one.
enum class ErrorCode {
    InvalidArgument,
    Parse,
    Io,
    TruncatedHeader,
    BadMagic,
    UnsupportedVersion,
    CrcMismatch,
    Truncated,
    FormatLimit,
    KindMismatch,
};

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) { throw Error(code, what); }

inline void require(bool cond, const std::string& what) {
    if (!cond) fail(ErrorCode::InvalidArgument, what);
}

// Non-fatal diagnostics (e.g. a recording too short to window) go through a
// process-wide sink. Tests swap it out to observe warnings.
using WarningSink = std::function<void(std::string_view)>;

namespace detail {
inline WarningSink& warning_sink() {
    static WarningSink sink = [](std::string_view msg) { std::cerr << "warning: " << msg << '\n'; };
    return sink;
}
}  // namespace detail

inline WarningSink set_warning_sink(WarningSink sink) {
    return std::exchange(detail::warning_sink(), std::move(sink));
}

inline void warn(std::string_view msg) {
    if (auto& sink = detail::warning_sink()) sink(msg);
}

/// RAII capture of warnings for the lifetime of the object.
class ScopedWarningCapture {
public:
    ScopedWarningCapture()
        : previous_(set_warning_sink([this](std::string_view m) { messages_.emplace_back(m); })) {}
    ~ScopedWarningCapture() { set_warning_sink(std::move(previous_)); }
    ScopedWarningCapture(const ScopedWarningCapture&) = delete;
    ScopedWarningCapture& operator=(const ScopedWarningCapture&) = delete;

    const std::vector<std::string>& messages() const { return messages_; }

private:
    std::vector<std::string> messages_;
    WarningSink previous_;
};

}  // namespace tinyml
