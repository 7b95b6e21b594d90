/*
 * Copyright 2026 The tinyml-workbench Authors
 *
 * SPDX-License-Identifier: Apache-2.0
 */

#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace tinyml {

using Rng = std::mt19937_64;

/// Derives an independent generator from a user seed and a stream tag, so
/// e.g. the "circle" and "idle" generators never share a sequence.
inline Rng make_rng(std::uint64_t seed, std::string_view stream = {}, std::uint64_t index = 0) {
    std::uint64_t tag = 1469598103934665603ull;  // FNV-1a
    for (unsigned char c : stream) {
        tag ^= c;
        tag *= 1099511628211ull;
    }
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(tag), static_cast<std::uint32_t>(tag >> 32),
                      static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32)};
    return Rng(seq);
}

}  // namespace tinyml
