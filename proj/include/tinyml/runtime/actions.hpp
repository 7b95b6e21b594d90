/*
 * Copyright 2026 The tinyml-workbench Authors
 *
 * SPDX-License-Identifier: Apache-2.0
 */

#pragma once

#include <string>
#include <string_view>

#include "tinyml/core/error.hpp"

namespace tinyml::runtime {

enum class Action {
    None,
    LedRed,
    LedGreen,
    LedBlue,
    DirectionUpDown,
    DirectionLeftRight,
    DirectionCircle,
};

inline std::string_view to_string(Action a) {
    switch (a) {
        case Action::LedRed: return "LED_RED";
        case Action::LedGreen: return "LED_GREEN";
        case Action::LedBlue: return "LED_BLUE";
        case Action::DirectionUpDown: return "DIRECTION_UPDOWN";
        case Action::DirectionLeftRight: return "DIRECTION_LEFTRIGHT";
        case Action::DirectionCircle: return "DIRECTION_CIRCLE";
        case Action::None: break;
    }
    return "NONE";
}

// Idle and noise are the resting states and never drive an output.
inline Action action_map(std::string_view label) {
    if (label == "red") return Action::LedRed;
    if (label == "green") return Action::LedGreen;
    if (label == "blue") return Action::LedBlue;
    if (label == "updown") return Action::DirectionUpDown;
    if (label == "leftright") return Action::DirectionLeftRight;
    if (label == "circle") return Action::DirectionCircle;
    if (label == "idle" || label == "noise") return Action::None;
    warn("no action for label '" + std::string(label) + "'");
    return Action::None;
}

}  // namespace tinyml::runtime
