// SPDX-License-Identifier: MIT
#pragma once

#include "fellerlab/common.hpp"

#include <optional>

/// The ErrorCode raised by f, or nullopt when it returns normally.
template <class F>
std::optional<fellerlab::ErrorCode> error_code_of(F&& f) {
    try {
        f();
    } catch (const fellerlab::Error& e) {
        return e.code();
    }
    return std::nullopt;
}
