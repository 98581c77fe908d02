// SPDX-License-Identifier: MIT
/**
 * @file common.hpp
 * @brief Error type and small shared vocabulary for the fellerlab core.
 */

#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace fellerlab {

/// Failure categories. Values mirror the C API status codes.
enum class ErrorCode : int {
    InvalidArgument = 1,
    Domain = 2,
    Inadmissible = 3,
    NTooSmall = 4,
    BudgetExceeded = 5,
    Parse = 6,
    Io = 7,
    Internal = 8,
};

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(what), code_(code) {}

    [[nodiscard]] ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

/// Raised by scaling::build_measure when the residual probability is negative.
class NTooSmallError : public Error {
public:
    NTooSmallError(const std::string& what, std::int64_t suggested_n)
        : Error(ErrorCode::NTooSmall, what), suggested_n_(suggested_n) {}

    /// Smallest n found admissible by the doubling search (0 if none was found).
    [[nodiscard]] std::int64_t suggested_n() const noexcept { return suggested_n_; }

private:
    std::int64_t suggested_n_;
};

/// Walk state. Nonnegative values are lattice sites; kCemetery is the killed state.
using State = std::int64_t;
inline constexpr State kCemetery = -1;

[[nodiscard]] inline bool is_cemetery(State s) noexcept { return s < 0; }

}  // namespace fellerlab
