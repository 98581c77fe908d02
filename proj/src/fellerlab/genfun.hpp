// SPDX-License-Identifier: MIT
/**
 * @file genfun.hpp
 * @brief Return-probability generating function of a boundary random walk started at 0,
 *        shifted Catalan numbers, first-passage laws and the occupation bound.
 *
 *     F(x) = sum_k P_0(X_k = 0) x^k
 *          = 1 / (1 - x * sum_k p_k g(x)^k),   g(x) = (1 - sqrt(1 - x^2)) / x.
 */

#pragma once

#include "fellerlab/brw_core.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace fellerlab::genfun {

inline constexpr int kDefaultSeriesTerms = 400;

/// Closed form of F on [0, 1).
double f_closed(const JumpingMeasure& measure, double x);

/// a_k = P_0(X_k = 0) for k = 0..K by forward propagation of the state distribution.
struct ReturnSeries {
    std::vector<double> coefficients;
};

ReturnSeries f_series(const JumpingMeasure& measure, int terms);

/// sum_{k <= K} a_k x^k (Horner).
double partial_sum(const ReturnSeries& series, double x);

/// Analytic truncation bound x^(K+1) / (1 - x) for a K-term partial sum.
double tail_bound(int terms, double x);

/// Shifted Catalan number M(i, j0): paths from i to a first visit of 0 in i + 2 j0 steps.
/// Both closed forms are evaluated in 128-bit arithmetic and must agree. Requires i + 2 j0 <= 64.
std::uint64_t catalan(int i, int j0);

/// ((1 - sqrt(1 - 4t)) / (2t))^i for t in (0, 1/4].
double catalan_gf(int i, double t);

/// M(i, (j - i) / 2) / 2^j when j >= i with matching parity, else 0.
double catalan_first_passage(int i, int j);

/// e / sqrt(1 - exp(-2/m)).
double occupation_bound(std::int64_t m);

/// Sum over all k of a_k = 1 / (1 - sum_k f_k), with the first-return series f summed
/// to 2^19 terms per jump target and its tail extrapolated. Requires p_kill > 0.
struct SeriesTotal {
    double value;
    double error_estimate;
};
SeriesTotal return_series_total(const JumpingMeasure& measure);

/// CSV with columns x, f_closed, f_series_partial, tail_bound.
std::string table_csv(const JumpingMeasure& measure, std::span<const double> xs, int terms);

}  // namespace fellerlab::genfun
