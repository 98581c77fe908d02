// SPDX-License-Identifier: MIT

#include "fellerlab/genfun.hpp"

#include "fellerlab/numeric.hpp"
#include "fellerlab/text_io.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <sstream>

namespace fellerlab::genfun {

double f_closed(const JumpingMeasure& measure, double x) {
    if (!(x >= 0.0 && x < 1.0)) throw Error(ErrorCode::Domain, "f_closed requires x in [0, 1)");
    // (1 - sqrt(1 - x^2)) / x rewritten without cancellation; equals 0 at x = 0.
    const double g = x / (1.0 + std::sqrt((1.0 - x) * (1.0 + x)));
    const auto probs = measure.probs();
    double inner = 0.0;
    for (std::size_t k = probs.size(); k-- > 0;) inner = inner * g + probs[k];
    return 1.0 / (1.0 - x * inner);
}

ReturnSeries f_series(const JumpingMeasure& measure, int terms) {
    if (terms < 0) throw Error(ErrorCode::InvalidArgument, "series length must be >= 0");
    const auto probs = measure.probs();
    const std::size_t jmax = probs.size() - 1;
    // Within K steps from 0 the walk never exceeds J + K.
    const std::size_t width = jmax + static_cast<std::size_t>(terms) + 2;
    std::vector<double> cur(width, 0.0);
    std::vector<double> next(width, 0.0);
    cur[0] = 1.0;
    std::size_t reach = 0;  // largest index that may hold mass

    ReturnSeries series;
    series.coefficients.reserve(static_cast<std::size_t>(terms) + 1);
    series.coefficients.push_back(1.0);
    for (int k = 1; k <= terms; ++k) {
        const std::size_t new_reach = std::min(width - 1, std::max(reach + 1, cur[0] > 0.0 ? jmax : 0));
        std::fill(next.begin(), next.begin() + static_cast<std::ptrdiff_t>(new_reach + 1), 0.0);
        const double at_zero = cur[0];
        if (at_zero != 0.0)
            for (std::size_t j = 0; j <= jmax; ++j) next[j] += at_zero * probs[j];
        for (std::size_t i = 1; i <= reach; ++i) {
            const double half = 0.5 * cur[i];
            next[i - 1] += half;
            next[i + 1] += half;
        }
        reach = new_reach;
        std::swap(cur, next);
        series.coefficients.push_back(cur[0]);
    }
    return series;
}

double partial_sum(const ReturnSeries& series, double x) {
    double acc = 0.0;
    for (std::size_t k = series.coefficients.size(); k-- > 0;) acc = acc * x + series.coefficients[k];
    return acc;
}

double tail_bound(int terms, double x) {
    if (!(x >= 0.0 && x < 1.0)) throw Error(ErrorCode::Domain, "tail_bound requires x in [0, 1)");
    return std::pow(x, terms + 1) / (1.0 - x);
}

namespace {

__extension__ typedef __int128 i128;

i128 binomial(int n, int k) {
    if (k < 0 || k > n) return 0;
    k = std::min(k, n - k);
    i128 c = 1;
    for (int r = 1; r <= k; ++r) c = c * (n - k + r) / r;
    return c;
}

}  // namespace

std::uint64_t catalan(int i, int j0) {
    if (i < 1 || j0 < 0) throw Error(ErrorCode::InvalidArgument, "catalan requires i >= 1 and j0 >= 0");
    if (i + 2 * j0 > 64) throw Error(ErrorCode::Domain, "catalan overflow guard: i + 2 j0 must be <= 64");
    const int n = i + 2 * j0;
    const i128 difference = binomial(n - 1, j0) - binomial(n - 1, j0 - 1);
    const i128 scaled = binomial(n, j0) * i;
    if (scaled % n != 0 || scaled / n != difference)
        throw Error(ErrorCode::Internal, "shifted Catalan closed forms disagree");
    return static_cast<std::uint64_t>(difference);
}

double catalan_gf(int i, double t) {
    if (!(t > 0.0 && t <= 0.25)) throw Error(ErrorCode::Domain, "catalan_gf requires t in (0, 1/4]");
    if (i < 0) throw Error(ErrorCode::InvalidArgument, "catalan_gf requires i >= 0");
    // (1 - sqrt(1 - 4t)) / (2t) == 2 / (1 + sqrt(1 - 4t))
    return std::pow(2.0 / (1.0 + std::sqrt(1.0 - 4.0 * t)), i);
}

double catalan_first_passage(int i, int j) {
    if (i < 1) throw Error(ErrorCode::InvalidArgument, "catalan_first_passage requires i >= 1");
    if (j < i || (j - i) % 2 != 0) return 0.0;
    const int j0 = (j - i) / 2;
    if (j <= 64) return std::ldexp(static_cast<double>(catalan(i, j0)), -j);
    const double log_choose = std::lgamma(j + 1.0) - std::lgamma(j0 + 1.0) - std::lgamma(j - j0 + 1.0);
    return std::exp(std::log(static_cast<double>(i) / j) + log_choose - j * std::numbers::ln2);
}

double occupation_bound(std::int64_t m) {
    if (m < 1) throw Error(ErrorCode::InvalidArgument, "occupation_bound requires m >= 1");
    return std::numbers::e / std::sqrt(-std::expm1(-2.0 / static_cast<double>(m)));
}

SeriesTotal return_series_total(const JumpingMeasure& measure) {
    if (!(measure.kill() > 0.0)) throw Error(ErrorCode::Domain, "series total is finite only when p_kill > 0");
    // Renewal identity: sum_k a_k = 1 / (1 - sum_k f_k), f the first-return law. After a jump
    // to j the return takes 1 + tau_j steps, P_j(tau = j + 2t) = (j / (j + 2t)) C(j + 2t, t) 2^-(j+2t).
    constexpr int kLevels = 6;
    constexpr std::int64_t kBase = std::int64_t{1} << 14;
    const std::int64_t tmax = kBase << (kLevels - 1);

    CompensatedSum returned;
    returned.add(measure.prob(0));
    double worst_error = 0.0;
    for (std::int64_t j = 1; j <= measure.max_index(); ++j) {
        const double pj = measure.prob(j);
        if (pj == 0.0) continue;
        const auto jd = static_cast<double>(j);
        std::array<double, kLevels> partial{};
        CompensatedSum acc;
        double term = std::ldexp(1.0, -static_cast<int>(std::min<std::int64_t>(j, 1074)));
        int level = 0;
        for (std::int64_t t = 0; t <= tmax; ++t) {
            acc.add(term);
            if (t == (kBase << level)) partial[static_cast<std::size_t>(level++)] = acc.value();
            const double a = jd + 2.0 * static_cast<double>(t);
            term *= a * (a + 1.0) / (4.0 * static_cast<double>(t + 1) * (jd + static_cast<double>(t) + 1.0));
        }
        // The tail P_j(tau > j + 2T) expands in odd powers of T^(-1/2); T doubles between levels.
        std::array<std::array<double, kLevels>, kLevels> table{};
        for (int l = 0; l < kLevels; ++l) table[l][0] = partial[static_cast<std::size_t>(l)];
        for (int m = 1; m < kLevels; ++m) {
            const double factor = std::pow(2.0, m - 0.5);
            for (int l = m; l < kLevels; ++l)
                table[l][m] = (factor * table[l][m - 1] - table[l - 1][m - 1]) / (factor - 1.0);
        }
        const double hit = table[kLevels - 1][kLevels - 1];
        worst_error = std::max(worst_error, pj * std::abs(hit - table[kLevels - 1][kLevels - 2]));
        returned.add(pj * hit);
    }
    const double escape = 1.0 - returned.value();
    if (!(escape > 0.0)) throw Error(ErrorCode::Internal, "return series total is not finite");
    const double total = 1.0 / escape;
    return {total, total * total * worst_error * static_cast<double>(measure.max_index() + 1)};
}

std::string table_csv(const JumpingMeasure& measure, std::span<const double> xs, int terms) {
    const auto series = f_series(measure, terms);
    std::ostringstream ss;
    ss << "x,f_closed,f_series_partial,tail_bound\n";
    for (double x : xs) {
        ss << text::format_double(x) << ',' << text::format_double(f_closed(measure, x)) << ','
           << text::format_double(partial_sum(series, x)) << ',' << text::format_double(tail_bound(terms, x)) << '\n';
    }
    return ss.str();
}

}  // namespace fellerlab::genfun
