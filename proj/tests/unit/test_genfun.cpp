// SPDX-License-Identifier: MIT
#include "fellerlab/genfun.hpp"
#include "fellerlab/brw_core.hpp"

#include "oracles.hpp"
#include "support.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

using namespace fellerlab;
using namespace fellerlab::genfun;

namespace {

JumpingMeasure random_measure(std::mt19937_64& rng, int support, bool allow_hold, double kill_weight) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<double> w(static_cast<std::size_t>(support) + 1, 0.0);
    double kill = kill_weight * u(rng);
    double total = kill;
    for (std::size_t j = allow_hold ? 0 : 1; j < w.size(); ++j) {
        if (u(rng) < 0.4) continue;
        w[j] = u(rng);
        total += w[j];
    }
    if (total == 0.0) {
        w[1] = 1.0;
        total = 1.0;
    }
    for (auto& v : w) v /= total;
    return JumpingMeasure(kill / total, w);
}

}  // namespace

TEST_CASE("f_closed examples") {
    CHECK(f_closed(JumpingMeasure(1.0, {}), 0.7) == 1.0);
    CHECK(f_closed(JumpingMeasure(0.0, {1.0}), 0.5) == doctest::Approx(2.0).epsilon(1e-15));
    CHECK(f_closed(JumpingMeasure(0.0, {0.0, 1.0}), 0.6) == doctest::Approx(1.25).epsilon(1e-14));
    CHECK(f_closed(JumpingMeasure(0.2, {0.3, 0.5}), 0.0) == 1.0);
    CHECK(error_code_of([] { (void)f_closed(JumpingMeasure(1.0, {}), 1.0); }) == ErrorCode::Domain);
    CHECK(error_code_of([] { (void)f_closed(JumpingMeasure(1.0, {}), -0.1); }) == ErrorCode::Domain);
}

TEST_CASE("f_series examples") {
    const auto hold = f_series(JumpingMeasure(0.0, {1.0}), 20);
    for (double a : hold.coefficients) CHECK(a == 1.0);

    const auto reflect = f_series(JumpingMeasure(0.0, {0.0, 1.0}), 4);
    CHECK(reflect.coefficients == std::vector<double>{1.0, 0.0, 0.5, 0.0, 0.375});
    const double a4 = enumerate_exact(JumpingMeasure(0.0, {0.0, 1.0}), 0, 4,
                                      [](std::span<const State> xs) { return xs[4] == 0 ? 1.0 : 0.0; });
    CHECK(a4 == 0.375);

    const auto geometric = f_series(JumpingMeasure(0.5, {0.5}), 30);
    for (std::size_t k = 0; k < geometric.coefficients.size(); ++k)
        CHECK(geometric.coefficients[k] == std::ldexp(1.0, -static_cast<int>(k)));
}

TEST_CASE("f_series matches dense propagation") {
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 30; ++trial) {
        const auto m = random_measure(rng, 1 + trial % 12, true, 0.5);
        const auto series = f_series(m, 200);
        const auto ref = oracle::return_probabilities({m.kill(), {m.probs().begin(), m.probs().end()}}, 200);
        REQUIRE(series.coefficients.size() == ref.size());
        CHECK(series.coefficients[0] == 1.0);
        for (std::size_t k = 0; k < ref.size(); ++k) {
            CHECK(series.coefficients[k] >= 0.0);
            CHECK(series.coefficients[k] <= 1.0);
            CHECK(std::abs(series.coefficients[k] - ref[k]) <= 200 * 1e-15);
        }
    }
}

TEST_CASE("closed form against the truncated series") {
    std::mt19937_64 rng(8);
    for (int trial = 0; trial < 25; ++trial) {
        const auto m = random_measure(rng, 1 + trial * 2, trial % 2 == 0, trial % 3 == 0 ? 0.0 : 0.3);
        const auto series = f_series(m, kDefaultSeriesTerms);
        for (int k = 1; k <= 9; ++k) {
            const double x = 0.1 * k;
            const double gap = std::abs(f_closed(m, x) - partial_sum(series, x));
            CHECK(gap <= tail_bound(kDefaultSeriesTerms, x) + 1e-9);
        }
    }
}

TEST_CASE("table_csv") {
    const std::vector<double> xs{0.5};
    const auto csv = table_csv(JumpingMeasure(0.0, {1.0}), xs, 3);
    CHECK(csv.rfind("x,f_closed,f_series_partial,tail_bound\n0.5,2.0,1.875,", 0) == 0);
}

TEST_CASE("catalan numbers") {
    CHECK(catalan(1, 1) == 1);
    CHECK(catalan(2, 1) == 2);
    CHECK(catalan(1, 0) == 1);
    CHECK(catalan(1, 2) == 2);
    CHECK(catalan(1, 3) == 5);
    CHECK(catalan(1, 10) == 16796);
    CHECK(error_code_of([] { (void)catalan(1, 32); }) == ErrorCode::Domain);
    // Both closed forms are compared inside catalan(); exercise the full admissible range.
    for (int i = 1; i <= 64; ++i)
        for (int j0 = 0; i + 2 * j0 <= 64; ++j0) CHECK(catalan(i, j0) > 0);
}

TEST_CASE("catalan generating function") {
    CHECK(catalan_gf(1, 0.25) == 2.0);
    CHECK(catalan_gf(3, 0.25) == 8.0);
    CHECK(catalan_gf(1, 1e-9) == doctest::Approx(1.0).epsilon(1e-8));
    // Its coefficients are the Catalan numbers: compare with a truncated series at t = 0.1.
    for (int i = 1; i <= 4; ++i) {
        double s = 0.0;
        for (int j0 = 0; i + 2 * j0 <= 60; ++j0) s += static_cast<double>(catalan(i, j0)) * std::pow(0.1, j0);
        CHECK(catalan_gf(i, 0.1) == doctest::Approx(s).epsilon(1e-12));
    }
    CHECK(error_code_of([] { (void)catalan_gf(1, 0.3); }) == ErrorCode::Domain);
    CHECK(error_code_of([] { (void)catalan_gf(1, 0.0); }) == ErrorCode::Domain);
}

TEST_CASE("first passage from Catalan numbers") {
    CHECK(catalan_first_passage(1, 3) == 0.125);
    CHECK(catalan_first_passage(2, 5) == 0.0);
    CHECK(catalan_first_passage(2, 4) == 0.125);
    for (int i = 1; i <= 4; ++i)
        for (int j = 0; j <= 16; ++j) CHECK(catalan_first_passage(i, j) == oracle::first_passage_bruteforce(i, j));
}

TEST_CASE("first-passage mass approaches 1 at the diffusive rate") {
    for (int i = 1; i <= 4; ++i) {
        double cumulative = 0.0;
        double previous = -1.0;
        for (int j0 = 0; j0 <= 5000; ++j0) {
            cumulative += catalan_first_passage(i, i + 2 * j0);
            CHECK(cumulative > previous);
            previous = cumulative;
        }
        // P_i(tau > m) ~ i sqrt(2 / (pi m)).
        const double m = i + 2.0 * 5000;
        const double tail = i * std::sqrt(2.0 / (std::numbers::pi * m));
        CHECK((1.0 - cumulative) == doctest::Approx(tail).epsilon(2e-3 * i * i + 1e-3));
    }
}

TEST_CASE("occupation bound") {
    CHECK(occupation_bound(100) == doctest::Approx(19.318).epsilon(0.001 / 19.318));
    CHECK(occupation_bound(1) == doctest::Approx(std::exp(1.0) / std::sqrt(1.0 - std::exp(-2.0))));
    CHECK(occupation_bound(1) == doctest::Approx(2.924).epsilon(1e-3));
    CHECK(occupation_bound(100000000) / std::sqrt(1e8) == doctest::Approx(std::exp(1.0) / std::sqrt(2.0)).epsilon(1e-6));
    CHECK(error_code_of([] { (void)occupation_bound(0); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("partial sums respect the occupation bound when p_0 = 0") {
    std::mt19937_64 rng(21);
    for (int trial = 0; trial < 15; ++trial) {
        const auto m = random_measure(rng, 1 + trial, false, trial % 2 ? 0.2 : 0.0);
        const auto series = f_series(m, 1000);
        double s = 0.0;
        for (int k = 0; k < 1000; ++k) {
            s += series.coefficients[static_cast<std::size_t>(k)];
            const int horizon = k + 1;
            if (horizon == 10 || horizon == 100 || horizon == 1000) CHECK(s <= occupation_bound(horizon));
        }
    }
}

TEST_CASE("total return mass equals 1 / p_kill") {
    std::mt19937_64 rng(4);
    for (int trial = 0; trial < 10; ++trial) {
        auto m = random_measure(rng, 1 + trial % 5, true, 1.0);
        if (m.kill() < 0.05) continue;
        const auto total = return_series_total(m);
        CHECK(total.value == doctest::Approx(1.0 / m.kill()).epsilon(1e-6));
    }
    CHECK(error_code_of([] { (void)return_series_total(JumpingMeasure(0.0, {0.0, 1.0})); }) == ErrorCode::Domain);
}
