// SPDX-License-Identifier: MIT
//
// Seeded repetition studies. Slower than the unit tests; each case states the
// pass rate it needs.

#include "fellerlab/harness.hpp"

#include <doctest.h>

#include <cmath>
#include <random>
#include <string>

using namespace fellerlab;

namespace {

constexpr double kKolmogorov99 = 1.628;

// Absorbed Brownian motion at t from x0: a Gaussian endpoint, sent to 0 when
// it is negative or when the bridge to it touches 0 (probability e^{-2 x0 y / t}).
double sample_absorbed(std::mt19937_64& rng, double x0, double t) {
    std::normal_distribution<double> z;
    std::uniform_real_distribution<double> u;
    const double y = x0 + std::sqrt(t) * z(rng);
    if (y <= 0.0) return 0.0;
    return u(rng) < std::exp(-2.0 * x0 * y / t) ? 0.0 : y;
}

ExperimentConfig convergence_config(const char* name, double x0, std::uint64_t seed) {
    ExperimentConfig c;
    c.preset = name;
    c.x0 = x0;
    c.n_list = {20, 100};
    c.paths = 20000;
    c.seed = seed;
    return c;
}

}  // namespace

TEST_CASE("ks self-test passes the 99% Kolmogorov threshold in at least 95 of 100 repetitions") {
    const int size = 2000;
    const double threshold = kKolmogorov99 / std::sqrt(size);
    for (const bool absorbed : {false, true}) {
        const auto law = absorbed ? absorbed_marginal(0.7, 1.0) : reflected_marginal(0.0, 1.0);
        int passed = 0;
        for (std::uint64_t rep = 0; rep < 100; ++rep) {
            std::mt19937_64 rng(1000 + rep);
            std::normal_distribution<double> z;
            Sample s;
            for (int k = 0; k < size; ++k) s.alive.push_back(absorbed ? sample_absorbed(rng, 0.7, 1.0) : std::abs(z(rng)));
            passed += ks_statistic(s, law).statistic <= threshold;
        }
        INFO("absorbed = " << absorbed << ", passed " << passed);
        CHECK(passed >= 95);
    }
}

TEST_CASE("ks at n = 100 beats n = 20 in at least 95% of seeded repetitions") {
    const int reps = 40;
    for (const auto& [name, x0] : {std::pair{"reflected", 0.0}, std::pair{"absorbed", 1.0}}) {
        int better = 0;
        for (int rep = 0; rep < reps; ++rep) {
            const auto report = run_convergence(convergence_config(name, x0, 500 + static_cast<std::uint64_t>(rep)));
            better += report.rows[1].statistic_value < report.rows[0].statistic_value;
        }
        INFO(std::string(name) << ": " << better << " of " << reps);
        CHECK(better >= static_cast<int>(std::ceil(0.95 * reps)));
    }
}

TEST_CASE("reflected walks converge to the folded normal") {
    auto c = convergence_config("reflected", 0.0, 2024);
    c.n_list = {20, 50, 100};
    const auto report = run_convergence(c);
    CHECK(report.pass);
    CHECK(report.rows[2].statistic_value <= 0.03);
    CHECK(report.rows[2].statistic_value < report.rows[0].statistic_value);
}

TEST_CASE("fine grid reference on the reflected preset approaches the closed form") {
    const auto p = preset("reflected");
    const auto exact = reflected_marginal(0.0, 1.0);
    double previous = 1.0;
    for (std::int64_t n_ref : {100, 200, 400}) {
        FineGridOptions o;
        o.n_ref = n_ref;
        o.paths = 100000;
        o.seed = 1;
        const auto law = fine_grid_reference(p.params, p.regime, 0.0, 1.0, o);
        Sample s;
        s.alive = law.samples;
        const double ks = ks_statistic(s, exact).statistic;
        INFO("n_ref = " << n_ref << ", ks = " << ks);
        CHECK(ks < previous);
        previous = ks;
    }
    CHECK(previous <= 0.01);
}
