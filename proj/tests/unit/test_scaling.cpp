// SPDX-License-Identifier: MIT
#include "fellerlab/scaling.hpp"

#include "oracles.hpp"
#include "support.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace fellerlab;

namespace {

JumpingMeasure build(double p1, double p2, double p3, P4Measure p4, Regime regime, std::int64_t n) {
    return build_measure(ScalingScheme(FellerParams(p1, p2, p3, std::move(p4)), regime, n));
}

double total_mass(const JumpingMeasure& m) {
    double s = m.kill();
    for (double p : m.probs()) s += p;
    return s;
}

}  // namespace

TEST_CASE("build_measure on hand-computed cases") {
    const auto absorbed = build(0, 0, 1, P4Measure::zero(), Regime::Sojourn, 10);
    CHECK(absorbed.prob(0) == 1.0);
    CHECK(absorbed.kill() == 0.0);
    CHECK(absorbed.max_index() == 0);

    const auto holding = build(1, 0, 1, P4Measure::zero(), Regime::Sojourn, 10);
    CHECK(holding.kill() == doctest::Approx(0.01).epsilon(1e-15));
    CHECK(holding.prob(0) == doctest::Approx(0.99).epsilon(1e-15));

    const auto elastic = build(1, 1, 0, P4Measure::zero(), Regime::Reflection, 10);
    CHECK(elastic.kill() == doctest::Approx(0.1).epsilon(1e-15));
    CHECK(elastic.prob(0) == 0.0);
    CHECK(elastic.prob(1) == doctest::Approx(0.9).epsilon(1e-15));

    const auto jump = build(0, 0, 1, P4Measure::atoms({{2.0, 1.0}}), Regime::Sojourn, 10);
    CHECK(jump.prob(19) == doctest::Approx(0.01).epsilon(1e-15));
    CHECK(jump.prob(20) == 0.0);
    CHECK(jump.prob(0) == doctest::Approx(0.99).epsilon(1e-15));
}

TEST_CASE("scheme validation") {
    CHECK(error_code_of([] { ScalingScheme(FellerParams(0, 1, 0), Regime::Sojourn, 10); }) ==
          ErrorCode::InvalidArgument);
    CHECK(error_code_of([] { ScalingScheme(FellerParams(0, 1, 1), Regime::Reflection, 10); }) ==
          ErrorCode::InvalidArgument);
    CHECK(error_code_of([] { ScalingScheme(FellerParams(0, 1, 0), Regime::Reflection, 1); }) ==
          ErrorCode::InvalidArgument);
    CHECK(error_code_of([] { (void)infer_regime(FellerParams(1, 0, 0)); }) == ErrorCode::Inadmissible);
    CHECK(infer_regime(FellerParams(0, 1, 1)) == Regime::Sojourn);
    CHECK(infer_regime(FellerParams(0, 1, 0)) == Regime::Reflection);
    CHECK(parse_regime("auto") == std::nullopt);
    CHECK(parse_regime("reflection") == Regime::Reflection);
    CHECK(error_code_of([] { (void)parse_regime("sideways"); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("negative residual reports the first admissible n of a doubling search") {
    // p_kill = 10 / (2 n) exceeds 1 - p_... until 5 / n <= 1.
    const ScalingScheme scheme(FellerParams(10, 1, 0), Regime::Reflection, 2);
    std::int64_t suggested = 0;
    try {
        (void)build_measure(scheme);
        FAIL("expected NTooSmallError");
    } catch (const NTooSmallError& e) {
        suggested = e.suggested_n();
    }
    CHECK(suggested == 16);
    CHECK_NOTHROW((void)build_measure(scheme.with_n(suggested)));
    CHECK(error_code_of([&] { (void)build_measure(scheme.with_n(suggested / 2)); }) == ErrorCode::NTooSmall);

    const auto [measure, used] = build_measure_auto_bump(scheme);
    CHECK(used == 16);
    CHECK(measure.kill() == doctest::Approx(10.0 / 16.0));
}

TEST_CASE("presets") {
    const auto reflected = preset("reflected");
    CHECK(reflected.regime == Regime::Reflection);
    CHECK(reflected.params.p1() == 0.0);
    CHECK(reflected.params.p2() == 1.0);
    CHECK(reflected.params.p3() == 0.0);
    CHECK(reflected.params.p4().is_zero());

    const auto elastic = preset("elastic", {1.0, 1.0, std::nullopt});
    CHECK(elastic.regime == Regime::Reflection);
    CHECK(elastic.params.p1() == 1.0);
    CHECK(elastic.params.p2() == 1.0);
    CHECK(elastic.params.p3() == 0.0);

    const auto sticky = preset("sticky", {std::nullopt, 1.0, 1.0});
    CHECK(sticky.regime == Regime::Sojourn);
    CHECK(sticky.params.p1() == 0.0);
    CHECK(sticky.params.p2() == 1.0);
    CHECK(sticky.params.p3() == 1.0);

    const auto holding = preset("exponential_holding", {2.0, std::nullopt, 3.0});
    CHECK(holding.params.p1() == 2.0);
    CHECK(holding.params.p3() == 3.0);

    CHECK(error_code_of([] { (void)preset("bouncy"); }) == ErrorCode::InvalidArgument);
    CHECK(error_code_of([] { (void)preset("reflected", {1.0, std::nullopt, std::nullopt}); }) ==
          ErrorCode::InvalidArgument);
    CHECK(error_code_of([] { (void)preset("sticky", {std::nullopt, -1.0, std::nullopt}); }) ==
          ErrorCode::InvalidArgument);
    CHECK(preset_names().size() == 6);
}

TEST_CASE("reflected and absorbed presets give a single unit atom for every n") {
    for (std::int64_t n = 2; n <= 200; n += 3) {
        const auto r = preset("reflected");
        const auto mr = build_measure(ScalingScheme(r.params, r.regime, n));
        CHECK(mr.max_index() == 1);
        CHECK(mr.prob(1) == 1.0);
        CHECK(mr.prob(0) == 0.0);
        CHECK(mr.kill() == 0.0);

        const auto a = preset("absorbed");
        const auto ma = build_measure(ScalingScheme(a.params, a.regime, n));
        CHECK(ma.max_index() == 0);
        CHECK(ma.prob(0) == 1.0);
        CHECK(ma.kill() == 0.0);
    }
}

TEST_CASE("built measures match an independent cell-by-cell evaluation") {
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 40; ++trial) {
        const bool sojourn = trial % 2 == 0;
        const double p1 = u(rng);
        const double p2 = sojourn ? u(rng) : 0.5 + u(rng);
        const double p3 = sojourn ? 0.5 + u(rng) : 0.0;
        std::vector<Atom> atoms;
        for (int k = 0; k < 3; ++k) atoms.push_back({0.05 + 4.0 * u(rng), 0.1 + u(rng)});
        const bool use_power = trial % 4 == 1;
        const double c = 0.3, alpha = 1.5, top = 3.0;
        const auto p4 = use_power ? P4Measure::power(c, alpha, top) : P4Measure::atoms(atoms);
        const FellerParams params(p1, p2, p3, p4);
        const Regime regime = sojourn ? Regime::Sojourn : Regime::Reflection;

        JumpingMeasure m(1.0, {});
        std::int64_t n = 0;
        try {
            std::tie(m, n) = build_measure_auto_bump(ScalingScheme(params, regime, 20));
        } catch (const Error&) {
            FAIL("auto bump failed");
        }
        const auto nd = static_cast<double>(n);
        const double scale = sojourn ? nd * nd * p3 : nd * p2;

        auto cell_mass = [&](std::int64_t j) {
            const double a = static_cast<double>(j) / nd, b = static_cast<double>(j + 1) / nd;
            if (use_power) {
                if (a >= top) return 0.0;
                const double hi = std::min(b, top);
                return c * (std::pow(hi, 1.0 - alpha) - std::pow(a, 1.0 - alpha)) / (1.0 - alpha);
            }
            double s = 0.0;
            for (const auto& at : atoms)
                if (at.location * nd > static_cast<double>(j) && at.location * nd <= static_cast<double>(j + 1))
                    s += at.mass;
            return s;
        };

        CHECK(total_mass(m) == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(m.kill() == doctest::Approx(p1 / (sojourn ? nd * nd * p3 : nd * p2)).epsilon(1e-14));
        CHECK(m.max_index() < n * n);
        for (std::int64_t j = 0; j <= m.max_index(); ++j) CHECK(m.prob(j) >= 0.0);
        for (std::int64_t j = 2; j < n * n && j <= m.max_index(); ++j)
            CHECK(m.prob(j) == doctest::Approx(cell_mass(j) / scale).epsilon(1e-9).scale(1e-14));
        if (sojourn) {
            CHECK(m.prob(1) == doctest::Approx(p2 / (nd * p3)).epsilon(1e-14));
        } else {
            CHECK(m.prob(0) == 0.0);
        }
    }
}

TEST_CASE("the residual probability tends to 1 at rate 1/n") {
    const auto p4 = P4Measure::atoms({{0.5, 1.0}, {1.7, 0.5}});
    for (const Regime regime : {Regime::Sojourn, Regime::Reflection}) {
        const FellerParams params(1.0, 1.0, regime == Regime::Sojourn ? 1.0 : 0.0, p4);
        const State keep = regime == Regime::Sojourn ? 0 : 1;
        double previous = 1.0;
        double worst_rate = 0.0;
        for (std::int64_t n = 100; n <= 12800; n *= 2) {
            const auto m = build_measure(ScalingScheme(params, regime, n));
            const double gap = 1.0 - m.prob(keep);
            CHECK(gap < previous);
            previous = gap;
            worst_rate = std::max(worst_rate, gap * static_cast<double>(n));
        }
        CHECK(worst_rate <= 4.0);
    }
}

TEST_CASE("discrete stage estimates") {
    const auto holding = build(1, 0, 1, P4Measure::zero(), Regime::Sojourn, 10);
    CHECK(discrete_stage(holding, 10).xi_n == doctest::Approx(0.99).epsilon(1e-14));
    const auto elastic = build(1, 1, 0, P4Measure::zero(), Regime::Reflection, 10);
    CHECK(discrete_stage(elastic, 10).xi_n == doctest::Approx(0.81).epsilon(1e-14));
    CHECK(discrete_stage(JumpingMeasure(0.5, {0.0, 0.0, 0.5}), 10).xi_n == 0.0);
    CHECK(error_code_of([] { (void)discrete_stage(JumpingMeasure(0.0, {0.5, 0.5}), 10); }) == ErrorCode::Domain);
}

TEST_CASE("discrete stage approaches the boundary stage of the limit") {
    const std::vector<FellerParams> cases{
        FellerParams(1, 0, 1),
        FellerParams(1, 1, 0),
        FellerParams(1, 1, 1, P4Measure::atoms({{1.0, 1.0}})),
        FellerParams(0.5, 2, 0, P4Measure::atoms({{0.3, 0.25}, {2.5, 0.25}})),
    };
    for (const auto& params : cases) {
        const double target = boundary_stage(params).total;
        for (std::int64_t n : {100, 1000, 10000}) {
            const auto [m, used] = build_measure_auto_bump(ScalingScheme(params, infer_regime(params), n));
            REQUIRE(used == n);
            const double xi = discrete_stage(m, n).xi_n;
            CHECK(xi >= 0.0);
            CHECK(std::abs(xi - target) <= 10.0 / static_cast<double>(n) * target);
        }
    }
}

TEST_CASE("rescaled paths") {
    BRWPath path;
    path.states = {0, 1, 2, 1};
    const auto r = rescale(path, 2, 0.75);
    CHECK(r.grid_dt == 0.25);
    CHECK(r.at(0.5) == 1.0);
    CHECK(r.at(0.3) == 0.5);
    CHECK(r.at(0.0) == 0.0);

    BRWPath zeros;
    zeros.states.assign(41, 0);
    const auto z = rescale(zeros, 4, 2.5);
    for (const auto& v : z.values) CHECK(v == 0.0);

    BRWPath killed;
    killed.states = {0, 1, 0};
    killed.killed_at = 3;
    const auto k = rescale(killed, 2, 1.0);
    CHECK(k.at(1.0) == std::nullopt);
    CHECK(k.at(0.25) == 0.5);

    BRWPath short_path;
    short_path.states = {0, 1};
    CHECK(error_code_of([&] { (void)rescale(short_path, 2, 1.0); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("start state and step index") {
    CHECK(start_state(1.26, 10) == 12);
    CHECK(start_state(0.0, 77) == 0);
    CHECK(start_state(0.999, 1000) == 999);
    CHECK(error_code_of([] { (void)start_state(-1.0, 10); }) == ErrorCode::InvalidArgument);
    CHECK(step_index(10, 1.0) == 100);
    CHECK(step_index(100, 0.3) == 3000);
    CHECK(step_index(3, 0.5) == 4);
}
