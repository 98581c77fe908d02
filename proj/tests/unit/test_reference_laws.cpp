// SPDX-License-Identifier: MIT
#include "fellerlab/reference_laws.hpp"

#include "oracles.hpp"
#include "support.hpp"

#include <doctest.h>

#include <cmath>
#include <limits>

using namespace fellerlab;

TEST_CASE("normal cdf against the platform erfc") {
    double worst = 0.0;
    for (int k = -4000; k <= 4000; ++k) {
        const double z = k * 0.0025;
        worst = std::max(worst, std::abs(normal_cdf(z) - oracle::normal_cdf(z)));
    }
    CHECK(worst <= 1e-15);
    CHECK(normal_cdf(-40.0) >= 0.0);
    CHECK(normal_cdf(40.0) == 1.0);
    CHECK(normal_pdf(0.0) == doctest::Approx(1.0 / std::sqrt(2.0 * M_PI)).epsilon(1e-15));
}

TEST_CASE("reflected marginal") {
    const auto law = reflected_marginal(0.0, 1.0);
    CHECK(law.cdf(1.0) == doctest::Approx(2.0 * oracle::normal_cdf(1.0) - 1.0).epsilon(1e-14));
    CHECK(law.cdf(1.0) == doctest::Approx(0.6827).epsilon(1e-4));
    CHECK(law.atom_at_zero == 0.0);
    CHECK(law.kill_mass == 0.0);
    for (double t : {0.01, 1.0, 7.0}) CHECK(reflected_marginal(0.0, t).cdf(0.0) == 0.0);
    CHECK(reflected_marginal(5.0, 1e-12).cdf(5.0) == doctest::Approx(0.5).epsilon(1e-9));
    CHECK(*law.alive_mean == doctest::Approx(std::sqrt(2.0 / M_PI)).epsilon(1e-14));

    for (double t : {0.25, 1.0, 3.0}) {
        const auto l = reflected_marginal(0.0, t);
        for (int k = 0; k <= 400; ++k) {
            const double y = k * 0.02;
            CHECK(std::abs(l.cdf(y) - (2.0 * oracle::normal_cdf(y / std::sqrt(t)) - 1.0)) <= 1e-12);
        }
    }
}

TEST_CASE("absorbed marginal") {
    const auto law = absorbed_marginal(1.0, 1.0);
    CHECK(law.atom_at_zero == doctest::Approx(2.0 * oracle::normal_cdf(-1.0)).epsilon(1e-14));
    CHECK(law.atom_at_zero == doctest::Approx(0.3173).epsilon(1e-4));
    CHECK(law.cdf(0.0) == law.atom_at_zero);
    CHECK(law.cdf_left(0.0) == 0.0);
    CHECK(absorbed_marginal(0.0, 1.0).atom_at_zero == 1.0);
    CHECK(absorbed_marginal(3.0, 0.01).atom_at_zero < 1e-100);

    for (double x0 : {0.3, 1.0, 2.5}) {
        for (double t : {0.1, 1.0, 4.0}) {
            const auto l = absorbed_marginal(x0, t);
            const double s = std::sqrt(t);
            auto density = [&](double y) {
                const double a = (y - x0) / s, b = (y + x0) / s;
                return (std::exp(-0.5 * a * a) - std::exp(-0.5 * b * b)) / (s * std::sqrt(2.0 * M_PI));
            };
            const double top = x0 + 40.0 * s;
            const double mass = oracle::simpson(density, 0.0, top, 20000);
            CHECK(std::abs(l.atom_at_zero + mass - 1.0) <= 1e-10);
            CHECK(std::abs(l.cdf(x0) - l.atom_at_zero - oracle::simpson(density, 0.0, x0, 4000)) <= 1e-10);
            CHECK(*l.alive_mean == doctest::Approx(x0).epsilon(1e-12));
        }
    }

    const auto killed = absorbed_marginal(1.0, 1.0, true);
    CHECK(killed.atom_at_zero == 0.0);
    CHECK(killed.kill_mass == doctest::Approx(law.atom_at_zero).epsilon(1e-15));
    CHECK(killed.cdf(1e9) + killed.kill_mass == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("exponential holding") {
    CHECK(exp_holding_survival(1, 1, 1) == doctest::Approx(std::exp(-1.0)).epsilon(1e-15));
    CHECK(exp_holding_survival(1, 1, 0) == 1.0);
    CHECK(exp_holding_survival(2, 1, 1) == doctest::Approx(0.1353).epsilon(1e-3));
    CHECK(error_code_of([] { (void)exp_holding_survival(0, 1, 1); }) == ErrorCode::InvalidArgument);

    const auto law = exp_holding_marginal(1, 2, 1.5);
    CHECK(law.atom_at_zero == doctest::Approx(std::exp(-0.75)).epsilon(1e-15));
    CHECK(law.kill_mass + law.cdf(10.0) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(law.cdf_left(0.0) == 0.0);
    // Time held at 0 up to t: the integral of the survival curve.
    CHECK(*law.occupation == doctest::Approx(2.0 * (1.0 - std::exp(-0.75))).epsilon(1e-14));
}

TEST_CASE("marginal laws are sub-distribution functions") {
    const std::vector<MarginalLaw> laws{reflected_marginal(0.7, 0.4), absorbed_marginal(0.5, 2.0),
                                        absorbed_marginal(0.5, 2.0, true), exp_holding_marginal(1, 1, 1),
                                        empirical_marginal("e", {0.0, 0.3, 0.3, 1.2}, 2, 0.0, 1.0, 10, 0.25)};
    for (const auto& law : laws) {
        double previous = 0.0;
        for (int k = -10; k <= 2000; ++k) {
            const double y = k * 0.005;
            const double v = law.cdf(y);
            CHECK(v >= previous);
            CHECK(law.cdf_left(y) <= v);
            previous = v;
        }
        CHECK(law.cdf(1e6) + law.kill_mass == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(law.atom_at_zero == doctest::Approx(law.cdf(0.0)).epsilon(1e-15));
    }
}

TEST_CASE("empirical marginal") {
    const auto law = empirical_marginal("e", {1.2, 0.0, 0.3, 0.3}, 2, 0.0, 1.0, 10, 0.25);
    CHECK(law.empirical());
    CHECK(law.sample_count == 6);
    CHECK(law.kill_mass == doctest::Approx(2.0 / 6.0));
    CHECK(law.atom_at_zero == doctest::Approx(1.0 / 6.0));
    CHECK(law.cdf(0.3) == doctest::Approx(3.0 / 6.0));
    CHECK(law.cdf_left(0.3) == doctest::Approx(1.0 / 6.0));
    CHECK(law.samples == std::vector<double>{0.0, 0.3, 0.3, 1.2});
    CHECK(law.occupation == 0.25);
    CHECK(law.resolution == 10);
}

TEST_CASE("fine grid reference guards its resolution") {
    const auto p = preset("reflected");
    FineGridOptions o;
    o.n_ref = 100;
    o.largest_n_under_test = 50;
    o.paths = 200;
    CHECK(error_code_of([&] { (void)fine_grid_reference(p.params, p.regime, 0, 1, o); }) ==
          ErrorCode::InvalidArgument);
    o.largest_n_under_test = 25;
    const auto law = fine_grid_reference(p.params, p.regime, 0, 1, o);
    CHECK(law.sample_count == 200);
    CHECK(law.resolution == 100);
    CHECK(law.kill_mass == 0.0);

    const auto again = fine_grid_reference(p.params, p.regime, 0, 1, o);
    CHECK(again.samples == law.samples);
}

TEST_CASE("reference csv") {
    const std::vector<double> grid{0.0, 1.0};
    const auto csv = reference_csv(reflected_marginal(0, 1), grid);
    CHECK(csv.rfind("y,cdf\n0.0,0.0\n1.0,0.68268949213708", 0) == 0);
}
