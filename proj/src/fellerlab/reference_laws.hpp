// SPDX-License-Identifier: MIT
/**
 * @file reference_laws.hpp
 * @brief Marginal laws at a fixed time used as convergence targets.
 *
 * A MarginalLaw describes the alive part of the law of B_t as a sub-CDF on
 * [0, inf): cdf(inf) + kill_mass = 1, and cdf(0) is the atom at the boundary.
 */

#pragma once

#include "fellerlab/boundary_model.hpp"
#include "fellerlab/scaling.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace fellerlab {

/// Standard normal CDF.
double normal_cdf(double z);
/// Standard normal density.
double normal_pdf(double z);

struct MarginalLaw {
    std::string name;
    double t = 0.0;
    double x0 = 0.0;
    double atom_at_zero = 0.0;
    double kill_mass = 0.0;
    std::function<double(double)> cdf;       ///< right-continuous sub-CDF, 0 for y < 0
    std::function<double(double)> cdf_left;  ///< left limit of cdf
    std::optional<double> alive_mean;        ///< E[B_t; alive]

    /// Present for empirical laws: sorted alive values, the only points where cdf jumps.
    std::vector<double> samples;
    std::int64_t sample_count = 0;           ///< alive + killed sample size
    std::optional<double> occupation;        ///< mean rescaled time spent at 0 up to t
    std::int64_t resolution = 0;             ///< n of the walk behind an empirical law

    [[nodiscard]] bool empirical() const noexcept { return sample_count > 0; }
};

/// Brownian motion reflected at 0 (folded normal).
MarginalLaw reflected_marginal(double x0, double t);

/**
 * Brownian motion absorbed at 0: atom 2 Phi(-x0 / sqrt t) plus the
 * reflection-principle density. With relabel_as_killed the atom is moved to
 * the cemetery, which gives the killed Brownian motion.
 */
MarginalLaw absorbed_marginal(double x0, double t, bool relabel_as_killed = false);

/// P(alive at t) for exponential holding from 0: exp(-p1 t / p3).
double exp_holding_survival(double p1, double p3, double t);

/// Law at t of exponential holding started at 0: an atom of that mass at 0, the rest killed.
MarginalLaw exp_holding_marginal(double p1, double p3, double t);

/// Empirical law of X_{floor(n^2 t)} / n over independent paths.
MarginalLaw empirical_marginal(std::string name, std::vector<double> alive_values, std::int64_t killed,
                               double x0, double t, std::int64_t n, std::optional<double> occupation);

struct FineGridOptions {
    std::int64_t n_ref = 400;
    std::int64_t paths = 20000;
    std::uint64_t seed = 1;
    std::int64_t largest_n_under_test = 0;  ///< n_ref must be at least 4 times this
};

/// Self-convergence oracle: the walk at resolution n_ref, simulated from floor(n_ref x0).
MarginalLaw fine_grid_reference(const FellerParams& params, Regime regime, double x0, double t,
                                const FineGridOptions& options);

/// Rows "y,cdf" on the given grid.
std::string reference_csv(const MarginalLaw& law, std::span<const double> grid);

}  // namespace fellerlab
