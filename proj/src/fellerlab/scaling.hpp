// SPDX-License-Identifier: MIT
/**
 * @file scaling.hpp
 * @brief n-indexed boundary laws whose diffusively rescaled walks X_{floor(n^2 t)} / n
 *        approximate a Feller Brownian motion, plus the classical presets.
 *
 * Sojourn regime (p3 > 0):
 *     p_kill = p1 / (n^2 p3),  p_1 = p2 / (n p3),
 *     p_j = p4((j/n, (j+1)/n]) / (n^2 p3) for 2 <= j <= n^2 - 1,  p_0 = the rest.
 * Reflection regime (p3 = 0, p2 > 0):
 *     p_kill = p1 / (n p2),  p_0 = 0,
 *     p_j = p4((j/n, (j+1)/n]) / (n p2) for 2 <= j <= n^2 - 1,  p_1 = the rest.
 */

#pragma once

#include "fellerlab/boundary_model.hpp"
#include "fellerlab/brw_core.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace fellerlab {

enum class Regime { Sojourn, Reflection };

std::string_view regime_name(Regime regime);
/// "sojourn" or "reflection"; "auto" yields nullopt.
std::optional<Regime> parse_regime(std::string_view name);
/// Sojourn when p3 > 0, reflection when p3 = 0 and p2 > 0; Error(Inadmissible) otherwise.
Regime infer_regime(const FellerParams& params);

class ScalingScheme {
public:
    ScalingScheme(FellerParams params, Regime regime, std::int64_t n);

    [[nodiscard]] const FellerParams& params() const noexcept { return params_; }
    [[nodiscard]] Regime regime() const noexcept { return regime_; }
    [[nodiscard]] std::int64_t n() const noexcept { return n_; }
    [[nodiscard]] ScalingScheme with_n(std::int64_t n) const { return {params_, regime_, n}; }

private:
    FellerParams params_;
    Regime regime_;
    std::int64_t n_;
};

/// Throws NTooSmallError (with the first admissible n of a doubling search) when the residual is negative.
JumpingMeasure build_measure(const ScalingScheme& scheme);

/// build_measure, doubling n until the residual is nonnegative. Returns the measure and the n used.
std::pair<JumpingMeasure, std::int64_t> build_measure_auto_bump(const ScalingScheme& scheme);

/// Candidate scheme for the p2 = p3 = 0 case. Experimental: no convergence guarantee is known.
JumpingMeasure build_pure_jump_measure_experimental(const FellerParams& params, std::int64_t n);

struct Preset {
    std::string name;
    FellerParams params;
    Regime regime;
};

/// Coefficients for presets; unset values default to 1 where the preset needs them.
struct PresetCoefficients {
    std::optional<double> p1, p2, p3;
};

/// absorbed, exponential_holding, sticky, mixed, reflected, elastic.
Preset preset(std::string_view name, const PresetCoefficients& coefficients = {});
std::vector<std::string> preset_names();

/// B^(n) sampled on the step grid: values[k] = X_k / n, nullopt for the cemetery.
struct RescaledPath {
    double grid_dt;
    double horizon;
    std::vector<std::optional<double>> values;

    /// B^(n)_t = X_{floor(n^2 t)} / n.
    [[nodiscard]] std::optional<double> at(double t) const;
};

RescaledPath rescale(const BRWPath& path, std::int64_t n, double horizon);

/// floor(n^2 t), treating n^2 t within a few ulps of an integer as that integer.
std::int64_t step_index(std::int64_t n, double t);

/// floor(n x0).
State start_state(double x0, std::int64_t n);

struct DiscreteStageEstimate {
    double xi_n;
};

/// (1/n^2) [p_0 / q + (p_1 / q)^2] with q = p_kill + sum_{j >= 2} p_j.
DiscreteStageEstimate discrete_stage(const JumpingMeasure& measure, std::int64_t n);

}  // namespace fellerlab
