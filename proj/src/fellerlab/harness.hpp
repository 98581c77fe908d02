// SPDX-License-Identifier: MIT
/**
 * @file harness.hpp
 * @brief Convergence experiments: simulate rescaled walks, compare their
 *        marginals with reference laws and report CSV tables.
 *
 * Weak convergence is observed through one-dimensional marginals, killed mass
 * and time spent at 0. Path-space distances are not computed.
 */

#pragma once

#include "fellerlab/boundary_model.hpp"
#include "fellerlab/reference_laws.hpp"
#include "fellerlab/scaling.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace fellerlab {

inline constexpr std::string_view kLibraryVersion = "0.1.0";
inline constexpr std::string_view kCsvSchemaVersion = "1";

enum class Statistic { Ks, Cvm, MeanAbs };

std::string_view statistic_name(Statistic s);
Statistic parse_statistic(std::string_view name);

/// Alive values (any order) plus the number of killed samples.
struct Sample {
    std::vector<double> alive;
    std::int64_t killed = 0;

    [[nodiscard]] std::int64_t size() const noexcept {
        return static_cast<std::int64_t>(alive.size()) + killed;
    }
    [[nodiscard]] std::int64_t zero_count() const;
};

struct KsResult {
    double statistic;        ///< sup over y of |empirical sub-CDF - law.cdf|, including y = inf
    double kill_difference;  ///< |killed fraction - law.kill_mass|
};

KsResult ks_statistic(const Sample& sample, const MarginalLaw& law);
/// Mean over alive sample points of (F_N(y) - law.cdf(y))^2.
double cvm_statistic(const Sample& sample, const MarginalLaw& law);
/// |E_N[B_t; alive] - law.alive_mean|.
double mean_abs_statistic(const Sample& sample, const MarginalLaw& law);

struct Thresholds {
    double statistic_max = 0.03;      ///< for the largest n
    bool require_decrease = true;     ///< statistic(largest n) < statistic(smallest n)
    std::optional<double> atom_tolerance;
    std::optional<double> kill_tolerance;
};

struct ExperimentConfig {
    std::string preset;                      ///< empty when params is set
    PresetCoefficients coefficients;
    std::optional<FellerParams> params;
    std::optional<Regime> regime;            ///< inferred when empty
    double x0 = 0.0;
    std::vector<double> t_list{1.0};
    std::vector<std::int64_t> n_list;        ///< strictly increasing
    std::int64_t paths = 20000;              ///< >= 100
    std::uint64_t seed = 0;
    Statistic statistic = Statistic::Ks;
    Thresholds thresholds;
    bool auto_bump = true;
    std::int64_t n_ref = 0;                  ///< fine-grid resolution; 0 means 4 x max(n_list)
    std::int64_t reference_paths = 0;        ///< 0 means paths
    bool relabel_killed = false;             ///< absorbed law: move the atom at 0 to the cemetery
};

/// Throws Error(InvalidArgument) describing the first problem.
void validate(const ExperimentConfig& config);

struct ConvergenceRow {
    std::int64_t n;
    double t;
    double statistic_value;
    double mc_halfwidth;
    std::string reference_name;
    double kill_fraction;
    double reference_kill_mass;
    double atom_fraction;
    double reference_atom;
    double occupation;  ///< mean visits to 0 before floor(n^2 t), divided by n^2
    std::optional<double> reference_occupation;
};

struct ConvergenceReport {
    std::vector<ConvergenceRow> rows;
    bool pass = false;
    std::vector<std::string> failures;
};

ConvergenceReport run_convergence(const ExperimentConfig& config);

struct OccupationRow {
    std::int64_t n;
    std::int64_t m;
    double mean_visits;
    double ci_halfwidth;
    std::optional<double> bound;  ///< e / sqrt(1 - e^{-2/m}), only when p_0 = 0
    double rescaled_occupation;   ///< mean_visits / n^2
};

std::vector<OccupationRow> occupation_scaling(const std::string& preset_name, const PresetCoefficients& coefficients,
                                              const std::vector<std::int64_t>& n_list, double t, std::int64_t paths,
                                              std::uint64_t seed);

/// Comment lines "# fellerlab ..." (the timestamp line is omitted when reproducible), then the header row.
std::string csv_preamble(std::string_view kind, bool reproducible);
std::string convergence_csv(const ConvergenceReport& report, bool reproducible);
std::string occupation_csv(const std::vector<OccupationRow>& rows, bool reproducible);

}  // namespace fellerlab
