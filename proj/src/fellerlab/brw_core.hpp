// SPDX-License-Identifier: MIT
/**
 * @file brw_core.hpp
 * @brief Boundary random walk: simple symmetric walk on {0, 1, 2, ...} that,
 *        at 0, jumps to j with probability p_j or is killed with probability p_kill.
 *
 * Also hosts the exhaustive-enumeration oracles used to check the exact
 * identities (first-passage laws, martingale residuals) without sampling.
 */

#pragma once

#include "fellerlab/common.hpp"

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace fellerlab {

/**
 * Boundary law (p_kill, p_0, ..., p_J) of a walk at state 0.
 *
 * Invariants: entries nonnegative and p_kill + sum p_j = 1 within 1e-12.
 * Trailing zero entries are trimmed, so max_index() is the largest j with p_j > 0.
 */
class JumpingMeasure {
public:
    static constexpr double kMassTolerance = 1e-12;

    JumpingMeasure(double kill, std::vector<double> probs);

    /// "j:p" items separated by commas; "kill:p" (or "D:p") sets the kill mass,
    /// which otherwise defaults to 1 - sum p_j.
    static JumpingMeasure from_spec(std::string_view spec);

    /// Measure file text: a "kill,p" row and one "index,p" row per nonzero entry.
    static JumpingMeasure parse(std::string_view text);
    [[nodiscard]] std::string format() const;

    [[nodiscard]] double kill() const noexcept { return kill_; }
    [[nodiscard]] double prob(std::int64_t j) const noexcept;
    [[nodiscard]] std::span<const double> probs() const noexcept { return probs_; }
    [[nodiscard]] std::int64_t max_index() const noexcept { return static_cast<std::int64_t>(probs_.size()) - 1; }
    /// Probability of leaving 0 in one step (killing included), computed without cancellation.
    [[nodiscard]] double departure_mass() const noexcept { return departure_mass_; }

private:
    double kill_;
    std::vector<double> probs_;
    double departure_mass_;
};

struct Transition {
    State to;  ///< kCemetery for killing
    double probability;
};

/// One-step law from `state`: {i-1: 1/2, i+1: 1/2} in the interior, the measure at 0.
std::vector<Transition> step_law(const JumpingMeasure& measure, State state);

/// A trajectory X_0, X_1, ...; truncated at killing.
struct BRWPath {
    State start = 0;
    std::vector<State> states;                ///< X_0 .. X_{last alive index}
    std::optional<std::int64_t> killed_at;    ///< index k with X_k = cemetery
};

struct PathEnsemble {
    std::vector<BRWPath> paths;
    std::uint64_t seed = 0;
    std::shared_ptr<const JumpingMeasure> measure;
    std::int64_t steps = 0;
};

/// Independent trajectories of `steps` transitions; path k depends only on (seed, k).
PathEnsemble simulate(const JumpingMeasure& measure, State start, std::int64_t steps, std::int64_t count,
                      std::uint64_t seed);

/// State and occupation of one path at a checkpoint index c.
struct Snapshot {
    State state;                  ///< X_c, or kCemetery
    std::int64_t visits_to_zero;  ///< sum over k < c of 1{X_k = 0}
};

struct PathSummary {
    std::vector<Snapshot> snapshots;          ///< one per checkpoint, ascending
    std::optional<std::int64_t> killed_at;
    std::int64_t departures = 0;              ///< transitions from 0 to a state != 0 (killing included)
    std::int64_t window_departures = 0;       ///< departures landing in [window_lo, window_hi]
};

struct SummaryOptions {
    std::vector<std::int64_t> checkpoints;    ///< ascending step indices; the last one is the horizon
    State window_lo = 1;
    State window_hi = -1;                     ///< empty window by default
};

/**
 * Streaming simulation that keeps only per-path summaries. Uses the same
 * kernel as simulate(): identical (seed, path index) gives identical trajectories.
 */
std::vector<PathSummary> simulate_summaries(const JumpingMeasure& measure, State start, std::int64_t count,
                                            std::uint64_t seed, const SummaryOptions& options);

/// Same kernel, a single path. Exposed for tests of kernel/recorder agreement.
PathSummary simulate_one(const JumpingMeasure& measure, State start, std::uint64_t seed, std::uint64_t index,
                         const SummaryOptions& options, BRWPath* record = nullptr);

struct MeanEstimate {
    double mean;
    double half_width;  ///< 95% normal-approximation half-width
};

/// Visits to 0 over indices k < m, averaged over the ensemble. Requires m <= ensemble.steps.
MeanEstimate occupation_count(const PathEnsemble& ensemble, std::int64_t m);

/// Exact P_i(first hit of 0 at step j) for the simple walk, by exhaustive path counting (j <= 24).
double first_passage_time(std::int64_t i, std::int64_t j);

/// Path functional over X_0 .. X_depth (entries after killing are kCemetery).
using PathFunctional = std::function<double(std::span<const State>)>;

inline constexpr std::int64_t kEnumerationLeafBudget = 10'000'000;
inline constexpr int kEnumerationMaxDepth = 14;

/// Number of leaves of the weighted path tree (killing ends a branch early).
std::int64_t enumeration_leaves(const JumpingMeasure& measure, State start, int depth);

/// Exact expectation of a path functional by full tree expansion with compensated summation.
double enumerate_exact(const JumpingMeasure& measure, State start, int depth, const PathFunctional& functional);

/// Writes path_id, final_state, killed_at, visits_to_zero (final_state and killed_at may be "D"/empty).
std::string ensemble_summary_csv(const PathEnsemble& ensemble);
/// One row per (path_id, step, state).
std::string ensemble_paths_csv(const PathEnsemble& ensemble);

}  // namespace fellerlab
