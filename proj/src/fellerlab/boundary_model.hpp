// SPDX-License-Identifier: MIT
/**
 * @file boundary_model.hpp
 * @brief Boundary parameters (p1, p2, p3, p4) of a Feller Brownian motion on [0, inf).
 *
 * p1 is the killing weight, p2 the reflection weight, p3 the sojourn weight and
 * p4 a jump-in measure on (0, inf) with finite integral of (x ^ 1). Parameters
 * are stored as given; they are only meaningful up to a common positive factor.
 */

#pragma once

#include <array>
#include <functional>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

namespace fellerlab {

struct Atom {
    double location;  ///< > 0
    double mass;      ///< > 0
};

/// User-supplied density on (0, inf).
struct UserDensity {
    std::function<double(double)> density;
    /// Optional analytic mass of (a, b]; b may be +inf. Quadrature is used when empty.
    std::function<double(double, double)> interval_mass;
    double total_mass;       ///< may be +inf
    double weighted_moment;  ///< declared value of the integral of (x ^ 1) p4(dx)
    std::string name = "user";
};

/**
 * The jump measure p4. Immutable value type; copies share the underlying data.
 *
 * All masses are evaluated on half-open intervals (a, b]: an atom sitting
 * exactly at a is excluded, one at b is included.
 */
class P4Measure {
public:
    enum class Kind { Zero, Atoms, Power, User };

    /// Absolute tolerance used by the quadrature fallback for user densities.
    static constexpr double kQuadratureTolerance = 1e-12;

    P4Measure();  // zero measure

    static P4Measure zero();
    static P4Measure atoms(std::vector<Atom> atoms);
    /// Density c * x^(-alpha) on (0, support_max]; c > 0, alpha < 2 is needed for a finite moment.
    static P4Measure power(double c, double alpha, double support_max);
    /// Cross-checks the declared weighted moment by quadrature (relative 1e-6); throws on mismatch.
    static P4Measure user(UserDensity density);

    [[nodiscard]] Kind kind() const noexcept;
    [[nodiscard]] bool is_zero() const noexcept;

    /// p4((a, b]) for 0 < a <= b; b may be +inf.
    [[nodiscard]] double interval_mass(double a, double b) const;
    /// |p4|, possibly +inf.
    [[nodiscard]] double total_mass() const;
    /// Integral of (x ^ 1) p4(dx), possibly +inf.
    [[nodiscard]] double weighted_moment() const;
    /// Integral of (1 - exp(-lambda x)) p4(dx), lambda > 0. Closed form except for user densities.
    [[nodiscard]] double exp_deficit(double lambda) const;
    /// Integral of g(x) p4(dx) over (0, inf). Exact for atoms, quadrature otherwise.
    [[nodiscard]] double integrate(const std::function<double(double)>& g) const;

    /// The measure multiplied by k > 0.
    [[nodiscard]] P4Measure scaled(double k) const;

    [[nodiscard]] const std::vector<Atom>& atom_list() const;
    /// (c, alpha, support_max) for Kind::Power.
    [[nodiscard]] std::array<double, 3> power_coefficients() const;
    [[nodiscard]] std::string describe() const;

private:
    struct Impl;
    explicit P4Measure(std::shared_ptr<const Impl> impl);
    std::shared_ptr<const Impl> impl_;
};

/// Boundary parameters. p1, p2, p3 must be finite and nonnegative (checked on construction).
class FellerParams {
public:
    FellerParams(double p1, double p2, double p3, P4Measure p4 = P4Measure::zero());

    [[nodiscard]] double p1() const noexcept { return p1_; }
    [[nodiscard]] double p2() const noexcept { return p2_; }
    [[nodiscard]] double p3() const noexcept { return p3_; }
    [[nodiscard]] const P4Measure& p4() const noexcept { return p4_; }

    [[nodiscard]] FellerParams scaled(double k) const;
    [[nodiscard]] std::string describe() const;

private:
    double p1_, p2_, p3_;
    P4Measure p4_;
};

struct ValidationReport {
    bool admissible = false;
    std::string reason;  ///< empty when admissible
};

/// Admissible for approximation iff p3 > 0, or p3 = 0 and p2 > 0, with a finite weighted moment.
ValidationReport validate(const FellerParams& params);

struct BoundaryStageEstimate {
    double sojourn_mean;     ///< p3 / (p1 + |p4|)
    double reflection_time;  ///< (p2 / (p1 + |p4|))^2
    double total;
};

/// Rough expected duration of the boundary stage. Throws Error(Domain) when the jump rate is undefined.
BoundaryStageEstimate boundary_stage(const FellerParams& params);

/// The normalized law (p1 delta_cemetery + p4) / (p1 + |p4|).
struct FbmJumpLaw {
    double kill;       ///< p1 / (p1 + |p4|)
    P4Measure jumps;   ///< p4 / (p1 + |p4|)
};

FbmJumpLaw fbm_jump_law(const FellerParams& params);

/**
 * Reads the flat key/value parameter format:
 *
 *     p1 = 0
 *     p2 = 1
 *     p3 = 1
 *     p4.kind = atoms            # zero | atoms | density
 *     p4.atoms = 2:1, 3.5:0.25   # location:mass
 *     p4.density = power(1, 0.5, 1)   # c * x^-alpha on (0, M]
 */
FellerParams parse_params(std::string_view text);
FellerParams load_params(const std::string& path);

}  // namespace fellerlab
