// SPDX-License-Identifier: MIT
/**
 * @file generator_lab.hpp
 * @brief Discrete generators of boundary random walks compared against the
 *        Brownian generator f -> f''/2 and the Feller boundary condition.
 *
 * For a test function f and f_n(i) = f(i/n):
 *
 *     (P - I) f_n(i) = (f((i+1)/n) + f((i-1)/n) - 2 f(i/n)) / 2,          i >= 1
 *     (P - I) f_n(0) = -p_kill f(0) + sum_j p_j (f(j/n) - f(0))
 *     L^(n) f(x)     = n^2 (P - I) f_n(floor(n x))
 *
 * Domain functions are two-exponential combinations a e^{-l1 x} + b e^{-l2 x}
 * chosen so that p1 f(0) - p2 f'(0) + (p3/2) f''(0) + int (f(0) - f(x)) p4(dx) = 0.
 */

#pragma once

#include "fellerlab/boundary_model.hpp"
#include "fellerlab/brw_core.hpp"
#include "fellerlab/scaling.hpp"

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace fellerlab {

struct SupNorms {
    double f = 0.0;
    double f1 = 0.0;
    double f2 = 0.0;
};

/// c * exp(-rate * x)
struct ExpTerm {
    double coefficient;
    double rate;
};

class TestFunction {
public:
    using Fn = std::function<double(double)>;

    /// Sup norms are taken from a dense grid on [0, range].
    static TestFunction from_callables(Fn f, Fn f1, Fn f2, double range, bool decays, std::string name);
    /// Sum of decaying exponentials (rates > 0) with analytic sup norms for up to two terms.
    static TestFunction exponential_sum(std::vector<ExpTerm> terms, std::string name = "");

    [[nodiscard]] double f(double x) const { return f_(x); }
    [[nodiscard]] double f1(double x) const { return f1_(x); }
    [[nodiscard]] double f2(double x) const { return f2_(x); }
    [[nodiscard]] const SupNorms& sup_norms() const noexcept { return sup_; }
    [[nodiscard]] bool decays_at_infinity() const noexcept { return decays_; }
    /// Nonempty when the function is an exponential sum.
    [[nodiscard]] const std::vector<ExpTerm>& exp_terms() const noexcept { return terms_; }
    [[nodiscard]] const std::string& name() const noexcept { return name_; }
    /// Beyond this point f, f' and f'' are negligible (or the sampling range for callables).
    [[nodiscard]] double effective_range() const noexcept { return range_; }

private:
    TestFunction() = default;
    Fn f_, f1_, f2_;
    SupNorms sup_;
    bool decays_ = false;
    std::vector<ExpTerm> terms_;
    std::string name_;
    double range_ = 0.0;
};

struct DerivativeCheck {
    bool ok = false;
    double max_error_f1 = 0.0;  ///< max |central difference of f - f1|
    double max_error_f2 = 0.0;  ///< max |central difference of f1 - f2|
};

/// Central differences (h = 1e-5) at 100 points of (0, min(range, 10)], tolerance 1e-6.
DerivativeCheck check_derivatives(const TestFunction& tf);

/// (P - I) f_n(i).
double discrete_generator(const JumpingMeasure& measure, std::int64_t n, const TestFunction& tf, State i);
/// L^(n) f(x) = n^2 (P - I) f_n(floor(n x)).
double scaled_generator(const JumpingMeasure& measure, std::int64_t n, const TestFunction& tf, double x);

/// p1 f(0) - p2 f'(0) + (p3/2) f''(0) + int (f(0) - f(x)) p4(dx).
double boundary_residual(const FellerParams& params, const TestFunction& tf);

/**
 * f = a e^{-l1 x} + b e^{-l2 x} in the generator domain, normalized by f(0) = 1,
 * or by f'(0) = 1 when the boundary condition forces f(0) = 0.
 * Throws Error(Domain) with the determinant when neither system is solvable.
 */
TestFunction make_domain_function(const FellerParams& params, double lambda1, double lambda2);

enum class MartingaleMode { Exact, MonteCarlo };

struct MartingaleResidual {
    double value;
    double half_width;  ///< 0 in exact mode
    MartingaleMode mode;
};

/// E[f_n(X_m) - f_n(X_0) - sum_{k<m} (P - I) f_n(X_k)], with f_n(cemetery) = 0.
MartingaleResidual martingale_residual(const JumpingMeasure& measure, State start, const TestFunction& tf,
                                       std::int64_t n, int m, MartingaleMode mode, std::int64_t paths = 10000,
                                       std::uint64_t seed = 1);

struct GeneratorBoundsReport {
    std::int64_t n = 0;
    bool interior_ok = false;
    std::int64_t interior_violations = 0;
    double interior_bound = 0.0;      ///< |f''|_u / (2 n^2)
    double interior_max = 0.0;        ///< max over 1 <= i <= n^2 of |(P - I) f_n(i)|
    double interior_min_slack = 0.0;  ///< min over i of bound - |(P - I) f_n(i)|
    bool boundary_ok = false;
    double boundary_value = 0.0;      ///< |(P - I) f_n(0)|
    double boundary_bound = 0.0;
};

/// Interior Taylor bound (tolerance 1e-15) and the boundary bound for the scheme's regime.
GeneratorBoundsReport generator_bounds_check(const ScalingScheme& scheme, const JumpingMeasure& measure,
                                             const TestFunction& tf);

struct GeneratorResidual {
    std::int64_t n = 0;
    double interior_max = 0.0;    ///< max over i >= 1 of |L^(n) f(i/n) - f''(i/n)/2|
    double interior_bound = 0.0;  ///< half the modulus of continuity of f'' at 1/n, plus rounding allowance
    bool interior_ok = false;
    double boundary = 0.0;        ///< chi(n) (sojourn) or gamma(n) (reflection)
};

/// Requires |boundary_residual(params, tf)| <= 1e-10 (Error(InvalidArgument) otherwise).
std::vector<GeneratorResidual> consistency_residuals(const FellerParams& params, Regime regime,
                                                     const TestFunction& tf, const std::vector<std::int64_t>& n_list);

/// Header: n,interior_max,boundary_residual,bound_interior,pass
std::string consistency_csv(const std::vector<GeneratorResidual>& rows);

}  // namespace fellerlab
