// SPDX-License-Identifier: MIT

#include "fellerlab/generator_lab.hpp"

#include "fellerlab/numeric.hpp"
#include "fellerlab/text_io.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace fellerlab {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

double eval_terms(const std::vector<ExpTerm>& terms, double x) {
    double s = 0.0;
    for (const auto& t : terms) s += t.coefficient * std::exp(-t.rate * x);
    return s;
}

std::vector<ExpTerm> derivative(std::vector<ExpTerm> terms) {
    for (auto& t : terms) t.coefficient *= -t.rate;
    return terms;
}

/// sup over x >= 0 of |sum c_i e^{-r_i x}|.
double sup_abs(const std::vector<ExpTerm>& terms, double range) {
    if (terms.empty()) return 0.0;
    if (terms.size() == 1) return std::abs(terms[0].coefficient);
    if (terms.size() == 2) {
        auto a = terms[0], b = terms[1];
        if (a.rate > b.rate) std::swap(a, b);
        double best = std::abs(a.coefficient + b.coefficient);
        if (a.rate == b.rate) return best;
        // g'(x) = 0  <=>  e^{(rb - ra) x} = -(rb cb) / (ra ca)
        const double ratio = -(b.rate * b.coefficient) / (a.rate * a.coefficient);
        if (ratio > 1.0 && std::isfinite(ratio)) {
            const double x = std::log(ratio) / (b.rate - a.rate);
            best = std::max(best, std::abs(eval_terms(terms, x)));
        }
        return best;
    }
    double best = 0.0;
    constexpr int kGrid = 100000;
    for (int k = 0; k <= kGrid; ++k) best = std::max(best, std::abs(eval_terms(terms, range * k / kGrid)));
    return best;
}

double grid_sup(const TestFunction::Fn& g, double range) {
    constexpr int kGrid = 100000;
    double best = 0.0;
    for (int k = 0; k <= kGrid; ++k) best = std::max(best, std::abs(g(range * k / kGrid)));
    return best;
}

}  // namespace

TestFunction TestFunction::from_callables(Fn f, Fn f1, Fn f2, double range, bool decays, std::string name) {
    if (!f || !f1 || !f2) throw Error(ErrorCode::InvalidArgument, "test function needs f, f' and f''");
    if (!(range > 0.0) || !std::isfinite(range)) throw Error(ErrorCode::InvalidArgument, "range must be positive");
    TestFunction tf;
    tf.f_ = std::move(f);
    tf.f1_ = std::move(f1);
    tf.f2_ = std::move(f2);
    tf.sup_ = {grid_sup(tf.f_, range), grid_sup(tf.f1_, range), grid_sup(tf.f2_, range)};
    tf.decays_ = decays;
    tf.name_ = std::move(name);
    tf.range_ = range;
    return tf;
}

TestFunction TestFunction::exponential_sum(std::vector<ExpTerm> terms, std::string name) {
    if (terms.empty()) throw Error(ErrorCode::InvalidArgument, "exponential sum needs at least one term");
    double min_rate = std::numeric_limits<double>::infinity();
    for (const auto& t : terms) {
        if (!(t.rate > 0.0) || !std::isfinite(t.rate) || !std::isfinite(t.coefficient))
            throw Error(ErrorCode::InvalidArgument, "exponential rates must be finite and positive");
        min_rate = std::min(min_rate, t.rate);
    }
    TestFunction tf;
    tf.terms_ = terms;
    const auto d1 = derivative(terms);
    const auto d2 = derivative(d1);
    tf.f_ = [terms](double x) { return eval_terms(terms, x); };
    tf.f1_ = [d1](double x) { return eval_terms(d1, x); };
    tf.f2_ = [d2](double x) { return eval_terms(d2, x); };
    // e^{-50} is far below anything the residuals resolve.
    tf.range_ = 50.0 / min_rate;
    tf.sup_ = {sup_abs(terms, tf.range_), sup_abs(d1, tf.range_), sup_abs(d2, tf.range_)};
    tf.decays_ = true;
    if (name.empty()) {
        std::ostringstream os;
        for (std::size_t i = 0; i < terms.size(); ++i)
            os << (i ? " + " : "") << text::format_double(terms[i].coefficient) << "*exp(-"
               << text::format_double(terms[i].rate) << "x)";
        name = os.str();
    }
    tf.name_ = std::move(name);
    return tf;
}

DerivativeCheck check_derivatives(const TestFunction& tf) {
    constexpr double h = 1e-5;
    constexpr double tol = 1e-6;
    const double hi = std::min(tf.effective_range(), 10.0);
    DerivativeCheck out;
    for (int k = 1; k <= 100; ++k) {
        const double x = std::max(h, hi * k / 100.0);
        const double d1 = (tf.f(x + h) - tf.f(x - h)) / (2 * h);
        const double d2 = (tf.f1(x + h) - tf.f1(x - h)) / (2 * h);
        out.max_error_f1 = std::max(out.max_error_f1, std::abs(d1 - tf.f1(x)));
        out.max_error_f2 = std::max(out.max_error_f2, std::abs(d2 - tf.f2(x)));
    }
    out.ok = out.max_error_f1 <= tol && out.max_error_f2 <= tol;
    return out;
}

double discrete_generator(const JumpingMeasure& measure, std::int64_t n, const TestFunction& tf, State i) {
    if (n < 1) throw Error(ErrorCode::InvalidArgument, "n must be >= 1");
    if (i < 0) throw Error(ErrorCode::InvalidArgument, "state must be >= 0");
    const double nd = static_cast<double>(n);
    if (i >= 1) {
        const double fi = tf.f(static_cast<double>(i) / nd);
        return 0.5 * ((tf.f(static_cast<double>(i + 1) / nd) - fi) - (fi - tf.f(static_cast<double>(i - 1) / nd)));
    }
    const double f0 = tf.f(0.0);
    CompensatedSum s;
    s.add(-measure.kill() * f0);
    for (std::int64_t j = 1; j <= measure.max_index(); ++j) {
        const double p = measure.prob(j);
        if (p > 0.0) s.add(p * (tf.f(static_cast<double>(j) / nd) - f0));
    }
    return s.value();
}

double scaled_generator(const JumpingMeasure& measure, std::int64_t n, const TestFunction& tf, double x) {
    if (!(x >= 0.0)) throw Error(ErrorCode::InvalidArgument, "x must be >= 0");
    const double nd = static_cast<double>(n);
    return nd * nd * discrete_generator(measure, n, tf, start_state(x, n));
}

double boundary_residual(const FellerParams& params, const TestFunction& tf) {
    double jump_part = 0.0;
    if (!params.p4().is_zero()) {
        if (!tf.exp_terms().empty()) {
            // f(0) - f(x) = sum c_i (1 - e^{-r_i x})
            for (const auto& t : tf.exp_terms()) jump_part += t.coefficient * params.p4().exp_deficit(t.rate);
        } else {
            const double f0 = tf.f(0.0), d1 = tf.f1(0.0), d2 = tf.f2(0.0);
            // Near 0 the difference cancels, and singular densities amplify the rounding.
            jump_part = params.p4().integrate(
                [&](double x) { return x < 1e-4 ? -x * (d1 + 0.5 * d2 * x) : f0 - tf.f(x); });
        }
        if (!std::isfinite(jump_part)) throw Error(ErrorCode::Domain, "jump integral in boundary residual diverged");
    }
    return params.p1() * tf.f(0.0) - params.p2() * tf.f1(0.0) + 0.5 * params.p3() * tf.f2(0.0) + jump_part;
}

TestFunction make_domain_function(const FellerParams& params, double lambda1, double lambda2) {
    if (!(lambda1 > 0.0) || !(lambda2 > lambda1) || !std::isfinite(lambda2))
        throw Error(ErrorCode::InvalidArgument, "need 0 < lambda1 < lambda2 < inf");
    // Boundary functional applied to e^{-l x}.
    auto r = [&](double l) {
        return params.p1() + params.p2() * l + 0.5 * params.p3() * l * l + params.p4().exp_deficit(l);
    };
    const double r1 = r(lambda1);
    const double r2 = r(lambda2);
    const double scale = std::max(std::abs(r1), std::abs(r2));
    double a = 0.0;
    double b = 0.0;
    if (std::abs(r2 - r1) > 1e-12 * scale) {
        // a + b = 1, a r1 + b r2 = 0
        a = r2 / (r2 - r1);
        b = -r1 / (r2 - r1);
    } else {
        // -a l1 - b l2 = 1, a r1 + b r2 = 0
        const double det = -lambda1 * r2 + lambda2 * r1;
        if (!(std::abs(det) > 1e-12 * std::max(1.0, scale) * lambda2))
            throw Error(ErrorCode::Domain, "singular domain-function system (determinant " + text::format_double(det) + ")");
        a = r2 / det;
        b = -r1 / det;
    }
    auto tf = TestFunction::exponential_sum({{a, lambda1}, {b, lambda2}});
    const double residual = boundary_residual(params, tf);
    const double tolerance = 1e-10 * std::max(1.0, std::abs(a * r1));
    if (!(std::abs(residual) <= tolerance))
        throw Error(ErrorCode::Internal,
                    "domain function misses the boundary condition by " + text::format_double(residual));
    return tf;
}

MartingaleResidual martingale_residual(const JumpingMeasure& measure, State start, const TestFunction& tf,
                                       std::int64_t n, int m, MartingaleMode mode, std::int64_t paths,
                                       std::uint64_t seed) {
    if (m < 0) throw Error(ErrorCode::InvalidArgument, "m must be >= 0");
    if (start < 0) throw Error(ErrorCode::InvalidArgument, "start must be >= 0");
    const double nd = static_cast<double>(n);
    auto fn = [&](State s) { return is_cemetery(s) ? 0.0 : tf.f(static_cast<double>(s) / nd); };
    auto gen = [&](State s) { return is_cemetery(s) ? 0.0 : discrete_generator(measure, n, tf, s); };
    auto residual = [&](std::span<const State> xs) {
        CompensatedSum s;
        s.add(fn(xs[static_cast<std::size_t>(m)]));
        s.add(-fn(xs[0]));
        for (int k = 0; k < m; ++k) s.add(-gen(xs[static_cast<std::size_t>(k)]));
        return s.value();
    };
    if (m == 0) return {0.0, 0.0, mode};
    if (mode == MartingaleMode::Exact) return {enumerate_exact(measure, start, m, residual), 0.0, mode};

    if (paths < 2) throw Error(ErrorCode::InvalidArgument, "Monte Carlo mode needs at least 2 paths");
    const auto ensemble = simulate(measure, start, m, paths, seed);
    std::vector<State> xs(static_cast<std::size_t>(m) + 1);
    CompensatedSum sum, sum_sq;
    for (const auto& path : ensemble.paths) {
        for (std::size_t k = 0; k < xs.size(); ++k) xs[k] = k < path.states.size() ? path.states[k] : kCemetery;
        const double v = residual(xs);
        sum.add(v);
        sum_sq.add(v * v);
    }
    const double count = static_cast<double>(paths);
    const double mean = sum.value() / count;
    const double var = std::max(0.0, (sum_sq.value() - count * mean * mean) / (count - 1.0));
    return {mean, 1.96 * std::sqrt(var / count), mode};
}

GeneratorBoundsReport generator_bounds_check(const ScalingScheme& scheme, const JumpingMeasure& measure,
                                             const TestFunction& tf) {
    const std::int64_t n = scheme.n();
    const double nd = static_cast<double>(n);
    const auto& sup = tf.sup_norms();
    GeneratorBoundsReport rep;
    rep.n = n;
    rep.interior_bound = sup.f2 / (2.0 * nd * nd);
    rep.interior_min_slack = std::numeric_limits<double>::infinity();
    for (std::int64_t i = 1; i <= n * n; ++i) {
        const double v = std::abs(discrete_generator(measure, n, tf, i));
        rep.interior_max = std::max(rep.interior_max, v);
        rep.interior_min_slack = std::min(rep.interior_min_slack, rep.interior_bound - v);
        if (v > rep.interior_bound + 1e-15) ++rep.interior_violations;
    }
    rep.interior_ok = rep.interior_violations == 0;

    const auto& p = scheme.params();
    const double numerator =
        p.p1() * sup.f + p.p2() * sup.f1 + (2.0 * sup.f + sup.f1) * p.p4().weighted_moment();
    const double denom = scheme.regime() == Regime::Sojourn ? nd * nd * p.p3() : nd * p.p2();
    rep.boundary_bound = numerator / denom;
    rep.boundary_value = std::abs(discrete_generator(measure, n, tf, 0));
    rep.boundary_ok = rep.boundary_value <= rep.boundary_bound * (1.0 + 1e-12) + 1e-15;
    return rep;
}

std::vector<GeneratorResidual> consistency_residuals(const FellerParams& params, Regime regime,
                                                     const TestFunction& tf, const std::vector<std::int64_t>& n_list) {
    const double bres = boundary_residual(params, tf);
    if (!(std::abs(bres) <= 1e-10))
        throw Error(ErrorCode::InvalidArgument,
                    "test function violates the boundary condition (residual " + text::format_double(bres) + ")");
    std::vector<GeneratorResidual> out;
    out.reserve(n_list.size());
    for (const auto n : n_list) {
        const auto measure = build_measure(ScalingScheme(params, regime, n));
        const double nd = static_cast<double>(n);
        const double x_max = std::min(nd, tf.effective_range());
        const auto i_max = std::max<std::int64_t>(1, static_cast<std::int64_t>(std::ceil(x_max * nd)));

        GeneratorResidual row;
        row.n = n;
        double modulus = 0.0;
        double prev_f2 = tf.f2(0.0);
        for (std::int64_t i = 1; i <= i_max; ++i) {
            const double x = static_cast<double>(i) / nd;
            const double f2 = tf.f2(x);
            modulus = std::max(modulus, std::abs(f2 - prev_f2));
            prev_f2 = f2;
            const double lf = nd * nd * discrete_generator(measure, n, tf, i);
            row.interior_max = std::max(row.interior_max, std::abs(lf - 0.5 * f2));
        }
        // Second differences lose about 4 ulp of |f|, amplified by n^2.
        row.interior_bound = 0.5 * modulus + 4.0 * kEps * tf.sup_norms().f * nd * nd;
        row.interior_ok = row.interior_max <= row.interior_bound;
        const double lf0 = nd * nd * discrete_generator(measure, n, tf, 0);
        row.boundary = regime == Regime::Sojourn ? 0.5 * tf.f2(0.0) - lf0 : lf0 / nd;
        out.push_back(row);
    }
    return out;
}

std::string consistency_csv(const std::vector<GeneratorResidual>& rows) {
    std::ostringstream os;
    os << "n,interior_max,boundary_residual,bound_interior,pass\n";
    for (const auto& r : rows)
        os << r.n << ',' << text::format_double(r.interior_max) << ',' << text::format_double(r.boundary) << ','
           << text::format_double(r.interior_bound) << ',' << (r.interior_ok ? "true" : "false") << '\n';
    return os.str();
}

}  // namespace fellerlab
