// SPDX-License-Identifier: MIT

#include "fellerlab/reference_laws.hpp"

#include "fellerlab/brw_core.hpp"
#include "fellerlab/numeric.hpp"
#include "fellerlab/text_io.hpp"

#include <boost/math/special_functions/erf.hpp>

#include <algorithm>
#include <cmath>
#include <memory>
#include <numbers>
#include <sstream>

namespace fellerlab {

double normal_cdf(double z) { return 0.5 * boost::math::erfc(-z / std::numbers::sqrt2); }

double normal_pdf(double z) { return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi); }

namespace {

void check_time(double x0, double t) {
    if (!(t > 0.0) || !std::isfinite(t)) throw Error(ErrorCode::InvalidArgument, "t must be finite and > 0");
    if (!(x0 >= 0.0) || !std::isfinite(x0)) throw Error(ErrorCode::InvalidArgument, "x0 must be finite and >= 0");
}

}  // namespace

MarginalLaw reflected_marginal(double x0, double t) {
    check_time(x0, t);
    const double s = std::sqrt(t);
    MarginalLaw law;
    law.name = "reflected_closed_form";
    law.t = t;
    law.x0 = x0;
    law.cdf = [x0, s](double y) {
        if (y < 0.0) return 0.0;
        return normal_cdf((y - x0) / s) - normal_cdf((-y - x0) / s);
    };
    law.cdf_left = law.cdf;
    law.occupation = 0.0;
    law.alive_mean = s * std::sqrt(2.0 / std::numbers::pi) * std::exp(-x0 * x0 / (2.0 * t)) +
                     x0 * (1.0 - 2.0 * normal_cdf(-x0 / s));
    return law;
}

MarginalLaw absorbed_marginal(double x0, double t, bool relabel_as_killed) {
    check_time(x0, t);
    const double s = std::sqrt(t);
    const double atom = 2.0 * normal_cdf(-x0 / s);
    MarginalLaw law;
    law.name = relabel_as_killed ? "killed_closed_form" : "absorbed_closed_form";
    law.t = t;
    law.x0 = x0;
    const double base = relabel_as_killed ? 0.0 : atom;
    law.atom_at_zero = base;
    law.kill_mass = relabel_as_killed ? atom : 0.0;
    auto positive_part = [x0, s](double y) {
        return (normal_cdf((y - x0) / s) - normal_cdf(-x0 / s)) - (normal_cdf((y + x0) / s) - normal_cdf(x0 / s));
    };
    law.cdf = [base, positive_part](double y) { return y < 0.0 ? 0.0 : base + positive_part(y); };
    law.cdf_left = [base, positive_part](double y) { return y <= 0.0 ? 0.0 : base + positive_part(y); };
    // Stopped Brownian motion is a martingale; the atom contributes nothing.
    law.alive_mean = x0;
    return law;
}

double exp_holding_survival(double p1, double p3, double t) {
    if (!(p1 > 0.0) || !(p3 > 0.0)) throw Error(ErrorCode::InvalidArgument, "exponential holding needs p1, p3 > 0");
    if (!(t >= 0.0)) throw Error(ErrorCode::InvalidArgument, "t must be >= 0");
    return std::exp(-p1 * t / p3);
}

MarginalLaw exp_holding_marginal(double p1, double p3, double t) {
    check_time(0.0, t);
    const double alive = exp_holding_survival(p1, p3, t);
    MarginalLaw law;
    law.name = "exp_holding_closed_form";
    law.t = t;
    law.atom_at_zero = alive;
    law.kill_mass = 1.0 - alive;
    law.cdf = [alive](double y) { return y < 0.0 ? 0.0 : alive; };
    law.cdf_left = [alive](double y) { return y <= 0.0 ? 0.0 : alive; };
    law.alive_mean = 0.0;
    law.occupation = p3 / p1 * (1.0 - alive);
    return law;
}

MarginalLaw empirical_marginal(std::string name, std::vector<double> alive_values, std::int64_t killed, double x0,
                               double t, std::int64_t n, std::optional<double> occupation) {
    const auto total = static_cast<std::int64_t>(alive_values.size()) + killed;
    if (total < 1) throw Error(ErrorCode::InvalidArgument, "empirical law needs at least one sample");
    std::sort(alive_values.begin(), alive_values.end());
    MarginalLaw law;
    law.name = std::move(name);
    law.t = t;
    law.x0 = x0;
    law.sample_count = total;
    law.resolution = n;
    law.occupation = occupation;
    const double denom = static_cast<double>(total);
    law.kill_mass = static_cast<double>(killed) / denom;
    CompensatedSum mean;
    for (const double v : alive_values) mean.add(v);
    law.alive_mean = mean.value() / denom;
    auto shared = std::make_shared<const std::vector<double>>(alive_values);
    law.samples = std::move(alive_values);
    law.cdf = [shared, denom](double y) {
        return static_cast<double>(std::upper_bound(shared->begin(), shared->end(), y) - shared->begin()) / denom;
    };
    law.cdf_left = [shared, denom](double y) {
        return static_cast<double>(std::lower_bound(shared->begin(), shared->end(), y) - shared->begin()) / denom;
    };
    law.atom_at_zero = law.cdf(0.0);
    return law;
}

MarginalLaw fine_grid_reference(const FellerParams& params, Regime regime, double x0, double t,
                                const FineGridOptions& options) {
    check_time(x0, t);
    if (options.largest_n_under_test > 0 && options.n_ref < 4 * options.largest_n_under_test)
        throw Error(ErrorCode::InvalidArgument, "n_ref must be at least 4x the largest n under test");
    if (options.paths < 1) throw Error(ErrorCode::InvalidArgument, "paths must be >= 1");
    auto [measure, n] = build_measure_auto_bump(ScalingScheme(params, regime, options.n_ref));
    const auto steps = step_index(n, t);
    SummaryOptions so;
    so.checkpoints = {steps};
    const auto summaries = simulate_summaries(measure, start_state(x0, n), options.paths, options.seed, so);
    const double nd = static_cast<double>(n);
    std::vector<double> alive;
    alive.reserve(summaries.size());
    std::int64_t killed = 0;
    CompensatedSum visits;
    for (const auto& s : summaries) {
        const auto& snap = s.snapshots.back();
        visits.add(static_cast<double>(snap.visits_to_zero));
        if (is_cemetery(snap.state))
            ++killed;
        else
            alive.push_back(static_cast<double>(snap.state) / nd);
    }
    const double occupation = visits.value() / static_cast<double>(summaries.size()) / (nd * nd);
    return empirical_marginal("fine_grid_n" + std::to_string(n), std::move(alive), killed, x0, t, n, occupation);
}

std::string reference_csv(const MarginalLaw& law, std::span<const double> grid) {
    std::ostringstream os;
    os << "y,cdf\n";
    for (const double y : grid) os << text::format_double(y) << ',' << text::format_double(law.cdf(y)) << '\n';
    return os.str();
}

}  // namespace fellerlab
