// SPDX-License-Identifier: MIT

#include "fellerlab/harness.hpp"

#include "fellerlab/brw_core.hpp"
#include "fellerlab/genfun.hpp"
#include "fellerlab/numeric.hpp"
#include "fellerlab/rng.hpp"
#include "fellerlab/text_io.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <iomanip>
#include <set>
#include <sstream>

namespace fellerlab {

std::string_view statistic_name(Statistic s) {
    switch (s) {
    case Statistic::Ks: return "ks";
    case Statistic::Cvm: return "cvm";
    case Statistic::MeanAbs: return "mean_abs";
    }
    return "ks";
}

Statistic parse_statistic(std::string_view name) {
    if (name == "ks") return Statistic::Ks;
    if (name == "cvm") return Statistic::Cvm;
    if (name == "mean_abs") return Statistic::MeanAbs;
    throw Error(ErrorCode::InvalidArgument, "unknown statistic '" + std::string(name) + "'");
}

std::int64_t Sample::zero_count() const {
    return std::count(alive.begin(), alive.end(), 0.0);
}

namespace {

std::vector<double> sorted_alive(const Sample& sample) {
    if (sample.size() < 1) throw Error(ErrorCode::InvalidArgument, "sample is empty");
    auto v = sample.alive;
    std::sort(v.begin(), v.end());
    return v;
}

}  // namespace

KsResult ks_statistic(const Sample& sample, const MarginalLaw& law) {
    const auto xs = sorted_alive(sample);
    const double total = static_cast<double>(sample.size());
    const double alive_mass = static_cast<double>(xs.size()) / total;
    const double law_alive = 1.0 - law.kill_mass;

    // Both sub-CDFs are compared at every jump point, from the right and from the left.
    std::vector<double> points = xs;
    points.insert(points.end(), law.samples.begin(), law.samples.end());
    points.push_back(0.0);
    std::sort(points.begin(), points.end());
    points.erase(std::unique(points.begin(), points.end()), points.end());

    double sup = std::abs(alive_mass - law_alive);
    for (const double y : points) {
        const auto lo = std::lower_bound(xs.begin(), xs.end(), y) - xs.begin();
        const auto hi = std::upper_bound(xs.begin() + lo, xs.end(), y) - xs.begin();
        const double f_left = static_cast<double>(lo) / total;
        const double f_right = static_cast<double>(hi) / total;
        sup = std::max({sup, std::abs(f_right - law.cdf(y)), std::abs(f_left - law.cdf_left(y))});
    }
    return {sup, std::abs(static_cast<double>(sample.killed) / total - law.kill_mass)};
}

double cvm_statistic(const Sample& sample, const MarginalLaw& law) {
    const auto xs = sorted_alive(sample);
    if (xs.empty()) return 0.0;
    const double total = static_cast<double>(sample.size());
    CompensatedSum s;
    for (std::size_t k = 0; k < xs.size(); ++k) {
        const auto hi = std::upper_bound(xs.begin() + static_cast<std::ptrdiff_t>(k), xs.end(), xs[k]) - xs.begin();
        const double d = static_cast<double>(hi) / total - law.cdf(xs[k]);
        s.add(d * d);
    }
    return s.value() / static_cast<double>(xs.size());
}

double mean_abs_statistic(const Sample& sample, const MarginalLaw& law) {
    if (sample.size() < 1) throw Error(ErrorCode::InvalidArgument, "sample is empty");
    if (!law.alive_mean) throw Error(ErrorCode::InvalidArgument, "reference law has no mean");
    CompensatedSum s;
    for (const double v : sample.alive) s.add(v);
    return std::abs(s.value() / static_cast<double>(sample.size()) - *law.alive_mean);
}

void validate(const ExperimentConfig& c) {
    if (c.preset.empty() == !c.params.has_value())
        throw Error(ErrorCode::InvalidArgument, "give exactly one of a preset or raw parameters");
    if (c.n_list.empty()) throw Error(ErrorCode::InvalidArgument, "n list is empty");
    for (std::size_t i = 0; i < c.n_list.size(); ++i) {
        if (c.n_list[i] < 2) throw Error(ErrorCode::InvalidArgument, "every n must be >= 2");
        if (i > 0 && c.n_list[i] <= c.n_list[i - 1])
            throw Error(ErrorCode::InvalidArgument, "n list must be strictly increasing");
    }
    if (c.t_list.empty()) throw Error(ErrorCode::InvalidArgument, "t list is empty");
    for (const double t : c.t_list)
        if (!(t > 0.0) || !std::isfinite(t)) throw Error(ErrorCode::InvalidArgument, "every t must be finite and > 0");
    if (!(c.x0 >= 0.0) || !std::isfinite(c.x0)) throw Error(ErrorCode::InvalidArgument, "x0 must be finite and >= 0");
    if (c.paths < 100) throw Error(ErrorCode::InvalidArgument, "paths must be >= 100");
    if (c.n_ref < 0 || c.reference_paths < 0) throw Error(ErrorCode::InvalidArgument, "negative reference settings");
}

namespace {

struct Resolved {
    FellerParams params;
    Regime regime;
};

Resolved resolve(const ExperimentConfig& c) {
    if (!c.preset.empty()) {
        auto p = preset(c.preset, c.coefficients);
        if (c.regime && *c.regime != p.regime)
            throw Error(ErrorCode::InvalidArgument, "preset '" + c.preset + "' uses the " +
                                                        std::string(regime_name(p.regime)) + " regime");
        return {p.params, p.regime};
    }
    return {*c.params, c.regime ? *c.regime : infer_regime(*c.params)};
}

MarginalLaw reference_for(const ExperimentConfig& c, const Resolved& r, double t) {
    const auto& p = r.params;
    const bool no_jumps = p.p4().is_zero();
    if (no_jumps && p.p1() == 0.0 && p.p2() == 0.0 && p.p3() > 0.0) return absorbed_marginal(c.x0, t, c.relabel_killed);
    if (no_jumps && p.p1() == 0.0 && p.p3() == 0.0 && p.p2() > 0.0) return reflected_marginal(c.x0, t);
    if (no_jumps && p.p2() == 0.0 && p.p1() > 0.0 && p.p3() > 0.0 && c.x0 == 0.0)
        return exp_holding_marginal(p.p1(), p.p3(), t);
    FineGridOptions fo;
    const auto max_n = c.n_list.back();
    fo.n_ref = std::max(c.n_ref, 4 * max_n);
    fo.largest_n_under_test = max_n;
    fo.paths = c.reference_paths > 0 ? c.reference_paths : c.paths;
    fo.seed = derive_seed(c.seed, 1ULL << 63);
    return fine_grid_reference(p, r.regime, c.x0, t, fo);
}

std::string timestamp_utc() {
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    std::ostringstream os;
    os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
    return os.str();
}

}  // namespace

ConvergenceReport run_convergence(const ExperimentConfig& config) {
    validate(config);
    const auto resolved = resolve(config);

    std::vector<MarginalLaw> refs;
    refs.reserve(config.t_list.size());
    for (const double t : config.t_list) refs.push_back(reference_for(config, resolved, t));

    ConvergenceReport report;
    std::vector<std::vector<double>> stats(config.t_list.size());
    for (const auto n_requested : config.n_list) {
        const ScalingScheme scheme(resolved.params, resolved.regime, n_requested);
        std::int64_t n = n_requested;
        std::optional<JumpingMeasure> measure;
        if (config.auto_bump) {
            auto built = build_measure_auto_bump(scheme);
            measure.emplace(std::move(built.first));
            n = built.second;
        } else {
            measure.emplace(build_measure(scheme));
        }
        SummaryOptions so;
        std::set<std::int64_t> unique_steps;
        for (const double t : config.t_list) unique_steps.insert(step_index(n, t));
        so.checkpoints.assign(unique_steps.begin(), unique_steps.end());
        const auto summaries = simulate_summaries(*measure, start_state(config.x0, n), config.paths,
                                                  derive_seed(config.seed, static_cast<std::uint64_t>(n)), so);
        const double nd = static_cast<double>(n);

        for (std::size_t ti = 0; ti < config.t_list.size(); ++ti) {
            const double t = config.t_list[ti];
            const auto cp = static_cast<std::size_t>(
                std::lower_bound(so.checkpoints.begin(), so.checkpoints.end(), step_index(n, t)) -
                so.checkpoints.begin());
            Sample sample;
            sample.alive.reserve(summaries.size());
            CompensatedSum visits;
            for (const auto& s : summaries) {
                const auto& snap = s.snapshots[cp];
                visits.add(static_cast<double>(snap.visits_to_zero));
                if (is_cemetery(snap.state) || (config.relabel_killed && snap.state == 0))
                    ++sample.killed;
                else
                    sample.alive.push_back(static_cast<double>(snap.state) / nd);
            }
            const auto& law = refs[ti];
            const double total = static_cast<double>(sample.size());
            const double ref_size = law.empirical() ? static_cast<double>(law.sample_count) : 0.0;
            const double inv = 1.0 / total + (ref_size > 0.0 ? 1.0 / ref_size : 0.0);

            ConvergenceRow row{};
            row.n = n;
            row.t = t;
            switch (config.statistic) {
            case Statistic::Ks:
                row.statistic_value = ks_statistic(sample, law).statistic;
                row.mc_halfwidth = 1.36 * std::sqrt(inv);
                break;
            case Statistic::Cvm:
                row.statistic_value = cvm_statistic(sample, law);
                row.mc_halfwidth = 0.461 * inv;
                break;
            case Statistic::MeanAbs: {
                row.statistic_value = mean_abs_statistic(sample, law);
                CompensatedSum sq;
                for (const double v : sample.alive) sq.add(v * v);
                const double m = (*law.alive_mean);
                const double var = std::max(0.0, sq.value() / total - m * m);
                row.mc_halfwidth = 1.96 * std::sqrt(var * inv);
                break;
            }
            }
            row.reference_name = law.name;
            row.kill_fraction = static_cast<double>(sample.killed) / total;
            row.reference_kill_mass = law.kill_mass;
            row.atom_fraction = static_cast<double>(sample.zero_count()) / total;
            row.reference_atom = law.atom_at_zero;
            row.occupation = visits.value() / total / (nd * nd);
            row.reference_occupation = law.occupation;
            stats[ti].push_back(row.statistic_value);
            report.rows.push_back(std::move(row));
        }
    }

    const auto& th = config.thresholds;
    for (std::size_t ti = 0; ti < config.t_list.size(); ++ti) {
        const std::string at_t = " at t = " + text::format_double(config.t_list[ti]);
        const auto& s = stats[ti];
        if (!(s.back() <= th.statistic_max))
            report.failures.push_back("statistic " + text::format_double(s.back()) + " exceeds " +
                                      text::format_double(th.statistic_max) + at_t);
        if (th.require_decrease && s.size() > 1 && !(s.back() < s.front()))
            report.failures.push_back("statistic does not decrease from the smallest to the largest n" + at_t);
    }
    for (const auto& row : report.rows) {
        if (row.n != report.rows.back().n) continue;
        if (th.atom_tolerance && !(std::abs(row.atom_fraction - row.reference_atom) <= *th.atom_tolerance))
            report.failures.push_back("atom at 0 off by " + text::format_double(row.atom_fraction - row.reference_atom));
        if (th.kill_tolerance && !(std::abs(row.kill_fraction - row.reference_kill_mass) <= *th.kill_tolerance))
            report.failures.push_back("killed mass off by " +
                                      text::format_double(row.kill_fraction - row.reference_kill_mass));
    }
    report.pass = report.failures.empty();
    return report;
}

std::vector<OccupationRow> occupation_scaling(const std::string& preset_name, const PresetCoefficients& coefficients,
                                              const std::vector<std::int64_t>& n_list, double t, std::int64_t paths,
                                              std::uint64_t seed) {
    if (paths < 2) throw Error(ErrorCode::InvalidArgument, "paths must be >= 2");
    if (!(t > 0.0)) throw Error(ErrorCode::InvalidArgument, "t must be > 0");
    const auto p = preset(preset_name, coefficients);
    std::vector<OccupationRow> rows;
    for (const auto n : n_list) {
        const auto measure = build_measure(ScalingScheme(p.params, p.regime, n));
        const auto m = step_index(n, t);
        SummaryOptions so;
        so.checkpoints = {m};
        const auto summaries =
            simulate_summaries(measure, 0, paths, derive_seed(seed, static_cast<std::uint64_t>(n)), so);
        CompensatedSum sum, sum_sq;
        for (const auto& s : summaries) {
            const auto v = static_cast<double>(s.snapshots.back().visits_to_zero);
            sum.add(v);
            sum_sq.add(v * v);
        }
        const double count = static_cast<double>(paths);
        const double mean = sum.value() / count;
        const double var = std::max(0.0, (sum_sq.value() - count * mean * mean) / (count - 1.0));
        OccupationRow row{n, m, mean, 1.96 * std::sqrt(var / count), std::nullopt,
                          mean / (static_cast<double>(n) * static_cast<double>(n))};
        if (measure.prob(0) == 0.0 && m >= 1) row.bound = genfun::occupation_bound(m);
        rows.push_back(row);
    }
    return rows;
}

std::string csv_preamble(std::string_view kind, bool reproducible) {
    std::ostringstream os;
    os << "# fellerlab " << kLibraryVersion << " " << kind << " schema " << kCsvSchemaVersion << '\n';
    if (!reproducible) os << "# generated " << timestamp_utc() << '\n';
    return os.str();
}

std::string convergence_csv(const ConvergenceReport& report, bool reproducible) {
    using text::format_double;
    std::ostringstream os;
    os << csv_preamble("convergence", reproducible);
    os << "n,t,statistic_value,mc_halfwidth,reference_name,kill_fraction,reference_kill_mass,atom_fraction,"
          "reference_atom,occupation,reference_occupation\n";
    for (const auto& r : report.rows)
        os << r.n << ',' << format_double(r.t) << ',' << format_double(r.statistic_value) << ','
           << format_double(r.mc_halfwidth) << ',' << r.reference_name << ',' << format_double(r.kill_fraction) << ','
           << format_double(r.reference_kill_mass) << ',' << format_double(r.atom_fraction) << ','
           << format_double(r.reference_atom) << ',' << format_double(r.occupation) << ','
           << (r.reference_occupation ? format_double(*r.reference_occupation) : std::string()) << '\n';
    return os.str();
}

std::string occupation_csv(const std::vector<OccupationRow>& rows, bool reproducible) {
    using text::format_double;
    std::ostringstream os;
    os << csv_preamble("occupation", reproducible);
    os << "n,m,mean_visits,ci_halfwidth,bound,rescaled_occupation\n";
    for (const auto& r : rows)
        os << r.n << ',' << r.m << ',' << format_double(r.mean_visits) << ',' << format_double(r.ci_halfwidth) << ','
           << (r.bound ? format_double(*r.bound) : std::string()) << ',' << format_double(r.rescaled_occupation)
           << '\n';
    return os.str();
}

}  // namespace fellerlab
