// SPDX-License-Identifier: MIT

#include "fellerlab/scaling.hpp"

#include "fellerlab/numeric.hpp"

#include <cmath>
#include <limits>

namespace fellerlab {

std::string_view regime_name(Regime regime) {
    return regime == Regime::Sojourn ? "sojourn" : "reflection";
}

std::optional<Regime> parse_regime(std::string_view name) {
    if (name == "sojourn") return Regime::Sojourn;
    if (name == "reflection") return Regime::Reflection;
    if (name == "auto") return std::nullopt;
    throw Error(ErrorCode::InvalidArgument, "unknown regime '" + std::string(name) + "'");
}

Regime infer_regime(const FellerParams& params) {
    if (params.p3() > 0.0) return Regime::Sojourn;
    if (params.p2() > 0.0) return Regime::Reflection;
    throw Error(ErrorCode::Inadmissible, "pure-jump boundary: no scaling scheme for p2 = p3 = 0");
}

ScalingScheme::ScalingScheme(FellerParams params, Regime regime, std::int64_t n)
    : params_(std::move(params)), regime_(regime), n_(n) {
    if (n_ < 2) throw Error(ErrorCode::InvalidArgument, "scaling index n must be >= 2");
    if (n_ > 3'000'000'000LL) throw Error(ErrorCode::InvalidArgument, "scaling index n too large");
    if (regime_ == Regime::Sojourn && !(params_.p3() > 0.0))
        throw Error(ErrorCode::InvalidArgument, "sojourn regime requires p3 > 0");
    if (regime_ == Regime::Reflection && !(params_.p2() > 0.0 && params_.p3() == 0.0))
        throw Error(ErrorCode::InvalidArgument, "reflection regime requires p2 > 0 and p3 = 0");
    if (!std::isfinite(params_.p4().weighted_moment()))
        throw Error(ErrorCode::Inadmissible, "infinite weighted moment");
}

namespace {

/// p4((j/n, (j+1)/n]) for 2 <= j <= n^2 - 1, as a dense vector indexed by j (entries 0, 1 unused).
std::vector<double> discretize_p4(const P4Measure& p4, std::int64_t n) {
    const std::int64_t last = n * n - 1;
    const double nd = static_cast<double>(n);
    std::vector<double> cells;
    auto cell = [&](std::int64_t j) -> double& {
        if (static_cast<std::int64_t>(cells.size()) <= j) cells.resize(static_cast<std::size_t>(j) + 1, 0.0);
        return cells[static_cast<std::size_t>(j)];
    };
    switch (p4.kind()) {
    case P4Measure::Kind::Zero:
        break;
    case P4Measure::Kind::Atoms:
        for (const auto& atom : p4.atom_list()) {
            auto j = static_cast<std::int64_t>(std::ceil(atom.location * nd)) - 1;
            // Match the floating cell edges used by interval_mass.
            while (j > 0 && !(atom.location > static_cast<double>(j) / nd)) --j;
            while (atom.location > static_cast<double>(j + 1) / nd) ++j;
            if (j >= 2 && j <= last) cell(j) += atom.mass;
        }
        break;
    case P4Measure::Kind::Power: {
        const double support = p4.power_coefficients()[2];
        const auto top = std::min<std::int64_t>(last, static_cast<std::int64_t>(std::ceil(support * nd)));
        for (std::int64_t j = 2; j <= top; ++j)
            cell(j) = p4.interval_mass(static_cast<double>(j) / nd, static_cast<double>(j + 1) / nd);
        break;
    }
    case P4Measure::Kind::User:
        for (std::int64_t j = 2; j <= last; ++j)
            cell(j) = p4.interval_mass(static_cast<double>(j) / nd, static_cast<double>(j + 1) / nd);
        break;
    }
    return cells;
}

struct Attempt {
    std::optional<JumpingMeasure> measure;
    double residual;
};

Attempt try_build(const ScalingScheme& scheme) {
    const auto& p = scheme.params();
    const std::int64_t n = scheme.n();
    const double nd = static_cast<double>(n);
    const bool sojourn = scheme.regime() == Regime::Sojourn;
    const double denom = sojourn ? nd * nd * p.p3() : nd * p.p2();

    std::vector<double> probs = discretize_p4(p.p4(), n);
    if (probs.size() < 2) probs.resize(2, 0.0);
    for (std::size_t j = 2; j < probs.size(); ++j) probs[j] /= denom;
    const double kill = p.p1() / denom;
    if (sojourn) probs[1] = p.p2() / (nd * p.p3());

    CompensatedSum rest;
    rest.add(kill);
    for (std::size_t j = 1; j < probs.size(); ++j)
        if (!(sojourn == false && j == 1)) rest.add(probs[j]);
    double residual = 1.0 - rest.value();
    if (residual < 0.0 && residual > -JumpingMeasure::kMassTolerance) residual = 0.0;
    if (residual < 0.0) return {std::nullopt, residual};
    probs[sojourn ? 0 : 1] = residual;
    return {JumpingMeasure(kill, std::move(probs)), residual};
}

}  // namespace

JumpingMeasure build_measure(const ScalingScheme& scheme) {
    auto attempt = try_build(scheme);
    if (attempt.measure) return std::move(*attempt.measure);
    std::int64_t candidate = scheme.n();
    std::int64_t found = 0;
    for (int i = 0; i < 40 && candidate < 1'000'000'000LL; ++i) {
        candidate *= 2;
        if (try_build(scheme.with_n(candidate)).measure) {
            found = candidate;
            break;
        }
    }
    const char* which = scheme.regime() == Regime::Sojourn ? "p_0" : "p_1";
    throw NTooSmallError("residual " + std::string(which) + " = " + std::to_string(attempt.residual) +
                             " at n = " + std::to_string(scheme.n()) +
                             (found ? "; smallest admissible n found by doubling: " + std::to_string(found) : ""),
                         found);
}

std::pair<JumpingMeasure, std::int64_t> build_measure_auto_bump(const ScalingScheme& scheme) {
    try {
        return {build_measure(scheme), scheme.n()};
    } catch (const NTooSmallError& e) {
        if (e.suggested_n() == 0) throw;
        return {build_measure(scheme.with_n(e.suggested_n())), e.suggested_n()};
    }
}

JumpingMeasure build_pure_jump_measure_experimental(const FellerParams& params, std::int64_t n) {
    if (n < 2) throw Error(ErrorCode::InvalidArgument, "scaling index n must be >= 2");
    const double nd = static_cast<double>(n);
    const double norm = params.p1() + params.p4().interval_mass(1.0 / nd, nd);
    if (!(norm > 0.0) || !std::isfinite(norm))
        throw Error(ErrorCode::Domain, "experimental pure-jump scheme needs 0 < p1 + p4((1/n, n]) < inf");
    std::vector<double> probs(2, 0.0);
    for (std::int64_t j = 1; j <= n * n - 1; ++j) {
        const double mass = params.p4().interval_mass(static_cast<double>(j) / nd, static_cast<double>(j + 1) / nd);
        if (mass > 0.0) {
            if (static_cast<std::int64_t>(probs.size()) <= j) probs.resize(static_cast<std::size_t>(j) + 1, 0.0);
            probs[static_cast<std::size_t>(j)] = mass / norm;
        }
    }
    return JumpingMeasure(params.p1() / norm, std::move(probs));
}

namespace {

double coefficient(const std::optional<double>& v, std::string_view preset_name, const char* which) {
    const double value = v.value_or(1.0);
    if (!(value > 0.0) || !std::isfinite(value))
        throw Error(ErrorCode::InvalidArgument,
                    std::string(preset_name) + " preset needs " + which + " > 0");
    return value;
}

void require_unset(const std::optional<double>& v, std::string_view preset_name, const char* which) {
    if (v && *v != 0.0)
        throw Error(ErrorCode::InvalidArgument, std::string(preset_name) + " preset has " + which + " = 0");
}

}  // namespace

Preset preset(std::string_view name, const PresetCoefficients& c) {
    const std::string n(name);
    if (name == "absorbed") {
        require_unset(c.p1, name, "p1");
        require_unset(c.p2, name, "p2");
        return {n, FellerParams(0, 0, coefficient(c.p3, name, "p3")), Regime::Sojourn};
    }
    if (name == "exponential_holding") {
        require_unset(c.p2, name, "p2");
        return {n, FellerParams(coefficient(c.p1, name, "p1"), 0, coefficient(c.p3, name, "p3")), Regime::Sojourn};
    }
    if (name == "sticky") {
        require_unset(c.p1, name, "p1");
        return {n, FellerParams(0, coefficient(c.p2, name, "p2"), coefficient(c.p3, name, "p3")), Regime::Sojourn};
    }
    if (name == "mixed") {
        return {n,
                FellerParams(coefficient(c.p1, name, "p1"), coefficient(c.p2, name, "p2"),
                             coefficient(c.p3, name, "p3")),
                Regime::Sojourn};
    }
    if (name == "reflected") {
        require_unset(c.p1, name, "p1");
        require_unset(c.p3, name, "p3");
        return {n, FellerParams(0, coefficient(c.p2, name, "p2"), 0), Regime::Reflection};
    }
    if (name == "elastic") {
        require_unset(c.p3, name, "p3");
        return {n, FellerParams(coefficient(c.p1, name, "p1"), coefficient(c.p2, name, "p2"), 0), Regime::Reflection};
    }
    throw Error(ErrorCode::InvalidArgument, "unknown preset '" + n + "'");
}

std::vector<std::string> preset_names() {
    return {"absorbed", "exponential_holding", "sticky", "mixed", "reflected", "elastic"};
}

std::int64_t step_index(std::int64_t n, double t) {
    if (!(t >= 0.0) || !std::isfinite(t)) throw Error(ErrorCode::InvalidArgument, "time must be finite and >= 0");
    const long double steps = static_cast<long double>(n) * static_cast<long double>(n) * static_cast<long double>(t);
    // t usually comes from decimal text, so a product within a few ulps of an integer is that integer.
    const long double nearest = std::round(steps);
    if (std::abs(steps - nearest) <= 8.0L * std::numeric_limits<double>::epsilon() * std::max(1.0L, steps))
        return static_cast<std::int64_t>(nearest);
    return static_cast<std::int64_t>(std::floor(steps));
}

std::optional<double> RescaledPath::at(double t) const {
    if (!(t >= 0.0) || t > horizon) throw Error(ErrorCode::InvalidArgument, "time outside the rescaled horizon");
    const auto n = static_cast<std::int64_t>(std::llround(1.0 / std::sqrt(grid_dt)));
    const auto k = step_index(n, t);
    return values.at(static_cast<std::size_t>(k));
}

RescaledPath rescale(const BRWPath& path, std::int64_t n, double horizon) {
    if (n < 1) throw Error(ErrorCode::InvalidArgument, "n must be >= 1");
    const auto last = step_index(n, horizon);
    const auto available = static_cast<std::int64_t>(path.states.size()) - 1;
    if (available < last && !path.killed_at)
        throw Error(ErrorCode::InvalidArgument, "path is shorter than floor(n^2 T) steps");
    RescaledPath out{1.0 / (static_cast<double>(n) * static_cast<double>(n)), horizon, {}};
    out.values.reserve(static_cast<std::size_t>(last) + 1);
    const double nd = static_cast<double>(n);
    for (std::int64_t k = 0; k <= last; ++k) {
        if (k <= available)
            out.values.emplace_back(static_cast<double>(path.states[static_cast<std::size_t>(k)]) / nd);
        else
            out.values.emplace_back(std::nullopt);
    }
    return out;
}

State start_state(double x0, std::int64_t n) {
    if (!(x0 >= 0.0) || !std::isfinite(x0)) throw Error(ErrorCode::InvalidArgument, "x0 must be finite and >= 0");
    return static_cast<State>(std::floor(x0 * static_cast<double>(n)));
}

DiscreteStageEstimate discrete_stage(const JumpingMeasure& measure, std::int64_t n) {
    if (n < 1) throw Error(ErrorCode::InvalidArgument, "n must be >= 1");
    CompensatedSum q;
    q.add(measure.kill());
    for (std::int64_t j = 2; j <= measure.max_index(); ++j) q.add(measure.prob(j));
    if (!(q.value() > 0.0)) throw Error(ErrorCode::Domain, "discrete_stage undefined: no killing or far jumps");
    const double sojourn = measure.prob(0) / q.value();
    const double reflect = measure.prob(1) / q.value();
    const double nd = static_cast<double>(n);
    return {(sojourn + reflect * reflect) / (nd * nd)};
}

}  // namespace fellerlab
