// SPDX-License-Identifier: MIT

#include "fellerlab/boundary_model.hpp"

#include "fellerlab/common.hpp"
#include "fellerlab/text_io.hpp"

#include <boost/math/constants/constants.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <boost/math/special_functions/expint.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace fellerlab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double quad(const std::function<double(double)>& g, double a, double b) {
    if (!(b > a)) return 0.0;
    boost::math::quadrature::tanh_sinh<double> integrator;
    double error = 0.0;
    double l1 = 0.0;
    double value = std::numeric_limits<double>::quiet_NaN();
    try {
        value = integrator.integrate(g, a, b, P4Measure::kQuadratureTolerance, &error, &l1);
    } catch (const std::domain_error&) {
    }
    if (!std::isfinite(value))
        throw Error(ErrorCode::Domain, "quadrature did not converge on (" + std::to_string(a) + ", " +
                                           std::to_string(b) + "]");
    return value;
}

void require_positive_finite(double v, const char* what) {
    if (!(v > 0.0) || !std::isfinite(v))
        throw Error(ErrorCode::InvalidArgument, std::string(what) + " must be positive and finite");
}

}  // namespace

struct P4Measure::Impl {
    Kind kind = Kind::Zero;
    std::vector<Atom> atoms;  // sorted by location
    double c = 0.0, alpha = 0.0, support_max = 0.0;
    UserDensity user;

    // Antiderivative of x^-alpha.
    [[nodiscard]] double power_antiderivative(double x) const {
        if (alpha == 1.0) return std::log(x);
        return std::pow(x, 1.0 - alpha) / (1.0 - alpha);
    }

    [[nodiscard]] double power_mass(double a, double b) const {
        const double hi = std::min(b, support_max);
        if (!(hi > a)) return 0.0;
        return c * (power_antiderivative(hi) - power_antiderivative(a));
    }
};

P4Measure::P4Measure() : impl_(std::make_shared<Impl>()) {}
P4Measure::P4Measure(std::shared_ptr<const Impl> impl) : impl_(std::move(impl)) {}

P4Measure P4Measure::zero() { return P4Measure(); }

P4Measure P4Measure::atoms(std::vector<Atom> atoms) {
    if (atoms.empty()) return zero();
    for (const auto& a : atoms) {
        require_positive_finite(a.location, "atom location");
        require_positive_finite(a.mass, "atom mass");
    }
    std::sort(atoms.begin(), atoms.end(), [](const Atom& l, const Atom& r) { return l.location < r.location; });
    auto impl = std::make_shared<Impl>();
    impl->kind = Kind::Atoms;
    impl->atoms = std::move(atoms);
    return P4Measure(std::move(impl));
}

P4Measure P4Measure::power(double c, double alpha, double support_max) {
    require_positive_finite(c, "power density coefficient c");
    require_positive_finite(support_max, "power density support bound");
    if (!std::isfinite(alpha)) throw Error(ErrorCode::InvalidArgument, "power density exponent must be finite");
    auto impl = std::make_shared<Impl>();
    impl->kind = Kind::Power;
    impl->c = c;
    impl->alpha = alpha;
    impl->support_max = support_max;
    return P4Measure(std::move(impl));
}

P4Measure P4Measure::user(UserDensity density) {
    if (!density.density) throw Error(ErrorCode::InvalidArgument, "user density needs a density callable");
    if (!(density.total_mass >= 0.0)) throw Error(ErrorCode::InvalidArgument, "user density total mass must be >= 0");
    if (!(density.weighted_moment >= 0.0) || !std::isfinite(density.weighted_moment))
        throw Error(ErrorCode::InvalidArgument, "user density weighted moment must be finite and >= 0");
    auto impl = std::make_shared<Impl>();
    impl->kind = Kind::User;
    impl->user = std::move(density);
    P4Measure m(impl);

    const auto& f = impl->user.density;
    const double near = quad([&f](double x) { return x * f(x); }, 0.0, 1.0);
    const double far = m.interval_mass(1.0, kInf);
    const double moment = near + far;
    const double declared = impl->user.weighted_moment;
    if (std::abs(moment - declared) > 1e-6 * std::max(std::abs(declared), 1e-300))
        throw Error(ErrorCode::InvalidArgument, "declared weighted moment " + text::format_double(declared) +
                                                    " disagrees with quadrature value " + text::format_double(moment));
    return m;
}

P4Measure::Kind P4Measure::kind() const noexcept { return impl_->kind; }
bool P4Measure::is_zero() const noexcept { return impl_->kind == Kind::Zero; }

double P4Measure::interval_mass(double a, double b) const {
    if (!(a > 0.0)) throw Error(ErrorCode::InvalidArgument, "interval_mass requires a > 0");
    if (!(b >= a)) throw Error(ErrorCode::InvalidArgument, "interval_mass requires b >= a");
    switch (impl_->kind) {
    case Kind::Zero:
        return 0.0;
    case Kind::Atoms: {
        double total = 0.0;
        for (const auto& atom : impl_->atoms)
            if (atom.location > a && atom.location <= b) total += atom.mass;
        return total;
    }
    case Kind::Power:
        return impl_->power_mass(a, b);
    case Kind::User:
        if (impl_->user.interval_mass) return impl_->user.interval_mass(a, b);
        return quad(impl_->user.density, a, b);
    }
    return 0.0;
}

double P4Measure::total_mass() const {
    switch (impl_->kind) {
    case Kind::Zero:
        return 0.0;
    case Kind::Atoms: {
        double total = 0.0;
        for (const auto& atom : impl_->atoms) total += atom.mass;
        return total;
    }
    case Kind::Power:
        if (impl_->alpha >= 1.0) return kInf;
        return impl_->c * std::pow(impl_->support_max, 1.0 - impl_->alpha) / (1.0 - impl_->alpha);
    case Kind::User:
        return impl_->user.total_mass;
    }
    return 0.0;
}

double P4Measure::weighted_moment() const {
    switch (impl_->kind) {
    case Kind::Zero:
        return 0.0;
    case Kind::Atoms: {
        double total = 0.0;
        for (const auto& atom : impl_->atoms) total += std::min(atom.location, 1.0) * atom.mass;
        return total;
    }
    case Kind::Power: {
        if (impl_->alpha >= 2.0) return kInf;
        const double m1 = std::min(1.0, impl_->support_max);
        double moment = impl_->c * std::pow(m1, 2.0 - impl_->alpha) / (2.0 - impl_->alpha);
        if (impl_->support_max > 1.0) moment += impl_->power_mass(1.0, impl_->support_max);
        return moment;
    }
    case Kind::User:
        return impl_->user.weighted_moment;
    }
    return 0.0;
}

double P4Measure::exp_deficit(double lambda) const {
    if (!(lambda > 0.0)) throw Error(ErrorCode::InvalidArgument, "exp_deficit requires lambda > 0");
    switch (impl_->kind) {
    case Kind::Zero:
        return 0.0;
    case Kind::Atoms: {
        double total = 0.0;
        for (const auto& atom : impl_->atoms) total += atom.mass * -std::expm1(-lambda * atom.location);
        return total;
    }
    case Kind::Power: {
        const double alpha = impl_->alpha;
        const double c = impl_->c;
        const double big_m = impl_->support_max;
        if (alpha >= 2.0) return kInf;
        const double z = lambda * big_m;
        if (alpha == 1.0) {
            // Ein(z) = gamma_E + ln z + E1(z)
            return c * (boost::math::constants::euler<double>() + std::log(z) + boost::math::expint(1, z));
        }
        // Integration by parts against x^(1-alpha)/(1-alpha).
        const double boundary = -std::expm1(-z) * std::pow(big_m, 1.0 - alpha) / (1.0 - alpha);
        const double inner = std::pow(lambda, alpha - 1.0) * boost::math::tgamma_lower(2.0 - alpha, z) / (1.0 - alpha);
        return c * (boundary - inner);
    }
    case Kind::User:
        return integrate([lambda](double x) { return -std::expm1(-lambda * x); });
    }
    return 0.0;
}

double P4Measure::integrate(const std::function<double(double)>& g) const {
    switch (impl_->kind) {
    case Kind::Zero:
        return 0.0;
    case Kind::Atoms: {
        double total = 0.0;
        for (const auto& atom : impl_->atoms) total += atom.mass * g(atom.location);
        return total;
    }
    case Kind::Power: {
        const double c = impl_->c;
        const double alpha = impl_->alpha;
        return quad(
            [&](double x) {
                const double v = g(x);
                if (v == 0.0) return 0.0;
                return x < 1.0 ? c * (v / x) * std::pow(x, 1.0 - alpha) : v * c * std::pow(x, -alpha);
            },
            0.0, impl_->support_max);
    }
    case Kind::User: {
        const auto& f = impl_->user.density;
        return quad(
            [&](double x) {
                const double v = g(x);
                return v == 0.0 ? 0.0 : v * f(x);
            },
            0.0, kInf);
    }
    }
    return 0.0;
}

P4Measure P4Measure::scaled(double k) const {
    require_positive_finite(k, "scale factor");
    switch (impl_->kind) {
    case Kind::Zero:
        return zero();
    case Kind::Atoms: {
        auto atoms = impl_->atoms;
        for (auto& atom : atoms) atom.mass *= k;
        return P4Measure::atoms(std::move(atoms));
    }
    case Kind::Power:
        return power(impl_->c * k, impl_->alpha, impl_->support_max);
    case Kind::User: {
        auto impl = std::make_shared<Impl>(*impl_);
        auto base = impl_->user;
        impl->user.density = [base, k](double x) { return k * base.density(x); };
        if (base.interval_mass)
            impl->user.interval_mass = [base, k](double a, double b) { return k * base.interval_mass(a, b); };
        impl->user.total_mass = k * base.total_mass;
        impl->user.weighted_moment = k * base.weighted_moment;
        return P4Measure(std::move(impl));
    }
    }
    return zero();
}

const std::vector<Atom>& P4Measure::atom_list() const { return impl_->atoms; }

std::array<double, 3> P4Measure::power_coefficients() const {
    return {impl_->c, impl_->alpha, impl_->support_max};
}

std::string P4Measure::describe() const {
    std::ostringstream ss;
    switch (impl_->kind) {
    case Kind::Zero:
        ss << "zero";
        break;
    case Kind::Atoms: {
        ss << "atoms(";
        bool first = true;
        for (const auto& atom : impl_->atoms) {
            ss << (first ? "" : ", ") << text::format_double(atom.location) << ':' << text::format_double(atom.mass);
            first = false;
        }
        ss << ')';
        break;
    }
    case Kind::Power:
        ss << "power(" << text::format_double(impl_->c) << ", " << text::format_double(impl_->alpha) << ", "
           << text::format_double(impl_->support_max) << ')';
        break;
    case Kind::User:
        ss << impl_->user.name;
        break;
    }
    return ss.str();
}

FellerParams::FellerParams(double p1, double p2, double p3, P4Measure p4)
    : p1_(p1), p2_(p2), p3_(p3), p4_(std::move(p4)) {
    for (double v : {p1, p2, p3})
        if (!(v >= 0.0) || !std::isfinite(v))
            throw Error(ErrorCode::InvalidArgument, "p1, p2, p3 must be finite and nonnegative");
}

FellerParams FellerParams::scaled(double k) const {
    require_positive_finite(k, "scale factor");
    return FellerParams(p1_ * k, p2_ * k, p3_ * k, p4_.scaled(k));
}

std::string FellerParams::describe() const {
    return "(" + text::format_double(p1_) + ", " + text::format_double(p2_) + ", " + text::format_double(p3_) + ", " +
           p4_.describe() + ")";
}

ValidationReport validate(const FellerParams& params) {
    const bool jumps = !params.p4().is_zero() && params.p4().total_mass() > 0.0;
    if (params.p1() == 0.0 && params.p2() == 0.0 && params.p3() == 0.0 && !jumps)
        return {false, "all parameters zero"};
    if (!std::isfinite(params.p4().weighted_moment())) return {false, "infinite weighted moment"};
    if (params.p2() == 0.0 && params.p3() == 0.0) return {false, "pure-jump boundary"};
    return {true, {}};
}

namespace {

double jump_rate(const FellerParams& params) {
    const double p4_mass = params.p4().total_mass();
    const double rate = params.p1() + p4_mass;
    if (!std::isfinite(p4_mass) || !(rate > 0.0)) throw Error(ErrorCode::Domain, "jump-rate undefined");
    return rate;
}

}  // namespace

BoundaryStageEstimate boundary_stage(const FellerParams& params) {
    const double rate = jump_rate(params);
    const double sojourn = params.p3() / rate;
    const double ratio = params.p2() / rate;
    const double reflection = ratio * ratio;
    return {sojourn, reflection, sojourn + reflection};
}

FbmJumpLaw fbm_jump_law(const FellerParams& params) {
    const double rate = jump_rate(params);
    FbmJumpLaw law{params.p1() / rate, P4Measure::zero()};
    if (!params.p4().is_zero()) law.jumps = params.p4().scaled(1.0 / rate);
    return law;
}

namespace {

P4Measure parse_density(std::string_view spec) {
    spec = text::trim(spec);
    const auto open = spec.find('(');
    const auto close = spec.rfind(')');
    if (open == std::string_view::npos || close == std::string_view::npos || close < open)
        throw Error(ErrorCode::Parse, "p4.density: expected name(args)");
    const auto name = text::trim(spec.substr(0, open));
    const auto args = text::parse_double_list(spec.substr(open + 1, close - open - 1));
    if (name == "power") {
        if (args.size() != 3) throw Error(ErrorCode::Parse, "power density takes (c, alpha, M)");
        return P4Measure::power(args[0], args[1], args[2]);
    }
    throw Error(ErrorCode::Parse, "unknown density family '" + std::string(name) + "'");
}

std::vector<Atom> parse_atoms(std::string_view spec) {
    std::vector<Atom> atoms;
    for (auto item : text::split(spec, ',')) {
        const auto colon = item.find(':');
        if (colon == std::string_view::npos) throw Error(ErrorCode::Parse, "p4.atoms entries are location:mass");
        atoms.push_back({text::parse_double(item.substr(0, colon)), text::parse_double(item.substr(colon + 1))});
    }
    return atoms;
}

}  // namespace

FellerParams parse_params(std::string_view text_in) {
    auto kv = text::parse_key_values(text_in);
    auto take = [&kv](const std::string& key) -> std::string {
        auto it = kv.find(key);
        if (it == kv.end()) return {};
        std::string v = it->second;
        kv.erase(it);
        return v;
    };
    auto number = [&take](const std::string& key) {
        const auto v = take(key);
        return v.empty() ? 0.0 : text::parse_double(v);
    };
    const double p1 = number("p1");
    const double p2 = number("p2");
    const double p3 = number("p3");
    std::string kind = take("p4.kind");
    const std::string atoms = take("p4.atoms");
    const std::string density = take("p4.density");
    if (!kv.empty()) throw Error(ErrorCode::Parse, "unknown parameter key '" + kv.begin()->first + "'");
    if (kind.empty()) kind = !atoms.empty() ? "atoms" : !density.empty() ? "density" : "zero";

    P4Measure p4;
    if (kind == "zero") {
        if (!atoms.empty() || !density.empty()) throw Error(ErrorCode::Parse, "p4.kind = zero with p4 data present");
    } else if (kind == "atoms") {
        p4 = P4Measure::atoms(parse_atoms(atoms));
    } else if (kind == "density") {
        if (density.empty()) throw Error(ErrorCode::Parse, "p4.kind = density needs p4.density");
        p4 = parse_density(density);
    } else {
        throw Error(ErrorCode::Parse, "unknown p4.kind '" + kind + "'");
    }
    return FellerParams(p1, p2, p3, std::move(p4));
}

FellerParams load_params(const std::string& path) { return parse_params(text::read_file(path)); }

}  // namespace fellerlab
