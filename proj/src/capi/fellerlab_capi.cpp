// SPDX-License-Identifier: MIT

#include "fellerlab/fellerlab.h"

#include "fellerlab/boundary_model.hpp"
#include "fellerlab/brw_core.hpp"
#include "fellerlab/generator_lab.hpp"
#include "fellerlab/genfun.hpp"
#include "fellerlab/harness.hpp"
#include "fellerlab/reference_laws.hpp"
#include "fellerlab/scaling.hpp"
#include "fellerlab/text_io.hpp"

#include <cmath>
#include <new>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

using namespace fellerlab;

struct fl_params {
    FellerParams value;
};

struct fl_measure {
    JumpingMeasure value;
};

struct fl_text {
    std::string value;
};

namespace {

thread_local std::string g_last_error;

fl_status to_status(ErrorCode code) { return static_cast<fl_status>(static_cast<int>(code)); }

fl_status fail(fl_status status, std::string message) {
    g_last_error = std::move(message);
    return status;
}

/// Runs body and converts exceptions into status codes.
template <class Body>
fl_status guarded(Body&& body) {
    try {
        g_last_error.clear();
        body();
        return FL_OK;
    } catch (const Error& e) {
        return fail(to_status(e.code()), e.what());
    } catch (const std::bad_alloc&) {
        return fail(FL_ERR_INTERNAL, "out of memory");
    } catch (const std::exception& e) {
        return fail(FL_ERR_INTERNAL, e.what());
    } catch (...) {
        return fail(FL_ERR_INTERNAL, "unknown error");
    }
}

void require(const void* p, const char* what) {
    if (p == nullptr) throw Error(ErrorCode::InvalidArgument, std::string(what) + " is NULL");
}

fl_text* make_text(std::string s) { return new fl_text{std::move(s)}; }

std::optional<double> optional_real(double v) {
    if (std::isnan(v)) return std::nullopt;
    return v;
}

std::optional<Regime> to_regime(fl_regime r) {
    switch (r) {
    case FL_REGIME_AUTO: return std::nullopt;
    case FL_REGIME_SOJOURN: return Regime::Sojourn;
    case FL_REGIME_REFLECTION: return Regime::Reflection;
    }
    throw Error(ErrorCode::InvalidArgument, "unknown regime value");
}

fl_regime from_regime(Regime r) { return r == Regime::Sojourn ? FL_REGIME_SOJOURN : FL_REGIME_REFLECTION; }

Regime resolve_regime(const FellerParams& p, fl_regime r) {
    const auto explicit_regime = to_regime(r);
    return explicit_regime ? *explicit_regime : infer_regime(p);
}

template <class T>
std::vector<T> copy_list(const T* data, std::size_t count, const char* what) {
    if (count > 0) require(data, what);
    return std::vector<T>(data, data + count);
}

}  // namespace

extern "C" {

const char* fl_version(void) { return kLibraryVersion.data(); }

const char* fl_last_error(void) { return g_last_error.c_str(); }

const char* fl_status_name(fl_status status) {
    switch (status) {
    case FL_OK: return "ok";
    case FL_ERR_INVALID_ARGUMENT: return "invalid argument";
    case FL_ERR_DOMAIN: return "domain error";
    case FL_ERR_INADMISSIBLE: return "inadmissible parameters";
    case FL_ERR_N_TOO_SMALL: return "n too small";
    case FL_ERR_BUDGET_EXCEEDED: return "budget exceeded";
    case FL_ERR_PARSE: return "parse error";
    case FL_ERR_IO: return "i/o error";
    case FL_ERR_INTERNAL: return "internal error";
    }
    return "unknown status";
}

const char* fl_text_data(const fl_text* text) { return text ? text->value.c_str() : ""; }
size_t fl_text_size(const fl_text* text) { return text ? text->value.size() : 0; }
void fl_text_free(fl_text* text) { delete text; }

fl_status fl_params_create(double p1, double p2, double p3, fl_params** out) {
    return guarded([&] {
        require(out, "out");
        *out = new fl_params{FellerParams(p1, p2, p3)};
    });
}

fl_status fl_params_add_atom(fl_params* params, double location, double mass) {
    return guarded([&] {
        require(params, "params");
        const auto& p = params->value;
        std::vector<Atom> atoms;
        if (p.p4().kind() == P4Measure::Kind::Atoms)
            atoms = p.p4().atom_list();
        else if (p.p4().kind() != P4Measure::Kind::Zero)
            throw Error(ErrorCode::InvalidArgument, "p4 already has a density");
        atoms.push_back({location, mass});
        params->value = FellerParams(p.p1(), p.p2(), p.p3(), P4Measure::atoms(std::move(atoms)));
    });
}

fl_status fl_params_set_power_density(fl_params* params, double c, double alpha, double support_max) {
    return guarded([&] {
        require(params, "params");
        const auto& p = params->value;
        if (p.p4().kind() == P4Measure::Kind::Atoms)
            throw Error(ErrorCode::InvalidArgument, "p4 already has atoms");
        params->value = FellerParams(p.p1(), p.p2(), p.p3(), P4Measure::power(c, alpha, support_max));
    });
}

fl_status fl_params_parse(const char* text, fl_params** out) {
    return guarded([&] {
        require(text, "text");
        require(out, "out");
        *out = new fl_params{parse_params(text)};
    });
}

fl_status fl_params_load(const char* path, fl_params** out) {
    return guarded([&] {
        require(path, "path");
        require(out, "out");
        *out = new fl_params{load_params(path)};
    });
}

fl_status fl_params_preset(const char* name, double p1, double p2, double p3, fl_params** out, fl_regime* regime) {
    return guarded([&] {
        require(name, "name");
        require(out, "out");
        const auto p = preset(name, {optional_real(p1), optional_real(p2), optional_real(p3)});
        *out = new fl_params{p.params};
        if (regime) *regime = from_regime(p.regime);
    });
}

void fl_params_free(fl_params* params) { delete params; }

fl_status fl_params_validate(const fl_params* params, int* admissible, fl_text** reason) {
    return guarded([&] {
        require(params, "params");
        require(admissible, "admissible");
        const auto report = validate(params->value);
        *admissible = report.admissible ? 1 : 0;
        if (reason) *reason = make_text(report.reason);
    });
}

fl_status fl_params_boundary_stage(const fl_params* params, double* sojourn_mean, double* reflection_time,
                                   double* total) {
    return guarded([&] {
        require(params, "params");
        const auto s = boundary_stage(params->value);
        if (sojourn_mean) *sojourn_mean = s.sojourn_mean;
        if (reflection_time) *reflection_time = s.reflection_time;
        if (total) *total = s.total;
    });
}

fl_status fl_params_describe(const fl_params* params, fl_text** out) {
    return guarded([&] {
        require(params, "params");
        require(out, "out");
        *out = make_text(params->value.describe());
    });
}

fl_status fl_measure_build(const fl_params* params, fl_regime regime, int64_t n, int auto_bump, fl_measure** out,
                           int64_t* n_used) {
    try {
        g_last_error.clear();
        require(params, "params");
        require(out, "out");
        const ScalingScheme scheme(params->value, resolve_regime(params->value, regime), n);
        if (auto_bump) {
            auto [measure, used] = build_measure_auto_bump(scheme);
            *out = new fl_measure{std::move(measure)};
            if (n_used) *n_used = used;
        } else {
            *out = new fl_measure{build_measure(scheme)};
            if (n_used) *n_used = n;
        }
        return FL_OK;
    } catch (const NTooSmallError& e) {
        if (n_used) *n_used = e.suggested_n();
        return fail(FL_ERR_N_TOO_SMALL, e.what());
    } catch (...) {
        return guarded([] { throw; });
    }
}

fl_status fl_measure_build_pure_jump_experimental(const fl_params* params, int64_t n, fl_measure** out) {
    return guarded([&] {
        require(params, "params");
        require(out, "out");
        *out = new fl_measure{build_pure_jump_measure_experimental(params->value, n)};
    });
}

fl_status fl_measure_from_spec(const char* spec, fl_measure** out) {
    return guarded([&] {
        require(spec, "spec");
        require(out, "out");
        *out = new fl_measure{JumpingMeasure::from_spec(spec)};
    });
}

fl_status fl_measure_parse(const char* text, fl_measure** out) {
    return guarded([&] {
        require(text, "text");
        require(out, "out");
        *out = new fl_measure{JumpingMeasure::parse(text)};
    });
}

fl_status fl_measure_format(const fl_measure* measure, fl_text** out) {
    return guarded([&] {
        require(measure, "measure");
        require(out, "out");
        *out = make_text(measure->value.format());
    });
}

double fl_measure_kill(const fl_measure* measure) { return measure ? measure->value.kill() : std::nan(""); }

double fl_measure_prob(const fl_measure* measure, int64_t j) {
    return measure ? measure->value.prob(j) : std::nan("");
}

int64_t fl_measure_max_index(const fl_measure* measure) { return measure ? measure->value.max_index() : -1; }

fl_status fl_measure_discrete_stage(const fl_measure* measure, int64_t n, double* xi_n) {
    return guarded([&] {
        require(measure, "measure");
        require(xi_n, "xi_n");
        *xi_n = discrete_stage(measure->value, n).xi_n;
    });
}

void fl_measure_free(fl_measure* measure) { delete measure; }

fl_status fl_genfun_closed(const fl_measure* measure, double x, double* out) {
    return guarded([&] {
        require(measure, "measure");
        require(out, "out");
        *out = genfun::f_closed(measure->value, x);
    });
}

fl_status fl_genfun_series(const fl_measure* measure, int terms, double x, double* partial, double* tail) {
    return guarded([&] {
        require(measure, "measure");
        const auto series = genfun::f_series(measure->value, terms);
        if (partial) *partial = genfun::partial_sum(series, x);
        if (tail) *tail = genfun::tail_bound(terms, x);
    });
}

fl_status fl_genfun_table(const fl_measure* measure, const double* xs, size_t count, int terms, fl_text** out) {
    return guarded([&] {
        require(measure, "measure");
        require(out, "out");
        const auto grid = copy_list(xs, count, "xs");
        *out = make_text(genfun::table_csv(measure->value, grid, terms));
    });
}

fl_status fl_occupation_bound(int64_t m, double* out) {
    return guarded([&] {
        require(out, "out");
        *out = genfun::occupation_bound(m);
    });
}

fl_status fl_catalan(int i, int j0, uint64_t* out) {
    return guarded([&] {
        require(out, "out");
        *out = genfun::catalan(i, j0);
    });
}

fl_status fl_first_passage(int i, int j, double* out) {
    return guarded([&] {
        require(out, "out");
        *out = genfun::catalan_first_passage(i, j);
    });
}

fl_status fl_simulate_csv(const fl_measure* measure, int64_t start, int64_t steps, int64_t paths, uint64_t seed,
                          int full_paths, fl_text** out) {
    return guarded([&] {
        require(measure, "measure");
        require(out, "out");
        const auto ensemble = simulate(measure->value, start, steps, paths, seed);
        *out = make_text(full_paths ? ensemble_paths_csv(ensemble) : ensemble_summary_csv(ensemble));
    });
}

void fl_experiment_config_init(fl_experiment_config* config) {
    if (!config) return;
    static const double kDefaultT = 1.0;
    *config = fl_experiment_config{};
    config->p1 = config->p2 = config->p3 = std::nan("");
    config->regime = FL_REGIME_AUTO;
    config->t_list = &kDefaultT;
    config->t_count = 1;
    config->paths = 20000;
    config->statistic_max = std::nan("");
    config->require_decrease = 1;
    config->atom_tolerance = std::nan("");
    config->kill_tolerance = std::nan("");
    config->auto_bump = 1;
}

fl_status fl_converge(const fl_experiment_config* config, fl_text** csv, int* pass, fl_text** failures) {
    return guarded([&] {
        require(config, "config");
        require(csv, "csv");
        ExperimentConfig c;
        if (config->preset && *config->preset) c.preset = config->preset;
        c.coefficients = {optional_real(config->p1), optional_real(config->p2), optional_real(config->p3)};
        if (config->params) c.params = config->params->value;
        c.regime = to_regime(config->regime);
        c.x0 = config->x0;
        c.t_list = copy_list(config->t_list, config->t_count, "t_list");
        c.n_list = copy_list(config->n_list, config->n_count, "n_list");
        c.paths = config->paths;
        c.seed = config->seed;
        if (config->statistic) c.statistic = parse_statistic(config->statistic);
        if (!std::isnan(config->statistic_max)) c.thresholds.statistic_max = config->statistic_max;
        c.thresholds.require_decrease = config->require_decrease != 0;
        c.thresholds.atom_tolerance = optional_real(config->atom_tolerance);
        c.thresholds.kill_tolerance = optional_real(config->kill_tolerance);
        c.auto_bump = config->auto_bump != 0;
        c.n_ref = config->n_ref;
        c.reference_paths = config->reference_paths;
        c.relabel_killed = config->relabel_killed != 0;
        const auto report = run_convergence(c);
        std::ostringstream failed;
        for (const auto& f : report.failures) failed << f << '\n';
        *csv = make_text(convergence_csv(report, config->reproducible != 0));
        if (pass) *pass = report.pass ? 1 : 0;
        if (failures) *failures = make_text(failed.str());
    });
}

fl_status fl_occupation_scaling(const char* preset_name, double p1, double p2, double p3, const int64_t* n_list,
                                size_t n_count, double t, int64_t paths, uint64_t seed, int reproducible,
                                fl_text** out) {
    return guarded([&] {
        require(preset_name, "preset");
        require(out, "out");
        const auto rows = occupation_scaling(preset_name, {optional_real(p1), optional_real(p2), optional_real(p3)},
                                             copy_list(n_list, n_count, "n_list"), t, paths, seed);
        *out = make_text(occupation_csv(rows, reproducible != 0));
    });
}

fl_status fl_check_generator(const fl_params* params, fl_regime regime, double lambda1, double lambda2,
                             const int64_t* n_list, size_t n_count, fl_text** csv, int* pass) {
    return guarded([&] {
        require(params, "params");
        require(csv, "csv");
        const auto& p = params->value;
        const auto r = resolve_regime(p, regime);
        const auto tf = make_domain_function(p, lambda1, lambda2);
        const auto ns = copy_list(n_list, n_count, "n_list");
        const auto rows = consistency_residuals(p, r, tf, ns);
        bool ok = true;
        for (const auto& row : rows) ok = ok && row.interior_ok;
        for (const auto n : ns) {
            if (n > 1000) continue;  // the full interior sweep covers n^2 states
            const ScalingScheme scheme(p, r, n);
            const auto report = generator_bounds_check(scheme, build_measure(scheme), tf);
            ok = ok && report.interior_ok && report.boundary_ok;
        }
        *csv = make_text(consistency_csv(rows));
        if (pass) *pass = ok ? 1 : 0;
    });
}

fl_status fl_reference_csv(const char* law, double x0, double t, double p1, double p3, const double* ys, size_t count,
                           fl_text** out) {
    return guarded([&] {
        require(law, "law");
        require(out, "out");
        const std::string name = law;
        MarginalLaw m;
        if (name == "reflected")
            m = reflected_marginal(x0, t);
        else if (name == "absorbed")
            m = absorbed_marginal(x0, t, false);
        else if (name == "killed")
            m = absorbed_marginal(x0, t, true);
        else if (name == "exp_holding")
            m = exp_holding_marginal(p1, p3, t);
        else
            throw Error(ErrorCode::InvalidArgument, "unknown reference law '" + name + "'");
        const auto grid = copy_list(ys, count, "ys");
        *out = make_text(reference_csv(m, grid));
    });
}

}  // extern "C"
