// SPDX-License-Identifier: MIT
//
// Command-line front end. Talks to the library only through fellerlab.h.
//
// Exit codes: 0 success / thresholds met, 1 threshold failure, 2 usage or input error.

#include "fellerlab/fellerlab.h"

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <limits>
#include <memory>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace {

constexpr int kExitPass = 0;
constexpr int kExitThreshold = 1;
constexpr int kExitUsage = 2;

struct CliError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

void check(fl_status status) {
    if (status != FL_OK) throw CliError(std::string(fl_status_name(status)) + ": " + fl_last_error());
}

struct TextDeleter {
    void operator()(fl_text* t) const { fl_text_free(t); }
};
struct ParamsDeleter {
    void operator()(fl_params* p) const { fl_params_free(p); }
};
struct MeasureDeleter {
    void operator()(fl_measure* m) const { fl_measure_free(m); }
};
using Text = std::unique_ptr<fl_text, TextDeleter>;
using Params = std::unique_ptr<fl_params, ParamsDeleter>;
using Measure = std::unique_ptr<fl_measure, MeasureDeleter>;

std::string take(fl_text* raw) {
    Text t(raw);
    return {fl_text_data(t.get()), fl_text_size(t.get())};
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw CliError("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void emit(const std::string& out_path, const std::string& contents) {
    if (out_path.empty() || out_path == "-") {
        std::cout << contents;
        return;
    }
    std::ofstream out(out_path, std::ios::binary);
    if (!out) throw CliError("cannot write " + out_path);
    out << contents;
    if (!out) throw CliError("write failed for " + out_path);
}

constexpr double kUnset = std::numeric_limits<double>::quiet_NaN();

/// Options naming a boundary parameter set: --params FILE, --preset NAME or raw --p1/--p2/--p3/--atoms.
struct ParamSource {
    std::string file;
    std::string preset;
    double p1 = kUnset, p2 = kUnset, p3 = kUnset;
    std::string atoms;
    std::string regime = "auto";

    void attach(CLI::App* cmd) {
        auto* f = cmd->add_option("--params", file, "Boundary parameter file (key = value)");
        auto* p = cmd->add_option("--preset", preset,
                                  "absorbed | exponential_holding | sticky | mixed | reflected | elastic");
        f->excludes(p);
        cmd->add_option("--p1", p1, "Killing parameter (preset coefficient or raw value)");
        cmd->add_option("--p2", p2, "Reflection parameter");
        cmd->add_option("--p3", p3, "Sojourn parameter");
        cmd->add_option("--atoms", atoms, "Raw p4 atoms as location:mass, ...")->excludes(f)->excludes(p);
        cmd->add_option("--regime", regime, "auto | sojourn | reflection")
            ->check(CLI::IsMember({"auto", "sojourn", "reflection"}));
    }

    [[nodiscard]] fl_regime regime_value() const {
        if (regime == "sojourn") return FL_REGIME_SOJOURN;
        if (regime == "reflection") return FL_REGIME_REFLECTION;
        return FL_REGIME_AUTO;
    }

    /// Returns the parameters and the regime to use.
    std::pair<Params, fl_regime> resolve() const {
        fl_params* raw = nullptr;
        fl_regime r = regime_value();
        if (!file.empty()) {
            check(fl_params_load(file.c_str(), &raw));
        } else if (!preset.empty()) {
            fl_regime preset_regime = FL_REGIME_AUTO;
            check(fl_params_preset(preset.c_str(), p1, p2, p3, &raw, &preset_regime));
            if (r == FL_REGIME_AUTO) r = preset_regime;
        } else {
            if (std::isnan(p1) && std::isnan(p2) && std::isnan(p3))
                throw CliError("give --params, --preset, or raw --p1/--p2/--p3");
            auto value = [](double v) { return std::isnan(v) ? 0.0 : v; };
            check(fl_params_create(value(p1), value(p2), value(p3), &raw));
            Params guard(raw);
            std::stringstream items(atoms);
            std::string item;
            while (std::getline(items, item, ',')) {
                const auto colon = item.find(':');
                if (colon == std::string::npos) throw CliError("atom '" + item + "' is not location:mass");
                check(fl_params_add_atom(raw, std::stod(item.substr(0, colon)), std::stod(item.substr(colon + 1))));
            }
            guard.release();
        }
        return {Params(raw), r};
    }
};

/// --measure FILE or --p SPEC.
struct MeasureSource {
    std::string file;
    std::string spec;

    void attach(CLI::App* cmd) {
        auto* f = cmd->add_option("--measure", file, "Measure file (kill,p and j,p rows)");
        auto* s = cmd->add_option("--p", spec, "Compact measure, e.g. \"0:0.5,2:0.25,kill:0.25\"");
        f->excludes(s);
    }

    Measure resolve() const {
        fl_measure* raw = nullptr;
        if (!file.empty())
            check(fl_measure_parse(read_file(file).c_str(), &raw));
        else if (!spec.empty())
            check(fl_measure_from_spec(spec.c_str(), &raw));
        else
            throw CliError("give --measure or --p");
        return Measure(raw);
    }
};

int run_measure_build(const ParamSource& src, std::int64_t n, bool auto_bump, bool experimental, const std::string& out) {
    auto [params, regime] = src.resolve();
    fl_measure* raw = nullptr;
    if (experimental) {
        check(fl_measure_build_pure_jump_experimental(params.get(), n, &raw));
    } else {
        std::int64_t used = 0;
        const auto status = fl_measure_build(params.get(), regime, n, auto_bump ? 1 : 0, &raw, &used);
        check(status);
        if (used != n) std::cerr << "note: n raised from " << n << " to " << used << '\n';
    }
    Measure m(raw);
    fl_text* text = nullptr;
    check(fl_measure_format(m.get(), &text));
    emit(out, take(text));
    return kExitPass;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"fellerlab: boundary random walks approximating Feller's Brownian motions"};
    app.set_config("--config", "", "File of option values (key = value, [subcommand] sections)");
    app.set_version_flag("--version", std::string(fl_version()));
    app.require_subcommand(1);

    // measure build
    auto* measure_cmd = app.add_subcommand("measure", "Jumping measures")->require_subcommand(1);
    auto* build_cmd = measure_cmd->add_subcommand("build", "Build the scale-n jumping measure");
    ParamSource build_src;
    build_src.attach(build_cmd);
    std::int64_t build_n = 0;
    bool build_bump = false, build_experimental = false;
    std::string build_out;
    build_cmd->add_option("--n", build_n, "Scaling index n >= 2")->required();
    build_cmd->add_flag("--auto-bump", build_bump, "Double n until the residual probability is nonnegative");
    build_cmd->add_flag("--experimental-pure-jump", build_experimental,
                        "Candidate scheme for p2 = p3 = 0 (no convergence guarantee)");
    build_cmd->add_option("--out", build_out, "Output file (default stdout)");

    // simulate
    auto* sim_cmd = app.add_subcommand("simulate", "Simulate walks and write per-path CSV");
    MeasureSource sim_src;
    sim_src.attach(sim_cmd);
    std::int64_t sim_start = 0, sim_steps = 0, sim_paths = 1;
    std::uint64_t sim_seed = 0;
    bool sim_full = false;
    std::string sim_out;
    sim_cmd->add_option("--start", sim_start, "Initial state");
    sim_cmd->add_option("--steps", sim_steps, "Number of transitions")->required();
    sim_cmd->add_option("--paths", sim_paths, "Number of paths");
    sim_cmd->add_option("--seed", sim_seed, "Random seed")->required();
    sim_cmd->add_flag("--full-paths", sim_full, "One row per (path, step) instead of per path");
    sim_cmd->add_option("--out", sim_out, "Output file (default stdout)");

    // genfun eval | table | catalan | first-passage
    auto* gen_cmd = app.add_subcommand("genfun", "Return generating function and Catalan counts")
                        ->require_subcommand(1);
    auto* eval_cmd = gen_cmd->add_subcommand("eval", "Evaluate F(x) in closed form");
    MeasureSource eval_src;
    eval_src.attach(eval_cmd);
    double eval_x = 0.0;
    eval_cmd->add_option("--x", eval_x, "Point in [0, 1)")->required();
    auto* table_cmd = gen_cmd->add_subcommand("table", "Closed form against the truncated series");
    MeasureSource table_src;
    table_src.attach(table_cmd);
    std::vector<double> table_x{0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};
    int table_terms = 400;
    std::string table_out;
    table_cmd->add_option("--x", table_x, "Points in [0, 1)")->delimiter(',');
    table_cmd->add_option("--terms", table_terms, "Series terms K");
    table_cmd->add_option("--out", table_out, "Output file (default stdout)");
    auto* cat_cmd = gen_cmd->add_subcommand("catalan", "Shifted Catalan number M(i, j0)");
    int cat_i = 0, cat_j0 = 0;
    cat_cmd->add_option("--i", cat_i)->required();
    cat_cmd->add_option("--j0", cat_j0)->required();
    auto* fp_cmd = gen_cmd->add_subcommand("first-passage", "P_i(first hit of 0 at step j)");
    int fp_i = 0, fp_j = 0;
    fp_cmd->add_option("--i", fp_i)->required();
    fp_cmd->add_option("--j", fp_j)->required();

    // check generator
    auto* check_cmd = app.add_subcommand("check", "Generator consistency checks")->require_subcommand(1);
    auto* cg_cmd = check_cmd->add_subcommand("generator", "Compare L^(n) f with f''/2 for a domain function");
    ParamSource cg_src;
    cg_src.attach(cg_cmd);
    std::vector<std::int64_t> cg_n{10, 100, 1000};
    std::vector<double> cg_lambda{1.0, 2.0};
    std::string cg_out;
    cg_cmd->add_option("--n", cg_n, "Scaling indices")->delimiter(',');
    cg_cmd->add_option("--lambda", cg_lambda, "Exponential rates l1 < l2")->delimiter(',')->expected(2);
    cg_cmd->add_option("--out", cg_out, "Output file (default stdout)");

    // converge
    auto* conv_cmd = app.add_subcommand("converge", "Marginal-law convergence experiment");
    ParamSource conv_src;
    conv_src.attach(conv_cmd);
    double conv_x0 = 0.0;
    std::vector<double> conv_t{1.0};
    std::vector<std::int64_t> conv_n;
    std::int64_t conv_paths = 20000, conv_n_ref = 0, conv_ref_paths = 0;
    std::uint64_t conv_seed = 0;
    std::string conv_stat = "ks", conv_out;
    double conv_threshold = 0.03, conv_atom_tol = kUnset, conv_kill_tol = kUnset;
    bool conv_no_decrease = false, conv_no_bump = false, conv_relabel = false, conv_repro = false;
    conv_cmd->add_option("--x0", conv_x0, "Start point of the limit process");
    conv_cmd->add_option("--t", conv_t, "Observation times")->delimiter(',');
    conv_cmd->add_option("--n", conv_n, "Strictly increasing scaling indices")->delimiter(',')->required();
    conv_cmd->add_option("--paths", conv_paths, "Paths per n (>= 100)");
    conv_cmd->add_option("--seed", conv_seed, "Random seed")->required();
    conv_cmd->add_option("--statistic", conv_stat, "ks | cvm | mean_abs")
        ->check(CLI::IsMember({"ks", "cvm", "mean_abs"}));
    conv_cmd->add_option("--threshold", conv_threshold, "Maximum statistic at the largest n");
    conv_cmd->add_flag("--no-require-decrease", conv_no_decrease, "Do not require decay from smallest to largest n");
    conv_cmd->add_option("--atom-tol", conv_atom_tol, "Tolerance on the atom at 0 at the largest n");
    conv_cmd->add_option("--kill-tol", conv_kill_tol, "Tolerance on the killed mass at the largest n");
    conv_cmd->add_flag("--no-auto-bump", conv_no_bump, "Fail instead of raising n when it is too small");
    conv_cmd->add_option("--n-ref", conv_n_ref, "Fine-grid resolution (default 4 x max n)");
    conv_cmd->add_option("--reference-paths", conv_ref_paths, "Fine-grid paths (default --paths)");
    conv_cmd->add_flag("--relabel-killed", conv_relabel, "Treat absorption at 0 as killing");
    conv_cmd->add_flag("--reproducible", conv_repro, "Omit the timestamp comment line");
    conv_cmd->add_option("--out", conv_out, "Output file (default stdout)");

    // occupation
    auto* occ_cmd = app.add_subcommand("occupation", "Expected visits to 0 against the occupation bound");
    std::string occ_preset;
    double occ_p1 = kUnset, occ_p2 = kUnset, occ_p3 = kUnset, occ_t = 1.0;
    std::vector<std::int64_t> occ_n{10, 100};
    std::int64_t occ_paths = 20000;
    std::uint64_t occ_seed = 0;
    bool occ_repro = false;
    std::string occ_out;
    occ_cmd->add_option("--preset", occ_preset, "Preset name")->required();
    occ_cmd->add_option("--p1", occ_p1, "Preset killing coefficient");
    occ_cmd->add_option("--p2", occ_p2, "Preset reflection coefficient");
    occ_cmd->add_option("--p3", occ_p3, "Preset sojourn coefficient");
    occ_cmd->add_option("--n", occ_n, "Scaling indices")->delimiter(',');
    occ_cmd->add_option("--t", occ_t, "Horizon in rescaled time");
    occ_cmd->add_option("--paths", occ_paths, "Paths per n");
    occ_cmd->add_option("--seed", occ_seed, "Random seed")->required();
    occ_cmd->add_flag("--reproducible", occ_repro, "Omit the timestamp comment line");
    occ_cmd->add_option("--out", occ_out, "Output file (default stdout)");

    // reference
    auto* ref_cmd = app.add_subcommand("reference", "Closed-form reference CDF on a grid");
    std::string ref_law;
    double ref_x0 = 0.0, ref_t = 1.0, ref_p1 = 1.0, ref_p3 = 1.0;
    std::vector<double> ref_grid;
    std::string ref_out;
    ref_cmd->add_option("--law", ref_law, "reflected | absorbed | killed | exp_holding")
        ->required()
        ->check(CLI::IsMember({"reflected", "absorbed", "killed", "exp_holding"}));
    ref_cmd->add_option("--x0", ref_x0, "Start point (ignored by exp_holding)");
    ref_cmd->add_option("--t", ref_t, "Time");
    ref_cmd->add_option("--p1", ref_p1, "Killing parameter for exp_holding");
    ref_cmd->add_option("--p3", ref_p3, "Sojourn parameter for exp_holding");
    ref_cmd->add_option("--grid", ref_grid, "Points y")->delimiter(',')->required();
    ref_cmd->add_option("--out", ref_out, "Output file (default stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kExitPass : kExitUsage;
    }

    try {
        if (build_cmd->parsed())
            return run_measure_build(build_src, build_n, build_bump, build_experimental, build_out);

        if (sim_cmd->parsed()) {
            auto m = sim_src.resolve();
            fl_text* csv = nullptr;
            check(fl_simulate_csv(m.get(), sim_start, sim_steps, sim_paths, sim_seed, sim_full ? 1 : 0, &csv));
            emit(sim_out, take(csv));
            return kExitPass;
        }

        if (eval_cmd->parsed()) {
            auto m = eval_src.resolve();
            double value = 0.0;
            check(fl_genfun_closed(m.get(), eval_x, &value));
            std::ostringstream os;
            os.precision(17);
            os << value;
            std::string s = os.str();
            if (s.find_first_of(".eEn") == std::string::npos) s += ".0";
            std::cout << s << '\n';
            return kExitPass;
        }
        if (table_cmd->parsed()) {
            auto m = table_src.resolve();
            fl_text* csv = nullptr;
            check(fl_genfun_table(m.get(), table_x.data(), table_x.size(), table_terms, &csv));
            emit(table_out, take(csv));
            return kExitPass;
        }
        if (cat_cmd->parsed()) {
            std::uint64_t value = 0;
            check(fl_catalan(cat_i, cat_j0, &value));
            std::cout << value << '\n';
            return kExitPass;
        }
        if (fp_cmd->parsed()) {
            double value = 0.0;
            check(fl_first_passage(fp_i, fp_j, &value));
            std::cout.precision(17);
            std::cout << value << '\n';
            return kExitPass;
        }

        if (cg_cmd->parsed()) {
            auto [params, regime] = cg_src.resolve();
            fl_text* csv = nullptr;
            int pass = 0;
            check(fl_check_generator(params.get(), regime, cg_lambda.at(0), cg_lambda.at(1), cg_n.data(), cg_n.size(),
                                     &csv, &pass));
            emit(cg_out, take(csv));
            return pass ? kExitPass : kExitThreshold;
        }

        if (conv_cmd->parsed()) {
            auto [params, regime] = conv_src.resolve();
            fl_experiment_config c;
            fl_experiment_config_init(&c);
            c.params = params.get();
            c.regime = regime;
            c.x0 = conv_x0;
            c.t_list = conv_t.data();
            c.t_count = conv_t.size();
            c.n_list = conv_n.data();
            c.n_count = conv_n.size();
            c.paths = conv_paths;
            c.seed = conv_seed;
            c.statistic = conv_stat.c_str();
            c.statistic_max = conv_threshold;
            c.require_decrease = conv_no_decrease ? 0 : 1;
            c.atom_tolerance = conv_atom_tol;
            c.kill_tolerance = conv_kill_tol;
            c.auto_bump = conv_no_bump ? 0 : 1;
            c.n_ref = conv_n_ref;
            c.reference_paths = conv_ref_paths;
            c.relabel_killed = conv_relabel ? 1 : 0;
            c.reproducible = conv_repro ? 1 : 0;
            fl_text* csv = nullptr;
            fl_text* failures = nullptr;
            int pass = 0;
            check(fl_converge(&c, &csv, &pass, &failures));
            emit(conv_out, take(csv));
            const auto why = take(failures);
            if (!pass) std::cerr << why;
            return pass ? kExitPass : kExitThreshold;
        }

        if (occ_cmd->parsed()) {
            fl_text* csv = nullptr;
            check(fl_occupation_scaling(occ_preset.c_str(), occ_p1, occ_p2, occ_p3, occ_n.data(), occ_n.size(), occ_t,
                                        occ_paths, occ_seed, occ_repro ? 1 : 0, &csv));
            emit(occ_out, take(csv));
            return kExitPass;
        }

        if (ref_cmd->parsed()) {
            fl_text* csv = nullptr;
            check(fl_reference_csv(ref_law.c_str(), ref_x0, ref_t, ref_p1, ref_p3, ref_grid.data(), ref_grid.size(),
                                   &csv));
            emit(ref_out, take(csv));
            return kExitPass;
        }
    } catch (const CliError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    }
    std::cerr << app.help();
    return kExitUsage;
}
