// Command-line driver: convergence studies, stability probes, single solves.
//
//   acns converge  --scheme defect3_split --dim 2 --nx 64 --dt 0.2,0.1,0.05,0.025
//   acns stability --scheme gs2d --dim 2 --nx 32 --dt 0.1 --steps 500
//   acns solve     --scheme gs2d --dim 2 --nx 32 --dt 0.05 --t-final 1 --out state.snap
//
// Exit codes: 0 success, 2 invalid spec, 3 solver failure.

#include "acns/harness.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

namespace {

std::vector<double> parse_dt_list(const std::string& s) {
    std::vector<double> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (!item.empty()) out.push_back(std::stod(item));
    }
    return out;
}

// flat key = value file; '#' starts a comment; keys mirror the long CLI flags
std::map<std::string, std::string> read_config(const std::string& path) {
    std::map<std::string, std::string> kv;
    std::ifstream is(path);
    if (!is) throw acns::SpecError("cannot open config file: " + path);
    std::string line;
    while (std::getline(is, line)) {
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        const auto eq = line.find('=');
        if (eq == std::string::npos) continue;
        auto trim = [](std::string s) {
            const auto a = s.find_first_not_of(" \t\r");
            const auto b = s.find_last_not_of(" \t\r");
            return a == std::string::npos ? std::string{} : s.substr(a, b - a + 1);
        };
        const std::string key = trim(line.substr(0, eq));
        const std::string val = trim(line.substr(eq + 1));
        if (!key.empty()) kv[key] = val;
    }
    return kv;
}

struct CliOptions {
    std::string scheme = "defect3_split";
    int dim = 2;
    int nx = 64;
    std::string dt = "0.2,0.1,0.05,0.025";
    double t_final = 10.0;
    double nu = 1.0;
    double chi = 1.0;
    double lambda = 0.0;
    std::string case_id;
    bool nonlinear = false;
    std::string reference = "fine";
    std::string out;
    uint64_t seed = 0;
    int steps = 500;
    double solver_tol = 1e-10;
    std::string walltime = "measured";
    bool no_mean_adjust = false;
};

void apply_config(CliOptions& o, const std::map<std::string, std::string>& kv) {
    auto get = [&](const char* k) -> const std::string* {
        auto it = kv.find(k);
        return it == kv.end() ? nullptr : &it->second;
    };
    if (auto v = get("scheme")) o.scheme = *v;
    if (auto v = get("dim")) o.dim = std::stoi(*v);
    if (auto v = get("nx")) o.nx = std::stoi(*v);
    if (auto v = get("dt")) o.dt = *v;
    if (auto v = get("t-final")) o.t_final = std::stod(*v);
    if (auto v = get("nu")) o.nu = std::stod(*v);
    if (auto v = get("chi")) o.chi = std::stod(*v);
    if (auto v = get("lambda")) o.lambda = std::stod(*v);
    if (auto v = get("case")) o.case_id = *v;
    if (auto v = get("nonlinear")) o.nonlinear = (*v == "true" || *v == "1");
    if (auto v = get("reference")) o.reference = *v;
    if (auto v = get("out")) o.out = *v;
    if (auto v = get("seed")) o.seed = std::stoull(*v);
    if (auto v = get("steps")) o.steps = std::stoi(*v);
    if (auto v = get("solver-tol")) o.solver_tol = std::stod(*v);
    if (auto v = get("walltime")) o.walltime = *v;
}

acns::StudySpec build_spec(const CliOptions& o) {
    acns::StudySpec s;
    s.scheme = acns::scheme_from_string(o.scheme);
    s.dim = o.dim;
    s.nx = o.nx;
    s.dts = parse_dt_list(o.dt);
    s.t_final = o.t_final;
    s.nu = o.nu;
    s.chi = o.chi;
    s.lambda = o.lambda;
    s.nonlinear = o.nonlinear;
    s.case_id = o.case_id.empty() ? (o.dim == 2 ? "mms2d" : "mms3d") : o.case_id;
    if (o.reference == "fine")
        s.reference = acns::RefMode::FineDt;
    else if (o.reference == "analytic")
        s.reference = acns::RefMode::Analytic;
    else
        throw acns::SpecError("--reference must be 'analytic' or 'fine'");
    s.seed = o.seed;
    s.solver_tol = o.solver_tol;
    s.mean_adjust_pressure = !o.no_mean_adjust;
    if (o.walltime == "zero")
        s.zero_walltime = true;
    else if (o.walltime != "measured")
        throw acns::SpecError("--walltime must be 'measured' or 'zero'");
    s.stability_steps = o.steps;
    return s;
}

void add_common_flags(CLI::App* cmd, CliOptions& o, std::string& config_path) {
    cmd->add_option("--config", config_path, "flat key=value config file");
    cmd->add_option("--scheme", o.scheme, "time stepping scheme id");
    cmd->add_option("--dim", o.dim, "space dimension (2 or 3)");
    cmd->add_option("--nx", o.nx, "cells per axis");
    cmd->add_option("--dt", o.dt, "comma-separated dt list (descending)");
    cmd->add_option("--t-final", o.t_final, "final time");
    cmd->add_option("--nu", o.nu, "viscosity");
    cmd->add_option("--chi", o.chi, "artificial compressibility parameter");
    cmd->add_option("--lambda", o.lambda, "grad-div coefficient of the operator");
    cmd->add_option("--case", o.case_id, "manufactured case (mms2d|mms3d)");
    cmd->add_flag("--nonlinear", o.nonlinear, "include the advection term");
    cmd->add_option("--reference", o.reference, "error reference (analytic|fine)");
    cmd->add_option("--out", o.out, "output path (default stdout)");
    cmd->add_option("--seed", o.seed, "seed for randomized initial data");
    cmd->add_option("--steps", o.steps, "number of steps (stability)");
    cmd->add_option("--solver-tol", o.solver_tol, "relative linear-solver tolerance");
    cmd->add_option("--walltime", o.walltime,
                    "wall_seconds column: measured | zero (byte-reproducible)");
    cmd->add_flag("--no-mean-adjust", o.no_mean_adjust,
                  "report raw pressure error without mean adjustment");
}

std::ostream& open_out(const std::string& path, std::ofstream& file) {
    if (path.empty()) return std::cout;
    file.open(path);
    if (!file) throw std::runtime_error("cannot open output file: " + path);
    return file;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"MAC-grid artificial-compressibility Stokes/Navier-Stokes driver"};
    app.require_subcommand(1);

    CliOptions o;
    std::string config_path;
    auto* converge = app.add_subcommand("converge", "dt-convergence study, CSV error table");
    auto* stability = app.add_subcommand("stability", "f=0 energy trace for one dt");
    auto* solve = app.add_subcommand("solve", "single run, write final state snapshot");
    for (auto* cmd : {converge, stability, solve}) add_common_flags(cmd, o, config_path);

    // two-pass parse so CLI flags override config-file values
    try {
        app.parse(argc, argv);
        if (!config_path.empty()) {
            CliOptions fresh;
            apply_config(fresh, read_config(config_path));
            o = fresh;
            app.clear();
            app.parse(argc, argv);
        }
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    } catch (const acns::SpecError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }

    try {
        acns::StudySpec spec = build_spec(o);
        std::ofstream file;
        if (converge->parsed()) {
            acns::ErrorReport rep = acns::run_convergence(spec);
            acns::write_csv(rep, open_out(o.out, file));
        } else if (stability->parsed()) {
            if (spec.dts.size() != 1)
                throw acns::SpecError("stability takes a single --dt value");
            acns::StabilityResult res = acns::run_stability(spec, spec.dts[0], o.steps);
            acns::write_stability_csv(res, open_out(o.out, file));
        } else if (solve->parsed()) {
            if (spec.dts.size() != 1) throw acns::SpecError("solve takes a single --dt value");
            spec.validate();
            acns::RunResult r = acns::run_solve(spec, spec.dts[0], o.out);
            if (r.diverged) throw acns::DivergenceError(r.steps);
            std::cout << "steps=" << r.steps << " dt=" << r.dt_used
                      << " wall_seconds=" << (spec.zero_walltime ? 0.0 : r.wall_seconds)
                      << (o.out.empty() ? " (no snapshot written)" : " snapshot=" + o.out)
                      << "\n";
        }
    } catch (const acns::SpecError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const acns::SolveError& e) {
        std::cerr << "solver failure: " << e.what() << "\n";
        return 3;
    } catch (const acns::DivergenceError& e) {
        std::cerr << "solver failure: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
