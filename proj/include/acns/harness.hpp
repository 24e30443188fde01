#pragma once

#include "acns/manufactured.hpp"
#include "acns/schemes.hpp"

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace acns {

enum class RefMode { Analytic, FineDt };

/// One convergence/stability/solve request (mirrors the CLI flags).
struct StudySpec {
    SchemeId scheme = SchemeId::defect3_split;
    int dim = 2;
    int nx = 64;                 // cells per axis
    std::vector<double> dts;     // strictly decreasing
    double t_final = 10.0;
    double nu = 1.0;
    double chi = 1.0;
    double lambda = 0.0;
    bool nonlinear = false;
    std::string case_id = "mms2d";
    RefMode reference = RefMode::FineDt;
    int ref_factor = 8;          // dt_ref = min(dt)/ref_factor
    uint64_t seed = 0;
    double solver_tol = 1e-10;
    bool mean_adjust_pressure = true;
    bool zero_walltime = false;  // print wall_seconds as 0 (byte-reproducible output)
    int stability_steps = 500;

    SchemeConfig scheme_config(double dt) const;
    void validate() const;
};

struct ReportRow {
    double dt = 0.0;
    int steps = 0;
    double err_u = 0.0, err_p = 0.0, err_div = 0.0;
    std::optional<double> order_u, order_p, order_div;
    double wall_seconds = 0.0;
    bool diverged = false;
};

struct ErrorReport {
    StudySpec spec;
    std::vector<ReportRow> rows;
};

/// Final state of a single run (also the unit the convergence study repeats).
struct RunResult {
    VelocityField u;
    ScalarField p;
    double dt_used = 0.0;
    int steps = 0;
    bool diverged = false;
    double wall_seconds = 0.0;
};

/// Advance the scheme from the manufactured initial data to t_final.
RunResult run_single(const StudySpec& spec, double dt);

ErrorReport run_convergence(const StudySpec& spec);

/// CSV with header dt,err_u,err_p,err_div,order_u,order_p,order_div,wall_seconds
void write_csv(const ErrorReport& r, std::ostream& os);
std::string csv_string(const ErrorReport& r);

struct EnergyTraceRow {
    int step;
    EnergyBreakdown e;
};

struct StabilityResult {
    std::vector<EnergyTraceRow> trace;
    bool monotone = true;
    double worst_increase = 0.0; // max relative per-step increase
    bool heuristic = false;
};

/// f = 0, homogeneous walls, random solenoidal data; N steps of energy tracking.
StabilityResult run_stability(const StudySpec& spec, double dt, int nsteps);
void write_stability_csv(const StabilityResult& r, std::ostream& os);

/// Single solve writing the final state snapshot to `path`.
RunResult run_solve(const StudySpec& spec, double dt, const std::string& path);

/// Raw binary snapshot (exact bit-level round trip, ghost layers included).
void save_snapshot(const std::string& path, const VelocityField& u, const ScalarField& p,
                   double time);
struct Snapshot {
    MacGrid grid;
    VelocityField u;
    ScalarField p;
    double time;
};
Snapshot load_snapshot(const std::string& path);

/// log(e0/e1)/log(dt0/dt1); equals log2 of the error ratio for dt halvings.
double observed_order(double e0, double e1, double dt0, double dt1);

} // namespace acns
