#include "acns/harness.hpp"

#include "acns/operators.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

namespace acns {

SchemeConfig StudySpec::scheme_config(double dt) const {
    SchemeConfig c;
    c.scheme = scheme;
    c.dim = dim;
    c.dt = dt;
    c.nu = nu;
    c.chi = chi;
    c.lambda = lambda;
    c.nonlinear = nonlinear;
    c.solver_tol = solver_tol;
    return c;
}

void StudySpec::validate() const {
    if (dts.empty()) throw SpecError("dt list is empty");
    for (size_t i = 1; i < dts.size(); ++i)
        if (dts[i] >= dts[i - 1]) throw SpecError("dt list must be strictly decreasing");
    for (double dt : dts)
        if (dt <= 0) throw SpecError("dt must be positive");
    if (t_final <= 0) throw SpecError("t_final must be positive");
    if (nx < 2) throw SpecError("nx must be at least 2");
    if (ref_factor < 2) throw SpecError("ref-factor must be at least 2");
    const AnalyticCase c = AnalyticCase::by_id(case_id);
    if (c.dim != dim) throw SpecError("case " + case_id + " is for dim " +
                                      std::to_string(c.dim));
    scheme_config(dts.front()).validate();
}

namespace {

// round dt down so that t_final/dt is integral
std::pair<double, int> adjust_dt(double dt, double t_final) {
    int steps = static_cast<int>(std::ceil(t_final / dt - 1e-9));
    return {t_final / steps, steps};
}

Forcing make_forcing(const AnalyticCase& c, const StudySpec& spec) {
    const double nu = spec.nu;
    const bool nl = spec.nonlinear;
    return Forcing{[c, nu, nl](int k, double x, double y, double z, double t) {
        return nl ? forcing_ns(c, nu, k, x, y, z, t)
                  : forcing_stokes(c, nu, k, x, y, z, t);
    }};
}

} // namespace

double observed_order(double e0, double e1, double dt0, double dt1) {
    if (e0 <= 0 || e1 <= 0) return 0.0;
    return std::log(e0 / e1) / std::log(dt0 / dt1);
}

RunResult run_single(const StudySpec& spec, double dt) {
    const AnalyticCase acase = AnalyticCase::by_id(spec.case_id);
    MacGrid g(spec.dim, {spec.nx, spec.nx, spec.nx});
    auto [dt_used, steps] = adjust_dt(dt, spec.t_final);
    SchemeConfig cfg = spec.scheme_config(dt_used);
    SimState s = make_state(g, cfg);
    init_manufactured(s, acase, cfg);
    const Forcing f = make_forcing(acase, spec);
    const VelocityBC bc = acase.velocity_bc();

    RunResult res{VelocityField(g), ScalarField(g, Loc::Cell), dt_used, steps, false, 0.0};
    const auto tic = std::chrono::steady_clock::now();
    const int calls = steps + composite_lag(spec.scheme);
    const bool half_step = spec.scheme == SchemeId::dirsplit1 ||
                           spec.scheme == SchemeId::dirsplit_defect2;
    try {
        for (int i = 0; i < calls; ++i) step(s, cfg, f, bc);
        res.u = s.u_now;
        res.p = s.p_now;
        if (half_step) {
            // the staggered pressure variables bracket T; their mean is the
            // second-order pressure at T itself (the p-bar sequence)
            axpy(1.0, s.p_prev, res.p);
            scale(res.p, 0.5);
        }
    } catch (const DivergenceError&) {
        res.diverged = true;
        res.u = s.u_now;
        res.p = s.p_now;
    } catch (const SolveError&) {
        res.diverged = true;
        res.u = s.u_now;
        res.p = s.p_now;
    }
    res.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - tic).count();
    return res;
}

ErrorReport run_convergence(const StudySpec& spec) {
    spec.validate();
    const AnalyticCase acase = AnalyticCase::by_id(spec.case_id);
    ErrorReport rep{spec, {}};

    std::optional<RunResult> ref;
    if (spec.reference == RefMode::FineDt) {
        double dt_ref = spec.dts.back() / spec.ref_factor;
        ref = run_single(spec, dt_ref);
        if (ref->diverged) throw SolveError("reference run diverged", {});
    }

    for (double dt : spec.dts) {
        RunResult r = run_single(spec, dt);
        ReportRow row;
        row.dt = r.dt_used;
        row.steps = r.steps;
        row.wall_seconds = spec.zero_walltime ? 0.0 : r.wall_seconds;
        row.diverged = r.diverged;
        if (r.diverged) {
            row.err_u = row.err_p = row.err_div = std::nan("");
        } else {
            ErrorTriple e = ref ? evaluate_errors_ref(r.u, r.p, ref->u, ref->p,
                                                      spec.mean_adjust_pressure)
                                : evaluate_errors(r.u, r.p, acase, spec.t_final,
                                                  spec.mean_adjust_pressure);
            row.err_u = e.err_u;
            row.err_p = e.err_p;
            row.err_div = e.err_div;
        }
        if (!rep.rows.empty() && !row.diverged && !rep.rows.back().diverged) {
            const ReportRow& prev = rep.rows.back();
            row.order_u = observed_order(prev.err_u, row.err_u, prev.dt, row.dt);
            row.order_p = observed_order(prev.err_p, row.err_p, prev.dt, row.dt);
            row.order_div = observed_order(prev.err_div, row.err_div, prev.dt, row.dt);
        }
        rep.rows.push_back(std::move(row));
    }
    return rep;
}

namespace {

std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

} // namespace

void write_csv(const ErrorReport& r, std::ostream& os) {
    os << "dt,err_u,err_p,err_div,order_u,order_p,order_div,wall_seconds\n";
    for (const auto& row : r.rows) {
        os << fmt17(row.dt) << ',' << fmt17(row.err_u) << ',' << fmt17(row.err_p) << ','
           << fmt17(row.err_div) << ',';
        os << (row.order_u ? fmt17(*row.order_u) : "") << ','
           << (row.order_p ? fmt17(*row.order_p) : "") << ','
           << (row.order_div ? fmt17(*row.order_div) : "") << ','
           << fmt17(row.wall_seconds) << '\n';
    }
}

std::string csv_string(const ErrorReport& r) {
    std::ostringstream os;
    write_csv(r, os);
    return os.str();
}

StabilityResult run_stability(const StudySpec& spec, double dt, int nsteps) {
    MacGrid g(spec.dim, {spec.nx, spec.nx, spec.nx});
    SchemeConfig cfg = spec.scheme_config(dt);
    cfg.solver_tol = std::min(spec.solver_tol, 1e-12);
    cfg.solver_cap_factor = 400; // tight tolerance on small grids needs headroom
    SimState s = make_state(g, cfg);
    init_solenoidal(s, spec.seed);
    const Forcing f{};
    const VelocityBC bc{};

    StabilityResult res;
    EnergyBreakdown e = energy(s, cfg);
    res.heuristic = e.heuristic;
    res.trace.push_back({0, e});
    double prev_total = e.total();
    for (int n = 1; n <= nsteps; ++n) {
        step(s, cfg, f, bc);
        e = energy(s, cfg);
        res.trace.push_back({n, e});
        const double tot = e.total();
        if (prev_total > 0) {
            const double inc = (tot - prev_total) / prev_total;
            res.worst_increase = std::max(res.worst_increase, inc);
            if (inc > 1e-12) res.monotone = false;
        }
        prev_total = tot;
    }
    return res;
}

void write_stability_csv(const StabilityResult& r, std::ostream& os) {
    os << "step,kinetic,pressure,dir_x,dir_y,dir_z,seminorm,total\n";
    for (const auto& row : r.trace) {
        os << row.step << ',' << fmt17(row.e.kinetic) << ',' << fmt17(row.e.pressure) << ','
           << fmt17(row.e.directional[0]) << ',' << fmt17(row.e.directional[1]) << ','
           << fmt17(row.e.directional[2]) << ',' << fmt17(row.e.seminorm) << ','
           << fmt17(row.e.total()) << '\n';
    }
    os << "# monotone=" << (r.monotone ? "true" : "false")
       << " worst_rel_increase=" << fmt17(r.worst_increase)
       << (r.heuristic ? " functional=heuristic" : " functional=proved") << '\n';
}

RunResult run_solve(const StudySpec& spec, double dt, const std::string& path) {
    RunResult r = run_single(spec, dt);
    if (!path.empty()) save_snapshot(path, r.u, r.p, spec.t_final);
    return r;
}

namespace {

constexpr char kMagic[8] = {'A', 'C', 'N', 'S', 'N', 'A', 'P', '1'};

void write_field(std::ofstream& os, const ScalarField& f) {
    const int loc = static_cast<int>(f.loc());
    os.write(reinterpret_cast<const char*>(&loc), sizeof loc);
    const uint64_t n = f.raw().size();
    os.write(reinterpret_cast<const char*>(&n), sizeof n);
    os.write(reinterpret_cast<const char*>(f.raw().data()),
             static_cast<std::streamsize>(n * sizeof(double)));
}

void read_field(std::ifstream& is, ScalarField& f) {
    int loc;
    is.read(reinterpret_cast<char*>(&loc), sizeof loc);
    uint64_t n;
    is.read(reinterpret_cast<char*>(&n), sizeof n);
    if (loc != static_cast<int>(f.loc()) || n != f.raw().size())
        throw std::runtime_error("snapshot: field layout mismatch");
    is.read(reinterpret_cast<char*>(f.raw().data()),
            static_cast<std::streamsize>(n * sizeof(double)));
}

} // namespace

void save_snapshot(const std::string& path, const VelocityField& u, const ScalarField& p,
                   double time) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open for writing: " + path);
    os.write(kMagic, 8);
    const MacGrid& g = u.grid();
    os.write(reinterpret_cast<const char*>(&g.dim), sizeof g.dim);
    os.write(reinterpret_cast<const char*>(g.n.data()), sizeof g.n);
    os.write(reinterpret_cast<const char*>(g.origin.data()), sizeof g.origin);
    os.write(reinterpret_cast<const char*>(g.length.data()), sizeof g.length);
    os.write(reinterpret_cast<const char*>(&time), sizeof time);
    write_field(os, p);
    for (int k = 0; k < g.dim; ++k) write_field(os, u[k]);
    if (!os) throw std::runtime_error("write failed: " + path);
}

Snapshot load_snapshot(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("cannot open for reading: " + path);
    char magic[8];
    is.read(magic, 8);
    if (std::memcmp(magic, kMagic, 8) != 0)
        throw std::runtime_error("not a snapshot file: " + path);
    int dim;
    std::array<int, 3> n;
    std::array<double, 3> origin, length;
    double time;
    is.read(reinterpret_cast<char*>(&dim), sizeof dim);
    is.read(reinterpret_cast<char*>(n.data()), sizeof n);
    is.read(reinterpret_cast<char*>(origin.data()), sizeof origin);
    is.read(reinterpret_cast<char*>(length.data()), sizeof length);
    is.read(reinterpret_cast<char*>(&time), sizeof time);
    MacGrid g(dim, n, origin, length);
    Snapshot snap{g, VelocityField(g), ScalarField(g, Loc::Cell), time};
    read_field(is, snap.p);
    for (int k = 0; k < dim; ++k) read_field(is, snap.u[k]);
    if (!is) throw std::runtime_error("read failed: " + path);
    return snap;
}

} // namespace acns
