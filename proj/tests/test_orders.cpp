#include "acns/harness.hpp"
#include "acns/operators.hpp"
#include "acns/schemes.hpp"

#include <doctest.h>

#include <cmath>

using namespace acns;

namespace {

// A divergence-free solution that every second-order MAC stencil reproduces
// exactly (biquadratic in space), so local residuals isolate the time error:
//   u = a(t) (-x^2, 2xy),  p = c(t)(x + y)
double afun(double t) { return 2.0 + std::sin(t); }
double dafun(double t) { return std::cos(t); }
double cfun(double t) { return 1.0 + 0.5 * std::cos(t); }

double uex(int k, double x, double y, double t) {
    return k == 0 ? -x * x * afun(t) : 2.0 * x * y * afun(t);
}
double dudt_ex(int k, double x, double y, double t) {
    return k == 0 ? -x * x * dafun(t) : 2.0 * x * y * dafun(t);
}
double lap_ex(int k, double, double, double t) {
    return k == 0 ? -2.0 * afun(t) : 0.0;
}
double dp_ex(int, double, double, double t) { return cfun(t); }

double forcing_biquad(double nu, int k, double x, double y, double t) {
    return dudt_ex(k, x, y, t) - nu * lap_ex(k, x, y, t) + dp_ex(k, x, y, t);
}

// max-norm local residual of the second bootstrap stage with every field
// replaced by the exact solution; spatial stencils are exact here, so the
// residual measures the stage's temporal consistency alone
double bdf2_stage2_residual(int n, double dt, double nu, double w) {
    MacGrid g(2, {n, n});
    const double t2 = 3 * dt, t1 = 2 * dt, t0 = dt; // levels n+1, n, n-1
    VelocityField u2f(g), u1f(g), u0f(g);
    ScalarField p1(g, Loc::Cell), dp(g, Loc::Cell);
    for (int k = 0; k < 2; ++k) {
        auto fill = [&](VelocityField& uf, double t) {
            uf[k].for_nodes([&](int i, int j, int kk) {
                uf[k](i, j, kk) = uex(k, uf[k].coord(0, i), uf[k].coord(1, j), t);
            });
            apply_dirichlet(uf[k],
                            [k, t](double x, double y, double, double) {
                                return uex(k, x, y, t);
                            },
                            t);
        };
        fill(u2f, t2);
        fill(u1f, t1);
        fill(u0f, t0);
    }
    p1.for_nodes([&](int i, int j, int k) {
        p1(i, j, k) = cfun(t1) * (p1.coord(0, i) + p1.coord(1, j));
    });
    dp.for_nodes([&](int i, int j, int k) {
        dp(i, j, k) = (cfun(t2) - cfun(t1)) * (dp.coord(0, i) + dp.coord(1, j));
    });
    fill_pressure_ghosts(p1);
    fill_pressure_ghosts(dp);

    const double hx = g.h[0], hy = g.h[1];
    double rmax = 0.0;
    // component 1 (the row with the extrapolated cross term)
    for (int i = 1; i < g.n[0]; ++i)
        for (int j = 0; j < g.n[1]; ++j) {
            const ScalarField& v = u2f[0];
            const double bdf = 1.5 * v(i, j) - 2.0 * u1f[0](i, j) + 0.5 * u0f[0](i, j);
            double lap = (v(i + 1, j) - 2 * v(i, j) + v(i - 1, j)) / (hx * hx);
            lap += (v(i, j + 1) - 2 * v(i, j) + v(i, j - 1)) / (hy * hy);
            const double own = (v(i + 1, j) - 2 * v(i, j) + v(i - 1, j)) / (hx * hx);
            const double gp = (p1(i, j) + dp(i, j) - p1(i - 1, j) - dp(i - 1, j)) / hx;
            // cross at the extrapolated level 2 u2^n - u2^{n-1}
            auto dyu2 = [&](const VelocityField& uf, int ci, int cj) {
                return (uf[1](ci, cj + 1) - uf[1](ci, cj)) / hy;
            };
            const double cross =
                (2.0 * dyu2(u1f, i, j) - dyu2(u0f, i, j) -
                 (2.0 * dyu2(u1f, i - 1, j) - dyu2(u0f, i - 1, j))) /
                hx;
            const double x = g.coord(Loc::FaceX, 0, i), y = g.coord(Loc::Cell, 1, j);
            const double res = bdf + dt * (-nu * lap - w * own + gp - w * cross -
                                           forcing_biquad(nu, 0, x, y, t2));
            rmax = std::max(rmax, std::abs(res));
        }
    return rmax;
}

} // namespace

TEST_CASE("bdf2 bootstrap stage 2 has third-order local residual") {
    const double nu = 0.5, w = 1.0;
    double r[3];
    int idx = 0;
    for (double dt : {0.1, 0.05, 0.025}) r[idx++] = bdf2_stage2_residual(16, dt, nu, w);
    const double s1 = std::log2(r[0] / r[1]);
    const double s2 = std::log2(r[1] / r[2]);
    CHECK(s1 > 2.7);
    CHECK(s1 < 3.5);
    CHECK(s2 > 2.7);
    CHECK(s2 < 3.5);
}

namespace {

double last_order_u(SchemeId id, int dim, int nx, std::vector<double> dts, double T,
                    double nu, bool nonlinear = false) {
    StudySpec spec;
    spec.scheme = id;
    spec.dim = dim;
    spec.nx = nx;
    spec.dts = std::move(dts);
    spec.t_final = T;
    spec.nu = nu;
    spec.nonlinear = nonlinear;
    spec.case_id = dim == 2 ? "mms2d" : "mms3d";
    ErrorReport rep = run_convergence(spec);
    REQUIRE(rep.rows.back().order_u.has_value());
    return *rep.rows.back().order_u;
}

} // namespace

TEST_CASE("order ladder at desk scale: first-order schemes") {
    CHECK(last_order_u(SchemeId::ac1, 2, 16, {0.2, 0.1, 0.05}, 2.0, 1.0) ==
          doctest::Approx(1.0).epsilon(0.35));
    CHECK(last_order_u(SchemeId::gs2d, 2, 16, {0.2, 0.1, 0.05}, 2.0, 1.0) ==
          doctest::Approx(1.0).epsilon(0.35));
    CHECK(last_order_u(SchemeId::jacobi_nd, 2, 16, {0.2, 0.1, 0.05}, 2.0, 1.0) ==
          doctest::Approx(1.0).epsilon(0.35));
    CHECK(last_order_u(SchemeId::dirsplit1, 2, 16, {0.2, 0.1, 0.05}, 2.0, 1.0) ==
          doctest::Approx(1.0).epsilon(0.35));
}

TEST_CASE("order ladder: second-order stages and schemes") {
    CHECK(last_order_u(SchemeId::defect2_split, 2, 16, {0.1, 0.05, 0.025}, 2.0, 1.0) >
          1.6);
    CHECK(last_order_u(SchemeId::bdf2_bootstrap, 2, 16, {0.1, 0.05, 0.025}, 2.0, 1.0) >
          1.6);
    CHECK(last_order_u(SchemeId::dirsplit_defect2, 2, 16, {0.1, 0.05, 0.025}, 2.0, 1.0) >
          1.6);
}

TEST_CASE("order ladder: third-order composite beats second order clearly") {
    const double o3 = last_order_u(SchemeId::defect3_split, 2, 16, {0.05, 0.025, 0.0125},
                                   2.0, 1.0);
    CHECK(o3 > 2.4);
}

TEST_CASE("nonlinear runs converge too (gs2d, NS forcing)") {
    const double o = last_order_u(SchemeId::gs2d, 2, 16, {0.2, 0.1, 0.05}, 2.0, 1.0, true);
    CHECK(o == doctest::Approx(1.0).epsilon(0.4));
}

TEST_CASE("dropping the mixed-derivative correction collapses the cascade order") {
    // with the correction feeding each stage, the three-stage composite is
    // third order; without it the stage-0 splitting defect is never cancelled
    // and the composite degenerates to first order
    MacGrid g(2, {16, 16});
    const AnalyticCase c = AnalyticCase::mms2d();
    auto err_at = [&](double dt, bool corr) {
        SchemeConfig cfg;
        cfg.scheme = SchemeId::defect3_split;
        cfg.dim = 2;
        cfg.dt = dt;
        cfg.nu = 1.0;
        cfg.split_c_correction = corr;
        SimState s = make_state(g, cfg);
        init_manufactured(s, c, cfg);
        Forcing f{[&c, &cfg](int k, double x, double y, double z, double t) {
            return forcing_stokes(c, cfg.nu, k, x, y, z, t);
        }};
        const int M = static_cast<int>(std::round(2.0 / dt));
        for (int i = 0; i < M + composite_lag(cfg.scheme); ++i)
            step(s, cfg, f, c.velocity_bc());
        // reference: corrected fine-dt run
        SchemeConfig rcfg = cfg;
        rcfg.split_c_correction = true;
        rcfg.dt = dt / 16;
        SimState r = make_state(g, rcfg);
        init_manufactured(r, c, rcfg);
        for (int i = 0; i < 16 * M + composite_lag(rcfg.scheme); ++i)
            step(r, rcfg, f, c.velocity_bc());
        VelocityField d = s.u_now;
        axpy(-1.0, r.u_now, d);
        return l2_norm(d);
    };
    const double slope_with = std::log2(err_at(0.05, true) / err_at(0.025, true));
    const double slope_without = std::log2(err_at(0.05, false) / err_at(0.025, false));
    CHECK(slope_with > 2.6);
    CHECK(slope_without < 2.3);
}
