#include "acns/manufactured.hpp"
#include "acns/operators.hpp"
#include "support/testutil.hpp"

#include <doctest.h>

#include <cmath>

using namespace acns;
using testutil::Rng;

namespace {

// 4th-order central differences as the independent derivative oracle
double fd(const std::function<double(double)>& f, double x, double h = 1e-3) {
    return (-f(x + 2 * h) + 8 * f(x + h) - 8 * f(x - h) + f(x - 2 * h)) / (12 * h);
}

double fd2(const std::function<double(double)>& f, double x, double h = 1e-3) {
    return (-f(x + 2 * h) + 16 * f(x + h) - 30 * f(x) + 16 * f(x - h) - f(x - 2 * h)) /
           (12 * h * h);
}

} // namespace

TEST_CASE("built-in cases are analytically divergence-free at random points") {
    Rng rng(101);
    for (const AnalyticCase& c : {AnalyticCase::mms2d(), AnalyticCase::mms3d()}) {
        for (int trial = 0; trial < 1000; ++trial) {
            const double x = rng.uniform(0, 1), y = rng.uniform(0, 1),
                         z = c.dim == 3 ? rng.uniform(0, 1) : 0.0,
                         t = rng.uniform(0, 10);
            double div = 0.0;
            for (int k = 0; k < c.dim; ++k) div += c.du(k, k, x, y, z, t);
            CHECK(std::abs(div) < 1e-12);
        }
    }
}

TEST_CASE("closed-form derivatives match finite differences") {
    Rng rng(55);
    for (const AnalyticCase& c : {AnalyticCase::mms2d(), AnalyticCase::mms3d()}) {
        for (int trial = 0; trial < 50; ++trial) {
            double pos[4] = {rng.uniform(0.1, 0.9), rng.uniform(0.1, 0.9),
                             c.dim == 3 ? rng.uniform(0.1, 0.9) : 0.0, rng.uniform(0, 3)};
            for (int k = 0; k < c.dim; ++k) {
                // time derivative
                auto ft = [&](double t) { return c.u(k, pos[0], pos[1], pos[2], t); };
                CHECK(c.dudt(k, pos[0], pos[1], pos[2], pos[3]) ==
                      doctest::Approx(fd(ft, pos[3])).epsilon(1e-9));
                double lap = 0.0;
                for (int j = 0; j < c.dim; ++j) {
                    auto fx = [&](double s) {
                        double q[3] = {pos[0], pos[1], pos[2]};
                        q[j] = s;
                        return c.u(k, q[0], q[1], q[2], pos[3]);
                    };
                    CHECK(c.du(k, j, pos[0], pos[1], pos[2], pos[3]) ==
                          doctest::Approx(fd(fx, pos[j])).epsilon(1e-9));
                    lap += fd2(fx, pos[j]);
                }
                CHECK(c.lap_u(k, pos[0], pos[1], pos[2], pos[3]) ==
                      doctest::Approx(lap).epsilon(1e-7));
            }
            for (int j = 0; j < c.dim; ++j) {
                auto fp = [&](double s) {
                    double q[3] = {pos[0], pos[1], pos[2]};
                    q[j] = s;
                    return c.p(q[0], q[1], q[2], pos[3]);
                };
                CHECK(c.dp(j, pos[0], pos[1], pos[2], pos[3]) ==
                      doctest::Approx(fd(fp, pos[j])).epsilon(1e-9));
            }
        }
    }
}

TEST_CASE("2D Stokes forcing components match the expanded closed form") {
    const AnalyticCase c = AnalyticCase::mms2d();
    Rng rng(7);
    const double nu = 0.37;
    for (int trial = 0; trial < 200; ++trial) {
        const double x = rng.uniform(0, 1), y = rng.uniform(0, 1), t = rng.uniform(0, 10);
        const double f1 = std::sin(x) * std::cos(y + t) +
                          (2 * nu - 1) * std::sin(x) * std::sin(y + t);
        const double f2 = -std::cos(x) * std::sin(y + t) +
                          (2 * nu + 1) * std::cos(x) * std::cos(y + t);
        CHECK(forcing_stokes(c, nu, 0, x, y, 0, t) == doctest::Approx(f1).epsilon(1e-13));
        CHECK(forcing_stokes(c, nu, 1, x, y, 0, t) == doctest::Approx(f2).epsilon(1e-13));
    }
}

TEST_CASE("forcing residual: exact solution satisfies the PDE with this forcing") {
    Rng rng(13);
    for (const AnalyticCase& c : {AnalyticCase::mms2d(), AnalyticCase::mms3d()}) {
        const double nu = 0.21;
        for (int trial = 0; trial < 100; ++trial) {
            const double x = rng.uniform(0.1, 0.9), y = rng.uniform(0.1, 0.9),
                         z = c.dim == 3 ? rng.uniform(0.1, 0.9) : 0.0,
                         t = rng.uniform(0, 5);
            for (int k = 0; k < c.dim; ++k) {
                const double stokes_res = c.dudt(k, x, y, z, t) - nu * c.lap_u(k, x, y, z, t) +
                                          c.dp(k, x, y, z, t) -
                                          forcing_stokes(c, nu, k, x, y, z, t);
                CHECK(std::abs(stokes_res) < 1e-12);
                const double ns_res = c.dudt(k, x, y, z, t) + c.advection(k, x, y, z, t) -
                                      nu * c.lap_u(k, x, y, z, t) + c.dp(k, x, y, z, t) -
                                      forcing_ns(c, nu, k, x, y, z, t);
                CHECK(std::abs(ns_res) < 1e-12);
            }
        }
    }
}

TEST_CASE("forcing_ns - forcing_stokes equals the analytic advection term") {
    const AnalyticCase c = AnalyticCase::mms3d();
    Rng rng(77);
    for (int trial = 0; trial < 200; ++trial) {
        const double x = rng.uniform(0, 1), y = rng.uniform(0, 1), z = rng.uniform(0, 1),
                     t = rng.uniform(0, 10);
        for (int k = 0; k < 3; ++k) {
            const double diff =
                forcing_ns(c, 0.42, k, x, y, z, t) - forcing_stokes(c, 0.42, k, x, y, z, t);
            CHECK(diff == doctest::Approx(c.advection(k, x, y, z, t)).epsilon(1e-10));
        }
    }
}

TEST_CASE("the -2 factor in the 3D third component is load-bearing") {
    const AnalyticCase c = AnalyticCase::mms3d();
    // replacing -2 with -1 breaks the divergence-free property
    const double x = 0.3, y = 0.4, z = 0.5, t = 1.0;
    const double d_with = c.du(0, 0, x, y, z, t) + c.du(1, 1, x, y, z, t) +
                          c.du(2, 2, x, y, z, t);
    CHECK(std::abs(d_with) < 1e-14);
    const double d_without = c.du(0, 0, x, y, z, t) + c.du(1, 1, x, y, z, t) +
                             0.5 * c.du(2, 2, x, y, z, t);
    CHECK(std::abs(d_without) > 0.05);
}

TEST_CASE("evaluate_errors: exact samples give zero velocity error, O(h^2) divergence") {
    const AnalyticCase c = AnalyticCase::mms2d();
    MacGrid g(2, {24, 24});
    VelocityField u(g);
    ScalarField p(g, Loc::Cell);
    sample_velocity(c, 2.0, u);
    sample_pressure(c, 2.0, p);
    ErrorTriple e = evaluate_errors(u, p, c, 2.0);
    CHECK(e.err_u < 1e-14);
    CHECK(e.err_p < 1e-14);
    // this case's MAC divergence telescopes exactly; only roundoff remains
    CHECK(e.err_div < 1e-13);
}

TEST_CASE("pressure error is invariant under adding a constant (mean adjustment)") {
    const AnalyticCase c = AnalyticCase::mms2d();
    MacGrid g(2, {16, 16});
    VelocityField u(g);
    ScalarField p(g, Loc::Cell);
    sample_velocity(c, 1.0, u);
    sample_pressure(c, 1.0, p);
    ScalarField shifted = p;
    shifted.for_nodes([&](int i, int j, int k) { shifted(i, j, k) += 17.3; });
    ErrorTriple e1 = evaluate_errors(u, p, c, 1.0);
    ErrorTriple e2 = evaluate_errors(u, shifted, c, 1.0);
    CHECK(e1.err_p == doctest::Approx(e2.err_p).epsilon(1e-9));
    // without adjustment the shift shows up
    ErrorTriple e3 = evaluate_errors(u, shifted, c, 1.0, false);
    CHECK(e3.err_p > 17.0);
}
