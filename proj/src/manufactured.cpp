#include "acns/manufactured.hpp"

#include "acns/operators.hpp"

#include <cmath>

namespace acns {

AnalyticCase AnalyticCase::mms2d() {
    // u = (sin x sin(y+t), cos x cos(y+t)),  p = cos x sin(y+t)
    AnalyticCase c;
    c.dim = 2;
    c.id = "mms2d";
    c.u = [](int k, double x, double y, double, double t) {
        return k == 0 ? std::sin(x) * std::sin(y + t) : std::cos(x) * std::cos(y + t);
    };
    c.p = [](double x, double y, double, double t) { return std::cos(x) * std::sin(y + t); };
    c.dudt = [](int k, double x, double y, double, double t) {
        return k == 0 ? std::sin(x) * std::cos(y + t) : -std::cos(x) * std::sin(y + t);
    };
    c.du = [](int k, int j, double x, double y, double, double t) {
        if (k == 0) return j == 0 ? std::cos(x) * std::sin(y + t) : std::sin(x) * std::cos(y + t);
        return j == 0 ? -std::sin(x) * std::cos(y + t) : -std::cos(x) * std::sin(y + t);
    };
    c.lap_u = [](int k, double x, double y, double, double t) {
        return k == 0 ? -2.0 * std::sin(x) * std::sin(y + t)
                      : -2.0 * std::cos(x) * std::cos(y + t);
    };
    c.dp = [](int j, double x, double y, double, double t) {
        return j == 0 ? -std::sin(x) * std::sin(y + t) : std::cos(x) * std::cos(y + t);
    };
    return c;
}

AnalyticCase AnalyticCase::mms3d() {
    // u1 = cos x sin y sin(z+t), u2 = sin x cos y sin(z+t),
    // u3 = -2 sin x sin y cos(z+t), p = cos(x+y+z+t)
    AnalyticCase c;
    c.dim = 3;
    c.id = "mms3d";
    c.u = [](int k, double x, double y, double z, double t) {
        switch (k) {
            case 0: return std::cos(x) * std::sin(y) * std::sin(z + t);
            case 1: return std::sin(x) * std::cos(y) * std::sin(z + t);
            default: return -2.0 * std::sin(x) * std::sin(y) * std::cos(z + t);
        }
    };
    c.p = [](double x, double y, double z, double t) { return std::cos(x + y + z + t); };
    c.dudt = [](int k, double x, double y, double z, double t) {
        switch (k) {
            case 0: return std::cos(x) * std::sin(y) * std::cos(z + t);
            case 1: return std::sin(x) * std::cos(y) * std::cos(z + t);
            default: return 2.0 * std::sin(x) * std::sin(y) * std::sin(z + t);
        }
    };
    c.du = [](int k, int j, double x, double y, double z, double t) {
        const double sx = std::sin(x), cx = std::cos(x);
        const double sy = std::sin(y), cy = std::cos(y);
        const double szt = std::sin(z + t), czt = std::cos(z + t);
        if (k == 0) {
            if (j == 0) return -sx * sy * szt;
            if (j == 1) return cx * cy * szt;
            return cx * sy * czt;
        }
        if (k == 1) {
            if (j == 0) return cx * cy * szt;
            if (j == 1) return -sx * sy * szt;
            return sx * cy * czt;
        }
        if (j == 0) return -2.0 * cx * sy * czt;
        if (j == 1) return -2.0 * sx * cy * czt;
        return 2.0 * sx * sy * szt;
    };
    c.lap_u = [c0 = c.u](int k, double x, double y, double z, double t) {
        return -3.0 * c0(k, x, y, z, t);
    };
    c.dp = [](int, double x, double y, double z, double t) {
        return -std::sin(x + y + z + t);
    };
    return c;
}

AnalyticCase AnalyticCase::by_id(const std::string& id) {
    if (id == "mms2d") return mms2d();
    if (id == "mms3d") return mms3d();
    throw SpecError("unknown analytic case: " + id);
}

double forcing_stokes(const AnalyticCase& c, double nu, int k, double x, double y, double z,
                      double t) {
    return c.dudt(k, x, y, z, t) - nu * c.lap_u(k, x, y, z, t) + c.dp(k, x, y, z, t);
}

double forcing_ns(const AnalyticCase& c, double nu, int k, double x, double y, double z,
                  double t) {
    return forcing_stokes(c, nu, k, x, y, z, t) + c.advection(k, x, y, z, t);
}

void sample_velocity(const AnalyticCase& c, double t, VelocityField& u) {
    for (int k = 0; k < u.dim(); ++k) {
        ScalarField& f = u[k];
        f.for_nodes([&](int i, int j, int kk) {
            f(i, j, kk) = c.u(k, f.coord(0, i), f.coord(1, j), f.coord(2, kk), t);
        });
    }
    apply_dirichlet(u, c.velocity_bc(), t);
}

void sample_pressure(const AnalyticCase& c, double t, ScalarField& p) {
    p.for_nodes([&](int i, int j, int kk) {
        p(i, j, kk) = c.p(p.coord(0, i), p.coord(1, j), p.coord(2, kk), t);
    });
    fill_pressure_ghosts(p);
}

namespace {

double pressure_error(const ScalarField& p, const ScalarField& q, bool mean_adjust) {
    ScalarField d = p;
    axpy(-1.0, q, d);
    if (mean_adjust) {
        const double m = mean(d);
        d.for_nodes([&](int i, int j, int k) { d(i, j, k) -= m; });
    }
    // ghosts of the difference are stale; zero them so the norm sees real nodes only
    ScalarField clean(p.grid(), Loc::Cell);
    d.for_nodes([&](int i, int j, int k) { clean(i, j, k) = d(i, j, k); });
    return l2_norm(clean);
}

} // namespace

ErrorTriple evaluate_errors(const VelocityField& u, const ScalarField& p,
                            const AnalyticCase& c, double t, bool mean_adjust) {
    ErrorTriple e;
    VelocityField ue(u.grid());
    sample_velocity(c, t, ue);
    axpy(-1.0, u, ue);
    e.err_u = l2_norm(ue);
    ScalarField pe(p.grid(), Loc::Cell);
    sample_pressure(c, t, pe);
    e.err_p = pressure_error(p, pe, mean_adjust);
    e.err_div = l2_norm(divergence(u));
    return e;
}

ErrorTriple evaluate_errors_ref(const VelocityField& u, const ScalarField& p,
                                const VelocityField& u_ref, const ScalarField& p_ref,
                                bool mean_adjust) {
    ErrorTriple e;
    VelocityField d = u_ref;
    axpy(-1.0, u, d);
    e.err_u = l2_norm(d);
    e.err_p = pressure_error(p, p_ref, mean_adjust);
    e.err_div = l2_norm(divergence(u));
    return e;
}

} // namespace acns
