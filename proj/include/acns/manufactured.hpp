#pragma once

#include "acns/grid.hpp"

#include <string>

namespace acns {

/// Closed-form benchmark solution of the unsteady (Navier-)Stokes equations
/// with analytic derivatives. The two built-in cases are divergence-free.
struct AnalyticCase {
    int dim = 2;
    std::string id;

    std::function<double(int k, double, double, double, double)> u;   // velocity comp k
    std::function<double(double, double, double, double)> p;          // pressure
    std::function<double(int k, double, double, double, double)> dudt;
    // first space derivative of u_k along axis j
    std::function<double(int k, int j, double, double, double, double)> du;
    std::function<double(int k, double, double, double, double)> lap_u;
    std::function<double(int j, double, double, double, double)> dp;

    static AnalyticCase mms2d();
    static AnalyticCase mms3d();
    static AnalyticCase by_id(const std::string& id);

    double advection(int k, double x, double y, double z, double t) const {
        double s = 0.0;
        for (int j = 0; j < dim; ++j) s += u(j, x, y, z, t) * du(k, j, x, y, z, t);
        return s;
    }

    BoundaryFn trace(int k) const {
        auto f = u;
        return [f, k](double x, double y, double z, double t) { return f(k, x, y, z, t); };
    }
    VelocityBC velocity_bc() const {
        VelocityBC bc;
        for (int k = 0; k < dim; ++k) bc.comp[k] = trace(k);
        return bc;
    }
};

/// Stokes forcing f = du/dt - nu*Lap(u) + grad(p), evaluated analytically.
double forcing_stokes(const AnalyticCase& c, double nu, int k, double x, double y, double z,
                      double t);

/// Navier-Stokes forcing: forcing_stokes + (u . grad) u.
double forcing_ns(const AnalyticCase& c, double nu, int k, double x, double y, double z,
                  double t);

/// Sample the exact solution onto grid fields (ghosts refreshed via the trace).
void sample_velocity(const AnalyticCase& c, double t, VelocityField& u);
void sample_pressure(const AnalyticCase& c, double t, ScalarField& p);

struct ErrorTriple {
    double err_u = 0.0, err_p = 0.0, err_div = 0.0;
};

/// L2 errors of a state against the exact solution at time t.
/// Pressure is compared after subtracting each field's discrete mean unless
/// mean_adjust is false.
ErrorTriple evaluate_errors(const VelocityField& u, const ScalarField& p,
                            const AnalyticCase& c, double t, bool mean_adjust = true);

/// L2 errors against a reference discrete state (same grid).
ErrorTriple evaluate_errors_ref(const VelocityField& u, const ScalarField& p,
                                const VelocityField& u_ref, const ScalarField& p_ref,
                                bool mean_adjust = true);

} // namespace acns
