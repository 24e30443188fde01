#include "acns/schemes.hpp"

#include "acns/operators.hpp"

#include <cmath>
#include <map>

namespace acns {

SchemeId scheme_from_string(const std::string& s) {
    static const std::map<std::string, SchemeId> m = {
        {"ac1", SchemeId::ac1},
        {"gs2d", SchemeId::gs2d},
        {"jacobi2d", SchemeId::jacobi2d},
        {"jacobi_nd", SchemeId::jacobi_nd},
        {"gs3d", SchemeId::gs3d},
        {"gs3d_modified", SchemeId::gs3d_modified},
        {"dirsplit1", SchemeId::dirsplit1},
        {"bdf2_bootstrap", SchemeId::bdf2_bootstrap},
        {"dirsplit_defect2", SchemeId::dirsplit_defect2},
        {"defect2_coupled", SchemeId::defect2_coupled},
        {"defect2_split", SchemeId::defect2_split},
        {"defect3_coupled", SchemeId::defect3_coupled},
        {"defect3_split", SchemeId::defect3_split},
    };
    auto it = m.find(s);
    if (it == m.end()) throw SpecError("unknown scheme: " + s);
    return it->second;
}

std::string scheme_to_string(SchemeId id) {
    switch (id) {
        case SchemeId::ac1: return "ac1";
        case SchemeId::gs2d: return "gs2d";
        case SchemeId::jacobi2d: return "jacobi2d";
        case SchemeId::jacobi_nd: return "jacobi_nd";
        case SchemeId::gs3d: return "gs3d";
        case SchemeId::gs3d_modified: return "gs3d_modified";
        case SchemeId::dirsplit1: return "dirsplit1";
        case SchemeId::bdf2_bootstrap: return "bdf2_bootstrap";
        case SchemeId::dirsplit_defect2: return "dirsplit_defect2";
        case SchemeId::defect2_coupled: return "defect2_coupled";
        case SchemeId::defect2_split: return "defect2_split";
        case SchemeId::defect3_coupled: return "defect3_coupled";
        case SchemeId::defect3_split: return "defect3_split";
    }
    return "?";
}

int composite_lag(SchemeId id) {
    switch (id) {
        case SchemeId::defect3_coupled:
        case SchemeId::defect3_split: return 2;
        case SchemeId::defect2_coupled:
        case SchemeId::defect2_split: return 1;
        default: return 0;
    }
}

double SchemeConfig::pressure_coef() const {
    switch (scheme) {
        case SchemeId::ac1:
        case SchemeId::defect2_coupled:
        case SchemeId::defect3_coupled: return chi;
        default: return varpi();
    }
}

void SchemeConfig::validate() const {
    if (dt <= 0) throw SpecError("dt must be positive");
    if (nu <= 0) throw SpecError("nu must be positive");
    if (chi <= 0) throw SpecError("chi must be positive");
    if (lambda < 0) throw SpecError("lambda must be nonnegative");
    const bool d2 = dim == 2, d3 = dim == 3;
    switch (scheme) {
        case SchemeId::gs2d:
        case SchemeId::jacobi2d:
        case SchemeId::dirsplit1:
        case SchemeId::dirsplit_defect2:
            if (!d2) throw SpecError(scheme_to_string(scheme) + " requires dim=2");
            break;
        case SchemeId::gs3d:
        case SchemeId::gs3d_modified:
            if (!d3) throw SpecError(scheme_to_string(scheme) + " requires dim=3");
            break;
        default: break;
    }
}

std::pair<double, double> lemma_identity(double a1, double b1, double c1, double b0,
                                         double c0) {
    const double lhs = 2.0 * ((a1 + b0 + c0) * a1 + (a1 + b1 + c0) * b1 +
                              (a1 + b1 + c1) * c1) +
                       2.0 * (b1 - b0) * b1 - 2.0 * (b1 - b0) * c1 +
                       2.0 * (c1 - c0) * c1;
    const double rhs = (a1 + b1 + c1) * (a1 + b1 + c1) +
                       (a1 + b0 + c0) * (a1 + b0 + c0) +
                       2.0 * (b1 * b1 + c1 * c1 - b0 * b0 - c0 * c0) +
                       (b1 - b0 - c1 + c0) * (b1 - b0 - c1 + c0);
    return {lhs, rhs};
}

namespace {

void add_face_diff(ScalarField& q, double coef, const ScalarField& v, int j,
                   ScalarField& buf) {
    face_to_center_diff(v, j, buf);
    axpy(coef, buf, q);
}

void add_forcing(ScalarField& r, const Forcing& f, int k, double t, double coef) {
    if (!f) return;
    r.for_nodes([&](int i, int j, int kk) {
        r(i, j, kk) += coef * f(k, r.coord(0, i), r.coord(1, j), r.coord(2, kk), t);
    });
}

// r += coef * d2v/da2 using stored values (walls and ghosts as they are)
void add_d2(ScalarField& r, double coef, const ScalarField& v, int a) {
    const MacGrid& g = v.grid();
    const double c = coef / (g.h[a] * g.h[a]);
    const int fa = face_axis(v.loc());
    int step[3] = {0, 0, 0};
    step[a] = 1;
    r.for_nodes([&](int i, int j, int k) {
        const int ijk[3] = {i, j, k};
        if (fa >= 0 && (ijk[fa] == 0 || ijk[fa] == v.nn(fa) - 1)) return;
        r(i, j, k) += c * (v(i + step[0], j + step[1], k + step[2]) - 2.0 * v(i, j, k) +
                           v(i - step[0], j - step[1], k - step[2]));
    });
}

int cap_for(const MacGrid& g, const SchemeConfig& cfg, Loc loc) {
    long ndofs = 1;
    for (int a = 0; a < g.dim; ++a) ndofs *= g.nnodes(loc, a);
    return solver_iteration_cap(g, ndofs, cfg.solver_cap_factor);
}

// Gauss-Seidel decoupled solve of the first-order artificial-compressibility
// velocity system: component k sees newest values for j<k and lagged for j>k.
//   alpha u_k - nu Lap u_k - d_k(w d_k u_k) = hist_k - d_k(pgrad - w sum d_j u_j)
VelocityField gs_solve(const SchemeConfig& cfg, double alpha, const VelocityField& ucur,
                       const ScalarField& pgrad, const VelocityField& hist,
                       const VelocityBC& bc, double tbc,
                       const VelocityField* uprev = nullptr) {
    const MacGrid& g = ucur.grid();
    const double w = cfg.varpi();
    VelocityField u_new = ucur;
    if (uprev) { // extrapolated initial guess for the solver
        for (int k = 0; k < g.dim; ++k) scale(u_new[k], 2.0);
        axpy(-1.0, *uprev, u_new);
    }
    ScalarField q(g, Loc::Cell), buf(g, Loc::Cell);
    for (int k = 0; k < g.dim; ++k) {
        copy_into(pgrad, q);
        for (int j = 0; j < g.dim; ++j) {
            if (j == k) continue;
            add_face_diff(q, -w, j < k ? u_new[j] : ucur[j], j, buf);
        }
        ScalarField r = hist[k];
        ScalarField gq(g, face_loc(k));
        center_to_face_diff(q, k, gq);
        axpy(-1.0, gq, r);
        std::array<double, 3> kappa{cfg.nu, cfg.nu, cfg.nu};
        kappa[k] += w;
        helmholtz_solve(alpha, 1.0, kappa, r, bc[k], tbc, cfg.solver_tol, u_new[k],
                        cap_for(g, cfg, face_loc(k)));
    }
    return u_new;
}

void pressure_update(ScalarField& p, ScalarField& p_prev, const VelocityField& u_new,
                     double coef, const ScalarField* increment = nullptr) {
    std::swap(p_prev, p);
    copy_into(p_prev, p);
    if (increment) axpy(1.0, *increment, p);
    ScalarField d = divergence(u_new);
    axpy(-coef, d, p);
    fill_pressure_ghosts(p);
}

void finish_step(SimState& s, VelocityField&& u_new, double pcoef,
                 const ScalarField* p_increment = nullptr) {
    pressure_update(s.p_now, s.p_prev, u_new, pcoef, p_increment);
    std::swap(s.u_prev, s.u_now);
    s.u_now = std::move(u_new);
    ++s.step;
    if (has_nan(s.u_now)) throw DivergenceError(s.step);
}

void step_ac1(SimState& s, const SchemeConfig& cfg, const Forcing& f,
              const VelocityBC& bc) {
    const MacGrid& g = s.grid;
    const double alpha = 1.0 / cfg.dt;
    const double t1 = s.time(cfg.dt) + cfg.dt;
    VelocityField rhs(g);
    VelocityField nl = cfg.nonlinear ? advect(s.u_now) : VelocityField(g);
    for (int k = 0; k < g.dim; ++k) {
        copy_into(s.u_now[k], rhs[k]);
        scale(rhs[k], alpha);
        ScalarField gp(g, face_loc(k));
        center_to_face_diff(s.p_now, k, gp);
        axpy(-1.0, gp, rhs[k]);
        add_forcing(rhs[k], f, k, t1, 1.0);
        if (cfg.nonlinear) axpy(-1.0, nl[k], rhs[k]);
    }
    VelocityField u_new = s.u_now;
    coupled_graddiv_solve(alpha, cfg.nu, cfg.varpi(), rhs, bc, t1, cfg.solver_tol, u_new,
                          cap_for(g, cfg, Loc::Cell) * g.dim);
    finish_step(s, std::move(u_new), cfg.chi);
}

// gs2d, gs3d, jacobi2d, jacobi_nd, gs3d_modified share this sweep
void step_ac_split(SimState& s, const SchemeConfig& cfg, const Forcing& f,
                   const VelocityBC& bc) {
    const MacGrid& g = s.grid;
    const int d = g.dim;
    const double w = cfg.varpi();
    const double alpha = 1.0 / cfg.dt;
    const double t1 = s.time(cfg.dt) + cfg.dt;
    VelocityField u_new = s.u_now;
    VelocityField nl = cfg.nonlinear ? advect(s.u_now) : VelocityField(g);
    ScalarField q(g, Loc::Cell), buf(g, Loc::Cell);
    for (int k = 0; k < d; ++k) {
        copy_into(s.p_now, q);
        double own_extra = w;
        switch (cfg.scheme) {
            case SchemeId::gs2d:
            case SchemeId::gs3d:
                for (int j = 0; j < d; ++j)
                    if (j != k) add_face_diff(q, -w, j < k ? u_new[j] : s.u_now[j], j, buf);
                break;
            case SchemeId::jacobi2d:
                for (int j = 0; j < d; ++j)
                    if (j != k) add_face_diff(q, -w, s.u_now[j], j, buf);
                break;
            case SchemeId::jacobi_nd:
                for (int j = 0; j < d; ++j)
                    if (j != k) add_face_diff(q, -w, s.u_now[j], j, buf);
                add_face_diff(q, (d - 1) * w, s.u_now[k], k, buf);
                own_extra = d * w;
                break;
            case SchemeId::gs3d_modified:
                if (k == 0) {
                    add_face_diff(q, -w, s.u_now[1], 1, buf);
                    add_face_diff(q, -w, s.u_now[2], 2, buf);
                } else if (k == 1) {
                    add_face_diff(q, -w, u_new[0], 0, buf);
                    add_face_diff(q, w, s.u_now[1], 1, buf);
                    add_face_diff(q, -w, s.u_now[2], 2, buf);
                    own_extra = 2.0 * w;
                } else {
                    add_face_diff(q, -w, u_new[0], 0, buf);
                    add_face_diff(q, -w, s.u_now[1], 1, buf);
                    add_face_diff(q, w, s.u_now[2], 2, buf);
                    own_extra = 2.0 * w;
                }
                break;
            default: throw SpecError("step_ac_split: wrong scheme");
        }
        ScalarField r(g, face_loc(k));
        copy_into(s.u_now[k], r);
        scale(r, alpha);
        ScalarField gq(g, face_loc(k));
        center_to_face_diff(q, k, gq);
        axpy(-1.0, gq, r);
        add_forcing(r, f, k, t1, 1.0);
        if (cfg.nonlinear) axpy(-1.0, nl[k], r);
        std::array<double, 3> kappa{cfg.nu, cfg.nu, cfg.nu};
        kappa[k] += own_extra;
        helmholtz_solve(alpha, 1.0, kappa, r, bc[k], t1, cfg.solver_tol, u_new[k],
                        cap_for(g, cfg, face_loc(k)));
    }
    finish_step(s, std::move(u_new), w);
}

void step_bdf2_bootstrap(SimState& s, const SchemeConfig& cfg, const Forcing& f,
                         const VelocityBC& bc) {
    const MacGrid& g = s.grid;
    const int d = g.dim;
    const double w = cfg.varpi();
    const double dt = cfg.dt;
    const double t1 = s.time(dt) + dt;
    TildePair& tp = *s.tilde;

    // stage 1: first-order Gauss-Seidel step on the tilde pair
    {
        VelocityField hist(g);
        VelocityField nl = cfg.nonlinear ? advect(tp.u) : VelocityField(g);
        for (int k = 0; k < d; ++k) {
            copy_into(tp.u[k], hist[k]);
            scale(hist[k], 1.0 / dt);
            add_forcing(hist[k], f, k, t1, 1.0);
            if (cfg.nonlinear) axpy(-1.0, nl[k], hist[k]);
        }
        VelocityField u_new = gs_solve(cfg, 1.0 / dt, tp.u, tp.p, hist, bc, t1, &tp.u_prev);
        pressure_update(tp.p, tp.p_prev, u_new, w);
        std::swap(tp.u_prev, tp.u);
        tp.u = std::move(u_new);
    }
    ScalarField dptilde = tp.p;
    axpy(-1.0, tp.p_prev, dptilde); // p~^{n+1} - p~^n

    // stage 2: BDF2 with the cross terms extrapolated (j>k) or Gauss-Seidel (j<k)
    const double alpha = 1.5 / dt;
    VelocityField u_new = s.u_now;
    for (int k = 0; k < d; ++k) scale(u_new[k], 2.0);
    axpy(-1.0, s.u_prev, u_new);
    VelocityField nl(g);
    if (cfg.nonlinear) {
        nl = advect(s.u_now);
        for (int k = 0; k < d; ++k) scale(nl[k], 2.0);
        VelocityField nl_old = advect(s.u_prev);
        axpy(-1.0, nl_old, nl);
    }
    ScalarField q(g, Loc::Cell), buf(g, Loc::Cell);
    for (int k = 0; k < d; ++k) {
        copy_into(s.p_now, q);
        axpy(1.0, dptilde, q);
        for (int j = 0; j < d; ++j) {
            if (j == k) continue;
            if (j < k) {
                add_face_diff(q, -w, u_new[j], j, buf);
            } else {
                add_face_diff(q, -2.0 * w, s.u_now[j], j, buf);
                add_face_diff(q, w, s.u_prev[j], j, buf);
            }
        }
        ScalarField r(g, face_loc(k));
        copy_into(s.u_now[k], r);
        scale(r, 2.0 / dt);
        axpy(-0.5 / dt, s.u_prev[k], r);
        ScalarField gq(g, face_loc(k));
        center_to_face_diff(q, k, gq);
        axpy(-1.0, gq, r);
        add_forcing(r, f, k, t1, 1.0);
        if (cfg.nonlinear) axpy(-1.0, nl[k], r);
        std::array<double, 3> kappa{cfg.nu, cfg.nu, cfg.nu};
        kappa[k] += w;
        helmholtz_solve(alpha, 1.0, kappa, r, bc[k], t1, cfg.solver_tol, u_new[k],
                        cap_for(g, cfg, face_loc(k)));
    }
    finish_step(s, std::move(u_new), w, &dptilde);
}

// ---------------------------------------------------------------------------
// defect-correction cascades

// C_triangle applied to a velocity-shaped argument: component k collects
// varpi * d_k d_j w_j over j > k (strictly upper triangular mixed derivatives).
void add_ctriangle(VelocityField& out, double coef, const VelocityField& wfld, double w) {
    const int d = out.dim();
    for (int k = 0; k < d; ++k)
        for (int j = k + 1; j < d; ++j) {
            ScalarField m = mixed_derivative(j, k, wfld[j], w);
            axpy(coef, m, out[k]);
        }
}

void rotate3(VelocityField& a, VelocityField& a1, VelocityField& a2) {
    std::swap(a2, a1);
    std::swap(a1, a);
}
void rotate3(ScalarField& a, ScalarField& a1, ScalarField& a2) {
    std::swap(a2, a1);
    std::swap(a1, a);
}

// du = (a - a_prev)/dt
void divided_difference(const VelocityField& a, const VelocityField& a_prev, double dt,
                        VelocityField& out) {
    copy_into(a, out);
    axpy(-1.0, a_prev, out);
    for (int k = 0; k < out.dim(); ++k) scale(out[k], 1.0 / dt);
}
void divided_difference(const ScalarField& a, const ScalarField& a_prev, double dt,
                        ScalarField& out) {
    copy_into(a, out);
    axpy(-1.0, a_prev, out);
    scale(out, 1.0 / dt);
}

void step_defect_cascade(SimState& s, const SchemeConfig& cfg, const Forcing& f,
                         const VelocityBC& bc) {
    const MacGrid& g = s.grid;
    const int d = g.dim;
    const bool split = cfg.scheme == SchemeId::defect2_split ||
                       cfg.scheme == SchemeId::defect3_split;
    const int nstages = s.cascade->nstages;
    const double dt = cfg.dt;
    const double w = cfg.varpi();
    const double pc = cfg.pressure_coef();
    const int n = s.step; // cascade iteration index
    const double t_np1 = s.t0 + (n + 1) * dt;
    DefectStage& s0 = s.cascade->s[0];
    DefectStage& s1 = s.cascade->s[1];
    DefectStage& s2 = s.cascade->s[2];
    const VelocityBC none{};

    auto solve_stage = [&](double alpha, const VelocityField& ucur, const ScalarField& pgrad,
                           const VelocityField& hist, const VelocityBC& sbc, double tbc,
                           const VelocityField* uprev) {
        if (split) return gs_solve(cfg, alpha, ucur, pgrad, hist, sbc, tbc, uprev);
        VelocityField rhs = hist;
        for (int k = 0; k < d; ++k) {
            ScalarField gq(g, face_loc(k));
            center_to_face_diff(pgrad, k, gq);
            axpy(-1.0, gq, rhs[k]);
        }
        VelocityField out = ucur;
        if (uprev) {
            for (int k = 0; k < d; ++k) scale(out[k], 2.0);
            axpy(-1.0, *uprev, out);
        }
        coupled_graddiv_solve(alpha, cfg.nu, w, rhs, sbc, tbc, cfg.solver_tol, out,
                              cap_for(g, cfg, Loc::Cell) * d);
        return out;
    };

    // stage 0: first-order step for (u0, p0), one level ahead of the output
    {
        std::swap(s0.nl_prev, s0.nl);
        if (cfg.nonlinear) s0.nl = advect(s0.u);
        else s0.nl.fill(0.0);
        VelocityField hist(g);
        for (int k = 0; k < d; ++k) {
            copy_into(s0.u[k], hist[k]);
            scale(hist[k], 1.0 / dt);
            add_forcing(hist[k], f, k, t_np1, 1.0);
            if (cfg.nonlinear) axpy(-1.0, s0.nl[k], hist[k]);
        }
        VelocityField u_new = solve_stage(1.0 / dt, s0.u, s0.p, hist, bc, t_np1, &s0.u_prev);
        rotate3(s0.u, s0.u_prev, s0.u_prev2);
        s0.u = std::move(u_new);
        ScalarField p_new = s0.p;
        ScalarField dnew = divergence(s0.u);
        axpy(-pc, dnew, p_new);
        fill_pressure_ghosts(p_new);
        rotate3(s0.p, s0.p_prev, s0.p_prev2);
        s0.p = std::move(p_new);
        std::swap(s0.du_prev, s0.du);
        divided_difference(s0.u, s0.u_prev, dt, s0.du);
        std::swap(s0.d2u_prev, s0.d2u);
        divided_difference(s0.du, s0.du_prev, dt, s0.d2u);
        divided_difference(s0.d2u, s0.d2u_prev, dt, s0.d3u);
        std::swap(s0.dp_prev, s0.dp);
        divided_difference(s0.p, s0.p_prev, dt, s0.dp);
        if (has_nan(s0.u)) throw DivergenceError(n + 1);
    }

    // stage 1: correction u1 at index n
    if (n >= 1) {
        std::swap(s1.nl_prev, s1.nl);
        if (cfg.nonlinear) {
            VelocityField combo = s0.u_prev; // u0^n
            axpy(dt, s1.u, combo);           // + tau * u1^{n-1}
            s1.nl = advect(combo);
        } else {
            s1.nl.fill(0.0);
        }
        ScalarField pgrad = s1.p; // p1^{n-1}
        axpy(1.0, s0.dp_prev, pgrad); // + dp0^n
        VelocityField hist(g);
        for (int k = 0; k < d; ++k) {
            copy_into(s1.u[k], hist[k]);
            scale(hist[k], 1.0 / dt);
            axpy(-0.5, s0.d2u[k], hist[k]); // -1/2 d2u0^{n+1}
            // -(nl1^n - nl0^n)/dt
            if (cfg.nonlinear) {
                axpy(-1.0 / dt, s1.nl[k], hist[k]);
                axpy(1.0 / dt, s0.nl_prev[k], hist[k]);
            }
        }
        // mixed-derivative correction at the stage's own index: together with the
        // Gauss-Seidel increment of this stage it cancels the cascade's C_tri
        // bookkeeping exactly, keeping the composite third-order consistent
        if (split && cfg.split_c_correction)
            add_ctriangle(hist, 1.0, s0.du_prev, w); // C_tri du0^n
        VelocityField u_new = solve_stage(1.0 / dt, s1.u, pgrad, hist, none, t_np1, &s1.u_prev);
        rotate3(s1.u, s1.u_prev, s1.u_prev2);
        s1.u = std::move(u_new);
        ScalarField p_new = pgrad; // p1^{n-1} + dp0^n
        ScalarField dnew = divergence(s1.u);
        axpy(-pc, dnew, p_new);
        fill_pressure_ghosts(p_new);
        std::swap(s1.p_prev, s1.p);
        s1.p = std::move(p_new);
        std::swap(s1.du_prev, s1.du);
        divided_difference(s1.u, s1.u_prev, dt, s1.du);
        divided_difference(s1.du, s1.du_prev, dt, s1.d2u);
        std::swap(s1.dp_prev, s1.dp);
        divided_difference(s1.p, s1.p_prev, dt, s1.dp);
    }

    // stage 2: correction u2 at index n-1
    if (nstages >= 3 && n >= 2) {
        std::swap(s2.nl_prev, s2.nl);
        if (cfg.nonlinear) {
            VelocityField combo = s0.u_prev2; // u0^{n-1}
            axpy(dt, s1.u_prev, combo);       // + tau u1^{n-1}
            axpy(dt * dt, s2.u, combo);       // + tau^2 u2^{n-2}
            s2.nl = advect(combo);
        } else {
            s2.nl.fill(0.0);
        }
        ScalarField pgrad = s2.p;       // p2^{n-2}
        axpy(1.0, s1.dp_prev, pgrad);   // + dp1^{n-1}
        VelocityField hist(g);
        for (int k = 0; k < d; ++k) {
            copy_into(s2.u[k], hist[k]);
            scale(hist[k], 1.0 / dt);
            axpy(-0.5, s1.d2u[k], hist[k]);       // -1/2 d2u1^n
            axpy(1.0 / 6.0, s0.d3u[k], hist[k]);  // +1/6 d3u0^{n+1}
            if (cfg.nonlinear) {
                axpy(-1.0 / (dt * dt), s2.nl[k], hist[k]);
                axpy(1.0 / (dt * dt), s1.nl_prev[k], hist[k]);
            }
        }
        if (split && cfg.split_c_correction)
            add_ctriangle(hist, 1.0, s1.du_prev, w); // C_tri du1^{n-1}
        VelocityField u_new = solve_stage(1.0 / dt, s2.u, pgrad, hist, none, t_np1, &s2.u_prev);
        std::swap(s2.u_prev, s2.u);
        s2.u = std::move(u_new);
        ScalarField p_new = pgrad;
        ScalarField dnew = divergence(s2.u);
        axpy(-pc, dnew, p_new);
        fill_pressure_ghosts(p_new);
        std::swap(s2.p_prev, s2.p);
        s2.p = std::move(p_new);
    }

    ++s.step;

    // composite output
    const int lag = composite_lag(cfg.scheme);
    if (s.step > lag) {
        std::swap(s.u_prev, s.u_now);
        std::swap(s.p_prev, s.p_now);
        if (nstages == 2) {
            copy_into(s0.u_prev, s.u_now); // u0^n
            axpy(dt, s1.u, s.u_now);       // + tau u1^n
            copy_into(s0.p_prev, s.p_now);
            axpy(dt, s1.p, s.p_now);
        } else {
            copy_into(s0.u_prev2, s.u_now); // u0^{n-1}
            axpy(dt, s1.u_prev, s.u_now);
            axpy(dt * dt, s2.u, s.u_now);
            copy_into(s0.p_prev2, s.p_now);
            axpy(dt, s1.p_prev, s.p_now);
            axpy(dt * dt, s2.p, s.p_now);
        }
        if (has_nan(s.u_now)) throw DivergenceError(s.step);
    }
}

// ---------------------------------------------------------------------------
// direction splitting

// Dirichlet trace of the velocity increment (u^{n+1}-u^n)/dt for component k.
BoundaryFn increment_trace(const VelocityBC& bc, int k, double tn, double dt) {
    if (!bc[k]) return {};
    BoundaryFn gk = bc[k];
    return [gk, tn, dt](double x, double y, double z, double) {
        return (gk(x, y, z, tn + dt) - gk(x, y, z, tn)) / dt;
    };
}

// Trace of the intermediate variable z = (1 + c*(-d2/dta2)) w on the walls
// normal to the sweep axis, built from the trace of w along those walls.
BoundaryFn douglas_intermediate_trace(const MacGrid& g, const BoundaryFn& wbc, int ta,
                                      double c) {
    if (!wbc) return {};
    const double h = g.h[ta];
    const double lo = g.origin[ta] + 0.5 * h;
    const double hi = g.origin[ta] + g.length[ta] - 0.5 * h;
    const double wall_lo = g.origin[ta];
    const double wall_hi = g.origin[ta] + g.length[ta];
    const double ch2 = c / (h * h);
    return [=](double x, double y, double z, double t) {
        std::array<double, 3> p{x, y, z};
        const double wc = wbc(x, y, z, t);
        auto at = [&](double coord) {
            auto q = p;
            q[ta] = coord;
            return wbc(q[0], q[1], q[2], t);
        };
        const double tc = p[ta];
        const double vl = (tc - h < lo - 0.25 * h) ? 2.0 * at(wall_lo) - wc : at(tc - h);
        const double vh = (tc + h > hi + 0.25 * h) ? 2.0 * at(wall_hi) - wc : at(tc + h);
        return wc + ch2 * (2.0 * wc - vl - vh);
    };
}

// One Crank-Nicolson direction-splitting step on the (u, u_prev, p_half) triple.
// cross0 optionally overrides the averaged lagged cross argument of component 0;
// p_increment optionally adds the stage-1 pressure increment (defect variant).
void dirsplit_core(const SchemeConfig& cfg, const Forcing& f, const VelocityBC& bc,
                   double tn, VelocityField& u, VelocityField& u_prev, ScalarField& p_half,
                   const ScalarField* cross0, const ScalarField* p_increment) {
    const MacGrid& g = u.grid();
    const double dt = cfg.dt;
    const double nu = cfg.nu;
    const double w = cfg.varpi();
    const double th = tn + 0.5 * dt;
    const double t1 = tn + dt;
    const double cdt = 0.5 * dt;
    VelocityField nl = cfg.nonlinear ? advect(u) : VelocityField(g);
    VelocityField u_new = u;

    for (int k = 0; k < 2; ++k) {
        const int j = 1 - k;
        ScalarField r(g, face_loc(k));
        add_d2(r, nu + w, u[k], k);
        add_d2(r, nu, u[k], j);
        // cross term: mean of the two available levels of the other component
        ScalarField combo(g, face_loc(j));
        if (k == 0 && cross0) {
            combo = *cross0;
        } else if (k == 0) {
            copy_into(u[j], combo);
            axpy(1.0, u_prev[j], combo);
            scale(combo, 0.5);
        } else {
            copy_into(u_new[j], combo); // newest level of component 0
            axpy(1.0, u[j], combo);
            scale(combo, 0.5);
        }
        ScalarField m = mixed_derivative(j, k, combo, w);
        axpy(1.0, m, r);
        ScalarField gp(g, face_loc(k));
        center_to_face_diff(p_half, k, gp);
        axpy(-1.0, gp, r);
        add_forcing(r, f, k, th, 1.0);
        if (cfg.nonlinear) axpy(-1.0, nl[k], r);

        BoundaryFn wbc = increment_trace(bc, k, tn, dt);
        BoundaryFn zbc = douglas_intermediate_trace(g, wbc, j, cdt * nu);
        ScalarField z = factored_solve_line_sweep(k, 1.0, cdt * (nu + w), r, zbc, t1);
        ScalarField wf = factored_solve_line_sweep(j, 1.0, cdt * nu, z, wbc, t1);
        copy_into(u[k], u_new[k]);
        axpy(dt, wf, u_new[k]);
        apply_dirichlet(u_new[k], bc[k], t1);
    }

    // p^{n+1/2} = p^{n-1/2} [+ increment] - (w/2) div(u^{n+1} + u^n)
    VelocityField usum = u_new;
    axpy(1.0, u, usum);
    ScalarField dsum = divergence(usum);
    if (p_increment) axpy(1.0, *p_increment, p_half);
    axpy(-0.5 * w, dsum, p_half);
    fill_pressure_ghosts(p_half);

    std::swap(u_prev, u);
    u = std::move(u_new);
}

void step_dirsplit1(SimState& s, const SchemeConfig& cfg, const Forcing& f,
                    const VelocityBC& bc) {
    const double tn = s.time(cfg.dt);
    std::swap(s.p_prev, s.p_now); // keep p^{n-1/2} for diagnostics
    copy_into(s.p_prev, s.p_now);
    dirsplit_core(cfg, f, bc, tn, s.u_now, s.u_prev, s.p_now, nullptr, nullptr);
    ++s.step;
    if (has_nan(s.u_now)) throw DivergenceError(s.step);
}

void step_dirsplit_defect2(SimState& s, const SchemeConfig& cfg, const Forcing& f,
                           const VelocityBC& bc) {
    const MacGrid& g = s.grid;
    const double tn = s.time(cfg.dt);
    TildePair& tp = *s.tilde;

    // stage 1 on the tilde pair
    copy_into(tp.p, tp.p_prev);
    dirsplit_core(cfg, f, bc, tn, tp.u, tp.u_prev, tp.p, nullptr, nullptr);
    ScalarField dpt = tp.p;
    axpy(-1.0, tp.p_prev, dpt); // p~^{n+1/2} - p~^{n-1/2}

    // corrected cross argument: (u2^n + u2^{n-1})/2 + dt * d(u~2)^{n+1}
    ScalarField cross0(g, Loc::FaceY);
    copy_into(s.u_now[1], cross0);
    axpy(1.0, s.u_prev[1], cross0);
    scale(cross0, 0.5);
    axpy(1.0, tp.u[1], cross0);      // + u~2^{n+1}
    axpy(-1.0, tp.u_prev[1], cross0); // - u~2^n

    std::swap(s.p_prev, s.p_now);
    copy_into(s.p_prev, s.p_now);
    dirsplit_core(cfg, f, bc, tn, s.u_now, s.u_prev, s.p_now, &cross0, &dpt);
    ++s.step;
    if (has_nan(s.u_now)) throw DivergenceError(s.step);
}

void step_gs_plain(SimState& s, const SchemeConfig& cfg, const Forcing& f,
                   const VelocityBC& bc) {
    const MacGrid& g = s.grid;
    const double t1 = s.time(cfg.dt) + cfg.dt;
    VelocityField hist(g);
    VelocityField nl = cfg.nonlinear ? advect(s.u_now) : VelocityField(g);
    for (int k = 0; k < g.dim; ++k) {
        copy_into(s.u_now[k], hist[k]);
        scale(hist[k], 1.0 / cfg.dt);
        add_forcing(hist[k], f, k, t1, 1.0);
        if (cfg.nonlinear) axpy(-1.0, nl[k], hist[k]);
    }
    VelocityField u_new =
        gs_solve(cfg, 1.0 / cfg.dt, s.u_now, s.p_now, hist, bc, t1, &s.u_prev);
    finish_step(s, std::move(u_new), cfg.varpi());
}

} // namespace

void step(SimState& s, const SchemeConfig& cfg, const Forcing& f, const VelocityBC& bc) {
    cfg.validate();
    switch (cfg.scheme) {
        case SchemeId::ac1: step_ac1(s, cfg, f, bc); break;
        case SchemeId::gs2d:
        case SchemeId::gs3d: step_gs_plain(s, cfg, f, bc); break;
        case SchemeId::jacobi2d:
        case SchemeId::jacobi_nd:
        case SchemeId::gs3d_modified: step_ac_split(s, cfg, f, bc); break;
        case SchemeId::dirsplit1: step_dirsplit1(s, cfg, f, bc); break;
        case SchemeId::bdf2_bootstrap: step_bdf2_bootstrap(s, cfg, f, bc); break;
        case SchemeId::dirsplit_defect2: step_dirsplit_defect2(s, cfg, f, bc); break;
        case SchemeId::defect2_coupled:
        case SchemeId::defect2_split:
        case SchemeId::defect3_coupled:
        case SchemeId::defect3_split: step_defect_cascade(s, cfg, f, bc); break;
    }
}

double output_time(const SimState& s, const SchemeConfig& cfg) {
    const int lag = composite_lag(cfg.scheme);
    return s.t0 + std::max(0, s.step - lag) * cfg.dt;
}

SimState make_state(const MacGrid& g, const SchemeConfig& cfg) {
    cfg.validate();
    if (cfg.dim != g.dim) throw SpecError("config dim does not match grid");
    SimState s(g);
    if (cfg.scheme == SchemeId::bdf2_bootstrap || cfg.scheme == SchemeId::dirsplit_defect2)
        s.tilde = std::make_unique<TildePair>(g);
    if (composite_lag(cfg.scheme) > 0)
        s.cascade = std::make_unique<DefectCascade>(
            g, composite_lag(cfg.scheme) == 2 ? 3 : 2);
    return s;
}

void init_manufactured(SimState& s, const AnalyticCase& c, const SchemeConfig& cfg,
                       double t0) {
    const double dt = cfg.dt;
    s.t0 = t0;
    s.step = 0;
    // The staggered pressure variable of the direction-splitting schemes acts
    // in the momentum equation one full step after its label, so it is seeded
    // at t0 + dt/2 (its consistency time), not at the label time t0 - dt/2.
    const bool half = cfg.scheme == SchemeId::dirsplit1 ||
                      cfg.scheme == SchemeId::dirsplit_defect2;
    sample_velocity(c, t0, s.u_now);
    sample_velocity(c, t0 - dt, s.u_prev);
    sample_pressure(c, half ? t0 + 0.5 * dt : t0, s.p_now);
    sample_pressure(c, half ? t0 - 0.5 * dt : t0 - dt, s.p_prev);
    if (s.tilde) {
        sample_velocity(c, t0, s.tilde->u);
        sample_velocity(c, t0 - dt, s.tilde->u_prev);
        sample_pressure(c, half ? t0 + 0.5 * dt : t0, s.tilde->p);
        sample_pressure(c, half ? t0 - 0.5 * dt : t0 - dt, s.tilde->p_prev);
    }
    if (s.cascade) {
        DefectStage& s0 = s.cascade->s[0];
        sample_velocity(c, t0, s0.u);
        sample_pressure(c, t0, s0.p);
        copy_into(s0.u, s.u_now);
        copy_into(s0.p, s.p_now);
    }
}

namespace {

struct SplitMix64 {
    uint64_t x;
    explicit SplitMix64(uint64_t seed) : x(seed ^ 0x9e3779b97f4a7c15ull) {}
    uint64_t next() {
        x += 0x9e3779b97f4a7c15ull;
        uint64_t z = x;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }
    double uniform() { // in [-1, 1)
        return 2.0 * (static_cast<double>(next() >> 11) * 0x1.0p-53) - 1.0;
    }
};

} // namespace

void init_solenoidal(SimState& s, uint64_t seed) {
    const MacGrid& g = s.grid;
    SplitMix64 rng(seed);
    s.u_now.fill(0.0);
    if (g.dim == 2) {
        const int n0 = g.n[0], n1 = g.n[1];
        std::vector<double> psi((n0 + 1) * (n1 + 1), 0.0);
        auto P = [&](int i, int j) -> double& { return psi[i + j * (n0 + 1)]; };
        for (int j = 1; j < n1; ++j)
            for (int i = 1; i < n0; ++i) P(i, j) = rng.uniform();
        for (int j = 0; j < n1; ++j)
            for (int i = 0; i <= n0; ++i)
                s.u_now[0](i, j) = (P(i, j + 1) - P(i, j)) / g.h[1];
        for (int j = 0; j <= n1; ++j)
            for (int i = 0; i < n0; ++i)
                s.u_now[1](i, j) = -(P(i + 1, j) - P(i, j)) / g.h[0];
    } else {
        const int n0 = g.n[0], n1 = g.n[1], n2 = g.n[2];
        // vector potential components on edges, zero on the boundary planes
        std::vector<double> A0(n0 * (n1 + 1) * (n2 + 1), 0.0);
        std::vector<double> A1((n0 + 1) * n1 * (n2 + 1), 0.0);
        std::vector<double> A2((n0 + 1) * (n1 + 1) * n2, 0.0);
        auto P0 = [&](int i, int j, int k) -> double& {
            return A0[i + j * n0 + k * n0 * (n1 + 1)];
        };
        auto P1 = [&](int i, int j, int k) -> double& {
            return A1[i + j * (n0 + 1) + k * (n0 + 1) * n1];
        };
        auto P2 = [&](int i, int j, int k) -> double& {
            return A2[i + j * (n0 + 1) + k * (n0 + 1) * (n1 + 1)];
        };
        for (int k = 1; k < n2; ++k)
            for (int j = 1; j < n1; ++j)
                for (int i = 0; i < n0; ++i) P0(i, j, k) = rng.uniform();
        for (int k = 1; k < n2; ++k)
            for (int j = 0; j < n1; ++j)
                for (int i = 1; i < n0; ++i) P1(i, j, k) = rng.uniform();
        for (int k = 0; k < n2; ++k)
            for (int j = 1; j < n1; ++j)
                for (int i = 1; i < n0; ++i) P2(i, j, k) = rng.uniform();
        for (int k = 0; k < n2; ++k)
            for (int j = 0; j < n1; ++j)
                for (int i = 0; i <= n0; ++i)
                    s.u_now[0](i, j, k) = (P2(i, j + 1, k) - P2(i, j, k)) / g.h[1] -
                                          (P1(i, j, k + 1) - P1(i, j, k)) / g.h[2];
        for (int k = 0; k < n2; ++k)
            for (int j = 0; j <= n1; ++j)
                for (int i = 0; i < n0; ++i)
                    s.u_now[1](i, j, k) = (P0(i, j, k + 1) - P0(i, j, k)) / g.h[2] -
                                          (P2(i + 1, j, k) - P2(i, j, k)) / g.h[0];
        for (int k = 0; k <= n2; ++k)
            for (int j = 0; j < n1; ++j)
                for (int i = 0; i < n0; ++i)
                    s.u_now[2](i, j, k) = (P1(i + 1, j, k) - P1(i, j, k)) / g.h[0] -
                                          (P0(i, j + 1, k) - P0(i, j, k)) / g.h[1];
    }
    apply_dirichlet(s.u_now, VelocityBC{}, 0.0);
    copy_into(s.u_now, s.u_prev);
    s.p_now.fill(0.0);
    s.p_prev.fill(0.0);
    s.step = 0;
    s.t0 = 0.0;
    if (s.tilde) {
        copy_into(s.u_now, s.tilde->u);
        copy_into(s.u_now, s.tilde->u_prev);
        s.tilde->p.fill(0.0);
        s.tilde->p_prev.fill(0.0);
    }
    if (s.cascade) {
        copy_into(s.u_now, s.cascade->s[0].u);
        s.cascade->s[0].p.fill(0.0);
    }
}

EnergyBreakdown energy(const SimState& s, const SchemeConfig& cfg) {
    const MacGrid& g = s.grid;
    const double dt = cfg.dt;
    const double w = cfg.varpi();
    EnergyBreakdown e;
    e.kinetic = dot(s.u_now, s.u_now);

    double pcoef = w;
    if (cfg.scheme == SchemeId::ac1 || cfg.scheme == SchemeId::defect2_coupled ||
        cfg.scheme == SchemeId::defect3_coupled)
        pcoef = cfg.chi;
    e.pressure = dt / pcoef * dot(s.p_now, s.p_now);

    ScalarField der(g, Loc::Cell);
    auto dir_term = [&](const ScalarField& v, int k, double coef) {
        face_to_center_diff(v, k, der);
        return coef * dt * w * dot(der, der);
    };
    switch (cfg.scheme) {
        case SchemeId::gs2d:
            e.directional[1] = dir_term(s.u_now[1], 1, 1.0);
            break;
        case SchemeId::jacobi2d:
            e.directional[0] = dir_term(s.u_now[0], 0, 1.0);
            e.directional[1] = dir_term(s.u_now[1], 1, 1.0);
            break;
        case SchemeId::jacobi_nd:
            for (int k = 0; k < g.dim; ++k)
                e.directional[k] = dir_term(s.u_now[k], k, static_cast<double>(g.dim));
            break;
        case SchemeId::gs3d_modified:
            e.directional[1] = dir_term(s.u_now[1], 1, 2.0);
            e.directional[2] = dir_term(s.u_now[2], 2, 2.0);
            break;
        case SchemeId::dirsplit1: {
            ScalarField ubar(g, Loc::FaceY);
            copy_into(s.u_now[1], ubar);
            axpy(1.0, s.u_prev[1], ubar);
            scale(ubar, 0.5);
            e.directional[1] = dir_term(ubar, 1, 1.0);
            // (dt^2/4) |u|_B^2 with B_k = (A_kk + C_kk) A_k,other
            for (int k = 0; k < 2; ++k) {
                const int j = 1 - k;
                std::array<double, 3> cj{0, 0, 0}, ck{0, 0, 0};
                cj[j] = cfg.nu;
                ck[k] = cfg.nu + w;
                ScalarStencil Y(g, face_loc(k), 0.0, cj);
                ScalarStencil X(g, face_loc(k), 0.0, ck);
                ScalarField z(g, face_loc(k)), zz(g, face_loc(k));
                Y.apply(s.u_now[k], z);
                X.apply(z, zz);
                e.seminorm += 0.25 * dt * dt * dot(zz, s.u_now[k]);
            }
            break;
        }
        default:
            e.heuristic = (cfg.scheme != SchemeId::ac1);
            break;
    }
    return e;
}

double pressure_law_residual(const SimState& s, const SchemeConfig& cfg) {
    const double w = cfg.varpi();
    auto law = [&](const ScalarField& pn, const ScalarField& pold, const VelocityField& u,
                   double coef, const ScalarField* inc) {
        ScalarField r = pold;
        if (inc) axpy(1.0, *inc, r);
        ScalarField d = divergence(u);
        axpy(-coef, d, r);
        axpy(-1.0, pn, r);
        return max_abs(r);
    };
    switch (cfg.scheme) {
        case SchemeId::dirsplit1: {
            VelocityField usum = s.u_now;
            axpy(1.0, s.u_prev, usum);
            return law(s.p_now, s.p_prev, usum, 0.5 * w, nullptr);
        }
        case SchemeId::dirsplit_defect2: {
            ScalarField dpt = s.tilde->p;
            axpy(-1.0, s.tilde->p_prev, dpt);
            VelocityField usum = s.u_now;
            axpy(1.0, s.u_prev, usum);
            return law(s.p_now, s.p_prev, usum, 0.5 * w, &dpt);
        }
        case SchemeId::bdf2_bootstrap: {
            ScalarField dpt = s.tilde->p;
            axpy(-1.0, s.tilde->p_prev, dpt);
            double r = law(s.p_now, s.p_prev, s.u_now, w, &dpt);
            r = std::max(r, law(s.tilde->p, s.tilde->p_prev, s.tilde->u, w, nullptr));
            return r;
        }
        case SchemeId::defect2_coupled:
        case SchemeId::defect2_split:
        case SchemeId::defect3_coupled:
        case SchemeId::defect3_split: {
            const double pc = cfg.pressure_coef();
            const DefectCascade& c = *s.cascade;
            double r = law(c.s[0].p, c.s[0].p_prev, c.s[0].u, pc, nullptr);
            if (s.step >= 2)
                r = std::max(r, law(c.s[1].p, c.s[1].p_prev, c.s[1].u, pc, &c.s[0].dp_prev));
            if (c.nstages >= 3 && s.step >= 3)
                r = std::max(r, law(c.s[2].p, c.s[2].p_prev, c.s[2].u, pc, &c.s[1].dp_prev));
            return r;
        }
        case SchemeId::ac1:
            return law(s.p_now, s.p_prev, s.u_now, cfg.chi, nullptr);
        default:
            return law(s.p_now, s.p_prev, s.u_now, w, nullptr);
    }
}

} // namespace acns
