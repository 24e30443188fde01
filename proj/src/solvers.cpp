#include "acns/solvers.hpp"

#include "acns/operators.hpp"

#include <cmath>

namespace acns {

int solver_iteration_cap(const MacGrid& g, long ndofs, int factor) {
    return static_cast<int>(factor * std::pow(static_cast<double>(ndofs), 1.0 / g.dim)) + 8;
}

namespace diag {
long cg_total_iterations = 0;
long cg_total_solves = 0;
} // namespace diag

ScalarStencil::ScalarStencil(const MacGrid& grid, Loc l, double a, std::array<double, 3> ca)
    : g(&grid), loc(l), alpha(a) {
    for (int ax = 0; ax < 3; ++ax)
        ch2[ax] = (ax < grid.dim) ? ca[ax] / (grid.h[ax] * grid.h[ax]) : 0.0;
}

void ScalarStencil::apply(const ScalarField& v, ScalarField& out) const {
    const int fa = face_axis(loc);
    const int n0 = v.nn(0), n1 = v.nn(1), n2 = v.nn(2);
    const int s1 = v.stride(1), s2 = v.stride(2);
    const double c0 = ch2[0], c1 = ch2[1], c2 = ch2[2];
    const int dim = g->dim;

    // per-row coefficient pattern of a tangential/face axis at row index q:
    // value contribution c*(dc*vc - ml*v_lo - mh*v_hi)
    auto row_coef = [&](int a, int q, int nn, double& dc, double& ml, double& mh) {
        dc = 2.0;
        ml = mh = 1.0;
        if (a == fa) {
            if (q == 1) ml = 0.0;          // wall neighbor is zero
            if (q == nn - 2) mh = 0.0;
        } else {
            if (q == 0) { dc = 3.0; ml = 0.0; }         // mirror ghost
            if (q == nn - 1) { dc = 3.0; mh = 0.0; }
        }
    };

    int i_lo = 0, i_hi = n0 - 1;
    if (fa == 0) { i_lo = 1; i_hi = n0 - 2; }

    for (int k = 0; k < n2; ++k) {
        const bool k_wall = (fa == 2 && (k == 0 || k == n2 - 1));
        double dzc = 2.0, mzl = 1.0, mzh = 1.0;
        if (dim == 3 && c2 != 0.0 && !k_wall) row_coef(2, k, n2, dzc, mzl, mzh);
        for (int j = 0; j < n1; ++j) {
            double* q = out.raw().data() + out.idx(0, j, k);
            if (k_wall || (fa == 1 && (j == 0 || j == n1 - 1))) {
                for (int i = 0; i < n0; ++i) q[i] = 0.0;
                continue;
            }
            double dyc = 2.0, myl = 1.0, myh = 1.0;
            if (c1 != 0.0) row_coef(1, j, n1, dyc, myl, myh);
            const double* p = v.raw().data() + v.idx(0, j, k);
            if (fa == 0) {
                q[0] = 0.0;
                q[n0 - 1] = 0.0;
            }
            for (int i = i_lo; i <= i_hi; ++i) {
                const double vc = p[i];
                double s = alpha * vc;
                if (c0 != 0.0) {
                    double dxc, mxl, mxh;
                    row_coef(0, i, n0, dxc, mxl, mxh);
                    s += c0 * (dxc * vc - mxl * p[i - 1] - mxh * p[i + 1]);
                }
                if (c1 != 0.0) s += c1 * (dyc * vc - myl * p[i - s1] - myh * p[i + s1]);
                if (dim == 3 && c2 != 0.0)
                    s += c2 * (dzc * vc - mzl * p[i - s2] - mzh * p[i + s2]);
                q[i] = s;
            }
        }
    }
}

void ScalarStencil::diagonal(ScalarField& d) const {
    const int fa = face_axis(loc);
    d.for_nodes([&](int i, int j, int k) {
        const int ijk[3] = {i, j, k};
        if (fa >= 0 && (ijk[fa] == 0 || ijk[fa] == d.nn(fa) - 1)) {
            d(i, j, k) = 1.0;
            return;
        }
        double s = alpha;
        for (int a = 0; a < g->dim; ++a) {
            const int last = d.nn(a) - 1;
            double c = 2.0;
            if (a != fa && (ijk[a] == 0 || ijk[a] == last)) c = 3.0;
            s += c * ch2[a];
        }
        d(i, j, k) = s;
    });
}

namespace {

// One factored line solver (alpha + c*(-d2/da2))^-1 with homogeneous-Dirichlet
// semantics, Thomas coefficients precomputed once (constant per axis).
struct AxisFactor {
    int axis = 0;
    bool on_face_axis = false;
    int m = 0;         // unknowns per line
    double cg = 0.0;   // c / h^2
    std::vector<double> low;  // elimination multipliers
    std::vector<double> invd; // inverse pivots

    AxisFactor(const MacGrid& g, Loc loc, int a, double alpha, double c) : axis(a) {
        on_face_axis = (face_axis(loc) == a);
        const int nn = g.nnodes(loc, a);
        m = on_face_axis ? nn - 2 : nn;
        cg = c / (g.h[a] * g.h[a]);
        low.assign(m, 0.0);
        invd.assign(m, 0.0);
        auto diag_at = [&](int q) {
            if (!on_face_axis && (q == 0 || q == m - 1)) return alpha + 3.0 * cg;
            return alpha + 2.0 * cg;
        };
        double piv = diag_at(0);
        invd[0] = 1.0 / piv;
        for (int q = 1; q < m; ++q) {
            low[q] = -cg * invd[q - 1];
            piv = diag_at(q) - low[q] * (-cg);
            invd[q] = 1.0 / piv;
        }
    }

    // in-place solve along every grid line of the field
    void solve_lines(ScalarField& f) const {
        const int a = axis;
        const int stride = f.stride(a);
        const int base_shift = on_face_axis ? 1 : 0;
        const int a1 = (a == 0) ? 1 : 0;
        const int a2 = (a == 2) ? 1 : 2;
        auto& raw = f.raw();
        for (int t2 = 0; t2 < f.nn(a2); ++t2)
            for (int t1 = 0; t1 < f.nn(a1); ++t1) {
                int ijk[3] = {0, 0, 0};
                ijk[a1] = t1;
                ijk[a2] = t2;
                ijk[a] = base_shift;
                double* p = raw.data() + f.idx(ijk[0], ijk[1], ijk[2]);
                for (int q = 1; q < m; ++q) p[q * stride] -= low[q] * p[(q - 1) * stride];
                p[(m - 1) * stride] *= invd[m - 1];
                for (int q = m - 2; q >= 0; --q)
                    p[q * stride] = (p[q * stride] + cg * p[(q + 1) * stride]) * invd[q];
            }
    }
};

// SPD product preconditioner prod_a (alpha + c_a X_a) / alpha^(n_active-1);
// the one-dimensional factors commute on the tensor grid.
struct FactoredPreconditioner {
    std::vector<AxisFactor> factors;
    double rescale = 1.0;
    FactoredPreconditioner(const MacGrid& g, Loc loc, double alpha,
                           const std::array<double, 3>& ca) {
        for (int a = 0; a < g.dim; ++a)
            if (ca[a] > 0.0) factors.emplace_back(g, loc, a, alpha, ca[a]);
        if (!factors.empty())
            rescale = std::pow(alpha, static_cast<double>(factors.size()) - 1.0);
    }
    void apply(const ScalarField& r, ScalarField& z, double inv_alpha) const {
        z = r;
        if (factors.empty()) {
            scale(z, inv_alpha);
            return;
        }
        for (const auto& fct : factors) fct.solve_lines(z);
        if (rescale != 1.0) scale(z, rescale);
    }
};

// raw-array vector ops over whole storage (ghosts stay zero in all CG vectors)

double raw_dot(const ScalarField& a, const ScalarField& b) {
    const auto& x = a.raw();
    const auto& y = b.raw();
    double s = 0.0;
    for (size_t i = 0; i < x.size(); ++i) s += x[i] * y[i];
    return s;
}

double raw_dot(const VelocityField& a, const VelocityField& b) {
    double s = 0.0;
    for (int k = 0; k < a.dim(); ++k) s += raw_dot(a[k], b[k]);
    return s;
}

void raw_zero(ScalarField& a) { a.fill(0.0); }
void raw_zero(VelocityField& a) { a.fill(0.0); }

void raw_axpy(double c, const ScalarField& x, ScalarField& y) { axpy(c, x, y); }
void raw_axpy(double c, const VelocityField& x, VelocityField& y) { axpy(c, x, y); }

void raw_xpay(const ScalarField& x, double a, ScalarField& y) {
    const auto& xr = x.raw();
    auto& yr = y.raw();
    for (size_t i = 0; i < yr.size(); ++i) yr[i] = xr[i] + a * yr[i];
}
void raw_xpay(const VelocityField& x, double a, VelocityField& y) {
    for (int k = 0; k < y.dim(); ++k) raw_xpay(x[k], a, y[k]);
}

// zero ghosts and (for face fields) wall nodes so vectors live in the CG subspace
void sanitize(ScalarField& f) {
    const int fa = face_axis(f.loc());
    ScalarField clean(f.grid(), f.loc());
    clean.for_nodes([&](int i, int j, int k) {
        const int ijk[3] = {i, j, k};
        if (fa >= 0 && (ijk[fa] == 0 || ijk[fa] == f.nn(fa) - 1)) return;
        clean(i, j, k) = f(i, j, k);
    });
    f = std::move(clean);
}
void sanitize(VelocityField& u) {
    for (int k = 0; k < u.dim(); ++k) sanitize(u[k]);
}

template <class Vec, class Apply, class Precond>
SolveStats pcg_run(const Apply& A, const Precond& M, Vec& x, const Vec& rhs, double tol,
                   int max_iters, double vol) {
    Vec r = rhs, z = rhs, p = rhs, Ap = rhs;
    const double rhs_norm = std::sqrt(raw_dot(rhs, rhs));
    SolveStats st;
    if (rhs_norm == 0.0) {
        raw_zero(x);
        return st;
    }
    const double target = tol * rhs_norm;

    A(x, Ap);
    r = rhs;
    raw_axpy(-1.0, Ap, r);
    double rnorm = std::sqrt(raw_dot(r, r));
    if (rnorm <= target) {
        st.final_residual = rnorm * std::sqrt(vol);
        return st;
    }
    M(r, z);
    p = z;
    double rz = raw_dot(r, z);
    for (int it = 1; it <= max_iters; ++it) {
        A(p, Ap);
        const double pAp = raw_dot(p, Ap);
        const double alpha = rz / pAp;
        raw_axpy(alpha, p, x);
        raw_axpy(-alpha, Ap, r);
        rnorm = std::sqrt(raw_dot(r, r));
        st.iterations = it;
        if (rnorm <= target) {
            st.final_residual = rnorm * std::sqrt(vol);
            return st;
        }
        M(r, z);
        const double rz_new = raw_dot(r, z);
        raw_xpay(z, rz_new / rz, p);
        rz = rz_new;
    }
    st.converged = false;
    st.final_residual = rnorm * std::sqrt(vol);
    return st;
}

template <class Vec, class Apply, class Precond>
SolveStats pcg(const Apply& A, const Precond& M, Vec& x, const Vec& rhs, double tol,
               int max_iters, double vol) {
    SolveStats st = pcg_run(A, M, x, rhs, tol, max_iters, vol);
    diag::cg_total_iterations += st.iterations;
    diag::cg_total_solves += 1;
    return st;
}

} // namespace
SolveStats helmholtz_solve(double alpha, double dt, std::array<double, 3> kappa,
                           const ScalarField& rhs, const BoundaryFn& bc, double t,
                           double tol, ScalarField& out, int max_iters) {
    const MacGrid& g = rhs.grid();
    if (alpha <= 0) throw SpecError("helmholtz_solve: alpha must be positive");
    if (dt < 0) throw SpecError("helmholtz_solve: dt must be nonnegative");
    for (int a = 0; a < g.dim; ++a)
        if (kappa[a] < 0) throw SpecError("helmholtz_solve: kappa must be nonnegative");

    std::array<double, 3> ca{};
    for (int a = 0; a < 3; ++a) ca[a] = dt * kappa[a];
    const Loc loc = rhs.loc();
    ScalarStencil A(g, loc, alpha, ca);

    ScalarField b = rhs;
    sanitize(b);

    // fold Dirichlet data into the right-hand side
    const int fa = face_axis(loc);
    if (bc) {
        for (int axis = 0; axis < g.dim; ++axis) {
            if (ca[axis] == 0.0) continue;
            const double c = A.ch2[axis];
            const int last = b.nn(axis) - 1;
            const double wall_lo = g.origin[axis];
            const double wall_hi = g.origin[axis] + g.length[axis];
            b.for_nodes([&](int i, int j, int k) {
                int ijk[3] = {i, j, k};
                if (fa >= 0 && (ijk[fa] == 0 || ijk[fa] == b.nn(fa) - 1)) return;
                auto pos_at = [&](double wall) {
                    std::array<double, 3> p = {b.coord(0, i), b.coord(1, j), b.coord(2, k)};
                    p[axis] = wall;
                    return p;
                };
                if (axis == fa) {
                    if (ijk[axis] == 1) {
                        auto p = pos_at(wall_lo);
                        b(i, j, k) += c * bc(p[0], p[1], p[2], t);
                    }
                    if (ijk[axis] == last - 1) {
                        auto p = pos_at(wall_hi);
                        b(i, j, k) += c * bc(p[0], p[1], p[2], t);
                    }
                } else {
                    if (ijk[axis] == 0) {
                        auto p = pos_at(wall_lo);
                        b(i, j, k) += 2.0 * c * bc(p[0], p[1], p[2], t);
                    }
                    if (ijk[axis] == last) {
                        auto p = pos_at(wall_hi);
                        b(i, j, k) += 2.0 * c * bc(p[0], p[1], p[2], t);
                    }
                }
            });
        }
    }

    sanitize(out);

    long ndofs = 1;
    for (int a = 0; a < g.dim; ++a) ndofs *= b.nn(a);
    if (max_iters <= 0) max_iters = solver_iteration_cap(g, ndofs);

    FactoredPreconditioner pre(g, loc, alpha, ca);
    auto apply = [&](const ScalarField& v, ScalarField& Av) { A.apply(v, Av); };
    auto precond = [&](const ScalarField& r, ScalarField& z) {
        pre.apply(r, z, 1.0 / alpha);
    };
    SolveStats st = pcg(apply, precond, out, b, tol, max_iters, g.cell_volume());
    if (!st.converged)
        throw SolveError("helmholtz_solve: CG did not converge within " +
                             std::to_string(max_iters) + " iterations",
                         st);
    apply_dirichlet(out, bc, t);
    return st;
}

ScalarField factored_solve_line_sweep(int axis, double alpha, double coeff,
                                      const ScalarField& rhs, const BoundaryFn& bc,
                                      double t) {
    const MacGrid& g = rhs.grid();
    if (coeff < 0) throw SpecError("factored_solve_line_sweep: coeff must be nonnegative");
    ScalarField out(g, rhs.loc());
    const int fa = face_axis(rhs.loc());
    const int nn = rhs.nn(axis);
    const double c = coeff / (g.h[axis] * g.h[axis]);
    const double wall_lo = g.origin[axis];
    const double wall_hi = g.origin[axis] + g.length[axis];

    const int m = (axis == fa) ? nn - 2 : nn; // unknowns per line
    std::vector<double> dl(m > 0 ? m - 1 : 0), dd(m), du(m > 0 ? m - 1 : 0), b(m), work(m);

    const int a1 = (axis == 0) ? 1 : 0;
    const int a2 = (axis == 2) ? 1 : 2;
    for (int t2 = 0; t2 < rhs.nn(a2); ++t2)
        for (int t1 = 0; t1 < rhs.nn(a1); ++t1) {
            int ijk[3];
            ijk[a1] = t1;
            ijk[a2] = t2;
            auto bc_at = [&](double wall) {
                if (!bc) return 0.0;
                ijk[axis] = 0;
                std::array<double, 3> p = {rhs.coord(0, ijk[0]), rhs.coord(1, ijk[1]),
                                           rhs.coord(2, ijk[2])};
                p[axis] = wall;
                return bc(p[0], p[1], p[2], t);
            };
            const double g_lo = bc_at(wall_lo), g_hi = bc_at(wall_hi);
            if (axis == fa) {
                for (int q = 0; q < m; ++q) {
                    ijk[axis] = q + 1;
                    b[q] = rhs(ijk[0], ijk[1], ijk[2]);
                    dd[q] = alpha + 2.0 * c;
                    if (q < m - 1) dl[q] = du[q] = -c;
                }
                b[0] += c * g_lo;
                b[m - 1] += c * g_hi;
                thomas_solve_inplace(dl.data(), dd.data(), du.data(), b.data(), work.data(),
                                     m);
                for (int q = 0; q < m; ++q) {
                    ijk[axis] = q + 1;
                    out(ijk[0], ijk[1], ijk[2]) = b[q];
                }
                ijk[axis] = 0;
                out(ijk[0], ijk[1], ijk[2]) = g_lo;
                ijk[axis] = nn - 1;
                out(ijk[0], ijk[1], ijk[2]) = g_hi;
            } else {
                for (int q = 0; q < m; ++q) {
                    ijk[axis] = q;
                    b[q] = rhs(ijk[0], ijk[1], ijk[2]);
                    dd[q] = alpha + ((q == 0 || q == m - 1) ? 3.0 : 2.0) * c;
                    if (q < m - 1) dl[q] = du[q] = -c;
                }
                b[0] += 2.0 * c * g_lo;
                b[m - 1] += 2.0 * c * g_hi;
                thomas_solve_inplace(dl.data(), dd.data(), du.data(), b.data(), work.data(),
                                     m);
                for (int q = 0; q < m; ++q) {
                    ijk[axis] = q;
                    out(ijk[0], ijk[1], ijk[2]) = b[q];
                }
            }
        }
    return out;
}

namespace {

// alpha*v - cnu*Lap v - cgd*grad(div v) with homogeneous Dirichlet semantics
struct CoupledStencil {
    const MacGrid* g;
    double alpha, cnu, cgd;
    std::vector<ScalarStencil> lap;
    CoupledStencil(const MacGrid& grid, double a, double n, double w)
        : g(&grid), alpha(a), cnu(n), cgd(w) {
        for (int k = 0; k < grid.dim; ++k)
            lap.emplace_back(grid, face_loc(k), alpha, std::array<double, 3>{n, n, n});
    }
    void apply(const VelocityField& v, VelocityField& out, ScalarField& divbuf) const {
        for (int k = 0; k < g->dim; ++k) lap[k].apply(v[k], out[k]);
        if (cgd == 0.0) return;
        // div over all cells (wall faces are zero by the subspace invariant)
        divbuf.fill(0.0);
        ScalarField tmp(*g, Loc::Cell);
        for (int k = 0; k < g->dim; ++k) {
            face_to_center_diff(v[k], k, tmp);
            axpy(1.0, tmp, divbuf);
        }
        for (int k = 0; k < g->dim; ++k) {
            const double ih = cgd / g->h[k];
            int step[3] = {0, 0, 0};
            step[k] = 1;
            out[k].for_nodes([&](int i, int j, int kk) {
                int ijk[3] = {i, j, kk};
                if (ijk[k] == 0 || ijk[k] == out[k].nn(k) - 1) return;
                out[k](i, j, kk) -=
                    ih * (divbuf(i, j, kk) - divbuf(i - step[0], j - step[1], kk - step[2]));
            });
        }
    }
};

} // namespace

SolveStats coupled_graddiv_solve(double alpha, double nu_dt, double w_dt,
                                 const VelocityField& rhs, const VelocityBC& bc, double t,
                                 double tol, VelocityField& out, int max_iters) {
    const MacGrid& g = rhs.grid();
    if (alpha <= 0 || nu_dt < 0 || w_dt < 0)
        throw SpecError("coupled_graddiv_solve: bad coefficients");
    CoupledStencil A(g, alpha, nu_dt, w_dt);

    VelocityField b = rhs;
    sanitize(b);

    // lift inhomogeneous Dirichlet data: b -= A_raw(extension)
    bool have_bc = false;
    for (int k = 0; k < g.dim; ++k)
        if (bc[k]) have_bc = true;
    if (have_bc) {
        VelocityField ext(g);
        ext.fill(0.0);
        apply_dirichlet(ext, bc, t); // walls = trace, tangential ghosts = 2*trace
        ScalarField dive = divergence(ext);
        for (int k = 0; k < g.dim; ++k) {
            ScalarField lap = div_kappa_grad(ext[k], {nu_dt, nu_dt, nu_dt});
            ScalarField gdk(g, face_loc(k));
            center_to_face_diff(dive, k, gdk);
            const ScalarField& ek = ext[k];
            b[k].for_nodes([&](int i, int j, int kk) {
                int ijk[3] = {i, j, kk};
                if (ijk[k] == 0 || ijk[k] == b[k].nn(k) - 1) return;
                b[k](i, j, kk) -= alpha * ek(i, j, kk) - lap(i, j, kk) - w_dt * gdk(i, j, kk);
            });
        }
    }

    long ndofs = 0;
    for (int k = 0; k < g.dim; ++k) {
        long nk = 1;
        for (int a = 0; a < g.dim; ++a) nk *= b[k].nn(a);
        ndofs += nk;
    }
    if (max_iters <= 0) max_iters = solver_iteration_cap(g, ndofs);

    // block-diagonal line preconditioner; the own-direction block carries the
    // grad-div diagonal contribution
    std::vector<FactoredPreconditioner> pre;
    for (int k = 0; k < g.dim; ++k) {
        std::array<double, 3> ca{};
        for (int a = 0; a < g.dim; ++a) ca[a] = nu_dt + (a == k ? w_dt : 0.0);
        pre.emplace_back(g, face_loc(k), alpha, ca);
    }

    sanitize(out);
    ScalarField divbuf(g, Loc::Cell);
    auto apply = [&](const VelocityField& v, VelocityField& Av) { A.apply(v, Av, divbuf); };
    auto precond = [&](const VelocityField& r, VelocityField& z) {
        for (int k = 0; k < g.dim; ++k) pre[k].apply(r[k], z[k], 1.0 / alpha);
    };
    SolveStats st = pcg(apply, precond, out, b, tol, max_iters, g.cell_volume());
    if (!st.converged)
        throw SolveError("coupled_graddiv_solve: CG did not converge within " +
                             std::to_string(max_iters) + " iterations",
                         st);
    apply_dirichlet(out, bc, t);
    return st;
}

} // namespace acns
