#include "acns/operators.hpp"

#include <cmath>

namespace acns {

namespace {

inline std::array<double, 3> node_pos(const ScalarField& f, int i, int j, int k) {
    return {f.coord(0, i), f.coord(1, j), f.coord(2, k)};
}

// Visit all non-ghost multi-indices of the two axes other than `axis`.
template <class F>
void for_transverse(const ScalarField& f, int axis, F&& body) {
    const int a1 = (axis == 0) ? 1 : 0;
    const int a2 = (axis == 2) ? 1 : 2;
    for (int t2 = 0; t2 < f.nn(a2); ++t2)
        for (int t1 = 0; t1 < f.nn(a1); ++t1) {
            int ijk[3];
            ijk[a1] = t1;
            ijk[a2] = t2;
            body(ijk);
        }
}

} // namespace

void apply_dirichlet(ScalarField& f, const BoundaryFn& trace, double t) {
    const MacGrid& g = f.grid();
    const int fa = face_axis(f.loc());
    for (int axis = 0; axis < g.dim; ++axis) {
        const int last = f.nn(axis) - 1;
        const double wall_lo = g.origin[axis];
        const double wall_hi = g.origin[axis] + g.length[axis];
        for_transverse(f, axis, [&](int* ijk) {
            auto value = [&](int i, double wall) {
                if (!trace) return 0.0;
                ijk[axis] = i;
                auto p = node_pos(f, ijk[0], ijk[1], ijk[2]);
                p[axis] = wall;
                return trace(p[0], p[1], p[2], t);
            };
            if (axis == fa) {
                // nodes on the wall carry the trace exactly
                const double lo = value(0, wall_lo), hi = value(last, wall_hi);
                ijk[axis] = 0;
                f(ijk[0], ijk[1], ijk[2]) = lo;
                ijk[axis] = last;
                f(ijk[0], ijk[1], ijk[2]) = hi;
                ijk[axis] = 1;
                const double in_lo = f(ijk[0], ijk[1], ijk[2]);
                ijk[axis] = last - 1;
                const double in_hi = f(ijk[0], ijk[1], ijk[2]);
                ijk[axis] = -1;
                f(ijk[0], ijk[1], ijk[2]) = 2.0 * lo - in_lo;
                ijk[axis] = last + 1;
                f(ijk[0], ijk[1], ijk[2]) = 2.0 * hi - in_hi;
            } else {
                // mirror extrapolation through the wall
                const double lo = value(0, wall_lo), hi = value(last, wall_hi);
                ijk[axis] = 0;
                const double in_lo = f(ijk[0], ijk[1], ijk[2]);
                ijk[axis] = last;
                const double in_hi = f(ijk[0], ijk[1], ijk[2]);
                ijk[axis] = -1;
                f(ijk[0], ijk[1], ijk[2]) = 2.0 * lo - in_lo;
                ijk[axis] = last + 1;
                f(ijk[0], ijk[1], ijk[2]) = 2.0 * hi - in_hi;
            }
        });
    }
}

void apply_dirichlet(VelocityField& u, const VelocityBC& bc, double t) {
    for (int k = 0; k < u.dim(); ++k) apply_dirichlet(u[k], bc[k], t);
}

void fill_pressure_ghosts(ScalarField& p) {
    const MacGrid& g = p.grid();
    for (int axis = 0; axis < g.dim; ++axis) {
        const int last = p.nn(axis) - 1;
        for_transverse(p, axis, [&](int* ijk) {
            ijk[axis] = 0;
            const double lo = p(ijk[0], ijk[1], ijk[2]);
            ijk[axis] = last;
            const double hi = p(ijk[0], ijk[1], ijk[2]);
            ijk[axis] = -1;
            p(ijk[0], ijk[1], ijk[2]) = lo;
            ijk[axis] = last + 1;
            p(ijk[0], ijk[1], ijk[2]) = hi;
        });
    }
}

void face_to_center_diff(const ScalarField& v, int k, ScalarField& out) {
    const double ih = 1.0 / v.grid().h[k];
    int step[3] = {0, 0, 0};
    step[k] = 1;
    out.for_nodes([&](int i, int j, int kk) {
        out(i, j, kk) = (v(i + step[0], j + step[1], kk + step[2]) - v(i, j, kk)) * ih;
    });
}

void center_to_face_diff(const ScalarField& q, int k, ScalarField& out) {
    const double ih = 1.0 / q.grid().h[k];
    int step[3] = {0, 0, 0};
    step[k] = 1;
    out.for_nodes([&](int i, int j, int kk) {
        out(i, j, kk) = (q(i, j, kk) - q(i - step[0], j - step[1], kk - step[2])) * ih;
    });
}

ScalarField divergence(const VelocityField& u) {
    const MacGrid& g = u.grid();
    ScalarField out(g, Loc::Cell);
    ScalarField tmp(g, Loc::Cell);
    for (int k = 0; k < g.dim; ++k) {
        face_to_center_diff(u[k], k, tmp);
        axpy(1.0, tmp, out);
    }
    return out;
}

VelocityField gradient(const ScalarField& p) {
    const MacGrid& g = p.grid();
    VelocityField out(g);
    for (int k = 0; k < g.dim; ++k) center_to_face_diff(p, k, out[k]);
    return out;
}

ScalarField div_kappa_grad(const ScalarField& v, std::array<double, 3> kappa) {
    const MacGrid& g = v.grid();
    for (int a = 0; a < g.dim; ++a)
        if (kappa[a] < 0) throw SpecError("div_kappa_grad: kappa must be nonnegative");
    ScalarField out(g, v.loc());
    const int fa = face_axis(v.loc());
    out.for_nodes([&](int i, int j, int k) {
        int ijk[3] = {i, j, k};
        if (fa >= 0 && (ijk[fa] == 0 || ijk[fa] == v.nn(fa) - 1)) return; // wall nodes
        double s = 0.0;
        for (int a = 0; a < g.dim; ++a) {
            if (kappa[a] == 0.0) continue;
            int lo[3] = {i, j, k}, hi[3] = {i, j, k};
            --lo[a];
            ++hi[a];
            s += kappa[a] *
                 (v(hi[0], hi[1], hi[2]) - 2.0 * v(i, j, k) + v(lo[0], lo[1], lo[2])) /
                 (g.h[a] * g.h[a]);
        }
        out(i, j, k) = s;
    });
    return out;
}

namespace {

template <class VarpiAt>
ScalarField mixed_derivative_impl(int j_inner, int i_outer, const ScalarField& v,
                                  VarpiAt&& varpi_at) {
    const MacGrid& g = v.grid();
    if (j_inner == i_outer) throw SpecError("mixed_derivative: axes must differ");
    if (face_axis(v.loc()) != j_inner)
        throw SpecError("mixed_derivative: inner axis must be the field's face axis");
    ScalarField w(g, Loc::Cell);
    face_to_center_diff(v, j_inner, w);
    ScalarField out(g, face_loc(i_outer));
    const double ih = 1.0 / g.h[i_outer];
    int step[3] = {0, 0, 0};
    step[i_outer] = 1;
    out.for_nodes([&](int i, int j, int k) {
        int ijk[3] = {i, j, k};
        if (ijk[i_outer] == 0 || ijk[i_outer] == out.nn(i_outer) - 1) {
            out(i, j, k) = 0.0;
            return;
        }
        const double hi = varpi_at(i, j, k) * w(i, j, k);
        const double lo = varpi_at(i - step[0], j - step[1], k - step[2]) *
                          w(i - step[0], j - step[1], k - step[2]);
        out(i, j, k) = (hi - lo) * ih;
    });
    return out;
}

} // namespace

ScalarField mixed_derivative(int j_inner, int i_outer, const ScalarField& v, double varpi) {
    return mixed_derivative_impl(j_inner, i_outer, v, [varpi](int, int, int) { return varpi; });
}

ScalarField mixed_derivative(int j_inner, int i_outer, const ScalarField& v,
                             const ScalarField& varpi) {
    if (varpi.loc() != Loc::Cell) throw SpecError("mixed_derivative: varpi must be cell-centered");
    return mixed_derivative_impl(j_inner, i_outer, v,
                                 [&varpi](int i, int j, int k) { return varpi(i, j, k); });
}

VelocityField advect(const VelocityField& u) {
    const MacGrid& g = u.grid();
    VelocityField out(g);
    out.fill(0.0);
    for (int k = 0; k < g.dim; ++k) {
        const ScalarField& v = u[k];
        out[k].for_nodes([&](int i, int j, int kk) {
            int ijk[3] = {i, j, kk};
            if (ijk[k] == 0 || ijk[k] == v.nn(k) - 1) return;
            double s = 0.0;
            for (int m = 0; m < g.dim; ++m) {
                int lo[3] = {i, j, kk}, hi[3] = {i, j, kk};
                --lo[m];
                ++hi[m];
                const double dvdm =
                    (v(hi[0], hi[1], hi[2]) - v(lo[0], lo[1], lo[2])) / (2.0 * g.h[m]);
                double um;
                if (m == k) {
                    um = v(i, j, kk);
                } else {
                    // average the four m-faces around this k-face
                    const ScalarField& w = u[m];
                    int b[3] = {i, j, kk};
                    b[k] -= 1; // cell astride the face on the low side of axis k
                    um = 0.25 * (w(b[0], b[1], b[2]) +
                                 w(b[0] + (m == 0), b[1] + (m == 1), b[2] + (m == 2)) +
                                 w(b[0] + (k == 0), b[1] + (k == 1), b[2] + (k == 2)) +
                                 w(b[0] + (m == 0) + (k == 0), b[1] + (m == 1) + (k == 1),
                                   b[2] + (m == 2) + (k == 2)));
                }
                s += um * dvdm;
            }
            out[k](i, j, kk) = s;
        });
    }
    return out;
}

double dot(const ScalarField& a, const ScalarField& b) {
    double s = 0.0;
    a.for_nodes([&](int i, int j, int k) { s += a(i, j, k) * b(i, j, k); });
    return s * a.grid().cell_volume();
}

double dot(const VelocityField& a, const VelocityField& b) {
    double s = 0.0;
    for (int k = 0; k < a.dim(); ++k) s += dot(a[k], b[k]);
    return s;
}

double l2_norm(const ScalarField& f) { return std::sqrt(dot(f, f)); }

double l2_norm(const VelocityField& u) { return std::sqrt(dot(u, u)); }

double max_abs(const ScalarField& f) {
    double m = 0.0;
    f.for_nodes([&](int i, int j, int k) { m = std::max(m, std::abs(f(i, j, k))); });
    return m;
}

double max_abs(const VelocityField& u) {
    double m = 0.0;
    for (int k = 0; k < u.dim(); ++k) m = std::max(m, max_abs(u[k]));
    return m;
}

bool has_nan(const VelocityField& u) {
    for (int k = 0; k < u.dim(); ++k) {
        bool bad = false;
        u[k].for_nodes([&](int i, int j, int kk) {
            if (!std::isfinite(u[k](i, j, kk))) bad = true;
        });
        if (bad) return true;
    }
    return false;
}

double mean(const ScalarField& f) {
    double s = 0.0;
    long n = 0;
    f.for_nodes([&](int i, int j, int k) {
        s += f(i, j, k);
        ++n;
    });
    return s / static_cast<double>(n);
}

} // namespace acns
