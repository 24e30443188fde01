#pragma once

#include "acns/grid.hpp"

namespace acns {

// Discrete MAC operators. All differencing is second-order central on the
// staggered layout; divergence/gradient form an exact adjoint pair for
// homogeneous-Dirichlet velocity fields (summation by parts).

/// Fill ghost layer (and on-wall face nodes) from a Dirichlet trace.
/// Face nodes lying on the boundary get the exact trace value; tangential and
/// cell-centered ghosts use mirror extrapolation ghost = 2*trace - interior.
/// An empty trace means homogeneous data.
void apply_dirichlet(ScalarField& f, const BoundaryFn& trace, double t);
void apply_dirichlet(VelocityField& u, const VelocityBC& bc, double t);

/// Zero-gradient ghost fill for cell-centered pressure (pressure carries no
/// physical boundary condition in the artificial-compressibility schemes).
void fill_pressure_ghosts(ScalarField& p);

/// d/dk of a face-k field, landing at cell centers (exact pairing of the MAC div).
void face_to_center_diff(const ScalarField& v, int k, ScalarField& out);

/// d/dk of a cell-centered field, landing on faces normal to k.
/// Interior faces use interior values only; boundary faces use the ghost layer.
void center_to_face_diff(const ScalarField& q, int k, ScalarField& out);

ScalarField divergence(const VelocityField& u);
VelocityField gradient(const ScalarField& p);

/// sum_k kappa[k] * d2/dk2 at interior nodes (wall face nodes left at 0).
ScalarField div_kappa_grad(const ScalarField& v, std::array<double, 3> kappa);

/// d/di ( varpi * d/dj v ) for a face-j field v, landing on faces normal to i.
/// The inner derivative lands at cell centers, where varpi lives.
ScalarField mixed_derivative(int j_inner, int i_outer, const ScalarField& v, double varpi);
ScalarField mixed_derivative(int j_inner, int i_outer, const ScalarField& v,
                             const ScalarField& varpi);

/// Central-difference advection (u . grad) u at interior faces.
VelocityField advect(const VelocityField& u);

/// Discrete L2 norm: sqrt(sum f^2 * prod(h)) over non-ghost nodes.
double l2_norm(const ScalarField& f);
double l2_norm(const VelocityField& u);
double max_abs(const ScalarField& f);
double max_abs(const VelocityField& u);
bool has_nan(const VelocityField& u);

/// Volume-weighted inner product over non-ghost nodes.
double dot(const ScalarField& a, const ScalarField& b);
double dot(const VelocityField& a, const VelocityField& b);

double mean(const ScalarField& f);

} // namespace acns
