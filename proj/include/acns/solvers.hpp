#pragma once

#include "acns/grid.hpp"
#include "acns/tridiag.hpp"

namespace acns {

struct SolveStats {
    int iterations = 0;
    double final_residual = 0.0;
    bool converged = true;
};

/// Iterative solver failed to reach tolerance within the iteration cap.
struct SolveError : std::runtime_error {
    SolveStats stats;
    SolveError(const std::string& msg, SolveStats s) : std::runtime_error(msg), stats(s) {}
};

/// Iteration cap: factor * ndofs^(1/dim).
int solver_iteration_cap(const MacGrid& g, long ndofs, int factor = 10);

/// Cumulative CG counters (diagnostics).
namespace diag {
extern long cg_total_iterations;
extern long cg_total_solves;
} // namespace diag

/// Scalar Helmholtz problem  alpha*v - dt*div(kappa grad v) = rhs  with
/// Dirichlet data `bc` at time t, preconditioned CG (diagonal preconditioner).
/// `out` supplies the initial guess and receives the solution (ghosts refreshed).
/// Residual criterion: ||r||_L2 <= tol * ||rhs||_L2.
SolveStats helmholtz_solve(double alpha, double dt, std::array<double, 3> kappa,
                           const ScalarField& rhs, const BoundaryFn& bc, double t,
                           double tol, ScalarField& out, int max_iters = 0);

/// One direction-splitting factor (alpha*I + coeff*(-d2/dk2)) w = rhs, solved
/// exactly by independent Thomas sweeps along every grid line in direction k.
/// `bc` is the Dirichlet trace of the unknown w.
ScalarField factored_solve_line_sweep(int axis, double alpha, double coeff,
                                      const ScalarField& rhs, const BoundaryFn& bc,
                                      double t);

/// Coupled system  alpha*u - nu_dt*Lap(u) - w_dt*grad(div u) = rhs  over all
/// velocity components (SPD on homogeneous-Dirichlet fields), solved by CG.
SolveStats coupled_graddiv_solve(double alpha, double nu_dt, double w_dt,
                                 const VelocityField& rhs, const VelocityBC& bc, double t,
                                 double tol, VelocityField& out, int max_iters = 0);

/// Homogeneous-Dirichlet stencil alpha*v + sum_a ca[a]*(-d2/da2) used by the CG
/// solvers and by tests probing operator symmetry. Wall nodes are zeroed,
/// tangential walls use mirror reflection.
struct ScalarStencil {
    const MacGrid* g;
    Loc loc;
    double alpha;
    std::array<double, 3> ch2; // ca[a] / h[a]^2
    ScalarStencil(const MacGrid& grid, Loc l, double a, std::array<double, 3> ca);
    void apply(const ScalarField& v, ScalarField& out) const;
    void diagonal(ScalarField& d) const;
};

} // namespace acns
