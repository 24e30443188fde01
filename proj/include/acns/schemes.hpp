#pragma once

#include "acns/grid.hpp"
#include "acns/manufactured.hpp"
#include "acns/solvers.hpp"

#include <memory>
#include <string>

namespace acns {

enum class SchemeId {
    ac1,             // first-order artificial compressibility, coupled grad-div
    gs2d,            // 2D Gauss-Seidel grad-div splitting
    jacobi2d,        // 2D Jacobi splitting (unit own-direction weight)
    jacobi_nd,       // d-dimensional Jacobi splitting (own-direction weight d)
    gs3d,            // 3D Gauss-Seidel splitting
    gs3d_modified,   // 3D Gauss-Seidel with stabilizing perturbation
    dirsplit1,       // factored direction splitting (Crank-Nicolson based), 2D
    bdf2_bootstrap,  // second-order BDF2 bootstrap on the Gauss-Seidel splitting
    dirsplit_defect2,// second-order defect correction of dirsplit1, 2D
    defect2_coupled, // stages 0-1 of the coupled defect cascade (2nd order)
    defect2_split,   // stages 0-1 of the split defect cascade (2nd order)
    defect3_coupled, // full 3-stage coupled cascade (3rd order)
    defect3_split    // full 3-stage split cascade (3rd order)
};

SchemeId scheme_from_string(const std::string& s);
std::string scheme_to_string(SchemeId id);

/// Steps the composite output lags behind the newest cascade stage.
int composite_lag(SchemeId id);

struct SchemeConfig {
    SchemeId scheme = SchemeId::gs2d;
    int dim = 2;
    double dt = 0.1;
    double nu = 1.0;      // viscosity (coercivity constant of A)
    double lambda = 0.0;  // grad-div part of the continuous operator
    double chi = 1.0;     // artificial-compressibility parameter, eps = dt/chi
    bool nonlinear = false;
    double solver_tol = 1e-10;
    int solver_cap_factor = 10;
    bool split_c_correction = true; // mixed-derivative correction feeding stage k+1

    double varpi() const { return lambda + chi; }
    /// Coefficient of the pressure update; the coupled schemes recover pressure
    /// through chi, the split schemes through varpi.
    double pressure_coef() const;
    void validate() const;
};

/// Body force; empty means zero.
struct Forcing {
    std::function<double(int k, double x, double y, double z, double t)> f;
    explicit operator bool() const { return static_cast<bool>(f); }
    double operator()(int k, double x, double y, double z, double t) const {
        return f ? f(k, x, y, z, t) : 0.0;
    }
};

struct DivergenceError : std::runtime_error {
    int step;
    explicit DivergenceError(int s)
        : std::runtime_error("solution diverged (NaN) at step " + std::to_string(s)),
          step(s) {}
};

/// One defect-correction stage with the history its formulas reference.
struct DefectStage {
    VelocityField u, u_prev, u_prev2;
    ScalarField p, p_prev, p_prev2;
    VelocityField du, du_prev, d2u, d2u_prev, d3u;
    ScalarField dp, dp_prev;
    VelocityField nl, nl_prev;
    explicit DefectStage(const MacGrid& g)
        : u(g), u_prev(g), u_prev2(g), p(g, Loc::Cell), p_prev(g, Loc::Cell),
          p_prev2(g, Loc::Cell), du(g), du_prev(g), d2u(g), d2u_prev(g), d3u(g),
          dp(g, Loc::Cell), dp_prev(g, Loc::Cell), nl(g), nl_prev(g) {}
};

struct DefectCascade {
    std::vector<DefectStage> s;
    int nstages;
    DefectCascade(const MacGrid& g, int nstages_) : nstages(nstages_) {
        for (int i = 0; i < 3; ++i) s.emplace_back(g);
    }
};

/// Stage-1 fields of the two-stage bootstrap schemes.
struct TildePair {
    VelocityField u, u_prev;
    ScalarField p, p_prev;
    explicit TildePair(const MacGrid& g)
        : u(g), u_prev(g), p(g, Loc::Cell), p_prev(g, Loc::Cell) {}
};

struct SimState {
    MacGrid grid;
    VelocityField u_now, u_prev;
    ScalarField p_now, p_prev; // half-step schemes keep p^{n-1/2} here
    int step = 0;
    double t0 = 0.0;
    std::unique_ptr<TildePair> tilde;
    std::unique_ptr<DefectCascade> cascade;

    explicit SimState(const MacGrid& g)
        : grid(g), u_now(g), u_prev(g), p_now(g, Loc::Cell), p_prev(g, Loc::Cell) {}

    double time(double dt) const { return t0 + step * dt; }
};

SimState make_state(const MacGrid& g, const SchemeConfig& cfg);

/// Seed all history levels from the exact solution at the times the scheme
/// references; correction stages start from zero.
void init_manufactured(SimState& s, const AnalyticCase& c, const SchemeConfig& cfg,
                       double t0 = 0.0);

/// Discretely divergence-free random data (stream function / vector potential),
/// zero pressure. Used by the f = 0 stability runs.
void init_solenoidal(SimState& s, uint64_t seed);

/// Advance one step (one cascade iteration for the defect schemes).
void step(SimState& s, const SchemeConfig& cfg, const Forcing& f, const VelocityBC& bc);

/// Time the composite output (u_now, p_now) refers to, given `step` calls done.
double output_time(const SimState& s, const SchemeConfig& cfg);

struct EnergyBreakdown {
    double kinetic = 0.0;
    double pressure = 0.0;
    std::array<double, 3> directional{0.0, 0.0, 0.0};
    double seminorm = 0.0;
    bool heuristic = false;
    double total() const {
        return kinetic + pressure + directional[0] + directional[1] + directional[2] +
               seminorm;
    }
};

/// The proved stability functional of the scheme; schemes without one
/// functional report the generic one flagged `heuristic`.
EnergyBreakdown energy(const SimState& s, const SchemeConfig& cfg);

/// Max-abs residual of the scheme's algebraic pressure update, recomputed from
/// stored history. Zero up to roundoff after every step.
double pressure_law_residual(const SimState& s, const SchemeConfig& cfg);

/// Both sides of the five-number algebraic identity used by the 3D stability proof.
std::pair<double, double> lemma_identity(double a1, double b1, double c1, double b0,
                                         double c0);

} // namespace acns
