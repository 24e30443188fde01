"""Smoke tests for the _acns python module (run via ctest with PYTHONPATH set)."""

import math
import sys

import numpy as np

import _acns as acns


def check(cond, msg):
    if not cond:
        print("FAIL:", msg)
        sys.exit(1)
    print("ok:", msg)


def main():
    g = acns.MacGrid(2, 16)
    check(g.dim == 2 and g.n == [16, 16], "grid construction")
    check(abs(g.h[0] - 1.0 / 16) < 1e-15, "grid spacing")

    case = acns.AnalyticCase.by_id("mms2d")
    u = acns.VelocityField(g)
    p = acns.ScalarField(g, acns.Loc.Cell)
    acns.sample_velocity(case, 0.0, u)
    acns.sample_pressure(case, 0.0, p)

    d = acns.divergence(u)
    arr = d.to_numpy()
    check(arr.shape == (16, 16), "divergence array shape")
    check(np.abs(arr).max() < 1e-2, "sampled exact field is nearly divergence-free")

    e = acns.evaluate_errors(u, p, case, 0.0)
    check(e.err_u < 1e-13 and e.err_p < 1e-13, "exact samples have zero error")

    lhs, rhs = acns.lemma_identity(1.0, -2.0, 0.5, 3.0, -1.0)
    check(abs(lhs - rhs) < 1e-12, "algebraic identity")

    # numpy round trip
    f = acns.ScalarField(g, acns.Loc.FaceX)
    a = np.arange(17 * 16, dtype=float).reshape(17, 16)
    f.from_numpy(a)
    check(np.array_equal(f.to_numpy(), a), "numpy round trip")

    rows = acns.convergence_study(
        scheme="gs2d", dim=2, nx=8, dts=[0.2, 0.1], t_final=0.4, nu=1.0,
        reference="fine", zero_walltime=True,
    )
    check(len(rows) == 2 and rows[1]["err_u"] < rows[0]["err_u"],
          "convergence study runs and errors shrink")

    trace = acns.stability_trace(
        scheme="gs2d", dim=2, nx=8, dts=[0.5], t_final=1.0, seed=3,
    )
    check(trace["monotone"], "gs2d energy trace is monotone")

    print("all python smoke tests passed")


if __name__ == "__main__":
    main()
