"""Smoke test for the bpsvortex extension module.

Build and install first, e.g. `maturin develop -m crates/python/Cargo.toml`,
or put the built shared library on PYTHONPATH as `bpsvortex.so`.
"""

import json
import math

import bpsvortex as bv


def main():
    grid = bv.Grid(10.0, 129)
    assert grid.points == 129 and abs(grid.spacing - 20.0 / 128) < 1e-15

    assert abs(bv.condition_threshold() - math.sqrt(2 / math.pi)) < 1e-15
    margin = json.loads(bv.condition_margin(bv.Sigma.gaussian(1.0, 0.5), grid))
    assert abs(margin["norm2"] - 0.5 * math.sqrt(math.pi / 2)) < 1e-6
    assert margin["satisfied"]
    violated = json.loads(bv.condition_margin(bv.Sigma.gaussian(1.0, 1.0), grid))
    assert not violated["satisfied"]

    vacuum = bv.Problem(grid, bv.Sigma.gaussian(0.5, 0.05))
    sol = vacuum.solve()
    assert sol.converged
    assert abs(sol.flux) < 1e-3
    assert len(sol.u()) == 129 * 129
    assert max(abs(r) for r in vacuum.residual(sol.u())) < 1e-9

    sigma = bv.Sigma.zero()
    one = bv.Vortices(1)
    problem = bv.Problem(grid, sigma, one)
    sol = problem.solve(solver=json.dumps({"residual_tol": 1e-10}))
    assert sol.converged
    assert abs(sol.flux - 4 * math.pi) < 0.01 * 4 * math.pi
    physical = json.loads(sol.to_physical(1.0, 1.0))
    assert abs(physical["energy"] - sol.flux / 2) < 1e-12

    radial = bv.solve_radial(1, sigma, 12.0, 4001)
    assert radial.converged
    assert abs(radial.flux - 4 * math.pi) < 2e-3 * 4 * math.pi
    cmp = json.loads(radial.compare(sol, problem, sigma, one))
    assert cmp["sup_diff"] < 1e-2

    try:
        bv.Problem(grid, None, bv.Vortices(1, lam=2.0))
    except ValueError as e:
        assert "lambda > 4n" in str(e)
    else:
        raise AssertionError("lambda <= 4n accepted")

    print("flux n=1: %.6f (4 pi = %.6f)" % (sol.flux, 4 * math.pi))
    print("radial vs planar sup diff: %.2e" % cmp["sup_diff"])
    print("smoke test passed")


if __name__ == "__main__":
    main()
