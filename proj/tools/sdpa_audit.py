#!/usr/bin/env python3
"""Solve an SDPA sparse file with cvxpy and compare against a reported optimum.

    sdpa_audit.py FILE.dat-s (--expect VALUE | --report report.json --k K) [--tol 1e-6]

Exits 0 on agreement, 1 on disagreement, 2 when cvxpy is unavailable.
"""
import argparse
import json
import sys

import numpy as np


def read_sdpa(path):
    lines = [ln.strip() for ln in open(path) if ln.strip() and ln.lstrip()[0] not in '"*']
    m = int(lines[0].split()[0])
    nblock = int(lines[1].split()[0])
    sizes = [abs(int(s)) for s in lines[2].replace(",", " ").replace("{", " ").replace("}", " ").split()[:nblock]]
    c = np.array([float(v) for v in lines[3].replace(",", " ").split()[:m]])
    F = [[np.zeros((s, s)) for s in sizes] for _ in range(m + 1)]
    for ln in lines[4:]:
        mat, blk, i, j, v = ln.split()[:5]
        mat, blk, i, j, v = int(mat), int(blk) - 1, int(i) - 1, int(j) - 1, float(v)
        F[mat][blk][i, j] = v
        F[mat][blk][j, i] = v
    return c, F, sizes


def solve(c, F, sizes):
    import cvxpy as cp

    x = cp.Variable(len(c))
    cons = []
    for b, s in enumerate(sizes):
        expr = -F[0][b]
        for i in range(len(c)):
            if np.any(F[i + 1][b]):
                expr = expr + x[i] * F[i + 1][b]
        sym = cp.Variable((s, s), PSD=True)
        cons.append(sym == expr)
    prob = cp.Problem(cp.Minimize(c @ x), cons)
    for solver in ("CLARABEL", "SCS"):
        if solver in cp.installed_solvers():
            prob.solve(solver=solver)
            break
    else:
        prob.solve()
    return prob.status, prob.value


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("sdpa")
    ap.add_argument("--expect", type=float)
    ap.add_argument("--report")
    ap.add_argument("--k", type=int)
    ap.add_argument("--tol", type=float, default=1e-6)
    a = ap.parse_args()
    try:
        import cvxpy  # noqa: F401
    except ImportError:
        print("cvxpy not available")
        return 2
    if a.expect is None:
        orders = json.load(open(a.report))["orders"]
        a.expect = next(o["theta_mom"] for o in orders if o["k"] == a.k)
    status, value = solve(*read_sdpa(a.sdpa))
    ok = value is not None and abs(value - a.expect) <= a.tol
    print(f"reference solver: {status} {value!r}; expected {a.expect!r}; {'agree' if ok else 'DISAGREE'}")
    return 0 if ok else 1


if __name__ == "__main__":
    sys.exit(main())
