#!/usr/bin/env python3
"""Solve an SDPA .dat-s file (min b^T y s.t. sum y_k A_k - C psd) with an external conic solver."""
import argparse
import json
import sys
import time

import cvxpy as cp
import numpy as np
import scipy.sparse as sp


def read_sdpa(path):
    with open(path) as f:
        lines = [l for l in f if not l.lstrip().startswith(("*", '"'))]
    tok = " ".join(lines)
    for ch in ",{}()":
        tok = tok.replace(ch, " ")
    tok = tok.split()
    m, nb = int(tok[0]), int(tok[1])
    sizes = [int(t) for t in tok[2:2 + nb]]
    b = np.array([float(t) for t in tok[2 + nb:2 + nb + m]])
    rest = tok[2 + nb + m:]
    entries = [(int(rest[i]), int(rest[i + 1]) - 1, int(rest[i + 2]) - 1, int(rest[i + 3]) - 1, float(rest[i + 4]))
               for i in range(0, len(rest), 5)]
    return m, sizes, b, entries


def build(m, sizes, b, entries):
    y = cp.Variable(m)
    per_block = [[] for _ in sizes]
    for e in entries:
        per_block[e[1]].append(e)
    constraints = []
    for blk, size in enumerate(sizes):
        n = abs(size)
        c = np.zeros((n, n))
        rows, cols, vals = [], [], []
        for k, _, i, j, v in per_block[blk]:
            if k == 0:
                c[i, j] = c[j, i] = v
                continue
            if size < 0:
                rows.append(i), cols.append(k - 1), vals.append(v)
            else:
                rows.append(i * n + j), cols.append(k - 1), vals.append(v)
                if i != j:
                    rows.append(j * n + i), cols.append(k - 1), vals.append(v)
        if size < 0:
            a = sp.csr_matrix((vals, (rows, cols)), shape=(n, m))
            constraints.append(a @ y - np.diag(c) >= 0)
        else:
            a = sp.csr_matrix((vals, (rows, cols)), shape=(n * n, m))
            s = cp.reshape(a @ y, (n, n), order="C") - c
            constraints.append(0.5 * (s + s.T) >> 0)
    return cp.Problem(cp.Minimize(b @ y), constraints)


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("file")
    ap.add_argument("--solver", default="SCS")
    ap.add_argument("--eps", type=float, default=1e-7)
    args = ap.parse_args()
    t0 = time.time()
    prob = build(*read_sdpa(args.file))
    opts = {"eps": args.eps, "max_iters": 200000} if args.solver == "SCS" else {}
    try:
        prob.solve(solver=args.solver, verbose=False, **opts)
        out = {"status": prob.status, "value": prob.value}
    except cp.error.SolverError as e:
        out = {"status": "error", "value": None, "message": str(e)}
    out["solver"] = args.solver
    out["seconds"] = time.time() - t0
    print(json.dumps(out))
    return 0 if out["status"] in ("optimal", "optimal_inaccurate") else 2


if __name__ == "__main__":
    sys.exit(main())
