#!/usr/bin/env python3
"""Solve an SDPA .dat-s file with SCS and write a CSDP-layout solution.

The problem is  min c'y  s.t.  sum_i y_i F_i - F_0 >= 0.  A trailing diagonal
block announced by a "* equality-block N" header holds equalities as +/- pairs;
its odd positions become a zero cone. The output has y on the first line and
the dual matrices as "2 block i j value" lines, readable by `aes check-cert`.
"""

import argparse
import math
import sys
import time

import numpy as np
import scipy.sparse as sp
import scs


def read_sdpa(path):
    eq_block = None
    lines = []
    with open(path) as f:
        for raw in f:
            s = raw.strip()
            if s.startswith("*") or s.startswith('"'):
                tok = s.lstrip('*" ').split()
                if len(tok) == 2 and tok[0] == "equality-block":
                    eq_block = int(tok[1])
                continue
            if s:
                lines.append(s)
    clean = lambda s: s.replace(",", " ").replace("{", " ").replace("}", " ").replace("(", " ").replace(")", " ")
    nvars = int(clean(lines[0]).split()[0])
    nblocks = int(clean(lines[1]).split()[0])
    sizes = [int(t) for t in clean(lines[2]).split()[:nblocks]]
    c = []
    k = 3
    while len(c) < nvars:
        c.extend(float(t) for t in clean(lines[k]).split())
        k += 1
    entries = np.array([[float(t) for t in clean(l).split()[:5]] for l in lines[k:]])
    return nvars, sizes, np.array(c[:nvars]), entries, eq_block


def build(nvars, sizes, entries, eq_block):
    # Row layout: zero cone, nonnegative cone, PSD cones (lower triangle, column-major, sqrt2 off-diagonal).
    zero_rows, lin_rows, psd_offsets = {}, {}, {}
    nz = nl = 0
    for b, n in enumerate(sizes, start=1):
        if n < 0:
            for p in range(1, -n + 1):
                if b == eq_block:
                    if p % 2 == 1:
                        zero_rows[(b, p)] = nz
                        nz += 1
                else:
                    lin_rows[(b, p)] = nl
                    nl += 1
    npsd = 0
    psd_sizes = []
    for b, n in enumerate(sizes, start=1):
        if n > 0:
            psd_offsets[b] = npsd
            psd_sizes.append(n)
            npsd += n * (n + 1) // 2
    m = nz + nl + npsd

    def row(b, i, j):
        n = sizes[b - 1]
        if n < 0:
            if b == eq_block:
                return zero_rows.get((b, i)), 1.0
            return nz + lin_rows[(b, i)], 1.0
        i, j = max(i, j) - 1, min(i, j) - 1  # lower triangle (i >= j), zero-based
        col_start = j * n - j * (j - 1) // 2
        return nz + nl + psd_offsets[b] + col_start + (i - j), (1.0 if i == j else math.sqrt(2.0))

    rows, cols, vals = [], [], []
    bvec = np.zeros(m)
    for mat, blk, i, j, v in entries:
        r, scale = row(int(blk), int(i), int(j))
        if r is None:
            continue
        if int(mat) == 0:
            bvec[r] -= scale * v
        else:
            rows.append(r)
            cols.append(int(mat) - 1)
            vals.append(-scale * v)
    a = sp.csc_matrix((vals, (rows, cols)), shape=(m, nvars))
    cone = {"z": nz, "l": nl, "s": psd_sizes}
    return a, bvec, cone, psd_offsets, nz + nl


def unpack(vec, n):
    x = np.zeros((n, n))
    k = 0
    for j in range(n):
        for i in range(j, n):
            x[i, j] = vec[k] if i == j else vec[k] / math.sqrt(2.0)
            x[j, i] = x[i, j]
            k += 1
    return x


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("problem")
    ap.add_argument("--out", required=True)
    ap.add_argument("--eps", type=float, default=1e-7)
    ap.add_argument("--max-iters", type=int, default=200000)
    ap.add_argument("--time-limit", type=float, default=0.0, help="seconds, 0 for none")
    args = ap.parse_args()

    t0 = time.time()
    nvars, sizes, c, entries, eq_block = read_sdpa(args.problem)
    a, b, cone, psd_offsets, psd_start = build(nvars, sizes, entries, eq_block)
    print(f"read {nvars} variables, {a.shape[0]} rows, {a.nnz} nonzeros in {time.time() - t0:.1f}s", file=sys.stderr)
    settings = dict(eps_abs=args.eps, eps_rel=args.eps, max_iters=args.max_iters, verbose=True)
    if args.time_limit > 0:
        settings["time_limit_secs"] = args.time_limit
    solver = scs.SCS({"A": a, "b": b, "c": c}, cone, **settings)
    sol = solver.solve()
    info = sol["info"]
    print(f"status {info['status']} primal {info['pobj']:.12g} dual {info['dobj']:.12g}", file=sys.stderr)

    with open(args.out, "w") as f:
        f.write(" ".join(repr(float(v)) for v in sol["x"]) + "\n")
        for b_idx, n in enumerate(sizes, start=1):
            if n > 0:
                off = psd_start + psd_offsets[b_idx]
                x = unpack(sol["y"][off : off + n * (n + 1) // 2], n)
            elif b_idx != eq_block:
                x = np.diag([sol["y"][cone["z"] + _lin_index(sizes, eq_block, b_idx, p)] for p in range(-n)])
            else:
                continue
            ii, jj = np.nonzero(np.triu(x))
            for i, j in zip(ii, jj):
                f.write(f"2 {b_idx} {i + 1} {j + 1} {float(x[i, j])!r}\n")
    return 0 if info["status"] in ("solved", "solved_inaccurate") else 1


def _lin_index(sizes, eq_block, block, p):
    k = 0
    for b, n in enumerate(sizes, start=1):
        if n < 0 and b != eq_block:
            if b == block:
                return k + p
            k += -n
    raise KeyError(block)


if __name__ == "__main__":
    sys.exit(main())
