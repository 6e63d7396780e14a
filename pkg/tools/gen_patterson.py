"""Generate the embedded Gauss-Patterson node/weight table.

Each level m+1 keeps the 2^m - 1 nodes of level m and adds 2^m new nodes:
the roots of the degree-2^m polynomial orthogonal to all lower-degree
polynomials under the (sign-changing) weight given by the node polynomial
of level m. Weights are interpolatory, normalized to the uniform
probability density on [-1, 1].

Usage: python tools/gen_patterson.py [out_path]
"""

import sys
from pathlib import Path

import mpmath as mp

DPS = 90
DIGITS = 32
MAX_LEVEL = 8


def legendre_all(n, x):
    """P_0..P_n at x (standard normalization P_k(1) = 1)."""
    vals = [mp.mpf(1), x]
    for k in range(1, n):
        vals.append(((2 * k + 1) * x * vals[k] - k * vals[k - 1]) / (k + 1))
    return vals[: n + 1]


def gauss_legendre(n):
    nodes, weights = [], []
    for i in range(1, n + 1):
        x = mp.cos(mp.pi * (i - mp.mpf(1) / 4) / (n + mp.mpf(1) / 2))
        for _ in range(100):
            p = legendre_all(n, x)
            dp = n * (x * p[n] - p[n - 1]) / (x * x - 1)
            dx = p[n] / dp
            x -= dx
            if abs(dx) < mp.mpf(10) ** (-DPS + 5):
                break
        p = legendre_all(n, x)
        dp = n * (x * p[n] - p[n - 1]) / (x * x - 1)
        nodes.append(x)
        weights.append(2 / ((1 - x * x) * dp * dp))
    return nodes, weights


def extend(old, quad_x, quad_w, leg):
    """New nodes extending ``old`` (sorted, symmetric, odd count)."""
    n_new = len(old) + 1
    pprev = []
    for x in quad_x:
        prod = mp.mpf(1)
        for y in old:
            prod *= x - y
        pprev.append(prod)
    # F = P_{n_new} + sum_{i even < n_new} b_i P_i; equations for odd k < n_new.
    evens = list(range(0, n_new, 2))
    odds = list(range(1, n_new, 2))
    A = mp.matrix(len(odds), len(evens))
    rhs = mp.matrix(len(odds), 1)
    for r, k in enumerate(odds):
        wk = [quad_w[q] * pprev[q] * leg[q][k] for q in range(len(quad_x))]
        for c, i in enumerate(evens):
            A[r, c] = mp.fsum(wk[q] * leg[q][i] for q in range(len(quad_x)))
        rhs[r] = -mp.fsum(wk[q] * leg[q][n_new] for q in range(len(quad_x)))
    b = mp.lu_solve(A, rhs)

    def F(x):
        p = legendre_all(n_new, x)
        return p[n_new] + mp.fsum(b[c] * p[i] for c, i in enumerate(evens))

    pos_old = [y for y in old if y > 0]
    edges = [mp.mpf(0)] + pos_old + [mp.mpf(1)]
    roots = []
    for lo, hi in zip(edges[:-1], edges[1:]):
        flo, fhi = F(lo), F(hi)
        if flo * fhi > 0:
            raise RuntimeError(f"no sign change on ({lo}, {hi})")
        roots.append(mp.findroot(F, (lo, hi), solver="anderson"))
    return sorted([-r for r in roots] + roots)


def interpolatory_weights(nodes):
    """Weights w with sum w_i P_k(x_i) = delta_k0 (probability normalization)."""
    n = len(nodes)
    half = [x for x in nodes if x >= 0]
    evens = list(range(0, n, 2))
    leg = [legendre_all(n, x) for x in half]
    M = mp.matrix(len(evens), len(half))
    for r, k in enumerate(evens):
        for c, x in enumerate(half):
            M[r, c] = leg[c][k] * (2 if x > 0 else 1)
    rhs = mp.matrix(len(evens), 1)
    rhs[0] = 1
    w_half = mp.lu_solve(M, rhs)
    lookup = {mp.nstr(x, DIGITS): w_half[c] for c, x in enumerate(half)}
    return [lookup[mp.nstr(abs(x), DIGITS)] for x in nodes]


def main(out):
    mp.mp.dps = DPS
    quad_x, quad_w = gauss_legendre(200)
    quad_w = [w / 2 for w in quad_w]
    leg = [legendre_all(2 ** MAX_LEVEL, x) for x in quad_x]
    nodes = [mp.mpf(0)]
    lines = ["# Gauss-Patterson rules on [-1, 1], weights normalized to sum 1",
             "# level <m> points <p>, followed by p lines 'point weight'"]
    for m in range(1, MAX_LEVEL + 1):
        if m > 1:
            nodes = sorted(nodes + extend(nodes, quad_x, quad_w, leg))
        weights = interpolatory_weights(nodes)
        # sanity: exactness on even monomials up to 3*2^(m-1) - 1
        top = 3 * 2 ** (m - 1) - 1 if m > 1 else 1
        for r in range(0, top + 1, 2):
            err = abs(mp.fsum(w * x ** r for x, w in zip(nodes, weights)) - mp.mpf(1) / (r + 1))
            assert err < mp.mpf(10) ** (-DIGITS + 2), (m, r, err)
        lines.append(f"level {m} points {len(nodes)}")
        for x, w in zip(nodes, weights):
            lines.append(f"{mp.nstr(x, DIGITS, min_fixed=-1, max_fixed=1)} {mp.nstr(w, DIGITS, min_fixed=-1, max_fixed=1)}")
        print(f"level {m}: {len(nodes)} points", file=sys.stderr)
    Path(out).write_text("\n".join(lines) + "\n")


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else "src/smolyak_pce/data/gauss_patterson.txt")
