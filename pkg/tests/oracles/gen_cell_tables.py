"""Regenerate the frozen reference cell tables used by test_riesz.py.

    python3 tests/oracles/gen_cell_tables.py > tests/oracles/cell_tables.json

Independent of the package: the angular integral is mpmath's hyp2f1 at a
working precision adapted to the distance from the diagonal, and the cell
integrals are nested tanh-sinh quadratures split at the diagonal.
"""
import json
import sys

import mpmath as mp

mp.mp.dps = 20
N_NODES, R_MIN, R_MAX = 1024, 1e-6, 50.0
Q = float(mp.exp(mp.log(mp.mpf(R_MAX) / R_MIN) / (N_NODES - 1)))


def angular(r, s, mu):
    w = ((r - s) / (r + s)) ** 2
    if w == 0:
        return mp.mpf(0)  # a single node on the diagonal, measure zero
    prec = max(30, int(-mp.log10(w)) + 25)
    with mp.workdps(prec):
        val = mp.re(mp.hyp2f1(mp.mpf(mu) / 2, mp.mpf(1) / 2, 1, 1 - w))
    return 2 * mp.pi * (r + s) ** (-mu) * val


def entry(q, k, mu, a, b):
    q = mp.mpf(q)
    sk = q**k

    def psi(x, j):
        return (q - x) / (q - 1) if j == 0 else (x - 1) / (q - 1)

    def f(r, s):
        return 2 * mp.pi * psi(r, a) * psi(s / sk, b) * r * s * angular(r, s, mu)

    if k == 0:
        lo = mp.quad(lambda r: mp.quad(lambda s: f(r, s), [1, r]), [1, q])
        hi = mp.quad(lambda r: mp.quad(lambda s: f(r, s), [r, q]), [1, q])
        return lo + hi
    return mp.quad(lambda r: mp.quad(lambda s: f(r, s), [sk, sk * q]), [1, q])


def main():
    out = {"q": Q, "n_nodes": N_NODES, "r_min": R_MIN, "r_max": R_MAX, "entries": []}
    for mu in (0.5, 1.0, 1.5):
        for k in (-1, 0, 1, 3):
            for a, b in ((0, 0), (0, 1), (1, 0), (1, 1)):
                val = entry(Q, k, mu, a, b)
                out["entries"].append({"mu": mu, "offset": k, "a": a, "b": b, "value": mp.nstr(val, 18)})
                print(mu, k, a, b, out["entries"][-1]["value"], file=sys.stderr, flush=True)
    json.dump(out, sys.stdout, indent=1)


if __name__ == "__main__":
    main()
