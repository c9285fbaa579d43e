"""Print |d(x, ray(t)) - t - B(x)| against t for the ball, Log-Euclidean and GI spaces.

The ball error falls exponentially; the SPD errors fall like 1/t.
"""
import argparse

import numpy as np

from symspace import gi, poincare, spd_pem
from symspace.oracles import busemann_limit_oracle
from symspace.verify import rand_ball, rand_chamber_unit, rand_orthogonal, rand_spd, rand_sym, rand_unit


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--dim", type=int, default=3)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    rng = np.random.default_rng(args.seed)
    m = args.dim

    xi, xb = rand_unit(rng, m), rand_ball(rng, m)
    a_sym = rand_sym(rng, m)
    a_sym /= np.linalg.norm(a_sym)
    k, a = rand_orthogonal(rng, m), rand_chamber_unit(rng, m)
    x = rand_spd(rng, m)

    closed = {
        "ball": float(poincare.busemann_ball(xi, xb)),
        "le": spd_pem.busemann_pem(spd_pem.LOG_EUCLIDEAN, a_sym, x),
        "gi": gi.busemann_gi(k, a, x),
    }
    print(f"{'t':>10}{'ball':>14}{'le':>14}{'gi':>14}")
    for t in [1, 2, 5, 10, 20, 40, 100, 1e3, 1e4, 1e5, 1e6]:
        err_ball = abs(busemann_limit_oracle("ball", xi, xb, t) - closed["ball"])
        err_le = abs(busemann_limit_oracle("pem", (spd_pem.LOG_EUCLIDEAN, a_sym), x, t) - closed["le"])
        err_gi = abs(busemann_limit_oracle("gi", (k, a), x, t) - closed["gi"])
        print(f"{t:>10g}{err_ball:>14.3e}{err_le:>14.3e}{err_gi:>14.3e}")


if __name__ == "__main__":
    main()
