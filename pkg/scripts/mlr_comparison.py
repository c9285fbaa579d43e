"""Train the g, h and b MLR heads over several seeds and tabulate accuracy."""
import argparse
import time

import numpy as np

from symspace.data import gen_synthetic
from symspace.training import TrainConfig, train_mlr


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--seeds", type=int, default=5)
    ap.add_argument("--dim", type=int, default=2)
    ap.add_argument("--classes", type=int, default=3)
    ap.add_argument("--samples", type=int, default=300)
    ap.add_argument("--sigma", type=float, default=0.1)
    ap.add_argument("--epochs", type=int, default=200)
    ap.add_argument("--lr", type=float, default=0.05)
    args = ap.parse_args()

    print(f"{'head':<6}{'mean_acc':>10}{'min_acc':>10}{'mean_loss':>11}{'sec/run':>9}")
    for kind in "ghb":
        accs, losses, secs = [], [], []
        for seed in range(args.seeds):
            ds = gen_synthetic(args.dim, args.classes, args.samples, args.sigma, seed)
            t0 = time.perf_counter()
            res = train_mlr(ds.x, ds.y, kind, TrainConfig(lr=args.lr, epochs=args.epochs, seed=seed))
            secs.append(time.perf_counter() - t0)
            accs.append(res.final_accuracy)
            losses.append(res.final_loss)
        print(f"{kind:<6}{np.mean(accs):>10.4f}{np.min(accs):>10.4f}{np.mean(losses):>11.4f}{np.mean(secs):>9.2f}")


if __name__ == "__main__":
    main()
