"""Run every property suite and write one JSON report per suite."""
import argparse
from pathlib import Path

from symspace.verify import SUITES, run_suite


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--trials", type=int, default=None)
    ap.add_argument("--out-dir", type=Path, default=Path("reports"))
    args = ap.parse_args()
    args.out_dir.mkdir(parents=True, exist_ok=True)
    failed = 0
    for suite in SUITES:
        rep = run_suite(suite, seed=args.seed, trials=args.trials)
        (args.out_dir / f"{suite}.json").write_text(rep.to_json() + "\n")
        n_bad = sum(not c.passed for c in rep.checks)
        failed += n_bad
        print(f"{suite:<10} {len(rep.checks) - n_bad}/{len(rep.checks)} passed  {rep.elapsed_ms} ms")
    raise SystemExit(1 if failed else 0)


if __name__ == "__main__":
    main()
