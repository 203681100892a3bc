"""Schedule and communication ablations on one ER MIS instance.

Writes one CSV per axis (schedule length, initial gamma, communication
strength) with a row per (value, seed), via the same code path as
``pqqa sweep``.

    python scripts/ablation.py --n 300 --p 0.05 --out results/
"""

import argparse
import os

from pqqa.cli import SolveConfig, sweep_command

AXES = {
    "steps": [500, 1000, 2000, 3000, 5000],
    "gamma0": [-4.0, -2.0, -1.0, -0.5, 0.1],
    "comm_strength": [0.0, 0.1, 0.2, 0.3, 0.4, 0.5],
}


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=300)
    ap.add_argument("--p", type=float, default=0.05)
    ap.add_argument("--runs", type=int, default=100)
    ap.add_argument("--seeds", type=int, default=5)
    ap.add_argument("--workers", type=int, default=1)
    ap.add_argument("--axis", choices=sorted(AXES), action="append")
    ap.add_argument("--out", default="results")
    args = ap.parse_args()
    os.makedirs(args.out, exist_ok=True)
    for axis in args.axis or AXES:
        path = os.path.join(args.out, f"ablation_{axis}.csv")
        cfg = SolveConfig(problem="mis", gen=f"er:n={args.n},p={args.p}", runs=args.runs, output=path)
        rows = sweep_command(cfg, axis, AXES[axis], tuple(range(args.seeds)), args.workers)
        for v in AXES[axis]:
            sub = [r for r in rows if r["value"] == v]
            mean = sum(r["best_objective"] for r in sub) / len(sub)
            steps = [r["steps_to_99"] for r in sub if r["steps_to_99"] is not None]
            print(f"{axis}={v:<6} mean IS {mean:6.2f}  steps to 99% {sum(steps) / max(len(steps), 1):7.1f}")
        print(f"wrote {path}")


if __name__ == "__main__":
    main()
