"""Step budgets: single-run QQA against single-site SA on an ER MIS instance.

For each seed, SA runs for ``--sa-steps`` and QQA (S=1) for ``--qqa-steps``;
the script reports the QQA step at which the SA result was first matched by
a feasible solution.
"""

import argparse
import time

from pqqa.annealer import default_schedule, run
from pqqa.baseline import SAConfig, sa_solve
from pqqa.graphio import gen_er
from pqqa.problems import EnergyModel


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=300)
    ap.add_argument("--p", type=float, default=0.05)
    ap.add_argument("--graph-seed", type=int, default=0)
    ap.add_argument("--seeds", type=int, default=5)
    ap.add_argument("--sa-steps", type=int, default=10**6)
    ap.add_argument("--qqa-steps", type=int, default=10**4)
    args = ap.parse_args()
    model = EnergyModel("mis", gen_er(args.n, args.p, args.graph_seed))
    print("seed,sa_size,sa_seconds,qqa_size,qqa_seconds,qqa_steps_to_match,step_ratio")
    for seed in range(args.seeds):
        t0 = time.perf_counter()
        sa = sa_solve(model, SAConfig(steps=args.sa_steps, seed=seed))
        t_sa = time.perf_counter() - t0
        rep = run(model, 1, default_schedule("mis", total_steps=args.qqa_steps), seed=seed)
        hit = rep.steps_to_objective(sa.objective)
        ratio = "" if not hit else f"{args.sa_steps / hit:.0f}"
        print(f"{seed},{sa.objective:.0f},{t_sa:.2f},{rep.best_objective:.0f},{rep.wall_time:.2f},{hit if hit is not None else ''},{ratio}")


if __name__ == "__main__":
    main()
