#!/usr/bin/env python3
"""Run the asymptotic coverage study (d=10, n=1000, 20 trials per model).

Writes per-coordinate 95% coverage tables plus the raw chains under
out/asymptotic_<model>_seed<seed>/.
"""

import argparse

from orthant_gibbs.experiments import master_seed, preset_config, run_coverage_study


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--models", nargs="+",
                        default=["logistic", "poisson"],
                        choices=["logistic", "poisson", "gmm"])
    parser.add_argument("--n-trials", type=int, default=20)
    parser.add_argument("--level", type=float, default=0.95)
    parser.add_argument("--jobs", type=int, default=1)
    parser.add_argument("--seed", type=int)
    parser.add_argument("--out", default="out")
    args = parser.parse_args()
    seed = master_seed(args.seed)
    for model in args.models:
        config = preset_config("asymptotic", model, out_dir=args.out,
                               seed=seed, n_trials=args.n_trials, jobs=args.jobs)
        out = run_coverage_study(config, level=args.level)
        print(f"{model}: wrote {out}")


if __name__ == "__main__":
    main()
