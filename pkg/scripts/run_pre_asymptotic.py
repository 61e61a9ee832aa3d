#!/usr/bin/env python3
"""Run the pre-asymptotic mixing study (d=200, n=800, 20 trials per model).

Writes per-coordinate and log-posterior ESS tables plus the raw chains under
out/pre_asymptotic_<model>_seed<seed>/. Expect roughly 10-15 minutes per
model at the default settings.
"""

import argparse

from orthant_gibbs.experiments import master_seed, preset_config, run_ess_study


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--models", nargs="+",
                        default=["logistic", "poisson", "gmm"],
                        choices=["logistic", "poisson", "gmm"])
    parser.add_argument("--n-trials", type=int, default=20)
    parser.add_argument("--jobs", type=int, default=1)
    parser.add_argument("--seed", type=int)
    parser.add_argument("--out", default="out")
    args = parser.parse_args()
    seed = master_seed(args.seed)
    for model in args.models:
        config = preset_config("pre_asymptotic", model, out_dir=args.out,
                               seed=seed, n_trials=args.n_trials, jobs=args.jobs)
        out = run_ess_study(config)
        print(f"{model}: wrote {out}")


if __name__ == "__main__":
    main()
