import argparse
import os
from dataclasses import replace
from pathlib import Path

from designlift.experiments import emit_quantiles, emit_report, load_config, run_experiment

CONFIGS = Path(__file__).resolve().parent.parent / "configs"


def run(default_config, default_out, summarize):
    ap = argparse.ArgumentParser()
    ap.add_argument("--config", default=str(CONFIGS / default_config))
    ap.add_argument("--out", default=default_out)
    ap.add_argument("--threads", type=int, default=1)
    ap.add_argument("--trials", type=int, help="override the trial count")
    args = ap.parse_args()

    cfg = load_config(args.config)
    if args.trials:
        cfg = replace(cfg, trials=args.trials)
    if "DESIGNLIFT_SEED" in os.environ:
        cfg = replace(cfg, seed=int(os.environ["DESIGNLIFT_SEED"]))
    results = run_experiment(cfg, threads=args.threads)
    emit_report(results, args.out, cfg)
    emit_quantiles(results, Path(args.out).with_suffix(".quantiles.csv"))
    summarize(results)
    print(f"wrote {args.out}")
