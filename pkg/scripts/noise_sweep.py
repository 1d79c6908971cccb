"""Median reconstruction error against the noise level, with a linear fit."""

from _common import run

from designlift.experiments import fit_noise_slope
from designlift.io import format_q


def summarize(results):
    for c in results:
        print(f"eta={c.eta:<6g} median err {c.median_rel_error:.3e}  iters {c.mean_iters:.0f}")
    for f in fit_noise_slope(results):
        print(f"{f.design} m={f.m} q={format_q(f.q)}: slope {f.slope:.4f}, intercept {f.intercept:.2e}, "
              f"floor {f.floor:.2e}, correlation {f.correlation:.4f}")


if __name__ == "__main__":
    run("noise.cfg", "noise.csv", summarize)
