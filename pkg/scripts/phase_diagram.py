"""Success rate versus number of measurements (noiseless)."""

from _common import run


def summarize(results):
    for c in results:
        bar = "#" * round(20 * c.success_rate)
        print(f"{c.design:>12} n={c.n} r={c.r} m={c.m:4d}  {c.success_rate:4.2f} {bar:<20}  "
              f"median err {c.median_rel_error:.2e}  iters {c.mean_iters:.0f}")


if __name__ == "__main__":
    run("phase.cfg", "phase.csv", summarize)
