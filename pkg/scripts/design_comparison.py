"""Stabilizer measurements against Haar-random ones at equal m."""

from _common import run


def summarize(results):
    table = {}
    for c in results:
        table.setdefault((c.r, c.m), {})[c.design] = c.success_rate
    designs = sorted({c.design for c in results})
    print("r    m  " + "  ".join(f"{d:>12}" for d in designs))
    for (r, m), row in sorted(table.items()):
        print(f"{r} {m:4d}  " + "  ".join(f"{row.get(d, float('nan')):12.2f}" for d in designs))


if __name__ == "__main__":
    run("comparison.cfg", "comparison.csv", summarize)
