"""Config-driven recovery experiments with reproducible CSV output.

Every trial draws from its own generator seeded by
``(master seed, design index, n index, r index, m index, trial)``; the noise
vector uses the same key extended by the noise index. Noise levels therefore
share ground truths and ensembles (paired comparisons), and results do not
depend on how trials are scheduled across threads.
"""

import hashlib
import json
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .designs import Sphere, load_design, stabilizer_design
from .errors import FormatError, ParameterError
from .io import format_q, parse_q
from .linalg import random_low_rank
from .measurement import NOISE_SHAPES, apply_operator, draw_noise, RecoveryProblem, sample_ensemble
from .solver import SolverConfig, recover, recover_psd

REPORT_COLUMNS = (
    "n", "r", "m", "eta", "q", "design", "trials",
    "success_rate", "median_rel_error", "mean_iters", "wall_ms",
)
KINDS = ("phase", "noise", "comparison")


@dataclass(frozen=True)
class ExperimentConfig:
    designs: tuple = ("sphere",)
    n: tuple = (8,)
    r: tuple = (1,)
    m: tuple = (64,)
    trials: int = 20
    noise: tuple = ((0.0, 2.0),)
    solver: SolverConfig = field(default_factory=SolverConfig)
    seed: int = 0
    success_threshold: float = 1e-3
    psd: bool = False
    noise_shape: str = "gaussian_rescaled"
    kind: str = "phase"
    timing: bool = False

    def __post_init__(self):
        for name in ("n", "r", "m"):
            values = getattr(self, name)
            if not values or any(int(v) < 1 for v in values):
                raise ParameterError(f"grid {name!r} needs positive values, got {values}")
        if self.trials < 1:
            raise ParameterError("trials must be at least 1")
        if self.success_threshold <= 0:
            raise ParameterError("success_threshold must be positive")
        if self.noise_shape not in NOISE_SHAPES:
            raise ParameterError(f"unknown noise shape {self.noise_shape!r}")
        if self.kind not in KINDS:
            raise ParameterError(f"unknown experiment kind {self.kind!r}")
        for eta, q in self.noise:
            if eta < 0 or q not in (1.0, 2.0, math.inf):
                raise ParameterError(f"bad noise entry ({eta}, {q})")

    def config_hash(self):
        data = asdict(self)
        data["noise"] = [[eta, format_q(q)] for eta, q in self.noise]
        text = json.dumps(data, sort_keys=True, default=str)
        return hashlib.sha256(text.encode()).hexdigest()[:16]


@dataclass
class CellResult:
    n: int
    r: int
    m: int
    eta: float
    q: float
    design: str
    trials: int
    success_rate: float
    median_rel_error: float
    mean_iters: float
    wall_ms: float
    error_quantiles: tuple = (math.nan, math.nan, math.nan)
    nonconverged: int = 0
    errors: tuple = field(default=(), repr=False)


# -- config files ---------------------------------------------------------------

_LIST_KEYS = {"design", "n", "r", "m", "noise"}
_SOLVER_KEYS = {
    "max_iterations": int,
    "primal_tolerance": float,
    "dual_tolerance": float,
    "penalty": float,
    "over_relaxation": float,
    "balance_ratio": float,
    "balance_interval": int,
    "max_penalty_updates": int,
}


def _parse_bool(value):
    v = value.strip().lower()
    if v in ("1", "true", "yes", "on"):
        return True
    if v in ("0", "false", "no", "off"):
        return False
    raise FormatError(f"expected a boolean, got {value!r}")


def parse_config(text):
    """Parse the flat ``key = value`` format; list keys may repeat."""
    lists = {k: [] for k in _LIST_KEYS}
    scalars = {}
    solver = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise FormatError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        try:
            if key == "design":
                lists["design"].append(" ".join(value.split()))
            elif key in ("n", "r", "m"):
                lists[key].extend(int(v) for v in value.replace(",", " ").split())
            elif key == "noise":
                parts = value.split()
                if len(parts) != 2:
                    raise FormatError(f"line {lineno}: noise needs 'eta q', got {value!r}")
                lists["noise"].append((float(parts[0]), parse_q(parts[1])))
            elif key in _SOLVER_KEYS:
                solver[key] = _SOLVER_KEYS[key](value)
            elif key in ("trials", "seed"):
                scalars[key] = int(value)
            elif key == "success_threshold":
                scalars[key] = float(value)
            elif key in ("psd", "timing"):
                scalars[key] = _parse_bool(value)
            elif key == "noise_shape":
                scalars[key] = value
            elif key in ("experiment", "kind"):
                scalars["kind"] = value
            else:
                raise FormatError(f"line {lineno}: unknown key {key!r}")
        except ValueError as exc:
            if isinstance(exc, FormatError):
                raise
            raise FormatError(f"line {lineno}: {exc}") from None
    kwargs = dict(scalars)
    for key, name in (("design", "designs"), ("n", "n"), ("r", "r"), ("m", "m"), ("noise", "noise")):
        if lists[key]:
            kwargs[name] = tuple(lists[key])
    if solver:
        kwargs["solver"] = SolverConfig(**solver)
    return ExperimentConfig(**kwargs)


def load_config(path):
    return parse_config(Path(path).read_text())


# -- execution ------------------------------------------------------------------

def _design_label(spec):
    parts = spec.split(None, 1)
    if parts[0] == "stabilizer":
        return f"stabilizer{parts[1]}"
    if parts[0] == "file":
        return f"file:{Path(parts[1]).stem}"
    return parts[0]


def resolve_design(spec, n):
    """Turn a design spec string into a sampling source for dimension ``n``."""
    parts = spec.split(None, 1)
    kind = parts[0]
    if kind == "sphere":
        return Sphere(n)
    if kind == "stabilizer":
        d = stabilizer_design(int(parts[1]))
    elif kind == "file":
        d = load_design(parts[1])
    else:
        raise ParameterError(f"unknown design spec {spec!r}")
    if d.dim != n:
        raise ParameterError(f"design {spec!r} has dimension {d.dim}, grid asks for n={n}")
    return d


def _cells(cfg):
    cells = []
    for di, spec in enumerate(cfg.designs):
        for ni, n in enumerate(cfg.n):
            for ri, r in enumerate(cfg.r):
                for mi, m in enumerate(cfg.m):
                    for ki, (eta, q) in enumerate(cfg.noise):
                        cells.append(((di, ni, ri, mi, ki), spec, n, r, m, eta, q))
    return cells


def _run_trial(cfg, source, key, trial, n, r, m, eta, q):
    di, ni, ri, mi, ki = key
    rng = np.random.default_rng([cfg.seed, di, ni, ri, mi, trial])
    X = random_low_rank(n, r, rng, psd=cfg.psd)
    ens = sample_ensemble(source, m, int(rng.integers(2**63)))
    noise_rng = np.random.default_rng([cfg.seed, di, ni, ri, mi, trial, ki])
    eps = draw_noise(m, eta, q, cfg.noise_shape, noise_rng)
    problem = RecoveryProblem(ens, apply_operator(ens, X) + eps, eta, q, eps)
    start = time.perf_counter()
    solve = recover_psd if cfg.psd else recover
    res = solve(problem, cfg.solver)
    elapsed = time.perf_counter() - start
    err = float(np.linalg.norm(res.solution - X) / np.linalg.norm(X))
    return err, res.iterations, res.converged, elapsed


def _summarize(cfg, cell, outcomes):
    _, spec, n, r, m, eta, q = cell
    errs = np.array([o[0] for o in outcomes])
    q25, q50, q75 = (float(v) for v in np.quantile(errs, [0.25, 0.5, 0.75]))
    wall = 1000.0 * sum(o[3] for o in outcomes) if cfg.timing else math.nan
    return CellResult(
        n=n, r=r, m=m, eta=eta, q=q, design=_design_label(spec), trials=len(outcomes),
        success_rate=int(np.sum(errs <= cfg.success_threshold)) / len(outcomes),
        median_rel_error=q50,
        mean_iters=float(np.mean([o[1] for o in outcomes])),
        wall_ms=wall,
        error_quantiles=(q25, q50, q75),
        nonconverged=sum(1 for o in outcomes if not o[2]),
        errors=tuple(float(e) for e in errs),
    )


def run_grid(cfg, threads=1):
    """Run every (design, n, r, m, noise) cell; results come back in cell order."""
    cells = _cells(cfg)
    sources = {}
    for _, spec, n, *_rest in cells:
        if (spec, n) not in sources:
            sources[(spec, n)] = resolve_design(spec, n)
    jobs = [(ci, t) for ci in range(len(cells)) for t in range(cfg.trials)]

    def work(job):
        ci, t = job
        key, spec, n, r, m, eta, q = cells[ci]
        return _run_trial(cfg, sources[(spec, n)], key, t, n, r, m, eta, q)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            outcomes = list(pool.map(work, jobs))
    else:
        outcomes = [work(j) for j in jobs]
    results = []
    for ci, cell in enumerate(cells):
        chunk = outcomes[ci * cfg.trials : (ci + 1) * cfg.trials]
        results.append(_summarize(cfg, cell, chunk))
    return results


def run_phase_diagram(cfg, threads=1):
    return run_grid(cfg, threads)


def run_noise_sweep(cfg, threads=1):
    etas = sorted({eta for eta, _ in cfg.noise})
    if len(etas) < 5 or 0.0 not in etas:
        raise ParameterError("a noise sweep needs at least 5 noise levels including 0")
    return run_grid(cfg, threads)


def run_design_comparison(cfg, threads=1):
    if len(cfg.designs) < 2:
        raise ParameterError("a design comparison needs at least two designs")
    return run_grid(cfg, threads)


def run_experiment(cfg, threads=1):
    runner = {"phase": run_phase_diagram, "noise": run_noise_sweep, "comparison": run_design_comparison}
    return runner[cfg.kind](cfg, threads)


@dataclass(frozen=True)
class NoiseFit:
    design: str
    n: int
    r: int
    m: int
    q: float
    floor: float
    slope: float
    intercept: float
    correlation: float


def fit_noise_slope(results):
    """Per (design, n, r, m, q) group: error-vs-eta slope through the origin
    after removing the noiseless floor, plus an ordinary least-squares line
    and the Pearson correlation."""
    groups = {}
    for c in results:
        groups.setdefault((c.design, c.n, c.r, c.m, c.q), []).append(c)
    fits = []
    for (design, n, r, m, q), cells in groups.items():
        cells = sorted(cells, key=lambda c: c.eta)
        eta = np.array([c.eta for c in cells])
        err = np.array([c.median_rel_error for c in cells])
        floor = float(err[eta == 0][0]) if np.any(eta == 0) else 0.0
        excess = err - floor
        slope = float(eta @ excess / (eta @ eta)) if np.any(eta > 0) else math.nan
        if len(cells) >= 2 and np.std(eta) > 0 and np.std(err) > 0:
            b1, b0 = np.polyfit(eta, err, 1)
            corr = float(np.corrcoef(eta, err)[0, 1])
        else:
            b0, corr = math.nan, math.nan
        fits.append(NoiseFit(design, n, r, m, q, floor, slope, float(b0), corr))
    return fits


# -- reports --------------------------------------------------------------------

def _num(x):
    if isinstance(x, float) and math.isnan(x):
        return "NA"
    if isinstance(x, float) and math.isinf(x):
        return "inf"
    return repr(x)


def format_report(results, cfg=None):
    seed = cfg.seed if cfg is not None else "NA"
    chash = cfg.config_hash() if cfg is not None else "NA"
    lines = [
        f"# designlift manifest seed={seed} config_hash={chash} version={__version__}",
        ",".join(REPORT_COLUMNS),
    ]
    for c in results:
        row = (
            str(c.n), str(c.r), str(c.m), _num(float(c.eta)), format_q(c.q), c.design, str(c.trials),
            _num(float(c.success_rate)), _num(float(c.median_rel_error)), _num(float(c.mean_iters)),
            _num(float(c.wall_ms)),
        )
        lines.append(",".join(row))
    return "\n".join(lines) + "\n"


def emit_report(results, path, cfg=None):
    """Write the CSV report (manifest comment line, header, one row per cell)."""
    path = Path(path)
    try:
        path.write_text(format_report(results, cfg))
    except OSError as exc:
        raise OSError(f"cannot write report to {path}: {exc}") from exc
    return path


def emit_quantiles(results, path):
    """Sidecar CSV with error quartiles and non-convergence counts per cell."""
    lines = ["n,r,m,eta,q,design,q25,q50,q75,nonconverged"]
    for c in results:
        q25, q50, q75 = c.error_quantiles
        lines.append(
            ",".join([str(c.n), str(c.r), str(c.m), _num(float(c.eta)), format_q(c.q), c.design,
                      _num(q25), _num(q50), _num(q75), str(c.nonconverged)])
        )
    Path(path).write_text("\n".join(lines) + "\n")
    return Path(path)
