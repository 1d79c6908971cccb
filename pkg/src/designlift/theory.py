"""Numerical checks of the moment, small-ball and null-space quantities.

Expectations over a finite design are computed exactly as weighted sums;
quantities that involve Rademacher sums or draws of ``m`` vectors are
estimated by Monte Carlo with one seeded stream per trial.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .designs import Design, Sphere, design_accuracy, frame_check, sample_sphere
from .errors import HypothesisViolation, ParameterError
from .linalg import abs_hermitian, check_hermitian, haar_unitary, hermitian_part, rank_split, schatten_norm
from .measurement import apply_operator, lq_norm, measurement_scaling, sample_ensemble
from .symmetric import sym3_trace

EXACT_TOL = 1e-9
OPERATOR_NORM_CONSTANT = 3.1049


def cone_constant(rho):
    """``sqrt(1 + (1 + 1/rho)^2)``, the nuclear-norm radius of the cone per sqrt(r)."""
    return math.sqrt(1.0 + (1.0 + 1.0 / rho) ** 2)


def lemma1_bound(theta, rho, r):
    return (1.0 - theta**2) ** 3 / (36.0 * cone_constant(rho) ** 2 * r)


def lemma3_bound(theta, rho, r):
    return (1.0 - theta**2) ** 3 / (450.0 * cone_constant(rho) ** 2 * r)


def third_moment_bound(Z, rho, r):
    return 6.0 * cone_constant(rho) * math.sqrt(r) * max(1.0, float(np.trace(Z).real) ** 2)


# -- reports -------------------------------------------------------------------

@dataclass(frozen=True)
class CheckRow:
    suite: str
    instance_id: str
    lhs: float
    rhs: float
    slack: float
    passed: bool


@dataclass
class CheckReport:
    rows: list = field(default_factory=list)

    @property
    def passed(self):
        return all(r.passed for r in self.rows)

    @property
    def violations(self):
        return [r for r in self.rows if not r.passed]

    @property
    def min_slack(self):
        return min((r.slack for r in self.rows), default=math.inf)

    def extend(self, other):
        self.rows.extend(other.rows)
        return self


def _lower_bound_row(suite, iid, lhs, rhs, tol=EXACT_TOL):
    return CheckRow(suite, iid, float(lhs), float(rhs), float(lhs - rhs), bool(lhs >= rhs - tol))


def _upper_bound_row(suite, iid, lhs, rhs, tol=EXACT_TOL):
    return CheckRow(suite, iid, float(lhs), float(rhs), float(rhs - lhs), bool(lhs <= rhs + tol))


# -- cone samples --------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class ConeSample:
    matrix: np.ndarray
    rho: float
    rank_param: int
    margin: float


def cone_margin(Z, r, rho):
    """``||Z_r||_F - (rho / sqrt(r)) ||Z_c||_*``; positive inside the cone."""
    Zr, Zc = rank_split(Z, r)
    return schatten_norm(Zr, "frobenius") - rho / math.sqrt(r) * schatten_norm(Zc, "nuclear")


def cone_candidate(n, r, rng, head_mass=0.9):
    """Unit-Frobenius Hermitian matrix with a dominant rank-``r`` head.

    Head and tail spectra are Gaussian, each scaled to unit norm, then mixed
    with weights ``head_mass`` and ``1 - head_mass`` in a Haar-random basis.
    """
    U = haar_unitary(n, rng)
    head = rng.standard_normal(r)
    head /= np.linalg.norm(head)
    spec = head_mass * head
    if r < n:
        tail = rng.standard_normal(n - r)
        tail /= np.linalg.norm(tail)
        spec = np.concatenate([spec, (1.0 - head_mass) * tail])
    spec /= np.linalg.norm(spec)
    return hermitian_part((U * spec) @ U.conj().T)


def sample_cone(n, r, rho, seed, head_mass=0.9, max_tries=1000):
    if not 1 <= r <= n:
        raise ParameterError(f"rank parameter must satisfy 1 <= r <= {n}, got {r}")
    if not 0 < rho < 1:
        raise ParameterError(f"rho must lie in (0, 1), got {rho}")
    if not 0 < head_mass <= 1:
        raise ParameterError(f"head_mass must lie in (0, 1], got {head_mass}")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    for _ in range(max_tries):
        Z = cone_candidate(n, r, rng, head_mass)
        margin = cone_margin(Z, r, rho)
        if margin > 1e-8:
            return ConeSample(Z, rho, r, margin)
    raise ParameterError(f"no cone sample accepted in {max_tries} tries for n={n}, r={r}, rho={rho}")


def boundary_candidates(n, r, rho, rng, count):
    """Traceless rank-``2r`` matrices with spectrum ``+-1/sqrt(2r)``."""
    if 2 * r > n:
        return []
    out = []
    spec = np.concatenate([np.ones(r), -np.ones(r), np.zeros(n - 2 * r)]) / math.sqrt(2 * r)
    for _ in range(count):
        U = haar_unitary(n, rng)
        Z = hermitian_part((U * spec) @ U.conj().T)
        out.append(ConeSample(Z, rho, r, cone_margin(Z, r, rho)))
    return out


def cone_battery(n, r, rho, count, seed, n_boundary=10):
    """``count`` cone samples: a few boundary candidates, the rest with mixed head mass.

    Head masses are drawn from ``[0.9 * b, 1]`` where ``b = k / (1 + k)``,
    ``k = rho * sqrt((n - r) / r)``, is roughly where a flat tail starts to
    violate the cone condition, so the batch reaches close to the boundary.
    """
    rng = np.random.default_rng(seed)
    samples = [s for s in boundary_candidates(n, r, rho, rng, n_boundary) if s.margin > 1e-8]
    k = rho * math.sqrt((n - r) / r)
    low = max(0.9 * k / (1.0 + k), 0.05)
    while len(samples) < count:
        samples.append(sample_cone(n, r, rho, rng, head_mass=rng.uniform(low, 1.0)))
    return samples[:count]


# -- exact moments over a finite design -----------------------------------------

def _measurement_values(d, Z):
    """``tr(a a^* Z)`` for every super-normalized design vector ``a``."""
    Z = check_hermitian(Z, tol=1e-9)
    V = d.unit_vectors()
    vals = np.einsum("ia,ab,ib->i", V.conj(), Z, V).real
    return measurement_scaling(d.dim) * vals


def exact_moment(d, Z, order):
    """``sum_i p_i |tr(a_i a_i^* Z)|^order`` with super-normalized ``a_i``."""
    return float(np.sum(d.weights * np.abs(_measurement_values(d, Z)) ** order))


def second_moment_identity(Z):
    Z = np.asarray(Z)
    return float((np.trace(Z) ** 2 + np.trace(Z @ Z)).real)


def third_moment_upper(d, Z):
    """``E tr(aa^*Z)^2 tr(aa^*|Z|)`` by direct enumeration over the design."""
    vals = _measurement_values(d, Z)
    absvals = _measurement_values(d, abs_hermitian(Z))
    return float(np.sum(d.weights * vals**2 * absvals))


def third_moment_upper_sym3(n, Z):
    """The same quantity for an exact 3-design, via the symmetrizer trace formula."""
    absZ = abs_hermitian(Z)
    return math.sqrt(n * (n + 1)) / (n + 2) * 6.0 * sym3_trace(Z, Z, absZ)


def third_moment_bound_check(d, z):
    moment = exact_moment(d, z.matrix, 3)
    bound = third_moment_bound(z.matrix, z.rho, z.rank_param)
    return moment, bound, moment <= bound + EXACT_TOL


def small_ball_exact(d, Z, theta):
    """``P(|tr(a a^* Z)| >= theta)`` for ``a`` drawn from the super-normalized design."""
    return float(np.sum(d.weights[np.abs(_measurement_values(d, Z)) >= theta]))


def _require_exact_3design(d, tol=EXACT_TOL):
    theta = design_accuracy(d, 3, "inf")
    if theta > tol:
        raise HypothesisViolation(
            f"design is not an exact 3-design (theta_inf = {theta:.3e})", "theta_inf", theta, tol
        )


def lemma1_bound_check(d, samples, theta, require_exact=True):
    if not 0 <= theta <= 1:
        raise ParameterError(f"theta must lie in [0, 1], got {theta}")
    if require_exact:
        _require_exact_3design(d)
    report = CheckReport()
    for i, z in enumerate(samples):
        q = small_ball_exact(d, z.matrix, theta)
        bound = lemma1_bound(theta, z.rho, z.rank_param)
        report.rows.append(_lower_bound_row("smallball", f"lemma1:{i}:theta={theta:g}", q, bound, 0.0))
    return report


def lemma3_hypotheses(d, rho, r):
    """Accuracy and frame hypotheses for approximate designs, as a dict of values."""
    n = d.dim
    limit_inf = 1.0 / (4 * r * cone_constant(rho) ** 2)
    theta_inf = design_accuracy(d, 3, "inf")
    theta_one = design_accuracy(d, 3, "one") if n**3 <= 4096 else math.inf
    frame = frame_check(d)
    return {
        "theta_inf": theta_inf,
        "theta_inf_limit": limit_inf,
        "theta_one": theta_one,
        "theta_one_limit": 0.25,
        "frame_deviation": frame,
        "frame_limit": 1.0 / n,
    }


def lemma3_bound_check(d, samples, theta, rho, r):
    h = lemma3_hypotheses(d, rho, r)
    if not (h["theta_inf"] <= h["theta_inf_limit"] or h["theta_one"] <= h["theta_one_limit"]):
        raise HypothesisViolation(
            f"accuracy hypothesis fails: theta_inf = {h['theta_inf']:.4g} > {h['theta_inf_limit']:.4g} "
            f"and theta_one = {h['theta_one']:.4g} > 0.25",
            "theta_inf",
            h["theta_inf"],
            h["theta_inf_limit"],
        )
    if h["frame_deviation"] > h["frame_limit"] + 1e-12:
        raise HypothesisViolation(
            f"frame hypothesis fails: deviation {h['frame_deviation']:.4g} > 1/n",
            "frame_deviation",
            h["frame_deviation"],
            h["frame_limit"],
        )
    report = CheckReport()
    for i, z in enumerate(samples):
        q = small_ball_exact(d, z.matrix, theta)
        bound = lemma3_bound(theta, rho, r)
        report.rows.append(_lower_bound_row("smallball", f"lemma3:{i}:theta={theta:g}", q, bound, 0.0))
    return report


def paley_zygmund_check(values, weights, p, theta):
    """Both sides of ``P(W > theta E W) >= (1-theta)^{p'} (E W)^{p'} / (E W^p)^{1/(p-1)}``.

    ``p' = p/(p-1)``. Returns ``(lhs, rhs, passed)``.
    """
    W = np.asarray(values, dtype=float)
    w = np.asarray(weights, dtype=float)
    if np.any(W < 0):
        raise ParameterError("W must be nonnegative")
    if p <= 1:
        raise ParameterError(f"p must exceed 1, got {p}")
    if not 0 <= theta <= 1:
        raise ParameterError(f"theta must lie in [0, 1], got {theta}")
    w = w / w.sum()
    mean = float(np.sum(w * W))
    mom = float(np.sum(w * W**p))
    lhs = float(np.sum(w[W > theta * mean]))
    if mom == 0.0:
        rhs = 0.0
    else:
        rhs = (1 - theta) ** (p / (p - 1)) * mean ** (p / (p - 1)) / mom ** (1 / (p - 1))
    return lhs, rhs, lhs >= rhs - 1e-12


# -- Rademacher width -----------------------------------------------------------

@dataclass(frozen=True)
class SmallBallReport:
    theta: float
    q_value: float
    bound: float
    w_m_lower: float
    w_m_upper: float
    h_norm_estimate: float
    h_norm_se: float
    trials: int
    proof_bound: float

    @property
    def h_norm_within_proof_bound(self):
        return self.h_norm_estimate <= self.proof_bound + 2 * self.h_norm_se


def _draw_vectors(source, m, rng):
    if isinstance(source, Sphere):
        return sample_sphere(source.dim, m, rng)
    idx = rng.choice(source.size, size=m, p=source.weights)
    return source.unit_vectors()[idx]


def rademacher_operator_norms(source, m, trials, seed):
    """``||H||_inf`` and ``lambda_max(H)`` per trial, ``H = m^{-1/2} sum_j eps_j a_j a_j^*``.

    The ``a_j`` are super-normalized; trial ``k`` uses the stream ``(seed, k)``.
    """
    n = source.dim
    s = measurement_scaling(n)
    norms = np.empty(trials)
    tops = np.empty(trials)
    for k in range(trials):
        rng = np.random.default_rng([seed, k])
        V = _draw_vectors(source, m, rng)
        eps = rng.choice([-1.0, 1.0], size=m)
        H = s / math.sqrt(m) * (V.T * eps) @ V.conj()
        lam = np.linalg.eigvalsh(hermitian_part(H))
        norms[k] = np.max(np.abs(lam))
        tops[k] = lam[-1]
    return norms, tops


def wm_estimate(source, m, trials, seed, r=1, rho=0.5, theta=0.25, samples=()):
    """Monte Carlo estimate of ``E||H||_inf`` with the width bounds it implies.

    ``w_m_lower`` is ``E lambda_max(H)`` (the sup over the cone is at least
    the value at the top eigenprojector); ``w_m_upper`` is the Hoelder bound
    ``cone_constant(rho) sqrt(r) E||H||_inf``. When finite-design ``samples``
    are given, ``q_value`` is the minimum small-ball probability among them.
    """
    if m < 1 or trials < 1:
        raise ParameterError("m and trials must be positive")
    norms, tops = rademacher_operator_norms(source, m, trials, seed)
    mean = float(norms.mean())
    se = float(norms.std(ddof=1) / math.sqrt(trials)) if trials > 1 else 0.0
    n = source.dim
    q_value = math.nan
    if samples and isinstance(source, Design):
        q_value = min(small_ball_exact(source, z.matrix, theta) for z in samples)
    return SmallBallReport(
        theta=theta,
        q_value=q_value,
        bound=lemma1_bound(theta, rho, r),
        w_m_lower=float(tops.mean()),
        w_m_upper=cone_constant(rho) * math.sqrt(r) * mean,
        h_norm_estimate=mean,
        h_norm_se=se,
        trials=trials,
        proof_bound=OPERATOR_NORM_CONSTANT * math.sqrt(n * math.log(2 * n)),
    )


# -- null space property ---------------------------------------------------------

@dataclass
class NspWitness:
    rho: float
    tau: float
    order: int
    q: float
    lhs: np.ndarray
    rhs: np.ndarray

    @property
    def violations(self):
        return np.flatnonzero(self.lhs > self.rhs + 1e-12)

    @property
    def holds_on_samples(self):
        return self.violations.size == 0


def sufficient_tau(e, q):
    """A ``tau`` that makes the inequality hold for every ``Z`` when ``A`` is injective.

    Uses ``||Z_r||_F <= ||Z||_F <= ||A(Z)||_2 / sigma_min`` together with
    ``||x||_2 <= c_q ||x||_q``. Returns ``inf`` when ``A`` has a kernel.
    """
    M = e.matrix()
    if M.shape[0] < M.shape[1]:
        return math.inf
    smin = float(np.linalg.svd(M, compute_uv=False).min())
    if smin <= 1e-12 * np.linalg.norm(M, 2):
        return math.inf
    c_q = math.sqrt(e.count) if math.isinf(q) else 1.0
    return c_q / smin


def nsp_check(e, rho, tau, r, q, samples):
    """Evaluate ``||Z_r||_F <= rho/sqrt(r) ||Z_c||_* + tau ||A(Z)||_q`` on each sample.

    A falsification harness: a clean result says nothing about untested ``Z``.
    """
    if tau <= 0:
        raise ParameterError(f"tau must be positive, got {tau}")
    lhs, rhs = [], []
    for z in samples:
        Z = z.matrix if isinstance(z, ConeSample) else z
        Zr, Zc = rank_split(Z, r)
        lhs.append(schatten_norm(Zr, "frobenius"))
        rhs.append(rho / math.sqrt(r) * schatten_norm(Zc, "nuclear") + tau * lq_norm(apply_operator(e, Z), q))
    return NspWitness(rho, tau, r, q, np.array(lhs), np.array(rhs))


# -- suite runner used by the command line ------------------------------------------

SUITES = ("moments", "smallball", "pz", "wm", "nsp")
THETA_GRID = tuple(i / 10 for i in range(10))


def run_theory_suite(d, suite, samples=50, seed=0, r=1, rho=0.5, thetas=THETA_GRID, m=200, trials=500, tau=None):
    """Rows for one suite (or ``"all"``) over cone samples drawn for the design's dimension."""
    if suite == "all":
        report = CheckReport()
        for s in SUITES:
            report.extend(run_theory_suite(d, s, samples, seed, r, rho, thetas, m, trials, tau))
        return report
    if suite not in SUITES:
        raise ParameterError(f"unknown suite {suite!r}; choose from {', '.join(SUITES)} or all")
    n = d.dim
    cone = cone_battery(n, r, rho, samples, seed)
    report = CheckReport()
    if suite == "moments":
        rng = np.random.default_rng([seed, 1])
        for i in range(samples):
            G = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
            Z = hermitian_part(G)
            Z /= np.linalg.norm(Z)
            lhs, rhs = exact_moment(d, Z, 2), second_moment_identity(Z)
            err = abs(lhs - rhs)
            tol = EXACT_TOL * max(1.0, abs(rhs))
            report.rows.append(CheckRow("moments", f"second:{i}", lhs, rhs, tol - err, bool(err <= tol)))
        for i, z in enumerate(cone):
            moment, bound, _ = third_moment_bound_check(d, z)
            report.rows.append(_upper_bound_row("moments", f"third:{i}", moment, bound))
    elif suite == "smallball":
        for theta in thetas:
            report.extend(lemma1_bound_check(d, cone, theta, require_exact=False))
    elif suite == "pz":
        for i, z in enumerate(cone):
            W = _measurement_values(d, z.matrix) ** 2
            for theta in thetas:
                lhs, rhs, ok = paley_zygmund_check(W, d.weights, 1.5, theta**2)
                report.rows.append(CheckRow("pz", f"{i}:theta={theta:g}", lhs, rhs, lhs - rhs, bool(ok)))
    elif suite == "wm":
        rep = wm_estimate(d, m, trials, seed, r, rho)
        rhs = rep.proof_bound + 2 * rep.h_norm_se
        report.rows.append(_upper_bound_row("wm", f"m={m}:trials={trials}", rep.h_norm_estimate, rhs, 0.0))
    elif suite == "nsp":
        e = sample_ensemble(d, m, seed)
        t = tau if tau is not None else sufficient_tau(e, 2.0)
        if math.isinf(t):
            t = 1.0
        w = nsp_check(e, rho, t, r, 2.0, cone)
        for i, (lhs, rhs) in enumerate(zip(w.lhs, w.rhs)):
            report.rows.append(_upper_bound_row("nsp", f"{i}:tau={t:.4g}", lhs, rhs, 1e-12))
    return report


def format_check_csv(report):
    lines = ["suite,instance_id,lhs,rhs,slack,pass"]
    for row in report.rows:
        lines.append(
            f"{row.suite},{row.instance_id},{row.lhs!r},{row.rhs!r},{row.slack!r},{'true' if row.passed else 'false'}"
        )
    return "\n".join(lines) + "\n"
