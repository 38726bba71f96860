"""Randomised sweeps over (weights, delta), lemma grids, and a counterexample search.

All randomness flows from explicit integer seeds through numpy
``SeedSequence``/``PCG64``. Instance ``k`` of a sweep uses its own generator
seeded by ``(seed, k)``, so results do not depend on evaluation order.
"""

from __future__ import annotations

import csv
import hashlib
import io
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from smalldev import _backend, phi as ph
from smalldev.bounds import chain_at, implication_margin, samuels_bound
from smalldev.exact import THRESHOLD_BAND
from smalldev.model import (
    FLOAT,
    DeltaThreshold,
    Instance,
    WeightVector,
    instance_to_dict,
    make_delta,
    make_discrete_var,
    make_instance,
    make_weight_vector,
)

SAMPLERS = ("dirichlet-uniform", "geometric-decay", "one-dominant")

MARGIN_TOL = 1e-12
IDENTITY_TOL = 1e-10
CONCAVITY_TOL = 1e-8
ETA_ZERO_TOL = 1e-5
SPLICE_TOL = 1e-8
CROSSCHECK_RTOL = 1e-4

HIST_EDGES = (-math.inf, -1e-12, 0.0, 1e-12, 1e-9, 1e-6, 1e-3, 1e-2, 1e-1, 0.5, math.inf)


# --- weight samplers --------------------------------------------------------


def _draw_weights(n: int, sampler: str, rng: np.random.Generator) -> WeightVector:
    if sampler not in SAMPLERS:
        raise ValueError(f"unknown sampler {sampler!r}; choose from {SAMPLERS}")
    if n < 1:
        raise ValueError("n must be at least 1")
    if n == 1:
        return make_weight_vector([1.0])
    if sampler == "dirichlet-uniform":
        raw = rng.standard_exponential(n)
    elif sampler == "geometric-decay":
        r = rng.uniform(0.2, 0.95)
        raw = r ** np.arange(n)
    else:
        top = rng.uniform(0.5, 0.99)
        raw = np.concatenate(([top], np.full(n - 1, (1.0 - top) / (n - 1))))
    return make_weight_vector([float(x) for x in raw], normalize=True)


def sample_weights(n: int, sampler: str, seed: int) -> WeightVector:
    return _draw_weights(n, sampler, np.random.default_rng(seed))


# --- implication sweep ------------------------------------------------------


@dataclass(frozen=True)
class SweepConfig:
    instance_count: int = 1000
    n_range: tuple = (1, 16)
    delta_range: tuple = (1e-4, 10.0)
    seed: int = 0
    weight_sampler: tuple = SAMPLERS
    tolerance: float = MARGIN_TOL
    identity_tolerance: float = IDENTITY_TOL

    def __post_init__(self):
        samplers = (self.weight_sampler,) if isinstance(self.weight_sampler, str) else tuple(self.weight_sampler)
        object.__setattr__(self, "weight_sampler", samplers)
        if self.instance_count < 1:
            raise ValueError("instance_count must be >= 1")
        lo, hi = self.n_range
        if not 1 <= lo <= hi:
            raise ValueError(f"bad n_range {self.n_range}")
        dlo, dhi = self.delta_range
        if not 0 < dlo <= dhi:
            raise ValueError(f"bad delta_range {self.delta_range}")
        for s in samplers:
            if s not in SAMPLERS:
                raise ValueError(f"unknown sampler {s!r}")


@dataclass(frozen=True)
class SweepRecord:
    index: int
    sampler: str
    n: int
    delta: float
    weights: tuple
    samuels: float
    argmin_index: int
    feige: float
    margin: float
    chain_margins: tuple

    def digest(self) -> str:
        return hashlib.sha1(repr(self.weights).encode()).hexdigest()[:12]


@dataclass
class SweepReport:
    worst_margin: float
    worst_case: tuple
    worst_identity: float
    histogram: list
    failures: list
    records: list = field(default_factory=list, repr=False)

    def to_dict(self, include_records: bool = False) -> dict:
        out = {
            "worst_margin": self.worst_margin,
            "worst_case": {"weights": list(self.worst_case[0]), "delta": self.worst_case[1]},
            "worst_identity": self.worst_identity,
            "histogram": self.histogram,
            "instances": len(self.records),
            "failures": [_record_dict(r) for r in self.failures],
        }
        if include_records:
            out["records"] = [_record_dict(r) for r in self.records]
        return out

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf)
        writer.writerow(
            ["n", "delta", "weights_digest", "samuels", "feige", "margin"]
            + [f"chain_{lab}" for lab in ("sum_identity", "phi_monotone", "concavity_min", "lemma3_floor")]
        )
        for r in self.records:
            writer.writerow(
                [r.n, repr(r.delta), r.digest(), repr(r.samuels), repr(r.feige), repr(r.margin)]
                + [repr(m) for m in r.chain_margins]
            )
        return buf.getvalue()


def _record_dict(r: SweepRecord) -> dict:
    return {
        "index": r.index,
        "sampler": r.sampler,
        "n": r.n,
        "delta": r.delta,
        "weights": list(r.weights),
        "samuels": r.samuels,
        "argmin_index": r.argmin_index,
        "feige": r.feige,
        "margin": r.margin,
        "chain_margins": list(r.chain_margins),
    }


def _sweep_instance(cfg: SweepConfig, k: int):
    rng = np.random.default_rng([cfg.seed, k])
    sampler = cfg.weight_sampler[k % len(cfg.weight_sampler)]
    n = int(rng.integers(cfg.n_range[0], cfg.n_range[1] + 1))
    lo, hi = cfg.delta_range
    delta = float(math.exp(rng.uniform(math.log(lo), math.log(hi))))
    return sampler, _draw_weights(n, sampler, rng), make_delta(delta)


def evaluate_record(k: int, sampler: str, w: WeightVector, d: DeltaThreshold) -> SweepRecord:
    rep = implication_margin(w, d)
    chain = chain_at(w, d, rep.argmin_index, rep.samuels)
    return SweepRecord(
        index=k,
        sampler=sampler,
        n=w.n,
        delta=d.delta,
        weights=w.weights,
        samuels=rep.samuels,
        argmin_index=rep.argmin_index,
        feige=rep.feige,
        margin=rep.implication_margin,
        chain_margins=tuple(s.margin for s in chain.steps),
    )


def sweep_implication(cfg: SweepConfig) -> SweepReport:
    records = []
    failures = []
    worst = math.inf
    worst_case = ((), math.nan)
    worst_identity = 0.0
    for k in range(cfg.instance_count):
        sampler, w, d = _sweep_instance(cfg, k)
        rec = evaluate_record(k, sampler, w, d)
        records.append(rec)
        local = min(rec.margin, *rec.chain_margins[1:])
        if local < worst:
            worst = local
            worst_case = (rec.weights, rec.delta)
        worst_identity = max(worst_identity, abs(rec.chain_margins[0]))
        if local < -cfg.tolerance or abs(rec.chain_margins[0]) > cfg.identity_tolerance:
            failures.append(rec)
    counts, _ = np.histogram([r.margin for r in records], bins=np.array(HIST_EDGES))
    histogram = [
        {"lo": lo, "hi": hi, "count": int(c)}
        for lo, hi, c in zip(HIST_EDGES[:-1], HIST_EDGES[1:], counts)
    ]
    return SweepReport(worst, worst_case, worst_identity, histogram, failures, records)


# --- lemma grids ------------------------------------------------------------


@dataclass(frozen=True)
class LemmaGrid:
    lemma1_step: float = 1e-3
    mu_step: float = 0.01
    rho_range: tuple = (1e-3, 1e3)
    rho_per_decade: int = 20
    alphas: tuple = (0.01, 0.1, 0.5, 1.0, 2.0, 10.0, 100.0)
    t_step: float = 1e-3
    eta_zero_t: float = 1e-6
    crosscheck_alphas: int = 13
    crosscheck_step: float = 0.01
    crosscheck_rho: tuple = (1e-2, 1e2)
    crosscheck_rho_count: int = 11


@dataclass(frozen=True)
class LemmaCheck:
    name: str
    worst: float
    bound: float
    kind: str  # "min>=", "min>", "max<=", "max<"
    points: int

    @property
    def passed(self) -> bool:
        if self.kind == "min>=":
            return self.worst >= self.bound
        if self.kind == "min>":
            return self.worst > self.bound
        if self.kind == "max<=":
            return self.worst <= self.bound
        return self.worst < self.bound


@dataclass(frozen=True)
class LemmaReport:
    checks: tuple

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def by_name(self) -> dict:
        return {c.name: c for c in self.checks}

    def to_dict(self) -> dict:
        return {
            "passed": self.passed,
            "checks": [
                {"name": c.name, "worst": c.worst, "bound": c.bound, "kind": c.kind, "points": c.points, "passed": c.passed}
                for c in self.checks
            ],
        }


def _grid(lo: float, hi: float, step: float) -> list:
    count = int(round((hi - lo) / step))
    return [lo + k * step for k in range(count + 1)]


def _log_grid(lo: float, hi: float, per_decade: int) -> list:
    decades = math.log10(hi / lo)
    count = int(round(decades * per_decade))
    return [lo * 10 ** (k / per_decade) for k in range(count + 1)]


def _log_points(lo: float, hi: float, count: int) -> list:
    return [lo * (hi / lo) ** (k / (count - 1)) for k in range(count)]


def sweep_lemmas(grid: LemmaGrid = LemmaGrid(), tolerance: float = MARGIN_TOL,
                 concavity_tolerance: float = CONCAVITY_TOL) -> LemmaReport:
    checks = []

    ts = _grid(0.0, 1.0, grid.lemma1_step)
    worst1 = min(min(ph.check_lemma1(t), ph.f_lemma1(t)) for t in ts)
    checks.append(LemmaCheck("lemma1", worst1, -tolerance, "min>=", len(ts)))

    mus = _grid(0.0, 1.0, grid.mu_step)
    rhos = _log_grid(grid.rho_range[0], grid.rho_range[1], grid.rho_per_decade)

    # strict decrease between neighbours implies it for every pair by transitivity
    gap = math.inf
    worst3 = math.inf
    for rho in rhos:
        vals = [ph.phi(mu, rho) for mu in mus]
        gap = min(gap, min(a - b for a, b in zip(vals, vals[1:])))
        worst3 = min(worst3, min(v - ph.lemma3_floor(mu, rho) for mu, v in zip(mus, vals)))
    checks.append(LemmaCheck("lemma2-strict-decrease", gap, 0.0, "min>", len(mus) * len(rhos)))
    checks.append(LemmaCheck("lemma3", worst3, -tolerance, "min>=", len(mus) * len(rhos)))

    splice = max(abs(ph.phi(1e-9, rho) - ph.phi(0.0, rho)) for rho in rhos)
    checks.append(LemmaCheck("phi-continuity-at-zero", splice, SPLICE_TOL, "max<=", len(rhos)))

    h = ph.SECOND_DIFF_STEP
    interior = [t for t in _grid(0.0, 1.0, grid.t_step)[1:-1] if h <= t <= 1.0 - h]
    d2 = -math.inf
    eta_max = -math.inf
    etap_max = -math.inf
    eta_zero = 0.0
    for a in grid.alphas:
        for t in interior:
            d2 = max(d2, ph.h_alpha_second_difference(a, t, h))
            eta_max = max(eta_max, ph.eta(a, t))
            etap_max = max(etap_max, ph.eta_prime(a, t))
        eta_zero = max(eta_zero, abs(ph.eta(a, grid.eta_zero_t)))
    npts = len(grid.alphas) * len(interior)
    checks.append(LemmaCheck("lemma4-second-difference", d2, concavity_tolerance, "max<=", npts))
    checks.append(LemmaCheck("lemma4-eta-negative", eta_max, 0.0, "max<", npts))
    checks.append(LemmaCheck("lemma4-eta-prime-negative", etap_max, 0.0, "max<", npts))
    checks.append(LemmaCheck("lemma4-eta-at-zero", eta_zero, ETA_ZERO_TOL, "max<=", len(grid.alphas)))

    checks.extend(derivative_crosschecks(grid))
    return LemmaReport(tuple(checks))


def _rel(approx: float, exact: float) -> float:
    return abs(approx - exact) / abs(exact)


# relative error is undefined where the closed form vanishes (g' has a root)
ROOT_FLOOR = 1e-8


def derivative_crosschecks(grid: LemmaGrid = LemmaGrid()) -> list:
    """Worst relative error of each closed-form derivative against finite differences."""
    alphas = _log_points(1e-2, 1e2, grid.crosscheck_alphas)
    ts = _grid(grid.crosscheck_step, 1.0 - grid.crosscheck_step, grid.crosscheck_step)
    mus = ts
    rhos = _log_points(grid.crosscheck_rho[0], grid.crosscheck_rho[1], grid.crosscheck_rho_count)

    errs = {"eta": [0.0, 0], "eta-prime": [0.0, 0], "g-prime": [0.0, 0], "partial2-phi": [0.0, 0]}

    def record(name, approx, exact):
        if abs(exact) < ROOT_FLOOR:
            return
        slot = errs[name]
        slot[0] = max(slot[0], _rel(approx, exact))
        slot[1] += 1

    for a in alphas:
        for t in ts:
            fd2 = ph.h_alpha_second_difference(a, t, ph.SECOND_DIFF_STEP)
            record("eta", t ** 3 * fd2, ph.eta(a, t))
            fd1 = ph.central_first_difference(lambda x: ph.eta(a, x), t, 1e-5)
            record("eta-prime", fd1, ph.eta_prime(a, t))

    for mu in mus:
        for rho in rhos:
            fd = ph.central_first_difference(lambda r: ph.g_lemma3(mu, r), rho, ph.FIRST_DIFF_STEP)
            record("g-prime", fd, ph.g_prime_lemma3(mu, rho))
            fd = ph.central_first_difference(lambda r: ph.phi(mu, r), rho, ph.FIRST_DIFF_STEP)
            record("partial2-phi", fd, ph.partial2_phi(mu, rho))

    return [
        LemmaCheck(f"crosscheck-{name}", worst, CROSSCHECK_RTOL, "max<=", count)
        for name, (worst, count) in errs.items()
    ]


# --- Nelder-Mead ------------------------------------------------------------


@dataclass(frozen=True)
class SearchConfig:
    restarts: int = 50
    max_evals: int = 1500
    reflection: float = 1.0
    expansion: float = 2.0
    contraction: float = 0.5
    shrink: float = 0.5
    xtol: float = 1e-10
    seed: int = 0

    def __post_init__(self):
        if self.restarts < 1 or self.max_evals < 1:
            raise ValueError("restarts and max_evals must be positive")
        if not (self.reflection > 0 and self.expansion > 1
                and 0 < self.contraction < 1 and 0 < self.shrink < 1):
            raise ValueError("Nelder-Mead coefficients out of range")


def nelder_mead(func, x0, steps, cfg: SearchConfig):
    """Minimise ``func`` from the simplex {x0, x0 + steps[i] e_i}.

    Stops when every vertex lies within ``cfg.xtol`` (max-norm) of the best
    one, or after ``cfg.max_evals`` evaluations. Returns ``(x, f, evals)``.
    """
    x0 = np.asarray(x0, dtype=float)
    dim = x0.size
    simplex = np.empty((dim + 1, dim))
    simplex[0] = x0
    for i in range(dim):
        simplex[i + 1] = x0
        simplex[i + 1, i] += steps[i]
    fvals = np.array([func(x) for x in simplex])
    evals = dim + 1

    while evals < cfg.max_evals:
        order = np.argsort(fvals, kind="stable")
        simplex = simplex[order]
        fvals = fvals[order]
        if np.max(np.abs(simplex[1:] - simplex[0])) < cfg.xtol:
            break

        centroid = simplex[:-1].mean(axis=0)
        worst = simplex[-1]
        xr = centroid + cfg.reflection * (centroid - worst)
        fr = func(xr)
        evals += 1
        if fr < fvals[0]:
            xe = centroid + cfg.reflection * cfg.expansion * (centroid - worst)
            fe = func(xe)
            evals += 1
            if fe < fr:
                simplex[-1], fvals[-1] = xe, fe
            else:
                simplex[-1], fvals[-1] = xr, fr
            continue
        if fr < fvals[-2]:
            simplex[-1], fvals[-1] = xr, fr
            continue
        if fr < fvals[-1]:
            xc = centroid + cfg.contraction * (xr - centroid)
            fc = func(xc)
            evals += 1
            if fc <= fr:
                simplex[-1], fvals[-1] = xc, fc
                continue
        else:
            xc = centroid + cfg.contraction * (worst - centroid)
            fc = func(xc)
            evals += 1
            if fc < fvals[-1]:
                simplex[-1], fvals[-1] = xc, fc
                continue
        for k in range(1, dim + 1):
            simplex[k] = simplex[0] + cfg.shrink * (simplex[k] - simplex[0])
            fvals[k] = func(simplex[k])
        evals += dim

    best = int(np.argmin(fvals))
    return simplex[best].copy(), float(fvals[best]), evals


# --- two-point counterexample search ----------------------------------------

A_MAX = 1.0 - 1e-9


class TwoPointFamily:
    """Each X_j is supported on {a_j, b_j}, 0 <= a_j < 1 <= b_j <= cap, mean 1.

    ``b_j == 1`` is the constant variable X_j = 1. Parameters are the flat
    vector (a_1..a_n, b_1..b_n); values outside the box are clipped.
    """

    def __init__(self, w: WeightVector, d: DeltaThreshold):
        self.w = w
        self.d = d
        self.n = w.n
        self.weights = [float(x) for x in w.weights]
        self.threshold = float(d.threshold)
        extremal_top = (float(w.prefix[-1]) + float(d.delta)) / self.weights[-1]
        self.cap = max(10.0 * self.n * (1.0 + float(d.delta)), 2.0 * extremal_top)

    def clip(self, x):
        a = np.clip(x[: self.n], 0.0, A_MAX)
        b = np.clip(x[self.n:], 1.0, self.cap)
        return a, b

    def atoms(self, x):
        a, b = self.clip(x)
        values, probs = [], []
        for aj, bj in zip(a.tolist(), b.tolist()):
            if bj == 1.0:
                values.append([1.0])
                probs.append([1.0])
            else:
                span = bj - aj
                values.append([bj, aj])
                probs.append([(1.0 - aj) / span, (bj - 1.0) / span])
        return values, probs

    def objective(self, x) -> float:
        values, probs = self.atoms(x)
        return _backend.enumerate_below(values, probs, self.weights, self.threshold, THRESHOLD_BAND, True)[0]

    def instance(self, x) -> Instance:
        values, probs = self.atoms(x)
        vars = [make_discrete_var(list(zip(v, p)), FLOAT) for v, p in zip(values, probs)]
        return make_instance(self.w, vars)

    def extremal_params(self, i: int) -> np.ndarray:
        denom = float(self.w.prefix[i - 1]) + float(self.d.delta)
        a = np.zeros(self.n)
        b = np.ones(self.n)
        for j in range(i):
            b[j] = denom / self.weights[j]
        return np.concatenate([a, b])

    def random_params(self, rng: np.random.Generator) -> np.ndarray:
        a = rng.uniform(0.0, 1.0, self.n)
        b = self.cap ** rng.uniform(0.0, 1.0, self.n)
        return np.concatenate([a, b])

    def steps(self, x) -> np.ndarray:
        _, b = self.clip(x)
        return np.concatenate([np.full(self.n, 0.1), np.maximum(0.1, 0.1 * b)])


@dataclass(frozen=True)
class SearchRun:
    kind: str  # "warm" or "random"
    index: int  # Samuels index for warm starts, restart number for random ones
    start_prob: float
    best_prob: float
    evals: int


@dataclass
class SearchReport:
    family: str
    best_prob: float
    samuels_bound: float
    samuels_index: int
    gap_vs_samuels: float
    best_params: list
    best_instance: Instance
    runs: list

    def to_dict(self) -> dict:
        return {
            "family": self.family,
            "best_prob": self.best_prob,
            "samuels_bound": self.samuels_bound,
            "samuels_index": self.samuels_index,
            "gap_vs_samuels": self.gap_vs_samuels,
            "best_params": self.best_params,
            "best_instance": instance_to_dict(self.best_instance),
            "runs": [asdict(r) for r in self.runs],
        }


def search_counterexample(w: WeightVector, d: DeltaThreshold, cfg: SearchConfig = SearchConfig()) -> SearchReport:
    """Minimise P(Z < T) over two-point variables with Nelder-Mead restarts.

    The first ``n`` starts sit on the equality constructions for each prefix
    index; the remaining ``restarts - n`` (if any) are random.
    """
    if w.mode != FLOAT:
        raise ValueError("search runs in float mode")
    fam = TwoPointFamily(w, d)
    bound, bound_index = samuels_bound(w, d)
    starts = [("warm", i, fam.extremal_params(i)) for i in range(1, w.n + 1)]
    children = np.random.SeedSequence(cfg.seed).spawn(cfg.restarts)
    for r in range(max(0, cfg.restarts - w.n)):
        rng = np.random.Generator(np.random.PCG64(children[r]))
        starts.append(("random", r, fam.random_params(rng)))

    runs = []
    best_x, best_f = None, math.inf
    for kind, idx, x0 in starts:
        f0 = fam.objective(x0)
        x, f, evals = nelder_mead(fam.objective, x0, fam.steps(x0), cfg)
        runs.append(SearchRun(kind, idx, f0, f, evals))
        if f < best_f:
            best_x, best_f = x, f
    a, b = fam.clip(best_x)
    params = np.concatenate([a, b])
    return SearchReport(
        family="two-point",
        best_prob=best_f,
        samuels_bound=float(bound),
        samuels_index=bound_index,
        gap_vs_samuels=best_f - float(bound),
        best_params=params.tolist(),
        best_instance=fam.instance(params),
        runs=runs,
    )


__all__ = [
    "SAMPLERS",
    "LemmaGrid",
    "LemmaReport",
    "SearchConfig",
    "SearchReport",
    "SweepConfig",
    "SweepReport",
    "derivative_crosschecks",
    "nelder_mead",
    "sample_weights",
    "search_counterexample",
    "sweep_implication",
    "sweep_lemmas",
]
