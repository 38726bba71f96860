"""P(Z < T) for Z = sum mu_i X_i: exact enumeration and a Monte Carlo oracle."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from smalldev import _backend, _purepy
from smalldev.model import RATIONAL, DeltaThreshold, Instance, encode_number

DEFAULT_BUDGET = 2**24
SUPPORT_SATURATION = 2**63 - 1
THRESHOLD_BAND = 1e-12
Z95 = 1.96
MC_BLOCK = 1 << 18


class BudgetExceeded(RuntimeError):
    pass


@dataclass(frozen=True)
class ProbResult:
    prob_below: object
    atoms_at_threshold: object
    enumerated_count: int
    pruned_count: int

    def to_dict(self) -> dict:
        return {
            "prob_below": encode_number(self.prob_below),
            "atoms_at_threshold": encode_number(self.atoms_at_threshold),
            "enumerated_count": self.enumerated_count,
            "pruned_count": self.pruned_count,
        }


@dataclass(frozen=True)
class McResult:
    estimate: float
    half_width_95: float
    samples: int
    seed: int

    def to_dict(self) -> dict:
        return {
            "estimate": self.estimate,
            "half_width_95": self.half_width_95,
            "samples": self.samples,
            "seed": self.seed,
        }


def support_size(inst: Instance) -> int:
    size = 1
    for var in inst.vars:
        size *= len(var.atoms)
        if size >= SUPPORT_SATURATION:
            return SUPPORT_SATURATION
    return size


def _ordered(inst: Instance):
    """Variables by weight descending, atoms by value descending."""
    order = sorted(range(len(inst.vars)), key=lambda k: -inst.weights.weights[k])
    weights, values, probs = [], [], []
    for k in order:
        atoms = sorted(inst.vars[k].atoms, key=lambda a: a[0], reverse=True)
        weights.append(inst.weights.weights[k])
        values.append([v for v, _ in atoms])
        probs.append([p for _, p in atoms])
    return weights, values, probs


def exact_prob_below(
    inst: Instance,
    d: DeltaThreshold,
    budget: int = DEFAULT_BUDGET,
    prune: bool = True,
) -> ProbResult:
    if inst.mode != d.mode:
        raise ValueError(f"instance is {inst.mode} but delta is {d.mode}")
    size = support_size(inst)
    if size > budget:
        raise BudgetExceeded(f"support size {size} exceeds budget {budget}")
    weights, values, probs = _ordered(inst)
    if inst.mode == RATIONAL:
        below, at, n_enum, n_pruned = _purepy.enumerate_below(
            values, probs, weights, d.threshold, Fraction(0), prune
        )
    else:
        below, at, n_enum, n_pruned = _backend.enumerate_below(
            values, probs, weights, float(d.threshold), THRESHOLD_BAND, prune
        )
    return ProbResult(below, at, int(n_enum), int(n_pruned))


def wilson_half_width(p_hat: float, n: int, z: float = Z95) -> float:
    """Half-length of the Wilson score interval."""
    z2 = z * z
    return z * math.sqrt(p_hat * (1.0 - p_hat) / n + z2 / (4.0 * n * n)) / (1.0 + z2 / n)


def _half_width(p_hat: float, n: int) -> float:
    if p_hat in (0.0, 1.0):
        # the Wilson interval then ends at p_hat; report its full length
        return 2.0 * wilson_half_width(p_hat, n)
    return Z95 * math.sqrt(p_hat * (1.0 - p_hat) / n)


def monte_carlo_below(inst: Instance, d: DeltaThreshold, samples: int, seed: int) -> McResult:
    """Estimate P(Z < T) by independent sampling of every X_i.

    Samples are drawn in fixed-size blocks, each with its own generator
    spawned from ``seed``, so the result depends only on (instance, samples,
    seed).
    """
    if samples < 100:
        raise ValueError("need at least 100 samples")
    mus = np.array([float(w) for w in inst.weights.weights])
    tables = []
    for var in inst.vars:
        vals = np.array([float(v) for v, _ in var.atoms])
        cdf = np.cumsum([float(p) for _, p in var.atoms])
        cdf[-1] = 1.0
        tables.append((vals, cdf))
    threshold = float(d.threshold)

    n_blocks = -(-samples // MC_BLOCK)
    children = np.random.SeedSequence(seed).spawn(n_blocks)
    hits = 0
    for b, child in enumerate(children):
        size = min(MC_BLOCK, samples - b * MC_BLOCK)
        rng = np.random.Generator(np.random.PCG64(child))
        z = np.zeros(size)
        for mu, (vals, cdf) in zip(mus, tables):
            idx = np.searchsorted(cdf, rng.random(size), side="right")
            z += mu * vals[idx]
        hits += int(np.count_nonzero(z < threshold))
    p_hat = hits / samples
    return McResult(p_hat, _half_width(p_hat, samples), samples, seed)
