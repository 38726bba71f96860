"""Samuels' prefix-product bound, Feige's bound, and the chain linking them.

The Samuels denominator T - sum_{k>i} mu_k is always formed as
sigma_i + delta from prefix sums; subtracting the tail from T would cancel
badly when sigma_i is small.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from fractions import Fraction

from smalldev import _backend
from smalldev.model import RATIONAL, DeltaThreshold, WeightVector, encode_number
from smalldev.phi import INV_E, phi

CHAIN_LABELS = ("sum-identity", "phi-monotone", "concavity-min", "lemma3-floor")


@dataclass(frozen=True)
class BoundReport:
    samuels: object
    argmin_index: int
    feige: object
    implication_margin: float
    per_index_terms: tuple

    def to_dict(self) -> dict:
        return {
            "samuels": encode_number(self.samuels),
            "argmin_index": self.argmin_index,
            "feige": encode_number(self.feige),
            "implication_margin": self.implication_margin,
            "per_index_terms": [encode_number(x) for x in self.per_index_terms],
        }


@dataclass(frozen=True)
class ChainStep:
    label: str
    lhs: float
    rhs: float
    margin: float


@dataclass(frozen=True)
class ChainReport:
    index: int
    sigma_star: float
    steps: tuple

    def margins(self) -> dict:
        return {s.label: s.margin for s in self.steps}

    def to_dict(self) -> dict:
        return {
            "index": self.index,
            "sigma_star": self.sigma_star,
            "step_values": [asdict(s) for s in self.steps],
        }


def _check_mode(w: WeightVector, d: DeltaThreshold) -> None:
    if w.mode != d.mode:
        raise ValueError(f"weights are {w.mode} but delta is {d.mode}")


def _check_index(w: WeightVector, i: int) -> None:
    if not 1 <= i <= w.n:
        raise IndexError(f"index {i} outside 1..{w.n}")


def samuels_term(w: WeightVector, d: DeltaThreshold, i: int):
    """prod_{j<=i} (1 - mu_j / (sigma_i + delta)); ``i`` is 1-based."""
    _check_mode(w, d)
    _check_index(w, i)
    denom = w.prefix[i - 1] + d.delta
    if w.mode == RATIONAL:
        prod = Fraction(1)
        for mu in w.weights[:i]:
            prod *= 1 - mu / denom
        return prod
    return samuels_terms(w, d)[i - 1]


def samuels_terms(w: WeightVector, d: DeltaThreshold) -> list:
    _check_mode(w, d)
    if w.mode == RATIONAL:
        out = []
        for i in range(1, w.n + 1):
            denom = w.prefix[i - 1] + d.delta
            prod = Fraction(1)
            for mu in w.weights[:i]:
                prod *= 1 - mu / denom
            out.append(prod)
        return out
    return _backend.samuels_terms(w.weights, w.prefix, d.delta)


def _argmin(terms) -> int:
    best = 0
    for k in range(1, len(terms)):
        if terms[k] < terms[best]:
            best = k
    return best + 1


def samuels_bound(w: WeightVector, d: DeltaThreshold):
    """Return ``(value, argmin_index)``; ties go to the smallest index."""
    terms = samuels_terms(w, d)
    i = _argmin(terms)
    return terms[i - 1], i


def feige_bound(max_weight, d: DeltaThreshold):
    """min(delta/(delta + M), 1/e).

    In rational mode the first branch stays an exact Fraction when it wins.
    """
    if not 0 < max_weight <= 1:
        raise ValueError(f"max weight {max_weight} outside (0, 1]")
    ratio = d.delta / (d.delta + max_weight)
    return ratio if ratio <= INV_E else INV_E


def implication_margin(w: WeightVector, d: DeltaThreshold) -> BoundReport:
    terms = samuels_terms(w, d)
    i = _argmin(terms)
    sam = terms[i - 1]
    fei = feige_bound(w.max_weight, d)
    return BoundReport(
        samuels=sam,
        argmin_index=i,
        feige=fei,
        implication_margin=float(sam - fei) if isinstance(fei, Fraction) else float(sam) - fei,
        per_index_terms=tuple(terms),
    )


def _step(label, lhs, rhs) -> ChainStep:
    return ChainStep(label, lhs, rhs, lhs - rhs)


def chain_at(w: WeightVector, d: DeltaThreshold, i: int, term=None) -> ChainReport:
    """Evaluate the four-step inequality chain at prefix index ``i`` (1-based)."""
    _check_index(w, i)
    mus = w.as_floats()
    sigma = float(w.prefix[i - 1])
    delta = float(d.delta)
    big_m = mus[0]
    if term is None:
        term = samuels_term(w, d, i)
    log_term = math.log(float(term))

    weighted = math.fsum((mu / sigma) * phi(min(mu / sigma, 1.0), delta / sigma) for mu in mus[:i])
    at_max = phi(min(big_m / sigma, 1.0), delta / sigma)
    endpoints = min(phi(1.0, delta / big_m), phi(big_m, delta))
    floor = math.log(float(feige_bound(w.max_weight, d)))

    steps = (
        _step(CHAIN_LABELS[0], log_term, weighted),
        _step(CHAIN_LABELS[1], weighted, at_max),
        _step(CHAIN_LABELS[2], at_max, endpoints),
        _step(CHAIN_LABELS[3], endpoints, floor),
    )
    return ChainReport(i, sigma, steps)


def proof_chain(w: WeightVector, d: DeltaThreshold, all_indices: bool = False):
    """Chain at the minimising index, or a list of chains for every index."""
    terms = samuels_terms(w, d)
    if all_indices:
        return [chain_at(w, d, i, terms[i - 1]) for i in range(1, w.n + 1)]
    i = _argmin(terms)
    return chain_at(w, d, i, terms[i - 1])
