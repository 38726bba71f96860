"""Instances attaining equality in the Samuels and Feige bounds."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from smalldev.bounds import samuels_term
from smalldev.exact import exact_prob_below
from smalldev.model import (
    RATIONAL,
    DeltaThreshold,
    Instance,
    WeightVector,
    constant_one,
    encode_number,
    make_discrete_var,
    make_instance,
    make_weight_vector,
)


def _two_point(top, p_top, mode):
    """X in {0, top} with P(X = top) = p_top = 1/top."""
    if not 0 < p_top < 1:
        raise AssertionError(f"degenerate two-point mass {p_top}")
    return make_discrete_var([(top, p_top), (0, 1 - p_top)], mode)


def feige_extremal(w: WeightVector, d: DeltaThreshold) -> Instance:
    big_m = w.max_weight
    top = (d.delta + big_m) / big_m
    first = _two_point(top, big_m / (d.delta + big_m), w.mode)
    return make_instance(w, [first] + [constant_one(w.mode)] * (w.n - 1))


def samuels_extremal(w: WeightVector, d: DeltaThreshold, i: int) -> Instance:
    """X_j two-point on {0, (sigma_i + delta)/mu_j} for j <= i, X_j = 1 beyond."""
    if not 1 <= i <= w.n:
        raise IndexError(f"index {i} outside 1..{w.n}")
    denom = w.prefix[i - 1] + d.delta
    vars = []
    for j, mu in enumerate(w.weights, start=1):
        if j <= i:
            vars.append(_two_point(denom / mu, mu / denom, w.mode))
        else:
            vars.append(constant_one(w.mode))
    return make_instance(w, vars)


def iid_extremal(n: int, d: DeltaThreshold) -> Instance:
    if n < 1:
        raise ValueError("n must be at least 1")
    w = make_weight_vector([1] * n, normalize=True, mode=d.mode)
    top = n * (1 + d.delta)
    var = _two_point(top, 1 / top, d.mode)
    return make_instance(w, [var] * n)


def iid_closed_form(n: int, delta):
    """(1 - 1/(n(1+delta)))^n, exact for Fraction delta."""
    if isinstance(delta, float):
        return math.exp(n * math.log1p(-1.0 / (n * (1.0 + delta))))
    return (1 - 1 / (n * (1 + delta))) ** n


def iid_limit(d: DeltaThreshold) -> float:
    """Limit of the iid equality value as n grows: exp(-1/(1+delta))."""
    return math.exp(-1.0 / (1.0 + float(d.delta)))


@dataclass(frozen=True)
class EqualityRow:
    index: int  # 0 marks the Feige construction
    exact: object
    expected: object
    passed: bool

    def to_dict(self) -> dict:
        return {
            "index": self.index,
            "exact": encode_number(self.exact),
            "expected": encode_number(self.expected),
            "passed": self.passed,
        }


@dataclass(frozen=True)
class EqualityReport:
    rows: tuple = field(default_factory=tuple)

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.rows)

    def to_dict(self) -> dict:
        return {"passed": self.passed, "rows": [r.to_dict() for r in self.rows]}


def verify_extremal_equality(w: WeightVector, d: DeltaThreshold) -> EqualityReport:
    """Exact engine against closed forms for every Samuels index and the Feige case."""
    if w.mode != RATIONAL or d.mode != RATIONAL:
        raise ValueError("equality checks need rational mode")
    rows = []
    fe = exact_prob_below(feige_extremal(w, d), d).prob_below
    want = d.delta / (d.delta + w.max_weight)
    rows.append(EqualityRow(0, fe, want, fe == want))
    for i in range(1, w.n + 1):
        got = exact_prob_below(samuels_extremal(w, d, i), d).prob_below
        want = samuels_term(w, d, i)
        rows.append(EqualityRow(i, got, want, got == want))
    return EqualityReport(tuple(rows))
