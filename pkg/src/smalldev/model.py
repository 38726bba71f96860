"""Value objects for weight vectors, thresholds, discrete variables and instances.

Two numeric modes are supported. ``"rational"`` stores every quantity as a
reduced :class:`fractions.Fraction` and demands exact equality in all checks;
``"float"`` stores finite Python floats and checks sums and means to an
absolute tolerance of ``FLOAT_TOL``.

The dataclasses themselves do no validation so that malformed objects can be
built and then audited by :func:`validate_instance`. The ``make_*`` factories
are the validated construction path.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence, Union

Number = Union[Fraction, float]

RATIONAL = "rational"
FLOAT = "float"
MODES = (RATIONAL, FLOAT)

FLOAT_TOL = 1e-12


class ModelError(ValueError):
    """Raised when an object violates one of the model invariants.

    ``code`` is the machine-readable name of the violated invariant.
    """

    def __init__(self, code: str, message: str):
        super().__init__(f"{code}: {message}")
        self.code = code


def check_mode(mode: str) -> str:
    if mode not in MODES:
        raise ModelError("bad-mode", f"unknown numeric mode {mode!r}")
    return mode


def to_number(x, mode: str) -> Number:
    """Convert ``x`` (int, float, Fraction or string) into ``mode``.

    In rational mode floats are read through their shortest decimal repr, so
    ``0.6`` becomes ``3/5`` rather than the nearest binary fraction.
    """
    check_mode(mode)
    if mode == RATIONAL:
        if isinstance(x, Fraction):
            return x
        if isinstance(x, float):
            if not math.isfinite(x):
                raise ModelError("non-finite", f"{x!r} is not finite")
            return Fraction(repr(x))
        if isinstance(x, str):
            try:
                return Fraction(x.strip())
            except (ValueError, ZeroDivisionError) as exc:
                raise ModelError("bad-number", f"cannot parse {x!r}") from exc
        return Fraction(x)
    if isinstance(x, str):
        try:
            v = float(Fraction(x.strip()))
        except (ValueError, ZeroDivisionError) as exc:
            raise ModelError("bad-number", f"cannot parse {x!r}") from exc
    else:
        v = float(x)
    if not math.isfinite(v):
        raise ModelError("non-finite", f"{x!r} is not finite")
    return v


def _close(a: Number, b: Number, mode: str) -> bool:
    if mode == RATIONAL:
        return a == b
    return abs(a - b) <= FLOAT_TOL


def _sum(values: Iterable[Number], mode: str) -> Number:
    if mode == RATIONAL:
        return sum(values, Fraction(0))
    return math.fsum(values)


@dataclass(frozen=True)
class WeightVector:
    weights: tuple
    prefix: tuple
    mode: str = FLOAT

    @property
    def n(self) -> int:
        return len(self.weights)

    @property
    def max_weight(self) -> Number:
        return self.weights[0]

    def as_floats(self) -> tuple:
        return tuple(float(x) for x in self.weights)


@dataclass(frozen=True)
class DeltaThreshold:
    delta: Number
    mode: str = FLOAT

    @property
    def threshold(self) -> Number:
        return 1 + self.delta


@dataclass(frozen=True)
class DiscreteVar:
    atoms: tuple  # ((value, prob), ...)
    mode: str = FLOAT

    @property
    def values(self) -> tuple:
        return tuple(v for v, _ in self.atoms)

    @property
    def probs(self) -> tuple:
        return tuple(p for _, p in self.atoms)

    def mean(self) -> Number:
        return _sum((v * p for v, p in self.atoms), self.mode)


@dataclass(frozen=True)
class Instance:
    weights: WeightVector
    vars: tuple

    @property
    def mode(self) -> str:
        return self.weights.mode


def make_weight_vector(raw: Sequence, normalize: bool = False, mode: str = FLOAT) -> WeightVector:
    check_mode(mode)
    if len(raw) == 0:
        raise ModelError("empty-weights", "weight list is empty")
    ws = [to_number(x, mode) for x in raw]
    for w in ws:
        if not w > 0:
            raise ModelError("nonpositive-weight", f"weight {w} is not positive")
    total = _sum(ws, mode)
    if normalize:
        ws = [w / total for w in ws]
    elif not _close(total, 1, mode):
        raise ModelError("weight-sum", f"weights sum to {total}, not 1")
    ws.sort(reverse=True)
    prefix = []
    for i in range(len(ws)):
        prefix.append(_sum(ws[: i + 1], mode))
    return WeightVector(tuple(ws), tuple(prefix), mode)


def make_delta(delta, mode: str = FLOAT) -> DeltaThreshold:
    d = to_number(delta, mode)
    if not d > 0:
        raise ModelError("nonpositive-delta", f"delta must be > 0, got {d}")
    return DeltaThreshold(d, mode)


def _var_problems(var: DiscreteVar) -> list:
    out = []
    if not var.atoms:
        return [("empty-var", "variable has no atoms")]
    mode = var.mode
    values = var.values
    if any(v < 0 for v in values):
        out.append(("negative-value", f"negative atom value in {values}"))
    if len(set(values)) != len(values):
        out.append(("duplicate-value", f"repeated atom value in {values}"))
    if any(not p > 0 for p in var.probs):
        out.append(("nonpositive-prob", f"non-positive probability in {var.probs}"))
    total = _sum(var.probs, mode)
    if not _close(total, 1, mode):
        out.append(("prob-sum-violation", f"probabilities sum to {total}"))
    mean = var.mean()
    if not _close(mean, 1, mode):
        out.append(("mean-violation", f"mean is {mean}, not 1"))
    return out


def make_discrete_var(atoms: Sequence, mode: str = FLOAT) -> DiscreteVar:
    check_mode(mode)
    var = DiscreteVar(
        tuple((to_number(v, mode), to_number(p, mode)) for v, p in atoms), mode
    )
    problems = _var_problems(var)
    if problems:
        code, msg = problems[0]
        raise ModelError(code, msg)
    return var


def constant_one(mode: str = FLOAT) -> DiscreteVar:
    return make_discrete_var([(1, 1)], mode)


@dataclass(frozen=True)
class Diagnostic:
    code: str
    message: str


def validate_instance(inst: Instance) -> list:
    """Return every invariant the instance violates; an empty list means valid."""
    diags = []
    w = inst.weights
    mode = w.mode
    if w.n == 0:
        diags.append(Diagnostic("empty-weights", "no weights"))
    if any(not x > 0 for x in w.weights):
        diags.append(Diagnostic("nonpositive-weight", "weights must be positive"))
    if any(a < b for a, b in zip(w.weights, w.weights[1:])):
        diags.append(Diagnostic("weight-order", "weights are not non-increasing"))
    if w.n and not _close(_sum(w.weights, mode), 1, mode):
        diags.append(Diagnostic("weight-sum", "weights do not sum to 1"))
    if len(inst.vars) != w.n:
        diags.append(
            Diagnostic("length-mismatch", f"{len(inst.vars)} vars for {w.n} weights")
        )
    for k, var in enumerate(inst.vars):
        if var.mode != mode:
            diags.append(Diagnostic("mode-mismatch", f"var {k} is {var.mode}, weights are {mode}"))
            continue
        for code, msg in _var_problems(var):
            diags.append(Diagnostic(code, f"var {k}: {msg}"))
    return diags


def make_instance(weights: WeightVector, vars: Sequence[DiscreteVar]) -> Instance:
    inst = Instance(weights, tuple(vars))
    diags = validate_instance(inst)
    if diags:
        raise ModelError(diags[0].code, diags[0].message)
    return inst


# --- JSON interchange -------------------------------------------------------


def encode_number(x):
    """Rationals become ``"p/q"`` strings, floats stay JSON numbers."""
    if isinstance(x, Fraction):
        return f"{x.numerator}/{x.denominator}"
    if isinstance(x, int):
        return f"{x}/1"
    return float(x)


def instance_to_dict(inst: Instance, delta: DeltaThreshold | None = None) -> dict:
    out = {
        "mode": inst.mode,
        "weights": [encode_number(w) for w in inst.weights.weights],
        "vars": [
            [{"value": encode_number(v), "prob": encode_number(p)} for v, p in var.atoms]
            for var in inst.vars
        ],
    }
    if delta is not None:
        out["delta"] = encode_number(delta.delta)
    return out


def instance_from_dict(data: dict) -> Instance:
    try:
        mode = data["mode"]
        raw_weights = data["weights"]
        raw_vars = data["vars"]
    except (KeyError, TypeError) as exc:
        raise ModelError("bad-schema", f"missing field {exc}") from exc
    check_mode(mode)
    weights = make_weight_vector(raw_weights, normalize=False, mode=mode)
    if list(weights.weights) != [to_number(x, mode) for x in raw_weights]:
        raise ModelError("weight-order", "weights in file must be non-increasing")
    vars = []
    for entry in raw_vars:
        try:
            atoms = [(a["value"], a["prob"]) for a in entry]
        except (KeyError, TypeError) as exc:
            raise ModelError("bad-schema", f"bad atom entry {entry!r}") from exc
        vars.append(make_discrete_var(atoms, mode))
    return make_instance(weights, vars)


def delta_from_dict(data: dict) -> DeltaThreshold | None:
    if "delta" not in data:
        return None
    return make_delta(data["delta"], data["mode"])


def dumps_instance(inst: Instance, delta: DeltaThreshold | None = None) -> str:
    return json.dumps(instance_to_dict(inst, delta), indent=2)


def loads_instance(text: str) -> Instance:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ModelError("bad-json", str(exc)) from exc
    return instance_from_dict(data)


def as_float_instance(inst: Instance) -> Instance:
    """Float-mode copy of an instance; prefix sums are recomputed in floats."""
    w = make_weight_vector([float(x) for x in inst.weights.weights], normalize=False, mode=FLOAT)
    vars = [
        DiscreteVar(tuple((float(v), float(p)) for v, p in var.atoms), FLOAT)
        for var in inst.vars
    ]
    return Instance(w, tuple(vars))
