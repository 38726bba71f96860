"""The function Phi(mu, rho) = log(1 - mu/(1+rho)) / mu and its companions.

Everything here is a scalar float function. Margin helpers return signed
values (positive means the inequality holds with room to spare); tolerances
are applied by the callers.
"""

from __future__ import annotations

import math
from typing import NamedTuple

E = math.e
INV_E = math.exp(-1.0)

SERIES_CUTOFF = 1e-4
DIRECT_LOG_CUTOFF = 0.5

SECOND_DIFF_STEP = 1e-4
FIRST_DIFF_STEP = 1e-6


class PhiPoint(NamedTuple):
    mu: float
    rho: float


class AlphaSlice(NamedTuple):
    alpha: float


class DomainError(ValueError):
    pass


def _check_point(mu: float, rho: float) -> None:
    if not (0.0 <= mu <= 1.0) or not rho > 0.0:
        raise DomainError(f"(mu={mu}, rho={rho}) outside [0,1] x (0, inf)")


def _check_open_mu(mu: float, rho: float) -> None:
    if not (0.0 < mu < 1.0) or not rho > 0.0:
        raise DomainError(f"need 0 < mu < 1 and rho > 0, got ({mu}, {rho})")


def _check_alpha(alpha: float) -> None:
    if not alpha > 0.0:
        raise DomainError(f"alpha must be positive, got {alpha}")


def phi_series(s: float) -> float:
    """log(1-s)/s on [0, 1), equal to -1 at s = 0.

    Below ``SERIES_CUTOFF`` the power series -(1 + s/2 + s^2/3 + s^3/4) is
    used; the first omitted term is below 2e-17 there.
    """
    if not (0.0 <= s < 1.0):
        raise DomainError(f"s={s} outside [0, 1)")
    if s < SERIES_CUTOFF:
        return -(1.0 + s * (0.5 + s * (1.0 / 3.0 + s * 0.25)))
    return math.log1p(-s) / s


def phi(mu: float, rho: float) -> float:
    _check_point(mu, rho)
    scale = 1.0 + rho
    s = mu / scale
    if s < DIRECT_LOG_CUTOFF:
        return phi_series(s) / scale
    # 1 - s = ((1 - mu) + rho) / (1 + rho); forming s first would cost eps/(1-s)
    return (math.log((1.0 - mu) + rho) - math.log1p(rho)) / mu


def h_alpha(alpha: float, t: float) -> float:
    """Phi along the ray rho = alpha * mu, extended by its limit -1 at t = 0."""
    _check_alpha(alpha)
    if not (0.0 <= t <= 1.0):
        raise DomainError(f"t={t} outside [0, 1]")
    if t == 0.0:
        return -1.0
    return phi(t, alpha * t)


def _check_open_t(t: float) -> None:
    if not (0.0 < t < 1.0):
        raise DomainError(f"t={t} outside (0, 1)")


def eta(alpha: float, t: float) -> float:
    """Closed form of t^3 * h_alpha''(t)."""
    _check_alpha(alpha)
    _check_open_t(t)
    a = alpha
    num = t * (2.0 + (6.0 * a - 3.0) * t + 4.0 * (a * a - a) * t * t)
    den = (1.0 - t + a * t) ** 2 * (1.0 + a * t) ** 2
    return num / den + 2.0 * math.log1p(-t / (1.0 + a * t))


def eta_prime(alpha: float, t: float) -> float:
    _check_alpha(alpha)
    _check_open_t(t)
    a = alpha
    inner = 1.0 - 2.0 * a + 2.0 * (a - a * a) * t
    num = t * t * (1.0 + 3.0 * inner * inner)
    den = 2.0 * (1.0 - t + a * t) ** 3 * (1.0 + a * t) ** 3
    return -num / den


def f_lemma1(t: float) -> float:
    """(1 + t/(e-1)) (1 - e^-t) - t, non-negative on [0, 1]."""
    if not (0.0 <= t <= 1.0):
        raise DomainError(f"t={t} outside [0, 1]")
    return (1.0 + t / (E - 1.0)) * -math.expm1(-t) - t


def check_lemma1(t: float) -> float:
    """Margin of 1 - t/(1 + t/(e-1)) >= e^-t."""
    if not (0.0 <= t <= 1.0):
        raise DomainError(f"t={t} outside [0, 1]")
    return 1.0 - t / (1.0 + t / (E - 1.0)) - math.exp(-t)


def lemma3_floor(mu: float, rho: float) -> float:
    """log(min(rho/(mu+rho), 1/e))."""
    return min(math.log(rho / (mu + rho)), -1.0)


def check_lemma3(mu: float, rho: float) -> float:
    """Margin of Phi(mu, rho) >= log(min(rho/(mu+rho), 1/e))."""
    _check_point(mu, rho)
    return phi(mu, rho) - lemma3_floor(mu, rho)


def g_lemma3(mu: float, rho: float) -> float:
    """Phi(mu, rho) - log(rho/(mu+rho)) for fixed mu, as a function of rho."""
    _check_point(mu, rho)
    return phi(mu, rho) - math.log(rho / (mu + rho))


def g_prime_lemma3(mu: float, rho: float) -> float:
    _check_open_mu(mu, rho)
    num = (1.0 - mu) * ((1.0 + rho) * mu - rho * rho)
    den = rho * (1.0 + rho) * (1.0 + rho - mu) * (mu + rho)
    return -num / den


def partial2_phi(mu: float, rho: float) -> float:
    """d Phi / d rho = 1 / ((1+rho)(1+rho-mu))."""
    _check_open_mu(mu, rho)
    return 1.0 / ((1.0 + rho) * (1.0 + rho - mu))


# --- finite-difference probes -----------------------------------------------


def central_first_difference(f, x: float, step: float = FIRST_DIFF_STEP) -> float:
    return (f(x + step) - f(x - step)) / (2.0 * step)


def central_second_difference(f, x: float, step: float = SECOND_DIFF_STEP) -> float:
    return (f(x + step) - 2.0 * f(x) + f(x - step)) / (step * step)


def h_alpha_second_difference(alpha: float, t: float, step: float = SECOND_DIFF_STEP) -> float:
    """Central second difference of h_alpha at t; t must be at least ``step`` from 0 and 1."""
    return central_second_difference(lambda x: h_alpha(alpha, x), t, step)
