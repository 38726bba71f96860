"""Pure-Python kernels. Reference implementation and fallback for ``_kernels``.

The arithmetic order here is mirrored exactly by the Cython module so both
backends return bit-identical floats.
"""

import math

LOG_PRODUCT_MIN_N = 33


def enumerate_below(values, probs, weights, threshold, band, prune=True):
    """Depth-first walk over the product support of independent discrete variables.

    ``values[k]`` and ``probs[k]`` hold the atoms of variable ``k``; the caller
    orders variables and atoms. Leaves with ``z < threshold - band`` count as
    below, ``|z - threshold| <= band`` as at the threshold. With ``prune`` a
    branch is dropped once its partial sum plus the smallest possible
    completion exceeds ``threshold + band``.

    Works for floats and for Fractions (use ``band = 0``).

    Returns ``(below, at, enumerated, pruned)``.
    """
    n = len(weights)
    mincomp = [0] * (n + 1)
    for k in range(n - 1, -1, -1):
        mincomp[k] = mincomp[k + 1] + weights[k] * min(values[k])
    lo = threshold - band
    hi = threshold + band
    below = 0 * threshold
    at = 0 * threshold
    enumerated = 0
    pruned = 0

    # explicit stack: (depth, partial sum, branch probability)
    stack = [(0, 0 * threshold, 1 + 0 * threshold)]
    while stack:
        k, s, p = stack.pop()
        if k == n:
            enumerated += 1
            if s < lo:
                below += p
            elif s <= hi:
                at += p
            continue
        w = weights[k]
        vals = values[k]
        ps = probs[k]
        rest = mincomp[k + 1]
        # push in reverse so atoms are visited in the given order
        for a in range(len(vals) - 1, -1, -1):
            s2 = s + w * vals[a]
            if prune and s2 + rest > hi:
                pruned += 1
                continue
            stack.append((k + 1, s2, p * ps[a]))
    return below, at, enumerated, pruned


def samuels_terms(weights, prefix, delta):
    """Float prefix products prod_{j<=i} (1 - mu_j / (sigma_i + delta)) for every i."""
    n = len(weights)
    out = [0.0] * n
    for i in range(n):
        denom = prefix[i] + delta
        if n < LOG_PRODUCT_MIN_N:
            prod = 1.0
            for j in range(i + 1):
                prod *= 1.0 - weights[j] / denom
            out[i] = prod
        else:
            acc = 0.0
            for j in range(i + 1):
                acc += math.log1p(-weights[j] / denom)
            out[i] = math.exp(acc)
    return out
