import itertools

import pytest

from smalldev import _purepy

try:
    from smalldev import _kernels
except ImportError:  # extension not built
    _kernels = None

BACKENDS = [pytest.param(_purepy, id="python")]
if _kernels is not None:
    BACKENDS.append(pytest.param(_kernels, id="cython"))


@pytest.fixture(params=BACKENDS)
def kernel(request):
    return request.param


def brute_force_below(inst, threshold, band=0):
    """Enumerate the full product support without pruning or ordering tricks."""
    below = 0 * threshold
    at = 0 * threshold
    for combo in itertools.product(*(var.atoms for var in inst.vars)):
        z = sum((w * v for w, (v, _) in zip(inst.weights.weights, combo)), 0 * threshold)
        p = 1 + 0 * threshold
        for _, q in combo:
            p *= q
        if z < threshold - band:
            below += p
        elif z <= threshold + band:
            at += p
    return below, at


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance") or sys.modules.get("tests.test_acceptance")
    lines = getattr(mod, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines):
            terminalreporter.write_line(line)
