"""Shared fixtures and the independent brute-force oracles.

The oracles here deliberately avoid the library's quadrature module: they
are the second route for every dual-route check, so they stay primitive
(composite Simpson / midpoint Riemann on dense uniform grids).
"""

import numpy as np
import pytest

from annulus_radial import KernelParams, TransformSpec, WeightSpec
from annulus_radial.exprlang import parse


def composite_simpson(f, a, b, panels=1_000_000):
    """Plain composite Simpson rule with vectorized evaluation."""
    if panels % 2:
        panels += 1
    x = np.linspace(a, b, panels + 1)
    y = np.asarray(f(x), dtype=float)
    h = (b - a) / panels
    return h / 3.0 * (y[0] + y[-1] + 4.0 * y[1:-1:2].sum() + 2.0 * y[2:-2:2].sum())


def riemann_midpoint(f, a, b, n=1_000_000):
    x = a + (np.arange(n) + 0.5) * (b - a) / n
    return float(np.sum(np.asarray(f(x), dtype=float)) * (b - a) / n)


@pytest.fixture(scope="session")
def default_params():
    return KernelParams.default()


@pytest.fixture(scope="session")
def asym_params():
    # asymmetric but admissible; diagonal is genuinely non-constant
    return KernelParams(2.0, 1.0, 1.0, 3.0, 1.5, 3)


@pytest.fixture(scope="session")
def transform():
    return TransformSpec(1.0, 3)


@pytest.fixture(scope="session")
def synthetic_unit_weight():
    return WeightSpec(synthetic_override=parse("1", "t"), eval_floor=1e-9)


@pytest.fixture(scope="session")
def example1_weights():
    return WeightSpec(
        factors=(parse("1/(t^2+1)", "t"), parse("1/sqrt(t+2)", "t")),
        p_exponents=(2.0, 3.0),
    )


@pytest.fixture(scope="session")
def example4_weights():
    return WeightSpec(
        factors=(parse("1/(t+1)", "t"), parse("1/(t+1)", "t")),
        p_exponents=(2.0, 2.0),
    )


@pytest.fixture(scope="session")
def example4_nonlinearities():
    return (parse("cos(u)/10000", "u"), parse("u/(10000*(u+1))", "u"))
