"""Integration on (0, 1] with an endpoint-singularity protocol.

Every improper integral is computed on a ladder of truncated domains
[eps, 1] for a decreasing cutoff sequence; behaviour is classified from the
increments between consecutive cutoffs:

  * increments shrinking geometrically -> the missing tail below the last
    cutoff is summed by geometric extrapolation (exact for power tails) and
    the result is `converged` when the remaining error estimate meets tol;
  * increments flat or growing like a power of eps -> `divergent_suspected`,
    with the fitted integrand exponent attached (slope - 1, so a flat
    increment ladder maps to the borderline exponent -1);
  * anything else -> `cutoff_limited`.

Panel integration on each [a, b] segment is delegated to scipy's adaptive
quadrature; the independent composite-Simpson cross-checks live in the test
suite, not here.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy import integrate as _scipy_integrate

__all__ = [
    "IntegralResult",
    "EvaluationError",
    "CONVERGED",
    "DIVERGENT",
    "CUTOFF_LIMITED",
    "DEFAULT_CUTOFFS",
    "integrate",
    "p_norm",
    "holder_conjugate_check",
    "endpoint_infimum",
    "endpoint_supremum",
]

CONVERGED = "converged"
DIVERGENT = "divergent_suspected"
CUTOFF_LIMITED = "cutoff_limited"

DEFAULT_CUTOFFS = tuple(10.0 ** (-k) for k in range(2, 9))  # 1e-2 .. 1e-8


class EvaluationError(ValueError):
    """Integrand raised at some abscissa; message carries the point."""


@dataclass
class IntegralResult:
    value: float
    abs_error_estimate: float
    status: str
    cutoff_trace: list = field(default_factory=list)
    exponent_estimate: float | None = None

    @property
    def converged(self) -> bool:
        return self.status == CONVERGED

    def to_dict(self) -> dict:
        return {
            "value": self.value,
            "abs_error_estimate": self.abs_error_estimate,
            "status": self.status,
            "exponent_estimate": self.exponent_estimate,
            "cutoff_trace": [[e, v] for e, v in self.cutoff_trace],
        }


def _checked(f: Callable) -> Callable:
    def g(x: float) -> float:
        try:
            return float(f(x))
        except EvaluationError:
            raise
        except Exception as exc:
            raise EvaluationError(f"integrand failed at t={x!r}: {exc}") from exc

    return g


def _validate_cutoffs(cutoffs: Sequence[float]) -> list:
    eps = list(cutoffs)
    if not eps:
        raise ValueError("need at least one cutoff")
    if any(not (0.0 < e < 1.0) for e in eps):
        raise ValueError("cutoffs must lie in (0, 1)")
    if any(b >= a for a, b in zip(eps, eps[1:])):
        raise ValueError("cutoffs must decrease strictly")
    return eps


def _panel(f: Callable, a: float, b: float, tol: float) -> tuple:
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", _scipy_integrate.IntegrationWarning)
        val, err = _scipy_integrate.quad(
            f, a, b, epsabs=tol * 1e-2, epsrel=1e-13, limit=200
        )
    return val, err


def _fit_increment_slope(eps: Sequence[float], incs: Sequence[float]):
    pts = [(e, abs(v)) for e, v in zip(eps, incs) if abs(v) > 0.0]
    if len(pts) < 2:
        return None
    x = np.log10([p[0] for p in pts])
    y = np.log10([p[1] for p in pts])
    return float(np.polyfit(x, y, 1)[0])


def integrate(
    f: Callable,
    tol: float = 1e-10,
    cutoffs: Sequence[float] = DEFAULT_CUTOFFS,
) -> IntegralResult:
    """Integral of f over (0, 1] via the truncated-domain ladder."""
    eps = _validate_cutoffs(cutoffs)
    g = _checked(f)

    value, quad_err = _panel(g, eps[0], 1.0, tol)
    trace = [(eps[0], value)]
    incs = []
    for lo, hi in zip(eps[1:], eps[:-1]):
        seg, err = _panel(g, lo, hi, tol)
        value += seg
        quad_err += err
        incs.append(seg)
        trace.append((lo, value))

    if not incs:
        status = CONVERGED if quad_err <= tol else CUTOFF_LIMITED
        return IntegralResult(value, quad_err, status, trace)

    scale = max(1.0, abs(value))
    tiny = 1e-15 * scale
    if all(abs(v) <= max(tol, tiny) for v in incs):
        err = quad_err + abs(incs[-1])
        status = CONVERGED if err <= max(tol, tiny) else CUTOFF_LIMITED
        return IntegralResult(value, err, status, trace)

    last, prev = incs[-1], incs[-2] if len(incs) >= 2 else incs[-1]
    same_sign = all(v > 0 for v in incs[-3:]) or all(v < 0 for v in incs[-3:])

    if same_sign and prev != 0.0 and abs(last) < 0.95 * abs(prev):
        # geometrically shrinking tail: extrapolate it
        ratio = last / prev
        tail = last * ratio / (1.0 - ratio)
        model_dev = abs(tail)
        if len(incs) >= 3 and incs[-3] != 0.0:
            predicted = incs[-2] * (incs[-2] / incs[-3])
            model_dev = abs(last - predicted) / (1.0 - abs(ratio))
        err = quad_err + model_dev + tiny
        status = CONVERGED if err <= max(tol, tiny) else CUTOFF_LIMITED
        return IntegralResult(value + tail, err, status, trace)

    slope = _fit_increment_slope(eps[1:], incs)
    if slope is not None and slope <= 0.05 and abs(last) >= abs(incs[0]) * 0.5:
        return IntegralResult(
            value,
            abs(last),
            DIVERGENT,
            trace,
            exponent_estimate=slope - 1.0,
        )
    return IntegralResult(
        value,
        quad_err + abs(last),
        CUTOFF_LIMITED,
        trace,
        exponent_estimate=None if slope is None else slope - 1.0,
    )


# ---------------------------------------------------------------------------
# extrema on the truncated domains (sup for the L^inf norm, inf for the
# declared-lower-bound audit)
# ---------------------------------------------------------------------------


def _extremum_on(f: Callable, lo: float, tol: float, mode: str) -> float:
    pick = np.max if mode == "max" else np.min
    n = 2049
    last = None
    best = None
    while n <= (1 << 18) + 1:
        grid = np.unique(
            np.concatenate([np.linspace(lo, 1.0, n), np.geomspace(lo, 1.0, n)])
        )
        vals = np.asarray(f(grid), dtype=float)
        best = float(pick(vals))
        if last is not None and abs(best - last) <= tol * max(1.0, abs(best)):
            return best
        last = best
        n = 2 * (n - 1) + 1
    return best


def _classify_levels(eps: list, levels: list, tol: float, mode: str) -> IntegralResult:
    trace = list(zip(eps, levels))
    value = levels[-1]
    if len(levels) == 1:
        return IntegralResult(value, 0.0, CONVERGED, trace)
    delta = abs(levels[-1] - levels[-2])
    if delta <= tol * max(1.0, abs(value)):
        return IntegralResult(value, delta, CONVERGED, trace)
    moved = [
        (e, abs(v)) for e, v in zip(eps, levels) if abs(v) > 0.0
    ]
    slope = None
    if len(moved) >= 2:
        x = np.log10([p[0] for p in moved])
        y = np.log10([p[1] for p in moved])
        slope = float(np.polyfit(x, y, 1)[0])
    growing = mode == "max" and levels[-1] > levels[0] * (1.0 + 1e-9)
    if growing and slope is not None and slope <= -0.01:
        return IntegralResult(value, delta, DIVERGENT, trace, exponent_estimate=slope)
    return IntegralResult(value, delta, CUTOFF_LIMITED, trace, exponent_estimate=slope)


def endpoint_supremum(
    f: Callable, tol: float = 1e-10, cutoffs: Sequence[float] = DEFAULT_CUTOFFS
) -> IntegralResult:
    """sup of f over [eps, 1] across the cutoff ladder."""
    eps = _validate_cutoffs(cutoffs)
    levels = [_extremum_on(f, e, tol, "max") for e in eps]
    return _classify_levels(eps, levels, tol, "max")


def endpoint_infimum(
    f: Callable, tol: float = 1e-10, cutoffs: Sequence[float] = DEFAULT_CUTOFFS
) -> IntegralResult:
    """inf of f over [eps, 1] across the cutoff ladder (nonincreasing in eps)."""
    eps = _validate_cutoffs(cutoffs)
    levels = [_extremum_on(f, e, tol, "min") for e in eps]
    return _classify_levels(eps, levels, tol, "min")


def p_norm(
    f: Callable,
    p: float,
    tol: float = 1e-10,
    cutoffs: Sequence[float] = DEFAULT_CUTOFFS,
) -> IntegralResult:
    """L^p norm of f on (0, 1]; p = inf uses grid-refined suprema of |f|."""
    if not p >= 1:
        raise ValueError("p must be >= 1 (or infinity)")
    if math.isinf(p):
        return endpoint_supremum(lambda t: np.abs(np.asarray(f(t), dtype=float)), tol, cutoffs)

    def fp(t):
        return np.abs(np.asarray(f(t), dtype=float)) ** p

    inner = integrate(fp, tol=tol, cutoffs=cutoffs)
    if inner.value < 0.0:  # |f|^p integration cannot go negative except rounding
        inner.value = 0.0
    norm = inner.value ** (1.0 / p)
    if inner.value > 0.0:
        err = inner.abs_error_estimate * norm / (p * inner.value)
    else:
        err = inner.abs_error_estimate ** (1.0 / p)
    trace = [(e, max(v, 0.0) ** (1.0 / p)) for e, v in inner.cutoff_trace]
    return IntegralResult(norm, err, inner.status, trace, inner.exponent_estimate)


def holder_conjugate_check(p_list: Sequence[float], q: float, tol: float = 1e-12) -> bool:
    """True iff sum(1/p_i) + 1/q == 1 within tol (infinities contribute 0)."""
    total = sum(0.0 if math.isinf(p) else 1.0 / p for p in p_list)
    total += 0.0 if math.isinf(q) else 1.0 / q
    return abs(total - 1.0) <= tol
