"""Kelvin-type change of variables and the transformed weight.

The radial variable r > 0 maps to s = (r/r0)^(2-N), sending the annulus edge
r = r0 to s = 1 and r -> infinity to s -> 0.  In the s variable the equation's
weight becomes

    ell(s) = r0^2/(N-2)^2 * s^(2(N-1)/(2-N)) * prod_i f_i(r0 * s^(1/(2-N)))

where f_i are the raw radial factors.  The power s^(2(N-1)/(2-N)) is singular
at s = 0 (s^-4 for N = 3), so every evaluation is restricted to a positive
floor.  A synthetic override replaces the whole weight bundle with a given
omega(s), which keeps the solver and its oracles testable on integrable
weights.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .exprlang import Expr
from .kernel import DomainError, KernelParams, kernel_diag

__all__ = [
    "TransformSpec",
    "WeightSpec",
    "EstimationUnstableWarning",
    "kelvin_s",
    "kelvin_r",
    "singular_power",
    "transformed_factor",
    "factor_product",
    "weight_ell",
    "xi_hat",
    "upsilon",
    "singularity_exponent",
    "DEFAULT_EVAL_FLOOR",
]

DEFAULT_EVAL_FLOOR = 1e-8

# default cutoff ladder shared with the quadrature module
_FIT_CUTOFFS = tuple(10.0 ** (-k) for k in range(2, 9))


class EstimationUnstableWarning(UserWarning):
    """Log-log exponent fit had a large residual."""


@dataclass(frozen=True)
class TransformSpec:
    """Radial scale r0, dimension N, optional annulus radii for reporting."""

    r0: float = 1.0
    N: int = 3
    R1: float | None = None
    R2: float | None = None

    def __post_init__(self):
        if self.r0 <= 0:
            raise ValueError("r0 must be positive")
        if int(self.N) != self.N or self.N < 3:
            raise ValueError("N must be an integer >= 3 (Kelvin exponent 2-N < 0)")
        if (self.R1 is None) != (self.R2 is None):
            raise ValueError("R1 and R2 must be given together")
        if self.R1 is not None and not (0 < self.R1 < self.R2):
            raise ValueError("annulus radii need 0 < R1 < R2")

    @classmethod
    def from_kernel(cls, p: KernelParams, R1=None, R2=None) -> "TransformSpec":
        return cls(r0=p.r0, N=p.N, R1=R1, R2=R2)


@dataclass(frozen=True)
class WeightSpec:
    """Factor list with summability exponents, or a synthetic override.

    factors are expressions in the raw radial variable t; they are evaluated
    in the transformed variable through t = r0 * s^(1/(2-N)).  lower_bounds
    are the declared per-factor infima (when the user asserts them);
    synthetic_override is an expression in t that replaces the whole weight.
    """

    factors: tuple | None = None
    p_exponents: tuple = ()
    lower_bounds: tuple | None = None
    synthetic_override: Expr | Callable | None = None
    eval_floor: float = DEFAULT_EVAL_FLOOR

    def __post_init__(self):
        if (self.factors is None) == (self.synthetic_override is None):
            raise ValueError(
                "exactly one of factors / synthetic_override must drive the weight"
            )
        if self.factors is not None:
            if len(self.factors) < 1:
                raise ValueError("need at least one factor")
            if len(self.p_exponents) != len(self.factors):
                raise ValueError("p_exponents must match factors one-to-one")
        elif self.p_exponents:
            raise ValueError("synthetic weight takes no summability exponents")
        for p in self.p_exponents:
            if not p >= 1:
                raise ValueError("every summability exponent must be >= 1")
        if self.lower_bounds is not None:
            if self.factors is None or len(self.lower_bounds) != len(self.factors):
                raise ValueError("lower_bounds must match factors one-to-one")
            for lb in self.lower_bounds:
                if not lb > 0:
                    raise ValueError("declared lower bounds must be positive")
        if not (0 < self.eval_floor < 1):
            raise ValueError("eval_floor must lie in (0, 1)")

    @property
    def synthetic(self) -> bool:
        return self.synthetic_override is not None

    @property
    def m(self) -> int:
        return 1 if self.synthetic else len(self.factors)


def kelvin_s(r, ts: TransformSpec):
    """s = (r/r0)^(2-N); strictly decreasing in r for N >= 3."""
    r = np.asarray(r, dtype=float)
    if (r <= 0).any():
        raise DomainError("radial coordinate must be positive")
    out = (r / ts.r0) ** (2.0 - ts.N)
    return float(out) if out.ndim == 0 else out


def kelvin_r(s, ts: TransformSpec):
    """Inverse map r = r0 * s^(1/(2-N)); s = 0 maps to infinity and is rejected."""
    s = np.asarray(s, dtype=float)
    if (s <= 0).any():
        raise DomainError("transformed coordinate must be positive")
    out = ts.r0 * s ** (1.0 / (2.0 - ts.N))
    return float(out) if out.ndim == 0 else out


def singular_power(ts: TransformSpec) -> float:
    """Exponent 2(N-1)/(2-N) of the weight's singular power (-4 for N=3)."""
    return 2.0 * (ts.N - 1.0) / (2.0 - ts.N)


def _check_floor(s: np.ndarray, floor: float):
    if (s < floor).any() or (s > 1.0).any():
        raise DomainError(
            f"weight evaluation restricted to [{floor:g}, 1]"
        )


def transformed_factor(ws: WeightSpec, i: int, s, ts: TransformSpec):
    """Factor i composed with the inverse map: f_i(r0 * s^(1/(2-N)))."""
    if ws.synthetic:
        raise ValueError("synthetic weight has no factor list")
    s_arr = np.asarray(s, dtype=float)
    rr = ts.r0 * s_arr ** (1.0 / (2.0 - ts.N))
    out = ws.factors[i](rr)
    return out


def factor_product(ws: WeightSpec, s, ts: TransformSpec):
    """Product of all transformed factors at s."""
    s_arr = np.asarray(s, dtype=float)
    out = np.ones(s_arr.shape)
    for i in range(len(ws.factors)):
        out = out * np.asarray(transformed_factor(ws, i, s_arr, ts))
    return float(out) if out.ndim == 0 else out


def weight_ell(s, ws: WeightSpec, ts: TransformSpec):
    """Full transformed weight ell(s), or omega(s) in synthetic mode."""
    s_arr = np.asarray(s, dtype=float)
    _check_floor(s_arr, ws.eval_floor)
    if ws.synthetic:
        out = np.asarray(ws.synthetic_override(s_arr))
    else:
        pref = ts.r0 ** 2 / (ts.N - 2.0) ** 2
        out = pref * s_arr ** singular_power(ts) * factor_product(ws, s_arr, ts)
    return float(out) if out.ndim == 0 else out


def xi_hat(t, params: KernelParams) -> float:
    """Kernel diagonal times the singular power: Xi(t,t) * t^(2(N-1)/(2-N))."""
    t_arr = np.asarray(t, dtype=float)
    if (t_arr <= 0).any() or (t_arr > 1).any():
        raise DomainError("xi_hat is defined on (0, 1]")
    sp = 2.0 * (params.N - 1.0) / (2.0 - params.N)
    out = kernel_diag(params, t_arr) * t_arr ** sp
    return float(out) if out.ndim == 0 else out


def upsilon(t, params: KernelParams, ws: WeightSpec, ts: TransformSpec):
    """Diagonal-weighted kernel: xi_hat(t) * prod factors, or Xi(t,t)*omega(t)."""
    t_arr = np.asarray(t, dtype=float)
    _check_floor(t_arr, ws.eval_floor)
    if ws.synthetic:
        out = kernel_diag(params, t_arr) * np.asarray(ws.synthetic_override(t_arr))
    else:
        out = np.asarray(xi_hat(t_arr, params)) * factor_product(ws, t_arr, ts)
    return float(out) if out.ndim == 0 else out


def weight_shape(ws: WeightSpec, ts: TransformSpec) -> Callable:
    """The weight bundle without the kernel or the r0^2/(N-2)^2 prefactor:
    t^(2(N-1)/(2-N)) * prod factors, or omega in synthetic mode."""
    if ws.synthetic:
        return lambda t: np.asarray(ws.synthetic_override(np.asarray(t, dtype=float)))
    sp = singular_power(ts)

    def shape(t):
        t_arr = np.asarray(t, dtype=float)
        return t_arr ** sp * factor_product(ws, t_arr, ts)

    return shape


def singularity_exponent(
    ws: WeightSpec,
    ts: TransformSpec,
    cutoffs: Sequence[float] = _FIT_CUTOFFS,
    residual_threshold: float = 0.1,
) -> float:
    """Estimate e with weight(t) ~ c * t^e as t -> 0+ by a log-log slope fit.

    e <= -1 signals that the downstream integrals diverge at the endpoint.
    Emits EstimationUnstableWarning when the fit residual exceeds the
    threshold (in log10 units).
    """
    shape = weight_shape(ws, ts)
    t = np.asarray(sorted(cutoffs))
    vals = np.asarray([float(shape(x)) for x in t])
    if (vals <= 0).any():
        raise ValueError("exponent fit needs positive weight values")
    logs_t = np.log10(t)
    logs_v = np.log10(vals)
    coef, residuals, *_ = np.polyfit(logs_t, logs_v, 1, full=True)
    slope = float(coef[0])
    rss = float(residuals[0]) if len(residuals) else 0.0
    rms = (rss / len(t)) ** 0.5
    if rms > residual_threshold:
        warnings.warn(
            f"endpoint exponent fit residual {rms:.3g} exceeds {residual_threshold}",
            EstimationUnstableWarning,
        )
    return slope
