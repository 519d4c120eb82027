"""Green's kernel of the two-point problem -u'' + r0^2 u = f with Robin ends.

The kernel factors as phi(min(s,t)) * psi(max(s,t)) / varrho, where

    phi(x) = alpha*sinh(r0*x) + beta*r0*cosh(r0*x)      (grows off the left end)
    psi(x) = gamma*sinh(r0*(1-x)) + delta*r0*cosh(r0*(1-x))  (decays to the right)

and varrho is the (constant) negative Wronskian of the pair.  All hyperbolic
pieces are evaluated with exp(r0*...) factored out so nothing overflows for
large r0; cosh/sinh themselves blow up near argument 710 in double precision.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "KernelParams",
    "BoundReport",
    "DegenerateParametersError",
    "DomainError",
    "varrho",
    "kernel_eval",
    "kernel_diag",
    "kernel_matrix",
    "wp",
    "cone_floor",
    "verify_kernel_bounds",
    "phi",
    "psi",
    "phi_prime",
    "psi_prime",
]


class DegenerateParametersError(ValueError):
    """Kernel parameters make the boundary problem singular."""


class DomainError(ValueError):
    """Argument outside the kernel's [0,1] x [0,1] domain."""


@dataclass(frozen=True)
class KernelParams:
    """Boundary weights (alpha..delta), radial scale r0, and dimension N."""

    alpha: float
    beta: float
    gamma: float
    delta: float
    r0: float = 1.0
    N: int = 3

    def __post_init__(self):
        for name in ("alpha", "beta", "gamma", "delta"):
            if getattr(self, name) < 0:
                raise DegenerateParametersError(f"{name} must be nonnegative")
        if self.alpha + self.beta <= 0:
            raise DegenerateParametersError("alpha + beta must be positive")
        if self.gamma + self.delta <= 0:
            raise DegenerateParametersError("gamma + delta must be positive")
        if self.r0 <= 0:
            raise DegenerateParametersError("r0 must be positive")
        if int(self.N) != self.N or self.N < 3:
            raise DegenerateParametersError("N must be an integer >= 3")

    @classmethod
    def default(cls) -> "KernelParams":
        return cls(1.0, 1.0, 1.0, 1.0, 1.0, 3)


# -- scaled building blocks (carry an implicit factor exp(r0*x) resp.
#    exp(r0*(1-x)); exp(-2*r0*...) never overflows) -------------------------


def _phi_scaled(p: KernelParams, x):
    e = np.exp(-2.0 * p.r0 * np.asarray(x, dtype=float))
    return 0.5 * (p.alpha * (1.0 - e) + p.beta * p.r0 * (1.0 + e))


def _psi_scaled(p: KernelParams, x):
    e = np.exp(-2.0 * p.r0 * (1.0 - np.asarray(x, dtype=float)))
    return 0.5 * (p.gamma * (1.0 - e) + p.delta * p.r0 * (1.0 + e))


def _varrho_scaled(p: KernelParams) -> float:
    e = math.exp(-2.0 * p.r0)
    return 0.5 * (
        p.r0 ** 2 * (p.alpha * p.delta + p.beta * p.gamma) * (1.0 + e)
        + p.r0 * (p.alpha * p.gamma + p.beta * p.delta * p.r0 ** 2) * (1.0 - e)
    )


def _as_float_array(x):
    # preserve extended-precision inputs; everything else becomes float64
    x = np.asarray(x)
    return x if x.dtype.kind == "f" else x.astype(float)


def phi(p: KernelParams, x):
    """Left homogeneous solution alpha*sinh(r0 x) + beta*r0*cosh(r0 x)."""
    x = _as_float_array(x)
    return p.alpha * np.sinh(p.r0 * x) + p.beta * p.r0 * np.cosh(p.r0 * x)


def psi(p: KernelParams, x):
    """Right homogeneous solution gamma*sinh(r0(1-x)) + delta*r0*cosh(r0(1-x))."""
    x = _as_float_array(x)
    return p.gamma * np.sinh(p.r0 * (1.0 - x)) + p.delta * p.r0 * np.cosh(p.r0 * (1.0 - x))


def phi_prime(p: KernelParams, x):
    x = np.asarray(x, dtype=float)
    return p.r0 * (p.alpha * np.cosh(p.r0 * x) + p.beta * p.r0 * np.sinh(p.r0 * x))


def psi_prime(p: KernelParams, x):
    x = np.asarray(x, dtype=float)
    return -p.r0 * (
        p.gamma * np.cosh(p.r0 * (1.0 - x)) + p.delta * p.r0 * np.sinh(p.r0 * (1.0 - x))
    )


def varrho(p: KernelParams) -> float:
    """r0^2(ad+bc)cosh(r0) + r0(ac+bd r0^2)sinh(r0); errors if zero."""
    value = _varrho_scaled(p) * math.exp(p.r0)
    if value == 0.0:
        raise DegenerateParametersError(
            "varrho is zero: boundary problem has no Green's kernel"
        )
    return value


def kernel_eval(p: KernelParams, s: float, t: float) -> float:
    """Kernel value at (s, t) in [0,1]^2; symmetric by the min/max form."""
    if not (0.0 <= s <= 1.0) or not (0.0 <= t <= 1.0):
        raise DomainError(f"kernel arguments must lie in [0,1], got ({s}, {t})")
    rho_s = _varrho_scaled(p)
    if rho_s == 0.0:
        raise DegenerateParametersError("varrho is zero")
    lo, hi = (s, t) if s <= t else (t, s)
    return float(
        _phi_scaled(p, lo) * _psi_scaled(p, hi) * math.exp(p.r0 * (lo - hi)) / rho_s
    )


def kernel_diag(p: KernelParams, t):
    """Diagonal slice Xi(t, t); vectorized."""
    t = np.asarray(t, dtype=float)
    rho_s = _varrho_scaled(p)
    if rho_s == 0.0:
        raise DegenerateParametersError("varrho is zero")
    return _phi_scaled(p, t) * _psi_scaled(p, t) / rho_s


def kernel_matrix(p: KernelParams, s_nodes, t_nodes=None) -> np.ndarray:
    """Dense kernel matrix M[i, j] = Xi(s_i, t_j).

    Fine for grids of a few thousand nodes (bound certification, tables);
    the solver uses the separable phi/psi form instead of this matrix.
    """
    s = np.asarray(s_nodes, dtype=float)
    t = s if t_nodes is None else np.asarray(t_nodes, dtype=float)
    if (s < 0).any() or (s > 1).any() or (t < 0).any() or (t > 1).any():
        raise DomainError("grid nodes must lie in [0,1]")
    rho_s = _varrho_scaled(p)
    if rho_s == 0.0:
        raise DegenerateParametersError("varrho is zero")
    S = s[:, None]
    T = t[None, :]
    lo = np.minimum(S, T)
    hi = np.maximum(S, T)
    return _phi_scaled(p, lo) * _psi_scaled(p, hi) * np.exp(p.r0 * (lo - hi)) / rho_s


def _boundary_ratios(p: KernelParams) -> tuple:
    # phi(1), psi(0) are strictly positive for admissible parameters
    den1 = float(phi(p, 1.0))
    den2 = float(psi(p, 0.0))
    if den1 <= 0.0 or den2 <= 0.0:
        raise DegenerateParametersError("boundary ratio denominators vanish")
    return p.beta * p.r0 / den1, p.delta * p.r0 / den2


def wp(p: KernelParams) -> float:
    """max of the two boundary ratios beta*r0/phi(1) and delta*r0/psi(0).

    This is the constant the worked examples use.  It is a valid kernel
    lower-bound constant only when the two ratios coincide (symmetric
    parameters); certification uses cone_floor below.
    """
    return max(_boundary_ratios(p))


def cone_floor(p: KernelParams) -> float:
    """min of the two boundary ratios: the certified constant for
    floor * Xi(t,t) <= Xi(s,t) on the whole square.

    Each kernel branch is bounded below by its own boundary ratio, so the
    uniform constant is the smaller one; the max variant fails for
    asymmetric parameters.
    """
    return min(_boundary_ratios(p))


@dataclass
class BoundReport:
    """Grid certificate for nonnegativity, diagonal domination, and the
    cone lower bound of the kernel."""

    grid_size: int
    tol: float
    wp_used: float
    max_negativity: float
    max_excess_over_diagonal: float
    max_lower_bound_violation: float
    passed: tuple

    @property
    def all_passed(self) -> bool:
        return all(self.passed)

    def to_dict(self) -> dict:
        return {
            "grid_size": self.grid_size,
            "tol": self.tol,
            "wp_used": self.wp_used,
            "max_negativity": self.max_negativity,
            "max_excess_over_diagonal": self.max_excess_over_diagonal,
            "max_lower_bound_violation": self.max_lower_bound_violation,
            "passed": list(self.passed),
        }


def verify_kernel_bounds(
    p: KernelParams, grid_size: int = 101, tol: float = 1e-12
) -> BoundReport:
    """Check the three kernel bounds on the uniform grid {i/(grid_size-1)}^2.

    (i) Xi >= 0, (ii) Xi(s,t) <= Xi(t,t), (iii) floor * Xi(t,t) <= Xi(s,t)
    with floor = cone_floor (see its docstring for why not wp).
    """
    if grid_size < 2:
        raise ValueError("grid_size must be >= 2")
    nodes = np.linspace(0.0, 1.0, grid_size)
    M = kernel_matrix(p, nodes)
    diag = np.diag(M)
    floor = cone_floor(p)
    neg = max(0.0, float(-M.min()))
    excess = float((M - diag[None, :]).max())
    lower = float((floor * diag[None, :] - M).max())
    passed = (neg <= tol, excess <= tol, lower <= tol)
    return BoundReport(
        grid_size=grid_size,
        tol=tol,
        wp_used=floor,
        max_negativity=neg,
        max_excess_over_diagonal=max(0.0, excess),
        max_lower_bound_violation=max(0.0, lower),
        passed=passed,
    )
