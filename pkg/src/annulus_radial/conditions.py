"""Existence/multiplicity/uniqueness constants and hypothesis-window checks.

Twelve scalar constants are built from four ingredients: the integral of the
diagonal-weighted kernel, its L^q and L^inf norms, the product of factor
L^p norms, and the product of factor infima.  Several constants are defined
as reciprocals; a reciprocal is only taken when every ingredient integral
converged, otherwise the constant carries the ingredient's status instead of
a number (a divergent integral must never silently become a digit string).

Window checks sample a nonlinearity over a stated u-interval (stratified
grid plus golden-section refinement around the best candidates), compare the
extremum against bound * window-parameter, and report the margin; borderline
margins are flagged inconclusive rather than asserted.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .kernel import KernelParams, kernel_diag, wp as kernel_wp
from .quadrature import (
    CONVERGED,
    CUTOFF_LIMITED,
    DEFAULT_CUTOFFS,
    DIVERGENT,
    IntegralResult,
    endpoint_infimum,
    holder_conjugate_check,
    integrate,
    p_norm,
)
from .weights import TransformSpec, WeightSpec, transformed_factor, upsilon, xi_hat

__all__ = [
    "ConjugateExponentError",
    "ConstantValue",
    "ConstantsSet",
    "WindowCheck",
    "compute_constants",
    "injected_constants",
    "check_krasnoselskii",
    "check_avery_henderson",
    "check_leggett_williams",
    "contraction_constant",
    "lipschitz_estimate",
    "window_extremum",
]

INJECTED = "injected"
_STATUS_RANK = {CONVERGED: 0, INJECTED: 0, "declared": 0, CUTOFF_LIMITED: 1, DIVERGENT: 2, "degenerate": 2}


class ConjugateExponentError(ValueError):
    """Provided exponents are not Holder-conjugate."""


def _worst(*statuses: str) -> str:
    return max(statuses, key=lambda s: _STATUS_RANK.get(s, 1))


@dataclass
class ConstantValue:
    name: str
    value: float | None
    status: str
    note: str = ""
    ingredients: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "value": self.value,
            "status": self.status,
            "note": self.note,
            "ingredients": self.ingredients,
        }


@dataclass
class ConstantsSet:
    Q1: ConstantValue
    Q2: ConstantValue
    N2: ConstantValue
    M2: ConstantValue
    k1: ConstantValue
    k2: ConstantValue
    k3: ConstantValue
    k4: ConstantValue
    O1: ConstantValue
    O2: ConstantValue
    O3: ConstantValue
    O4: ConstantValue
    wp: float
    prefactor: float
    p_case: str
    star: ConstantValue

    _NAMES = ("Q1", "Q2", "N2", "M2", "k1", "k2", "k3", "k4", "O1", "O2", "O3", "O4")

    def __getitem__(self, name: str) -> ConstantValue:
        if name not in self._NAMES:
            raise KeyError(name)
        return getattr(self, name)

    def to_dict(self) -> dict:
        out = {name: self[name].to_dict() for name in self._NAMES}
        out["wp"] = self.wp
        out["prefactor"] = self.prefactor
        out["p_case"] = self.p_case
        out["star_product"] = self.star.to_dict()
        return out


def _p_case(p_list: Sequence[float]) -> str:
    s = sum(0.0 if math.isinf(p) else 1.0 / p for p in p_list)
    if s < 1.0 - 1e-12:
        return "sum<1"
    if s <= 1.0 + 1e-12:
        return "sum=1"
    return "sum>1"


def _combine(name, raw_value, statuses, note="", **ingredients) -> ConstantValue:
    status = _worst(*statuses)
    value = float(raw_value) if status == CONVERGED else None
    if status == CONVERGED and not math.isfinite(raw_value):
        value, status = None, "degenerate"
    return ConstantValue(name, value, status, note, dict(ingredients))


def _reciprocal(name, bracket: ConstantValue, note="") -> ConstantValue:
    if bracket.status == CONVERGED and bracket.value not in (None, 0.0):
        return ConstantValue(
            name, 1.0 / bracket.value, CONVERGED, note, dict(bracket.ingredients)
        )
    status = bracket.status if bracket.status != CONVERGED else "degenerate"
    extra = "reciprocal not taken: ingredient did not converge to a nonzero value"
    return ConstantValue(
        name, None, status, (note + "; " if note else "") + extra,
        dict(bracket.ingredients),
    )


def compute_constants(
    params: KernelParams,
    ws: WeightSpec,
    ts: TransformSpec,
    q: float,
    tol: float = 1e-9,
    cutoffs: Sequence[float] = DEFAULT_CUTOFFS,
) -> ConstantsSet:
    """All twelve constants with statuses and ingredient provenance.

    q is the Holder partner of the factor exponents; the conjugacy identity
    is validated up front and violations raise ConjugateExponentError.
    """
    if not q > 1:
        raise ConjugateExponentError("q must exceed 1")
    if ws.synthetic:
        p_list = (q / (q - 1.0),)  # natural two-factor split of Xi * omega
    else:
        p_list = tuple(ws.p_exponents)
        if not holder_conjugate_check(p_list, q):
            s = sum(0.0 if math.isinf(p) else 1.0 / p for p in p_list)
            raise ConjugateExponentError(
                f"sum(1/p_i) + 1/q = {s + 1.0 / q:.6f}, expected 1"
            )

    pref = 1.0 if ws.synthetic else params.r0 ** 2 / (params.N - 2.0) ** 2
    w = kernel_wp(params)

    if ws.synthetic:
        hhat: Callable = lambda t: kernel_diag(params, t)
        raw_factors: list = [lambda t: np.asarray(ws.synthetic_override(np.asarray(t, dtype=float)))]
    else:
        hhat = lambda t: xi_hat(t, params)
        raw_factors = [
            (lambda t, _i=i: transformed_factor(ws, _i, t, ts))
            for i in range(len(ws.factors))
        ]

    integral_hat = integrate(hhat, tol=tol, cutoffs=cutoffs)
    norm_q = p_norm(hhat, q, tol=tol, cutoffs=cutoffs)
    norm_inf = p_norm(hhat, math.inf, tol=tol, cutoffs=cutoffs)

    def _norm_product(exponents) -> tuple:
        value = 1.0
        statuses = []
        details = {}
        for i, (f, pe) in enumerate(zip(raw_factors, exponents)):
            res = p_norm(f, pe, tol=tol, cutoffs=cutoffs)
            value *= res.value
            statuses.append(res.status)
            details[f"factor_{i + 1}_p{pe:g}"] = res.to_dict()
        return value, statuses, details

    norm_p_prod, norm_p_stats, norm_p_detail = _norm_product(p_list)
    norm_1_prod, norm_1_stats, norm_1_detail = _norm_product([1.0] * len(raw_factors))

    if ws.lower_bounds is not None:
        star = ConstantValue(
            "star_product",
            float(np.prod(ws.lower_bounds)),
            CONVERGED,
            "declared per-factor lower bounds",
        )
    else:
        value = 1.0
        statuses = []
        details = {}
        for i, f in enumerate(raw_factors):
            res = endpoint_infimum(f, tol=tol, cutoffs=cutoffs)
            value *= res.value
            statuses.append(res.status)
            details[f"factor_{i + 1}_inf"] = res.to_dict()
        star = ConstantValue(
            "star_product",
            value,
            _worst(*statuses) if statuses else CONVERGED,
            "numeric infima over the cutoff ladder",
            details,
        )

    # brackets (the non-reciprocal forms)
    star_value = star.value if star.value is not None else float("nan")
    k1 = _combine(
        "k1",
        w * pref * star_value * integral_hat.value,
        [integral_hat.status, star.status],
        note="wp * prefactor * star_product * integral(diag_weight)",
        diag_weight_integral=integral_hat.to_dict(),
        star_product=star.to_dict(),
    )
    k2 = _combine(
        "k2",
        pref * norm_q.value * norm_p_prod,
        [norm_q.status, *norm_p_stats],
        note="prefactor * norm_q(diag_weight) * prod(factor p-norms)",
        diag_weight_norm_q=norm_q.to_dict(),
        **norm_p_detail,
    )
    k3 = _combine(
        "k3",
        pref * norm_inf.value * norm_p_prod,
        [norm_inf.status, *norm_p_stats],
        note="prefactor * sup(diag_weight) * prod(factor p-norms)",
        diag_weight_norm_inf=norm_inf.to_dict(),
        **norm_p_detail,
    )
    k4 = _combine(
        "k4",
        pref * norm_inf.value * norm_1_prod,
        [norm_inf.status, *norm_1_stats],
        note="prefactor * sup(diag_weight) * prod(factor 1-norms)",
        diag_weight_norm_inf=norm_inf.to_dict(),
        **norm_1_detail,
    )

    def _alias(name: str, src: ConstantValue, note: str) -> ConstantValue:
        return ConstantValue(name, src.value, src.status, note, dict(src.ingredients))

    constants = ConstantsSet(
        Q1=_reciprocal("Q1", k1),
        Q2=_reciprocal("Q2", k2),
        N2=_reciprocal("N2", k3),
        M2=_reciprocal("M2", k4),
        k1=k1,
        k2=k2,
        k3=k3,
        k4=k4,
        O1=_alias("O1", k2, "Holder form (theorem assignment)"),
        O2=_alias("O2", k1, "star-integral form (theorem assignment)"),
        O3=_alias("O3", k3, "sup form with factor p-norms"),
        O4=_alias("O4", k4, "sup form with factor 1-norms"),
        wp=w,
        prefactor=pref,
        p_case=_p_case(p_list),
        star=star,
    )
    return constants


def injected_constants(values: dict, wp_value: float, p_case: str = "sum<1") -> ConstantsSet:
    """Bypass mode: wrap externally supplied constants (the published example
    values) so the window checkers can run against them verbatim."""

    def cv(name: str) -> ConstantValue:
        v = values.get(name)
        status = INJECTED if v is not None else "degenerate"
        return ConstantValue(name, v, status, "externally supplied")

    star = cv("star")
    return ConstantsSet(
        Q1=cv("Q1"), Q2=cv("Q2"), N2=cv("N2"), M2=cv("M2"),
        k1=cv("k1"), k2=cv("k2"), k3=cv("k3"), k4=cv("k4"),
        O1=cv("O1"), O2=cv("O2"), O3=cv("O3"), O4=cv("O4"),
        wp=wp_value, prefactor=values.get("prefactor", 1.0),
        p_case=p_case, star=star,
    )


# ---------------------------------------------------------------------------
# window checks
# ---------------------------------------------------------------------------


@dataclass
class WindowCheck:
    hypothesis_id: str
    g_index: int
    interval: tuple
    bound: float | None
    direction: str  # one of <=, >=, <, >
    worst_value: float
    worst_point: float
    verdict: bool
    margin: float | None
    conclusive: bool
    note: str = ""

    def to_dict(self) -> dict:
        return {
            "hypothesis_id": self.hypothesis_id,
            "g_index": self.g_index,
            "interval": list(self.interval),
            "bound": self.bound,
            "direction": self.direction,
            "worst_value": self.worst_value,
            "worst_point": self.worst_point,
            "verdict": self.verdict,
            "margin": self.margin,
            "conclusive": self.conclusive,
            "note": self.note,
        }


def _eval_many(g: Callable, xs: np.ndarray) -> np.ndarray:
    try:
        vals = np.asarray(g(xs), dtype=float)
        if vals.shape == xs.shape:
            return vals
    except Exception:
        pass
    return np.asarray([float(g(float(x))) for x in xs])


_INVPHI = (math.sqrt(5.0) - 1.0) / 2.0


def _golden(g: Callable, a: float, b: float, sign: float, iters: int = 80) -> tuple:
    """Golden-section refinement of sign*g (sign=+1 maximizes)."""
    c = b - (b - a) * _INVPHI
    d = a + (b - a) * _INVPHI
    fc = sign * float(g(c))
    fd = sign * float(g(d))
    for _ in range(iters):
        if b - a < 1e-14 * max(1.0, abs(a), abs(b)):
            break
        if fc > fd:
            b, d, fd = d, c, fc
            c = b - (b - a) * _INVPHI
            fc = sign * float(g(c))
        else:
            a, c, fc = c, d, fd
            d = a + (b - a) * _INVPHI
            fd = sign * float(g(d))
    if fc >= fd:
        return sign * fc, c
    return sign * fd, d


def window_extremum(
    g: Callable, lo: float, hi: float, mode: str = "max", samples: int = 10001
) -> tuple:
    """(extremal value, abscissa) of g over [lo, hi].

    Deterministic stratified grid plus golden-section polish around the ten
    best candidates; the polished result never loses to a sampled value.
    """
    if hi < lo:
        raise ValueError("empty interval")
    if hi == lo:
        return float(g(lo)), lo
    xs = np.linspace(lo, hi, samples)
    vals = _eval_many(g, xs)
    sign = 1.0 if mode == "max" else -1.0
    order = np.argsort(sign * vals)[::-1][:10]
    best_val = float(vals[order[0]])
    best_x = float(xs[order[0]])
    step = xs[1] - xs[0]
    for idx in order:
        a = max(lo, xs[idx] - step)
        b = min(hi, xs[idx] + step)
        val, x = _golden(g, a, b, sign)
        if sign * val > sign * best_val:
            best_val, best_x = float(val), float(x)
    return best_val, best_x


def _window(
    hypothesis_id: str,
    g_index: int,
    g: Callable,
    lo: float,
    hi: float,
    direction: str,
    bound: float | None,
    bound_note: str = "",
    samples: int = 10001,
) -> WindowCheck:
    mode = "max" if direction in ("<=", "<") else "min"
    worst, point = window_extremum(g, lo, hi, mode, samples)
    if bound is None or not math.isfinite(bound):
        return WindowCheck(
            hypothesis_id, g_index, (lo, hi), None, direction, worst, point,
            verdict=False, margin=None, conclusive=False,
            note=bound_note or "bound unavailable",
        )
    margin = (bound - worst) if direction in ("<=", "<") else (worst - bound)
    strict = direction in ("<", ">")
    verdict = margin > 0.0 if strict else margin >= 0.0
    resolution = 1e-9 * max(1.0, abs(bound), abs(worst))
    return WindowCheck(
        hypothesis_id, g_index, (lo, hi), bound, direction, worst, point,
        verdict=verdict, margin=margin, conclusive=abs(margin) > resolution,
        note=bound_note,
    )


def _bound_from(constant: ConstantValue, scale: float, reciprocal_of_constant: bool):
    """scale * constant (reciprocal_of_constant=False) or scale / constant."""
    if constant.value is None:
        return None, f"constant {constant.name} unavailable ({constant.status})"
    if reciprocal_of_constant:
        if constant.value == 0.0:
            return None, f"constant {constant.name} is zero"
        return scale / constant.value, ""
    return scale * constant.value, ""


_UPPER_BY_CASE = {"sum<1": ("J4", "Q2"), "sum=1": ("J6", "N2"), "sum>1": ("J7", "M2")}
_AH_UPPER_BY_CASE = {"sum<1": ("J9", "k2"), "sum=1": ("J9'", "k3"), "sum>1": ("J9''", "k4")}


def check_krasnoselskii(
    g_list: Sequence[Callable],
    a1: float,
    a2: float,
    constants: ConstantsSet,
    samples: int = 10001,
) -> list:
    """Upper window g <= C*a2 on [0, a2] and lower window g >= Q1*a1 on
    [0, a1]; the upper constant follows the summability case."""
    if not 0 < a1 < a2:
        raise ValueError("need 0 < a1 < a2")
    upper_id, upper_name = _UPPER_BY_CASE[constants.p_case]
    upper = constants[upper_name]
    checks = []
    for j, g in enumerate(g_list):
        bound, note = _bound_from(upper, a2, reciprocal_of_constant=False)
        checks.append(_window(upper_id, j, g, 0.0, a2, "<=", bound, note, samples))
        bound, note = _bound_from(constants.Q1, a1, reciprocal_of_constant=False)
        checks.append(_window("J5", j, g, 0.0, a1, ">=", bound, note, samples))
    return checks


def check_avery_henderson(
    g_list: Sequence[Callable],
    a_prime: float,
    b_prime: float,
    c_prime: float,
    constants: ConstantsSet,
    wp_value: float | None = None,
    samples: int = 10001,
) -> list:
    """Three windows per nonlinearity: g > c'/k1 on [c', c'/wp],
    g < b'/k_upper on [0, b'/wp], g > a'/k1 on [a', a'/wp]."""
    if not 0 < a_prime < b_prime < c_prime:
        raise ValueError("need 0 < a' < b' < c'")
    w = constants.wp if wp_value is None else wp_value
    if not 0 < w <= 1:
        raise ValueError("wp must lie in (0, 1]")
    upper_id, upper_name = _AH_UPPER_BY_CASE[constants.p_case]
    upper = constants[upper_name]
    checks = []
    for j, g in enumerate(g_list):
        bound, note = _bound_from(constants.k1, c_prime, reciprocal_of_constant=True)
        checks.append(
            _window("J8", j, g, c_prime, c_prime / w, ">", bound, note, samples)
        )
        bound, note = _bound_from(upper, b_prime, reciprocal_of_constant=True)
        checks.append(
            _window(upper_id, j, g, 0.0, b_prime / w, "<", bound, note, samples)
        )
        bound, note = _bound_from(constants.k1, a_prime, reciprocal_of_constant=True)
        checks.append(
            _window("J10", j, g, a_prime, a_prime / w, ">", bound, note, samples)
        )
    return checks


def check_leggett_williams(
    g_list: Sequence[Callable],
    a_prime: float,
    b_prime: float,
    c_prime: float,
    constants: ConstantsSet,
    samples: int = 10001,
) -> list:
    """g < a'/O1 on [0, a'], g > b'/O2 on [b', c'], g < c'/O1 on [0, c']."""
    if not 0 < a_prime < b_prime < c_prime:
        raise ValueError("need 0 < a' < b' < c'")
    checks = []
    for j, g in enumerate(g_list):
        bound, note = _bound_from(constants.O1, a_prime, reciprocal_of_constant=True)
        checks.append(_window("J11", j, g, 0.0, a_prime, "<", bound, note, samples))
        bound, note = _bound_from(constants.O2, b_prime, reciprocal_of_constant=True)
        checks.append(
            _window("J12", j, g, b_prime, c_prime, ">", bound, note, samples)
        )
        bound, note = _bound_from(constants.O1, c_prime, reciprocal_of_constant=True)
        checks.append(_window("J13", j, g, 0.0, c_prime, "<", bound, note, samples))
    return checks


# ---------------------------------------------------------------------------
# uniqueness machinery
# ---------------------------------------------------------------------------


def contraction_constant(
    params: KernelParams,
    ws: WeightSpec,
    ts: TransformSpec,
    K: float,
    n: int,
    p: float,
    q: float,
    include_wp: bool = False,
    tol: float = 1e-9,
    cutoffs: Sequence[float] = DEFAULT_CUTOFFS,
) -> IntegralResult:
    """Left side of the two-metric contraction condition:

        [wp? * K * prefactor]^(n+1) * (int |Y|)^n * (int |Y|^q)^(1/q)

    with Y the diagonal-weighted kernel.  The wp factor is off by default
    (the worked example and the derivation drop it); both variants are
    reported by the CLI.  Divergence statuses of the Y integrals propagate.
    """
    if K < 0:
        raise ValueError("Lipschitz bound must be nonnegative")
    if n < 1:
        raise ValueError("system size must be >= 1")
    if not (p > 1 and q > 1) or abs(1.0 / p + 1.0 / q - 1.0) > 1e-12:
        raise ConjugateExponentError("need p, q > 1 with 1/p + 1/q = 1")
    if K == 0.0:
        return IntegralResult(0.0, 0.0, CONVERGED, [(min(cutoffs), 0.0)])

    def ups(t):
        return np.abs(np.asarray(upsilon(t, params, ws, ts)))

    I1 = integrate(ups, tol=tol, cutoffs=cutoffs)
    Nq = p_norm(ups, q, tol=tol, cutoffs=cutoffs)
    pref = 1.0 if ws.synthetic else params.r0 ** 2 / (params.N - 2.0) ** 2
    factor = K * pref * (kernel_wp(params) if include_wp else 1.0)
    lead = factor ** (n + 1)

    nq_trace = dict(Nq.cutoff_trace)
    trace = []
    for eps, v1 in I1.cutoff_trace:
        if eps in nq_trace:
            trace.append((eps, lead * v1**n * nq_trace[eps]))
    value = lead * I1.value**n * Nq.value
    status = _worst(I1.status, Nq.status)
    rel = 0.0
    if I1.value != 0.0:
        rel += n * I1.abs_error_estimate / abs(I1.value)
    if Nq.value != 0.0:
        rel += Nq.abs_error_estimate / abs(Nq.value)
    exponent = I1.exponent_estimate if I1.exponent_estimate is not None else Nq.exponent_estimate
    return IntegralResult(value, abs(value) * rel, status, trace, exponent)


def lipschitz_estimate(
    g: Callable, interval: tuple, samples: int = 10001
) -> float:
    """Largest finite-difference slope over a stratified sample of the
    interval, refined near the steepest pairs; a lower estimate of the best
    Lipschitz constant."""
    lo, hi = float(interval[0]), float(interval[1])
    if hi <= lo:
        raise ValueError("interval must have positive length")
    xs = np.linspace(lo, hi, samples)
    vals = _eval_many(g, xs)
    slopes = np.abs(np.diff(vals) / np.diff(xs))
    best = float(slopes.max())
    for idx in np.argsort(slopes)[::-1][:5]:
        a = xs[max(0, idx - 1)]
        b = xs[min(len(xs) - 1, idx + 2)]
        fine = np.linspace(a, b, 1001)
        fvals = _eval_many(g, fine)
        best = max(best, float(np.max(np.abs(np.diff(fvals) / np.diff(fine)))))
    return best
