import math

import numpy as np
import pytest

from annulus_radial.kernel import (
    DegenerateParametersError,
    DomainError,
    KernelParams,
    cone_floor,
    kernel_diag,
    kernel_eval,
    kernel_matrix,
    phi,
    phi_prime,
    psi,
    psi_prime,
    varrho,
    verify_kernel_bounds,
    wp,
)

RNG = np.random.default_rng(20240309)


def random_params(n=20):
    out = []
    for _ in range(n):
        a, b, g, d = RNG.uniform(0.1, 10.0, size=4)
        r0 = RNG.uniform(0.1, 5.0)
        out.append(KernelParams(a, b, g, d, r0, 3))
    return out


def test_varrho_default_matches_reported_value(default_params):
    v = varrho(default_params)
    assert v == pytest.approx(5.436563658, abs=1e-8)
    # sinh + cosh collapse to the exponential
    assert v == pytest.approx(2.0 * math.e, rel=1e-14)


def test_varrho_pure_dirichlet_combination():
    p = KernelParams(1.0, 0.0, 1.0, 0.0, 1.0, 3)
    assert varrho(p) == pytest.approx(math.sinh(1.0), rel=1e-14)


def test_params_validation():
    with pytest.raises(DegenerateParametersError):
        KernelParams(0.0, 0.0, 1.0, 1.0, 1.0, 3)
    with pytest.raises(DegenerateParametersError):
        KernelParams(1.0, 1.0, 0.0, 0.0, 1.0, 3)
    with pytest.raises(DegenerateParametersError):
        KernelParams(1.0, 1.0, 1.0, 1.0, -1.0, 3)
    with pytest.raises(DegenerateParametersError):
        KernelParams(1.0, 1.0, 1.0, 1.0, 1.0, 2)
    with pytest.raises(DegenerateParametersError):
        KernelParams(-0.5, 1.0, 1.0, 1.0, 1.0, 3)


def test_kernel_corner_value(default_params):
    assert kernel_eval(default_params, 0.0, 0.0) == pytest.approx(0.5, rel=1e-14)


def test_kernel_symmetry_is_exact(default_params, asym_params):
    for p in (default_params, asym_params, *random_params(5)):
        for s, t in ((0.3, 0.7), (0.0, 1.0), (0.25, 0.9)):
            assert kernel_eval(p, s, t) == kernel_eval(p, t, s)


def test_dirichlet_left_edge_vanishes():
    p = KernelParams(1.0, 0.0, 2.0, 0.0, 1.0, 3)
    for t in np.linspace(0.0, 1.0, 7):
        assert kernel_eval(p, 0.0, float(t)) == 0.0


def test_kernel_domain_errors(default_params):
    with pytest.raises(DomainError):
        kernel_eval(default_params, -0.1, 0.5)
    with pytest.raises(DomainError):
        kernel_eval(default_params, 0.5, 1.2)


def test_wp_values(default_params):
    assert wp(default_params) == pytest.approx(1.0 / math.e, abs=1e-12)
    assert wp(KernelParams(1.0, 0.0, 1.0, 0.0, 1.0, 3)) == 0.0
    p = KernelParams(0.0, 1.0, 0.0, 1.0, 1.0, 3)
    assert wp(p) == pytest.approx(1.0 / math.cosh(1.0), rel=1e-14)


def test_wp_within_unit_interval():
    for p in random_params(20):
        assert 0.0 <= wp(p) <= 1.0
        assert 0.0 <= cone_floor(p) <= wp(p)


def test_bound_report_default_grid(default_params):
    rep = verify_kernel_bounds(default_params, 101)
    assert rep.all_passed
    assert rep.max_negativity <= 1e-12
    assert rep.max_excess_over_diagonal <= 1e-12
    assert rep.max_lower_bound_violation <= 1e-12


def test_bound_report_dirichlet_lower_bound_vacuous():
    rep = verify_kernel_bounds(KernelParams(1.0, 0.0, 1.0, 0.0, 1.0, 3), 101)
    assert rep.all_passed
    assert rep.wp_used == 0.0


def test_bounds_hold_for_random_draws():
    for p in random_params(20):
        rep = verify_kernel_bounds(p, 101)
        assert rep.all_passed, p


def test_max_ratio_constant_fails_where_min_succeeds():
    # documents why certification uses the min of the boundary ratios: with
    # strongly asymmetric ends the max variant violates the lower bound
    p = KernelParams(10.0, 0.1, 0.1, 10.0, 1.0, 3)
    nodes = np.linspace(0.0, 1.0, 51)
    M = kernel_matrix(p, nodes)
    diag = np.diag(M)
    floor_violation = float((cone_floor(p) * diag[None, :] - M).max())
    max_violation = float((wp(p) * diag[None, :] - M).max())
    assert floor_violation <= 1e-12
    assert max_violation > 1e-3


def test_matrix_agrees_with_pointwise(asym_params):
    nodes = np.linspace(0.0, 1.0, 17)
    M = kernel_matrix(asym_params, nodes)
    for i in (0, 5, 16):
        for j in (0, 3, 16):
            assert M[i, j] == pytest.approx(
                kernel_eval(asym_params, float(nodes[i]), float(nodes[j])),
                rel=1e-14,
            )


def test_kernel_solves_homogeneous_ode_off_diagonal(default_params, asym_params):
    # second difference of s -> Xi(s, t) equals r0^2 Xi + O(h^2) away from t
    for p in (default_params, asym_params):
        t = 0.618
        errs = []
        for h in (1e-3, 5e-4):
            s = 0.25
            d2 = (
                kernel_eval(p, s - h, t)
                - 2.0 * kernel_eval(p, s, t)
                + kernel_eval(p, s + h, t)
            ) / h**2
            errs.append(abs(d2 - p.r0**2 * kernel_eval(p, s, t)))
        assert errs[0] < 1e-5
        assert errs[1] < errs[0]


def test_wronskian_identity():
    for p in (KernelParams.default(), *random_params(5)):
        v = varrho(p)
        for x in np.linspace(0.0, 1.0, 9):
            w = float(phi(p, x) * psi_prime(p, x) - phi_prime(p, x) * psi(p, x))
            assert w == pytest.approx(-v, rel=1e-10)


def test_large_r0_does_not_overflow():
    p = KernelParams(1.0, 1.0, 1.0, 1.0, 500.0, 3)
    d = kernel_diag(p, np.linspace(0.0, 1.0, 11))
    assert np.isfinite(d).all()
    assert (d >= 0.0).all()
    v = kernel_eval(p, 0.1, 0.9)
    assert 0.0 <= v <= float(kernel_diag(p, 0.9))
    assert 0.0 <= wp(p) <= 1.0


def test_diagonal_tie_goes_to_first_branch(default_params):
    # both branches agree on the diagonal, so the tie is invisible
    for t in (0.0, 0.37, 1.0):
        expected = float(
            phi(default_params, t) * psi(default_params, t) / varrho(default_params)
        )
        assert kernel_eval(default_params, t, t) == pytest.approx(expected, rel=1e-14)
