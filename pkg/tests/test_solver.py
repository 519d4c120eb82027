import numpy as np
import pytest

from annulus_radial.conditions import contraction_constant
from annulus_radial.exprlang import parse
from annulus_radial.grid import GridFunction
from annulus_radial.kernel import wp
from annulus_radial.oracle import LinearBVP, solve_linear_fd
from annulus_radial.solver import (
    CycleConsistencyError,
    ProblemSpec,
    apply_operator,
    make_grid,
    multistart_solve,
    picard_solve,
    radial_profile,
    recover_components,
    residual_check,
)
from annulus_radial.weights import TransformSpec, WeightSpec

TS = TransformSpec(1.0, 3)


def synthetic_spec(default_params, ws, g_sources, grid_size=513, cutoff=1e-6):
    return ProblemSpec(
        n=len(g_sources),
        g=tuple(parse(src, "u") for src in g_sources),
        kernel=default_params,
        weights=ws,
        transform=TS,
        grid_size=grid_size,
        cutoff=cutoff,
    )


def test_zero_nonlinearity_annihilates(default_params, synthetic_unit_weight):
    spec = synthetic_spec(default_params, synthetic_unit_weight, ["0", "0"])
    u0 = GridFunction.constant(make_grid(spec), 3.0)
    out = apply_operator(spec, u0)
    assert np.max(np.abs(out.values)) == 0.0


def test_constant_forcing_matches_fd_oracle(default_params, synthetic_unit_weight):
    # cutoff far below the h^2 error so the domain truncation cannot mask
    # the second-order agreement between the two routes
    diffs = []
    for m in (257, 513):
        spec = synthetic_spec(
            default_params, synthetic_unit_weight, ["1"], grid_size=m, cutoff=1e-9
        )
        u, trace = picard_solve(spec, tol=1e-12)
        assert trace.converged
        w = solve_linear_fd(
            LinearBVP(default_params, lambda t: np.ones_like(np.asarray(t)), m)
        )
        diffs.append(float(np.max(np.abs(u(w.nodes) - w.values))))
    assert 3.0 <= diffs[0] / diffs[1] <= 5.0  # both sides are O(h^2)


def test_fixed_point_is_fixed(default_params, synthetic_unit_weight):
    spec = synthetic_spec(
        default_params, synthetic_unit_weight, ["1/(1+u)", "1/(1+u)"]
    )
    u, trace = picard_solve(spec, tol=1e-12)
    assert trace.converged
    again = apply_operator(spec, u)
    assert np.max(np.abs(again.values - u.values)) <= 1e-11


def test_picard_zero_map_converges_in_one_iteration(
    default_params, synthetic_unit_weight
):
    spec = synthetic_spec(default_params, synthetic_unit_weight, ["0", "0"])
    u, trace = picard_solve(spec)
    assert trace.converged
    assert trace.iterates == 1
    assert np.max(np.abs(u.values)) == 0.0


def test_linear_contraction_ratio_below_certified_bound(
    default_params, synthetic_unit_weight
):
    spec = synthetic_spec(default_params, synthetic_unit_weight, ["u/100"])
    u, trace = picard_solve(spec, init=1.0, tol=1e-13)
    assert trace.converged
    alpha2 = contraction_constant(
        default_params, synthetic_unit_weight, TS, K=0.01, n=1, p=2.0, q=2.0
    )
    assert alpha2.converged and alpha2.value < 1.0
    assert trace.empirical_ratio <= alpha2.value + 0.05


def test_metric_domination_every_step(default_params, synthetic_unit_weight):
    for srcs, init in ((["u/100"], 1.0), (["1/(1+u)", "1/(1+u)"], 0.0)):
        spec = synthetic_spec(default_params, synthetic_unit_weight, srcs)
        _, trace = picard_solve(spec, init=init, tol=1e-12)
        assert len(trace.rho_history) == len(trace.d_history)
        for rho, d in zip(trace.rho_history, trace.d_history):
            assert rho <= d + 1e-12


def test_divergence_detection(default_params, synthetic_unit_weight):
    spec = synthetic_spec(default_params, synthetic_unit_weight, ["50*u"], grid_size=257)
    _, trace = picard_solve(spec, init=1.0, tol=1e-12, max_iter=50)
    assert not trace.converged
    assert trace.status == "diverging"
    assert trace.iterates < 50


def test_max_iter_report(default_params, synthetic_unit_weight):
    # contraction too slow for two iterations: report max_iter, not success
    spec = synthetic_spec(default_params, synthetic_unit_weight, ["u/2 + 1"])
    _, trace = picard_solve(spec, tol=1e-14, max_iter=2)
    assert trace.status == "max_iter"
    assert not trace.converged


def test_cone_preservation(default_params, synthetic_unit_weight):
    spec = synthetic_spec(
        default_params, synthetic_unit_weight, ["1 + u/(1+u)", "2 + cos(u)"]
    )
    u0 = GridFunction.constant(make_grid(spec), 1.0)
    out = apply_operator(spec, u0)
    w = wp(default_params)
    assert (out.values >= 0.0).all()
    assert out.values.min() >= w * out.values.max() - 1e-10


def test_recover_components_zero_case(default_params, synthetic_unit_weight):
    spec = synthetic_spec(default_params, synthetic_unit_weight, ["0", "0"])
    u, _ = picard_solve(spec)
    comps = recover_components(spec, u)
    assert len(comps) == 2
    for c in comps:
        assert np.max(np.abs(c.values)) == 0.0


def test_recover_single_equation_equals_operator(default_params, synthetic_unit_weight):
    spec = synthetic_spec(default_params, synthetic_unit_weight, ["1/(2+u)"])
    u, _ = picard_solve(spec, tol=1e-12)
    comps = recover_components(spec, u, tol=1e-10)
    direct = apply_operator(spec, u)
    assert np.max(np.abs(comps[0].values - direct.values)) == 0.0


def test_recover_detects_cycle_inconsistency(default_params, synthetic_unit_weight):
    spec = synthetic_spec(default_params, synthetic_unit_weight, ["1 + u", "2 + u"])
    bogus = GridFunction.constant(make_grid(spec), 5.0)
    with pytest.raises(CycleConsistencyError):
        recover_components(spec, bogus, tol=1e-12)


def test_example4_components_nonnegative_in_cone(
    default_params, example4_weights, example4_nonlinearities
):
    spec = ProblemSpec(
        n=2,
        g=example4_nonlinearities,
        kernel=default_params,
        weights=example4_weights,
        transform=TS,
        grid_size=8001,
        cutoff=1e-3,
    )
    u, trace = picard_solve(spec, tol=1e-12)
    assert trace.converged
    comps = recover_components(spec, u, tol=1e-10)
    w = wp(default_params)
    for c in comps:
        assert (c.values >= 0.0).all()
        assert c.values.min() >= w * c.values.max() - 1e-6


def test_residual_zero_for_zero_solution(default_params, synthetic_unit_weight):
    spec = synthetic_spec(default_params, synthetic_unit_weight, ["0"])
    zero = GridFunction.constant(make_grid(spec), 0.0)
    assert residual_check(spec, [zero]) == 0.0


def test_residual_second_order_on_manufactured_solution(default_params):
    # synthetic weight equal to -u*'' + u* with g == 1 makes the quartic u*
    # an exact solution; the defect must then shrink ~4x per grid doubling
    # (a cubic would not do: central differences are exact on cubics)
    u_star = lambda t: 1.0 + t + t**2 - 2.75 * t**3 + t**4
    forcing = parse("-(2 - 16.5*t + 12*t^2) + 1 + t + t^2 - 2.75*t^3 + t^4", "t")
    ws = WeightSpec(synthetic_override=forcing, eval_floor=1e-9)
    res = []
    for m in (257, 513):
        spec = ProblemSpec(
            n=1, g=(parse("1", "u"),), kernel=default_params, weights=ws,
            transform=TS, grid_size=m, cutoff=1e-6,
        )
        nodes = make_grid(spec)
        comps = [GridFunction(nodes, u_star(nodes))]
        res.append(residual_check(spec, comps))
    assert 3.0 <= res[0] / res[1] <= 5.0


def test_residual_large_for_non_solution(default_params, synthetic_unit_weight):
    spec = synthetic_spec(default_params, synthetic_unit_weight, ["1"])
    nodes = make_grid(spec)
    junk = GridFunction(nodes, np.sin(17.0 * nodes) + 2.0)
    assert residual_check(spec, [junk]) > 1e3 * 1e-10


def test_radial_profile_mapping(default_params, synthetic_unit_weight):
    spec = synthetic_spec(default_params, synthetic_unit_weight, ["1"], cutoff=1e-3)
    u, _ = picard_solve(spec, tol=1e-12)
    comps = recover_components(spec, u)
    table = radial_profile(comps, TS, [1.0, 2.0])
    # r = r0 maps to s = 1; r = 2 maps to s = 1/2 for N = 3
    assert table[0, 1] == pytest.approx(float(u.values[-1]), rel=1e-12)
    assert table[1, 1] == pytest.approx(float(u(0.5)), rel=1e-10)
    # s-profile decreasing in s <=> increasing in r here: check reversal
    r = np.linspace(1.0, 5.0, 9)
    s_vals = (r / 1.0) ** (2 - 3)
    prof = radial_profile(comps, TS, r)
    assert np.allclose(prof[:, 1], u(s_vals), rtol=1e-12)
    with pytest.raises(ValueError):
        radial_profile(comps, TS, [2000.0])  # maps below the grid cutoff


def test_multistart_finds_fixed_point(default_params, synthetic_unit_weight):
    spec = synthetic_spec(default_params, synthetic_unit_weight, ["1/(1+u)"])
    found = multistart_solve(spec, [0.0, 0.5, 2.0], tol=1e-11)
    assert len(found) == 1  # contraction: all starts collapse to one point


def test_problem_spec_validation(default_params, synthetic_unit_weight):
    with pytest.raises(ValueError):
        ProblemSpec(n=0, g=(), kernel=default_params,
                    weights=synthetic_unit_weight, transform=TS)
    with pytest.raises(ValueError):
        ProblemSpec(n=2, g=(parse("0", "u"),), kernel=default_params,
                    weights=synthetic_unit_weight, transform=TS)
    with pytest.raises(ValueError):
        ProblemSpec(n=1, g=(parse("0", "u"),), kernel=default_params,
                    weights=synthetic_unit_weight, transform=TS, grid_size=8)
    with pytest.raises(ValueError):
        ProblemSpec(n=1, g=(parse("0", "u"),), kernel=default_params,
                    weights=synthetic_unit_weight, transform=TS, cutoff=0.0)
