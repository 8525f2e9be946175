import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from oracles import hull_distance_by_enumeration, inner_minimum, nnls_by_enumeration

from ldicert.errors import (
    DimensionMismatch,
    EquilibriumResidual,
    NormViolation,
    RegionExcludesEquilibrium,
    VerificationFailed,
)
from ldicert.expr import parse
from ldicert.farkas import (
    CandidateLDI,
    DynamicalSystem,
    Inside,
    Outside,
    Region,
    Witness,
    build,
    inner_optimum,
    linear_combination_residual,
    margin,
    membership,
    objective,
    verify_witness,
)

points = st.tuples(st.floats(-2.0, 2.0), st.floats(-2.0, 2.0))


@settings(max_examples=100, deadline=None)
@given(points)
def test_state_margin_is_minus_hull_distance(example1, z):
    cand = example1.candidate("four_vertex")
    data = build(example1.system, cand, z)
    assert abs(margin(example1.system, cand, z) + hull_distance_by_enumeration(data.images, data.dx_plus)) <= 1e-9


@settings(max_examples=100, deadline=None)
@given(points)
def test_full_margin_is_minus_cone_distance(example2, z):
    cand = example2.candidate("overtight")
    data = build(example2.system, cand, z)
    assert abs(margin(example2.system, cand, z, norm="full") + nnls_by_enumeration(data.M, data.b)) <= 1e-9


@settings(max_examples=50, deadline=None)
@given(points)
def test_norm_bound_scales_the_optimum(example1, z):
    cand = example1.candidate("four_vertex")
    for norm in ("state", "full"):
        one = margin(example1.system, cand, z, norm=norm)
        four = margin(example1.system, cand, z, norm=norm, c=4.0)
        assert abs(four - 2.0 * one) <= 1e-12


@settings(max_examples=100, deadline=None)
@given(points)
def test_norms_agree_on_sign(example2, z):
    cand = example2.candidate("overtight")
    s = margin(example2.system, cand, z)
    f = margin(example2.system, cand, z, norm="full")
    assert (s < -1e-7) == (f < -1e-7) or min(abs(s), abs(f)) < 1e-6


def test_state_inner_optimum_matches_optimiser(example1, rng):
    cand = example1.candidate("four_vertex")
    n_x = example1.system.n_x
    mask = np.arange(n_x + 1) < n_x
    for _ in range(40):
        z = rng.uniform(-2, 2, 2)
        data = build(example1.system, cand, z)
        ref = inner_minimum(data.M, data.b, norm_mask=mask)
        assert abs(inner_optimum(data)[0] - ref) <= 1e-4


@settings(max_examples=100, deadline=None)
@given(points)
def test_membership_dichotomy(example1, z):
    """Exactly one alternative: convex weights reproduce the point, or a separator exists."""
    cand = example1.candidate("four_vertex")
    res = membership(example1.system, cand, z)
    data = build(example1.system, cand, z)
    if isinstance(res, Inside):
        assert np.all(res.alpha >= 0) and abs(res.alpha.sum() - 1.0) <= 1e-9
        assert np.linalg.norm(res.alpha @ data.images - data.dx_plus) <= 1e-9 + res.distance
        assert res.distance <= 1e-9
    else:
        assert isinstance(res, Outside)
        y = res.witness.y
        assert np.all(data.M.T @ y >= -1e-9)
        assert data.b @ y < 0.0
        assert abs(np.linalg.norm(y[:2]) - 1.0) <= 1e-12


def test_objective_enforces_norm_bound(example1):
    data = build(example1.system, example1.candidate("four_vertex"), [1.0, 1.0])
    with pytest.raises(NormViolation):
        objective(data, [2.0, 0.0, 0.0])
    assert objective(data, [1.0, 0.0, 5.0]) == pytest.approx(data.b[0] + 5.0)
    with pytest.raises(NormViolation):
        objective(data, [1.0, 0.0, 5.0], norm="full")


def _outside_witness(prob, name):
    rng = np.random.default_rng(0)
    cand = prob.candidate(name)
    best = None
    for z in rng.uniform(prob.region.box[:, 0], prob.region.box[:, 1], size=(400, 2)):
        res = membership(prob.system, cand, z)
        if isinstance(res, Outside) and (best is None or res.witness.objective < best.objective):
            best = res.witness
    return cand, best


def test_verify_witness_accepts_and_rejects_tampering(example1):
    cand, w = _outside_witness(example1, "four_vertex")
    assert w is not None and w.objective < -0.1
    ok = verify_witness(example1.system, cand, example1.region, w)
    assert ok.verified

    def tampered(**changes):
        fields = dict(x=w.x.copy(), u=w.u.copy(), y=w.y.copy(), objective=w.objective,
                      alpha_residual=w.alpha_residual, norm=w.norm)
        fields.update(changes)
        return Witness(**fields)

    cases = {
        "norm": tampered(y=2.0 * w.y),
        "region": tampered(x=np.array([5.0, 0.0])),
        "cone": tampered(y=np.append(w.y[:2], w.y[2] - 1.0)),
        "objective": tampered(y=np.append(w.y[:2], w.y[2] + 1.0)),
        "finite": tampered(x=np.array([np.nan, 0.0])),
        "shape": tampered(y=w.y[:2]),
    }
    for check, bad in cases.items():
        with pytest.raises(VerificationFailed) as info:
            verify_witness(example1.system, cand, example1.region, bad)
        assert info.value.condition == check


def test_verify_witness_rejects_other_candidate(example1):
    _, w = _outside_witness(example1, "four_vertex")
    with pytest.raises(VerificationFailed):
        verify_witness(example1.system, example1.candidate("eight_vertex"), example1.region, w)


def test_full_norm_witness_verifies(example2):
    cand = example2.candidate("overtight")
    res = membership(example2.system, cand, [2.0, 0.8], norm="full")
    assert isinstance(res, Outside)
    assert abs(np.linalg.norm(res.witness.y) - 1.0) <= 1e-12
    verify_witness(example2.system, cand, example2.region, res.witness)


def test_overtight_global_minimum(example2):
    cand = example2.candidate("overtight")
    assert margin(example2.system, cand, [2.0, 0.8]) == pytest.approx(-0.1, abs=1e-9)


def test_equilibrium_residual_is_checked():
    f = (parse("x1 + 1", 1),)
    with pytest.raises(EquilibriumResidual):
        DynamicalSystem(1, 0, f, [0.0], [])
    with pytest.raises(DimensionMismatch):
        DynamicalSystem(2, 0, f, [0.0, 0.0], [])


def test_region_must_contain_equilibrium(example1):
    region = Region([[0.0, 1.0], [-1.0, 1.0]], np.zeros((0, 2)))
    with pytest.raises(RegionExcludesEquilibrium):
        region.check_equilibrium(example1.system)
    boundary = Region([[-1.0, 0.0], [-1.0, 1.0]], np.zeros((0, 2)))
    with pytest.raises(RegionExcludesEquilibrium):
        boundary.check_equilibrium(example1.system)
    with pytest.raises(DimensionMismatch):
        Region([[1.0, -1.0]], np.zeros((0, 2)))


def test_halfspace_membership():
    region = Region([[-1.0, 1.0], [-1.0, 1.0]], np.zeros((0, 2)), F=[[1.0, 1.0]])
    assert region.contains([0.4, 0.5])
    assert not region.contains([0.6, 0.5])
    assert not region.contains([1.5, -1.0])


def test_candidate_shape_checks(example1):
    with pytest.raises(DimensionMismatch):
        CandidateLDI(np.zeros((2, 2, 3)), None)
    with pytest.raises(DimensionMismatch):
        CandidateLDI(np.zeros((1, 3, 3)), None).check(example1.system)
    c = CandidateLDI.from_matrices([np.eye(2)])
    assert c.stacked.shape == (1, 2, 2) and c.n_u == 0


def test_linear_combination_residual_is_zero_for_exact_linear_map():
    f = (parse("0.5*x1 + x2", 2), parse("0 - x2", 2))
    sysm = DynamicalSystem(2, 0, f, [0.0, 0.0], [])
    cand = CandidateLDI.from_matrices([[[0.5, 1.0], [0.0, -1.0]]])
    assert linear_combination_residual(sysm, cand, [0.3, -0.7]) <= 1e-15
    assert margin(sysm, cand, [0.3, -0.7]) == 0.0
    assert math.isclose(margin(sysm, cand, [0.3, -0.7], norm="full"), 0.0, abs_tol=1e-15)
