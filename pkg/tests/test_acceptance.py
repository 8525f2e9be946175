"""Acceptance criteria, one test each, with a PASS/FAIL line in the terminal summary."""

import functools
import json
import math
import time

import numpy as np
import pytest
from conftest import ACCEPTANCE_LINES
from oracles import inner_minimum, nnls_by_enumeration, planar_hull_distance

from ldicert import cli
from ldicert.certify import Certified, certify
from ldicert.construct import mvt_build, tighten
from ldicert.expr import parse
from ldicert.farkas import Witness, build, margin, verify_witness
from ldicert.geometry import nnls_project
from ldicert.interval import Interval
from ldicert.problem import bundled
from ldicert.search import Falsified, SearchConfig, falsify

SEVEN_TWELFTHS = 7.0 / 12.0


def record(number, ok, detail):
    ACCEPTANCE_LINES.append(f"CRITERION {number} {'PASS' if ok else 'FAIL'} {detail}")
    print(ACCEPTANCE_LINES[-1])


def judged(number):
    """Record PASS/FAIL for the wrapped test from whether its assertions hold."""

    def wrap(fn):
        @functools.wraps(fn)
        def run(*args, **kwargs):
            try:
                detail = fn(*args, **kwargs)
            except AssertionError as exc:
                record(number, False, str(exc).splitlines()[0] if str(exc) else "assertion failed")
                raise
            record(number, True, detail or "")

        return run

    return wrap


@pytest.fixture(scope="module")
def cert_eight_vertex(example1):
    t0 = time.perf_counter()
    res = certify(example1.system, example1.region, example1.candidate("eight_vertex"), 1e-4)
    return res, time.perf_counter() - t0


@pytest.fixture(scope="module")
def cert_tight(example2):
    t0 = time.perf_counter()
    res = certify(example2.system, example2.region, example2.candidate("tight"), 1e-6)
    return res, time.perf_counter() - t0


@judged(1)
def test_criterion_1_example1_four_vertex_falsified(tmp_path, example1):
    report = tmp_path / "r.json"
    t0 = time.perf_counter()
    code = cli.main(["check", "--problem", str(bundled("example1")), "--candidate", "four_vertex",
                     "--report", str(report)])
    wall = time.perf_counter() - t0
    rep = json.loads(report.read_text())
    assert code == 1, f"exit code {code}"
    assert rep["outcome"] == "falsified"
    assert abs(rep["value"] - (-0.385)) <= 0.005, f"value {rep['value']}"
    assert wall < 60.0, f"wall {wall:.1f}s"
    w = rep["witness"]
    wit = Witness(np.array(w["x"]), np.array(w["u"]), np.array(w["y"]), w["objective"],
                  w["alpha_residual"], norm=w["norm"])
    verify_witness(example1.system, example1.candidate("four_vertex"), example1.region, wit)
    data = build(example1.system, example1.candidate("four_vertex"), wit.x)
    assert float((data.M.T @ wit.y).min()) >= -1e-9
    assert abs(np.linalg.norm(wit.y[: example1.system.n_x]) - 1.0) <= 1e-9
    return f"value={rep['value']:.4f} wall={wall:.1f}s x={np.round(wit.x, 4).tolist()}"


@pytest.mark.slow
@judged(2)
def test_criterion_2_example1_eight_vertex_certified(cert_eight_vertex):
    res, wall = cert_eight_vertex
    assert isinstance(res, Certified), f"outcome {res!r}"
    assert res.boxes_processed <= 200000, f"boxes {res.boxes_processed}"
    assert wall < 300.0, f"wall {wall:.1f}s"
    return f"eps=1e-4 boxes={res.boxes_processed} depth={res.max_depth} wall={wall:.1f}s"


@judged(3)
def test_criterion_3_example2_mvt_bounds(example2):
    built = mvt_build(example2.system, example2.region)
    lo, hi = built.entry_intervals[0][0, 0], built.entry_intervals[1][0, 0]
    # exact values ln(2)/4 and 4 ln(2)
    assert abs(lo - 0.1733) <= 1e-4 and abs(hi - 2.7726) <= 1e-4, f"entry (1,1) [{lo}, {hi}]"
    assert abs(lo - 0.174) <= 1e-3 and abs(hi - 2.77) <= 1e-2, "third significant figure"
    assert built.n_vertices == 2 and built.varying_entries == [(0, 0)]
    return f"entry (1,1) = [{lo:.5f}, {hi:.5f}]"


@pytest.mark.slow
@judged(4)
def test_criterion_4_example2_tight_certified(cert_tight):
    res, wall = cert_tight
    assert isinstance(res, Certified), f"outcome {res!r}"
    assert wall < 300.0, f"wall {wall:.1f}s"
    return f"eps=1e-6 boxes={res.boxes_processed} depth={res.max_depth} wall={wall:.1f}s"


@pytest.mark.xfail(strict=True, reason="the global optimum is at x1 = 2 with value -0.1; "
                   "-0.0499 at x1 = -2 is a local optimum (see notes)")
@judged(5)
def test_criterion_5_example2_overtight_falsified(example2):
    res = falsify(example2.system, example2.region, example2.candidate("overtight"), SearchConfig())
    assert isinstance(res, Falsified), f"outcome {res!r}"
    x = res.witness.x
    assert abs(res.value - (-0.0499)) <= 0.001 and abs(x[0] - (-2.0)) <= 0.01, (
        f"value {res.value:.4f} at x={np.round(x, 4).tolist()}, expected -0.0499 at x1=-2")
    return f"value={res.value:.4f} x={np.round(x, 4).tolist()}"


def test_overtight_local_optimum_near_minus_two(example2):
    """The reported witness region does hold a local minimum of -0.05."""
    sysm, cand = example2.system, example2.candidate("overtight")
    at_caption = margin(sysm, cand, [-2.0, -0.20001])
    assert abs(at_caption - (-0.0499)) <= 0.001
    ys = np.linspace(-2.0, 2.0, 401)
    local = min(margin(sysm, cand, [-2.0, y]) for y in ys)
    assert abs(local - (-0.05)) <= 1e-6


@pytest.mark.slow
@judged(6)
def test_criterion_6_tightening_brackets_lower_slope(example2):
    fam = example2.family("mvt_to_lower_slope")
    res = tighten(example2.system, example2.region, fam, t_tol=1e-2, epsilon=1e-6)
    lo_ok = fam.candidate(res.t_star).A[0][0, 0]
    assert res.t_hi is not None and isinstance(res.outcome_hi, Falsified)
    lo_bad = fam.candidate(res.t_hi).A[0][0, 0]
    assert lo_ok <= SEVEN_TWELFTHS + 0.005, f"certified lower slope {lo_ok}"
    assert lo_bad >= SEVEN_TWELFTHS - 0.005, f"falsified lower slope {lo_bad}"
    assert res.t_hi - res.t_star <= 1e-2
    return f"certified lower slope {lo_ok:.5f}, falsified {lo_bad:.5f}, 7/12={SEVEN_TWELFTHS:.5f}"


@pytest.mark.slow
def test_tightening_full_family_stops_at_upper_slope(example2):
    """Moving both slopes, the upper one reaches its bound 2 before the lower one reaches 7/12."""
    fam = example2.family("mvt_to_overtight")
    res = tighten(example2.system, example2.region, fam, t_tol=1e-2, epsilon=1e-6)
    ok = fam.candidate(res.t_star).A
    assert ok[0][0, 0] <= SEVEN_TWELFTHS and ok[1][0, 0] >= 2.0
    bad = fam.candidate(res.t_hi).A
    assert bad[1][0, 0] < 2.0
    assert isinstance(res.outcome_hi, Falsified)


@judged(7)
def test_criterion_7_nnls_matches_enumeration():
    rng = np.random.default_rng(7)
    worst = 0.0
    for _ in range(1000):
        n_d = int(rng.integers(1, 5))
        dim = int(rng.integers(1, 5))
        M = rng.standard_normal((dim, n_d))
        b = rng.standard_normal(dim)
        worst = max(worst, abs(nnls_project(M, b).distance - nnls_by_enumeration(M, b)))
    assert worst <= 1e-8, f"max deviation {worst:.2e}"
    return f"max deviation {worst:.1e} over 1000 instances"


@judged(8)
def test_criterion_8_inner_problem_matches_optimiser(example1, example2):
    rng = np.random.default_rng(8)
    worst = 0.0
    cases = [(example1, "four_vertex"), (example1, "eight_vertex"), (example2, "overtight"), (example2, "tight")]
    for k in range(500):
        prob, name = cases[k % len(cases)]
        box = prob.region.box
        x = rng.uniform(box[:, 0], box[:, 1])
        cand = prob.candidate(name)
        data = build(prob.system, cand, x)
        ref = inner_minimum(data.M, data.b)
        worst = max(worst, abs(margin(prob.system, cand, x, norm="full") - ref))
    assert worst <= 1e-4, f"max deviation {worst:.2e}"
    return f"max deviation {worst:.1e} over 500 points"


def _random_expression(rng, depth):
    if depth == 0 or rng.random() < 0.25:
        r = rng.random()
        if r < 0.6:
            return f"x{int(rng.integers(1, 3))}"
        return f"{rng.uniform(-3, 3):.3f}"
    kind = rng.integers(0, 7)
    a = _random_expression(rng, depth - 1)
    if kind == 0:
        return f"({a} + {_random_expression(rng, depth - 1)})"
    if kind == 1:
        return f"({a} - {_random_expression(rng, depth - 1)})"
    if kind == 2:
        return f"({a} * {_random_expression(rng, depth - 1)})"
    if kind == 3:
        return f"({a} / {_random_expression(rng, depth - 1)})"
    if kind == 4:
        return f"({a})^{int(rng.integers(-2, 5))}"
    if kind == 5:
        return f"{rng.choice(['exp', 'sin', 'cos', 'tanh', 'abs'])}({a})"
    return f"{rng.choice(['ln', 'sqrt'])}(1.5 + ({a})^2)"


@judged(9)
def test_criterion_9_interval_enclosure_fuzz():
    rng = np.random.default_rng(9)
    violations = 0
    checked = 0
    pairs = 0
    while pairs < 1000:
        text = _random_expression(rng, 4)
        e = parse(text, 2)
        c = rng.uniform(-2, 2, 2)
        w = rng.uniform(0, 1.5, 2)
        box = [Interval(c[i] - w[i], c[i] + w[i]) for i in range(2)]
        try:
            enc = e.enclose(box)
        except ArithmeticError:
            continue  # enclosure declined (division by an interval containing zero, ...)
        pairs += 1
        for _ in range(100):
            z = rng.uniform(c - w, c + w)
            try:
                v = e.evaluate(z)
            except (ArithmeticError, ValueError):
                continue
            if not math.isfinite(v):
                continue
            checked += 1
            if not enc.lo <= v <= enc.hi:
                violations += 1
    assert violations == 0, f"{violations} violations in {checked} samples"
    return f"0 violations in {checked} samples over {pairs} pairs"


@pytest.mark.slow
@judged(10)
def test_criterion_10_certifier_audit(example1, example2, cert_eight_vertex, cert_tight):
    rng = np.random.default_rng(10)
    lines = []
    for prob, name, (res, _), eps in ((example1, "eight_vertex", cert_eight_vertex, 1e-4),
                                      (example2, "tight", cert_tight, 1e-6)):
        assert isinstance(res, Certified), f"{name} was not certified"
        box = prob.region.box
        Z = rng.uniform(box[:, 0], box[:, 1], size=(100000, 2))
        dz = Z - prob.system.z_s
        V = np.einsum("ikj,nj->nik", prob.candidate(name).stacked, dz)
        F = np.array([prob.system.evaluate(z) for z in Z]) - prob.system.x_s
        d = planar_hull_distance(V, F)
        worst = float(d.max())
        assert worst <= eps + 1e-9, f"{name}: max distance {worst:.3e}"
        lines.append(f"{name} max={worst:.1e}")
    return "; ".join(lines)
