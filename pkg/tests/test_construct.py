import numpy as np
import pytest

from ldicert.certify import Certified, certify
from ldicert.construct import CandidateFamily, mvt_build, tighten
from ldicert.errors import LooseEndpointNotCertified, TooManyVertices
from ldicert.expr import parse
from ldicert.farkas import CandidateLDI, DynamicalSystem, Region
from ldicert.search import Falsified, SearchConfig

FAST = SearchConfig(random_starts=30)


def test_mvt_of_cubic_encloses_jacobian_range(cubic):
    system, region, _ = cubic
    built = mvt_build(system, region)
    lo, hi = built.entry_intervals
    # f'(x) = 0.5 + 0.3 x^2 on [-1, 1]
    assert lo[0, 0] <= 0.5 and hi[0, 0] >= 0.8
    assert hi[0, 0] - lo[0, 0] <= 0.3 + 1e-12
    assert built.n_vertices == 2 and built.varying_entries == [(0, 0)]


def test_mvt_candidate_is_certified(example1, example2):
    for prob in (example1, example2):
        built = mvt_build(prob.system, prob.region)
        assert built.n_vertices == 2 ** len(built.varying_entries)
        assert isinstance(certify(prob.system, prob.region, built.vertices, 1e-6), Certified)


def test_mvt_constant_entries_are_not_vertices(example2):
    built = mvt_build(example2.system, example2.region)
    lo, hi = built.entry_intervals
    assert np.allclose(lo[:, 1], hi[:, 1]) and np.allclose(lo[1], hi[1])


def test_mvt_vertex_limit():
    n = 4
    f = tuple(parse(" + ".join(f"0.1*x{j + 1}^2" for j in range(n)), n) for _ in range(n))
    system = DynamicalSystem(n, 0, f, np.zeros(n), [])
    region = Region(np.tile([-1.0, 1.0], (n, 1)), np.zeros((0, 2)))
    with pytest.raises(TooManyVertices):
        mvt_build(system, region, max_vertices=1000)


def test_family_interpolates():
    fam = CandidateFamily(CandidateLDI.from_matrices([[[0.0]]]), CandidateLDI.from_matrices([[[1.0]]]))
    assert fam.candidate(0.25).A[0, 0, 0] == 0.25
    with pytest.raises(ValueError):
        CandidateFamily(CandidateLDI.from_matrices([[[0.0]]]),
                        CandidateLDI.from_matrices([[[0.0]], [[1.0]]]))


def test_tighten_brackets_the_exact_boundary(cubic):
    system, region, family = cubic
    res = tighten(system, region, family, t_tol=1e-2, epsilon=1e-6, search_config=FAST)
    # lower slope 0.4 + 0.12 t reaches 0.5 exactly when the upper one reaches 0.6: t = 5/6
    assert res.t_star <= 5 / 6 < res.t_hi
    assert res.t_hi - res.t_star <= 1e-2
    assert isinstance(res.outcome, Certified) and isinstance(res.outcome_hi, Falsified)
    assert not res.flagged
    assert res.history[0] == (0.0, "certified") and res.history[1] == (1.0, "falsified")


def test_tighten_whole_family_certified(cubic):
    system, region, _ = cubic
    fam = CandidateFamily(CandidateLDI.from_matrices([[[0.4]], [[0.7]]]),
                          CandidateLDI.from_matrices([[[0.45]], [[0.65]]]))
    res = tighten(system, region, fam, search_config=FAST)
    assert res.t_star == 1.0 and res.t_hi is None


def test_tighten_loose_endpoint_must_certify(cubic):
    system, region, family = cubic
    reversed_family = CandidateFamily(family.tight, family.loose)
    with pytest.raises(LooseEndpointNotCertified) as info:
        tighten(system, region, reversed_family, search_config=FAST)
    assert isinstance(info.value.outcome, Falsified)


def test_tighten_rejects_bad_tolerance(cubic):
    system, region, family = cubic
    with pytest.raises(ValueError):
        tighten(system, region, family, t_tol=0.0)
