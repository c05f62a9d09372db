import numpy as np
import pytest

from anticonc.distributions import spectral_measure, tail_mass
from anticonc.errors import CapacityError, ClassCapError, DomainError
from anticonc.progressions import (
    ApproxResult,
    Cgap,
    ConvexBody,
    Gap,
    beta_rm,
    gamma_rs,
    neighborhood_coverage,
    tv_cover_check,
    uncovered_mass,
)


def test_gap_image_and_size():
    p = Gap([1.0, 1.0], [[1.0], [3.0]])
    img = p.image()
    # {m1 + 3 m2 : |mi| <= 1} = {-4..4}
    assert img.shape == (9, 1)
    assert p.size() == 9 == p.box_total()
    assert p.is_proper()


def test_gap_non_proper_example():
    p = Gap([1.0, 1.0], [[1.0], [2.0]])
    assert p.box_total() == 9
    assert p.size() == 7
    assert not p.is_proper()


def test_gap_dilate_scales_box():
    p = Gap([1.0], [[2.0]])
    q = p.dilate(2.5)
    assert q.size() == 5  # |m| <= 2.5 -> m in -2..2
    with pytest.raises(DomainError):
        p.dilate(0.0)


def test_gap_rank_zero():
    p = Gap([], [], ambient_dim=2)
    img = p.image()
    assert img.shape == (1, 2)
    assert p.size() == 1 and p.is_proper()


def test_gap_capacity():
    p = Gap([10_000.0, 10_000.0], [[1.0], [np.sqrt(2.0)]])
    with pytest.raises(CapacityError):
        p.size(budget=1000)


def test_gap_json_round_trip():
    p = Gap([2.0, 1.0], [[1.0, 0.0], [0.5, 0.5]])
    obj = p.to_json_obj()
    q = Gap(obj["L"], obj["g"], obj["dim"])
    np.testing.assert_array_equal(p.image(), q.image())


def test_convex_body_box_contains_and_bbox():
    v = ConvexBody.box([2.0, 1.0])
    mask = v.contains([[2.0, 1.0], [2.1, 0.0], [-2.0, -1.0]])
    assert mask.tolist() == [True, False, True]
    np.testing.assert_allclose(v.bounding_box(), [2.0, 1.0])


def test_convex_body_halfspaces_bbox_matches_linear_program():
    # |x| + |y| <= 2 (cross-polytope)
    normals = [[1, 1], [1, -1], [-1, 1], [-1, -1]]
    v = ConvexBody.halfspaces(normals, [2.0] * 4)
    np.testing.assert_allclose(v.bounding_box(), [2.0, 2.0], atol=1e-9)
    assert v.contains([[0.0, 2.0]]).all()
    assert not v.contains([[1.5, 1.5]]).any()


def test_cgap_lattice_points_and_cap():
    body = ConvexBody.box([1.5])
    c = Cgap([2.0], body, 3)
    np.testing.assert_array_equal(np.sort(c.points()[:, 0]), [-2.0, 0.0, 2.0])
    tight = Cgap([2.0], body, 2)
    with pytest.raises(ClassCapError):
        tight.points()


def test_cgap_rank_zero_is_origin():
    c = Cgap(np.zeros(0), ConvexBody.box([]), 1)
    np.testing.assert_array_equal(c.points(), [[0.0]])


def test_neighborhood_coverage_closed():
    covered, uncovered = neighborhood_coverage(
        [[0.0], [1.0], [2.5]], [[1.0]], 1.0
    )
    assert covered == 2
    assert list(uncovered) == [2]


def test_uncovered_mass_strict_outside():
    w = spectral_measure(np.array([[1.0], [2.0]]))
    # K = {0}: neighborhood of radius exactly 1 still covers the +-1 atoms
    assert uncovered_mass(w, [[0.0]], 1.0) == 0.5
    assert uncovered_mass(w, [[0.0]], 2.0) == 0.0
    with pytest.raises(DomainError):
        uncovered_mass(w, [[0.0]], -1.0)


@pytest.mark.parametrize("r,m", [(0, 1), (1, 3), (2, 5)])
def test_beta_rm_never_exceeds_tail(r, m):
    w = spectral_measure(np.array([[1.0], [2.0], [3.5]]))
    tau = 0.75
    res = beta_rm(w, tau, r, m)
    assert res.value <= tail_mass(w, tau) + 1e-15
    # witness replay is exact, not approximate
    assert uncovered_mass(w, res.witness.points(), tau) == res.value


def test_beta_rm_rank_zero_is_tail():
    w = spectral_measure(np.array([[1.0], [4.0]]))
    for tau in (0.5, 1.0, 3.0, 4.0):
        res = beta_rm(w, tau, 0, 1)
        assert res.exact
        assert res.value == tail_mass(w, tau)


def test_beta_rm_finds_perfect_cover():
    w = spectral_measure(np.ones((6, 1)))
    res = beta_rm(w, 0.5, 1, 3)
    assert res.value == 0.0
    assert res.witness.points().shape[0] <= 3


def test_gamma_rs_witness_replay_and_zero_rank():
    w = spectral_measure(np.array([[1.0], [2.0], [4.0]]))
    res = gamma_rs(w, 0.5, 1, 4)
    assert uncovered_mass(w, res.witness.points(), 0.5) == res.value
    base = gamma_rs(w, 0.5, 0, 1)
    assert base.exact and base.value == tail_mass(w, 0.5)


def test_beta_rm_rejects_bad_args():
    w = spectral_measure(np.array([[1.0]]))
    with pytest.raises(DomainError):
        beta_rm(w, -1.0, 1, 3)
    with pytest.raises(DomainError):
        beta_rm(w, 1.0, -1, 3)
    with pytest.raises(DomainError):
        beta_rm(w, 1.0, 1, 0)
    two_d = spectral_measure(np.array([[1.0, 0.0]]))
    with pytest.raises(DomainError):
        beta_rm(two_d, 1.0, 1, 3)


def test_tv_cover_check_box():
    p = Gap([1.0, 1.0], [[1.0], [3.0]])
    rep = tv_cover_check(p, ConvexBody.box([4.5]))
    assert rep.all_hold


def test_approx_result_fields():
    w = spectral_measure(np.array([[2.0]]))
    res = beta_rm(w, 1.0, 0, 1)
    assert isinstance(res, ApproxResult)
    assert res.evaluations >= 1
