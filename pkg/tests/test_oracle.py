import math

import numpy as np
import pytest
from scipy.linalg import expm

from deleeuw import catalog
from deleeuw.errors import ChartNotInjective, EpsilonOutOfRange, ValidationError
from deleeuw.lie import LieAlgebra
from deleeuw.neighborhoods import (Ball, Box, LogProduct, OrbitCapped, SplitChain, exact_log_product_volume,
                                   parse_family)
from deleeuw.oracle import (McEstimate, _batched_expm, _batched_log, group_level_delta, mc_delta, mc_volume,
                            orbit_capped_delta, shrink_set_delta, split_estimates)
from deleeuw.reps import Representation

R1 = LieAlgebra(1, ("a",), np.zeros((1, 1, 1)))


def rep_r1(action, mats):
    return Representation(R1, np.asarray(action, float)[None], tuple((f"g{i}", m) for i, m in enumerate(mats)))


def unit_logprod(eps=0.5):
    return LogProduct(Box((1.0,)), Box((1.0,)), 1.0, 1.0, eps)


def test_log_product_membership():
    spec = unit_logprod()
    assert not spec.contains([0.9, 0.9])[0]
    assert spec.contains([0.9, 0.2])[0]
    assert spec.contains([-0.9, -0.2])[0]
    assert not spec.contains([1.0, 0.0])[0]


def test_log_product_volume_closed_form():
    assert unit_logprod().volume() == pytest.approx(2.0 * (1 + math.log(2.0)), abs=1e-12)
    assert unit_logprod().volume() == pytest.approx(3.3863, abs=1e-4)


def test_log_product_eps_out_of_range():
    with pytest.raises(EpsilonOutOfRange):
        unit_logprod(1.5)
    with pytest.raises(EpsilonOutOfRange):
        unit_logprod(0.0)


def test_doubling_R1_adds_eps_log2():
    base = exact_log_product_volume(1, 1, 2.0, 2.0, 1.0, 1.0, 0.3)
    doubled = exact_log_product_volume(1, 1, 2.0, 2.0, 2.0, 1.0, 0.3)
    assert doubled - base == pytest.approx(0.3 * math.log(2.0) * 4.0)


def test_box_volume_exact_and_disk_area():
    box = mc_volume(Box((1.0, 1.0)), 20000, seed=0)
    assert box.volume == 4.0
    disk = mc_volume(Ball(1.0, 2), 200000, seed=0)
    assert abs(disk.volume - math.pi) < 3 * disk.volume_stderr


def test_log_product_mc_volume():
    est = mc_volume(unit_logprod(), 400000, seed=1)
    assert abs(est.volume - unit_logprod().volume()) < 4 * est.volume_stderr


def test_log_product_sampler_is_uniform():
    spec = LogProduct(Ball(1.0, 2), Box((1.0,)), 1.0, 1.0, 0.3)
    rng = np.random.default_rng(0)
    pts = spec.sample(200000, rng)
    assert spec.contains(pts).mean() > 0.999
    # compare the mass of a sub-region with rejection sampling from the bounding box
    box = (2 * rng.random((800000, 3)) - 1) * spec.half_widths()
    inside = box[spec.contains(box)]
    region = lambda x: np.abs(x[:, 2]) < 0.25
    p_exact, p_rej = region(pts).mean(), region(inside).mean()
    se = math.sqrt(p_rej * (1 - p_rej) * (1 / len(pts) + 1 / len(inside)))
    assert abs(p_exact - p_rej) < 4 * se


def test_identity_F_gives_one():
    R = rep_r1(np.zeros((2, 2)), [np.eye(2)])
    est = mc_delta(R, Ball(1.0, 2), 10000, seed=0)
    assert est.value == 1.0 and est.hits == est.samples


def test_mc_delta_is_symmetric_under_inverses():
    a = rep_r1(np.diag([1.0, -1.0]), [np.diag([2.0, 0.5])])
    b = rep_r1(np.diag([1.0, -1.0]), [np.diag([0.5, 2.0])])
    ea = mc_delta(a, Ball(1.0, 2), 50000, seed=5)
    eb = mc_delta(b, Ball(1.0, 2), 50000, seed=5)
    assert ea.value == eb.value


def test_diag_box_exact():
    # g = diag(2, 1/2) with its inverse: the intersection is the box [-1/2,1/2]^2
    R = rep_r1(np.diag([1.0, -1.0]), [np.diag([2.0, 0.5])])
    est = mc_delta(R, Box((1.0, 1.0)), 200000, seed=2)
    assert abs(est.value - 0.25) < 4 * est.stderr


def test_shrink_of_ball():
    R = rep_r1(np.zeros((3, 3)), [np.eye(3)])
    est = shrink_set_delta(R, Ball(1.0, 3), 0.1, 200000, seed=3)
    assert abs(est.value - 0.9 ** 3) < 4 * est.stderr
    assert shrink_set_delta(R, Ball(1.0, 3), 1.0, 10000, seed=3).value == 0.0


def test_shrink_is_monotone_with_common_seed():
    e = catalog.get("heisenberg3")
    vals = [shrink_set_delta(e.rep, Ball(1.0, 3), r, 20000, seed=4).value for r in (0.0, 0.05, 0.1, 0.2)]
    assert all(b <= a for a, b in zip(vals, vals[1:]))


def test_orbit_capped_with_trivial_H_is_ball():
    R = rep_r1(np.diag([1.0, -1.0]), [np.diag([2.0, 0.5])])
    est = orbit_capped_delta(np.eye(2)[None], R, 0.5, 1.0, 100000, seed=6)
    ref = mc_delta(R, Ball(0.5, 2), 100000, seed=6)
    assert est.approximate
    assert "approximated" in est.note
    assert abs(est.value - ref.value) < 4 * math.hypot(est.stderr, ref.stderr)


def test_orbit_capped_exact_gauge_not_flagged():
    spec = OrbitCapped(0.5, 1.0, np.eye(2), orbit_gauge=lambda x: np.linalg.norm(x, axis=1))
    assert not spec.approximate


def test_split_chain_volume_and_membership():
    spec = SplitChain(Ball(1.0, 1), Ball(1.0, 2), 0.1)
    assert spec.volume() == pytest.approx(2.0 * math.pi * 0.01)
    assert spec.contains([0.5, 0.05, 0.05])[0]
    assert not spec.contains([0.5, 0.2, 0.0])[0]


def test_split_estimates_lower_bound_heisenberg():
    e = catalog.get("heisenberg3")
    s = split_estimates(e.rep, e.split, Ball(1.0, 1), Ball(1.0, 2), 0.1, 50000, seed=7)
    assert s.total.value >= s.lower - 4 * s.sigma("lower")
    assert s.sub_shrunk.value <= s.sub.value


def test_batched_expm_and_log():
    rng = np.random.default_rng(0)
    X = 0.1 * rng.standard_normal((5, 3, 3))
    E = _batched_expm(X)
    assert np.allclose(E, np.stack([expm(x) for x in X]), atol=1e-12)
    assert np.allclose(_batched_log(E), X, atol=1e-10)
    with pytest.raises(ChartNotInjective):
        _batched_log(np.stack([3.0 * np.eye(3)]))


def test_group_level_chart_too_big():
    e = catalog.get("sl2_adjoint")
    with pytest.raises(ChartNotInjective):
        group_level_delta(e.rep, Ball(1.0, 3), 5.0, 2000, seed=0)


def test_group_level_small_chart_matches_algebra():
    e = catalog.get("heisenberg3")
    alg = mc_delta(e.rep, Ball(1.0, 3), 40000, seed=8)
    grp = group_level_delta(e.rep, Ball(1.0, 3), 0.01, 40000, seed=8, realization=e.realization,
                            group_matrices=e.realized_group())
    assert abs(alg.value - grp.value) < 4 * math.hypot(alg.stderr, grp.stderr)


def test_workers_deterministic():
    e = catalog.get("sl2_adjoint")
    a = mc_delta(e.rep, Ball(1.0, 3), 30000, seed=9, workers=3)
    b = mc_delta(e.rep, Ball(1.0, 3), 30000, seed=9, workers=3)
    assert a == b


def test_dimension_mismatch():
    e = catalog.get("sl2_adjoint")
    with pytest.raises(ValidationError):
        mc_delta(e.rep, Ball(1.0, 2), 1000)


def test_estimate_record():
    est = McEstimate.from_counts(25, 100, 0, scale=4.0)
    assert est.value == 0.25
    assert est.stderr == pytest.approx(math.sqrt(0.25 * 0.75 / 100))
    assert est.volume == 1.0
    assert est.to_dict()["samples"] == 100


def test_parse_family():
    assert parse_family("ball:r=2", 3) == Ball(2.0, 3)
    assert parse_family("box:w=1,2", 2) == Box((1.0, 2.0))
    lp = parse_family("hyperbolic:eps=0.5", 2, split_dim=1)
    assert isinstance(lp, LogProduct)
    assert lp.eps == pytest.approx(0.125)
    with pytest.raises(ValidationError):
        parse_family("split:eps=0.1", 3)
    with pytest.raises(ValidationError):
        parse_family("nonsense:r=1", 3)
