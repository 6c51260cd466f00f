import numpy as np
import pytest

from schmidt_moments.ensembles import EnsembleSpec
from schmidt_moments.experiments import (
    certify_state,
    detection_ratio,
    evaluate_sample,
    isotropic_check,
    map_samples,
    negativity_curve,
    parse_criterion,
    schmidt_state,
    shadow_benchmark,
    threshold_compare,
    triangle_fractions,
    triangle_grid,
    triangle_scan,
)
from schmidt_moments.ensembles import isotropic_state


def test_parse_criterion():
    assert parse_criterion("reduction") == ("reduction", None)
    assert parse_criterion("moment:7") == ("moment", 7)
    assert parse_criterion("moment-upto:12") == ("moment-upto", 12)
    assert parse_criterion("third-order") == ("third-order", None)
    for bad in ("moment:2", "moment", "bogus", "moment:x"):
        with pytest.raises(ValueError):
            parse_criterion(bad)


def test_map_samples_keeps_order():
    assert map_samples(lambda i: i * i, 20, threads=4) == [i * i for i in range(20)]


def test_detection_ratio_thread_independent():
    spec = EnsembleSpec("induced", 2, 3, K=2)
    crit = ["reduction", "moment:3", "moment:5", "third-order"]
    a = detection_ratio(spec, crit, [1], 40, seed=3, threads=1)
    b = detection_ratio(spec, crit, [1], 40, seed=3, threads=4)
    assert a == b
    assert all(r.false_positives == 0 for r in a)


def test_detection_ratio_pure_path_matches_dense():
    spec = EnsembleSpec("fixed-sn-pure", 3, 3, r=3)
    for i in range(10):
        pure = evaluate_sample(spec, 5, i, ["reduction", "moment:3", "moment:5"], [1, 2])
        dense = evaluate_sample(spec, 5, i, ["reduction", "moment:3", "moment:5", "cm"], [1, 2])
        for key, hit in pure.detected.items():
            assert dense.detected[key] == hit


def test_detection_ratio_maximally_entangled_all_detected():
    spec = EnsembleSpec("me-depolarized", 3, 3, r=3, eps=0.0)
    rows = detection_ratio(spec, ["reduction", "moment:3", "cm"], [1, 2], 3, seed=0)
    assert all(r.ratio == 1.0 for r in rows)


def test_detection_ratio_rejects_bad_input():
    spec = EnsembleSpec("induced", 2, 2, K=1)
    with pytest.raises(ValueError):
        detection_ratio(spec, ["reduction"], [1], 0, seed=0)
    with pytest.raises(ValueError):
        detection_ratio(spec, ["moment:1"], [1], 3, seed=0)


def test_triangle_grid_cells():
    pts = triangle_grid(60)
    assert len(pts) == 1770
    assert all(x3 > 0 for _, _, x3 in pts)
    assert len(triangle_grid(2)) == 1


def test_triangle_fractions_monotone():
    cells = triangle_scan(12, [3, 5, 7], k=2)
    fr = triangle_fractions(cells)
    assert fr[3] <= fr[5] <= fr[7]
    # B_7 is complete for three distinct Schmidt coefficients
    assert all(c.detected == c.reduction_detected for c in cells if c.N == 7 and c.distinct <= 3)


def test_negativity_curve_agrees():
    pts = negativity_curve(3, 3, 4, [1, 2], np.linspace(0, 1, 11))
    assert max(abs(p.dense - p.closed_form) for p in pts) < 1e-10


def test_threshold_compare_agrees():
    rows = threshold_compare([(2, 2, 2), (3, 3, 4)])
    assert all(abs(r.root - r.closed_form) < 1e-12 for r in rows)


def test_isotropic_check_rows():
    rows = isotropic_check([2, 3], np.linspace(0, 1, 5))
    assert len(rows) == 5 * 1 + 5 * 2
    assert all(abs(r.norm1 - r.norm1_closed) < 1e-10 for r in rows)
    assert all(r.third_order_detected == (r.k <= r.schmidt_number - 1) for r in rows)


def test_shadow_benchmark_reproducible():
    rho = isotropic_state(2, 0.9)
    a = shadow_benchmark(rho, 30, 20, 4, seed=1)
    b = shadow_benchmark(rho, 30, 20, 4, seed=1, threads=2)
    assert a[0] == b[0]
    assert [s.name for s in a[1]] == ["p2", "p3", "a2", "a3", "t2"]
    assert a[2]["third_order_exact"]


def test_certify_state_example():
    rho = schmidt_state([0.8] + [1 / 15] * 3, 4, 4)
    best, rows = certify_state(rho, 7)
    assert best == 4
    assert [r.target_sn for r in rows] == [2, 3, 4]
    assert all(r.detected for r in rows)
