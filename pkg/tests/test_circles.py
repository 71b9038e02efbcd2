import numpy as np
import pytest

from unimix_lt.circles import BoundaryResult, run_circles, virtual_cloud
from unimix_lt.data import TwoCircleSpec, gen_two_circles


def test_boundary_result_validation():
    with pytest.raises(ValueError):
        BoundaryResult("balanced", (1.0, 1.0), 0.0, angle_error_deg=120.0, offset=0.0)
    r = BoundaryResult("unimix", (1.0, 1.0), 0.0, angle_error_deg=5.0, offset=0.2)
    assert r.deviation == pytest.approx(5.0 + 2.0)


def test_balanced_scenario_near_ideal_boundary():
    r = run_circles(TwoCircleSpec(seed=0), "balanced")
    assert r.angle_error_deg < 10.0


def test_imbalanced_scenario_worse_than_balanced():
    bal = run_circles(TwoCircleSpec(seed=0), "balanced")
    imb = run_circles(TwoCircleSpec(seed=0), "imbalanced")
    assert imb.deviation > bal.deviation


def test_unimix_beats_imbalanced_median_over_seeds():
    imb, uni = [], []
    for seed in range(5):
        spec = TwoCircleSpec(seed=seed)
        imb.append(run_circles(spec, "imbalanced").deviation)
        uni.append(run_circles(spec, "unimix").deviation)
    assert np.median(uni) < np.median(imb)


def test_unknown_scenario_rejected():
    with pytest.raises(ValueError):
        run_circles(TwoCircleSpec(seed=0), "remix")


def test_virtual_cloud_shapes():
    ds = gen_two_circles(TwoCircleSpec(seed=1))
    for scenario in ("mixup", "unimix"):
        cloud = virtual_cloud(ds, scenario, 50, seed=1)
        assert cloud.shape == (50, 3)
        assert set(np.unique(cloud[:, 2])) <= {0.0, 1.0}
    assert virtual_cloud(ds, "balanced", 50, seed=1).shape == (0, 3)
