import math

import numpy as np
import pytest

from reachplan.baseregion import BaseGridSpec, BaseRegion
from reachplan.regiongeo import UncertaintyModel
from reachplan.robustsim import evaluate, sample_offset
from reachplan.sequencer import plan


def test_sample_offset_zero_sigma():
    rng = np.random.default_rng(0)
    for model in ("uniform-disk", "gaussian-radial", "boundary-worst-case"):
        out = sample_offset(UncertaintyModel(0.0, model=model), rng, size=100)
        np.testing.assert_allclose(out, 0.0, atol=1e-15)


def test_uniform_disk_mean_radius():
    rng = np.random.default_rng(1)
    sigma = 0.3
    out = sample_offset(UncertaintyModel(sigma, model="uniform-disk"), rng,
                        size=100000)
    radii = np.hypot(out[:, 0], out[:, 1])
    assert radii.max() <= sigma + 1e-12
    # closed-form mean radius of a uniform disk is 2/3 sigma
    assert abs(radii.mean() - 2.0 * sigma / 3.0) < 0.01 * sigma


def test_boundary_samples_on_circle():
    rng = np.random.default_rng(2)
    sigma = 0.25
    out = sample_offset(UncertaintyModel(sigma, model="boundary-worst-case"),
                        rng, size=1000)
    radii = np.hypot(out[:, 0], out[:, 1])
    np.testing.assert_allclose(radii, sigma, atol=1e-12)


def test_gaussian_axis_scale():
    rng = np.random.default_rng(3)
    sigma = 0.4
    out = sample_offset(UncertaintyModel(sigma, model="gaussian-radial"), rng,
                        size=200000)
    assert abs(out[:, 0].std() - sigma / math.sqrt(2)) < 0.005
    assert abs(out[:, 1].std() - sigma / math.sqrt(2)) < 0.005


def test_sample_offset_scalar_shape():
    rng = np.random.default_rng(4)
    single = sample_offset(UncertaintyModel(0.1), rng)
    assert single.shape == (2,)


def _strip_regions(spans, height=10, width=80, cell=0.05):
    grid = BaseGridSpec(0.0, 0.0, cell, width, height)
    out = []
    for i, (lo, hi) in enumerate(spans, start=1):
        mask = np.zeros((height, width), dtype=bool)
        mask[:, lo:hi] = True
        out.append(BaseRegion(grid=grid, mask=mask, tray_id=f"t{i}"))
    return out


def _planned(regions, sigma, model="boundary-worst-case", seed=0):
    u = UncertaintyModel(sigma, model=model, seed=seed)
    result = plan(regions, u, (-0.5, 0.25), (4.5, 0.25))
    return result, u


def test_evaluate_deterministic():
    regions = _strip_regions([(0, 30), (20, 50), (55, 80)])
    result, u = _planned(regions, 0.10)
    a = evaluate(result, regions, u, trials=2000)
    b = evaluate(result, regions, u, trials=2000)
    assert a.to_text() == b.to_text()


def test_evaluate_success_at_zero_sigma():
    regions = _strip_regions([(0, 30), (20, 50), (55, 80)])
    result, u = _planned(regions, 0.0)
    report = evaluate(result, regions, u, trials=500)
    assert report.planned_overall == 1.0
    assert report.naive_overall == 1.0
    assert report.planned_stops <= report.naive_stops


def test_overall_bounded_by_per_stop():
    regions = _strip_regions([(0, 30), (20, 50), (55, 80)])
    result, u = _planned(regions, 0.10, model="gaussian-radial")
    report = evaluate(result, regions, u, trials=5000)
    assert report.planned_overall <= min(report.planned_per_stop) + 1e-12
    assert report.naive_overall <= min(report.naive_per_stop) + 1e-12


def test_success_monotone_in_sigma():
    regions = _strip_regions([(0, 30), (20, 50), (55, 80)])
    trials = 10000
    rates = []
    for sigma in np.linspace(0.0, 0.3, 7):
        result, _ = _planned(regions, 0.0)
        u = UncertaintyModel(float(sigma), model="uniform-disk", seed=9)
        report = evaluate(result, regions, u, trials=trials)
        rates.append(report.planned_overall)
    for lo, hi in zip(rates[1:], rates[:-1]):
        p = max(min(hi, 1.0 - 1e-9), 1e-9)
        stderr = math.sqrt(p * (1 - p) / trials)
        assert lo <= hi + 3 * stderr + 1e-9


def test_naive_success_with_quantization_slack():
    regions = _strip_regions([(0, 30), (25, 55), (50, 80)], height=12)
    result, _ = _planned(regions, 0.0)
    cell = regions[0].grid.cell
    for region in regions:
        from reachplan.regiongeo import make_record
        radius = make_record((region.tray_id,), region.grid,
                             region.mask).robust_radius
        assert radius > 0.1
    sigma = 0.1 - cell * math.sqrt(2) / 2
    u = UncertaintyModel(sigma, model="boundary-worst-case", seed=5)
    report = evaluate(result, regions, u, trials=10000)
    assert report.naive_overall == 1.0


def test_report_time_model():
    regions = _strip_regions([(0, 30), (20, 50), (55, 80)])
    result, u = _planned(regions, 0.10)
    report = evaluate(result, regions, u, trials=100, speed=0.5, overhead=20.0)
    assert report.planned_time == pytest.approx(
        report.planned_length / 0.5 + report.planned_stops * 20.0)
    assert report.naive_time == pytest.approx(
        report.naive_length / 0.5 + report.naive_stops * 20.0)
    assert report.time_ratio == pytest.approx(
        report.planned_time / report.naive_time)


def test_report_text_format():
    regions = _strip_regions([(0, 30), (20, 50), (55, 80)])
    result, u = _planned(regions, 0.10)
    text = evaluate(result, regions, u, trials=100).to_text()
    lines = text.strip().splitlines()
    assert lines[0] == "simreport v1"
    assert any(line.startswith("time_ratio ") for line in lines)
    assert any(line.startswith("planned_overall ") for line in lines)
