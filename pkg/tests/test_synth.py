import numpy as np
import pytest

from driftlag.drift import PhtConfig
from driftlag.pipeline import PipelineConfig
from driftlag.synth import (
    WEEKLY_PATTERN,
    SyntheticSpec,
    generate,
    mean_curve,
    measure_detection_delay,
)


def spec(**kw):
    base = dict(n_days=45, base_level=100.0, growth_pre=1.2, growth_post=1.2,
                break_day=30, season_amplitude=0.0, noise="none", seed=0)
    base.update(kw)
    return SyntheticSpec(**base)


class TestMeanCurve:
    def test_no_break_is_pure_geometric(self):
        mu = mean_curve(spec())
        assert mu[10] == pytest.approx(100.0 * 1.2**10, abs=0.01)
        ratios = mu[1:] / mu[:-1]
        assert np.allclose(ratios, 1.2)

    def test_level_continuous_at_break(self):
        sp = spec(growth_post=1.01)
        mu = mean_curve(sp)
        pre = mean_curve(spec())
        assert mu[30] == pytest.approx(pre[30])  # break value from pre-break trajectory
        assert mu[31] == pytest.approx(mu[30] * 1.01)

    def test_weekly_pattern_mean_zero(self):
        assert WEEKLY_PATTERN.sum() == pytest.approx(0.0)

    def test_seasonal_scale_relative_to_level(self):
        sp = spec(season_amplitude=0.4)
        mu = mean_curve(sp)
        trend = mean_curve(spec())
        assert np.allclose(mu / trend, 1.0 + 0.4 * WEEKLY_PATTERN[np.arange(45) % 7])


class TestGenerate:
    def test_noise_none_exact(self):
        series = generate(spec())
        assert np.allclose(series.values, mean_curve(spec()))

    def test_determinism_under_seed(self):
        a = generate(spec(noise="poisson", seed=5))
        b = generate(spec(noise="poisson", seed=5))
        assert np.array_equal(a.values, b.values)
        c = generate(spec(noise="poisson", seed=6))
        assert not np.array_equal(a.values, c.values)

    def test_poisson_mean_matches_mu(self):
        sp = spec(n_days=10, break_day=5, base_level=50.0)
        mu = mean_curve(sp)
        samples = np.stack([
            generate(spec(n_days=10, break_day=5, base_level=50.0,
                          noise="poisson", seed=s)).values
            for s in range(1000)
        ])
        se = np.sqrt(mu / 1000)
        assert (np.abs(samples.mean(axis=0) - mu) <= 3 * se + 1e-9).all()

    def test_invariants_enforced(self):
        with pytest.raises(ValueError):
            spec(break_day=45)
        with pytest.raises(ValueError):
            spec(growth_pre=1.6)
        with pytest.raises(ValueError):
            spec(noise="gaussian")


class TestMeasureDetectionDelay:
    def test_no_break_no_drift(self):
        assert measure_detection_delay(spec(growth_post=1.2)) is None

    def test_break_detected_quickly(self):
        sp = spec(growth_pre=1.25, growth_post=1.03)
        delay = measure_detection_delay(sp)
        assert delay is not None
        assert 0 <= delay <= 7

    def test_delay_monotone_in_threshold(self):
        sp = spec(growth_pre=1.25, growth_post=1.03, noise="poisson", seed=2,
                  base_level=500.0)
        delays = []
        for threshold in (0.15, 0.3, 0.6, 1.2):
            cfg = PipelineConfig(pht=PhtConfig(threshold=threshold))
            delays.append(measure_detection_delay(sp, cfg))
        numeric = [d for d in delays if d is not None]
        assert numeric == sorted(numeric)

    def test_break_must_be_monitored(self):
        with pytest.raises(ValueError):
            measure_detection_delay(spec(break_day=10), npi_day=9)
