import numpy as np
import pytest
from hypothesis import given, strategies as st

from driftlag import dates
from driftlag.data import DailySeries, RegionId, RegionKind
from driftlag.drift import (
    AdwinState,
    DriftResult,
    MisalignedInputs,
    PageHinkleyDetector,
    PhtConfig,
    PhtState,
    adwin_step,
    detect_drift,
    pht_step,
    smape,
    smape_series,
)
from driftlag.forecast import ForecastSeries

REGION = RegionId("Testland", RegionKind.COUNTRY)

finite_nonneg = st.floats(min_value=0.0, max_value=1e12, allow_nan=False,
                          allow_infinity=False)


class TestSmape:
    def test_equal_inputs(self):
        assert smape(100.0, 100.0) == 0.0

    def test_both_zero_convention(self):
        assert smape(0.0, 0.0) == 0.0

    def test_direct_formula(self):
        assert smape(1.0, 3.0) == pytest.approx(1.0)  # 2*2/4

    @given(finite_nonneg, finite_nonneg)
    def test_bounds_and_symmetry(self, a, f):
        v = smape(a, f)
        assert 0.0 <= v <= 2.0
        assert v == smape(f, a)

    @given(st.one_of(st.just(0.0), st.floats(min_value=1e-6, max_value=1e9)),
           st.one_of(st.just(0.0), st.floats(min_value=1e-6, max_value=1e9)),
           st.floats(min_value=1e-3, max_value=1e3, allow_nan=False))
    def test_scale_invariance(self, a, f, k):
        assert smape(k * a, k * f) == pytest.approx(smape(a, f), abs=1e-12)

    def test_non_finite_rejected(self):
        with pytest.raises(ValueError):
            smape(float("inf"), 1.0)

    def test_series_matches_scalar(self):
        rng = np.random.default_rng(0)
        a = rng.uniform(0, 100, 50)
        f = rng.uniform(0, 100, 50)
        vec = smape_series(a, f)
        assert np.allclose(vec, [smape(x, y) for x, y in zip(a, f)])


class TestPhtStep:
    def test_constant_stream_never_alarms(self):
        cfg = PhtConfig()
        state = PhtState()
        for _ in range(500):
            state, alarm = pht_step(state, 0.7, cfg)
            assert not alarm
        assert state.cum - state.cum_min == 0.0

    def test_jump_alarms_within_three_observations(self):
        cfg = PhtConfig()
        state = PhtState()
        for x in (0.0, 0.0, 0.0):
            state, alarm = pht_step(state, x, cfg)
            assert not alarm
        fired_after = None
        for i in range(1, 4):
            state, alarm = pht_step(state, 1.0, cfg)
            if alarm:
                fired_after = i
                break
        assert fired_after is not None and fired_after <= 3

    def test_no_alarm_before_min_instances(self):
        cfg = PhtConfig(threshold=1e-9, min_instances=3, delta=0.0)
        state = PhtState()
        state, alarm = pht_step(state, 0.0, cfg)
        assert not alarm
        state, alarm = pht_step(state, 100.0, cfg)  # n=2 < 3, huge excess
        assert not alarm
        state, alarm = pht_step(state, 100.0, cfg)  # n=3: now allowed
        assert alarm

    def test_statistic_non_negative(self):
        rng = np.random.default_rng(4)
        cfg = PhtConfig()
        state = PhtState()
        for x in rng.uniform(0, 2, size=300):
            state, _ = pht_step(state, float(x), cfg)
            assert state.cum - state.cum_min >= 0.0

    def test_plain_mean_when_forgetting_is_one(self):
        cfg = PhtConfig(forgetting=1.0)
        state = PhtState()
        xs = [0.3, 0.9, 0.1, 0.5]
        for x in xs:
            state, _ = pht_step(state, x, cfg)
        assert state.mean == pytest.approx(np.mean(xs))

    @given(st.floats(min_value=0.001, max_value=2.0, allow_nan=False))
    def test_constant_stream_any_level(self, c):
        cfg = PhtConfig()
        state = PhtState()
        for _ in range(50):
            state, alarm = pht_step(state, c, cfg)
            assert not alarm

    def test_threshold_monotonicity(self):
        rng = np.random.default_rng(7)
        for _ in range(20):
            stream = np.concatenate([
                rng.uniform(0, 0.1, size=10),
                rng.uniform(0.5, 1.5, size=20),
            ])
            indices = []
            for threshold in (0.1, 0.3, 0.9, 2.0):
                cfg = PhtConfig(threshold=threshold)
                state = PhtState()
                fired = None
                for i, x in enumerate(stream):
                    state, alarm = pht_step(state, float(x), cfg)
                    if alarm:
                        fired = i
                        break
                indices.append(fired)
            numeric = [i for i in indices if i is not None]
            assert numeric == sorted(numeric)
            # once a higher threshold misses, every later one must miss too
            seen_none = False
            for i in indices:
                if i is None:
                    seen_none = True
                assert not (seen_none and i is not None)


class TestDetectDrift:
    def _pair(self, actuals, forecasts, start="2020-03-13"):
        day0 = dates.parse_iso(start)
        return (
            DailySeries(REGION, day0, np.asarray(actuals, dtype=float)),
            ForecastSeries(day0, np.asarray(forecasts, dtype=float)),
        )

    def test_perfect_forecast_no_drift(self):
        actuals, forecasts = self._pair([10, 20, 30, 40], [10, 20, 30, 40])
        result = detect_drift(actuals, forecasts)
        assert result.drift_day is None
        assert result.alarm_index is None
        assert len(result.ph_trace) == 4

    def test_alarm_day_and_traces(self):
        good = [100.0] * 5
        bad = [300.0] * 6
        actuals, forecasts = self._pair(good + bad, [100.0] * 11)
        result = detect_drift(actuals, forecasts)
        assert result.drift_day is not None
        assert result.alarm_index >= 3  # min_instances
        assert len(result.ph_trace) == result.alarm_index
        assert result.drift_day == actuals.start_day + result.alarm_index - 1

    def test_misaligned_inputs_rejected(self):
        actuals, _ = self._pair([1, 2, 3], [1, 2, 3])
        bad = ForecastSeries(actuals.start_day + 1, np.array([1.0, 2.0, 3.0]))
        with pytest.raises(MisalignedInputs):
            detect_drift(actuals, bad)

    def test_detection_stops_at_first_alarm(self):
        actuals, forecasts = self._pair([1, 1, 1, 50, 50, 1, 1, 50], [1.0] * 8)
        result = detect_drift(actuals, forecasts)
        assert result.alarm_index is not None
        assert len(result.smape_trace) == result.alarm_index <= 5


class TestAdwin:
    def test_constant_stream_no_alarm(self):
        state = AdwinState()
        for _ in range(200):
            state, alarm = adwin_step(state, 0.5)
            assert not alarm

    def test_step_change_detected(self):
        state = AdwinState()
        fired = False
        for x in [0.0] * 60 + [1.0] * 60:
            state, alarm = adwin_step(state, x)
            fired = fired or alarm
        assert fired

    def test_window_retains_recent_regime(self):
        state = AdwinState()
        for x in [0.0] * 60 + [1.0] * 60:
            state, alarm = adwin_step(state, x)
        assert all(v == 1.0 for v in state.window)


class TestDetectorWrapper:
    def test_wrapper_matches_functional_path(self):
        rng = np.random.default_rng(1)
        stream = np.concatenate([rng.uniform(0, 0.05, 8), rng.uniform(0.8, 1.2, 8)])
        det = PageHinkleyDetector()
        wrapper_fired = None
        for i, x in enumerate(stream):
            if det.update(float(x)):
                wrapper_fired = i
                break
        cfg = PhtConfig()
        state = PhtState()
        functional_fired = None
        for i, x in enumerate(stream):
            state, alarm = pht_step(state, float(x), cfg)
            if alarm:
                functional_fired = i
                break
        assert wrapper_fired == functional_fired

    def test_get_params(self):
        det = PageHinkleyDetector(threshold=0.5)
        assert det.get_params()["threshold"] == 0.5
