import numpy as np
import pytest

import hapbeam.forecast as fc
from hapbeam.errors import DataError, ParseError
from hapbeam.forecast import (
    AttitudeSeries,
    ForecastOutput,
    ForecastRequest,
    forecast_ar,
    forecast_errors,
    forecast_linear_trend,
    forecast_persistence,
    load_forecast_csv,
    save_forecast_csv,
)


def series_from(cols, dt=0.1):
    return AttitudeSeries.build(dt, np.column_stack(cols))


def req(origin, l_win=64, h_pred=12, d=6):
    return ForecastRequest(origin, l_win, h_pred, d)


class TestRequest:
    def test_validation(self):
        with pytest.raises(ValueError):
            ForecastRequest(10, 1, 12, 6)
        with pytest.raises(ValueError):
            ForecastRequest(10, 64, 0, 0)
        with pytest.raises(ValueError):
            ForecastRequest(10, 64, 12, 12)
        with pytest.raises(ValueError):
            ForecastRequest(10, 64, 12, -1)

    def test_window_outside_series(self):
        s = series_from([np.zeros(50), np.zeros(50), np.zeros(50)])
        with pytest.raises(DataError):
            forecast_persistence(s, req(40, l_win=64))
        with pytest.raises(DataError):
            forecast_persistence(s, req(60, l_win=10))


class TestPersistence:
    def test_holds_last_sample(self):
        n = np.arange(100, dtype=float)
        s = series_from([0.01 * n, 0.002 * n, -0.001 * n])
        out = forecast_persistence(s, req(80))
        np.testing.assert_array_equal(out.angles, np.tile(s.samples[80], (12, 1)))
        assert out.tag == "persistence"
        assert out.origin == 80


class TestLinearTrend:
    def test_exact_on_affine_series(self):
        n = np.arange(400, dtype=float)
        s = series_from(
            [1e-3 + 2e-4 * n, -5e-4 + 1e-4 * n, 3e-4 - 2e-4 * n]
        )
        out = forecast_linear_trend(s, req(300, l_win=192))
        truth = s.samples[301:313]
        err_deg = np.rad2deg(np.abs(out.angles - truth))
        assert np.max(err_deg) < 1e-9

    def test_yaw_extrapolates_through_seam(self):
        # steady yaw rate crossing +pi: the forecast must continue the ramp
        n = np.arange(200, dtype=float)
        yaw = np.deg2rad(170.0 + 0.5 * n)  # wraps inside the window
        s = series_from([yaw, np.zeros(200), np.zeros(200)])
        out = forecast_linear_trend(s, req(150, l_win=100))
        want = np.deg2rad(170.0 + 0.5 * (151 + np.arange(12)))
        err = np.rad2deg(np.abs(fc.wrap_pi(out.angles[:, 0] - want)))
        assert np.max(err) < 1e-8

    def test_constant_series_flat_forecast(self):
        s = series_from([np.full(100, 0.3), np.full(100, -0.1), np.zeros(100)])
        out = forecast_linear_trend(s, req(90))
        np.testing.assert_allclose(out.angles, np.tile([0.3, -0.1, 0.0], (12, 1)), atol=1e-12)


class TestAutoregressive:
    def test_sinusoid_continuation(self):
        n = np.arange(300, dtype=float)
        amp = 0.02
        pitch = amp * np.sin(2 * np.pi * n / 20.0)
        s = series_from([np.zeros(300), pitch, np.zeros(300)])
        out = forecast_ar(s, req(250, l_win=64), order=4)
        truth = s.samples[251:263, 1]
        assert abs(out.angles[11, 1] - truth[11]) <= 0.1 * amp
        assert out.tag == "ar4"

    def test_constant_series_exact(self):
        s = series_from([np.full(200, 0.2), np.full(200, 0.05), np.full(200, -0.3)])
        out = forecast_ar(s, req(150, l_win=64), order=8)
        np.testing.assert_allclose(out.angles, np.tile([0.2, 0.05, -0.3], (12, 1)), atol=1e-9)

    def test_white_noise_forecasts_near_window_mean(self):
        rng = np.random.default_rng(19)
        sigma = 0.01
        pitch = sigma * rng.standard_normal(400)
        s = series_from([np.zeros(400), pitch, np.zeros(400)])
        r = req(350, l_win=192)
        out = forecast_ar(s, r, order=8)
        mean = pitch[350 - 192 + 1 : 351].mean()
        assert np.max(np.abs(out.angles[:, 1] - mean)) <= 0.8 * sigma

    def test_yaw_fit_circular_at_seam(self):
        # small oscillation around +pi must not fall apart at the wrap seam
        n = np.arange(300, dtype=float)
        yaw = fc.wrap_pi(np.pi + 0.05 * np.sin(2 * np.pi * n / 25.0))
        s = series_from([yaw, np.zeros(300), np.zeros(300)])
        out = forecast_ar(s, req(250, l_win=100), order=4)
        truth = fc.wrap_pi(np.pi + 0.05 * np.sin(2 * np.pi * (251 + np.arange(12)) / 25.0))
        err = np.abs(fc.wrap_pi(out.angles[:, 0] - truth))
        assert np.max(err) <= 0.005

    def test_order_window_validation(self):
        s = series_from([np.zeros(100), np.zeros(100), np.zeros(100)])
        with pytest.raises(ValueError):
            forecast_ar(s, req(90, l_win=16), order=8)
        with pytest.raises(ValueError):
            forecast_ar(s, req(90), order=0)

    def test_degenerate_fit_falls_back_to_linear(self, monkeypatch):
        n = np.arange(200, dtype=float)
        s = series_from([1e-4 * n, 2e-4 * n, np.zeros(200)])
        r = req(150, l_win=64)
        monkeypatch.setattr(fc, "_fit_ar_forecast", lambda *a, **k: None)
        out = forecast_ar(s, r, order=4)
        assert out.tag == "ar4+linear-fallback"
        np.testing.assert_array_equal(out.angles, forecast_linear_trend(s, r).angles)


class TestForecastCsv:
    def make_outputs(self):
        rng = np.random.default_rng(29)
        outs = []
        for t in (100, 101, 102):
            angles = rng.uniform(-0.5, 0.5, size=(12, 3))
            outs.append(ForecastOutput(t, angles, "external"))
        return outs

    def test_round_trip_bit_exact(self, tmp_path):
        p1 = tmp_path / "f1.csv"
        p2 = tmp_path / "f2.csv"
        outs = self.make_outputs()
        save_forecast_csv(p1, outs)
        got1 = load_forecast_csv(p1)
        for out in outs:
            np.testing.assert_array_equal(got1[out.origin].angles, out.angles)
        save_forecast_csv(p2, list(got1.values()))
        got2 = load_forecast_csv(p2)
        for t, out in got1.items():
            np.testing.assert_array_equal(got2[t].angles, out.angles)

    def test_yaw_wrapped_on_load(self, tmp_path):
        p = tmp_path / "f.csv"
        lines = [",".join(fc.FORECAST_HEADER)]
        lines += [f"7,{h},185.0,0.0,0.0" for h in range(1, 4)]
        p.write_text("\n".join(lines) + "\n")
        got = load_forecast_csv(p)
        assert np.rad2deg(got[7].angles[0, 0]) == pytest.approx(-175.0)

    def test_bad_header(self, tmp_path):
        p = tmp_path / "f.csv"
        p.write_text("origin,h,yaw,pitch,roll\n1,1,0,0,0\n")
        with pytest.raises(ParseError):
            load_forecast_csv(p)

    def test_missing_horizon_naming(self, tmp_path):
        p = tmp_path / "f.csv"
        head = ",".join(fc.FORECAST_HEADER)
        p.write_text(f"{head}\n3,1,0,0,0\n3,3,0,0,0\n")
        with pytest.raises(ParseError, match="missing horizons"):
            load_forecast_csv(p)

    def test_bad_value_names_row_and_column(self, tmp_path):
        p = tmp_path / "f.csv"
        head = ",".join(fc.FORECAST_HEADER)
        p.write_text(f"{head}\n3,1,0,abc,0\n")
        with pytest.raises(ParseError, match="row 2, column pitch_deg"):
            load_forecast_csv(p)

    def test_inconsistent_horizon_counts(self, tmp_path):
        p = tmp_path / "f.csv"
        head = ",".join(fc.FORECAST_HEADER)
        rows = [f"1,{h},0,0,0" for h in (1, 2)] + ["2,1,0,0,0"]
        p.write_text(head + "\n" + "\n".join(rows) + "\n")
        with pytest.raises(ParseError, match="inconsistent"):
            load_forecast_csv(p)

    def test_duplicate_horizon(self, tmp_path):
        p = tmp_path / "f.csv"
        head = ",".join(fc.FORECAST_HEADER)
        p.write_text(f"{head}\n1,1,0,0,0\n1,1,0,0,0\n")
        with pytest.raises(ParseError, match="duplicate"):
            load_forecast_csv(p)


class TestErrorReport:
    def test_hand_example_mae_rmse(self):
        s = series_from([np.zeros(40), np.zeros(40), np.zeros(40)])
        angles = np.zeros((12, 3))
        angles[6, 1] = np.deg2rad(1.0)   # horizon 7, inside target window
        angles[7, 1] = np.deg2rad(3.0)   # horizon 8
        out = ForecastOutput(10, angles, "x")
        rep = forecast_errors(s, [out], d=10)  # target window = horizons 11, 12
        assert rep.mae_deg[1] == pytest.approx(0.0)
        rep2 = forecast_errors(s, [out], d=6)  # horizons 7..12, errors {1, 3, 0 x4}
        assert rep2.mae_deg[1] == pytest.approx(4.0 / 6.0)
        rep3 = forecast_errors(s, [out], d=5)
        # restrict the hand numbers to exactly the two nonzero horizons
        errs = np.array([1.0, 3.0])
        assert rep2.rmse_deg[1] == pytest.approx(np.sqrt((errs**2).sum() / 6.0))
        assert rep3.n_windows == 1

    def test_two_sample_reference_numbers(self):
        # MAE 2, RMSE sqrt(5) over pitch errors {1 deg, 3 deg}
        s = series_from([np.zeros(40), np.zeros(40), np.zeros(40)])
        angles = np.zeros((2, 3))
        angles[0, 1] = np.deg2rad(1.0)
        angles[1, 1] = np.deg2rad(3.0)
        rep = forecast_errors(s, [ForecastOutput(5, angles, "x")], d=0)
        assert rep.mae_deg[1] == pytest.approx(2.0)
        assert rep.rmse_deg[1] == pytest.approx(np.sqrt(5.0))

    def test_mae_le_rmse(self):
        rng = np.random.default_rng(37)
        s = series_from([rng.normal(0, 0.1, 100), rng.normal(0, 0.1, 100), rng.normal(0, 0.1, 100)])
        outs = []
        for t in range(50, 60):
            outs.append(ForecastOutput(t, rng.normal(0, 0.1, (12, 3)), "x"))
        rep = forecast_errors(s, outs, d=6)
        assert np.all(rep.mae_deg <= rep.rmse_deg + 1e-12)
        assert np.all(rep.mae_deg >= 0)
        assert np.all(rep.p95_deg <= rep.p99_deg + 1e-12)
        assert rep.per_horizon_mae_deg.shape == (12,)

    def test_yaw_error_wraps(self):
        s = series_from([np.full(30, np.deg2rad(-179.0)), np.zeros(30), np.zeros(30)])
        angles = np.zeros((1, 3))
        angles[0, 0] = np.deg2rad(179.0)
        rep = forecast_errors(s, [ForecastOutput(10, angles, "x")], d=0)
        assert rep.mae_deg[0] == pytest.approx(2.0, abs=1e-9)

    def test_leading_horizons_do_not_touch_target_fields(self):
        s = series_from([np.zeros(60), np.zeros(60), np.zeros(60)])
        rng = np.random.default_rng(41)
        base = rng.normal(0, 0.01, (12, 3))
        mod = base.copy()
        mod[:6] += rng.normal(0, 1.0, (6, 3))  # horizons 1..6 only
        rep_a = forecast_errors(s, [ForecastOutput(20, base, "x")], d=6)
        rep_b = forecast_errors(s, [ForecastOutput(20, mod, "x")], d=6)
        np.testing.assert_array_equal(rep_a.mae_deg, rep_b.mae_deg)
        np.testing.assert_array_equal(rep_a.rmse_deg, rep_b.rmse_deg)
        np.testing.assert_array_equal(rep_a.p95_deg, rep_b.p95_deg)
        assert not np.array_equal(rep_a.per_horizon_mae_deg, rep_b.per_horizon_mae_deg)

    def test_truth_coverage_required(self):
        s = series_from([np.zeros(20), np.zeros(20), np.zeros(20)])
        with pytest.raises(DataError):
            forecast_errors(s, [ForecastOutput(10, np.zeros((12, 3)), "x")], d=6)
