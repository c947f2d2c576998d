import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.testing import assert_allclose

from chronohurst import InputError, MonthlySeries
from chronohurst.series import (aggregate_events, correlation_function, descriptive_stats,
                                difference, load_monthly_csv, ndiffs, parse_month)
from conftest import white

finite = st.floats(-1e3, 1e3, allow_nan=False)


def write_csv(tmp_path, body, name="s.csv"):
    p = tmp_path / name
    p.write_text("month,count\n" + body)
    return p


class TestMonthlySeries:
    def test_calendar_mapping(self):
        s = MonthlySeries("1939-11", [1, 2, 3, 4])
        assert str(s.month_at(2)) == "1940-01"
        assert s.index_of("1940-02") == 3
        assert str(s.end) == "1940-02"

    def test_values_are_read_only(self):
        s = MonthlySeries("2000-01", [1.0, 2.0])
        with pytest.raises(ValueError):
            s.values[0] = 5

    @pytest.mark.parametrize("values", [[], [1.0, math.nan], [math.inf]])
    def test_rejects_bad_values(self, values):
        with pytest.raises(InputError):
            MonthlySeries("2000-01", values)

    def test_between_clips(self):
        s = MonthlySeries("2000-01", np.arange(24))
        sub = s.between("2001-03")
        assert str(sub.start) == "2001-03" and len(sub) == 10
        assert sub.values[0] == 14

    def test_parse_month(self):
        assert str(parse_month("1974-05")) == "1974-05"
        for bad in ("1974-13", "74-05", "1974/05", ""):
            with pytest.raises(InputError):
                parse_month(bad)


class TestLoad:
    def test_bundled(self, bundled):
        assert len(bundled) == 972
        assert bundled.values.sum() == 181157
        assert str(bundled.start) == "1939-01" and str(bundled.end) == "2019-12"

    def test_single_row(self, tmp_path):
        s = load_monthly_csv(write_csv(tmp_path, "1939-01,0\n"))
        assert len(s) == 1 and s.values[0] == 0

    def test_zero_fill(self, tmp_path):
        p = write_csv(tmp_path, "1939-01,3\n1939-03,7\n")
        s = load_monthly_csv(p, gap_policy="zero-fill")
        assert_allclose(s.values, [3, 0, 7])

    def test_gap_errors_by_default(self, tmp_path):
        p = write_csv(tmp_path, "1939-01,3\n1939-03,7\n")
        with pytest.raises(InputError, match="line 3"):
            load_monthly_csv(p)

    @pytest.mark.parametrize("body,needle", [
        ("1939-01,3\n1939-02,-1\n", "negative"),
        ("1939-01,3\n1939-02,x\n", "line 3"),
        ("1939-01,3\n1939-02\n", "line 3"),
        ("1939-02,3\n1939-01,1\n", "increasing"),
        ("1939-01,3\n1939-01,1\n", "increasing"),
        ("1939-1,3\n", "line 2"),
    ])
    def test_malformed(self, tmp_path, body, needle):
        with pytest.raises(InputError, match=needle):
            load_monthly_csv(write_csv(tmp_path, body))

    def test_empty_and_missing(self, tmp_path):
        empty = tmp_path / "e.csv"
        empty.write_text("")
        with pytest.raises(InputError, match="ingestion: empty input"):
            load_monthly_csv(empty)
        with pytest.raises(InputError, match="ingestion: empty input"):
            load_monthly_csv(write_csv(tmp_path, ""))
        with pytest.raises(InputError, match="not found"):
            load_monthly_csv(tmp_path / "nope.csv")


class TestAggregate:
    def test_counts_per_month(self):
        dates = ["1939-02-01", "1939-02-10", "1939-02-15", "1939-02-28"]
        s = aggregate_events(dates, "1939-01", "1939-03")
        assert_allclose(s.values, [0, 4, 0])

    def test_empty_dates(self):
        s = aggregate_events([], "1950-01", "1950-06")
        assert_allclose(s.values, np.zeros(6))

    def test_daily_events(self):
        dates = np.arange("1960-01-01", "1960-02-01", dtype="datetime64[D]")
        assert aggregate_events(dates, "1960-01", "1960-01").values[0] == 31

    def test_errors(self):
        with pytest.raises(InputError):
            aggregate_events([], "1950-06", "1950-01")
        with pytest.raises(InputError):
            aggregate_events(["1951-01-01"], "1950-01", "1950-06")

    @given(st.lists(st.integers(0, 364), max_size=200))
    def test_sum_equals_count(self, offsets):
        dates = np.datetime64("2001-01-01") + np.array(offsets, dtype="timedelta64[D]")
        s = aggregate_events(dates, "2001-01", "2001-12")
        assert s.values.sum() == len(offsets)


class TestDifference:
    def test_first_difference(self):
        d = difference(MonthlySeries("2000-01", [0, 4, 1]), 1)
        assert_allclose(d.values, [4, -3])
        assert str(d.start) == "2000-02"

    def test_identity(self, bundled):
        assert difference(bundled, 0) is bundled

    def test_bundled_length(self, bundled_diff):
        assert len(bundled_diff) == 971

    def test_too_short(self):
        with pytest.raises(InputError):
            difference(MonthlySeries("2000-01", [1.0]), 1)

    @given(st.lists(finite, min_size=2, max_size=50))
    def test_cumsum_reconstructs(self, values):
        s = MonthlySeries("2000-01", values)
        d = difference(s, 1)
        rebuilt = s.values[0] + np.r_[0.0, np.cumsum(d.values)]
        assert_allclose(rebuilt, s.values, atol=1e-9 * (1 + np.abs(s.values).max()))


class TestDescriptive:
    def test_four_points(self):
        d = descriptive_stats(MonthlySeries("2000-01", [1, 2, 3, 4]))
        assert d.mean == 2.5
        assert d.sd == pytest.approx(1.2910, abs=1e-4)
        assert d.skewness == pytest.approx(0.0, abs=1e-12)
        assert d.kurtosis == pytest.approx(1.64, abs=1e-12)

    def test_constant(self):
        d = descriptive_stats(MonthlySeries("2000-01", [5, 5, 5]))
        assert d.sd == 0
        assert math.isnan(d.skewness) and math.isnan(d.kurtosis)
        assert d.to_dict()["kurtosis"] is None

    def test_too_short(self):
        with pytest.raises(InputError):
            descriptive_stats(MonthlySeries("2000-01", [5]))

    def test_bundled(self, bundled):
        d = descriptive_stats(bundled)
        assert (d.min, d.median, d.max) == (0, 164, 858)
        assert d.q1 == 5.0 and d.q3 == 329.25
        assert d.sd == pytest.approx(190.9333, abs=1e-4)
        assert d.kurtosis == pytest.approx(2.598539, abs=1e-6)
        assert d.skewness == pytest.approx(0.6980762, abs=1e-7)

    @settings(max_examples=50)
    @given(st.lists(finite, min_size=3, max_size=60), st.floats(0.1, 10), st.floats(-50, 50))
    def test_affine(self, values, a, b):
        x = np.array(values)
        if np.ptp(x) < 1e-3:
            return
        s = MonthlySeries("2000-01", x)
        d0, d1 = descriptive_stats(s), descriptive_stats(s.affine(a, b))
        assert d1.mean == pytest.approx(a * d0.mean + b, abs=1e-8)
        assert d1.median == pytest.approx(a * d0.median + b, abs=1e-8)
        assert d1.q1 == pytest.approx(a * d0.q1 + b, abs=1e-8)
        assert d1.sd == pytest.approx(a * d0.sd, rel=1e-9)
        assert d1.skewness == pytest.approx(d0.skewness, abs=1e-9)
        assert d1.kurtosis == pytest.approx(d0.kurtosis, abs=1e-9)

    @given(st.lists(finite, min_size=2, max_size=60))
    def test_order_and_kurtosis_bound(self, values):
        d = descriptive_stats(MonthlySeries("2000-01", values))
        assert d.min <= d.q1 <= d.median <= d.q3 <= d.max
        assert d.sd >= 0
        if d.sd > 1e-6 * (1 + abs(d.mean)):
            assert d.kurtosis >= 1 - 1e-9


class TestCorrelation:
    def test_bundled_persistent(self, bundled):
        cf = correlation_function(bundled, "serial", 36)
        assert cf.coefficients[0] == 1.0
        assert np.all(cf.coefficients[1:25] > cf.confidence_band)

    def test_white_noise_inside_band(self):
        shares = []
        for seed in range(20):
            cf = correlation_function(white(4096, seed), "serial", 48)
            shares.append(np.mean(~cf.outside_band()[1:]))
        assert np.mean(shares) >= 0.9

    def test_partial_matches_ar1(self):
        rng = np.random.default_rng(3)
        x = np.zeros(5000)
        e = rng.standard_normal(5000)
        for t in range(1, 5000):
            x[t] = 0.6 * x[t - 1] + e[t]
        cf = correlation_function(MonthlySeries("2000-01", x), "partial", 10)
        assert cf.coefficients[0] == pytest.approx(0.6, abs=0.03)
        assert np.all(np.abs(cf.coefficients[1:]) < 0.05)

    def test_max_lag_range(self, bundled):
        with pytest.raises(InputError):
            correlation_function(bundled, "serial", 972)
        with pytest.raises(InputError):
            correlation_function(bundled, "serial", 0)

    @settings(max_examples=40)
    @given(st.lists(finite, min_size=10, max_size=60), st.floats(0.1, 10), st.floats(-50, 50))
    def test_affine_and_bounded(self, values, a, b):
        x = np.array(values)
        if np.ptp(x) < 1e-3:
            return
        s = MonthlySeries("2000-01", x)
        for kind in ("serial", "partial"):
            c0 = correlation_function(s, kind, 5).coefficients
            c1 = correlation_function(s.affine(a, b), kind, 5).coefficients
            assert_allclose(c1, c0, atol=1e-9)
            assert np.all(np.abs(c0) <= 1 + 1e-12)


class TestNdiffs:
    def test_bundled(self, bundled):
        assert ndiffs(bundled) == 1

    # both outcomes hinge on one KPSS decision at 5%, so the rates sit near 95%
    def test_white_noise(self):
        hits = [ndiffs(white(500, seed)) == 0 for seed in range(200)]
        assert np.mean(hits) >= 0.9

    def test_random_walk(self):
        hits = [ndiffs(MonthlySeries("2000-01", np.cumsum(white(500, seed).values))) == 1
                for seed in range(200)]
        assert np.mean(hits) >= 0.9
