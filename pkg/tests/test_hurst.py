import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from chronohurst import InputError, MonthlySeries, NumericError
from chronohurst.hurst import (ChePath, block_sizes, che, rs_hurst, segment_che,
                               whittle_hurst)
from chronohurst.synth import GeneratorSpec, generate
from conftest import white

START = np.datetime64("2000-01", "M")


def fgn(h, n, seed):
    return generate(GeneratorSpec("fgn", n, seed, h=h))


def s_curve(seed=0, noise=0.01, lead=23):
    y = np.r_[np.full(100, 0.5), np.linspace(0.5, 1.0, 201)[1:], np.full(200, 1.0)]
    y = y + noise * np.random.default_rng(seed).standard_normal(y.size)
    y[:lead] = np.nan
    return ChePath(START, y, y.copy(), lead + 1, "synthetic")


class TestBlockSizes:
    @pytest.mark.parametrize("n", [16, 20, 24, 50, 100, 972, 4096])
    def test_at_least_four(self, n):
        sizes = block_sizes(n)
        assert sizes.size >= 4 and sizes.max() <= n // 2 and sizes.min() >= 4

    def test_defaults(self):
        sizes = block_sizes(972)
        assert sizes[0] == 8 and sizes[-1] == 486 and sizes.size >= 8


class TestRsHurst:
    @pytest.mark.parametrize("h,lo,hi", [(0.5, 0.4, 0.6), (0.9, 0.8, 1.0)])
    def test_fgn_oracle(self, h, lo, hi):
        est = np.mean([rs_hurst(fgn(h, 4096, s)).h for s in range(20)])
        assert lo <= est <= hi

    def test_bundled_persistent(self, bundled):
        assert rs_hurst(bundled).h >= 0.85

    def test_fields(self):
        e = rs_hurst(white(972, 0))
        assert e.method == "rescaled-range" and len(e.window_sizes) >= 4
        assert 0 <= e.fit_r2 <= 1 and e.h == e.raw

    def test_clamps(self):
        e = rs_hurst(np.cumsum(np.cumsum(white(500, 1).values)))
        assert e.h <= 1.5 and e.raw >= e.h

    def test_errors(self):
        with pytest.raises(InputError):
            rs_hurst(np.arange(10.0))
        with pytest.raises(NumericError):
            rs_hurst(np.full(100, 2.0))

    @settings(max_examples=25)
    @given(st.floats(0.01, 100), st.floats(-1e3, 1e3))
    def test_affine_invariance(self, a, b):
        x = white(300, 5).values
        assert rs_hurst(a * x + b).h == pytest.approx(rs_hurst(x).h, abs=1e-9)


class TestWhittleHurst:
    def test_fgn(self):
        est = np.mean([whittle_hurst(fgn(0.7, 4096, s)).h for s in range(20)])
        assert 0.6 <= est <= 0.8

    def test_white(self):
        hs = [whittle_hurst(white(972, s)).h for s in range(20)]
        assert all(0.35 <= h <= 0.65 for h in hs)


class TestChe:
    def test_undefined_prefix_and_length(self, bundled):
        p = che(bundled)
        assert len(p.values) == 972 and p.undefined_prefix == 23
        assert np.all(np.isnan(p.values[:23])) and not np.any(np.isnan(p.values[23:]))

    def test_causality(self, bundled):
        full = che(bundled)
        part = che(bundled.between(None, bundled.month_at(499)))
        np.testing.assert_array_equal(part.values, full.values[:500])

    def test_white_noise_band(self):
        shares = []
        for seed in range(20):
            v = che(white(972, seed)).values
            v = v[~np.isnan(v)]
            shares.append(np.mean((v >= 0.3) & (v <= 0.7)))
        assert np.mean(shares) >= 0.9

    def test_csv(self):
        p = che(white(60, 0))
        lines = p.to_csv().splitlines()
        assert lines[0] == "month,h" and lines[1] == "2000-01," and len(lines) == 61
        assert float(lines[-1].split(",")[1]) == p.values[-1]

    def test_errors(self):
        with pytest.raises(InputError):
            che(white(100, 0), min_window=8)
        with pytest.raises(InputError):
            che(white(24, 0), min_window=24)
        with pytest.raises(InputError):
            che(white(100, 0), method="dfa")

    def test_whittle_method(self):
        p = che(white(200, 0), 24, "whittle")
        assert p.method == "whittle" and p.undefined_prefix == 23


class TestSegmentation:
    def test_recovers_knots(self):
        seg = segment_che(s_curve())
        assert abs(int((seg.knot1 - START).astype(int)) - 99) <= 6
        assert abs(int((seg.knot2 - START).astype(int)) - 299) <= 6
        assert seg.level1 == pytest.approx(0.5, abs=0.02)
        assert seg.level3 == pytest.approx(1.0, abs=0.02)
        assert not seg.degenerate and seg.knot1 < seg.knot2

    def test_flat_is_degenerate(self):
        y = 0.5 + 0.01 * np.random.default_rng(2).standard_normal(400)
        seg = segment_che(ChePath(START, y, y, 24, "synthetic"))
        assert seg.degenerate
        assert seg.slope2 == pytest.approx(0, abs=1e-3)
        assert seg.level1 == pytest.approx(seg.level3, abs=0.05)

    def test_falling_path_is_not_a_rise(self):
        y = np.linspace(1.0, 0.5, 400)
        seg = segment_che(ChePath(START, y, y, 24, "synthetic"))
        assert seg.slope2 >= 0 and seg.degenerate

    def test_segments_long_enough(self):
        seg = segment_che(s_curve(lead=0), min_segment=36)
        k1 = int((seg.knot1 - START).astype(int))
        k2 = int((seg.knot2 - START).astype(int))
        assert k1 + 1 >= 36 and k2 - k1 >= 36 and 500 - 1 - k2 >= 36

    def test_sse_matches_fit(self):
        path = s_curve(seed=4)
        seg = segment_che(path)
        ok = ~np.isnan(path.values)
        resid = path.values[ok] - seg.fitted(path)[ok]
        assert seg.sse == pytest.approx(resid @ resid, rel=1e-8)

    def test_exhaustive_against_brute_force(self):
        rng = np.random.default_rng(9)
        y = np.r_[np.full(40, 0.4), np.linspace(0.4, 0.9, 30), np.full(50, 0.9)]
        y = y + 0.05 * rng.standard_normal(y.size)
        path = ChePath(START, y, y, 1, "synthetic")
        seg = segment_che(path, min_segment=10, min_defined=50)
        best = np.inf
        t = np.arange(y.size)
        for a in range(9, y.size - 20):
            for b in range(a + 10, y.size - 10):
                X = np.column_stack([np.ones(y.size), np.clip(t - a, 0, b - a)])
                beta, *_ = np.linalg.lstsq(X, y, rcond=None)
                if beta[1] < 0:
                    continue
                r = y - X @ beta
                best = min(best, r @ r)
        assert seg.sse == pytest.approx(best, rel=1e-8)

    def test_translation_equivariant(self):
        a = segment_che(s_curve())
        p = s_curve()
        shifted = ChePath(START + 37, p.values, p.raw, p.min_window, p.method)
        b = segment_che(shifted)
        assert b.knot1 - a.knot1 == 37 and b.knot2 - a.knot2 == 37

    def test_too_few(self):
        y = np.full(100, 0.5)
        with pytest.raises(InputError):
            segment_che(ChePath(START, y, y, 24, "synthetic"))

    def test_json_fields(self):
        d = segment_che(s_curve()).to_dict()
        assert {"knot1", "knot2", "level1", "slope2", "level3", "sse"} <= set(d)
        assert d["labels"] == ["Stagnation", "Emergent", "Saturation"]
