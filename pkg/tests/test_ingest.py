import io

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from arspi.distributions import Rng
from arspi.errors import (CalendarGap, DegenerateSeries, DuplicateMonth, EmptyInput, MalformedRow,
                          NegativeValue, WindowTooLong)
from arspi.ingest import (PrecipSeries, acf, format_precip_csv, moving_total, pacf,
                          parse_precip_csv)


def _ar1(phi, n, seed):
    e = Rng(seed).generator.standard_normal(n + 500)
    x = np.empty_like(e)
    x[0] = e[0]
    for i in range(1, x.size):
        x[i] = phi * x[i - 1] + e[i]
    return x[500:]


class TestParse:
    def test_two_rows(self):
        s = parse_precip_csv("year,month,precip\n1893,1,0.70\n1893,2,0.00")
        assert (s.start_year, s.start_month, len(s)) == (1893, 1, 2)
        np.testing.assert_array_equal(s.values, [0.7, 0.0])

    def test_negative_value_reports_row(self):
        text = "year,month,precip\n1893,1,0.7\n1893,2,0.1\n1893,3,-1.0\n"
        with pytest.raises(NegativeValue) as exc:
            parse_precip_csv(text)
        assert exc.value.row == 4
        assert "row 4" in str(exc.value)

    def test_calendar_gap(self):
        with pytest.raises(CalendarGap) as exc:
            parse_precip_csv("year,month,precip\n1893,1,0.7\n1893,3,0.2\n")
        assert exc.value.row == 3

    def test_duplicate_month(self):
        with pytest.raises(DuplicateMonth) as exc:
            parse_precip_csv("year,month,precip\n1893,1,0.7\n1893,1,0.2\n")
        assert exc.value.row == 3

    @pytest.mark.parametrize("text", ["", "year,month,precip\n"])
    def test_empty(self, text):
        with pytest.raises(EmptyInput):
            parse_precip_csv(text)

    @pytest.mark.parametrize("row", ["1893,1", "1893,x,0.1", "1893,13,0.1", "1893,1,nan"])
    def test_malformed(self, row):
        with pytest.raises(MalformedRow) as exc:
            parse_precip_csv(f"year,month,precip\n{row}\n")
        assert exc.value.row == 2

    def test_year_rollover_and_stream(self):
        s = parse_precip_csv(io.StringIO("year,month,precip\n1893,12,1\n1894,1,2\n"))
        assert s.calendar(1) == (1894, 1)

    def test_format_round_trip(self):
        s = PrecipSeries(1990, 11, np.array([0.1, 0.0, 2.25, 1e-3]))
        back = parse_precip_csv(format_precip_csv(s))
        assert (back.start_year, back.start_month) == (1990, 11)
        np.testing.assert_array_equal(back.values, s.values)


class TestMovingTotal:
    def test_hand_sum(self):
        m = moving_total(PrecipSeries(2000, 1, np.array([1.0, 2, 3, 4])), 3)
        np.testing.assert_array_equal(m.values, [6.0, 9.0])
        assert m.origin_index == 2

    def test_all_zero(self):
        m = moving_total(PrecipSeries(2000, 1, np.zeros(3)), 3)
        np.testing.assert_array_equal(m.values, [0.0])
        assert m.dry_mask.tolist() == [True]
        np.testing.assert_array_equal(m.encoded_values, [1.0])

    def test_identity_window(self):
        x = np.array([0.5, 0.0, 2.0])
        m = moving_total(PrecipSeries(2000, 1, x), 1)
        np.testing.assert_array_equal(m.values, x)
        np.testing.assert_array_equal(m.encoded_values, [0.5, 1.0, 2.0])

    def test_window_too_long(self):
        with pytest.raises(WindowTooLong):
            moving_total(PrecipSeries(2000, 1, np.ones(2)), 3)

    def test_length_arithmetic_1188_months(self):
        m = moving_total(PrecipSeries(1893, 1, np.ones(1188)), 3)
        assert len(m) == 1186

    @settings(max_examples=200, deadline=None)
    @given(st.lists(st.sampled_from([0.0, 0.0, 0.1, 0.37, 1.0, 2.5]), min_size=1, max_size=50),
           st.integers(1, 12))
    def test_brute_force(self, xs, window):
        x = np.array(xs)
        if window > x.size:
            return
        m = moving_total(PrecipSeries(2000, 1, x), window)
        brute = [sum(xs[i:i + window]) for i in range(len(xs) - window + 1)]
        np.testing.assert_allclose(m.values, brute, rtol=0, atol=1e-12)
        runs = [all(v == 0 for v in xs[i:i + window]) for i in range(len(brute))]
        assert m.dry_mask.tolist() == runs
        assert m.n_dry == sum(runs)
        np.testing.assert_array_equal(m.encoded_values[~m.dry_mask], m.values[~m.dry_mask])
        assert np.all(m.encoded_values[m.dry_mask] == 1.0)

    @settings(max_examples=100, deadline=None)
    @given(st.lists(st.sampled_from([0.0, 0.3, 1.7, 4.0]), min_size=3, max_size=40),
           st.floats(0.01, 100.0))
    def test_linear_in_scale(self, xs, c):
        x = np.array(xs)
        a = moving_total(PrecipSeries(2000, 1, x), 3)
        b = moving_total(PrecipSeries(2000, 1, c * x), 3)
        assert a.dry_mask.tolist() == b.dry_mask.tolist()
        np.testing.assert_allclose(b.values[~b.dry_mask], c * a.values[~a.dry_mask], rtol=1e-12)


class TestAcf:
    def test_constant_series(self):
        with pytest.raises(DegenerateSeries):
            acf(np.full(20, 3.0), 5)
        with pytest.raises(DegenerateSeries):
            pacf(np.full(20, 3.0), 5)

    def test_lag_zero(self):
        r = acf(Rng(1).generator.standard_normal(50), 10)
        assert r.coefficients[0] == 1.0
        assert np.all(np.abs(r.coefficients) <= 1.0)
        assert r.confidence_band == pytest.approx(1.96 / np.sqrt(50))

    def test_ar1_acf(self):
        r = acf(_ar1(0.9, 10_000, 11), 5)
        assert abs(r.coefficients[1] - 0.9) <= 0.03

    def test_ar1_pacf(self):
        x = _ar1(0.9, 10_000, 12)
        r = pacf(x, 40)
        assert abs(r.coefficients[1] - 0.9) <= 0.03
        inside = np.abs(r.coefficients[2:]) <= r.confidence_band
        assert inside.mean() >= 0.8

    def test_white_noise_pacf(self):
        r = pacf(Rng(13).generator.standard_normal(10_000), 40)
        assert (np.abs(r.coefficients[1:]) <= r.confidence_band).mean() >= 0.9

    def test_pacf_lag1_equals_acf_lag1(self):
        x = _ar1(0.4, 300, 3)
        assert pacf(x, 3).coefficients[1] == acf(x, 3).coefficients[1]

    def test_pacf_matches_yule_walker(self):
        # last coefficient of the order-k Yule-Walker solve
        x = _ar1(0.6, 400, 4)
        r = acf(x, 6).coefficients
        p = pacf(x, 6).coefficients
        for k in range(1, 7):
            R = np.array([[r[abs(i - j)] for j in range(k)] for i in range(k)])
            assert p[k] == pytest.approx(np.linalg.solve(R, r[1:k + 1])[-1], abs=1e-12)

    @settings(max_examples=50, deadline=None)
    @given(st.integers(0, 10_000))
    def test_reversal_symmetry(self, seed):
        x = _ar1(0.5, 120, seed)
        for f in (acf, pacf):
            a, b = f(x, 10), f(x[::-1], 10)
            np.testing.assert_allclose(a.coefficients, b.coefficients, atol=1e-12, rtol=0)

    def test_csv(self):
        r = acf(np.arange(10.0), 2)
        lines = r.to_csv().splitlines()
        assert lines[0] == "lag,coefficient,band"
        assert len(lines) == 4
        assert float(lines[2].split(",")[1]) == r.coefficients[1]
