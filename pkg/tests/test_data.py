from pathlib import Path

import numpy as np
import pytest

from wavewarp.data import (
    AlignmentPath,
    GENERATOR_KINDS,
    NonNumericCellError,
    RaggedRowError,
    TimeSeries,
    DIGIT_GLYPH,
    alignment_error,
    gen_synthetic,
    load_timeseries_csv,
    synthetic_with_latent,
)

from oracles import random_valid_path

FIXTURES = Path(__file__).parent / "fixtures"


class TestTimeSeries:
    def test_basic_invariants(self):
        ts = TimeSeries(np.arange(6.0).reshape(3, 2), name="toy")
        assert ts.n == 3 and ts.d == 2
        with pytest.raises(ValueError):
            ts.samples[0, 0] = 99.0  # rows are immutable

    def test_rejects_degenerate(self):
        with pytest.raises(ValueError):
            TimeSeries(np.ones((1, 3)))
        with pytest.raises(ValueError):
            TimeSeries(np.array([[1.0, np.nan], [2.0, 3.0]]))


class TestAlignmentPath:
    def test_valid_steps_only(self):
        AlignmentPath([(1, 1), (2, 1), (2, 2), (3, 3)])
        with pytest.raises(ValueError):
            AlignmentPath([(1, 1), (3, 3)])
        with pytest.raises(ValueError):
            AlignmentPath([(2, 1), (3, 2)])

    def test_equality(self):
        a = AlignmentPath([(1, 1), (2, 2)])
        b = AlignmentPath([(1, 1), (2, 2)])
        assert a == b and hash(a) == hash(b)


class TestCsvLoading:
    def test_single_column(self, tmp_path):
        f = tmp_path / "x.csv"
        f.write_text("0\n1\n2\n")
        ts = load_timeseries_csv(f)
        assert ts.samples.shape == (3, 1)
        np.testing.assert_array_equal(ts.samples[:, 0], [0, 1, 2])

    def test_ragged_row_named(self, tmp_path):
        f = tmp_path / "bad.csv"
        f.write_text("1,2,3\n4,5,6,7\n")
        with pytest.raises(RaggedRowError, match="line 2"):
            load_timeseries_csv(f)

    def test_non_numeric_named(self, tmp_path):
        f = tmp_path / "bad.csv"
        f.write_text("1,2\n3,oops\n")
        with pytest.raises(NonNumericCellError, match="line 2, column 2"):
            load_timeseries_csv(f)

    def test_missing_file(self, tmp_path):
        with pytest.raises(FileNotFoundError):
            load_timeseries_csv(tmp_path / "nope.csv")

    def test_har_fixture_roundtrip(self):
        ts = load_timeseries_csv(FIXTURES / "har_sample.csv", has_header=True)
        assert ts.d == 6 and ts.n == 8
        # spot values from the hand-written fixture
        assert ts.samples[0, 0] == pytest.approx(0.2571)
        assert ts.samples[7, 5] == pytest.approx(-0.0023)


class TestGenerators:
    def test_deterministic(self):
        a = gen_synthetic("swiss-roll", 100, 0.0, 7)
        b = gen_synthetic("swiss-roll", 100, 0.0, 7)
        np.testing.assert_array_equal(a.samples, b.samples)

    def test_unknown_kind(self):
        with pytest.raises(ValueError, match="unknown generator kind"):
            gen_synthetic("mystery", 50)

    def test_n_too_small(self):
        with pytest.raises(ValueError):
            gen_synthetic("swiss-roll", 4)

    def test_rotated_digit_frames(self):
        from scipy import ndimage

        ts, angles = synthetic_with_latent("rotated-digit", 72, 0.0, 0)
        assert ts.n == 72 and ts.d == 256
        # construction oracle: one frame per 5 degree step
        np.testing.assert_allclose(np.diff(angles), 5.0)
        for idx in (0, 10, 50):
            frame = ndimage.rotate(
                DIGIT_GLYPH, angles[idx], reshape=False, order=1, mode="constant", cval=0.0
            ).ravel()
            np.testing.assert_allclose(ts.samples[idx], frame)

    def test_broken_roll_latent_gap(self):
        # latent-parameter oracle: exactly one dominant gap in the sorted grid
        _, latent = synthetic_with_latent("broken-swiss-roll", 100, 0.0, 3)
        diffs = np.diff(np.sort(latent))
        med = np.median(diffs)
        big = diffs > 3 * med
        assert big.sum() == 1

    def test_plain_roll_has_no_gap(self):
        _, latent = synthetic_with_latent("swiss-roll", 100, 0.0, 3)
        diffs = np.diff(np.sort(latent))
        assert diffs.max() < 3 * np.median(diffs)

    @pytest.mark.parametrize("kind", GENERATOR_KINDS)
    def test_invariants_over_seed_sweep(self, kind):
        n = 24 if kind == "rotated-digit" else 64
        for seed in range(100):
            ts = gen_synthetic(kind, n, 0.05, seed)  # constructor enforces invariants
            assert ts.n == n

    def test_latent_sidecar_shapes(self):
        _, lat = synthetic_with_latent("dollar-sign", 50, 0.0, 0)
        assert lat.shape == (50, 2)
        assert set(np.unique(lat[:, 0])) == {0.0, 1.0}


class TestAlignmentError:
    def test_zero_iff_equal(self):
        rng = np.random.default_rng(0)
        p = random_valid_path(9, 7, rng)
        assert alignment_error(p, p) == 0.0

    def test_paper_property_nonzero_when_different(self):
        rng = np.random.default_rng(1)
        count = 0
        while count < 200:
            n, m = rng.integers(2, 12, size=2)
            p = random_valid_path(n, m, rng)
            q = random_valid_path(n, m, rng)
            if p != q:
                assert alignment_error(p, q) > 0
                count += 1

    def test_triangle_case_frozen_value(self):
        # n=m=2: area between the step-up path and the diagonal is the
        # triangle (.5,.5),(.5,1),(1,1) of area 0.125 (shoelace by hand)
        p = AlignmentPath([(1, 1), (1, 2), (2, 2)])
        q = AlignmentPath([(1, 1), (2, 2)])
        assert alignment_error(p, q) == pytest.approx(0.125, abs=1e-15)

    def test_symmetric_and_bounded(self):
        rng = np.random.default_rng(2)
        for _ in range(1000):
            n, m = rng.integers(2, 21, size=2)
            p = random_valid_path(n, m, rng)
            q = random_valid_path(n, m, rng)
            e1 = alignment_error(p, q)
            e2 = alignment_error(q, p)
            assert e1 == pytest.approx(e2, abs=1e-15)
            assert 0.0 <= e1 <= 1.0

    def test_mismatched_sizes_rejected(self):
        p = AlignmentPath([(1, 1), (2, 2)])
        q = AlignmentPath([(1, 1), (2, 2), (3, 3)])
        with pytest.raises(ValueError, match="different index ranges"):
            alignment_error(p, q)
