import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra import numpy as hnp

from eonmedia import pnm, rng


class TestPnm:
    @given(hnp.arrays(np.uint8, hnp.array_shapes(min_dims=2, max_dims=2, max_side=40), elements=st.integers(0, 1)))
    def test_pbm_round_trip(self, bits):
        assert np.array_equal(pnm.decode_pbm(pnm.encode_pbm(bits)), bits)

    @given(hnp.arrays(np.uint8, hnp.array_shapes(min_dims=2, max_dims=2, max_side=40)))
    def test_pgm_round_trip(self, pixels):
        out, comments = pnm.decode_pgm(pnm.encode_pgm(pixels, ["hello world", "second"]))
        assert np.array_equal(out, pixels)
        assert comments == ["hello world", "second"]

    def test_pbm_header_and_packing(self):
        data = pnm.encode_pbm(np.array([[1, 0, 1, 0, 0, 0, 0, 0, 1]], dtype=np.uint8))
        assert data == b"P4\n9 1\n\xa0\x80"

    def test_errors(self):
        with pytest.raises(pnm.PnmError):
            pnm.decode_pgm(b"P4\n1 1\n\x00")
        with pytest.raises(pnm.PnmError):
            pnm.decode_pgm(b"P5\n2 2\n255\n\x00")
        with pytest.raises(pnm.PnmError):
            pnm.decode_pgm(b"P5\n1 1\n65535\n\x00\x00")
        with pytest.raises(pnm.PnmError):
            pnm.encode_pgm(np.zeros((2, 2), dtype=np.int32))
        with pytest.raises(pnm.PnmError):
            pnm.encode_pgm(np.zeros((2, 2), dtype=np.uint8), ["two\nlines"])
        with pytest.raises(pnm.PnmError):
            pnm.decode_pbm(b"P4\nx")

    def test_files(self, tmp_path):
        bits = np.eye(5, dtype=np.uint8)
        pnm.write_pbm(tmp_path / "a.pbm", bits)
        assert np.array_equal(pnm.read_pbm(tmp_path / "a.pbm"), bits)
        pnm.write_pgm(tmp_path / "a.pgm", bits * 200, ["c"])
        out, comments = pnm.read_pgm(tmp_path / "a.pgm")
        assert np.array_equal(out, bits * 200) and comments == ["c"]


class TestRng:
    def test_pure_function_of_inputs(self):
        a = rng.uniform(7, rng.FLIP, np.arange(1000))
        b = rng.uniform(7, rng.FLIP, np.arange(1000))
        assert np.array_equal(a, b)

    def test_order_independence(self):
        idx = np.arange(5000)
        perm = np.random.default_rng(0).permutation(idx)
        full = rng.uniform(3, rng.NOISE, idx)
        assert np.array_equal(rng.uniform(3, rng.NOISE, perm), full[perm])
        assert np.array_equal(rng.uniform(3, rng.NOISE, idx[2000:3000]), full[2000:3000])

    def test_streams_and_seeds_differ(self):
        base = rng.uniform(1, rng.FLIP, np.arange(100))
        assert not np.array_equal(base, rng.uniform(2, rng.FLIP, np.arange(100)))
        assert not np.array_equal(base, rng.uniform(1, rng.CRACK_WALK, np.arange(100)))

    def test_uniform_statistics(self):
        u = rng.uniform(11, rng.THICKNESS, np.arange(200_000))
        assert u.min() >= 0.0 and u.max() < 1.0
        assert abs(u.mean() - 0.5) < 4 * np.sqrt(1 / 12 / len(u))
        counts, _ = np.histogram(u, bins=20, range=(0, 1))
        expected = len(u) / 20
        chi2 = float(((counts - expected) ** 2 / expected).sum())
        assert chi2 < 50  # 19 dof; p ~ 1e-4

    def test_normal_moments(self):
        z = rng.normal(5, rng.NOISE, np.arange(200_000))
        assert abs(z.mean()) < 0.01
        assert abs(z.std() - 1) < 0.01

    @pytest.mark.parametrize("lam", [0.5, 4.0, 30.0, 800.0])
    def test_poisson_mean_and_variance(self, lam):
        u = rng.uniform(9, rng.CRACK_COUNT, np.arange(20_000))
        k = np.array([rng.poisson(float(x), lam) for x in u])
        assert abs(k.mean() - lam) < 5 * np.sqrt(lam / len(k))
        assert k.var() == pytest.approx(lam, rel=0.08)

    def test_poisson_edge_cases(self):
        assert rng.poisson(0.5, 0.0) == 0
        assert rng.poisson(0.0, 3.0) == 0
