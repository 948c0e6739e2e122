import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from csifeedback.encoder import (
    Feedback,
    ProjectionCode,
    QuantizerConfig,
    compress,
    dequantize,
    generate_projection,
    quantize,
    quantize_feedback,
)
from csifeedback.linalg import SeededRng


class TestProjection:
    def test_square_is_orthogonal(self):
        code = generate_projection(seed=3, m=16, n=16)
        a = code.matrix
        assert np.abs(a.T @ a - np.eye(16)).max() < 1e-10

    def test_deterministic_bit_exact(self):
        a = generate_projection(seed=7, m=64, n=128).matrix
        b = generate_projection(seed=7, m=64, n=128).matrix
        assert np.array_equal(a, b)

    def test_svd_path(self):
        code = generate_projection(seed=5, m=8, n=32, method="svd")
        a = code.matrix
        assert a.shape == (8, 32)
        assert np.abs(a @ a.T - np.eye(8)).max() < 1e-10

    def test_cr_to_m_mapping(self):
        # N = 2 * 32 * 32 = 2048 at the standard truncation; CR 1/4 -> M = 512
        n = 2 * 32 * 32
        assert n == 2048
        assert int(n / 4) == 512

    def test_wire_roundtrip(self):
        code = ProjectionCode(seed=2**63 + 5, m=512, n=2048, method="svd")
        raw = code.to_bytes()
        assert len(raw) == 18
        back = ProjectionCode.from_bytes(raw)
        assert (back.seed, back.m, back.n, back.method) == (code.seed, code.m, code.n, "svd")

    def test_m_exceeding_n_rejected(self):
        with pytest.raises(ValueError):
            ProjectionCode(seed=1, m=9, n=8)


class TestCompress:
    def test_zero_maps_to_zero(self):
        code = generate_projection(1, 4, 8)
        assert np.all(compress(code, np.zeros(8)).values == 0)

    def test_square_isometry(self):
        code = generate_projection(2, 16, 16)
        h = SeededRng(3).normal(16)
        y = compress(code, h).values
        assert np.linalg.norm(y) == pytest.approx(np.linalg.norm(h), abs=1e-10)

    def test_basis_vector_selects_column(self):
        code = generate_projection(4, 4, 8)
        h = np.zeros(8)
        h[3] = 1.0
        assert np.allclose(compress(code, h).values, code.matrix[:, 3])

    def test_linearity(self):
        code = generate_projection(5, 4, 8)
        rng = SeededRng(6)
        h1, h2 = rng.normal(8), rng.normal(8)
        lhs = compress(code, 2.0 * h1 - 0.5 * h2).values
        rhs = 2.0 * compress(code, h1).values - 0.5 * compress(code, h2).values
        assert np.abs(lhs - rhs).max() < 1e-10

    def test_contraction(self):
        code = generate_projection(7, 8, 32)
        for seed in range(5):
            h = SeededRng(seed).normal(32)
            assert np.linalg.norm(code.matrix @ h) <= np.linalg.norm(h) + 1e-10

    def test_dimension_mismatch(self):
        code = generate_projection(1, 4, 8)
        with pytest.raises(ValueError):
            compress(code, np.zeros(9))


class TestQuantizer:
    def test_zero_midrise_code(self):
        q = QuantizerConfig(bits=3, clip=1.0)
        assert quantize(np.array([0.0]), q)[0] == 4

    def test_saturation(self):
        for bits in (3, 4, 5, 6):
            q = QuantizerConfig(bits=bits, clip=2.5)
            assert quantize(np.array([2.5]), q)[0] == 2**bits - 1
            assert quantize(np.array([100.0]), q)[0] == 2**bits - 1
            assert quantize(np.array([-100.0]), q)[0] == 0

    @pytest.mark.parametrize("bits", [3, 4, 5, 6])
    def test_companded_error_bound(self, bits):
        # exhaustive over quantizer cells: dense sweep of the input range
        q = QuantizerConfig(bits=bits, clip=3.0)
        x = np.linspace(-3.0, 3.0, 20011)
        x_hat = dequantize(quantize(x, q), q)
        from csifeedback.encoder import _compand

        assert np.abs(_compand(x, q) - _compand(x_hat, q)).max() <= 2.0**-bits + 1e-12

    @pytest.mark.parametrize("bits", [3, 4, 5, 6])
    def test_code_idempotence(self, bits):
        q = QuantizerConfig(bits=bits, clip=1.7)
        codes = np.arange(2**bits)
        assert np.array_equal(quantize(dequantize(codes, q), q), codes)

    def test_dequantize_monotone(self):
        q = QuantizerConfig(bits=5, clip=1.0)
        vals = dequantize(np.arange(32), q)
        assert np.all(np.diff(vals) > 0)

    def test_high_rate_roundtrip(self):
        q = QuantizerConfig(bits=16, clip=2.0)
        x = SeededRng(8).normal(1000).clip(-2.0, 2.0)
        err = np.abs(dequantize(quantize(x, q), q) - x).max()
        assert err < 1e-3 * q.clip

    def test_out_of_range_code_rejected(self):
        q = QuantizerConfig(bits=3, clip=1.0)
        with pytest.raises(ValueError):
            dequantize(np.array([8]), q)

    @settings(max_examples=50, deadline=None)
    @given(
        bits=st.integers(3, 6),
        x1=st.floats(-5, 5),
        x2=st.floats(-5, 5),
    )
    def test_monotonicity_property(self, bits, x1, x2):
        q = QuantizerConfig(bits=bits, clip=2.0)
        lo, hi = sorted([x1, x2])
        c = quantize(np.array([lo, hi]), q)
        assert c[0] <= c[1]

    def test_quantize_feedback_carries_codes(self):
        q = QuantizerConfig(bits=4, clip=1.0)
        fb = quantize_feedback(Feedback(values=np.array([0.3, -0.9])), q)
        assert fb.codes is not None and fb.quant is q
        assert np.array_equal(quantize(fb.values, q), fb.codes)
