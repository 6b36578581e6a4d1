import numpy as np
import pytest

from dualquant import Signal, analyze, hann_window, make_tight_frame, synthesize
from dualquant.frames import TfFrame


def brute_force_matrix(frame):
    """Analysis operator as an explicit matrix, one basis vector at a time."""
    length = frame.signal_len
    cols = []
    for i in range(length):
        e = np.zeros(length)
        e[i] = 1.0
        cols.append(analyze(frame, e))
    return np.stack(cols, axis=1)


class TestConstruction:
    def test_painless_diagonal_condition(self):
        frame = make_tight_frame(4, 2, 4, 8)
        w = frame.tight_window
        # direct evaluation: M * sum_j w[n - 2j]^2 == 1 for every n
        for n in range(8):
            acc = 0.0
            for j in range(4):  # shifts 0, 2, 4, 6
                t = (n - 2 * j) % 8
                if t < 4:
                    acc += w[t] ** 2
            assert 4 * acc == pytest.approx(1.0, abs=1e-12)

    def test_rectangular_case_is_orthonormal_basis(self):
        frame = make_tight_frame(4, 4, 4, 16)
        np.testing.assert_allclose(frame.tight_window, np.full(4, 0.5), atol=1e-14)

    def test_hop_exceeding_window_rejected(self):
        with pytest.raises(ValueError):
            make_tight_frame(4, 5, 8, 16)

    def test_window_wider_than_channels_rejected(self):
        with pytest.raises(ValueError):
            make_tight_frame(8, 2, 4, 16)

    def test_length_not_multiple_of_hop_rejected(self):
        with pytest.raises(ValueError):
            make_tight_frame(4, 3, 4, 16)

    def test_length_not_multiple_of_channels_rejected(self):
        with pytest.raises(ValueError):
            make_tight_frame(4, 2, 4, 10)

    def test_non_tight_window_rejected(self):
        g = hann_window(4)
        with pytest.raises(ValueError):
            TfFrame(g, g, 2, 4, 8)  # prototype itself is not tight

    def test_coeff_count(self):
        frame = make_tight_frame(32, 8, 32, 256)
        assert frame.num_coeffs == 32 * (256 // 8)
        assert frame.coeff_shape == (32, 32)

    def test_hann_window_positive_symmetric(self):
        for n in (1, 4, 33, 64):
            g = hann_window(n)
            assert np.all(g > 0)
            np.testing.assert_allclose(g, g[::-1], atol=1e-15)


class TestAnalyzeSynthesize:
    @pytest.fixture
    def frame(self):
        return make_tight_frame(32, 8, 32, 256)

    def test_zero_in_zero_out(self, frame):
        assert np.all(analyze(frame, np.zeros(256)) == 0)
        assert np.all(synthesize(frame, np.zeros(frame.num_coeffs, complex)) == 0)

    def test_parseval(self, frame):
        rng = np.random.default_rng(0)
        for _ in range(20):
            x = rng.standard_normal(256)
            ratio = np.linalg.norm(analyze(frame, x)) / np.linalg.norm(x)
            assert abs(ratio - 1.0) < 1e-10

    def test_perfect_reconstruction(self, frame):
        rng = np.random.default_rng(1)
        for _ in range(20):
            x = rng.standard_normal(256)
            rec = synthesize(frame, analyze(frame, x))
            assert np.linalg.norm(rec - x) / np.linalg.norm(x) < 1e-10

    def test_adjoint_pairing(self, frame):
        rng = np.random.default_rng(2)
        for _ in range(50):
            x = rng.standard_normal(256)
            c = rng.standard_normal(frame.num_coeffs) + 1j * rng.standard_normal(
                frame.num_coeffs
            )
            lhs = np.real(np.sum(analyze(frame, x) * np.conj(c)))
            rhs = np.dot(x, synthesize(frame, c))
            assert abs(lhs - rhs) < 1e-10 * np.linalg.norm(x) * np.linalg.norm(c)

    def test_linearity(self, frame):
        rng = np.random.default_rng(3)
        x, y = rng.standard_normal(256), rng.standard_normal(256)
        a, b = 0.7, -1.3
        combined = analyze(frame, a * x + b * y)
        separate = a * analyze(frame, x) + b * analyze(frame, y)
        assert np.linalg.norm(combined - separate) < 1e-12 * np.linalg.norm(separate)

    def test_conjugate_symmetry_for_real_input(self, frame):
        rng = np.random.default_rng(4)
        x = rng.standard_normal(256)
        c = analyze(frame, x).reshape(frame.coeff_shape)
        m = np.arange(frame.num_channels)
        mirrored = np.conj(c[(frame.num_channels - m) % frame.num_channels, :])
        np.testing.assert_allclose(c, mirrored, atol=1e-12)

    def test_length_mismatch_rejected(self, frame):
        with pytest.raises(ValueError):
            analyze(frame, np.zeros(128))
        with pytest.raises(ValueError):
            synthesize(frame, np.zeros(7, complex))

    def test_accepts_signal_objects(self, frame):
        rng = np.random.default_rng(5)
        x = rng.standard_normal(256)
        np.testing.assert_array_equal(
            analyze(frame, Signal(x, 16000)), analyze(frame, x)
        )


class TestSpectralBehavior:
    def test_sinusoid_concentrates_in_matching_channels(self):
        # rectangular, non-overlapping frame: windowed DFT of each block
        m0, m = 2, 8
        frame = make_tight_frame(m, m, m, 32)
        n = np.arange(32)
        x = np.cos(2 * np.pi * m0 * n / m)
        c = np.abs(analyze(frame, x).reshape(frame.coeff_shape))
        on = np.zeros(m, dtype=bool)
        on[[m0, m - m0]] = True
        assert np.all(c[on, :] > 0.1)
        assert np.all(c[~on, :] < 1e-10)

    def test_brute_force_tightness_small_frame(self):
        frame = make_tight_frame(8, 4, 8, 32)
        a = brute_force_matrix(frame)
        gram = np.real(a.conj().T @ a)
        np.testing.assert_allclose(gram, np.eye(32), atol=1e-10)

    def test_identity_frame(self):
        frame = make_tight_frame(1, 1, 1, 4)
        x = np.array([0.3, -0.1, 0.0, 0.25])
        np.testing.assert_allclose(analyze(frame, x), x.astype(complex), atol=1e-15)
