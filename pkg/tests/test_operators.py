import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.special import eval_genlaguerre

from jpsq.operators import KronOperator, embed, excitation_states, merge_modes
from jpsq.quantizer import charge_shift, displacement


def _rand_op(rng, dims, n_terms=4):
    op = KronOperator(tuple(dims))
    for _ in range(n_terms):
        f = {}
        for k, d in enumerate(dims):
            if rng.random() < 0.5:
                f[k] = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d)) if rng.random() < 0.5 else rng.normal(size=d)
        op.add(complex(rng.normal(), rng.normal()), f)
    return op


def _dense_ref(op):
    out = np.zeros(op.shape, dtype=complex)
    for c, f in op.terms:
        m = np.ones((1, 1))
        for k, d in enumerate(op.dims):
            F = f.get(k, np.eye(d))
            m = np.kron(m, np.diag(F) if F.ndim == 1 else F)
        out += c * m
    return out


class TestKronOperator:
    @settings(max_examples=25, deadline=None)
    @given(st.lists(st.integers(1, 4), min_size=1, max_size=3), st.integers(0, 10_000))
    def test_matvec_matches_dense(self, dims, seed):
        rng = np.random.default_rng(seed)
        op = _rand_op(rng, dims)
        D = _dense_ref(op)
        x = rng.normal(size=op.dim) + 1j * rng.normal(size=op.dim)
        np.testing.assert_allclose(op.matvec(x), D @ x, atol=1e-10)
        np.testing.assert_allclose(op.to_dense(), D, atol=1e-12)
        np.testing.assert_allclose(op.simplified().to_dense(), D, atol=1e-10)
        np.testing.assert_allclose(op.diagonal(), np.diag(D), atol=1e-12)
        np.testing.assert_allclose(op.adjoint().to_dense(), D.conj().T, atol=1e-12)
        X = rng.normal(size=(op.dim, 3))
        np.testing.assert_allclose(op.matmat(X), D @ X, atol=1e-10)

    def test_hermiticity_defect(self):
        rng = np.random.default_rng(1)
        A = rng.normal(size=(3, 3))
        op = KronOperator((3, 2))
        op.add(1.0, {0: A + A.T})
        assert op.hermiticity_defect() < 1e-13
        op.add(1.0, {0: A})
        assert op.hermiticity_defect() > 1e-3

    def test_triplet_dump(self, tmp_path):
        op = KronOperator((2, 2))
        op.add(2.0, {0: np.array([1.0, -1.0])})
        path = tmp_path / "h.txt"
        op.dump_triplets(path)
        lines = path.read_text().splitlines()
        assert lines[0] == "# dims 2 2"
        assert len(lines) == 2 + 4
        assert {(i, j) for i, j, _ in op.triplets()} == {(0, 0), (1, 1), (2, 2), (3, 3)}

    def test_merge_modes_restricts_exactly(self):
        rng = np.random.default_rng(3)
        op = _rand_op(rng, (3, 3, 2), n_terms=6)
        states = excitation_states((3, 3), 2)
        merged = merge_modes(op, [0, 1], states)
        D = _dense_ref(op).reshape(3, 3, 2, 3, 3, 2)
        idx = np.array(states)
        ref = D[idx[:, 0][:, None, None, None], idx[:, 1][:, None, None, None], np.arange(2)[None, :, None, None],
                idx[:, 0][None, None, :, None], idx[:, 1][None, None, :, None], np.arange(2)[None, None, None, :]]
        ref = ref.reshape(len(states) * 2, len(states) * 2)
        np.testing.assert_allclose(merged.to_dense(), ref, atol=1e-12)

    def test_excitation_states_and_embed(self):
        s = excitation_states((3, 3, 3), 1)
        assert s == [(0, 0, 0), (0, 0, 1), (0, 1, 0), (1, 0, 0)]
        v = embed([np.array([1, 0]), np.array([0, 1, 0])])
        assert v.tolist() == [0, 1, 0, 0, 0, 0]


class TestCosineFactors:
    def test_charge_shift_halves(self):
        S = charge_shift(1, 5)
        cos = 0.5 * (S + S.conj().T)
        np.testing.assert_array_equal(cos, 0.5 * (np.eye(5, k=1) + np.eye(5, k=-1)))

    def test_displacement_small_lambda_is_identity(self):
        np.testing.assert_allclose(displacement(1e-12, 10), np.eye(10), atol=1e-11)

    @given(st.floats(-2.0, 2.0))
    def test_displacement_unitary(self, lam):
        D = displacement(lam, 20)
        np.testing.assert_allclose(D @ D.conj().T, np.eye(20), atol=1e-10)

    def test_laguerre_oracle(self):
        """⟨m|e^{iλ(a+a†)}|n⟩ = √(n!/m!)(iλ)^{m−n} e^{−λ²/2} L_n^{(m−n)}(λ²), m ≥ n.

        The 40-level truncation only disturbs elements near the cutoff, so
        the low block (m, n < 20) is compared.
        """
        lam, N = 1.0, 40
        D = displacement(lam, N)
        ref = np.zeros((20, 20), dtype=complex)
        for m in range(20):
            for n in range(20):
                lo, hi = min(m, n), max(m, n)
                val = math.sqrt(math.factorial(lo) / math.factorial(hi)) * (1j * lam) ** (hi - lo)
                ref[m, n] = val * math.exp(-lam**2 / 2) * eval_genlaguerre(lo, hi - lo, lam**2)
        assert np.abs(D[:20, :20] - ref).max() < 1e-10
