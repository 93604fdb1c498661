import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from jpsq.builtins import BUILTIN_NAMES, builtin, fig6, table_case
from jpsq.circuit import Branch, CircuitSpec, IslandSpec, LinearExpr, LoopSpec, Mutual
from jpsq.operators import KronOperator
from jpsq.quantizer import (
    QuantizationError,
    build_hamiltonian,
    cosine_operator,
    decompose_modes,
    galvanic_groups,
    quantize,
)
from jpsq.spectrum import convergence_report, solve


def lc_circuit(L=1000.0, C=10.0):
    return CircuitSpec(
        "lc", ("g", "a"), "g", (Branch("L", "inductor", ("g", "a"), L=L), Branch("C", "capacitor", ("g", "a"), C=C))
    )


def cpb(E_J=10.0, C=5.0):
    """Single junction to ground plus a shunt capacitor, with an island offset charge."""
    return CircuitSpec(
        "cpb",
        ("g", "a"),
        "g",
        (Branch("J", "josephson", ("g", "a"), E_J=E_J, C=1.0), Branch("C", "capacitor", ("g", "a"), C=C)),
        islands=(IslandSpec("isl", ("a",), "Qb"),),
    )


def small_model(name):
    spec = builtin(name)
    full = quantize(spec)
    tr = {m.index: 3 for m in full.modes if m.kind == "oscillator"}
    return quantize(spec, n_max=2, truncations=tr, stiff_excitations=1)


class TestDecomposition:
    def test_fig6_mode_count(self):
        modes = decompose_modes(table_case("A", "fig6"))
        kinds = [m.kind for m in modes]
        assert kinds.count("periodic") == 1 and kinds.count("oscillator") == 6

    def test_single_junction_is_periodic(self):
        (m,) = decompose_modes(cpb())
        assert m.kind == "periodic" and m.size == 21

    def test_lc_oscillator_frequency(self):
        L, C = 1000.0, 10.0
        f = 1 / (2 * math.pi * math.sqrt(L * 1e-12 * C * 1e-15)) / 1e9
        (m,) = decompose_modes(lc_circuit(L, C))
        assert m.kind == "oscillator"
        assert m.frequency == pytest.approx(f, rel=1e-12)
        w = solve(quantize(lc_circuit(L, C), truncations={0: 10}), k=5).eigenvalues
        np.testing.assert_allclose(np.diff(w), f, rtol=1e-10)

    def test_mode_count_equals_active_nodes(self):
        for name in BUILTIN_NAMES:
            spec = builtin(name)
            assert len(quantize(spec).modes) == len(spec.active_nodes)

    def test_truncation_limits(self):
        with pytest.raises(QuantizationError):
            quantize(lc_circuit(), truncations={0: 1})
        with pytest.raises(QuantizationError):
            quantize(cpb(), truncations={0: 4})

    def test_invalid_circuit_rejected(self):
        with pytest.raises(QuantizationError, match="validation"):
            quantize(fig6(29.8, 1.44, 60.0, C_0=0.0))

    def test_hilbert_dim_is_product(self):
        m = quantize(table_case("A", "fig6"), n_max=3, stiff_excitations=None)
        assert m.hilbert_dim == int(np.prod([md.size for md in m.modes]))
        assert m.hilbert_dim == int(np.prod(m.dims))

    def test_cap_inverse_positive_definite_and_integer_cosines(self):
        for name in BUILTIN_NAMES:
            m = quantize(builtin(name))
            assert np.linalg.eigvalsh(m.cap_inverse).min() > 0
            for jt in m.junctions:
                per = jt.coeffs[: len(m.periodic)]
                assert np.allclose(per, np.round(per))


class TestHamiltonian:
    @pytest.mark.parametrize("name", BUILTIN_NAMES)
    def test_hermitian(self, name):
        m = small_model(name)
        rng = np.random.default_rng(7)
        base = m.spec.default_bias()
        for _ in range(2):
            b = base.updated({k: v + rng.uniform(-0.3, 0.3) for k, v in base.as_dict().items()})
            H = build_hamiltonian(m, b)
            if H.dim <= 4096:
                D = H.to_dense()
                assert np.abs(D - D.conj().T).max() < 1e-12
            else:
                assert H.hermiticity_defect(rng) < 1e-12 * max(1.0, np.abs(H.diagonal()).max())

    def test_missing_bias_rejected(self, fig3b_A_small):
        with pytest.raises(KeyError):
            fig3b_A_small.hamiltonian(fig3b_A_small.spec.default_bias().__class__({}, {"Qb": 0.0}))

    def test_transmon_limit(self):
        """Charge dispersion of the ground state falls exponentially with E_J/E_C."""
        disp = []
        for E_J in (5.0, 20.0, 60.0):
            m = quantize(cpb(E_J, C=10.0), n_max=15)
            e0 = solve(m, {"Qb": 0.0}, k=1).eigenvalues[0]
            e1 = solve(m, {"Qb": 0.5}, k=1).eigenvalues[0]
            disp.append(abs(e1 - e0))
        assert disp[0] > 10 * disp[1] > 100 * disp[2]

    def test_flux_periodicity(self, fig3b_A_small):
        a = solve(fig3b_A_small, {"dPhiZ": 0.13}, k=4).eigenvalues
        b = solve(fig3b_A_small, {"dPhiZ": 1.13}, k=4).eigenvalues
        np.testing.assert_allclose(a, b, atol=1e-9)

    @settings(max_examples=5, deadline=None)
    @given(st.floats(0.0, 1.0))
    def test_cooper_pair_shift_invariance(self, qb):
        # the truncated charge basis breaks the symmetry at O(E_C n_max²) tails; n_max=15 buries it
        m = quantize(cpb(5.0), n_max=15)
        a = solve(m, {"Qb": qb}, k=3).eigenvalues
        b = solve(m, {"Qb": qb + 1.0}, k=3).eigenvalues
        np.testing.assert_allclose(a, b, atol=1e-9)

    def test_odd_parity_is_half_pair_shift(self):
        m = quantize(cpb(10.0), n_max=10)
        odd = solve(m, {"Qb": 0.1}, parity=1, k=3).eigenvalues
        even = solve(m, {"Qb": 0.6}, parity=0, k=3).eigenvalues
        np.testing.assert_allclose(odd, even, atol=1e-9)

    def test_cosine_operator_periodic(self):
        m = quantize(cpb(), n_max=3)
        op = cosine_operator(m, [1.0])
        np.testing.assert_allclose(op.to_dense(), 0.5 * (np.eye(7, k=1) + np.eye(7, k=-1)))
        with pytest.raises(QuantizationError):
            cosine_operator(m, [0.5])

    def test_cosine_operator_small_lambda(self):
        m = quantize(lc_circuit(), truncations={0: 8})
        np.testing.assert_allclose(cosine_operator(m, [1e-9]).to_dense(), np.eye(8), atol=1e-9)


class TestMutuals:
    def _two_lc(self, M):
        brs = (
            Branch("L1", "inductor", ("g", "a"), L=500.0, tag="t1"),
            Branch("C1", "capacitor", ("g", "a"), C=20.0),
            Branch("L2", "inductor", ("g", "b"), L=500.0, tag="t2"),
            Branch("C2", "capacitor", ("g", "b"), C=20.0),
        )
        return CircuitSpec("two", ("g", "a", "b"), "g", brs, mutuals=(Mutual(("t1", "t2"), M),))

    def test_exact_normal_modes(self):
        """Two identical LC resonators coupled by M: f± = 1/(2π√((L ± M)C))."""
        M = 40.0
        m = quantize(self._two_lc(M), truncations={0: 3, 1: 3})
        f = sorted(1 / (2 * math.pi * math.sqrt((500.0 + s * M) * 1e-12 * 20e-15)) / 1e9 for s in (1, -1))
        np.testing.assert_allclose(sorted(md.frequency for md in m.modes), f, rtol=1e-10)

    def test_first_order_expansion(self):
        exact = quantize(self._two_lc(5.0))
        first = quantize(self._two_lc(5.0), mutuals="first-order")
        assert exact.mutuals == "exact" and first.mutuals == "first-order"
        # agreement to O((M/L)²)
        np.testing.assert_allclose(first._Lam, exact._Lam, rtol=2 * (5.0 / 500.0) ** 2)
        with pytest.raises(QuantizationError):
            quantize(self._two_lc(5.0), mutuals="bogus")

    def test_galvanic_groups_fig8(self):
        groups = galvanic_groups(builtin("fig8"))
        assert len(groups) == 4
        assert {g[0][:2] for g in groups} == {"A_", "B_", "Cz", "Cx"}


class TestConvergenceReport:
    def test_report_structure(self):
        m = quantize(table_case("A", "fig3b"), n_max=4)
        rep = convergence_report(m, {"Qb": 0.0}, n_levels=3)
        assert len(rep.variations) == 3
        d = rep.as_dict()
        assert d["base_dims"] == [9, 9, 9] and "converged" in d
        # n_max=4 is deliberately under-converged in the periodic mode
        assert not rep.converged and rep.max_change > rep.tol
        rep8 = convergence_report(quantize(table_case("A", "fig3b"), n_max=8), {"Qb": 0.0}, n_levels=2)
        assert rep8.max_change < rep.max_change
