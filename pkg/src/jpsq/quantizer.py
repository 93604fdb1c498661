"""Circuit quantization: mode decomposition, truncated bases and Hamiltonian assembly.

Coordinates. Node phases φ (over the non-ground nodes) are split by the
connected components of the *linear-inductor* graph. A component containing
ground contributes one oscillator coordinate per node. A floating component
contributes one periodic coordinate (the phase of its first node, shared by
all of its nodes) plus oscillator coordinates for the differences to that
reference. Periodic coordinates live in a charge basis; oscillator
coordinates are rotated to normal modes of the quadratic (inductive-only)
Hamiltonian and live in a Fock basis, centred on the classical minimum of
the inductive energy for the present flux bias.

With θ = (periodic ψ, normal-mode ξ) and conjugate momenta p, the
Hamiltonian is

    H = ½ (p − q)ᵀ E (p − q) + Σ_k ω_k (a_k†a_k + ½) − Σ_j E_Jj cos(m_jᵀθ + α_j) + c

where q holds the island offset charges projected on periodic modes, α_j is
an affine function of the flux biases and c is the inductive energy at the
shifted origin. Energies are in GHz.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Mapping, Sequence

import numpy as np
from scipy.linalg import expm

from . import units
from .circuit import (
    BiasPoint,
    CircuitSpec,
    INDUCTIVE_KINDS,
    _components,
    allocate_branch_offsets,
    branch_inductance_matrix,
    capacitance_matrix,
    inductor_branches,
    validate,
)
from .operators import KronOperator, excitation_states, merge_modes

logger = logging.getLogger(__name__)

DEFAULT_N_MAX = 10
DEFAULT_PLASMA_LEVELS = 8
DEFAULT_LOOP_LEVELS = 15
DEFAULT_STIFF_LEVELS = 3
# stiff modes are merged into one composite mode keeping product states with
# at most this many total excitations
DEFAULT_STIFF_EXCITATIONS = 1
# A mode whose Josephson curvature is below this fraction of ħω is "stiff".
STIFF_RATIO = 0.02
# A mode with ω below this multiple of the slowest oscillator frequency is "loop-like".
LOOP_FREQ_RATIO = 1.5


class QuantizationError(ValueError):
    pass


@dataclass(frozen=True)
class Mode:
    """One quantized degree of freedom.

    ``coordinate`` expresses the mode coordinate as a linear combination of
    node phases (for oscillators, relative to the bias-dependent classical
    minimum). ``size`` is the basis size: 2·n_max + 1 charge states or
    ``n_levels`` Fock states.
    """

    index: int
    kind: str
    size: int
    coordinate: np.ndarray
    label: str
    frequency: float = math.nan
    impedance: float = math.nan
    group: int = 0
    role: str = ""

    @property
    def n_max(self) -> int:
        return (self.size - 1) // 2

    @property
    def n_levels(self) -> int:
        return self.size

    def summary(self) -> dict:
        d = {"index": self.index, "kind": self.kind, "size": self.size, "label": self.label, "group": self.group}
        if self.kind == "oscillator":
            d.update(frequency_GHz=self.frequency, impedance_ohm=self.impedance, role=self.role)
        return d


@dataclass(frozen=True)
class JosephsonTerm:
    branch: str
    E_J: float
    coeffs: np.ndarray  # over θ; integers on periodic modes, λ (in ξ units) on oscillators
    alpha0: float
    alpha_grad: np.ndarray  # ∂α/∂(flux bias), radians per Φ0


def _sqrtm_sym(A: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    w, v = np.linalg.eigh(A)
    if w.min() <= 0:
        raise QuantizationError("kinetic matrix is not positive definite")
    return (v * np.sqrt(w)) @ v.T, (v / np.sqrt(w)) @ v.T


def _ladder(n: int) -> np.ndarray:
    return np.diag(np.sqrt(np.arange(1, n)), 1)


def displacement(lam: float, n: int) -> np.ndarray:
    """exp(iλ(a + a†)) in an n-level truncated Fock basis (dense expm)."""
    a = _ladder(n)
    return expm(1j * lam * (a + a.T))


def charge_shift(m: int, size: int) -> np.ndarray:
    """e^{imφ} on a charge basis: |n⟩ → |n + m⟩ (truncated)."""
    return np.eye(size, k=-m, dtype=complex)


@dataclass
class QuantizedModel:
    """Immutable quantized description of a circuit (see module docstring)."""

    spec: CircuitSpec
    modes: tuple[Mode, ...]
    W: np.ndarray  # node phases = W θ + shift(bias)
    E: np.ndarray  # kinetic matrix over θ momenta (GHz); oscillator block is the identity
    cross_flux: np.ndarray  # residual quadratic flux couplings between normal modes of different groups
    junctions: tuple[JosephsonTerm, ...]
    flux_names: tuple[str, ...]
    charge_names: tuple[str, ...]
    charge_proj: np.ndarray  # q_periodic = charge_proj @ Q (n_periodic × n_islands)
    island_mode: tuple[int | None, ...]  # periodic mode index carrying each island's parity
    # inductive offset data: ô = 2π(o0 + o1·b) over inductor branches
    _ind_o0: np.ndarray = field(repr=False)
    _ind_o1: np.ndarray = field(repr=False)
    _Lam: np.ndarray = field(repr=False)  # FLUX_SCALE · L_b⁻¹ (GHz)
    _D: np.ndarray = field(repr=False)  # inductor incidence over active nodes
    _shift_map: np.ndarray = field(repr=False)  # node shift = _shift_map @ g_nodes
    stiff_excitations: int | None = None
    groups: tuple[tuple[str, ...], ...] | None = None
    mutuals: str = "exact"
    _cache: dict = field(default_factory=dict, repr=False)

    # ---- basic properties
    @property
    def mode_dims(self) -> tuple[int, ...]:
        """Per-mode basis sizes before any stiff-mode merging."""
        return tuple(m.size for m in self.modes)

    @cached_property
    def merged(self) -> list[tuple[list[int], list[tuple[int, ...]]]]:
        """Per group: (stiff mode indices, kept product states) for each merged composite mode."""
        out = []
        if self.stiff_excitations is None:
            return out
        for g in range(self.n_groups):
            stiff = [m.index for m in self.modes if m.role == "stiff" and m.group == g]
            if len(stiff) >= 2:
                out.append((stiff, excitation_states([self.modes[k].size for k in stiff], self.stiff_excitations)))
        return out

    @cached_property
    def _axes(self) -> list[tuple[int, int, list[int]]]:
        """Operator axes after merging: (size, group, mode indices)."""
        composite = {modes[0]: (modes, states) for modes, states in self.merged}
        dropped = {k for modes, _ in self.merged for k in modes[1:]}
        axes = []
        for m in self.modes:
            if m.index in dropped:
                continue
            if m.index in composite:
                modes, states = composite[m.index]
                axes.append((len(states), m.group, modes))
            else:
                axes.append((m.size, m.group, [m.index]))
        return axes

    @property
    def dims(self) -> tuple[int, ...]:
        """Dimensions of the operators returned by this model (after merging)."""
        return tuple(a[0] for a in self._axes)

    @property
    def axis_groups(self) -> tuple[int, ...]:
        return tuple(a[1] for a in self._axes)

    def reduce(self, op: KronOperator) -> KronOperator:
        """Restrict an operator on the full mode grid to the merged basis."""
        if not self.merged:
            return op
        # later groups first, so earlier mode indices stay valid
        for modes, states in sorted(self.merged, key=lambda ms: -ms[0][0]):
            op = merge_modes(op, modes, states)
        return op.simplified()

    @property
    def hilbert_dim(self) -> int:
        return int(np.prod(self.dims, dtype=np.int64))

    @property
    def periodic(self) -> list[int]:
        return [m.index for m in self.modes if m.kind == "periodic"]

    @property
    def oscillators(self) -> list[int]:
        return [m.index for m in self.modes if m.kind == "oscillator"]

    @property
    def n_groups(self) -> int:
        return 1 + max((m.group for m in self.modes), default=0)

    @cached_property
    def cap_inverse(self) -> np.ndarray:
        """Inverse capacitance matrix in mode coordinates, 1/fF."""
        return self.E / units.CHARGE_SCALE

    @property
    def ind_matrix(self) -> np.ndarray:
        """Quadratic inductive energy matrix over θ (GHz per rad²)."""
        K = np.zeros((len(self.modes),) * 2)
        for k in self.oscillators:
            K[k, k] = self.modes[k].frequency ** 2
        return K + self.cross_flux

    @property
    def josephson_terms(self) -> list[tuple[float, np.ndarray, str]]:
        return [(j.E_J, j.coeffs, j.branch) for j in self.junctions]

    def describe(self) -> dict:
        return {
            "circuit": self.spec.name,
            "hilbert_dim": self.hilbert_dim,
            "dims": list(self.dims),
            "stiff_excitations": self.stiff_excitations if self.merged else None,
            "mutuals": self.mutuals,
            "modes": [m.summary() for m in self.modes],
            "flux_biases": list(self.flux_names),
            "charge_biases": list(self.charge_names),
        }

    # ---- bias handling
    def bias_vector(self, bias: BiasPoint) -> np.ndarray:
        missing = [n for n in self.flux_names if n not in bias.fluxes]
        if missing:
            raise KeyError(f"missing flux bias(es) {missing}")
        return np.array([bias.fluxes[n] for n in self.flux_names], dtype=float)

    def charge_vector(self, bias: BiasPoint) -> np.ndarray:
        missing = [n for n in self.charge_names if n not in bias.charges]
        if missing:
            raise KeyError(f"missing charge bias(es) {missing}")
        return np.array([bias.charges[n] for n in self.charge_names], dtype=float)

    def alphas(self, b: np.ndarray) -> np.ndarray:
        return np.array([j.alpha0 + j.alpha_grad @ b for j in self.junctions])

    def _ind_terms(self, b: np.ndarray):
        ohat = 2 * np.pi * (self._ind_o0 + self._ind_o1 @ b) if self._ind_o0.size else np.zeros(0)
        g = self._D.T @ (self._Lam @ ohat) if ohat.size else np.zeros(self.W.shape[0])
        return ohat, g

    def inductive_constant(self, b: np.ndarray) -> float:
        ohat, g = self._ind_terms(b)
        if not ohat.size:
            return 0.0
        shift = self._shift_map @ g
        return float(0.5 * ohat @ self._Lam @ ohat - 0.5 * g @ shift)

    def inductive_constant_grad(self, b: np.ndarray) -> np.ndarray:
        ohat, g = self._ind_terms(b)
        if not ohat.size:
            return np.zeros(len(self.flux_names))
        dohat = 2 * np.pi * self._ind_o1
        dg = self._D.T @ (self._Lam @ dohat)
        shift = self._shift_map @ g
        return ohat @ self._Lam @ dohat - shift @ dg

    def node_shift(self, b: np.ndarray) -> np.ndarray:
        _, g = self._ind_terms(b)
        return self._shift_map @ g

    # ---- operator tables
    def _charge_values(self, k: int, parity: int) -> np.ndarray:
        N = self.modes[k].n_max
        return np.arange(-N, N + 1, dtype=float) + 0.5 * parity

    def _osc_ops(self, k: int) -> dict[str, np.ndarray]:
        key = ("osc", k)
        if key not in self._cache:
            n = self.modes[k].size
            w = self.modes[k].frequency
            a = _ladder(n)
            xi = (a + a.T) / math.sqrt(2 * w)
            pi = 1j * math.sqrt(w / 2) * (a.T - a)
            self._cache[key] = {"xi": xi, "pi": pi, "number": np.arange(n, dtype=float)}
        return self._cache[key]

    def _junction_factors(self, j: int) -> dict[int, np.ndarray]:
        key = ("jj", j)
        if key not in self._cache:
            term = self.junctions[j]
            f: dict[int, np.ndarray] = {}
            for k, c in enumerate(term.coeffs):
                if c == 0:
                    continue
                m = self.modes[k]
                if m.kind == "periodic":
                    f[k] = charge_shift(int(round(c)), m.size)
                else:
                    f[k] = displacement(c / math.sqrt(2 * m.frequency), m.size)
            self._cache[key] = f
        return self._cache[key]

    def parities(self, parity) -> np.ndarray:
        """Per-periodic-mode parity (0/1) from an int or a mapping island charge-bias → 0/1."""
        par = np.zeros(len(self.modes), dtype=int)
        if parity is None or parity == 0:
            return par
        if isinstance(parity, Mapping):
            items = parity.items()
        else:
            items = [(n, int(parity)) for n in self.charge_names]
        for name, p in items:
            i = self.charge_names.index(name)
            k = self.island_mode[i]
            if k is not None and p % 2:
                par[k] = 1
        return par

    def _momenta(self, Q: np.ndarray, par: np.ndarray) -> dict[int, np.ndarray]:
        """p − q factor per mode: diagonal arrays on periodic modes, π matrices on oscillators."""
        q = np.zeros(len(self.modes))
        if Q.size:
            q[self.periodic] = self.charge_proj @ Q
        out = {}
        for k, m in enumerate(self.modes):
            if m.kind == "periodic":
                out[k] = self._charge_values(k, par[k]) - q[k]
            else:
                out[k] = self._osc_ops(k)["pi"]
        return out

    def hamiltonian(self, bias: BiasPoint, parity=0) -> KronOperator:
        """Assemble H at ``bias`` (see :func:`build_hamiltonian`)."""
        b = self.bias_vector(bias)
        Q = self.charge_vector(bias)
        par = self.parities(parity)
        P = self._momenta(Q, par)
        H = KronOperator(self.mode_dims)
        n = len(self.modes)
        for i in range(n):
            mi = self.modes[i]
            if mi.kind == "periodic":
                H.add(0.5 * self.E[i, i], {i: P[i] ** 2})
            else:
                H.add(mi.frequency, {i: self._osc_ops(i)["number"] + 0.5})
            for j in range(i + 1, n):
                if self.E[i, j] != 0:
                    H.add(self.E[i, j], {i: P[i], j: P[j]})
                if self.cross_flux[i, j] != 0:
                    H.add(self.cross_flux[i, j], {i: self._osc_ops(i)["xi"], j: self._osc_ops(j)["xi"]})
        for j, (term, alpha) in enumerate(zip(self.junctions, self.alphas(b))):
            f = self._junction_factors(j)
            H.add(-0.5 * term.E_J * np.exp(1j * alpha), f)
            H.add(-0.5 * term.E_J * np.exp(-1j * alpha), {k: F.conj().T for k, F in f.items()})
        H.add(self.inductive_constant(b), {})
        return self.reduce(H.simplified())

    def derivative(self, bias: BiasPoint, name: str, parity=0) -> KronOperator:
        """∂H/∂λ for flux bias (GHz per Φ0) or charge bias (GHz per 2e) ``name``."""
        b = self.bias_vector(bias)
        D = KronOperator(self.mode_dims)
        if name in self.flux_names:
            ib = self.flux_names.index(name)
            for j, (term, alpha) in enumerate(zip(self.junctions, self.alphas(b))):
                g = term.alpha_grad[ib]
                if g == 0:
                    continue
                f = self._junction_factors(j)
                D.add(g * term.E_J / 2j * np.exp(1j * alpha), f)
                D.add(-g * term.E_J / 2j * np.exp(-1j * alpha), {k: F.conj().T for k, F in f.items()})
            D.add(float(self.inductive_constant_grad(b)[ib]), {})
            return self.reduce(D.simplified())
        if name in self.charge_names:
            ic = self.charge_names.index(name)
            Q = self.charge_vector(bias)
            P = self._momenta(Q, self.parities(parity))
            w = np.zeros(len(self.modes))
            w[self.periodic] = self.charge_proj[:, ic]
            coeff = -(w @ self.E)
            for k, c in enumerate(coeff):
                if c != 0:
                    D.add(c, {k: P[k]})
            return self.reduce(D.simplified())
        raise KeyError(f"unknown bias '{name}'")

    def momentum_operator(self, weights: np.ndarray, bias: BiasPoint, parity=0) -> KronOperator:
        """Σ_m w_m (p_m − q_m) over θ momenta."""
        P = self._momenta(self.charge_vector(bias), self.parities(parity))
        op = KronOperator(self.mode_dims)
        for k, c in enumerate(weights):
            if abs(c) > 0:
                op.add(c, {k: P[k]})
        return self.reduce(op.simplified())

    def node_voltage_operators(self, bias: BiasPoint, parity=0) -> dict[str, KronOperator]:
        """V_n = ∂H/∂Q_n for each active node, in GHz per 2e."""
        # n_node = W⁻ᵀ p and V = E_node n_node with E_node = W E Wᵀ, so V = W E p.
        M = self.W @ self.E
        return {node: self.momentum_operator(M[i], bias, parity) for i, node in enumerate(self.spec.active_nodes)}

    def inductor_current_operators(self, bias: BiasPoint) -> dict[str, KronOperator]:
        """I_l = ∂H/∂Φ_l for each inductor branch, in GHz per Φ0 (multiply by NA_PER_GHZ_PER_PHI0 for nA)."""
        out = {}
        if not self._ind_o0.size:
            return out
        b = self.bias_vector(bias)
        ohat, g = self._ind_terms(b)
        shift = self.node_shift(b)
        # branch phases about the shifted origin: D(Wθ + shift) − ô
        Dw = self._D @ self.W
        const = self._D @ shift - ohat
        names = [br.name for br in inductor_branches(self.spec)]
        for li, name in enumerate(names):
            row_w = 2 * np.pi * (self._Lam[li] @ Dw)
            c0 = 2 * np.pi * float(self._Lam[li] @ const)
            op = KronOperator(self.mode_dims)
            for k, c in enumerate(row_w):
                if abs(c) > 1e-14:
                    if self.modes[k].kind == "periodic":
                        raise QuantizationError("inductor current depends on a periodic coordinate")
                    op.add(c, {k: self._osc_ops(k)["xi"]})
            op.add(c0, {})
            out[name] = self.reduce(op.simplified())
        return out


def _mode_coordinates(spec: CircuitSpec):
    """Node→coordinate transform T (φ = Tψ), labels, kinds and inductive components."""
    nodes = spec.active_nodes
    idx = {n: i for i, n in enumerate(nodes)}
    ind_edges = [b.nodes for b in spec.branches if b.kind == "inductor"]
    comps = _components(spec.nodes, ind_edges)
    periodic_cols, osc_cols = [], []
    for comp in comps:
        members = [n for n in nodes if n in comp]
        if spec.ground in comp:
            for n in members:
                col = np.zeros(len(nodes))
                col[idx[n]] = 1.0
                osc_cols.append((col, f"phi[{n}]", members))
        else:
            ref = members[0]
            col = np.zeros(len(nodes))
            for n in members:
                col[idx[n]] = 1.0
            periodic_cols.append((col, f"psi[{','.join(members)}]", members))
            for n in members[1:]:
                c2 = np.zeros(len(nodes))
                c2[idx[n]] = 1.0
                osc_cols.append((c2, f"phi[{n}]-phi[{ref}]", members))
    periodic_cols.sort(key=lambda c: nodes.index(c[2][0]))
    return periodic_cols, osc_cols


def _group_of_nodes(spec: CircuitSpec, groups: Sequence[Sequence[str]] | None) -> dict[str, int]:
    if groups is None:
        return {n: 0 for n in spec.active_nodes}
    out = {}
    for g, members in enumerate(groups):
        for n in members:
            out[n] = g
    missing = [n for n in spec.active_nodes if n not in out]
    if missing:
        raise QuantizationError(f"nodes {missing} not assigned to a group")
    return out


def galvanic_groups(spec: CircuitSpec) -> list[list[str]]:
    """Node sets connected by any element other than mutual inductance, ignoring ground."""
    edges = [b.nodes for b in spec.branches if spec.ground not in b.nodes]
    comps = _components(spec.active_nodes, edges)
    return sorted(([n for n in spec.active_nodes if n in c] for c in comps), key=lambda g: spec.active_nodes.index(g[0]))


def _default_levels(freqs: np.ndarray, stiffness: np.ndarray) -> list[tuple[int, str]]:
    if not len(freqs):
        return []
    slow = freqs.min()
    out = []
    for w, s in zip(freqs, stiffness):
        if s < STIFF_RATIO:
            out.append((DEFAULT_STIFF_LEVELS, "stiff"))
        elif w <= LOOP_FREQ_RATIO * slow:
            out.append((DEFAULT_LOOP_LEVELS, "loop"))
        else:
            out.append((DEFAULT_PLASMA_LEVELS, "plasma"))
    return out


def quantize(
    spec: CircuitSpec,
    truncations: Mapping[int, int] | Sequence[int] | None = None,
    n_max: int = DEFAULT_N_MAX,
    groups: Sequence[Sequence[str]] | None = None,
    check: bool = True,
    stiff_excitations: int | None = DEFAULT_STIFF_EXCITATIONS,
    mutuals: str = "exact",
) -> QuantizedModel:
    """Quantize ``spec``.

    ``truncations`` overrides the basis size of individual modes by mode index
    (charge-basis size 2·n_max+1 for periodic modes, Fock levels for
    oscillators). ``groups`` partitions the nodes for hierarchical
    diagonalization; oscillator normal modes are then computed within each
    group and the remaining cross-group quadratic couplings are kept as
    explicit bilinear terms. When two or more oscillators are classified as
    stiff, they are merged into one composite mode holding the product states
    with at most ``stiff_excitations`` quanta in total (``None`` keeps the
    full product basis).

    ``mutuals="first-order"`` expands the inverse inductance matrix to first
    order in the mutual inductances, L⁻¹ ≈ L₀⁻¹ − L₀⁻¹ M L₀⁻¹, i.e. the
    coupling −M·I_a·I_b between branch currents. This keeps each group's own
    inductances unloaded, which hierarchical diagonalization needs when a
    mutual touches a stiff branch whose response the kept states cannot carry.
    """
    if check:
        rep = validate(spec)
        if not rep.ok:
            raise QuantizationError(f"circuit '{spec.name}' failed validation:\n{rep}")
    nodes = spec.active_nodes
    nn = len(nodes)
    idx = {n: i for i, n in enumerate(nodes)}
    Cmat = capacitance_matrix(spec)
    E_node = units.CHARGE_SCALE * np.linalg.inv(Cmat)

    inds = inductor_branches(spec)
    Dmat = np.zeros((len(inds), nn))
    for li, b in enumerate(inds):
        if b.nodes[0] in idx:
            Dmat[li, idx[b.nodes[0]]] -= 1
        if b.nodes[1] in idx:
            Dmat[li, idx[b.nodes[1]]] += 1
    if inds:
        Lb = branch_inductance_matrix(spec)
        try:
            np.linalg.cholesky(Lb)
        except np.linalg.LinAlgError as exc:
            raise QuantizationError("inductance matrix is not positive definite (zero-inductance cycle)") from exc
        if mutuals == "exact":
            Lam = units.FLUX_SCALE * np.linalg.inv(Lb)
        elif mutuals == "first-order":
            L0inv = np.diag(1.0 / np.diag(Lb))
            Lam = units.FLUX_SCALE * (L0inv - L0inv @ (Lb - np.diag(np.diag(Lb))) @ L0inv)
            if np.linalg.eigvalsh(Lam).min() <= 0:
                raise QuantizationError("first-order mutual expansion is not positive definite; use mutuals='exact'")
        else:
            raise QuantizationError(f"unknown mutuals mode {mutuals!r}")
    else:
        Lam = np.zeros((0, 0))
    K_node = Dmat.T @ Lam @ Dmat

    periodic_cols, osc_cols = _mode_coordinates(spec)
    node_group = _group_of_nodes(spec, groups)
    n_p, n_o = len(periodic_cols), len(osc_cols)
    T = np.column_stack([c[0] for c in periodic_cols] + [c[0] for c in osc_cols]) if nn else np.zeros((0, 0))
    Tinv = np.linalg.inv(T)
    E_psi = Tinv @ E_node @ Tinv.T
    K_psi = T.T @ K_node @ T
    if n_p and np.abs(K_psi[:n_p, :]).max() > 1e-9 * max(1.0, np.abs(K_psi).max()):
        raise QuantizationError("internal: inductive energy depends on a periodic coordinate")

    # group of each ψ coordinate: the group of the node it is anchored to
    def coord_group(col):
        gs = {node_group[nodes[i]] for i in np.nonzero(col)[0]}
        if len(gs) != 1:
            raise QuantizationError("an inductive component spans several groups")
        return gs.pop()

    p_groups = [coord_group(c[0]) for c in periodic_cols]
    o_groups = [coord_group(c[0]) for c in osc_cols]

    # normal modes per group of the oscillator block
    A = E_psi[n_p:, n_p:]
    B = K_psi[n_p:, n_p:]
    if n_o:
        wB = np.linalg.eigvalsh(B)
        if wB.min() <= 1e-12 * max(1.0, wB.max()):
            raise QuantizationError("ambiguous decomposition: oscillator block has zero inductive stiffness")
    S = np.zeros((n_o, n_o))
    freqs = np.zeros(n_o)
    o_order = []
    for g in sorted(set(o_groups)):
        sel = [i for i in range(n_o) if o_groups[i] == g]
        Ag, Bg = A[np.ix_(sel, sel)], B[np.ix_(sel, sel)]
        Ah, _ = _sqrtm_sym(Ag)
        w2, U = np.linalg.eigh(Ah @ Bg @ Ah)
        Sg = Ah @ U
        cols = list(range(len(o_order), len(o_order) + len(sel)))
        for c_local, col in enumerate(cols):
            S[sel, col] = Sg[:, c_local]
            freqs[col] = math.sqrt(max(w2[c_local], 0.0))
        o_order.extend((g, c) for c in cols)
    mode_groups = p_groups + [g for g, _ in o_order]

    # full transform φ = W θ, θ = (ψ_p, ξ)
    blk = np.eye(n_p + n_o)
    blk[n_p:, n_p:] = S
    W = T @ blk
    Winv = np.linalg.inv(W)
    E_theta = Winv @ E_node @ Winv.T
    K_theta = W.T @ K_node @ W
    cross = K_theta.copy()
    for k in range(n_p, n_p + n_o):
        cross[k, k] = 0.0
    cross[np.abs(cross) < 1e-12 * max(1.0, np.abs(K_theta).max())] = 0.0
    E_theta[np.abs(E_theta) < 1e-13 * max(1.0, np.abs(E_theta).max())] = 0.0
    for k in range(n_p, n_p + n_o):
        for l in range(n_p, n_p + n_o):
            if mode_groups[k] == mode_groups[l]:
                E_theta[k, l] = 1.0 if k == l else 0.0
                if k != l:
                    cross[k, l] = 0.0

    # flux offsets
    flux_names = spec.flux_bias_names()
    offsets = allocate_branch_offsets(spec)
    nb = len(flux_names)

    def expr_vec(name):
        e = offsets.get(name)
        if e is None:
            return 0.0, np.zeros(nb)
        return e.const, np.array([e.coeff(f) for f in flux_names])

    o0 = np.array([expr_vec(b.name)[0] for b in inds])
    o1 = np.array([expr_vec(b.name)[1] for b in inds]).reshape(len(inds), nb)
    # classical minimum of the inductive energy over oscillator coordinates:
    # shift_nodes = T_o B⁻¹ T_oᵀ g_nodes
    To = T[:, n_p:]
    shift_map = To @ np.linalg.solve(B, To.T) if n_o else np.zeros((nn, nn))
    # linearised shift per unit bias and constant part
    g0 = Dmat.T @ (Lam @ (2 * np.pi * o0)) if inds else np.zeros(nn)
    g1 = Dmat.T @ (Lam @ (2 * np.pi * o1)) if inds else np.zeros((nn, nb))
    shift0, shift1 = shift_map @ g0, shift_map @ g1

    # Josephson terms
    junctions = []
    for b in spec.branches:
        if b.kind != "josephson":
            continue
        row = np.zeros(nn)
        s0, s1 = 0.0, np.zeros(nb)
        if b.nodes[1] in idx:
            row[idx[b.nodes[1]]] += 1
            s0 += shift0[idx[b.nodes[1]]]
            s1 = s1 + shift1[idx[b.nodes[1]]]
        if b.nodes[0] in idx:
            row[idx[b.nodes[0]]] -= 1
            s0 -= shift0[idx[b.nodes[0]]]
            s1 = s1 - shift1[idx[b.nodes[0]]]
        m = row @ W
        m[np.abs(m) < 1e-13] = 0.0
        if n_p and np.abs(m[:n_p] - np.round(m[:n_p])).max() > 1e-9:
            raise QuantizationError(f"non-integer periodic coefficient for junction {b.name}")
        m[:n_p] = np.round(m[:n_p])
        e0, e1 = expr_vec(b.name)
        junctions.append(JosephsonTerm(b.name, float(b.E_J), m, float(2 * np.pi * e0 + s0), 2 * np.pi * e1 + s1))

    # islands → charge projection on periodic modes
    charge_names = tuple(isl.charge for isl in spec.islands)
    Qnode = np.zeros((nn, len(spec.islands)))
    for i, isl in enumerate(spec.islands):
        Qnode[idx[isl.nodes[0]], i] = 1.0
    proj = (W.T @ Qnode)[:n_p] if n_p else np.zeros((0, len(spec.islands)))
    island_mode = []
    for i in range(len(spec.islands)):
        nz = np.nonzero(np.abs(proj[:, i]) > 1e-12)[0] if n_p else []
        island_mode.append(int(nz[0]) if len(nz) else None)

    # mode table and truncations
    stiffness = np.zeros(n_o)
    for k in range(n_o):
        lam2 = sum(j.E_J * (j.coeffs[n_p + k] ** 2) / (2 * freqs[k]) for j in junctions) if freqs[k] > 0 else 0.0
        stiffness[k] = lam2 / freqs[k] if freqs[k] > 0 else 1.0
    levels = _default_levels(freqs, stiffness)
    if truncations is None:
        tr: dict[int, int] = {}
    elif isinstance(truncations, Mapping):
        tr = {int(k): int(v) for k, v in truncations.items()}
    else:
        tr = {k: int(v) for k, v in enumerate(truncations)}
    modes = []
    for k, (col, label, _) in enumerate(periodic_cols):
        size = tr.get(k, 2 * n_max + 1)
        if size < 3 or size % 2 == 0:
            raise QuantizationError(f"periodic mode {k}: basis size must be odd and >= 3 (n_max >= 1)")
        modes.append(Mode(k, "periodic", size, Winv[k], label, group=mode_groups[k]))
    for kk in range(n_o):
        k = n_p + kk
        size = tr.get(k, levels[kk][0])
        if size < 2:
            raise QuantizationError(f"oscillator mode {k}: n_levels must be >= 2")
        # effective node-phase zero-point amplitude → impedance Z = R_Q φ_zpf²/π
        zpf = np.linalg.norm(W[:, k]) / math.sqrt(2 * freqs[kk])
        modes.append(
            Mode(k, "oscillator", size, Winv[k], f"normal mode {kk}", float(freqs[kk]), units.R_Q * zpf**2 / math.pi, mode_groups[k], levels[kk][1])
        )

    model = QuantizedModel(
        spec=spec,
        modes=tuple(modes),
        W=W,
        E=E_theta,
        cross_flux=cross,
        junctions=tuple(junctions),
        flux_names=flux_names,
        charge_names=charge_names,
        charge_proj=proj,
        island_mode=tuple(island_mode),
        _ind_o0=o0,
        _ind_o1=o1,
        _Lam=Lam,
        _D=Dmat,
        _shift_map=shift_map,
        stiff_excitations=stiff_excitations,
        groups=None if groups is None else tuple(tuple(g) for g in groups),
        mutuals=mutuals,
    )
    logger.debug("quantized %s: %s", spec.name, model.describe())
    return model


def decompose_modes(spec: CircuitSpec) -> list[Mode]:
    """Mode list with default truncations (see :func:`quantize`)."""
    return list(quantize(spec).modes)


def build_hamiltonian(model: QuantizedModel, bias: BiasPoint, parity=0) -> KronOperator:
    """Hamiltonian at ``bias``; ``parity`` is 0/1 for all islands or a mapping charge-bias → 0/1."""
    return model.hamiltonian(bias, parity)


def cosine_operator(model: QuantizedModel, coeffs: Sequence[float], offset: float = 0.0) -> KronOperator:
    """cos(Σ_k c_k θ_k + offset) = ½(e^{i(...)} + h.c.) on the model's truncated basis."""
    f = {}
    for k, c in enumerate(coeffs):
        if c == 0:
            continue
        m = model.modes[k]
        if m.kind == "periodic":
            if abs(c - round(c)) > 1e-12:
                raise QuantizationError(f"non-integer coefficient {c} on periodic mode {k}")
            f[k] = charge_shift(int(round(c)), m.size)
        else:
            f[k] = displacement(c / math.sqrt(2 * m.frequency), m.size)
    op = KronOperator(model.mode_dims)
    op.add(0.5 * np.exp(1j * offset), f)
    op.add(0.5 * np.exp(-1j * offset), {k: F.conj().T for k, F in f.items()})
    return model.reduce(op)
