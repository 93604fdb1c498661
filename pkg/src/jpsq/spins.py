"""Pauli-string spin Hamiltonians composed from circuit-derived two-level models.

Text format, one term per line: ``coefficient  PAULI_STRING`` (GHz), e.g.
``-1.25  ZIZI``. Blank lines and ``#`` comments are ignored. Qubit k is the
k-th character (leftmost = spin 1) and the leftmost factor is the most
significant in Kronecker order.
"""

from __future__ import annotations

import math
import re
from dataclasses import asdict, dataclass, field
from functools import reduce
from typing import Iterable, Mapping, Sequence

import numpy as np

from .observables import NoiseModel, SECTION_IV_NOISE, boltzmann_factor, numerical_range_halfwidth, t1_rate

PAULI = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}
_TERM = re.compile(r"^\s*([-+0-9.eE]+)\s+([IXYZ]+)\s*$")


def pauli_matrix(s: str) -> np.ndarray:
    return reduce(np.kron, (PAULI[c] for c in s))


def single(axis: str, k: int, n: int) -> str:
    """Pauli string with ``axis`` on spin k (0-based) and identity elsewhere."""
    return "I" * k + axis + "I" * (n - k - 1)


def pair(axis: str, i: int, j: int, n: int) -> str:
    s = ["I"] * n
    s[i] = s[j] = axis
    return "".join(s)


@dataclass(frozen=True)
class PauliModel:
    n_spins: int
    terms: tuple[tuple[float, str], ...] = ()

    def __post_init__(self):
        for c, s in self.terms:
            if len(s) != self.n_spins or set(s) - set("IXYZ"):
                raise ValueError(f"bad Pauli string {s!r} for {self.n_spins} spins")
            if not np.isreal(c):
                raise ValueError("coefficients must be real")

    def matrix(self) -> np.ndarray:
        d = 2**self.n_spins
        H = np.zeros((d, d), dtype=complex)
        for c, s in self.terms:
            H += c * pauli_matrix(s)
        return H

    def eigh(self) -> tuple[np.ndarray, np.ndarray]:
        return np.linalg.eigh(self.matrix())

    def combined(self, other: "PauliModel") -> "PauliModel":
        if other.n_spins != self.n_spins:
            raise ValueError("spin counts differ")
        return PauliModel(self.n_spins, self.terms + other.terms)

    def simplified(self, tol: float = 0.0) -> "PauliModel":
        acc: dict[str, float] = {}
        for c, s in self.terms:
            acc[s] = acc.get(s, 0.0) + c
        return PauliModel(self.n_spins, tuple((c, s) for s, c in acc.items() if abs(c) > tol))

    def relabeled(self, mapping: Mapping[str, str]) -> "PauliModel":
        """Apply a letter substitution such as {"X": "Z", "Z": "X"} to every string."""
        return PauliModel(self.n_spins, tuple((c, "".join(mapping.get(ch, ch) for ch in s)) for c, s in self.terms))

    def to_text(self) -> str:
        return "".join(f"{c!r}  {s}\n" for c, s in self.terms)

    @classmethod
    def from_text(cls, text: str) -> "PauliModel":
        terms = []
        for ln, line in enumerate(text.splitlines(), 1):
            line = line.split("#", 1)[0]
            if not line.strip():
                continue
            m = _TERM.match(line)
            if not m:
                raise ValueError(f"line {ln}: expected 'coefficient  PAULI_STRING', got {line.strip()!r}")
            terms.append((float(m.group(1)), m.group(2)))
        if not terms:
            raise ValueError("no terms")
        n = {len(s) for _, s in terms}
        if len(n) != 1:
            raise ValueError("Pauli strings of different lengths")
        return cls(n.pop(), tuple(terms))


def build_tim(fields: Sequence[tuple[float, float]], couplings: Mapping[tuple[int, int], float] | None = None) -> PauliModel:
    """eq:TIM: H = −Σ_i (E^z_i σ^z_i + E^x_i σ^x_i) − Σ_ij J_ij σ^z_i σ^z_j.

    ``fields[i] = (E^z_i, E^x_i)`` in GHz; ``couplings`` maps 0-based (i, j) to J_ij.
    """
    n = len(fields)
    terms = []
    for i, (ez, ex) in enumerate(fields):
        terms += [(-float(ez), single("Z", i, n)), (-float(ex), single("X", i, n))]
    for (i, j), J in (couplings or {}).items():
        if not (0 <= i < n and 0 <= j < n and i != j):
            raise ValueError(f"bad coupling indices {(i, j)} for {n} spins")
        terms.append((-float(J), pair("Z", i, j, n)))
    return PauliModel(n, tuple(t for t in terms if t[0] != 0))


def build_two_spin(
    fields: Sequence[tuple[float, float, float]],
    J_zz: float = 0.0,
    J_xx: float = 0.0,
    J_yy: float = 0.0,
) -> PauliModel:
    """Two vector spins (eq:Hxx generalised): −Σ_i E_i·σ_i − Σ_a J_aa σ^a_1 σ^a_2.

    ``fields[i] = (E^x_i, E^y_i, E^z_i)``.
    """
    if len(fields) != 2:
        raise ValueError("need two spins")
    terms = []
    for i, f in enumerate(fields):
        terms += [(-float(v), single(a, i, 2)) for a, v in zip("XYZ", f)]
    terms += [(-float(J), a + a) for a, J in (("X", J_xx), ("Y", J_yy), ("Z", J_zz))]
    return PauliModel(2, tuple(t for t in terms if t[0] != 0))


# ---------------------------------------------------------------- Bacon-Shor

# zz penalty pairs (1,2),(3,4) and yy pairs (1,3),(2,4), 0-based; see ledger:
# with the check pairs as printed, the zz logical-x coupler on (1,3) would act
# as the identity on the protected doublet.
CHECKS = ("ZZII", "IIZZ", "YIYI", "IYIY")
LOGICAL_X = "ZIZI"  # zz coupler between qubits 1 and 3 (Fig. 9)
LOGICAL_Z = "XXII"  # xx coupler between qubits 1 and 2 (Fig. 9)
STABILIZERS = ("ZZZZ", "YYYY")


@dataclass(frozen=True)
class NoiseMapping:
    """Circuit-scale single-spin transition moments used for the §IV lifetime estimates.

    Charge noise couples through σ^y (``charge_uV``), flux noise through σ^x
    (``flux_x_nA``) and σ^z (``flux_z_nA``), independently on each spin.
    """

    charge_uV: float = 0.15
    flux_x_nA: float = 70.0
    flux_z_nA: float = 70.0


DEFAULT_MAPPING = NoiseMapping()


@dataclass
class BaconShorModel:
    E_p: float
    h_x: float = 0.0  # logical-x control (coefficient of −Z1Z3)
    h_z: float = 0.0  # logical-z control (coefficient of −X1X2)
    model: PauliModel = field(init=False)
    energies: np.ndarray = field(init=False, repr=False)
    vectors: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        if self.E_p <= 0:
            raise ValueError("E_p must be positive")
        terms = tuple((self.E_p, c) for c in CHECKS)
        terms += tuple(t for t in ((-self.h_x, LOGICAL_X), (-self.h_z, LOGICAL_Z)) if t[0] != 0)
        self.model = PauliModel(4, terms)
        self.energies, self.vectors = self.model.eigh()

    @property
    def logical(self) -> np.ndarray:
        return self.vectors[:, :2]

    @property
    def logical_splitting(self) -> float:
        return float(self.energies[1] - self.energies[0])

    @property
    def gap(self) -> float:
        """ΔE_L: lowest excited manifold above the upper logical state (GHz)."""
        return float(self.energies[2] - self.energies[1])

    def excited_manifold(self, tol: float = 1e-6) -> np.ndarray:
        """Eigenvectors degenerate (to ``tol`` relative to E_p) with level 2, widened by the logical fields."""
        e = self.energies
        width = tol * self.E_p + 2 * (abs(self.h_x) + abs(self.h_z))
        idx = [i for i in range(2, len(e)) if e[i] - e[2] <= width]
        return self.vectors[:, idx]

    def project(self, s: str) -> np.ndarray:
        L = self.logical
        return L.conj().T @ pauli_matrix(s) @ L

    def check_commutators(self) -> dict:
        """‖[A, B]‖ for each pair of checks, plus each check/stabilizer against H."""
        H = self.model.matrix()
        out = {}
        for i, a in enumerate(CHECKS):
            for b in CHECKS[i + 1 :]:
                A, B = pauli_matrix(a), pauli_matrix(b)
                out[f"{a},{b}"] = float(np.linalg.norm(A @ B - B @ A, 2))
        for s in STABILIZERS:
            S = pauli_matrix(s)
            out[f"{s},H"] = float(np.linalg.norm(S @ H - H @ S, 2))
        return out

    def logical_algebra(self) -> dict:
        """Projected anticommutator of the logical operators and deviation of their squares from identity.

        The logical-z coupler is a dressed operator; its projection is
        normalised by its own singular value before the checks.
        """
        X, Z = self.project(LOGICAL_X), self.project(LOGICAL_Z)
        sx = np.linalg.svd(X, compute_uv=False)[0]
        sz = np.linalg.svd(Z, compute_uv=False)[0]
        Xn, Zn = X / sx, Z / sz
        return {
            "anticommutator": float(np.abs(Xn @ Zn + Zn @ Xn).max()),
            "square_X": float(np.abs(Xn @ Xn - np.eye(2)).max()),
            "square_Z": float(np.abs(Zn @ Zn - np.eye(2)).max()),
            "scale_X": float(sx),
            "scale_Z": float(sz),
        }


def build_bacon_shor(E_p: float, h_x: float = 0.0, h_z: float = 0.0) -> BaconShorModel:
    """H = E_p Σ checks − h_x Z1Z3 − h_z X1X2, diagonalized exactly (16 dimensions)."""
    return BaconShorModel(E_p, h_x, h_z)


def penalty_for_gap(gap_GHz: float) -> float:
    """E_p giving ΔE_L = gap at zero logical field (ΔE_L = (2√2 − 2)E_p)."""
    return gap_GHz / (2 * math.sqrt(2) - 2)


@dataclass
class LogicalDipoles:
    in_subspace: dict  # Pauli string → D over the logical doublet (Pauli units)
    transition_weight: dict  # axis → [Σ_k Σ_b |⟨b|σ^a_k|L⟩|² for each logical state L]
    lifetimes_s: dict  # channel → [lifetime from each logical state]
    conventions: dict

    def as_dict(self) -> dict:
        return {
            "in_subspace": self.in_subspace,
            "transition_weight": self.transition_weight,
            "lifetimes_s": self.lifetimes_s,
            "conventions": self.conventions,
        }


def logical_dipoles(
    bs: BaconShorModel,
    noise: NoiseModel = SECTION_IV_NOISE,
    mapping: NoiseMapping = DEFAULT_MAPPING,
) -> LogicalDipoles:
    """Single-spin dipoles within the logical doublet and transition weights into the first excited manifold.

    Lifetimes: absorption from each logical state into the first excited
    manifold, rate (2/ħ²)|M|²S(ΔE_L)·exp(−ΔE_L/k_BT), summed over spins and
    manifold states for each channel.
    """
    n = 4
    L, B = bs.logical, bs.excited_manifold()
    in_sub = {}
    for a in "XYZ":
        for k in range(n):
            s = single(a, k, n)
            in_sub[s] = numerical_range_halfwidth(L.conj().T @ pauli_matrix(s) @ L)
    weight = {}
    for a in "XYZ":
        w = np.zeros(2)
        for k in range(n):
            A = B.conj().T @ pauli_matrix(single(a, k, n)) @ L
            w += np.sum(np.abs(A) ** 2, axis=0)
        weight[a] = w.tolist()
    boltz = boltzmann_factor(bs.gap, noise.temperature_mK) if noise.temperature_mK else 1.0
    rates_q = t1_rate(mapping.charge_uV * 1e-6, noise.psd("charge")) * np.array(weight["Y"]) * boltz
    S_f = noise.psd("flux")
    rates_f = (t1_rate(mapping.flux_x_nA * 1e-9, S_f) * np.array(weight["X"]) + t1_rate(mapping.flux_z_nA * 1e-9, S_f) * np.array(weight["Z"])) * boltz
    inv = lambda r: [math.inf if x == 0 else 1 / x for x in r]  # noqa: E731
    return LogicalDipoles(
        in_sub,
        weight,
        {"charge": inv(rates_q), "flux": inv(rates_f)},
        {
            "rate": "(2/hbar^2)|M|^2 S(dE_L) exp(-dE_L/kT), absorption only",
            "mapping": asdict(mapping),
            "gap_GHz": bs.gap,
            "boltzmann": boltz,
            "noise": {"S_charge_e": noise.S_charge, "S_flux_Phi0": noise.S_flux, "temperature_mK": noise.temperature_mK},
        },
    )


def dipoles_from_circuit(two_level_dipoles: Iterable[float]) -> NoiseMapping:
    """Unmapped alternative: a single JPSQ's (I^x, V^y, I^z) used directly as the spin moments."""
    ix, vy, iz = two_level_dipoles
    return NoiseMapping(charge_uV=vy, flux_x_nA=ix, flux_z_nA=iz)
