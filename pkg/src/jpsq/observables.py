"""Observables from numerical spectra: dipole moments, two-level fits, flux-qubit I_q^x,
coupler J_xx, coherence metrics and the aggregate dipoles of eq:Ldipoles.

Natural units: derivatives with respect to a flux bias are in GHz/Φ0 and
with respect to a charge bias in GHz/2e. :func:`to_physical` converts to nA
and µV.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Mapping, Sequence

import numpy as np

from . import units
from .analytic import TwoLevelModel
from .circuit import BiasPoint
from .operators import KronOperator
from .quantizer import QuantizedModel
from .spectrum import SpectrumResult, _as_bias, solve

SQRT_LN2 = math.sqrt(math.log(2))
JPSQ_AXES = ("dPhiX", "Qb", "dPhiZ")


class TwoLevelError(RuntimeError):
    pass


# ---------------------------------------------------------------- dipole blocks


def to_physical(model: QuantizedModel, name: str, value):
    """GHz/Φ0 → nA for flux biases, GHz/2e → µV for charge biases."""
    if name in model.flux_names:
        return np.asarray(value) * units.NA_PER_GHZ_PER_PHI0
    if name in model.charge_names:
        return np.asarray(value) * units.UV_PER_GHZ_PER_2E
    raise KeyError(f"unknown bias '{name}'")


def physical_unit(model: QuantizedModel, name: str) -> str:
    return "nA" if name in model.flux_names else "uV"


def block(op: KronOperator, vectors: np.ndarray) -> np.ndarray:
    """⟨s|O|s′⟩ over the columns of ``vectors``."""
    B = vectors.conj().T @ op.matmat(vectors)
    return 0.5 * (B + B.conj().T)


def dipole_matrix(
    model: QuantizedModel,
    bias: BiasPoint | Mapping[str, float] | None,
    name: str,
    vectors: np.ndarray,
    parity=0,
) -> np.ndarray:
    """Hellmann–Feynman block ⟨s|∂H/∂λ|s′⟩ in natural units (Hermitian)."""
    bias = _as_bias(model, bias)
    return block(model.derivative(bias, name, parity), vectors)


def numerical_range_halfwidth(B: np.ndarray) -> float:
    """D = ½·W[B]: half the eigenvalue spread of a Hermitian block (eq:dipoleop)."""
    w = np.linalg.eigvalsh(0.5 * (B + B.conj().T))
    return 0.5 * float(w[-1] - w[0])


@dataclass
class DipoleSet:
    values: dict  # bias name → dipole in physical units
    units: dict  # bias name → "nA" | "uV"
    method: str  # hellmann-feynman | finite-difference
    natural: dict = field(default_factory=dict)  # bias name → value in GHz/Φ0 or GHz/2e

    def as_dict(self) -> dict:
        return asdict(self)


def hellmann_feynman_diagonal(model: QuantizedModel, result: SpectrumResult, name: str) -> np.ndarray:
    """⟨n|∂H/∂λ|n⟩ for every eigenvector in ``result`` (natural units)."""
    if result.eigenvectors is None:
        raise ValueError("spectrum result carries no eigenvectors")
    D = model.derivative(result.bias, name, result.parity)
    V = result.eigenvectors
    return np.real(np.einsum("ij,ij->j", V.conj(), D.matmat(V)))


def finite_difference_diagonal(
    model: QuantizedModel,
    bias: BiasPoint | Mapping[str, float] | None,
    name: str,
    k: int,
    step: float = 1e-6,
    parity=0,
    form: str = "direct",
    **opts,
) -> np.ndarray:
    """Central differences (E_n(λ+h) − E_n(λ−h))/2h of the lowest k levels (natural units).

    ``form="direct"`` subtracts the two eigenvalues, so its rounding error is
    about eps·‖H‖/h. ``form="overlap"`` evaluates the same difference through
    the exact identity E₊ − E₋ = ⟨ψ₊|H₊ − H₋|ψ₋⟩/⟨ψ₊|ψ₋⟩, which avoids the
    cancellation between large absolute energies.
    """
    bias = _as_bias(model, bias)
    lam = bias.as_dict()[name]
    b_hi, b_lo = bias.updated({name: lam + step}), bias.updated({name: lam - step})
    if form == "direct":
        hi = solve(model, b_hi, parity, k, vectors=False, **opts)
        lo = solve(model, b_lo, parity, k, vectors=False, **opts)
        return (hi.eigenvalues - lo.eigenvalues) / (2 * step)
    if form != "overlap":
        raise ValueError(f"unknown form '{form}'")
    hi = solve(model, b_hi, parity, k, **opts)
    lo = solve(model, b_lo, parity, k, **opts)
    H_hi, H_lo = model.hamiltonian(b_hi, parity), model.hamiltonian(b_lo, parity)
    Vp, Vm = hi.eigenvectors, lo.eigenvectors
    dH = H_hi.matmat(Vm) - H_lo.matmat(Vm)
    num = np.einsum("ij,ij->j", Vp.conj(), dH)
    den = np.einsum("ij,ij->j", Vp.conj(), Vm)
    return np.real(num / den) / (2 * step)


# ---------------------------------------------------------------- two-level fits


def _pauli(B: np.ndarray) -> np.ndarray:
    """(b0, bx, by, bz) with B = b0·1 + b·σ."""
    return np.array([
        0.5 * (B[0, 0] + B[1, 1]).real,
        B[0, 1].real,
        -B[0, 1].imag,
        0.5 * (B[0, 0] - B[1, 1]).real,
    ])


def numerical_two_level(
    model: QuantizedModel,
    bias: BiasPoint | Mapping[str, float] | None = None,
    axes: Sequence[str] = JPSQ_AXES,
    null: Mapping[str, float] | None = None,
    parity=0,
    min_margin: float = 0.05,
    **opts,
) -> TwoLevelModel:
    """Effective two-level model about the Aharonov–Casher null.

    ``axes`` name the (x, y, z) control biases. The null point sets the y
    (charge) axis to 0.5 and the x, z axes to 0 unless ``null`` says
    otherwise. The doublet there is rotated to the persistent-current basis
    (eigenbasis of the z dipole block, |+z⟩ first), with the residual phase
    fixed so the y block is a positive multiple of σ^y. Dipoles are half the
    eigenvalue spread of each ∂H/∂λ block; Zeeman coefficients are the Pauli
    components of H at ``bias`` projected on the doublet. Refuses when the
    gap to the next level is below ``min_margin`` (GHz) or below ten times
    the doublet splitting.
    """
    ax, ay, az = axes
    base = _as_bias(model, None)
    null_vals = {ax: 0.0, ay: 0.5, az: 0.0}
    null_vals.update(null or {})
    b0 = base.updated(null_vals)
    r = solve(model, b0, parity, 3, **opts)
    split = r.splitting(0, 1)
    margin = r.splitting(1, 2)
    if margin < min_margin or margin < 10 * split:
        raise TwoLevelError(f"doublet not isolated: splitting {split:.3g} GHz, margin to next level {margin:.3g} GHz")
    V = r.eigenvectors[:, :2]
    blocks = {name: dipole_matrix(model, b0, name, V, parity) for name in (ax, ay, az)}
    # persistent-current basis: |+z⟩ has μ_z = −∂H/∂Φ^z > 0
    wz, Uz = np.linalg.eigh(blocks[az])
    U = Uz
    By = U.conj().T @ blocks[ay] @ U
    off = By[0, 1]
    if abs(off) > 1e-14:
        # choose the |−z⟩ phase so ⟨+z|B_y|−z⟩ = −i|b_y| (B_y = |b_y|σ^y)
        U = U @ np.diag([1.0, (-1j * abs(off) / off).conjugate()])
    rot = {k: U.conj().T @ B @ U for k, B in blocks.items()}
    dip_nat = {k: numerical_range_halfwidth(B) for k, B in blocks.items()}
    dipoles = tuple(float(to_physical(model, k, dip_nat[k])) for k in (ax, ay, az))
    b = _as_bias(model, bias) if bias is not None else b0
    Heff = U.conj().T @ block(model.hamiltonian(b, parity), V) @ U
    pc = _pauli(Heff)
    at_zero = solve(model, b0.updated({ay: 0.0}), parity, 2, vectors=False, **opts)
    return TwoLevelModel(
        (float(pc[1]), float(pc[2]), float(pc[3])),
        dipoles,
        at_zero.splitting(0, 1),
        [],
        {
            "margin_GHz": margin,
            "null_splitting_GHz": split,
            "axes": list(axes),
            "blocks_natural": {k: [_pauli(B)[1:].tolist()] for k, B in rot.items()},
            "dipoles_natural": dip_nat,
            "dims": list(r.dims),
        },
    )


def dipole_set(model: QuantizedModel, axes: Sequence[str] = JPSQ_AXES, parity=0, **opts) -> DipoleSet:
    tl = numerical_two_level(model, axes=axes, parity=parity, **opts)
    return DipoleSet(
        dict(zip(axes, tl.dipoles)),
        {a: physical_unit(model, a) for a in axes},
        "hellmann-feynman",
        dict(tl.extras["dipoles_natural"]),
    )


# ---------------------------------------------------------------- flux qubit and xx coupler


@dataclass
class FluxQubitCurves:
    phi_x: np.ndarray  # Φ0
    delta_E: np.ndarray  # ΔE^x = (E1 − E0)/2, GHz
    I_x: np.ndarray  # I_q^x = dΔE^x/dΦ^x, nA (Hellmann–Feynman)
    E_bar: np.ndarray  # Ē^x = (E1 + E0)/2, GHz
    dE_bar: np.ndarray  # dĒ/dΦ^x, GHz/Φ0

    def L_inv(self) -> np.ndarray:
        """d²Ē/dΦ² on the grid (GHz/Φ0²), by differentiating the Hellmann–Feynman slope."""
        return np.gradient(self.dE_bar, self.phi_x)


def flux_qubit_Ix(
    model: QuantizedModel,
    phi_x: Sequence[float],
    name: str = "PhiX",
    base: Mapping[str, float] | None = None,
    parity=0,
    **opts,
) -> FluxQubitCurves:
    """ΔE^x(Φ^x) and I_q^x (eq:Ip) over a grid, at the bias in ``base`` (default: model defaults)."""
    phi_x = np.asarray(list(phi_x), dtype=float)
    b = _as_bias(model, base)
    dE, Ix, Eb, dEb = [], [], [], []
    for x in phi_x:
        bx = b.updated({name: float(x)})
        r = solve(model, bx, parity, 2, **opts)
        d = hellmann_feynman_diagonal(model, r, name)
        dE.append(0.5 * r.splitting(0, 1))
        Ix.append(0.5 * (d[1] - d[0]))
        Eb.append(0.5 * (r.eigenvalues[0] + r.eigenvalues[1]))
        dEb.append(0.5 * (d[0] + d[1]))
    return FluxQubitCurves(phi_x, np.array(dE), np.array(Ix) * units.NA_PER_GHZ_PER_PHI0, np.array(Eb), np.array(dEb))


def jxx_semiclassical(I_A: float, I_B: float, M: float, L_C_eff: float, L_A: float = math.inf, L_B: float = math.inf) -> float:
    """eq:Jxx in GHz; currents in nA, inductances in pH (L_A, L_B may be ±inf)."""
    if L_C_eff == 0:
        raise ValueError("L_C_eff must be nonzero")
    inv_sum = (0.0 if math.isinf(L_A) else 1 / L_A) + (0.0 if math.isinf(L_B) else 1 / L_B)
    den = 1 + M**2 / L_C_eff * inv_sum
    if den == 0:
        raise ValueError("eq:Jxx denominator vanishes")
    J = (I_A * 1e-9) * (I_B * 1e-9) * (M**2 / L_C_eff) * 1e-12 / den  # joules
    return J / units.H_PLANCK / 1e9


def inductance_from_curvature(L_inv_ghz_per_phi0sq: float) -> float:
    """Convert d²Ē/dΦ² (GHz/Φ0²) to an inductance in pH (∞ when the curvature vanishes)."""
    x = L_inv_ghz_per_phi0sq * units.H_PLANCK * 1e9 / units.PHI0**2  # 1/H
    return math.inf if x == 0 else 1e12 / x


# ---------------------------------------------------------------- coherence


@dataclass(frozen=True)
class NoiseModel:
    """Noise amplitudes in natural physical units.

    ``S_flux``/``S_charge`` are the PSD amplitudes √S at the qubit frequency
    (Φ0/√Hz and e/√Hz), ``A_flux``/``A_charge`` the 1/f amplitudes (Φ0, e).
    """

    S_flux: float | None = None
    S_charge: float | None = None
    A_flux: float | None = None
    A_charge: float | None = None
    frequency_GHz: float = 5.0
    temperature_mK: float | None = None

    def __post_init__(self):
        for k in ("S_flux", "S_charge", "A_flux", "A_charge"):
            v = getattr(self, k)
            if v is not None and v < 0:
                raise ValueError(f"{k} must be nonnegative")

    def psd(self, channel: str) -> float:
        """Two-sided-convention PSD in SI²/Hz (Wb²/Hz or C²/Hz)."""
        if channel == "flux":
            if self.S_flux is None:
                raise ValueError("missing flux PSD")
            return (self.S_flux * units.PHI0) ** 2
        if self.S_charge is None:
            raise ValueError("missing charge PSD")
        return (self.S_charge * units.E_CHARGE) ** 2

    def amplitude(self, channel: str) -> float:
        a = self.A_flux if channel == "flux" else self.A_charge
        if a is None:
            raise ValueError(f"missing 1/f amplitude for the {channel} channel")
        return a * (units.PHI0 if channel == "flux" else units.E_CHARGE)


# Table I PSDs at h × 5 GHz
TABLE_I_NOISE = NoiseModel(S_flux=4.3e-11, S_charge=1.1e-8, frequency_GHz=5.0)
# §IV PSDs at ΔE_L/h = 2.1 GHz, T = 20 mK
SECTION_IV_NOISE = NoiseModel(S_flux=6.4e-11, S_charge=7.1e-9, frequency_GHz=2.1, temperature_mK=20.0)

CHANNELS = {"x": "flux", "y": "charge", "z": "flux"}


def _dipole_si(value: float, channel: str) -> float:
    return value * 1e-9 if channel == "flux" else value * 1e-6


def t1_rate(matrix_element_si: float, psd_si: float) -> float:
    """1/T1 = (2/ħ²)|M|²S (convention pinned on Table I Case A, flux channel)."""
    return 2 / units.HBAR**2 * matrix_element_si**2 * psd_si


def gaussian_dephasing(dipole_si: float, amplitude_si: float) -> float:
    """Γ = √(ln 2)·A·|∂ω01/∂λ| with ∂ω01/∂λ = 2μ/ħ, in rad/s."""
    return SQRT_LN2 * amplitude_si * 2 * abs(dipole_si) / units.HBAR


@dataclass
class CoherenceMetrics:
    gamma: dict  # channel axis → Γ (rad/s); NaN where the amplitude is unknown
    t1: dict  # channel axis → T1 (s)
    t1_combined: float  # s, parallel sum over axes perpendicular to the applied field
    field_direction: str
    conventions: dict

    def as_dict(self) -> dict:
        return asdict(self)


def coherence_metrics(dipoles: Sequence[float], noise: NoiseModel, field_direction: str = "z") -> CoherenceMetrics:
    """Per-axis Γ and T1 from (I^x nA, V^y µV, I^z nA); combined T1 over axes ⟂ the field."""
    gamma, t1 = {}, {}
    for axis, d in zip("xyz", dipoles):
        ch = CHANNELS[axis]
        mu = _dipole_si(d, ch)
        try:
            gamma[axis] = gaussian_dephasing(mu, noise.amplitude(ch))
        except ValueError:
            gamma[axis] = math.nan
        try:
            rate = t1_rate(mu, noise.psd(ch))
        except ValueError:
            rate = math.nan
        t1[axis] = math.inf if rate == 0 else 1 / rate
    perp = [a for a in "xyz" if a != field_direction]
    total = sum(1 / t1[a] for a in perp)
    return CoherenceMetrics(
        gamma,
        t1,
        math.inf if total == 0 else 1 / total,
        field_direction,
        {
            "T1": "1/T1 = (2/hbar^2)|M|^2 S(omega01)",
            "Gamma": "sqrt(ln 2) * A * |d omega01/d lambda|, d omega01/d lambda = 2 mu/hbar",
        },
    )


def calibrate_amplitudes(dipoles: Sequence[float], gamma_targets: Sequence[float]) -> dict:
    """A_Φ (Φ0) from the x channel and A_Q (e) from the y channel so Γ matches ``gamma_targets`` (rad/s)."""
    ix, vy, _ = dipoles
    gx, gy, _ = gamma_targets
    A_flux = gx * units.HBAR / (SQRT_LN2 * 2 * ix * 1e-9) / units.PHI0
    A_charge = gy * units.HBAR / (SQRT_LN2 * 2 * vy * 1e-6) / units.E_CHARGE
    return {"A_flux": A_flux, "A_charge": A_charge}


def boltzmann_factor(energy_GHz: float, temperature_mK: float) -> float:
    """exp(−ΔE/k_BT): absorption/emission ratio (detailed balance)."""
    return math.exp(-energy_GHz * 1e9 * units.H_PLANCK / (units.K_B * temperature_mK * 1e-3))


# ---------------------------------------------------------------- aggregate dipoles


@dataclass
class AggregateDipoles:
    V_bar: float  # µV
    I_bar: float  # nA
    nodes: dict  # node → D_ij[V_n] (µV)
    inductors: dict  # inductor → D_ij[I_l] (nA)

    def as_dict(self) -> dict:
        return asdict(self)


def aggregate_dipoles(
    model: QuantizedModel,
    vectors: np.ndarray,
    bias: BiasPoint | Mapping[str, float] | None = None,
    parity=0,
) -> AggregateDipoles:
    """eq:dipoleop / eq:Ldipoles over the two states in ``vectors`` (columns i, j)."""
    bias = _as_bias(model, bias)
    V = vectors[:, :2]
    nodes = {n: numerical_range_halfwidth(block(op, V)) * units.UV_PER_GHZ_PER_2E for n, op in model.node_voltage_operators(bias, parity).items()}
    inds = {n: numerical_range_halfwidth(block(op, V)) * units.NA_PER_GHZ_PER_PHI0 for n, op in model.inductor_current_operators(bias).items()}
    return AggregateDipoles(
        math.sqrt(sum(v**2 for v in nodes.values())),
        math.sqrt(sum(v**2 for v in inds.values())),
        nodes,
        inds,
    )
