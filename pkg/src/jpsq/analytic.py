"""Closed-form JPSQ model of §III: potential, instanton chain, two-level Hamiltonian and dipoles.

Expressions follow the paper as printed, including first-order-in-δφ^x
truncations. All SI conversions go through :mod:`jpsq.units`.

Conventions. Fluxes in the parameter set are in Φ0 and converted to phases
φ = 2πΦ/Φ0. The island offset Q_b is in units of 2e, so q_b = 2π·Q_b.

Sign note. Direct substitution in the printed eq:JPSQpot places its minima
at (φ_I, φ_l) = (±φ_Im, ∓φ_lm), while eq:minima and eq:coords pair the
signs as (±, ±). The path coordinates below therefore use φ_l' = −φ_l
when evaluating the printed potential along a tunneling path, which
reproduces the paper's geometry exactly.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from typing import Sequence

import numpy as np
from scipy.integrate import quad

from . import units

K6_FLAG = 0.5
S0_FLAG = 3.0


@dataclass(frozen=True)
class AnalyticJpsqParams:
    """Circuit and bias parameters of Fig. 3(b).

    Give either ``beta`` or ``E_J``. C_J defaults to C_Ja·E_J/E_Ja (same
    junction technology); it enters only the plasma-mode capacitance.
    """

    E_Ja: float  # GHz
    C_Ja: float  # fF
    C_I: float  # fF
    beta: float | None = 15.0
    E_J: float | None = None  # GHz
    phi_delta: float = 0.3  # Φ0
    dphi_z: float = 0.0  # Φ0
    dphi_x: float = 0.0  # Φ0
    Q_b: float = 0.5  # 2e
    C_J: float | None = None  # fF

    def __post_init__(self):
        if self.E_Ja <= 0 or self.C_Ja <= 0:
            raise ValueError("E_Ja and C_Ja must be positive")
        if self.C_I < 0:
            raise ValueError("C_I must be nonnegative")
        if not abs(self.phi_delta) < 0.5:
            raise ValueError("|phi_delta| must be below 0.5 Φ0")
        if (self.beta is None) == (self.E_J is None):
            raise ValueError("give exactly one of beta and E_J")

    @property
    def E_tilde(self) -> float:
        """Ẽ_Ja = 2E_Ja cos(φ_Δ/2), GHz."""
        return 2 * self.E_Ja * math.cos(math.pi * self.phi_delta)

    @property
    def beta_value(self) -> float:
        return self.beta if self.beta is not None else self.E_J / self.E_tilde

    @property
    def E_J_value(self) -> float:
        return self.E_J if self.E_J is not None else self.beta * self.E_tilde

    @property
    def C_J_value(self) -> float:
        return self.C_J if self.C_J is not None else self.C_Ja * self.E_J_value / self.E_Ja

    def with_(self, **kw) -> "AnalyticJpsqParams":
        d = asdict(self)
        if "E_J" in kw and kw["E_J"] is not None:
            d["beta"] = None
        if "beta" in kw and kw["beta"] is not None:
            d["E_J"] = None
        d.update(kw)
        return AnalyticJpsqParams(**d)


# ---------------------------------------------------------------- potential


def potential(p: AnalyticJpsqParams, phi_I, phi_l, phi_p=0.0):
    """eq:JPSQpot, in GHz. Accepts arrays (and complex arguments for complex-step derivatives)."""
    pD = 2 * np.pi * p.phi_delta
    dz = 2 * np.pi * p.dphi_z
    dx = 2 * np.pi * p.dphi_x
    b = p.beta_value
    u = (
        b * (1 - np.cos(phi_l / 2) * np.cos(phi_p))
        - np.cos(dx / 2) * np.sin(phi_I - phi_p) * np.sin((dz - phi_l) / 2)
        + (1 / np.cos(pD / 2)) * (1 - np.sin(dx / 2) * np.sin(pD / 2) * np.cos(phi_I - phi_p) * np.cos((dz - phi_l) / 2))
    )
    return 2 * p.E_tilde * u


def potential_gradient(p: AnalyticJpsqParams, x: Sequence[float], h: float = 1e-20) -> np.ndarray:
    """∂U/∂(φ_I, φ_l, φ_p) by complex-step differentiation (exact to rounding)."""
    x = np.asarray(x, dtype=float)
    g = np.zeros(3)
    for i in range(3):
        xc = x.astype(complex)
        xc[i] += 1j * h
        g[i] = potential(p, *xc).imag / h
    return g


def potential_hessian(p: AnalyticJpsqParams, x: Sequence[float], h: float = 1e-5) -> np.ndarray:
    """Hessian from central differences of the complex-step gradient."""
    x = np.asarray(x, dtype=float)
    H = np.zeros((3, 3))
    for j in range(3):
        e = np.zeros(3)
        e[j] = h
        H[:, j] = (potential_gradient(p, x + e) - potential_gradient(p, x - e)) / (2 * h)
    return 0.5 * (H + H.T)


def minima(p: AnalyticJpsqParams, paired: str = "printed-potential") -> list[tuple[float, float, float]]:
    """eq:minima positions (φ_I, φ_l, φ_p).

    ``paired="paper"`` returns the sign pairing of eq:minima, (±φ_Im, ±φ_lm);
    the default returns the pairing at which the printed eq:JPSQpot is
    stationary, (±φ_Im, ∓φ_lm).
    """
    th = math.atan(1 / p.beta_value)
    pD = 2 * math.pi * p.phi_delta
    dx = 2 * math.pi * p.dphi_x
    phi_Im = math.pi / 2 - dx * (1 / math.tan(th)) / 2 * math.tan(pD / 2)
    phi_lm = 2 * th
    s = 1.0 if paired == "paper" else -1.0
    return [(-phi_Im, -s * phi_lm, 0.0), (phi_Im, s * phi_lm, 0.0)]


# ---------------------------------------------------------------- persistent currents


def persistent_current(p: AnalyticJpsqParams) -> float:
    """eq:IpJPSQ: I^z = Ĩ_Ca cos θ, nA."""
    th = math.atan(1 / p.beta_value)
    return units.critical_current_na(p.E_tilde) * math.cos(th)


def flux_qubit_persistent_current(beta: float, I_Ca: float) -> tuple[float, bool]:
    """eq:Ipflux: Ĩ_Ca sin 2γ with 2cos γ = β. Returns (current, has_double_well);
    outside 0.5 < β ≤ 1 the current is 0 and the flag is False (β = 1 is the
    spec's worked example, so the upper end is closed)."""
    if not 0.5 < beta <= 1.0:
        return 0.0, False
    gamma = math.acos(beta / 2)
    return I_Ca * math.sin(2 * gamma), True


# ---------------------------------------------------------------- instanton chain


@dataclass
class AnalyticIntermediates:
    params: AnalyticJpsqParams
    E_tilde: float  # GHz
    I_Ca: float  # nA
    beta: float
    theta: float
    r_C: float
    y_Ja: float
    Z_Ja: float  # Ω
    omega_J: float  # rad/s
    phi_Im: float
    phi_lm: float
    E_b: float  # J
    dE_b: float  # J
    N_plus: float
    N_minus: float
    phi_m: float
    dphi_m: float
    L_inv_m: float  # 1/H
    dL_inv_m: float
    L_inv_tilde: float
    C_inv: float  # 1/F
    dC_inv: float
    C_I_tot: float  # F
    C_l_tot: float
    C_p_tot: float
    k6: float
    k6_T: tuple[float, float]  # (L, R)
    Omega: float  # rad/s
    Omega_T: tuple[float, float]
    Z_T: tuple[float, float]
    S0: float
    ds: float
    ds_coeff: float  # δs/δφ^x
    q_b: float
    Omega_ge: float  # rad/s
    flags: list[str] = field(default_factory=list)

    def path(self, T: str) -> dict:
        """Per-path quantities for T ∈ {L, R} (L takes the upper signs)."""
        s = 1 if T == "L" else -1
        i = 0 if T == "L" else 1
        phi_Tm = self.phi_m + s * self.dphi_m
        return {
            "E_bT": self.E_b + s * self.dE_b,
            "phi_Tm": phi_Tm,
            "Phi_Tm": phi_Tm * units.PHI0 / (2 * math.pi),
            "L_inv_Tm": self.L_inv_m + s * self.dL_inv_m,
            "C_inv_T": self.C_inv + s * self.dC_inv,
            "k6T": self.k6_T[i],
            "Omega_T": self.Omega_T[i],
            "Z_T": self.Z_T[i],
        }

    def as_dict(self) -> dict:
        d = {k: v for k, v in asdict(self).items() if k != "params"}
        d["params"] = asdict(self.params)
        d["Omega_ge_over_2pi_GHz"] = self.Omega_ge / (2 * math.pi) / 1e9
        d["units"] = {"E_b": "J", "L_inv": "1/H", "C_inv": "1/F", "Omega": "rad/s", "I_Ca": "nA", "E_tilde": "GHz", "Z": "ohm"}
        return d


def _chain_terms(p: AnalyticJpsqParams, dx: float):
    """Every eq:ETb…eq:Cinv quantity at phase offset δφ^x = dx (SI)."""
    h, hbar = units.H_PLANCK, units.HBAR
    pD = 2 * math.pi * p.phi_delta
    t = math.tan(pD / 2)
    c = math.cos(pD / 2)
    Et = p.E_tilde * 1e9 * h
    beta = p.beta_value
    th = math.atan(1 / beta)
    Lt_inv = Et * (2 * math.pi / units.PHI0) ** 2
    Eb = 2 * Et * math.tan(th / 2)
    dEb = dx * Eb / 2 * (1 / math.tan(th) + 1 / math.sin(th)) * t
    Np = 1 + (4 * th / math.pi) ** 2
    Nm = 1 - (4 * th / math.pi) ** 2
    phi_m = math.pi / 2
    dphi_m = -dx * (1 / math.tan(th)) / 2 * t * Nm / Np
    Lm = 2 * Lt_inv * math.sin(th) * (1 + 4 * th**2 / (math.pi**2 * math.sin(th) ** 2))
    dLm = -dx * t * 4 * th * Lt_inv / (math.pi * math.sin(th)) * (1 + 4 * th / (math.pi**2 * math.tan(th)) * (1 - (2 - 8 * math.sin(th) ** 2) / Np))
    C = p.C_Ja * 1e-15
    CI = p.C_I * 1e-15
    CJ = p.C_J_value * 1e-15
    # eq:Cinv with the 1/C_I prefactor distributed so that C_I = 0 (Case C) stays finite
    Cinv = (1 / Np**2) / (CI + 4 * C / (1 + math.tan(th) / c)) + (16 * th**2 / math.pi**2) / (C * Np**2 * (1 + c / math.tan(th)))
    dCinv = dx * t / C * ((16 * th**2 / math.pi**2) * 2 / (math.pi * Np**2) / (math.tan(th) + c))
    series = lambda a, b: a * b / (a + b) if a + b > 0 else 0.0
    CI_tot = CI + 2 * series(2 * C, CJ)
    Cl_tot = C + CJ / 2
    Cp_tot = 2 * CJ + series(CI, 4 * C)
    return dict(
        Et=Et, th=th, beta=beta, Lt_inv=Lt_inv, Eb=Eb, dEb=dEb, Np=Np, Nm=Nm, phi_m=phi_m, dphi_m=dphi_m,
        Lm=Lm, dLm=dLm, Cinv=Cinv, dCinv=dCinv, CI_tot=CI_tot, Cl_tot=Cl_tot, Cp_tot=Cp_tot, t=t, c=c,
    )


def _k6T(q: dict, s: int) -> float:
    """eq:k6 for path sign s (+1: L, −1: R)."""
    Phi_Tm = (q["phi_m"] + s * q["dphi_m"]) * units.PHI0 / (2 * math.pi)
    return Phi_Tm**2 * (q["Lm"] + s * q["dLm"]) / (8 * (q["Eb"] + s * q["dEb"])) - 1


def instanton_chain(p: AnalyticJpsqParams) -> AnalyticIntermediates:
    """Evaluate eq:ETb → eq:tunnel in declared order."""
    hbar = units.HBAR
    dx = 2 * math.pi * p.dphi_x
    q = _chain_terms(p, dx)
    q1 = _chain_terms(p, 1.0)  # first-order coefficients (all δ-quantities are linear in δφ^x)
    th = q["th"]
    k6T = (_k6T(q, 1), _k6T(q, -1))
    k6 = 0.5 * (k6T[0] + k6T[1])
    Omega = math.sqrt(q["Lm"] * q["Cinv"])
    Omega_T = tuple(math.sqrt((q["Lm"] + s * q["dLm"]) * (q["Cinv"] + s * q["dCinv"])) for s in (1, -1))
    Z_T = tuple(math.sqrt((q["Cinv"] + s * q["dCinv"]) / (q["Lm"] + s * q["dLm"])) for s in (1, -1))
    S0 = 16 / 3 * q["Eb"] / (hbar * Omega) * (1 + 3 / 5 * k6)
    ds_coeff = q1["dEb"] / q1["Eb"] - 0.5 * (q1["dLm"] / q1["Lm"] + q1["dCinv"] / q1["Cinv"])
    ds = ds_coeff * dx
    Omega_ge = Omega * math.sqrt(12 * S0 / math.pi * (1 + 4 / 5 * k6)) * math.exp(-S0)
    C = p.C_Ja * 1e-15
    L_tilde = 1 / q["Lt_inv"]
    Z_Ja = math.sqrt(L_tilde / (2 * C))
    L_Ja = (units.PHI0 / (2 * math.pi)) ** 2 / (p.E_Ja * 1e9 * units.H_PLANCK)
    pD = 2 * math.pi * p.phi_delta
    mins = minima(p, "paper")
    flags = []
    if abs(k6) > K6_FLAG or any(abs(k) > K6_FLAG for k in k6T):
        flags.append(f"|k6| > {K6_FLAG}: sextic correction not small")
    if S0 < S0_FLAG:
        flags.append(f"S0 = {S0:.3g} < {S0_FLAG}: dilute-instanton approximation degraded")
    return AnalyticIntermediates(
        params=p,
        E_tilde=p.E_tilde,
        I_Ca=units.critical_current_na(p.E_tilde),
        beta=q["beta"],
        theta=th,
        r_C=p.C_I / (4 * p.C_Ja),
        y_Ja=units.R_Q / Z_Ja,
        Z_Ja=Z_Ja,
        omega_J=1 / math.sqrt(L_Ja * C),
        phi_Im=mins[1][0],
        phi_lm=mins[1][1],
        E_b=q["Eb"],
        dE_b=q["dEb"],
        N_plus=q["Np"],
        N_minus=q["Nm"],
        phi_m=q["phi_m"],
        dphi_m=q["dphi_m"],
        L_inv_m=q["Lm"],
        dL_inv_m=q["dLm"],
        L_inv_tilde=q["Lt_inv"],
        C_inv=q["Cinv"],
        dC_inv=q["dCinv"],
        C_I_tot=q["CI_tot"],
        C_l_tot=q["Cl_tot"],
        C_p_tot=q["Cp_tot"],
        k6=k6,
        k6_T=k6T,
        Omega=Omega,
        Omega_T=Omega_T,
        Z_T=Z_T,
        S0=S0,
        ds=ds,
        ds_coeff=ds_coeff,
        q_b=2 * math.pi * p.Q_b,
        Omega_ge=Omega_ge,
        flags=flags,
    )


def ds_finite_difference(p: AnalyticJpsqParams, step: float = 1e-4) -> float:
    """δs/δφ^x from central differences of ln E_bT − ½ ln L⁻¹_Tm − ½ ln C⁻¹_T (transcription cross-check)."""

    def f(dx):
        q = _chain_terms(p, dx)
        return math.log(q["Eb"] + q["dEb"]) - 0.5 * (math.log(q["Lm"] + q["dLm"]) + math.log(q["Cinv"] + q["dCinv"]))

    return (f(step) - f(-step)) / (2 * step)


# ---------------------------------------------------------------- large-β limits


def large_beta_limits(p: AnalyticJpsqParams) -> dict:
    """eq:Sparam as printed, plus the leading-order S_0 implied by eq:Sinfo (``S0_consistent``).

    The printed S_0 limit scales as √β·tan(φ_Δ/2); taking β → ∞ in
    eq:ETb, eq:Linv, eq:Cinv and eq:k6 gives instead
    S_0 → y_Ja·√((1 + r_C)/β)·(3π² + 44)/(30√(π² + 4)).
    """
    ic = instanton_chain(p.with_(dphi_x=0.0))
    pD = 2 * math.pi * p.phi_delta
    b, r, y = ic.beta, ic.r_C, ic.y_Ja
    Omega = ic.omega_J * math.sqrt(math.cos(pD / 2) / (b * (1 + r)) * (math.pi**2 + 4) / math.pi**2)
    S0 = y * math.tan(pD / 2) * math.sqrt(b * (r + 1)) * (3 * math.pi**2 + 44) / (15 * math.sqrt(math.pi**2 + 4))
    ds_coeff = b * math.tan(pD / 2) * (1 - 1 / math.pi + 2 * math.pi / (math.pi**2 + 4))
    S0_consistent = y * math.sqrt((1 + r) / b) * (3 * math.pi**2 + 44) / (30 * math.sqrt(math.pi**2 + 4))
    return {"Omega": Omega, "S0": S0, "ds_coeff": ds_coeff, "S0_consistent": S0_consistent}


# ---------------------------------------------------------------- instanton trajectory


def instanton_trajectory(ic: AnalyticIntermediates, path: str, tau, tau0: float = 0.0) -> np.ndarray:
    """eq:instanton: φ_T^cl(τ) (dimensionless phase) on path L or R; τ in seconds."""
    q = ic.path(path)
    z = q["Omega_T"] * (np.asarray(tau, dtype=float) - tau0) / 2
    return q["phi_Tm"] * np.tanh(z) / np.sqrt(1 + q["k6T"] / np.cosh(z) ** 2)


def instanton_velocity(ic: AnalyticIntermediates, path: str, tau, tau0: float = 0.0) -> np.ndarray:
    """dφ_T^cl/dτ in closed form."""
    q = ic.path(path)
    k, Om = q["k6T"], q["Omega_T"]
    z = Om * (np.asarray(tau, dtype=float) - tau0) / 2
    sech2 = 1 / np.cosh(z) ** 2
    den = 1 + k * sech2
    # d/dz [tanh z · den^{-1/2}] = sech² z · den^{-1/2} + tanh z · k sech² z tanh z · den^{-3/2}
    dz = sech2 / np.sqrt(den) + k * sech2 * np.tanh(z) ** 2 / den**1.5
    return q["phi_Tm"] * dz * Om / 2


def sextic_potential(ic: AnalyticIntermediates, path: str, phi_T) -> np.ndarray:
    """eq:poly in joules."""
    q = ic.path(path)
    x2 = (np.asarray(phi_T, dtype=float) / q["phi_Tm"]) ** 2
    return q["E_bT"] * (1 - x2) ** 2 * (1 + q["k6T"] * x2)


def eom_residual(ic: AnalyticIntermediates, path: str, tau) -> np.ndarray:
    """Relative residual of eq:EOM, ((C_T/2)(dΦ/dτ)² − U_T)/E_bT, along the trajectory."""
    q = ic.path(path)
    C_T = 1 / q["C_inv_T"]
    dPhi = instanton_velocity(ic, path, tau) * units.PHI0 / (2 * math.pi)
    U = sextic_potential(ic, path, instanton_trajectory(ic, path, tau))
    return (C_T / 2 * dPhi**2 - U) / q["E_bT"]


def action_quadrature(ic: AnalyticIntermediates, path: str) -> float:
    """S_T0 = (C_T/ħ)∫(dΦ/dτ)² dτ by adaptive quadrature of the trajectory."""
    q = ic.path(path)
    C_T = 1 / q["C_inv_T"]
    scale = units.PHI0 / (2 * math.pi)
    Om = q["Omega_T"]
    f = lambda s: (instanton_velocity(ic, path, s / Om) * scale) ** 2 / Om
    val, _ = quad(f, -60, 60, epsabs=0, epsrel=1e-13, limit=400)
    return C_T / units.HBAR * val


def action_closed_form(ic: AnalyticIntermediates, path: str) -> float:
    """eq:action: (2/3)Φ_Tm²/(ħZ_T)·(1 − 2k_6T/5)."""
    q = ic.path(path)
    return 2 / 3 * q["Phi_Tm"] ** 2 / (units.HBAR * q["Z_T"]) * (1 - 2 / 5 * q["k6T"])


# ---------------------------------------------------------------- path potentials


def path_coordinates(ic: AnalyticIntermediates, path: str, phi_T) -> tuple[np.ndarray, np.ndarray]:
    """(φ_I, φ_l) of the printed potential along the linear path of eq:coords at δφ^x = 0.

    The path runs through both minima and the saddle of that path (φ_I = 0
    for L, π for R), with φ_T = ±π/2 at the minima. φ_l is mirrored (see the
    module note) so the printed potential is evaluated at its own minima.
    """
    phi_T = np.asarray(phi_T, dtype=float)
    slope = 4 * ic.theta / math.pi
    if path == "L":
        return phi_T, -slope * phi_T
    return math.pi - phi_T, -slope * phi_T


def path_potential(ic: AnalyticIntermediates, path: str, phi_T) -> np.ndarray:
    """Printed eq:JPSQpot along the path, relative to its minima, in joules."""
    p = ic.params
    phi_I, phi_l = path_coordinates(ic, path, phi_T)
    u = potential(p, phi_I, phi_l, 0.0)
    i0, l0 = path_coordinates(ic, path, ic.phi_m)
    u0 = potential(p, i0, l0, 0.0)
    return (u - u0) * 1e9 * units.H_PLANCK


# ---------------------------------------------------------------- tunneling and two-level model


def tunnel_splitting(ic: AnalyticIntermediates, Q_b: float | None = None) -> tuple[float, complex]:
    """(Ω_ge in rad/s, combined tunneling amplitude in rad/s).

    The amplitude is the coefficient multiplying τ/2 in eq:mat,
    Ω_ge·[cos(q_b/2) − i·sin(q_b/2)(S_0 − ½)δs]; it vanishes at q_b = π, δs = 0.
    """
    qb = ic.q_b if Q_b is None else 2 * math.pi * Q_b
    amp = ic.Omega_ge * complex(math.cos(qb / 2), -math.sin(qb / 2) * (ic.S0 - 0.5) * ic.ds)
    return ic.Omega_ge, amp


@dataclass
class TwoLevelModel:
    """H = E^x σ^x + E^y σ^y + E^z σ^z in GHz (eq:TLS signs folded into the coefficients), plus dipoles."""

    zeeman: tuple[float, float, float]  # (E^x, E^y, E^z), GHz, coefficients of σ^x, σ^y, σ^z in H
    dipoles: tuple[float, float, float]  # (I^x nA, V^y µV, I^z nA)
    splitting_GHz: float = math.nan  # Ω_ge/2π
    flags: list[str] = field(default_factory=list)
    extras: dict = field(default_factory=dict)

    def hamiltonian(self) -> np.ndarray:
        ex, ey, ez = self.zeeman
        return np.array([[ez, ex - 1j * ey], [ex + 1j * ey, -ez]])

    def as_dict(self) -> dict:
        return {
            "zeeman_GHz": {"x": self.zeeman[0], "y": self.zeeman[1], "z": self.zeeman[2]},
            "dipoles": {"I_x_nA": self.dipoles[0], "V_y_uV": self.dipoles[1], "I_z_nA": self.dipoles[2]},
            "splitting_GHz": self.splitting_GHz,
            "flags": list(self.flags),
            **self.extras,
        }


def two_level_model(p: AnalyticJpsqParams) -> TwoLevelModel:
    """eq:TLS coefficients at the given bias, and eq:dipoles at zero field."""
    ic = instanton_chain(p)
    h = units.H_PLANCK
    qb = ic.q_b
    hOm2 = units.HBAR * ic.Omega_ge / 2 / h / 1e9  # ħΩ_ge/2 in GHz
    E_z = -2 * math.pi * p.dphi_z * p.E_tilde * math.cos(ic.theta)
    E_y = hOm2 * math.cos(qb / 2)
    E_x = -hOm2 * math.sin(qb / 2) * (ic.S0 - 0.5) * ic.ds
    I_x = units.E_CHARGE * ic.Omega_ge * (ic.S0 - 0.5) * ic.ds_coeff * 1e9
    V_y = units.PHI0 * ic.Omega_ge / 4 * 1e6
    I_z = ic.I_Ca * math.cos(ic.theta)
    flags = list(ic.flags)
    if ic.beta < 3:
        flags.append("beta not >> 1: large-beta regime assumption weak")
    return TwoLevelModel(
        (E_x, E_y, E_z),
        (I_x, V_y, I_z),
        ic.Omega_ge / (2 * math.pi) / 1e9,
        flags,
        {"S0": ic.S0, "k6": ic.k6, "ds_coeff": ic.ds_coeff, "y_Ja": ic.y_Ja, "r_C": ic.r_C},
    )


def multipath_interference(amplitudes: Sequence[complex], island_charges: Sequence[float]) -> complex:
    """Σ_j A_j·exp(i·2π·Σ_{m<j} Q_m), island charges in units of 2e (one fewer than paths)."""
    amps = list(amplitudes)
    if len(amps) < 2:
        raise ValueError("need at least two paths")
    if len(island_charges) != len(amps) - 1:
        raise ValueError("need one island charge between each pair of successive paths")
    phases = np.concatenate([[0.0], np.cumsum(island_charges)]) * 2 * np.pi
    return complex(np.sum(np.asarray(amps, dtype=complex) * np.exp(1j * phases)))


def report(p: AnalyticJpsqParams) -> dict:
    """Labeled audit report of all intermediates and the two-level model."""
    ic = instanton_chain(p)
    tl = two_level_model(p)
    return {
        "intermediates": ic.as_dict(),
        "two_level": tl.as_dict(),
        "ds_coeff_finite_difference": ds_finite_difference(p),
        "large_beta": large_beta_limits(p),
    }


def report_text(rep: dict) -> str:
    lines = []
    for section in ("intermediates", "two_level", "large_beta"):
        lines.append(f"[{section}]")
        for k, v in rep[section].items():
            if isinstance(v, dict):
                v = json.dumps(v)
            lines.append(f"  {k} = {v}")
    lines.append(f"ds_coeff_finite_difference = {rep['ds_coeff_finite_difference']}")
    return "\n".join(lines)
