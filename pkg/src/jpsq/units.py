"""Physical constants and the unit conventions used throughout the package.

Internal units: energies in GHz (h = 1), capacitance in fF, inductance in pH,
flux in Φ0, charge in units of 2e. Dimensionless phase φ = 2πΦ/Φ0 and
dimensionless Cooper-pair number n = Q/2e are conjugate, [φ, n] = i.
"""

from __future__ import annotations

import numpy as np
from scipy import constants as sc

E_CHARGE = sc.e
H_PLANCK = sc.h
HBAR = sc.hbar
K_B = sc.k
PHI0 = sc.h / (2 * sc.e)  # Wb
R_Q = sc.h / (4 * sc.e**2)  # Ω, superconducting resistance quantum

GHZ = 1e9
FF = 1e-15
PH = 1e-12

# ½ nᵀ E_C n with E_C = CHARGE_SCALE · C⁻¹[1/fF] gives GHz for n in units of 2e.
CHARGE_SCALE = (2 * E_CHARGE) ** 2 / (H_PLANCK * FF) / GHZ
# ½ φᵀ E_L φ with E_L = FLUX_SCALE · L⁻¹[1/pH] gives GHz for dimensionless φ.
FLUX_SCALE = (PHI0 / (2 * np.pi)) ** 2 / (H_PLANCK * PH) / GHZ
# e²/(2h·1 fF) in GHz, so E_C = EC_PER_FF / C[fF].
EC_PER_FF = E_CHARGE**2 / (2 * H_PLANCK * FF) / GHZ

# Derivative conversions: an energy slope of 1 GHz per Φ0 is a current of
# h·1e9/Φ0 = 2e·1e9 amperes; 1 GHz per 2e is a voltage of h·1e9/2e = Φ0·1e9 volts.
NA_PER_GHZ_PER_PHI0 = H_PLANCK * GHZ / PHI0 * 1e9
UV_PER_GHZ_PER_2E = H_PLANCK * GHZ / (2 * E_CHARGE) * 1e6


def ej_to_inductance_ph(e_j_ghz: float) -> float:
    """Josephson inductance L_J = (Φ0/2π)²/E_J in pH for E_J in GHz."""
    return FLUX_SCALE / e_j_ghz


def inductance_to_ej_ghz(l_ph: float) -> float:
    return FLUX_SCALE / l_ph


def charging_energy_ghz(c_ff: float) -> float:
    """E_C = e²/2C in GHz."""
    return EC_PER_FF / c_ff


def critical_current_na(e_j_ghz: float) -> float:
    """I_c = 2π E_J/Φ0 in nA."""
    return 2 * np.pi * e_j_ghz * NA_PER_GHZ_PER_PHI0


def current_from_slope(dE_dphi0_ghz: float) -> float:
    """Convert dE/dΦ (GHz per Φ0) to nA."""
    return dE_dphi0_ghz * NA_PER_GHZ_PER_PHI0


def voltage_from_slope(dE_dq_ghz: float) -> float:
    """Convert dE/dQ (GHz per 2e) to µV."""
    return dE_dq_ghz * UV_PER_GHZ_PER_2E
