"""Built-in netlists with the caption parameters of Figs. 1, 2, 3(b), 6 and 8.

Flux conventions shared by the JPSQ circuits: the two DC SQUIDs carry
Φ_L = Φ_Δ + δΦ^x and Φ_R = Φ_Δ − δΦ^x, and the main loop is declared through
the first arm of each SQUID with flux ½ + δΦ^z + ½(Φ_L + Φ_R), i.e. the
main-loop flux measured through the SQUID centres is ½ + δΦ^z. The island
offset charge Q_b is in units of 2e (Q_b = 0.5 is the AC null).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from . import units
from .circuit import Branch, CircuitSpec, IslandSpec, LinearExpr, LoopSpec, Mutual

J = "josephson"


@dataclass(frozen=True)
class JpsqCase:
    """A Table I parameter column."""

    name: str
    E_Ja: float  # GHz
    C_Ja: float  # fF
    C_I: float  # fF
    beta: float = 15.0
    phi_delta: float = 0.3
    # Table I reference values: (I^x nA, V^y µV, I^z nA)
    analytic: tuple[float, float, float] = (math.nan,) * 3
    fig3b: tuple[float, float, float] = (math.nan,) * 3
    fig6: tuple[float, float, float] = (math.nan,) * 3
    gamma: tuple[float, float, float] = (math.nan,) * 3  # 10^6 rad/s
    t1: tuple[float, float, float] = (math.nan,) * 3  # µs
    y_J: float = math.nan
    r_C: float = math.nan


TABLE_I = {
    "A": JpsqCase("A", 29.8, 1.44, 60.0, analytic=(43, 2.6, 69), fig3b=(34, 2.2, 41), fig6=(36, 2.3, 40),
                  gamma=(1.2, 2.7, 1.3), t1=(540, 300, 430), y_J=5.1, r_C=10),
    "B": JpsqCase("B", 65.6, 2.64, 20.0, analytic=(93, 5.5, 150), fig3b=(75, 4.9, 96), fig6=(79, 5.1, 91),
                  gamma=(2.6, 6.0, 3.0), t1=(110, 62, 84), y_J=10, r_C=1.9),
    "C": JpsqCase("C", 174.0, 3.0, 0.0, analytic=(250, 15, 410), fig3b=(200, 12, 250), fig6=(230, 13, 240),
                  gamma=(7.4, 15, 7.7), t1=(14, 9.7, 13), y_J=18, r_C=0),
}

# Fig. 5 parameter sets: y_Ja = 25 → panels (a)-(d), y_Ja = 15 → (e)-(h)
FIG5_SETS = {25: (125.0, 5.0), 15: (74.6, 3.0)}


def loop_junction_energy(E_Ja: float, beta: float, phi_delta: float) -> float:
    """E_J = β·Ẽ_Ja with Ẽ_Ja = 2E_Ja cos(πΦ_Δ)."""
    return beta * 2 * E_Ja * math.cos(math.pi * phi_delta)


def _jpsq_loops(sqL: list[str], sqR: list[str], main: list[str], suffix: str = "") -> tuple[LoopSpec, ...]:
    pd, dx, dz = "PhiDelta", f"dPhiX{suffix}", f"dPhiZ{suffix}"
    return (
        LoopSpec(f"squidL{suffix}", tuple(sqL), LinearExpr.from_mapping({pd: 1.0, dx: 1.0})),
        LoopSpec(f"squidR{suffix}", tuple(sqR), LinearExpr.from_mapping({pd: 1.0, dx: -1.0})),
        LoopSpec(f"main{suffix}", tuple(main), LinearExpr.from_mapping({"const": 0.5, dz: 1.0, pd: 1.0})),
    )


def fig3b(E_Ja: float, C_Ja: float, C_I: float, beta: float = 15.0, phi_delta: float = 0.3,
          E_J: float | None = None, C_J: float | None = None, name: str = "fig3b") -> CircuitSpec:
    """Simplified JPSQ of Fig. 3(b): two loop junctions, two DC SQUIDs, one island.

    When not given, E_J = β·Ẽ_Ja and C_J = C_Ja·E_J/E_Ja (same junction
    technology, so capacitance scales with Josephson energy).
    """
    E_J = loop_junction_energy(E_Ja, beta, phi_delta) if E_J is None else E_J
    C_J = C_Ja * E_J / E_Ja if C_J is None else C_J
    br = (
        Branch("J1", J, ("g", "n1"), E_J=E_J, C=C_J),
        Branch("aL", J, ("n1", "I"), E_J=E_Ja, C=C_Ja),
        Branch("bL", J, ("n1", "I"), E_J=E_Ja, C=C_Ja),
        Branch("aR", J, ("I", "n2"), E_J=E_Ja, C=C_Ja),
        Branch("bR", J, ("I", "n2"), E_J=E_Ja, C=C_Ja),
        Branch("J2", J, ("n2", "g"), E_J=E_J, C=C_J),
        Branch("CI", "capacitor", ("I", "g"), C=C_I),
    )
    loops = _jpsq_loops(["aL", "bL"], ["aR", "bR"], ["J1", "aL", "aR", "J2"])
    return CircuitSpec(
        name=name,
        nodes=("g", "n1", "n2", "I"),
        ground="g",
        branches=br,
        loops=loops,
        islands=(IslandSpec("island", ("I",), "Qb"),),
        bias=(("PhiDelta", phi_delta), ("dPhiX", 0.0), ("dPhiZ", 0.0), ("Qb", 0.0)),
        description=f"Fig. 3(b) JPSQ: E_Ja={E_Ja} GHz, C_Ja={C_Ja} fF, C_I={C_I} fF, E_J={E_J:.6g} GHz, C_J={C_J:.6g} fF",
    )


def _rf_jpsq_branches(p: str, E_Ja, C_Ja, C_I, L_l, L_delta, C_0):
    n1, n2, I = f"{p}n1", f"{p}n2", f"{p}I"
    a1, a2, b1, b2 = f"{p}a1", f"{p}a2", f"{p}b1", f"{p}b2"
    br = (
        Branch(f"{p}Ll1", "inductor", ("g", n1), L=L_l, tag=f"{p}Ll1"),
        Branch(f"{p}C01", "capacitor", (n1, "g"), C=C_0),
        Branch(f"{p}LaL1", "inductor", (n1, a1), L=L_delta / 2, tag=f"{p}LaL1"),
        Branch(f"{p}JaL1", J, (a1, I), E_J=E_Ja, C=C_Ja),
        Branch(f"{p}LaL2", "inductor", (n1, a2), L=L_delta / 2, tag=f"{p}LaL2"),
        Branch(f"{p}JaL2", J, (a2, I), E_J=E_Ja, C=C_Ja),
        Branch(f"{p}JaR1", J, (I, b1), E_J=E_Ja, C=C_Ja),
        Branch(f"{p}LbR1", "inductor", (b1, n2), L=L_delta / 2, tag=f"{p}LbR1"),
        Branch(f"{p}JaR2", J, (I, b2), E_J=E_Ja, C=C_Ja),
        Branch(f"{p}LbR2", "inductor", (b2, n2), L=L_delta / 2, tag=f"{p}LbR2"),
        Branch(f"{p}Ll2", "inductor", (n2, "g"), L=L_l, tag=f"{p}Ll2"),
        Branch(f"{p}C02", "capacitor", (n2, "g"), C=C_0),
        # with C_I = 0 (Case C) the island and SQUID-arm nodes float capacitively;
        # C_0 regularizes them, as the caption prescribes for inductor-only nodes
        Branch(f"{p}CI", "capacitor", (I, "g"), C=C_I if C_I > 0 else C_0),
    )
    sqL = [f"{p}LaL1", f"{p}JaL1", f"{p}JaL2", f"{p}LaL2"]
    sqR = [f"{p}JaR1", f"{p}LbR1", f"{p}LbR2", f"{p}JaR2"]
    main = [f"{p}Ll1", f"{p}LaL1", f"{p}JaL1", f"{p}JaR1", f"{p}LbR1", f"{p}Ll2"]
    return (n1, n2, I, a1, a2, b1, b2), br, (sqL, sqR, main)


def fig6(E_Ja: float, C_Ja: float, C_I: float, beta: float = 15.0, phi_delta: float = 0.3,
         L_l: float | None = None, L_delta: float = 50.0, C_0: float = 0.1, name: str = "fig6_jpsq") -> CircuitSpec:
    """RF-SQUID JPSQ of Figs. 6/7.

    Each loop junction is replaced by L_l = L_J = (Φ0/2π)²/E_J with E_J = β·Ẽ_Ja.
    Each DC SQUID arm holds L_Δ/2 in series with its junction; C_0 to ground
    at the two inductor-only nodes keeps the capacitance matrix nonsingular.
    """
    if L_l is None:
        L_l = units.ej_to_inductance_ph(loop_junction_energy(E_Ja, beta, phi_delta))
    nodes, br, (sqL, sqR, main) = _rf_jpsq_branches("", E_Ja, C_Ja, C_I, L_l, L_delta, C_0)
    return CircuitSpec(
        name=name,
        nodes=("g",) + nodes,
        ground="g",
        branches=br,
        loops=_jpsq_loops(sqL, sqR, main),
        islands=(IslandSpec("island", ("I",), "Qb"),),
        bias=(("PhiDelta", phi_delta), ("dPhiX", 0.0), ("dPhiZ", 0.0), ("Qb", 0.0)),
        description=f"Fig. 6/7 RF-SQUID JPSQ: E_Ja={E_Ja} GHz, C_Ja={C_Ja} fF, C_I={C_I} fF, L_l={L_l:.6g} pH, L_Delta={L_delta} pH, C_0={C_0} fF",
    )


def fig1(E_Ja: float = 44.7, C_Ja: float = 1.80, E_J: float = 134.0, C_J: float = 5.40) -> CircuitSpec:
    """Four-junction two-loop flux qubit of Fig. 1(a)."""
    br = (
        Branch("J1", J, ("g", "n1"), E_J=E_J, C=C_J),
        Branch("J2", J, ("n1", "n2"), E_J=E_J, C=C_J),
        Branch("Ja1", J, ("n2", "g"), E_J=E_Ja, C=C_Ja),
        Branch("Ja2", J, ("n2", "g"), E_J=E_Ja, C=C_Ja),
    )
    loops = (
        LoopSpec("squid", ("Ja1", "Ja2"), LinearExpr.from_mapping({"PhiX": 1.0})),
        LoopSpec("main", ("J1", "J2", "Ja1"), LinearExpr.from_mapping({"PhiZ": 1.0, "PhiX": 0.5})),
    )
    return CircuitSpec("fig1", ("g", "n1", "n2"), "g", br, loops, bias=(("PhiX", 0.0), ("PhiZ", 0.5)),
                       description="Fig. 1 two-loop (4-junction) flux qubit")


def fig2(E_J: float = 117.0, C_J: float = 4.42, E_Ja: float = 47.8, C_Ja: float = 1.80, L_l: float = 110.0,
         L_delta: float = 20.0, C_sh: float = 35.0) -> CircuitSpec:
    """Two-loop flux qubit of Fig. 2: two loop junctions, loop inductance L_l and a shunted DC SQUID."""
    br = (
        Branch("J1", J, ("g", "n1"), E_J=E_J, C=C_J),
        Branch("J2", J, ("n1", "n2"), E_J=E_J, C=C_J),
        Branch("Ll", "inductor", ("n2", "n3"), L=L_l, tag="Ll"),
        Branch("Lsa", "inductor", ("n3", "s1"), L=L_delta / 2, tag="Lsa"),
        Branch("Ja1", J, ("s1", "g"), E_J=E_Ja, C=C_Ja),
        Branch("Lsb", "inductor", ("n3", "s2"), L=L_delta / 2, tag="Lsb"),
        Branch("Ja2", J, ("s2", "g"), E_J=E_Ja, C=C_Ja),
        Branch("Csh", "capacitor", ("n3", "g"), C=C_sh),
    )
    loops = (
        LoopSpec("squid", ("Lsa", "Ja1", "Ja2", "Lsb"), LinearExpr.from_mapping({"PhiX": 1.0})),
        LoopSpec("main", ("J1", "J2", "Ll", "Lsa", "Ja1"), LinearExpr.from_mapping({"PhiZ": 1.0, "PhiX": 0.5})),
    )
    return CircuitSpec("fig2", ("g", "n1", "n2", "n3", "s1", "s2"), "g", br, loops, bias=(("PhiX", 0.0), ("PhiZ", 0.5)),
                       description="Fig. 2 two-loop flux qubit with loop inductance and C_sh-shunted DC SQUID")


def _coupler(p: str, E_J, C_J, L_l, L_delta, C_0):
    c, s1, s2 = f"{p}c", f"{p}s1", f"{p}s2"
    br = (
        Branch(f"{p}L", "inductor", ("g", c), L=L_l, tag=f"{p}L"),
        Branch(f"{p}C0", "capacitor", (c, "g"), C=C_0),
        Branch(f"{p}La", "inductor", (c, s1), L=L_delta / 2, tag=f"{p}La"),
        Branch(f"{p}J1", J, (s1, "g"), E_J=E_J, C=C_J),
        Branch(f"{p}Lb", "inductor", (c, s2), L=L_delta / 2, tag=f"{p}Lb"),
        Branch(f"{p}J2", J, (s2, "g"), E_J=E_J, C=C_J),
    )
    flux = f"Phi{p.rstrip('_')}"
    loops = (
        LoopSpec(f"{p}squid", (f"{p}La", f"{p}J1", f"{p}J2", f"{p}Lb"), LinearExpr.from_mapping({flux: 1.0})),
        LoopSpec(f"{p}main", (f"{p}L", f"{p}La", f"{p}J1"), LinearExpr.from_mapping({flux: 0.5})),
    )
    return (c, s1, s2), br, loops


def fig8(E_Ja: float = 70.0, C_Ja: float = 2.64, L_l: float = 1000.0, L_delta: float = 50.0, C_I: float = 10.0,
         phi_delta: float = 0.4, E_Jc: float = 172.0, C_Jc: float = 6.46, L_c: float = 600.0, L_delta_c: float = 10.0,
         M_zz: float = 25.0, M_xx: float = 25.0, C_0: float = 0.1) -> CircuitSpec:
    """Two RF-SQUID JPSQs (A, B) with a zz coupler (Cz) and an xx coupler (Cx), Fig. 8(a).

    The couplers are RF SQUIDs whose DC-SQUID flux PhiCz / PhiCx switches them
    on (Φ0) or off (Φ0/2). The zz coupler loop inductor couples with M_zz to
    the first loop inductor of each JPSQ. The xx coupler couples with +M_xx
    to the first arm of SQUID L and −M_xx to the first arm of SQUID R of each
    JPSQ, so it threads the differential SQUID flux (δΦ^x) and no net main-loop flux.
    """
    nodes, branches, loops, islands = [], [], [], []
    for q in ("A", "B"):
        p = f"{q}_"
        n, br, (sqL, sqR, main) = _rf_jpsq_branches(p, E_Ja, C_Ja, C_I, L_l, L_delta, C_0)
        nodes += n
        branches += br
        loops += _jpsq_loops(sqL, sqR, main, suffix=q)
        islands.append(IslandSpec(f"island{q}", (f"{p}I",), f"Qb{q}"))
    for cname in ("Cz", "Cx"):
        n, br, lp = _coupler(f"{cname}_", E_Jc, C_Jc, L_c, L_delta_c, C_0)
        nodes += n
        branches += br
        loops += lp
    mutuals = []
    for q in ("A", "B"):
        mutuals.append(Mutual(("Cz_L", f"{q}_Ll1"), M_zz))
        mutuals.append(Mutual(("Cx_L", f"{q}_LaL1"), M_xx))
        mutuals.append(Mutual(("Cx_L", f"{q}_LbR1"), -M_xx))
    bias = [("PhiDelta", phi_delta)]
    for q in ("A", "B"):
        bias += [(f"dPhiX{q}", 0.0), (f"dPhiZ{q}", 0.0), (f"Qb{q}", 0.5)]
    bias += [("PhiCz", 1.0), ("PhiCx", 0.5)]
    return CircuitSpec(
        name="fig8",
        nodes=("g",) + tuple(nodes),
        ground="g",
        branches=tuple(branches),
        loops=tuple(loops),
        islands=tuple(islands),
        mutuals=tuple(mutuals),
        bias=tuple(bias),
        description="Fig. 8 two RF-SQUID JPSQs with zz and xx RF-SQUID couplers",
    )


# Fig. 6 case C needs two quanta in the merged stiff oscillators (I^x 260 -> 208 nA,
# V^y 44 -> 13.8 µV); three quanta change the dipoles by < 6%. A and B are unaffected.
TABLE_I_STIFF_EXCITATIONS = 2


def table_case(case: str, circuit: str = "fig3b", **kw) -> CircuitSpec:
    c = TABLE_I[case.upper()]
    f = {"fig3b": fig3b, "fig6": fig6}[circuit]
    return f(c.E_Ja, c.C_Ja, c.C_I, beta=c.beta, phi_delta=c.phi_delta, name=f"{circuit}_case{c.name}", **kw)


def builtin(name: str, case: str | None = None) -> CircuitSpec:
    """Named built-in circuit: fig1, fig2, fig3b, fig6, fig8 (fig3b/fig6 take a Table I case, default A)."""
    name = name.lower()
    if name in ("fig3b", "fig6", "fig6_jpsq"):
        return table_case(case or "A", "fig6" if name.startswith("fig6") else "fig3b")
    if name == "fig1":
        return fig1()
    if name == "fig2":
        return fig2()
    if name == "fig8":
        return fig8()
    raise KeyError(f"unknown built-in circuit '{name}'")


BUILTIN_NAMES = ("fig1", "fig2", "fig3b", "fig6", "fig8")
