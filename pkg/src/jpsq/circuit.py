"""Lumped-element circuit description, bias points and validation."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace
from typing import Iterable, Mapping

import numpy as np

logger = logging.getLogger(__name__)

BRANCH_KINDS = ("josephson", "capacitor", "inductor", "voltage_bias_port", "flux_bias_port")


@dataclass(frozen=True)
class LinearExpr:
    """Affine expression ``const + Σ coef·bias`` over named biases."""

    const: float = 0.0
    coeffs: tuple[tuple[str, float], ...] = ()

    @classmethod
    def from_mapping(cls, m: Mapping[str, float] | float | int | None) -> "LinearExpr":
        if m is None:
            return cls()
        if isinstance(m, (int, float)):
            return cls(float(m))
        const = float(m.get("const", 0.0))
        coeffs = {str(k): float(v) for k, v in m.items() if k != "const"}
        return cls(const, tuple(sorted((k, v) for k, v in coeffs.items() if v != 0.0)))

    def to_mapping(self) -> dict[str, float]:
        out: dict[str, float] = {}
        if self.const != 0.0 or not self.coeffs:
            out["const"] = self.const
        out.update(dict(self.coeffs))
        return out

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(k for k, _ in self.coeffs)

    def coeff(self, name: str) -> float:
        return dict(self.coeffs).get(name, 0.0)

    def evaluate(self, values: Mapping[str, float]) -> float:
        total = self.const
        for k, c in self.coeffs:
            if k not in values:
                raise KeyError(f"missing bias '{k}'")
            total += c * values[k]
        return total

    def __add__(self, other: "LinearExpr") -> "LinearExpr":
        d = dict(self.coeffs)
        for k, v in other.coeffs:
            d[k] = d.get(k, 0.0) + v
        return LinearExpr(self.const + other.const, tuple(sorted((k, v) for k, v in d.items() if v != 0.0)))

    def scale(self, a: float) -> "LinearExpr":
        return LinearExpr(a * self.const, tuple((k, a * v) for k, v in self.coeffs if a * v != 0.0))


def combine(exprs: Iterable[LinearExpr], weights: Iterable[float]) -> LinearExpr:
    out = LinearExpr()
    for e, w in zip(exprs, weights):
        if w != 0.0:
            out = out + e.scale(w)
    return out


@dataclass(frozen=True)
class Branch:
    """One two-terminal element.

    ``C`` is the junction capacitance for josephson branches, the capacitance
    for capacitors and an optional port capacitance for voltage-bias ports.
    Flux-bias ports are markers only and do not enter the Hamiltonian.
    """

    name: str
    kind: str
    nodes: tuple[str, str]
    E_J: float | None = None
    C: float = 0.0
    L: float | None = None
    tag: str | None = None


@dataclass(frozen=True)
class Mutual:
    tags: tuple[str, str]
    M: float


@dataclass(frozen=True)
class LoopSpec:
    """Ordered branch cycle threaded by the flux expression ``flux`` (in Φ0)."""

    name: str
    branches: tuple[str, ...]
    flux: LinearExpr = LinearExpr()


@dataclass(frozen=True)
class IslandSpec:
    """Node subset whose total offset charge is the bias ``charge`` (units of 2e)."""

    name: str
    nodes: tuple[str, ...]
    charge: str


@dataclass(frozen=True)
class CircuitSpec:
    name: str
    nodes: tuple[str, ...]
    ground: str
    branches: tuple[Branch, ...]
    loops: tuple[LoopSpec, ...] = ()
    islands: tuple[IslandSpec, ...] = ()
    mutuals: tuple[Mutual, ...] = ()
    bias: tuple[tuple[str, float], ...] = ()
    description: str = ""

    @property
    def active_nodes(self) -> tuple[str, ...]:
        return tuple(n for n in self.nodes if n != self.ground)

    def branch(self, name: str) -> Branch:
        for b in self.branches:
            if b.name == name:
                return b
        raise KeyError(name)

    def flux_bias_names(self) -> tuple[str, ...]:
        names: set[str] = set()
        for lp in self.loops:
            names.update(lp.flux.names)
        return tuple(sorted(names))

    def charge_bias_names(self) -> tuple[str, ...]:
        return tuple(isl.charge for isl in self.islands)

    def default_bias(self) -> "BiasPoint":
        d = dict(self.bias)
        charges = {q: d.pop(q, 0.0) for q in self.charge_bias_names()}
        fluxes = {f: d.pop(f, 0.0) for f in self.flux_bias_names()}
        fluxes.update(d)
        return BiasPoint(fluxes, charges)

    def with_values(self, **changes) -> "CircuitSpec":
        return replace(self, **changes)


@dataclass(frozen=True)
class BiasPoint:
    """Flux biases in Φ0 keyed by bias name; island offset charges in 2e keyed by charge-bias name."""

    fluxes: Mapping[str, float] = field(default_factory=dict)
    charges: Mapping[str, float] = field(default_factory=dict)

    def __post_init__(self):
        for k, v in self.fluxes.items():
            if not math.isfinite(v):
                raise ValueError(f"flux bias '{k}' is not finite")
        object.__setattr__(self, "fluxes", dict(self.fluxes))
        object.__setattr__(self, "charges", dict(self.charges))

    def updated(self, values: Mapping[str, float]) -> "BiasPoint":
        """Return a copy with ``values`` assigned, routing each name to fluxes or charges."""
        f, q = dict(self.fluxes), dict(self.charges)
        for k, v in values.items():
            if k in q:
                q[k] = float(v)
            else:
                f[k] = float(v)
        return BiasPoint(f, q)

    def phase(self, name: str) -> float:
        return 2 * np.pi * self.fluxes[name]

    def as_dict(self) -> dict[str, float]:
        return {**self.fluxes, **self.charges}


@dataclass(frozen=True)
class Issue:
    code: str
    location: str
    message: str


@dataclass(frozen=True)
class ValidationReport:
    issues: tuple[Issue, ...]

    @property
    def ok(self) -> bool:
        return not self.issues

    def __bool__(self) -> bool:
        return self.ok

    def codes(self) -> list[str]:
        return [i.code for i in self.issues]

    def __str__(self) -> str:
        if self.ok:
            return "pass"
        return "\n".join(f"[{i.code}] {i.location}: {i.message}" for i in self.issues)


def loop_orientations(spec: CircuitSpec, loop: LoopSpec) -> list[int]:
    """Traversal orientation (+1 from nodes[0] to nodes[1]) of each branch in ``loop``.

    Raises ValueError if the branches do not form a closed walk.
    """
    bs = [spec.branch(b) for b in loop.branches]
    if not bs:
        raise ValueError("empty loop")
    for start in (bs[0].nodes[0], bs[0].nodes[1]):
        cur, orient = start, []
        for b in bs:
            if cur == b.nodes[0]:
                orient.append(1)
                cur = b.nodes[1]
            elif cur == b.nodes[1]:
                orient.append(-1)
                cur = b.nodes[0]
            else:
                break
        else:
            if cur == start:
                return orient
    raise ValueError(f"loop '{loop.name}' is not a closed cycle")


def capacitance_matrix(spec: CircuitSpec) -> np.ndarray:
    """Node capacitance matrix (fF) over ``spec.active_nodes``."""
    idx = {n: i for i, n in enumerate(spec.active_nodes)}
    C = np.zeros((len(idx), len(idx)))
    for b in spec.branches:
        if b.kind in ("josephson", "capacitor", "voltage_bias_port") and b.C:
            i, j = idx.get(b.nodes[0]), idx.get(b.nodes[1])
            for a in (i, j):
                if a is not None:
                    C[a, a] += b.C
            if i is not None and j is not None:
                C[i, j] -= b.C
                C[j, i] -= b.C
    return C


def inductor_branches(spec: CircuitSpec) -> list[Branch]:
    return [b for b in spec.branches if b.kind == "inductor"]


def branch_inductance_matrix(spec: CircuitSpec) -> np.ndarray:
    """Inductance matrix (pH) over inductor branches, mutuals included."""
    inds = inductor_branches(spec)
    by_tag = {b.tag: i for i, b in enumerate(inds) if b.tag}
    Lb = np.diag([b.L for b in inds]).astype(float)
    for m in spec.mutuals:
        i, j = by_tag[m.tags[0]], by_tag[m.tags[1]]
        Lb[i, j] += m.M
        Lb[j, i] += m.M
    return Lb


def _components(nodes: Iterable[str], edges: Iterable[tuple[str, str]]) -> list[set[str]]:
    parent = {n: n for n in nodes}

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for a, b in edges:
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[ra] = rb
    groups: dict[str, set[str]] = {}
    for n in parent:
        groups.setdefault(find(n), set()).add(n)
    return list(groups.values())


INDUCTIVE_KINDS = ("josephson", "inductor")


def allocate_branch_offsets(spec: CircuitSpec) -> dict[str, LinearExpr]:
    """Assign loop fluxes to branch phase offsets (in Φ0).

    A spanning forest of the inductive branches is chosen with junctions
    preferred as tree edges, so offsets land on chords (inductors where
    possible). The declared loops fix the chord offsets through
    Σ_b orient_b·o_b = Φ_loop; cycles not covered by a declared loop carry
    zero flux. Raises ValueError when the declared loops are dependent.
    """
    ind = [b for b in spec.branches if b.kind in INDUCTIVE_KINDS]
    order = sorted(range(len(ind)), key=lambda i: (ind[i].kind != "josephson", i))
    parent = {n: n for n in spec.nodes}

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    chords = []
    for i in order:
        a, b = find(ind[i].nodes[0]), find(ind[i].nodes[1])
        if a == b:
            chords.append(ind[i].name)
        else:
            parent[a] = b
    names = [b.name for b in ind]
    chords.sort(key=names.index)
    if len(spec.loops) > len(chords):
        raise ValueError(f"{len(spec.loops)} loops declared but the circuit has only {len(chords)} independent cycles")
    col = {c: k for k, c in enumerate(chords)}
    rows, rhs = [], []
    for lp in spec.loops:
        r = np.zeros(len(chords))
        for bname, o in zip(lp.branches, loop_orientations(spec, lp)):
            if spec.branch(bname).kind not in INDUCTIVE_KINDS:
                raise ValueError(f"loop '{lp.name}' passes through non-inductive branch '{bname}'")
            if bname in col:
                r[col[bname]] += o
        rows.append(r)
        rhs.append(lp.flux)
    R = np.array(rows).reshape(len(rows), len(chords))
    if rows and np.linalg.matrix_rank(R) < len(rows):
        raise ValueError("declared loops are linearly dependent")
    eye = np.eye(len(chords))
    for k in range(len(chords)):
        if R.shape[0] == len(chords):
            break
        trial = np.vstack([R, eye[k]])
        if np.linalg.matrix_rank(trial) > R.shape[0]:
            R = trial
            rhs.append(LinearExpr())
    if not chords:
        return {}
    Rinv = np.linalg.inv(R)
    near = np.abs(Rinv - np.round(Rinv)) < 1e-12
    Rinv[near] = np.round(Rinv[near])
    out = {}
    for k, c in enumerate(chords):
        e = combine(rhs, Rinv[k])
        if e.const != 0.0 or e.coeffs:
            out[c] = e
    return out


def validate(spec: CircuitSpec) -> ValidationReport:
    """Check the CircuitSpec invariants. Never raises; returns a report."""
    issues: list[Issue] = []
    add = lambda code, loc, msg: issues.append(Issue(code, loc, msg))  # noqa: E731

    if len(set(spec.nodes)) != len(spec.nodes):
        add("duplicate-node", "nodes", "node names are not unique")
    if spec.ground not in spec.nodes:
        add("missing-ground", "ground", f"ground node '{spec.ground}' not among nodes")
    names = [b.name for b in spec.branches]
    if len(set(names)) != len(names):
        add("duplicate-branch", "branches", "branch names are not unique")

    nodeset = set(spec.nodes)
    for b in spec.branches:
        loc = f"branch {b.name}"
        if b.kind not in BRANCH_KINDS:
            add("unknown-kind", loc, f"unknown kind '{b.kind}'")
            continue
        if b.nodes[0] not in nodeset or b.nodes[1] not in nodeset:
            add("unknown-node", loc, f"endpoints {b.nodes} reference a missing node")
        if b.nodes[0] == b.nodes[1]:
            add("self-loop", loc, "endpoints must be distinct")
        if b.C is None or b.C < 0 or not math.isfinite(b.C):
            add("bad-value", loc, "capacitance must be finite and >= 0")
        if b.kind == "josephson" and not (b.E_J is not None and b.E_J > 0):
            add("bad-value", loc, "E_J must be > 0")
        if b.kind == "inductor" and not (b.L is not None and b.L > 0):
            add("bad-value", loc, "self-inductance must be > 0")

    inds = {b.tag: b for b in spec.branches if b.kind == "inductor" and b.tag}
    tags = [b.tag for b in spec.branches if b.kind == "inductor" and b.tag]
    if len(set(tags)) != len(tags):
        add("duplicate-tag", "branches", "inductor tags are not unique")
    mutual_ok = True
    for m in spec.mutuals:
        loc = f"mutual {m.tags[0]}-{m.tags[1]}"
        missing = [t for t in m.tags if t not in inds]
        if missing:
            add("missing-tag", loc, f"mutual references nonexistent inductor tag(s) {missing}")
            mutual_ok = False
            continue
        La, Lb = inds[m.tags[0]].L, inds[m.tags[1]].L
        if La and Lb and not abs(m.M) < math.sqrt(La * Lb):
            add("mutual-too-large", loc, f"|M| = {abs(m.M)} must be < sqrt(La*Lb) = {math.sqrt(La * Lb):.6g}")
            mutual_ok = False
    if mutual_ok and not any(i.code == "bad-value" for i in issues) and inductor_branches(spec):
        w = np.linalg.eigvalsh(branch_inductance_matrix(spec))
        if w.min() <= 1e-12 * max(1.0, w.max()):
            add("singular-inductance", "mutuals", "branch inductance matrix is not positive definite")

    if any(i.code in ("unknown-node", "self-loop", "unknown-kind", "bad-value", "duplicate-node", "missing-ground") for i in issues):
        return ValidationReport(tuple(issues))

    bnames = set(names)
    for lp in spec.loops:
        missing = [b for b in lp.branches if b not in bnames]
        if missing:
            add("unknown-branch", f"loop {lp.name}", f"references missing branch(es) {missing}")
            continue
        try:
            loop_orientations(spec, lp)
        except ValueError as exc:
            add("open-loop", f"loop {lp.name}", str(exc))

    if not any(i.code in ("unknown-branch", "open-loop") for i in issues):
        try:
            allocate_branch_offsets(spec)
        except ValueError as exc:
            add("bad-loops", "loops", str(exc))

    seen: set[str] = set()
    for isl in spec.islands:
        loc = f"island {isl.name}"
        for n in isl.nodes:
            if n not in nodeset:
                add("unknown-node", loc, f"node '{n}' does not exist")
            if n == spec.ground:
                add("island-ground", loc, "island contains the ground node")
            if n in seen:
                add("island-overlap", loc, f"node '{n}' belongs to more than one island")
            seen.add(n)

    C = capacitance_matrix(spec)
    if C.size:
        w, v = np.linalg.eigh(C)
        tol = 1e-9 * max(1.0, float(np.abs(C).max()))
        if w.min() <= tol:
            null = v[:, w <= tol]
            bad = [spec.active_nodes[i] for i in np.nonzero(np.abs(null).max(axis=1) > 1e-8)[0]]
            msg = f"singular capacitance matrix: nodes {bad} have no capacitive path to ground"
            code = "singular-capacitance"
            if inductor_branches(spec):
                code = "singular-capacitance-c0"
                msg += (
                    "; nodes joined only by inductors need a small regularizing capacitor C_0 to ground"
                    " (Fig. 6 caption: C_0 must be nonzero for the capacitance matrix to be nonsingular)"
                )
            add(code, "capacitance", msg)

    for name in spec.flux_bias_names():
        if name in spec.charge_bias_names():
            add("bias-clash", "bias", f"'{name}' used as both flux and charge bias")
    return ValidationReport(tuple(issues))
