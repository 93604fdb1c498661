"""Eigensolution, bias sweeps with adiabatic state tracking, and the island charging spectrum.

Solver selection: models with ``hilbert_dim <= dense_max_dim`` are
assembled and diagonalized densely. Larger ones run matrix-free: diagonally
preconditioned LOBPCG when oscillator axes dominate the basis, implicitly
restarted Lanczos (ARPACK ``eigsh``) otherwise, each falling back to the
other when it misses the residual target.
"""

from __future__ import annotations

import csv
import io
import itertools
import logging
import math
import warnings
from dataclasses import dataclass, field, replace
from functools import partial
from typing import Mapping, Sequence

import numpy as np
import scipy.linalg as sla
from scipy.sparse.linalg import ArpackNoConvergence, LinearOperator, eigsh, lobpcg

from .circuit import BiasPoint
from .engine import failures, sweep_engine
from .operators import KronOperator
from .quantizer import QuantizedModel, quantize

logger = logging.getLogger(__name__)

DENSE_MAX_DIM = 1024
EIG_TOL = 1e-10  # GHz, absolute eigenvalue tolerance
RESIDUAL_REL = 1e-8  # residual target relative to the spectral scale
DEGENERACY_TOL = 1e-9  # GHz
TRACK_THRESHOLD = 0.7


class ConvergenceError(RuntimeError):
    def __init__(self, message: str, best_residual: float):
        self.best_residual = best_residual
        super().__init__(f"{message} (best residual {best_residual:.3g})")


@dataclass
class SpectrumResult:
    bias: BiasPoint
    parity: object
    eigenvalues: np.ndarray  # ascending, GHz
    residuals: np.ndarray  # ‖Hv − Ev‖ per eigenpair
    eigenvectors: np.ndarray | None = None  # columns, lowest k
    method: str = ""
    dims: tuple[int, ...] = ()

    @property
    def k(self) -> int:
        return len(self.eigenvalues)

    def relative(self) -> np.ndarray:
        """Eigenvalues relative to the ground state."""
        return self.eigenvalues - self.eigenvalues[0]

    def splitting(self, i: int = 0, j: int = 1) -> float:
        return float(self.eigenvalues[j] - self.eigenvalues[i])

    def clusters(self, tol: float = DEGENERACY_TOL) -> list[list[int]]:
        return degenerate_clusters(self.eigenvalues, tol)

    def without_vectors(self) -> "SpectrumResult":
        return replace(self, eigenvectors=None)


def degenerate_clusters(eigenvalues: Sequence[float], tol: float = DEGENERACY_TOL) -> list[list[int]]:
    """Group consecutive ascending eigenvalues closer than ``tol``."""
    out: list[list[int]] = []
    for i, e in enumerate(eigenvalues):
        if out and e - eigenvalues[out[-1][-1]] <= tol:
            out[-1].append(i)
        else:
            out.append([i])
    return out


def _residuals(H: KronOperator, w: np.ndarray, V: np.ndarray) -> np.ndarray:
    R = H.matmat(V) - V * w[None, :]
    return np.linalg.norm(R, axis=0)


def _rayleigh_ritz(H: KronOperator, V: np.ndarray, k: int) -> tuple[np.ndarray, np.ndarray]:
    Q, _ = np.linalg.qr(V)
    Hs = Q.conj().T @ H.matmat(Q)
    w, U = np.linalg.eigh(0.5 * (Hs + Hs.conj().T))
    return w[:k], Q @ U[:, :k]


def _solve_dense(H: KronOperator, k: int) -> tuple[np.ndarray, np.ndarray]:
    A = H.to_dense()
    A = 0.5 * (A + A.conj().T)
    return sla.eigh(A, subset_by_index=[0, k - 1])


def _solve_lobpcg(H: KronOperator, k: int, target: float, maxiter: int, seed: int):
    n = H.dim
    m = min(n, k + max(4, k // 2))
    d = H.diagonal().real
    rng = np.random.default_rng(seed)
    X0 = np.zeros((n, m), dtype=complex)
    X0[np.argsort(d, kind="stable")[:m], np.arange(m)] = 1.0
    X0 += 1e-3 * (rng.normal(size=(n, m)) + 1j * rng.normal(size=(n, m)))
    sigma = d.min()

    def prec(R):
        R = np.asarray(R)
        scale = np.maximum(np.abs(d - sigma), 1.0)
        return R / (scale[:, None] if R.ndim == 2 else scale)

    A = LinearOperator(H.shape, matvec=H.matvec, matmat=H.matmat, dtype=complex)
    M = LinearOperator(H.shape, matvec=prec, matmat=prec, dtype=complex)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", UserWarning)
        w, V = lobpcg(A, X0, M=M, largest=False, tol=target, maxiter=maxiter)
    return _rayleigh_ritz(H, V, k)


def _solve_arpack(H: KronOperator, k: int, maxiter: int, seed: int):
    rng = np.random.default_rng(seed)
    v0 = rng.normal(size=H.dim) + 1j * rng.normal(size=H.dim)
    try:
        w, V = eigsh(H.as_linear_operator(), k=min(k + 2, H.dim - 2), which="SA", tol=0, maxiter=maxiter, v0=v0)
    except ArpackNoConvergence as exc:
        if exc.eigenvectors is None or not len(exc.eigenvalues):
            raise ConvergenceError("eigsh did not converge", math.inf) from exc
        w, V = exc.eigenvalues, exc.eigenvectors
    order = np.argsort(w)
    return _rayleigh_ritz(H, V[:, order], min(k, len(w)))


def solve_operator(
    H: KronOperator,
    k: int = 6,
    method: str = "auto",
    dense_max_dim: int = DENSE_MAX_DIM,
    maxiter: int = 3000,
    seed: int = 0,
    oscillators: bool = False,
) -> tuple[np.ndarray, np.ndarray, np.ndarray, str]:
    """Lowest ``k`` eigenpairs of a Hermitian KronOperator: (w, V, residuals, method).

    With ``method="auto"``, LOBPCG is preferred when ``oscillators`` is set
    (the Fock diagonal dominates, so the diagonal preconditioner is
    effective); otherwise Lanczos.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    n = H.dim
    if k > n:
        raise ValueError(f"k={k} exceeds the Hilbert-space dimension {n}")
    if method == "auto":
        method = "dense" if n <= dense_max_dim or k >= n - 2 else ("lobpcg" if oscillators else "eigsh")
    if method == "dense":
        w, V = _solve_dense(H, k)
        return w, V, _residuals(H, w, V), "dense"
    if method not in ("lobpcg", "eigsh"):
        raise ValueError(f"unknown method '{method}'")
    # ‖H‖ proxy; the residual target is RESIDUAL_REL of it, and eigenvalue errors are ~ residual²/gap
    scale = max(1.0, float(np.abs(H.diagonal().real).max()))
    target = RESIDUAL_REL * scale
    best = math.inf
    attempts = ["lobpcg", "eigsh"] if method == "lobpcg" else ["eigsh", "lobpcg"]
    for name in attempts:
        try:
            if name == "lobpcg":
                w, V = _solve_lobpcg(H, k, 0.1 * target, maxiter, seed)
            else:
                w, V = _solve_arpack(H, k, maxiter, seed)
        except ConvergenceError as exc:
            best = min(best, exc.best_residual)
            continue
        res = _residuals(H, w, V)
        if len(w) == k and res.max() < target:
            return w, V, res, name
        best = min(best, float(res.max()))
        logger.info("%s residual %.3g above target %.3g; trying fallback", name, res.max(), target)
    raise ConvergenceError(f"no eigensolver reached the residual target for k={k}, dim={n}", best)


def solve(
    model: QuantizedModel,
    bias: BiasPoint | Mapping[str, float] | None = None,
    parity=0,
    k: int = 6,
    vectors: bool = True,
    **opts,
) -> SpectrumResult:
    """Lowest ``k`` eigenpairs of ``model`` at ``bias`` in the given parity sector."""
    bias = _as_bias(model, bias)
    H = model.hamiltonian(bias, parity)
    opts.setdefault("oscillators", oscillator_dominated(model))
    w, V, res, method = solve_operator(H, k, **opts)
    return SpectrumResult(bias, parity, np.asarray(w), np.asarray(res), V if vectors else None, method, H.dims)


def oscillator_dominated(model: QuantizedModel) -> bool:
    """True when oscillator axes carry more of the Hilbert space than charge axes.

    LOBPCG's Fock-diagonal preconditioner pays off there (Fig. 6: 10× faster
    than Lanczos); charge-dominated bases such as Fig. 2 favour Lanczos (15×).
    """
    charge = int(np.prod([model.modes[i].size for i in model.periodic], dtype=np.int64))
    return model.hilbert_dim > charge * charge


def _as_bias(model: QuantizedModel, bias) -> BiasPoint:
    if bias is None:
        return model.spec.default_bias()
    if isinstance(bias, BiasPoint):
        return bias
    return model.spec.default_bias().updated(dict(bias))


# ---------------------------------------------------------------- sweeps


@dataclass
class SweepResult:
    axes: dict[str, np.ndarray]
    parities: tuple
    points: list[BiasPoint]  # C order over axes (first axis slowest)
    results: dict  # (point index, parity) → SpectrumResult, or None when failed
    tracking: dict  # (point index, parity) → permutation: label → eigen index
    flagged: set = field(default_factory=set)  # (point index, parity) with overlap below threshold
    errors: dict = field(default_factory=dict)  # (point index, parity) → message
    k: int = 0

    @property
    def shape(self) -> tuple[int, ...]:
        return tuple(len(v) for v in self.axes.values())

    def levels(self, parity=0, tracked: bool = False) -> np.ndarray:
        """Eigenvalues on the grid, shape ``self.shape + (k,)``; NaN where the point failed."""
        out = np.full((len(self.points), self.k), np.nan)
        for i in range(len(self.points)):
            r = self.results.get((i, parity))
            if r is None:
                continue
            e = r.eigenvalues
            if tracked:
                e = e[list(self.tracking[(i, parity)])]
            out[i, : len(e)] = e
        return out.reshape(self.shape + (self.k,))

    def to_csv(self) -> str:
        return sweep_csv(self)


def _grid_points(model: QuantizedModel, base: BiasPoint, axes: Mapping[str, np.ndarray]) -> list[BiasPoint]:
    names = list(axes)
    return [base.updated(dict(zip(names, vals))) for vals in itertools.product(*[axes[n] for n in names])]


def _solve_task(model: QuantizedModel, k: int, opts: dict, job):
    bias, parity = job
    return solve(model, bias, parity, k, vectors=True, **opts)


def _overlaps(prev: np.ndarray, cur: np.ndarray, prev_cl, cur_cl) -> np.ndarray:
    """|⟨prev_i|cur_j⟩|², with degenerate clusters replaced by subspace overlaps."""
    O = np.abs(prev.conj().T @ cur) ** 2
    eff = O.copy()
    for a in prev_cl:
        for b in cur_cl:
            if len(a) > 1 or len(b) > 1:
                block = O[np.ix_(a, b)].sum() / max(len(a), len(b))
                eff[np.ix_(a, b)] = block
    return eff


def match_states(prev: np.ndarray, cur: np.ndarray, prev_w=None, cur_w=None, tol: float = DEGENERACY_TOL):
    """Greedy maximal-overlap assignment: returns (perm, overlaps) with perm[i] = cur index for prev state i."""
    k = prev.shape[1]
    prev_cl = degenerate_clusters(prev_w, tol) if prev_w is not None else [[i] for i in range(k)]
    cur_cl = degenerate_clusters(cur_w, tol) if cur_w is not None else [[j] for j in range(cur.shape[1])]
    eff = _overlaps(prev, cur, prev_cl, cur_cl)
    pairs = sorted(((eff[i, j], i, j) for i in range(k) for j in range(cur.shape[1])), key=lambda t: (-t[0], t[1], t[2]))
    perm = [-1] * k
    used = set()
    got = np.zeros(k)
    for o, i, j in pairs:
        if perm[i] < 0 and j not in used:
            perm[i], got[i] = j, o
            used.add(j)
    return perm, got


def sweep(
    model: QuantizedModel,
    grid: Mapping[str, Sequence[float]],
    parities: Sequence = (0,),
    k: int = 4,
    base: BiasPoint | Mapping[str, float] | None = None,
    workers: int | None = None,
    keep_vectors: bool = False,
    threshold: float = TRACK_THRESHOLD,
    **opts,
) -> SweepResult:
    """Solve on a Cartesian grid and track states adiabatically along the first axis."""
    if not grid:
        raise ValueError("grid must have at least one axis")
    axes = {name: np.asarray(list(vals), dtype=float) for name, vals in grid.items()}
    known = set(model.flux_names) | set(model.charge_names)
    for name, vals in axes.items():
        if name not in known:
            raise KeyError(f"unknown bias axis '{name}'")
        if vals.size == 0:
            raise ValueError(f"axis '{name}' is empty")
    base_b = _as_bias(model, base)
    points = _grid_points(model, base_b, axes)
    shape = tuple(len(v) for v in axes.values())
    idx = np.arange(len(points)).reshape(shape)
    # lines along the first axis; each line is solved then tracked before moving on
    lines = [idx[(slice(None),) + rest].tolist() for rest in itertools.product(*[range(s) for s in shape[1:]])]
    parities = tuple(parities)
    results, tracking, errors, flagged = {}, {}, {}, set()
    task = partial(_solve_task, model, k, opts)
    for line in lines:
        jobs = [(points[i], p) for i in line for p in parities]
        outcomes = sweep_engine(jobs, task, workers)
        for (i, p), o in zip([(i, p) for i in line for p in parities], outcomes):
            results[(i, p)] = o.value
            if not o.ok:
                errors[(i, p)] = o.error
        for p in parities:
            prev = None
            perm_prev = list(range(k))
            for i in line:
                r = results[(i, p)]
                if r is None:
                    tracking[(i, p)] = list(range(k))
                    continue
                if prev is None:
                    perm = list(range(r.k))
                else:
                    pv = prev.eigenvectors[:, perm_prev]
                    pw = prev.eigenvalues[perm_prev]
                    order = np.argsort(pw, kind="stable")
                    perm_sorted, got = match_states(pv[:, order], r.eigenvectors, pw[order], r.eigenvalues)
                    perm = [0] * len(order)
                    for a, lab in enumerate(order):
                        perm[lab] = perm_sorted[a]
                    if np.min(got) < threshold:
                        flagged.add((i, p))
                tracking[(i, p)] = perm
                prev, perm_prev = r, perm
        if not keep_vectors:
            for i in line:
                for p in parities:
                    if results[(i, p)] is not None:
                        results[(i, p)] = results[(i, p)].without_vectors()
    if errors:
        logger.warning("sweep: %d failed point(s)", len(errors))
    return SweepResult(axes, parities, points, results, tracking, flagged, errors, k)


def sweep_csv(res: SweepResult) -> str:
    """CSV: bias columns (grid axes first, then the remaining biases in model order), parity,
    E_0 … E_{k−1} (GHz, ascending), residual_max, status (ok | flagged | failed)."""
    names = list(res.axes)
    rest = [n for n in res.points[0].as_dict() if n not in names]
    buf = io.StringIO()
    wr = csv.writer(buf, lineterminator="\n")
    wr.writerow(names + rest + ["parity"] + [f"E_{i}" for i in range(res.k)] + ["residual_max", "status"])
    for i, pt in enumerate(res.points):
        vals = pt.as_dict()
        for p in res.parities:
            r = res.results.get((i, p))
            row = [repr(float(vals[n])) for n in names + rest] + [str(p)]
            if r is None:
                row += [""] * res.k + ["", "failed"]
            else:
                row += [f"{e:.12f}" for e in r.eigenvalues] + [f"{r.residuals.max():.3e}", "flagged" if (i, p) in res.flagged else "ok"]
            wr.writerow(row)
    return buf.getvalue()


# ---------------------------------------------------------------- charging model


def charging_spectrum(E_CI: float, Q_b: float, n_levels: int = 8) -> np.ndarray:
    """Lowest ``n_levels`` of 4·E_CI·(n − Q_b)² over integer n (Q_b in units of 2e)."""
    if E_CI <= 0:
        raise ValueError("E_CI must be positive")
    c = int(round(Q_b))
    n = np.arange(c - n_levels, c + n_levels + 1)
    return np.sort(4 * E_CI * (n - Q_b) ** 2)[:n_levels]


# ---------------------------------------------------------------- convergence


@dataclass
class ConvergenceReport:
    base_dims: tuple[int, ...]
    base_levels: np.ndarray  # E_i − E_0 at the base truncation
    variations: list[dict]  # one entry per enlarged truncation
    tol: float

    @property
    def max_change(self) -> float:
        return max((v["max_change"] for v in self.variations), default=0.0)

    @property
    def converged(self) -> bool:
        return self.max_change < self.tol

    def as_dict(self) -> dict:
        return {
            "base_dims": list(self.base_dims),
            "base_levels_GHz": [float(x) for x in self.base_levels],
            "variations": self.variations,
            "tol_GHz": self.tol,
            "max_change_GHz": self.max_change,
            "converged": self.converged,
        }


def model_truncations(model: QuantizedModel) -> dict[int, int]:
    return {m.index: m.size for m in model.modes}


def requantize(model: QuantizedModel, truncations: Mapping[int, int] | None = None, stiff_excitations=...) -> QuantizedModel:
    """Same circuit and grouping with new truncations (missing modes keep their size)."""
    tr = model_truncations(model)
    tr.update(truncations or {})
    se = model.stiff_excitations if stiff_excitations is ... else stiff_excitations
    return quantize(model.spec, truncations=tr, groups=model.groups, stiff_excitations=se, check=False, mutuals=model.mutuals)


def convergence_report(
    model: QuantizedModel,
    bias: BiasPoint | Mapping[str, float] | None = None,
    parity=0,
    n_levels: int = 4,
    factor: float = 1.5,
    tol: float = 1e-3,
    **opts,
) -> ConvergenceReport:
    """Enlarge each mode's truncation by ``factor`` (one at a time, stiff composites by one more
    excitation) and report the change of the lowest level spacings E_i − E_0 (GHz)."""
    bias = _as_bias(model, bias)
    base = solve(model, bias, parity, n_levels, vectors=False, **opts)
    variations = []
    handled_stiff = set()
    for m in model.modes:
        if m.role == "stiff" and model.merged:
            if "stiff" in handled_stiff:
                continue
            handled_stiff.add("stiff")
            variant = requantize(model, stiff_excitations=model.stiff_excitations + 1)
            label = f"stiff_excitations {model.stiff_excitations}->{model.stiff_excitations + 1}"
        elif m.kind == "periodic":
            nm = max(m.n_max + 1, int(math.ceil(m.n_max * factor)))
            variant = requantize(model, {m.index: 2 * nm + 1})
            label = f"mode {m.index} n_max {m.n_max}->{nm}"
        else:
            nl = max(m.size + 1, int(math.ceil(m.size * factor)))
            variant = requantize(model, {m.index: nl})
            label = f"mode {m.index} levels {m.size}->{nl}"
        r = solve(variant, bias, parity, n_levels, vectors=False, **opts)
        change = float(np.abs(r.relative() - base.relative()).max())
        variations.append({"change": label, "dims": list(variant.dims), "max_change": change})
    return ConvergenceReport(model.dims, base.relative(), variations, tol)


# ---------------------------------------------------------------- hierarchical diagonalization


@dataclass
class HierarchicalResult:
    spectrum: SpectrumResult
    group_levels: dict[int, np.ndarray]  # lowest kept eigenvalues of each subsystem
    coupled: KronOperator  # Hamiltonian in the product of kept subsystem eigenstates


def _split_by_group(H: KronOperator, axis_groups: Sequence[int]):
    groups = sorted(set(axis_groups))
    local_axes = {g: [a for a, gg in enumerate(axis_groups) if gg == g] for g in groups}
    pos = {a: local_axes[axis_groups[a]].index(a) for a in range(len(axis_groups))}
    return groups, local_axes, pos


def hierarchical_solve(
    model: QuantizedModel,
    bias: BiasPoint | Mapping[str, float] | None = None,
    parity=0,
    keep: int | Mapping[int, int] = 8,
    k: int = 6,
    **opts,
) -> HierarchicalResult:
    """Diagonalize each node group separately, keep its lowest states, then diagonalize the
    coupled Hamiltonian in the product of kept states.

    Terms acting within one group form that group's Hamiltonian; terms spanning
    several groups (mutual-inductive ξ_i ξ_j couplings) are projected factor by
    factor onto the kept subsystem eigenstates.
    """
    bias = _as_bias(model, bias)
    H = model.hamiltonian(bias, parity)
    groups, local_axes, pos = _split_by_group(H, model.axis_groups)
    keep_n = {g: (keep if isinstance(keep, int) else keep[g]) for g in groups}
    sub_H = {g: KronOperator(tuple(H.dims[a] for a in local_axes[g])) for g in groups}
    const = 0.0 + 0.0j
    cross = []
    for c, f in H.terms:
        gs = {model.axis_groups[a] for a in f}
        if not gs:
            const += c
        elif len(gs) == 1:
            g = gs.pop()
            sub_H[g].add(c, {pos[a]: F for a, F in f.items()})
        else:
            cross.append((c, f))
    vecs, levels = {}, {}
    for g in groups:
        n_keep = min(keep_n[g], sub_H[g].dim)
        w, V, res, _ = solve_operator(sub_H[g].simplified(), n_keep, oscillators=oscillator_dominated(model), **opts)
        vecs[g], levels[g] = V, w
    gi = {g: i for i, g in enumerate(groups)}
    out = KronOperator(tuple(len(levels[g]) for g in groups))
    out.add(const, {})
    for g in groups:
        out.add(1.0, {gi[g]: levels[g].astype(complex)})
    for c, f in cross:
        factors = {}
        for g in {model.axis_groups[a] for a in f}:
            part = KronOperator(sub_H[g].dims)
            part.add(1.0, {pos[a]: F for a, F in f.items() if model.axis_groups[a] == g})
            V = vecs[g]
            factors[gi[g]] = V.conj().T @ part.matmat(V)
        out.add(c, factors)
    out = out.simplified()
    w, V, res, method = solve_operator(out, min(k, out.dim), **opts)
    spec = SpectrumResult(bias, parity, w, res, V, f"hierarchical/{method}", out.dims)
    return HierarchicalResult(spec, levels, out)
