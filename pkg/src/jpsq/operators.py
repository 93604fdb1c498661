"""Matrix-free operators on a tensor-product Hilbert space.

A :class:`KronOperator` is a sum of terms ``c · F_1 ⊗ F_2 ⊗ …`` where each
term names only the modes it acts on nontrivially. Factors are 1-D arrays
(diagonal) or square matrices. Application reshapes the state to the mode
grid and contracts one axis at a time, so memory stays at a few state
vectors even when the assembled matrix would be dense in some modes.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import LinearOperator


def _apply_factor(F: np.ndarray, Y: np.ndarray, axis: int) -> np.ndarray:
    if F.ndim == 1:
        shape = [1] * Y.ndim
        shape[axis] = F.shape[0]
        return Y * F.reshape(shape)
    pre = int(np.prod(Y.shape[:axis], dtype=np.int64))
    n = Y.shape[axis]
    post = int(np.prod(Y.shape[axis + 1 :], dtype=np.int64))
    out = np.matmul(F, Y.reshape(pre, n, post))
    return out.reshape(Y.shape[:axis] + (F.shape[0],) + Y.shape[axis + 1 :])


@dataclass
class KronOperator:
    """Sum of Kronecker-product terms over modes with sizes ``dims``.

    Each entry of ``terms`` is ``(coefficient, {mode: factor})``.
    """

    dims: tuple[int, ...]
    terms: list[tuple[complex, dict[int, np.ndarray]]] = field(default_factory=list)

    @property
    def shape(self) -> tuple[int, int]:
        d = int(np.prod(self.dims, dtype=np.int64))
        return d, d

    @property
    def dim(self) -> int:
        return self.shape[0]

    def add(self, coeff: complex, factors: dict[int, np.ndarray]) -> None:
        if coeff != 0:
            self.terms.append((coeff, factors))

    def simplified(self) -> "KronOperator":
        """Merge constant and single-mode terms into one factor per mode."""
        const = 0.0 + 0.0j
        local: dict[int, np.ndarray] = {}
        rest = []
        for c, f in self.terms:
            if not f:
                const += c
            elif len(f) == 1:
                (k, F), = f.items()
                M = c * F
                if k in local:
                    a = local[k]
                    if a.ndim == 1 and M.ndim == 2:
                        a = np.diag(a)
                    elif a.ndim == 2 and M.ndim == 1:
                        M = np.diag(M)
                    local[k] = a + M
                else:
                    local[k] = M.astype(complex)
            else:
                rest.append((c, f))
        out = KronOperator(self.dims)
        if const != 0:
            out.terms.append((const, {}))
        for k in sorted(local):
            out.terms.append((1.0, {k: local[k]}))
        out.terms.extend(rest)
        return out

    def _apply(self, X: np.ndarray) -> np.ndarray:
        out = np.zeros(X.shape, dtype=complex)
        for c, f in self.terms:
            Y = X
            for k, F in f.items():
                Y = _apply_factor(F, Y, k)
            if c == 1.0:
                out += Y
            else:
                out += c * Y
        return out

    def matvec(self, x: np.ndarray) -> np.ndarray:
        return self._apply(np.asarray(x).reshape(self.dims)).reshape(-1)

    def matmat(self, X: np.ndarray) -> np.ndarray:
        X = np.asarray(X)
        m = X.shape[1]
        return self._apply(X.reshape(self.dims + (m,))).reshape(self.dim, m)

    def __matmul__(self, x):
        x = np.asarray(x)
        return self.matvec(x) if x.ndim == 1 else self.matmat(x)

    def adjoint(self) -> "KronOperator":
        terms = []
        for c, f in self.terms:
            terms.append((np.conj(c), {k: (np.conj(F) if F.ndim == 1 else F.conj().T) for k, F in f.items()}))
        return KronOperator(self.dims, terms)

    def as_linear_operator(self) -> LinearOperator:
        adj = self.adjoint()
        return LinearOperator(self.shape, matvec=self.matvec, rmatvec=adj.matvec, matmat=self.matmat, rmatmat=adj.matmat, dtype=complex)

    def _factor_sparse(self, k: int, f: dict[int, np.ndarray]) -> sp.spmatrix:
        n = self.dims[k]
        if k not in f:
            return sp.identity(n, dtype=complex, format="csr")
        F = f[k]
        return sp.diags(F.astype(complex)).tocsr() if F.ndim == 1 else sp.csr_matrix(F.astype(complex))

    def to_sparse(self) -> sp.csr_matrix:
        """Assemble as CSR; only sensible for moderate dimensions."""
        out = sp.csr_matrix(self.shape, dtype=complex)
        for c, f in self.terms:
            m = None
            for k in range(len(self.dims)):
                fk = self._factor_sparse(k, f)
                m = fk if m is None else sp.kron(m, fk, format="csr")
            out = out + c * m
        out.sum_duplicates()
        return out.tocsr()

    def to_dense(self) -> np.ndarray:
        return self.to_sparse().toarray()

    def triplets(self, tol: float = 0.0) -> list[tuple[int, int, complex]]:
        """Debug export: (row, col, value) for every stored element above ``tol``."""
        coo = self.to_sparse().tocoo()
        return [(int(i), int(j), complex(v)) for i, j, v in zip(coo.row, coo.col, coo.data) if abs(v) > tol]

    def dump_triplets(self, path, tol: float = 0.0) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(f"# dims {' '.join(map(str, self.dims))}\n# row col re im\n")
            for i, j, v in self.triplets(tol):
                fh.write(f"{i} {j} {v.real:.17g} {v.imag:.17g}\n")

    def diagonal(self) -> np.ndarray:
        diag = np.zeros(self.dims, dtype=complex)
        for c, f in self.terms:
            vecs = []
            for k, F in f.items():
                vecs.append((k, F if F.ndim == 1 else np.diagonal(F)))
            term = np.full(self.dims, c, dtype=complex)
            for k, v in vecs:
                shape = [1] * len(self.dims)
                shape[k] = -1
                term = term * v.reshape(shape)
            diag += term
        return diag.reshape(-1)

    def hermiticity_defect(self, rng: np.random.Generator | None = None, probes: int = 2) -> float:
        """max |⟨y|Hx⟩ − ⟨Hy|x⟩| over random unit probes (GHz)."""
        rng = rng or np.random.default_rng(0)
        worst = 0.0
        for _ in range(probes):
            x = rng.normal(size=self.dim) + 1j * rng.normal(size=self.dim)
            y = rng.normal(size=self.dim) + 1j * rng.normal(size=self.dim)
            x /= np.linalg.norm(x)
            y /= np.linalg.norm(y)
            worst = max(worst, abs(np.vdot(y, self.matvec(x)) - np.vdot(self.matvec(y), x)))
        return worst


def merge_modes(op: KronOperator, modes: Sequence[int], states: Sequence[Sequence[int]]) -> KronOperator:
    """Replace ``modes`` by one composite mode spanned by the product states ``states``.

    ``states[a]`` lists the basis index of each merged mode for composite
    state ``a``. The composite mode is placed at the position of the first
    merged mode; the others are removed. Every factor on the merged modes is
    replaced by its exact restriction to the kept product states.
    """
    modes = list(modes)
    st = np.asarray(states, dtype=int).reshape(len(states), len(modes))
    keep = [k for k in range(len(op.dims)) if k not in modes[1:]]
    new_index = {k: i for i, k in enumerate(keep)}
    target = new_index[modes[0]]
    dims = tuple(len(states) if k == modes[0] else op.dims[k] for k in keep)
    out = KronOperator(dims)
    for c, f in op.terms:
        merged = np.ones((len(states), len(states)), dtype=complex)
        touched = False
        nf = {}
        for k, F in f.items():
            if k in modes:
                touched = True
                col = st[:, modes.index(k)]
                if F.ndim == 1:
                    merged = merged * (F[col][:, None] * (col[:, None] == col[None, :]))
                else:
                    merged = merged * F[np.ix_(col, col)]
            else:
                nf[new_index[k]] = F
        if touched:
            # untouched merged modes contribute identity (δ on their indices)
            for j, k in enumerate(modes):
                if k not in f:
                    merged = merged * (st[:, j][:, None] == st[:, j][None, :])
            diag = np.diag(merged)
            if np.count_nonzero(merged - np.diag(diag)) == 0:
                nf[target] = diag
            else:
                nf[target] = merged
        out.terms.append((c, nf))
    return out


def excitation_states(dims: Sequence[int], max_total: int) -> list[tuple[int, ...]]:
    """Product Fock states with Σ n_k ≤ max_total, ordered by total then lexicographically."""
    out = [()]
    for d in dims:
        out = [s + (n,) for s in out for n in range(d)]
    out = [s for s in out if sum(s) <= max_total]
    return sorted(out, key=lambda s: (sum(s), s))


def embed(vecs: Sequence[np.ndarray]) -> np.ndarray:
    """Kronecker product of per-mode vectors (product state)."""
    out = np.ones(1, dtype=complex)
    for v in vecs:
        out = np.kron(out, v)
    return out
