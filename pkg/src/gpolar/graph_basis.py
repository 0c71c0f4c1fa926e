"""Entry-bounded (permuted) graph bases of subspaces.

A general n-dimensional subspace of R^{m+n} is stored as ``Pᵀ [I; X̂]``: the
permutation ``perm`` lists first the n rows carrying the identity, then the m
rows carrying X̂.  A Lagrangian subspace of R^{2n} is stored as
``Π_vᵀ [I; X̂]`` with symmetric X̂ and the symplectic swap

    Π_v = [[diag(v), diag(v̂)], [-diag(v̂), diag(v)]],   v̂ = 1 - v.

Both are driven by the same greedy heuristic: exchange rows between the
identity and the X̂ block (a principal pivot transform) about a large entry
until every entry of X̂ is at most ``tau`` in modulus.  Each exchange grows
|det| of the selected rows by more than 1, so the loop cannot cycle.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import (
    DimensionError,
    DomainError,
    NoExchangeError,
    NonTerminationError,
    RankError,
    StructureError,
)
from .sigspaces import EPS, as_matrix

PIVOT_FLOOR = 1e-8
DEFAULT_TAU = 4.0
# cond of the starting identity block above which QRCP picks the rows
WARM_START_COND = 1e6


@dataclass
class GraphBasis:
    kind: str
    selector: np.ndarray
    xhat: np.ndarray
    tau: float
    swaps: int = 0

    def split(self) -> tuple[np.ndarray, np.ndarray]:
        """Top and bottom blocks ``(V1, V2)`` of the reconstructed basis."""
        X = self.xhat
        if self.kind == "lagrangian":
            v = self.selector.astype(bool)
            n = v.size
            V1 = -X.copy()
            V2 = X.copy()
            eye = np.eye(n)
            V1[v] = eye[v]
            V2[~v] = eye[~v]
            return V1, V2
        m, n = X.shape
        V = self.basis()
        return V[:n], V[n:]

    def basis(self) -> np.ndarray:
        if self.kind == "lagrangian":
            V1, V2 = self.split()
            return np.vstack([V1, V2])
        m, n = self.xhat.shape
        V = np.empty((m + n, n))
        V[self.selector[:n]] = np.eye(n)
        V[self.selector[n:]] = self.xhat
        return V


def ppt_exchange(xhat, i: int, j: int, *, pivot_floor: float = PIVOT_FLOOR) -> np.ndarray:
    """Exchange identity row ``j`` with X̂ row ``i`` (Gauss–Jordan pivot).

    Only X̂ is returned; the caller swaps the matching selector entries.
    """
    X = np.array(xhat, dtype=float, copy=True)
    _exchange_inplace(X, i, j, pivot_floor)
    return X


def _exchange_inplace(X: np.ndarray, i: int, j: int, pivot_floor: float) -> None:
    p = X[i, j]
    if not abs(p) >= pivot_floor:
        raise NoExchangeError(f"exchange pivot |x[{i},{j}]| = {abs(p):.3e} below {pivot_floor:g}")
    row = X[i, :].copy()
    col = X[:, j].copy()
    X -= np.outer(col, row / p)
    X[:, j] = col / p
    X[i, :] = -row / p
    X[i, j] = 1.0 / p


def _principal_pivot(X: np.ndarray, S: list[int], pivot_floor: float) -> np.ndarray:
    """Principal pivot transform of square X about the index set S."""
    if len(S) == 1:
        out = X.copy()
        _exchange_inplace(out, S[0], S[0], pivot_floor)
        return out
    n = X.shape[0]
    T = np.setdiff1d(np.arange(n), S)
    Pss = X[np.ix_(S, S)]
    if not abs(np.linalg.det(Pss)) >= pivot_floor:
        raise NoExchangeError(f"2x2 exchange pivot on {S} numerically singular")
    Xst = X[np.ix_(S, T)]
    Xts = X[np.ix_(T, S)]
    inv_st = np.linalg.solve(Pss, Xst)
    out = np.empty_like(X)
    out[np.ix_(S, S)] = np.linalg.inv(Pss)
    out[np.ix_(S, T)] = -inv_st
    out[np.ix_(T, S)] = np.linalg.solve(Pss.T, Xts.T).T
    out[np.ix_(T, T)] = X[np.ix_(T, T)] - Xts @ inv_st
    return out


def _budget(n: int) -> int:
    return 20 * max(n, 1) ** 2


def _normalize_columns(Y: np.ndarray) -> np.ndarray:
    norms = np.linalg.norm(Y, axis=0)
    if np.any(norms == 0.0):
        raise RankError("input basis has a zero column")
    return Y / norms


def _check_rank(Y: np.ndarray) -> None:
    sv = np.linalg.svd(Y, compute_uv=False)
    if sv[-1] <= max(Y.shape) * EPS * sv[0]:
        raise RankError(f"input basis is rank deficient (σmin/σmax = {sv[-1] / sv[0]:.2e})")


def graph_basis_from_graph(X, tau: float = DEFAULT_TAU, *, pivot_floor: float = PIVOT_FLOOR,
                           perm: np.ndarray | None = None) -> GraphBasis:
    """Bound the entries of a basis already in the form ``[I; X]``.

    The exchanges operate on X directly, so no solve against an
    ill-conditioned block ever happens.
    """
    X = np.array(X, dtype=float, copy=True)
    m, n = X.shape
    if perm is None:
        perm = np.arange(m + n)
    else:
        perm = np.array(perm, copy=True)
    if not tau > 1.0:
        raise DomainError(f"tau must exceed 1, got {tau}")
    swaps = 0
    budget = _budget(n)
    while X.size:
        flat = int(np.argmax(np.abs(X)))
        i, j = divmod(flat, n)
        if abs(X[i, j]) <= tau:
            break
        if swaps >= budget:
            raise NonTerminationError(f"graph basis: swap budget {budget} exhausted")
        _exchange_inplace(X, i, j, pivot_floor)
        perm[j], perm[n + i] = perm[n + i], perm[j]
        swaps += 1
    return GraphBasis("general", perm, X, tau, swaps)


def permuted_graph_basis(Y, tau: float = DEFAULT_TAU, *, warm_start: bool | None = None,
                         pivot_floor: float = PIVOT_FLOOR) -> GraphBasis:
    """Permuted graph basis ``Pᵀ [I; X̂]`` of range(Y) with ``max|X̂| ≤ tau``.

    Args:
      Y: (m+n)×n matrix of full column rank.
      tau: entry bound, must exceed 1.
      warm_start: pick the starting identity rows by QR with column
        pivoting of Yᵀ.  ``None`` does so only when the leading n rows of Y
        are badly conditioned.
    """
    Y = as_matrix(Y, "Y")
    N, n = Y.shape
    if N < n:
        raise DimensionError(f"Y must have at least as many rows as columns, got {Y.shape}")
    if not tau > 1.0:
        raise DomainError(f"tau must exceed 1, got {tau}")
    Y = _normalize_columns(Y)
    _check_rank(Y)
    if warm_start is None:
        warm_start = np.linalg.cond(Y[:n]) > WARM_START_COND
    if warm_start:
        _, _, piv = scipy.linalg.qr(Y.T, mode="economic", pivoting=True)
        sel = np.sort(piv[:n])
        rest = np.setdiff1d(np.arange(N), sel)
    else:
        sel, rest = np.arange(n), np.arange(n, N)
    X = np.linalg.solve(Y[sel].T, Y[rest].T).T
    return graph_basis_from_graph(X, tau, pivot_floor=pivot_floor,
                                  perm=np.concatenate([sel, rest]))


def symplectic_swap(v) -> np.ndarray:
    """Dense ``Π_v`` for a boolean vector v."""
    v = np.asarray(v, dtype=float)
    vh = 1.0 - v
    return np.block([[np.diag(v), np.diag(vh)], [-np.diag(vh), np.diag(v)]])


def _symplectic_flip(X: np.ndarray, v: np.ndarray, S: list[int], pivot_floor: float) -> np.ndarray:
    # Rows with v = 0 carry a sign in Π_v; undo it, pivot, and reapply.
    d_old = np.where(v, 1.0, -1.0)
    Xt = _principal_pivot(d_old[:, None] * X, S, pivot_floor)
    v[S] = ~v[S]
    out = np.where(v, 1.0, -1.0)[:, None] * Xt
    return 0.5 * (out + out.T)


def lagrangian_basis_from_graph(X, tau: float = DEFAULT_TAU, *, pivot_floor: float = PIVOT_FLOOR,
                                v: np.ndarray | None = None) -> GraphBasis:
    """Bound the entries of a Lagrangian basis ``Π_vᵀ [I; X]``, X symmetric."""
    X = np.array(X, dtype=float, copy=True)
    n = X.shape[0]
    if X.shape != (n, n):
        raise DimensionError(f"Lagrangian graph needs a square X, got {X.shape}")
    if not tau > np.sqrt(2.0):
        raise DomainError(f"tau must exceed sqrt(2), got {tau}")
    X = 0.5 * (X + X.T)
    v = np.ones(n, dtype=bool) if v is None else np.array(v, dtype=bool, copy=True)
    swaps = 0
    budget = _budget(n)
    while n:
        diag = np.abs(np.diag(X))
        i = int(np.argmax(diag))
        if diag[i] > tau:
            S = [i]
        else:
            off = np.abs(X)
            off[np.diag_indices(n)] = 0.0
            flat = int(np.argmax(off))
            i, j = divmod(flat, n)
            if off[i, j] <= tau:
                break
            # |det| of the 2x2 pivot exceeds 1 unless a diagonal entry does
            det = abs(X[i, i] * X[j, j] - X[i, j] * X[j, i])
            if det > 1.0:
                S = [min(i, j), max(i, j)]
            else:
                S = [i if diag[i] >= diag[j] else j]
        if swaps >= budget:
            raise NonTerminationError(f"Lagrangian graph basis: swap budget {budget} exhausted")
        X = _symplectic_flip(X, v, S, pivot_floor)
        swaps += 1
    return GraphBasis("lagrangian", v, X, tau, swaps)


def _paired_column_selection(Y1: np.ndarray, Y2: np.ndarray) -> np.ndarray:
    """QR with column pivoting on ``[Y1ᵀ, Y2ᵀ]`` that takes exactly one of
    each pair (i, n+i); returns v with v_i True when row i of Y1 is taken."""
    n = Y1.shape[0]
    C = np.hstack([Y1.T, Y2.T]).copy()
    allowed = np.ones(2 * n, dtype=bool)
    v = np.ones(n, dtype=bool)
    for _ in range(n):
        norms = np.where(allowed, np.linalg.norm(C, axis=0), -1.0)
        p = int(np.argmax(norms))
        i = p % n
        v[i] = p < n
        allowed[i] = allowed[i + n] = False
        q = C[:, p] / np.linalg.norm(C[:, p])
        C -= np.outer(q, q @ C)
    return v


def permuted_lagrangian_graph_basis(Y, tau: float = DEFAULT_TAU, *, warm_start: bool | None = None,
                                    pivot_floor: float = PIVOT_FLOOR) -> GraphBasis:
    """Permuted Lagrangian graph basis ``Π_vᵀ [I; X̂]`` of range(Y).

    Args:
      Y: 2n×n basis of a Lagrangian subspace (``YᵀJY = 0``).
      tau: entry bound, must exceed √2.
      warm_start: choose v by pairwise QR with column pivoting; ``None``
        does so only when the top block of Y is badly conditioned.

    Raises:
      StructureError: if ``‖YᵀJY‖_F > 1e-10 ‖Y‖_F²``.
    """
    Y = as_matrix(Y, "Y")
    N, n = Y.shape
    if N != 2 * n:
        raise DimensionError(f"Lagrangian basis must be 2n×n, got {Y.shape}")
    Y1, Y2 = Y[:n], Y[n:]
    defect = np.linalg.norm(Y1.T @ Y2 - Y2.T @ Y1)
    if defect > 1e-10 * np.linalg.norm(Y) ** 2:
        raise StructureError(f"subspace is not Lagrangian (‖YᵀJY‖_F = {defect:.2e})")
    Y = _normalize_columns(Y)
    _check_rank(Y)
    Y1, Y2 = Y[:n], Y[n:]
    if warm_start is None:
        warm_start = np.linalg.cond(Y1) > WARM_START_COND
    v = _paired_column_selection(Y1, Y2) if warm_start else np.ones(n, dtype=bool)
    # Π_v Y = [T; B]
    T = np.where(v[:, None], Y1, Y2)
    B = np.where(v[:, None], Y2, -Y1)
    X = np.linalg.solve(T.T, B.T).T
    return lagrangian_basis_from_graph(X, tau, pivot_floor=pivot_floor, v=v)
