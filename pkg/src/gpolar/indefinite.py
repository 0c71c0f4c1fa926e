"""Indefinite factorizations: pivoted LDLᵀ, hyperbolic and indefinite QR.

All routines produce bases ``H`` that are (Σ, Σ̂)-orthogonal, i.e.
``Hᵀ Σ H = Σ̂`` for some output signature Σ̂, spanning the range of the
input.  Three routes are provided:

* ``indefinite_qr_via_ldl``: one Bunch–Kaufman LDLᵀ of ``AᵀΣA`` followed by
  triangular solves (the indefinite analogue of Cholesky-QR),
* ``ldliqr2``: the same applied twice (the analogue of CholeskyQR2),
* ``hyperbolic_qr_elimination``: column elimination with Householder
  reflectors and hyperbolic Givens rotations, no solves at all.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import numpy as np
from scipy.linalg import solve_triangular

from .errors import (
    DimensionError,
    HyperbolicBreakdownError,
    SingularityError,
    StructureError,
)
from .sigspaces import EPS, Signature, SignatureLike, as_matrix, as_signature

BK_ALPHA = (1.0 + np.sqrt(17.0)) / 8.0
BREAKDOWN_TOL = 1e-12
EIG_TRUNCATION = 1e-13


@dataclass
class LDLFactors:
    """``A[perm][:, perm] = L D Lᵀ``, i.e. ``A = P L D Lᵀ Pᵀ`` with
    ``P = I[:, perm]``.

    ``blocks`` holds the 1×1 and 2×2 diagonal blocks of D in order and
    ``starts`` the row index at which each begins.
    """

    perm: np.ndarray
    lower: np.ndarray
    blocks: list[np.ndarray]
    starts: list[int] = field(default_factory=list)

    @property
    def n(self) -> int:
        return self.lower.shape[0]

    @property
    def D(self) -> np.ndarray:
        D = np.zeros((self.n, self.n))
        for k, blk in zip(self.starts, self.blocks):
            s = blk.shape[0]
            D[k:k + s, k:k + s] = blk
        return D

    @property
    def P(self) -> np.ndarray:
        return np.eye(self.n)[:, self.perm]

    def reconstruct(self) -> np.ndarray:
        L = self.lower
        M = L @ self.D @ L.T
        out = np.empty_like(M)
        out[np.ix_(self.perm, self.perm)] = M
        return out

    def solve_block_diagonal(self, Y: np.ndarray) -> np.ndarray:
        """``D⁻¹ Y`` using 1×1 divisions and scaled 2×2 eliminations."""
        X = np.array(Y, dtype=float, copy=True)
        one_rows, one_vals, two_rows, two_vals = _block_arrays(self)
        if one_rows.size:
            X[one_rows] /= one_vals.reshape((-1,) + (1,) * (X.ndim - 1))
        if two_rows.size:
            shape = (-1,) + (1,) * (X.ndim - 1)
            a = two_vals[:, 0, 0].reshape(shape)
            b = two_vals[:, 1, 0].reshape(shape)
            c = two_vals[:, 1, 1].reshape(shape)
            y1 = X[two_rows] / b
            y2 = X[two_rows + 1] / b
            akm1 = a / b
            ak = c / b
            denom = akm1 * ak - 1.0
            X[two_rows] = (ak * y1 - y2) / denom
            X[two_rows + 1] = (akm1 * y2 - y1) / denom
        return X

    def solve(self, B: np.ndarray) -> np.ndarray:
        """Solve ``A X = B``."""
        B = np.asarray(B, dtype=float)
        Y = solve_triangular(self.lower, B[self.perm], lower=True, unit_diagonal=True,
                             check_finite=False)
        Y = self.solve_block_diagonal(Y)
        Y = solve_triangular(self.lower, Y, lower=True, trans="T", unit_diagonal=True,
                             check_finite=False)
        X = np.empty_like(Y)
        X[self.perm] = Y
        return X


def _block_arrays(f: LDLFactors):
    one_rows, one_vals, two_rows, two_vals = [], [], [], []
    for k, blk in zip(f.starts, f.blocks):
        if blk.shape[0] == 1:
            one_rows.append(k)
            one_vals.append(blk[0, 0])
        else:
            two_rows.append(k)
            two_vals.append(blk)
    return (np.array(one_rows, dtype=int), np.array(one_vals, dtype=float),
            np.array(two_rows, dtype=int), np.array(two_vals, dtype=float).reshape(-1, 2, 2))


def _sym_swap(W: np.ndarray, L: np.ndarray, perm: np.ndarray, i: int, j: int, k: int) -> None:
    W[[i, j], :] = W[[j, i], :]
    W[:, [i, j]] = W[:, [j, i]]
    L[[i, j], :k] = L[[j, i], :k]
    perm[[i, j]] = perm[[j, i]]


def ldl_pivoted(A, alpha: float = BK_ALPHA) -> LDLFactors:
    """Bunch–Kaufman factorization ``A = P L D Lᵀ Pᵀ`` of a symmetric matrix.

    Args:
      A: symmetric n×n matrix; it is symmetrized as ``(A + Aᵀ)/2`` first.
      alpha: Bunch–Kaufman growth threshold.

    Returns:
      LDLFactors with unit lower triangular ``L`` and 1×1/2×2 blocks.

    Raises:
      SingularityError: if a pivot column is exactly zero.
    """
    A = as_matrix(A)
    n = A.shape[0]
    if A.shape != (n, n):
        raise DimensionError(f"ldl_pivoted needs a square matrix, got {A.shape}")
    scale = np.linalg.norm(A)
    if np.linalg.norm(A - A.T) > 1e-12 * max(scale, EPS):
        raise StructureError("ldl_pivoted input is not symmetric")
    W = 0.5 * (A + A.T)
    L = np.eye(n)
    perm = np.arange(n)
    blocks: list[np.ndarray] = []
    starts: list[int] = []

    k = 0
    while k < n:
        absakk = abs(W[k, k])
        if k + 1 < n:
            col = np.abs(W[k + 1:, k])
            imax = k + 1 + int(np.argmax(col))
            colmax = col[imax - k - 1]
        else:
            imax, colmax = k, 0.0
        if max(absakk, colmax) == 0.0:
            raise SingularityError(f"ldl_pivoted: zero pivot column at index {k}")

        step, kp = 1, k
        if absakk < alpha * colmax:
            row = np.abs(W[imax, k:])
            row[imax - k] = 0.0
            rowmax = row.max()
            if absakk * rowmax >= alpha * colmax * colmax:
                pass
            elif abs(W[imax, imax]) >= alpha * rowmax:
                kp = imax
            else:
                kp, step = imax, 2
        kk = k + step - 1
        if kp != kk:
            _sym_swap(W, L, perm, kk, kp, k)

        if step == 1:
            d = W[k, k]
            c = W[k + 1:, k].copy()
            if c.size:
                W[k + 1:, k + 1:] -= np.outer(c, c) / d
                L[k + 1:, k] = c / d
            blocks.append(np.array([[d]]))
        else:
            D = W[k:k + 2, k:k + 2].copy()
            D[0, 1] = D[1, 0]
            C = W[k + 2:, k:k + 2].copy()
            if C.shape[0]:
                tmp = LDLFactors(np.arange(2), np.eye(2), [D], [0])
                Lb = tmp.solve_block_diagonal(C.T).T
                U = Lb @ C.T
                W[k + 2:, k + 2:] -= 0.5 * (U + U.T)
                L[k + 2:, k:k + 2] = Lb
            blocks.append(D)
        starts.append(k)
        k += step

    return LDLFactors(perm, L, blocks, starts)


def block_diag_eig(blocks: Sequence[np.ndarray]) -> tuple[np.ndarray, np.ndarray]:
    """Eigendecomposition ``D = V diag(lam) Vᵀ`` of a 1×1/2×2 block-diagonal D.

    2×2 blocks use a closed-form Jacobi rotation, so ``V`` keeps the block
    structure of ``D``.
    """
    n = sum(b.shape[0] for b in blocks)
    V = np.zeros((n, n))
    lam = np.zeros(n)
    k = 0
    for blk in blocks:
        if blk.shape == (1, 1):
            V[k, k] = 1.0
            lam[k] = blk[0, 0]
            k += 1
            continue
        if blk.shape != (2, 2):
            raise DimensionError(f"blocks must be 1x1 or 2x2, got {blk.shape}")
        p, q, r = blk[0, 0], 0.5 * (blk[0, 1] + blk[1, 0]), blk[1, 1]
        if q == 0.0:
            c, s, t = 1.0, 0.0, 0.0
        else:
            # smaller root of t² + 2θt − 1 = 0 with θ = d/q, written without
            # forming θ so a tiny q cannot overflow
            d = 0.5 * (r - p)
            t = q / (d + np.copysign(np.hypot(d, q), d))
            c = 1.0 / np.hypot(1.0, t)
            s = t * c
        V[k:k + 2, k:k + 2] = [[c, s], [-s, c]]
        lam[k] = p - t * q
        lam[k + 1] = r + t * q
        k += 2
    return V, lam


@dataclass
class IndefQRFactors:
    """``A = H R Pᵀ`` with ``Hᵀ Σ H = Σ̂``; ``P = I[:, perm]``."""

    H: np.ndarray
    R: np.ndarray
    perm: np.ndarray
    sigma_hat: Signature

    @property
    def P(self) -> np.ndarray:
        return np.eye(self.R.shape[0])[:, self.perm]

    def reconstruct(self) -> np.ndarray:
        HR = self.H @ self.R
        out = np.empty_like(HR)
        out[:, self.perm] = HR
        return out


def indefinite_qr_via_ldl(A, sigma: SignatureLike, *, trunc: float = EIG_TRUNCATION,
                          with_r: bool = True) -> IndefQRFactors:
    """Indefinite QR ``A P = H R`` through one pivoted LDLᵀ of ``AᵀΣA``.

    With ``AᵀΣA = P L D Lᵀ Pᵀ`` and ``D = V Λ Vᵀ``, the factors are
    ``R = |Λ|^{1/2} Vᵀ Lᵀ`` and ``H = A P L⁻ᵀ V |Λ|^{-1/2}``, the latter
    computed with a unit-triangular solve.

    Raises:
      SingularityError: if some ``|λ| ≤ trunc · max|λ|``.
    """
    A = as_matrix(A)
    m, n = A.shape
    if m < n:
        raise DimensionError(f"indefinite QR needs m >= n, got {A.shape}")
    sig = as_signature(sigma, m)
    G = A.T @ sig.left(A)
    f = ldl_pivoted(0.5 * (G + G.T))
    V, lam = block_diag_eig(f.blocks)
    alam = np.abs(lam)
    amax = alam.max() if n else 0.0
    if n and (amax == 0.0 or alam.min() <= trunc * amax):
        raise SingularityError(
            f"AᵀΣA numerically singular: min|λ|/max|λ| = {alam.min() / max(amax, EPS):.3e}")
    root = np.sqrt(alam)
    AP = A[:, f.perm]
    # (AP) L⁻ᵀ = (L⁻¹ (AP)ᵀ)ᵀ
    Y = solve_triangular(f.lower, AP.T, lower=True, unit_diagonal=True, check_finite=False).T
    H = (Y @ V) / root[None, :]
    R = root[:, None] * (V.T @ f.lower.T) if with_r else np.empty((n, n))
    return IndefQRFactors(H, R, f.perm, Signature(np.where(lam > 0, 1.0, -1.0)))


class LDLIQR2Result(NamedTuple):
    H: np.ndarray
    sigma_hat: Signature
    R1: np.ndarray
    P1: np.ndarray
    R2: np.ndarray
    P2: np.ndarray

    def reconstruct(self) -> np.ndarray:
        """``H R2 P2ᵀ R1 P1ᵀ``; P1, P2 are stored as index permutations."""
        n = self.R1.shape[0]
        P1 = np.eye(n)[:, self.P1]
        P2 = np.eye(n)[:, self.P2]
        return self.H @ self.R2 @ P2.T @ self.R1 @ P1.T


def ldliqr2(A, sigma: SignatureLike, *, trunc: float = EIG_TRUNCATION,
            with_r: bool = True) -> LDLIQR2Result:
    """(Σ, Σ̂)-orthogonal basis of range(A) from two LDLᵀ-based passes.

    The second pass re-orthogonalizes the first pass's basis against Σ;
    the output signature is the sign pattern of the second pass.
    """
    A = as_matrix(A)
    sig = as_signature(sigma, A.shape[0])
    first = indefinite_qr_via_ldl(A, sig, trunc=trunc, with_r=with_r)
    second = indefinite_qr_via_ldl(first.H, sig, trunc=trunc, with_r=with_r)
    return LDLIQR2Result(second.H, second.sigma_hat, first.R, first.perm,
                         second.R, second.perm)


def balanced_basis(H, sigma: SignatureLike) -> tuple[np.ndarray, Signature]:
    """Smallest-norm (Σ, Σ̂)-orthogonal basis of range(H).

    A Σ̂-orthogonal basis is fixed only up to hyperbolic rotations, and the
    triangular ones can have huge norm.  Diagonalizing the Σ-Gram matrix
    of a Euclidean orthonormal basis ``Q`` gives ``Q U |Λ|^{-1/2}``, whose
    2-norm ``max |λ|^{-1/2}`` is minimal over all such bases.

    Raises:
      SingularityError: range(H) contains a Σ-neutral vector.
    """
    H = as_matrix(H, "H")
    m, n = H.shape
    sig = as_signature(sigma, m)
    Q, _ = np.linalg.qr(H)
    G = Q.T @ sig.left(Q)
    lam, U = np.linalg.eigh(0.5 * (G + G.T))
    if n and np.abs(lam).min() == 0.0:
        raise SingularityError("range is degenerate for the indefinite inner product")
    Hb = (Q @ U) / np.sqrt(np.abs(lam))[None, :]
    return Hb, Signature(np.where(lam > 0, 1.0, -1.0))


def hyperbolic_givens_params(a: float, b: float) -> tuple[float, float, float, bool]:
    """``(c, s, d, swapped)`` with ``[[c, -s], [-s, c]] (a, b)ᵀ = (d, 0)ᵀ``."""
    aa, ab = abs(a), abs(b)
    r = np.sqrt(abs(aa - ab) * (aa + ab))
    sa = 1.0 if a >= 0 else -1.0
    sb = 1.0 if b >= 0 else -1.0
    c = aa / r
    s = sa * sb * ab / r
    return c, s, c * a - s * b, ab > aa


def hyperbolic_givens(a: float, b: float, sigma_a: float = 1.0, sigma_b: float = -1.0,
                      *, breakdown_tol: float = BREAKDOWN_TOL) -> tuple[np.ndarray, bool]:
    """Rotation ``G`` with ``G⁻¹ (a, b)ᵀ = (d, 0)ᵀ``.

    For ``σa ≠ σb`` this is a hyperbolic rotation: ``Gᵀ Σ₂ G = Σ₂`` when
    ``|a| > |b|``; otherwise the two signs trade places and ``swapped`` is
    True.  For ``σa = σb`` an orthogonal Givens rotation is returned.

    Raises:
      HyperbolicBreakdownError: if ``||a|² − |b|²| < breakdown_tol (a² + b²)``.
    """
    if sigma_a == sigma_b:
        r = np.hypot(a, b)
        if r == 0.0:
            return np.eye(2), False
        c, s = a / r, b / r
        return np.array([[c, -s], [s, c]]), False
    a2b2 = a * a + b * b
    if a2b2 == 0.0 or abs(abs(a) - abs(b)) * (abs(a) + abs(b)) < breakdown_tol * a2b2:
        raise HyperbolicBreakdownError(f"hyperbolic Givens breakdown: |a|≈|b| (a={a:g}, b={b:g})")
    c, s, _, swapped = hyperbolic_givens_params(a, b)
    # inverse of [[c, -s], [-s, c]], whose determinant is c² − s² = ±1
    G = np.array([[c, s], [s, c]])
    return (-G if swapped else G), swapped


def _householder(Rw: np.ndarray, Q: np.ndarray, rows: np.ndarray, k: int) -> None:
    x = Rw[rows, k]
    norm = np.linalg.norm(x)
    if norm == 0.0 or norm == abs(x[0]) and np.count_nonzero(x[1:]) == 0:
        return
    alpha = -norm if x[0] >= 0 else norm
    v = x.copy()
    v[0] -= alpha
    beta = 2.0 / (v @ v)
    block = Rw[rows, k:]
    Rw[rows, k:] = block - np.outer(beta * v, v @ block)
    Qc = Q[:, rows]
    Q[:, rows] = Qc - np.outer(Qc @ v, beta * v)
    Rw[rows[0], k] = alpha
    Rw[rows[1:], k] = 0.0


def hyperbolic_qr_elimination(A, sigma: SignatureLike, *,
                              breakdown_tol: float = BREAKDOWN_TOL) -> IndefQRFactors:
    """Thin hyperbolic QR ``A = H R`` by column elimination.

    For every column, one Householder reflector compresses the rows of sign
    +1 into their first row, another does the same for sign −1, and a
    hyperbolic Givens rotation merges the two survivors.  Signatures trade
    places whenever the rotation swaps; ``R`` gets a positive diagonal.

    Raises:
      HyperbolicBreakdownError: tagged with the failing ``column``.
    """
    A = as_matrix(A)
    m, n = A.shape
    if m < n:
        raise DimensionError(f"hyperbolic QR needs m >= n, got {A.shape}")
    sig = as_signature(sigma, m).signs.copy()
    Rw = A.copy()
    Q = np.eye(m)
    rows_all = np.arange(m)

    for k in range(n):
        active = rows_all[k:]
        pos = active[sig[k:] > 0]
        neg = active[sig[k:] < 0]
        for rows in (pos, neg):
            if rows.size > 1:
                _householder(Rw, Q, rows, k)
        p = int(pos[0]) if pos.size else None
        q = int(neg[0]) if neg.size else None

        if p is not None and q is not None and Rw[q, k] != 0.0:
            a, b = Rw[p, k], Rw[q, k]
            try:
                G, swapped = hyperbolic_givens(a, b, sig[p], sig[q], breakdown_tol=breakdown_tol)
            except HyperbolicBreakdownError as err:
                raise HyperbolicBreakdownError(
                    f"column {k}: {err.args[0]}", column=k) from None
            c, s, d, _ = hyperbolic_givens_params(a, b)
            Ginv = np.array([[c, -s], [-s, c]])
            pq = [p, q]
            Rw[pq, k:] = Ginv @ Rw[pq, k:]
            Rw[p, k], Rw[q, k] = d, 0.0
            Q[:, pq] = Q[:, pq] @ G
            if swapped:
                sig[p], sig[q] = sig[q], sig[p]
            piv = p
        else:
            piv = p if p is not None else q

        if piv != k:
            Rw[[k, piv], :] = Rw[[piv, k], :]
            Q[:, [k, piv]] = Q[:, [piv, k]]
            sig[k], sig[piv] = sig[piv], sig[k]
        if Rw[k, k] == 0.0:
            raise HyperbolicBreakdownError(f"column {k}: zero pivot", column=k)
        if Rw[k, k] < 0.0:
            Rw[k, k:] *= -1.0
            Q[:, k] *= -1.0

    return IndefQRFactors(Q[:, :n].copy(), np.triu(Rw[:n, :n]), np.arange(n), Signature(sig[:n]))
