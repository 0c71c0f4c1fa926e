"""Signature matrices and the indefinite inner products they induce.

A signature matrix ``Σ = diag(±1)`` is stored as its sign vector and never
materialized inside kernels: ``Σ @ A`` is a row scaling, ``A @ Σ`` a column
scaling.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Union

import numpy as np

from .errors import DimensionError, DomainError

EPS = float(np.finfo(float).eps)


def as_matrix(A, name: str = "A") -> np.ndarray:
    """Return ``A`` as a finite 2-D float64 array (copy only if needed)."""
    M = np.asarray(A, dtype=float)
    if M.ndim != 2:
        raise DimensionError(f"{name} must be 2-D, got shape {M.shape}")
    if not np.all(np.isfinite(M)):
        raise DomainError(f"{name} contains NaN or Inf entries")
    return M


@dataclass(frozen=True, eq=False)
class Signature:
    """Diagonal ±1 matrix held as a sign vector."""

    signs: np.ndarray

    def __post_init__(self):
        s = np.asarray(self.signs, dtype=float).ravel()
        if s.size and not np.all((s == 1.0) | (s == -1.0)):
            raise DomainError("signature entries must be exactly +1 or -1")
        s = s.copy()
        s.setflags(write=False)
        object.__setattr__(self, "signs", s)

    @classmethod
    def identity(cls, n: int) -> "Signature":
        return cls(np.ones(n))

    @classmethod
    def from_counts(cls, p: int, q: int) -> "Signature":
        """``diag(I_p, -I_q)``."""
        if p < 0 or q < 0:
            raise DomainError(f"signature counts must be nonnegative, got {p},{q}")
        return cls(np.concatenate([np.ones(p), -np.ones(q)]))

    def __len__(self) -> int:
        return self.signs.size

    def __eq__(self, other) -> bool:
        if not isinstance(other, Signature):
            return NotImplemented
        return np.array_equal(self.signs, other.signs)

    def __hash__(self):
        return hash(self.signs.tobytes())

    def __repr__(self) -> str:
        body = ",".join("+" if s > 0 else "-" for s in self.signs)
        return f"Signature([{body}])"

    @property
    def n_positive(self) -> int:
        return int(np.count_nonzero(self.signs > 0))

    @property
    def n_negative(self) -> int:
        return int(np.count_nonzero(self.signs < 0))

    def dense(self) -> np.ndarray:
        return np.diag(self.signs)

    def left(self, A: np.ndarray) -> np.ndarray:
        """``Σ @ A``."""
        return self.signs[:, None] * A

    def right(self, A: np.ndarray) -> np.ndarray:
        """``A @ Σ``."""
        return A * self.signs[None, :]

    def concat(self, other: "Signature") -> "Signature":
        """``diag(self, other)``."""
        return Signature(np.concatenate([self.signs, other.signs]))

    def take(self, index) -> "Signature":
        return Signature(self.signs[np.asarray(index)])

    def is_identity(self) -> bool:
        return bool(np.all(self.signs > 0))


SignatureLike = Union[Signature, Iterable[float], np.ndarray]


def as_signature(sig: SignatureLike, n: int | None = None, name: str = "Σ") -> Signature:
    if not isinstance(sig, Signature):
        sig = Signature(np.asarray(sig, dtype=float))
    if n is not None and len(sig) != n:
        raise DimensionError(f"{name} has size {len(sig)}, expected {n}")
    return sig


def adjoint_sig(A, sigma_m: SignatureLike, sigma_n: SignatureLike) -> np.ndarray:
    """(Σm, Σn)-adjoint ``Σn Aᵀ Σm`` of an m×n matrix."""
    A = as_matrix(A)
    m, n = A.shape
    sm = as_signature(sigma_m, m, "Σm")
    sn = as_signature(sigma_n, n, "Σn")
    return sn.signs[:, None] * A.T * sm.signs[None, :]


def _relative_test(defect: float, scale: float, tol: float) -> bool:
    if scale < EPS:
        return defect <= tol
    return defect <= tol * scale


def pseudosymmetry_defect(A, sigma: SignatureLike) -> float:
    """``‖A − ΣAᵀΣ‖_F``."""
    A = as_matrix(A)
    if A.shape[0] != A.shape[1]:
        raise DimensionError(f"pseudosymmetry needs a square matrix, got {A.shape}")
    return float(np.linalg.norm(A - adjoint_sig(A, sigma, sigma)))


def is_pseudosymmetric(A, sigma: SignatureLike, tol: float = 1e-14) -> bool:
    """True iff ``‖A − ΣAᵀΣ‖_F ≤ tol·‖A‖_F`` (absolute test for tiny A)."""
    A = as_matrix(A)
    return _relative_test(pseudosymmetry_defect(A, sigma), float(np.linalg.norm(A)), tol)


def orthogonality_defect(H, sigma_m: SignatureLike, sigma_hat: SignatureLike) -> float:
    """``‖Hᵀ Σm H − Σ̂‖_F`` for an m×n matrix H."""
    H = as_matrix(H, "H")
    m, n = H.shape
    sm = as_signature(sigma_m, m, "Σm")
    sh = as_signature(sigma_hat, n, "Σ̂")
    G = H.T @ sm.left(H)
    G[np.diag_indices(n)] -= sh.signs
    return float(np.linalg.norm(G))
