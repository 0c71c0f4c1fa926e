"""Dense reference solutions used to check the iterations."""

from __future__ import annotations

import numpy as np

from .errors import DimensionError, IllPosedError, RankError
from .sigspaces import as_matrix

IMAG_AXIS_GAP = 1e-10


def sign_oracle_eig(A) -> np.ndarray:
    """Matrix sign function from a full eigendecomposition ``A = V Λ V⁻¹``.

    Raises:
      IllPosedError: an eigenvalue has ``|Re λ| < 1e-10``.
    """
    A = as_matrix(A)
    if A.shape[0] != A.shape[1]:
        raise DimensionError(f"sign needs a square matrix, got {A.shape}")
    lam, V = np.linalg.eig(A)
    if lam.size and np.abs(lam.real).min() < IMAG_AXIS_GAP:
        raise IllPosedError("eigenvalue too close to the imaginary axis; sign(A) is ill-posed")
    # V diag(sign) V⁻¹ via a solve against Vᵀ
    Ssgn = np.linalg.solve(V.T, (V * np.sign(lam.real)[None, :]).T).T
    return np.real_if_close(Ssgn, tol=1e6).real


def polar_oracle_svd(A) -> tuple[np.ndarray, np.ndarray]:
    """Standard polar factors ``A = U H`` from an SVD."""
    A = as_matrix(A)
    m, n = A.shape
    if m < n:
        raise DimensionError(f"polar oracle needs m >= n, got {A.shape}")
    P, sv, Qt = np.linalg.svd(A, full_matrices=False)
    if n and sv[-1] <= max(m, n) * np.finfo(float).eps * sv[0]:
        raise RankError("matrix is numerically rank deficient")
    U = P @ Qt
    H = (Qt.T * sv[None, :]) @ Qt
    return U, 0.5 * (H + H.T)
