"""Generalized polar decomposition A = W S with respect to signature matrices.

The ΣDWH iteration

    X_{k+1} = X_k (a_k I + b_k X_k^★ X_k) (I + c_k X_k^★ X_k)^{-1},  X_0 = s A,

with ``X^★ = Σn Xᵀ Σm``, converges to the (Σm, Σn)-orthogonal factor W.  The
weights come from the scalar lower bound ``ℓ_k`` exactly as in QDWH.  Every
back-end evaluates the same step; they differ only in how the inverse is
avoided or applied:

``backslash``       plain LU solve of the formula above
``ldl``             pivoted LDLᵀ of ``Σn + c XᵀΣm X``
``hyperbolic_qr``   (Σ, Σ̂)-orthogonal basis of ``[√c X; I]`` by elimination
``ldliqr2``         the same basis from two LDLᵀ passes
``plg``             permuted graph basis of ``[I; √c X]``
``plg_lagrangian``  permuted Lagrangian graph basis of ``[Σ; √c X]``
"""

from __future__ import annotations

import math
import time
import warnings
from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np
import scipy.linalg
from scipy.linalg import lapack

from .errors import (
    ConvergenceError,
    DimensionError,
    DomainError,
    GPDError,
    RankError,
    SingularityError,
    StructureError,
)
from .graph_basis import (
    DEFAULT_TAU,
    graph_basis_from_graph,
    lagrangian_basis_from_graph,
)
from .indefinite import balanced_basis, hyperbolic_qr_elimination, ldl_pivoted, ldliqr2
from .sigspaces import (
    EPS,
    Signature,
    SignatureLike,
    as_matrix,
    as_signature,
    is_pseudosymmetric,
)

VARIANTS = ("backslash", "ldl", "hyperbolic_qr", "ldliqr2", "plg", "plg_lagrangian")
ELL_FLOOR = 1e-16
SVD_SCALING_MAX_DIM = 512


# -- scalar weights -----------------------------------------------------------

def dwh_weights(ell: float) -> tuple[float, float, float]:
    """Dynamic Halley weights ``(a, b, c)`` for the lower bound ``ell``."""
    ell = float(ell)
    if not 0.0 < ell <= 1.0:
        raise DomainError(f"ell must lie in (0, 1], got {ell!r}")
    l2 = ell * ell
    d = np.cbrt(4.0 * (1.0 - l2) / (l2 * l2))
    sqd = math.sqrt(1.0 + d)
    a = sqd + 0.5 * math.sqrt(8.0 - 4.0 * d + 8.0 * (2.0 - l2) / (l2 * sqd))
    b = (a - 1.0) ** 2 / 4.0
    c = a + b - 1.0
    return a, b, c


def rational_map(x, a: float, b: float, c: float):
    """``g(x) = x (a + b x²) / (1 + c x²)``."""
    x2 = x * x
    return x * (a + b * x2) / (1.0 + c * x2)


def scale_estimates(A, method: str = "svd_exact") -> tuple[float, float]:
    """Scaling ``s ≤ 1/σmax(A)`` and lower bound ``ell0 ≈ s σmin(A)``.

    ``svd_exact`` takes both from a full SVD.  ``estimate`` uses
    ``s = 1/‖A‖_F`` and a LAPACK 1-norm reciprocal condition estimate
    (divided by the dimension so it stays below ``σmin/‖A‖_F``).
    """
    A = as_matrix(A)
    if method == "svd_exact":
        sv = np.linalg.svd(A, compute_uv=False)
        if sv.size == 0 or sv[-1] == 0.0:
            raise SingularityError("scale_estimates: matrix is singular (σmin = 0)")
        return 1.0 / sv[0], float(np.clip(sv[-1] / sv[0], ELL_FLOOR, 1.0))
    if method != "estimate":
        raise DomainError(f"unknown scaling method {method!r}")
    fro = np.linalg.norm(A)
    if fro == 0.0:
        raise SingularityError("scale_estimates: zero matrix")
    m, n = A.shape
    if m == n:
        lu, piv, info = lapack.dgetrf(A)
        if info > 0:
            return 1.0 / fro, ELL_FLOOR
        rcond, _ = lapack.dgecon(lu, np.abs(A).sum(axis=0).max(), norm="1")
    else:
        R = np.linalg.qr(A, mode="r")
        rcond, _ = lapack.dtrcon(R, norm="1", uplo="U", diag="N")
    return 1.0 / fro, float(np.clip(rcond / n, ELL_FLOOR, 1.0))


# -- configuration and results -------------------------------------------------

@dataclass
class IterConfig:
    """Settings shared by the ΣDWH and Newton drivers.

    ``s``/``ell0`` left as None are taken from :func:`scale_estimates`.
    """

    variant: str = "ldliqr2"
    s: float | None = None
    ell0: float | None = None
    tau: float = DEFAULT_TAU
    max_iter: int = 100
    eps: float = 2.0 ** -52
    scaling: str | None = None
    # hyperbolic_qr / ldliqr2: replace H by the minimal-norm basis of its range
    rebalance: bool = True
    # eigenvalue truncation inside the LDL-based QR; 0 rejects exact zeros only
    eig_trunc: float = 0.0

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise DomainError(f"unknown variant {self.variant!r}; choose from {VARIANTS}")
        if self.s is not None and not self.s > 0:
            raise DomainError("s must be positive")
        if self.ell0 is not None and not 0.0 < self.ell0 <= 1.0:
            raise DomainError("ell0 must lie in (0, 1]")
        if self.max_iter < 1:
            raise DomainError("max_iter must be at least 1")
        if self.tau <= 1.0:
            raise DomainError("tau must exceed 1")

    @property
    def dwh_tol(self) -> float:
        return (5.0 * self.eps) ** (1.0 / 3.0)

    @property
    def newton_tol(self) -> float:
        return math.sqrt(2.0 * self.eps)


@dataclass
class StepRecord:
    k: int
    a: float
    b: float
    c: float
    ell: float
    ell_next: float
    step_norm: float
    wall_ms: float
    mu: float = float("nan")


@dataclass
class IterTrace:
    steps: list[StepRecord] = field(default_factory=list)
    converged: bool = False

    @property
    def iterations(self) -> int:
        return len(self.steps)

    def ells(self) -> np.ndarray:
        return np.array([r.ell for r in self.steps])


@dataclass
class PolarResult:
    W: np.ndarray
    S: np.ndarray
    trace: IterTrace
    residual: float
    orth_defect: float
    pseudosym_defect: float
    # ‖W S₀ − A‖/‖A‖ with S₀ = Σn Wᵀ Σm A before symmetrization
    residual_unsym: float = float("nan")

    @property
    def converged(self) -> bool:
        return self.trace.converged

    @property
    def iterations(self) -> int:
        return self.trace.iterations


def recover_self_adjoint(A, W, sigma_m: SignatureLike, sigma_n: SignatureLike) -> np.ndarray:
    """``S = Σn Wᵀ Σm A`` made exactly Σn-self-adjoint by averaging."""
    A = as_matrix(A)
    W = as_matrix(W, "W")
    if A.shape != W.shape:
        raise DimensionError(f"A {A.shape} and W {W.shape} differ in shape")
    sm = as_signature(sigma_m, A.shape[0], "Σm")
    sn = as_signature(sigma_n, A.shape[1], "Σn")
    S = sn.left(W.T @ sm.left(A))
    return 0.5 * (S + sn.left(sn.right(S.T)))


def _result(A, W, sm: Signature, sn: Signature, trace: IterTrace) -> PolarResult:
    n = A.shape[1]
    S0 = sn.left(W.T @ sm.left(A))
    S = 0.5 * (S0 + sn.left(sn.right(S0.T)))
    Anorm = np.linalg.norm(A)
    resid = np.linalg.norm(W @ S - A) / Anorm
    resid0 = np.linalg.norm(W @ S0 - A) / Anorm
    G = sn.left(W.T @ sm.left(W))
    G[np.diag_indices(n)] -= 1.0
    Snorm = np.linalg.norm(S)
    psd = np.linalg.norm(S - sn.left(sn.right(S.T))) / (Snorm if Snorm > 0 else 1.0)
    return PolarResult(W, S, trace, float(resid), float(np.linalg.norm(G)), float(psd),
                       float(resid0))


# -- ΣDWH back-ends -----------------------------------------------------------
# Each returns X (I + c X^★X)^{-1}; the driver forms the weighted update.

def _inv_ldl(X, c, sm, sn, cfg):
    n = X.shape[1]
    Z = c * (X.T @ sm.left(X))
    Z[np.diag_indices(n)] += sn.signs
    f = ldl_pivoted(0.5 * (Z + Z.T))
    # X Z⁻¹ Σn
    return sn.right(f.solve(X.T).T)


def _hqdwh_inv(H, sigma_hat, m, sm, sn, c, cfg):
    if cfg.rebalance:
        H, sigma_hat = balanced_basis(H, sm.concat(sn))
    H1, H2 = H[:m], H[m:]
    return sn.right(sigma_hat.right(H1) @ H2.T) / math.sqrt(c)


def _inv_hyperbolic_qr(X, c, sm, sn, cfg):
    m, n = X.shape
    B = np.vstack([math.sqrt(c) * X, np.eye(n)])
    f = hyperbolic_qr_elimination(B, sm.concat(sn))
    return _hqdwh_inv(f.H, f.sigma_hat, m, sm, sn, c, cfg)


def _inv_ldliqr2(X, c, sm, sn, cfg):
    m, n = X.shape
    B = np.vstack([math.sqrt(c) * X, np.eye(n)])
    f = ldliqr2(B, sm.concat(sn), trunc=cfg.eig_trunc, with_r=False)
    return _hqdwh_inv(f.H, f.sigma_hat, m, sm, sn, c, cfg)


def _inv_plg(X, c, sm, sn, cfg):
    m, n = X.shape
    rc = math.sqrt(c)
    g = graph_basis_from_graph(rc * X, cfg.tau)
    sig2 = sn.concat(sm).signs
    shat_n = sig2[g.selector[:n]]
    shat_m = sig2[g.selector[n:]]
    Wh = g.xhat
    M = Wh.T @ (shat_m[:, None] * Wh)
    M[np.diag_indices(n)] += shat_n
    f = ldl_pivoted(0.5 * (M + M.T))
    V1, V2 = g.split()
    return sn.right(V2 @ f.solve(V1.T)) / rc


def _inv_plg_lagrangian(X, c, sm, sn, cfg):
    n = X.shape[0]
    rc = math.sqrt(c)
    # span [Σ; √c X] = span [I; √c X Σ]
    XS = sn.right(X)
    g = lagrangian_basis_from_graph(rc * 0.5 * (XS + XS.T), cfg.tau)
    Wh = g.xhat
    M = Wh @ sn.left(Wh)
    M[np.diag_indices(n)] += sn.signs
    f = ldl_pivoted(0.5 * (M + M.T))
    V1, V2 = g.split()
    return (V2 @ f.solve(V1.T)) / rc


_INVERSE_FORMS: dict[str, Callable] = {
    "ldl": _inv_ldl,
    "hyperbolic_qr": _inv_hyperbolic_qr,
    "ldliqr2": _inv_ldliqr2,
    "plg": _inv_plg,
    "plg_lagrangian": _inv_plg_lagrangian,
}


def _step_backslash(X, a, b, c, sm, sn):
    n = X.shape[1]
    Zs = sn.left(X.T @ sm.left(X))
    num = b * Zs
    num[np.diag_indices(n)] += a
    den = c * Zs
    den[np.diag_indices(n)] += 1.0
    # X num den⁻¹ via denᵀ Yᵀ = (X num)ᵀ; ill-conditioning is expected here
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", scipy.linalg.LinAlgWarning)
        return scipy.linalg.solve(den.T, (X @ num).T, check_finite=False).T


def _dwh_step(X, a, b, c, sm, sn, cfg):
    if cfg.variant == "backslash":
        return _step_backslash(X, a, b, c, sm, sn)
    Y = _INVERSE_FORMS[cfg.variant](X, c, sm, sn, cfg)
    e = b / c
    Xn = e * X + (a - e) * Y
    if cfg.variant == "plg_lagrangian":
        Xn = 0.5 * (Xn + sn.left(sn.right(Xn.T)))
    return Xn


def _initial_scaling(A, cfg: IterConfig) -> tuple[float, float]:
    s, ell = cfg.s, cfg.ell0
    if s is None or ell is None:
        method = cfg.scaling or ("svd_exact" if max(A.shape) <= SVD_SCALING_MAX_DIM else "estimate")
        s_est, ell_est = scale_estimates(A, method)
        s = s_est if s is None else s
        ell = ell_est if ell is None else ell
    return s, float(np.clip(ell, ELL_FLOOR, 1.0))


def sigma_dwh(A, sigma_m: SignatureLike, sigma_n: SignatureLike,
              cfg: IterConfig | None = None, **overrides) -> PolarResult:
    """Canonical generalized polar decomposition by the ΣDWH iteration.

    Args:
      A: m×n matrix, m ≥ n, of full column rank.
      sigma_m, sigma_n: signatures of the row and column spaces.
      cfg: iteration settings; keyword overrides are applied on top.

    Returns:
      PolarResult; ``converged`` is False if ``max_iter`` was reached.

    Raises:
      GPDError: back-end failure, with ``step`` set to the iteration index.
    """
    cfg = replace(cfg or IterConfig(), **overrides) if overrides else (cfg or IterConfig())
    A = as_matrix(A)
    m, n = A.shape
    if m < n:
        raise DimensionError(f"ΣDWH needs m >= n, got {A.shape}")
    sm = as_signature(sigma_m, m, "Σm")
    sn = as_signature(sigma_n, n, "Σn")
    if not np.any(A):
        raise RankError("zero matrix has no canonical polar decomposition with W orthogonal")
    if cfg.variant == "plg_lagrangian":
        if m != n or sm != sn:
            raise StructureError("plg_lagrangian needs a square A and Σm = Σn")
        if not is_pseudosymmetric(A, sn, 1e-12):
            raise StructureError("plg_lagrangian needs a pseudosymmetric A")

    s, ell = _initial_scaling(A, cfg)
    X = s * A
    trace = IterTrace()
    tol = cfg.dwh_tol
    for k in range(cfg.max_iter):
        a, b, c = dwh_weights(ell)
        t0 = time.perf_counter()
        try:
            Xn = _dwh_step(X, a, b, c, sm, sn, cfg)
        except GPDError as err:
            raise err.at_step(k)
        if not np.all(np.isfinite(Xn)):
            raise SingularityError("iterate is no longer finite").at_step(k)
        ell_next = float(min(1.0, rational_map(ell, a, b, c)))
        diff = float(np.linalg.norm(Xn - X))
        trace.steps.append(StepRecord(k, a, b, c, ell, ell_next, diff,
                                      1e3 * (time.perf_counter() - t0)))
        X, ell = Xn, ell_next
        if diff <= tol:
            trace.converged = True
            break
    return _result(A, X, sm, sn, trace)


# -- Newton baselines ---------------------------------------------------------

def _newton(A, sigma, cfg, mu_rule) -> PolarResult:
    A = as_matrix(A)
    N = A.shape[0]
    if A.shape != (N, N):
        raise DimensionError(f"Newton iterations need a square matrix, got {A.shape}")
    sig = as_signature(sigma, N)
    X = A.copy()
    trace = IterTrace()
    eye = np.eye(N)
    for k in range(cfg.max_iter):
        t0 = time.perf_counter()
        lu, piv, info = lapack.dgetrf(X)
        if info != 0:
            raise SingularityError("singular Newton iterate").at_step(k)
        logdet = float(np.sum(np.log(np.abs(np.diag(lu)))))
        mu = mu_rule(k, logdet / N)
        XinvT, _ = lapack.dgetrs(lu, piv, eye, trans=1)
        Xn = 0.5 * (mu * X + sig.left(sig.right(XinvT)) / mu)
        if not np.all(np.isfinite(Xn)):
            raise SingularityError("Newton iterate is no longer finite").at_step(k)
        diff = float(np.linalg.norm(Xn - X))
        nan = float("nan")
        trace.steps.append(StepRecord(k, nan, nan, nan, nan, nan, diff,
                                      1e3 * (time.perf_counter() - t0), mu))
        X = Xn
        if diff <= cfg.newton_tol:
            trace.converged = True
            break
    return _result(A, X, sig, sig, trace)


def newton_determinantal(A, sigma: SignatureLike, cfg: IterConfig | None = None) -> PolarResult:
    """Scaled Newton iteration with ``μ_k = |det X_k|^{-1/N}`` (log-space)."""
    cfg = cfg or IterConfig()
    return _newton(A, sigma, cfg, lambda k, mean_log: math.exp(-mean_log))


def newton_suboptimal(A, sigma: SignatureLike, cfg: IterConfig | None = None, *,
                      bounds: tuple[float, float] | None = None) -> PolarResult:
    """Scaled Newton iteration with sub-optimal scaling.

    ``bounds = (a0, b0)`` bracket the eigenvalue moduli of the self-adjoint
    factor (``a0 ≥ σmax``, ``b0 ≤ σmin``); by default they come from
    :func:`scale_estimates`.  The bracket is mapped through the scalar Newton
    step: ``μ_k = (a_k b_k)^{-1/2}``, ``a_{k+1} = (√(a_k/b_k) + √(b_k/a_k))/2``,
    ``b_{k+1} = 1``.
    """
    cfg = cfg or IterConfig()
    if bounds is None:
        A = as_matrix(A)
        s, ell = _initial_scaling(A, cfg)
        bounds = (1.0 / s, ell / s)
    state = list(bounds)

    def rule(k, _mean_log):
        a, b = state
        mu = 1.0 / math.sqrt(a * b)
        state[0] = 0.5 * (math.sqrt(a / b) + math.sqrt(b / a))
        state[1] = 1.0
        return mu

    return _newton(A, sigma, cfg, rule)


# -- matrix sign function -------------------------------------------------------

def matrix_sign(A, sigma: SignatureLike, cfg: IterConfig | None = None, **overrides) -> np.ndarray:
    """``sign(A)`` of a Σ-pseudosymmetric matrix, which equals its polar factor W.

    Raises:
      StructureError: A is not pseudosymmetric to 1e-12.
      ConvergenceError: the iteration hit ``max_iter``.
    """
    A = as_matrix(A)
    if A.shape[0] != A.shape[1]:
        raise DimensionError(f"matrix_sign needs a square matrix, got {A.shape}")
    sig = as_signature(sigma, A.shape[0])
    if not is_pseudosymmetric(A, sig, 1e-12):
        raise StructureError("matrix_sign: A is not pseudosymmetric with respect to Σ")
    res = sigma_dwh(A, sig, sig, cfg, **overrides)
    if not res.converged:
        raise ConvergenceError(f"ΣDWH did not converge in {res.iterations} steps", res)
    return res.W
