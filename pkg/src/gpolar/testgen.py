"""Seeded test-matrix families.

Each instance draws from its own Philox stream keyed by
``(family, n, k, seed)``, so instances are reproducible across platforms
and independent of generation order.
"""

from __future__ import annotations

import math
import zlib
from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .sigspaces import Signature

FAMILIES = ("example1", "example1_definite", "example2")
PHASE_MARGIN = 1e-3


@dataclass(frozen=True)
class GeneratedInstance:
    A: np.ndarray
    sigma: Signature
    family: str
    kappa_target: float
    seed: int
    W_true: np.ndarray | None = None
    S_true: np.ndarray | None = None


def instance_rng(family: str, n: int, k: float, seed: int) -> np.random.Generator:
    """Independent Philox stream for one instance."""
    if family not in FAMILIES:
        raise DomainError(f"unknown family {family!r}")
    if seed < 0 or seed >= 2 ** 64:
        raise DomainError("seed must be a 64-bit unsigned integer")
    k_bits = int(np.float64(k).view(np.uint64))
    key = [zlib.crc32(family.encode()), int(n), k_bits & 0xFFFFFFFF, k_bits >> 32,
           seed & 0xFFFFFFFF, seed >> 32]
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(key)))


def random_orthogonal(n: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-distributed orthogonal matrix (Gaussian QR with sign-fixed R)."""
    if n < 1:
        raise DomainError("n must be at least 1")
    Q, R = np.linalg.qr(rng.standard_normal((n, n)))
    d = np.sign(np.diag(R))
    d[d == 0] = 1.0
    return Q * d[None, :]


def _check_size(n, k):
    if int(n) != n or n < 1:
        raise DomainError(f"half-size n must be a positive integer, got {n!r}")
    if not (k >= 0 and math.isfinite(k)):
        raise DomainError(f"exponent k must be finite and nonnegative, got {k!r}")


def gen_example1(n: int, k: float, seed: int, definite: bool = False) -> GeneratedInstance:
    """``A = Σ Q D Qᵀ`` of size 2n with ``|D|`` linearly spaced on ``[1, 10^k]``.

    Signs of D alternate along the sorted sequence unless ``definite``.
    """
    _check_size(n, k)
    family = "example1_definite" if definite else "example1"
    rng = instance_rng(family, n, k, seed)
    N = 2 * n
    d = np.linspace(1.0, 10.0 ** k, N)
    if not definite:
        d[1::2] *= -1.0
    Q = random_orthogonal(N, rng)
    sigma = Signature.from_counts(n, n)
    SA = (Q * d[None, :]) @ Q.T
    SA = 0.5 * (SA + SA.T)
    return GeneratedInstance(sigma.left(SA), sigma, family, 10.0 ** k, seed)


def gen_example2(n: int, k: float, seed: int) -> GeneratedInstance:
    """``A = W S`` with known factors.

    S has eigenvalues ``r e^{±iφ}`` with ``|φ| < π/2`` and ``r`` uniform on
    ``[10^-⌊k/2⌋, 10^⌈k/2⌉]``; the two extreme moduli are pinned to the
    endpoints, so ``cond(S) = 10^k`` for n ≥ 2.  W is an orthogonal
    block-diagonal matrix times n hyperbolic rotations with angles uniform
    on ``[0, π/4]``.
    """
    _check_size(n, k)
    rng = instance_rng("example2", n, k, seed)
    lo, hi = 10.0 ** (-math.floor(k / 2)), 10.0 ** math.ceil(k / 2)
    r = rng.uniform(lo, hi, n)
    r[0] = lo
    if n > 1:
        r[-1] = hi
    lim = math.pi / 2 - PHASE_MARGIN
    phi = np.clip(rng.uniform(-math.pi / 2, math.pi / 2, n), -lim, lim)
    re, im = r * np.cos(phi), r * np.sin(phi)
    B = np.block([[np.diag(re), -np.diag(im)], [np.diag(im), np.diag(re)]])
    Q1, Q2, Q3, Q4 = (random_orthogonal(n, rng) for _ in range(4))
    Z = np.zeros((n, n))
    Q = np.block([[Q1, Z], [Z, Q2]])
    S_true = Q.T @ B @ Q
    omega = rng.uniform(0.0, math.pi / 4, n)
    C, Sh = np.diag(np.cosh(omega)), np.diag(np.sinh(omega))
    W_true = np.block([[Q3, Z], [Z, Q4]]) @ np.block([[C, Sh], [Sh, C]])
    sigma = Signature.from_counts(n, n)
    return GeneratedInstance(W_true @ S_true, sigma, "example2", 10.0 ** k, seed,
                             W_true=W_true, S_true=S_true)


def generate(family: str, n: int, k: float, seed: int) -> GeneratedInstance:
    if family == "example2":
        return gen_example2(n, k, seed)
    if family in ("example1", "example1_definite"):
        return gen_example1(n, k, seed, definite=family == "example1_definite")
    raise DomainError(f"unknown family {family!r}")
