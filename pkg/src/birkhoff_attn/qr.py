"""Doubly stochastic matrices from orthogonal factors.

Squaring the entries of an orthogonal matrix gives row and column sums of
exactly one (each row and column is a unit vector), so Q from a QR
factorization yields a doubly stochastic matrix for free.  Q is computed by
modified Gram-Schmidt; the diagonal of R is a column norm and therefore
already non-negative, which fixes the sign convention.  Rank-deficient input
is handled by perturbing the original matrix with small seeded Gaussian noise
and restarting.
"""

from __future__ import annotations

import numpy as np

from .core import Dsm, as_dsm, as_square

_PIVOT_FLOOR = 1e-10   # residual column norm below this counts as rank deficiency
_NOISE_STD = 1e-7      # std of the entrywise restart perturbation
_MAX_RESTARTS = 5


def _mgs(m: np.ndarray) -> np.ndarray | None:
    """One modified Gram-Schmidt sweep; None when a pivot collapses.

    Each column is orthogonalized twice against the finished columns: the
    second pass costs little and keeps Q'Q near machine precision even when a
    residual barely clears the pivot floor.
    """
    n = m.shape[0]
    q = np.zeros_like(m)
    for j in range(n):
        v = m[:, j].copy()
        for _ in range(2):
            v -= q[:, :j] @ (q[:, :j].T @ v)
        pivot = np.linalg.norm(v)
        if pivot < _PIVOT_FLOOR:
            return None
        q[:, j] = v / pivot
    return q


def qr_orthonormalize(m, noise_seed: int | None = None) -> np.ndarray:
    """Orthogonal Q of a QR factorization with positive diagonal of R.

    When a pivot falls below the rank-deficiency floor, entrywise Gaussian
    noise (std 1e-7) drawn from ``noise_seed`` is added to the original
    matrix and the sweep restarts, at most five times.  A seed is required as
    soon as that path is taken, so deficiency-free inputs stay exactly
    reproducible without one.
    """
    m = as_square(m)
    q = _mgs(m)
    if q is not None:
        return q
    if noise_seed is None:
        raise ValueError("input is rank deficient; a noise_seed is required")
    rng = np.random.default_rng(noise_seed)
    for _ in range(_MAX_RESTARTS):
        q = _mgs(m + rng.normal(0.0, _NOISE_STD, size=m.shape))
        if q is not None:
            return q
    raise ValueError(f"rank deficiency persisted through {_MAX_RESTARTS} noise restarts")


def qr_dsm(m, noise_seed: int | None = None) -> Dsm:
    """Entrywise square of the Gram-Schmidt Q: a doubly stochastic matrix."""
    q = qr_orthonormalize(m, noise_seed)
    return as_dsm(q * q)
