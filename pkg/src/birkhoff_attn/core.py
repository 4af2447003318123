"""Shared plumbing for doubly stochastic matrix work.

A matrix is doubly stochastic when it is square, entrywise non-negative and
all rows and columns sum to one.  Everything downstream (normalizers,
projections, sweeps) talks in terms of plain float64 square arrays plus the
small report / wrapper types defined here.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np
from scipy.stats import rankdata


def as_square(m, name: str = "matrix") -> np.ndarray:
    """Coerce to a float64 square 2-D array, rejecting NaN/inf."""
    m = getattr(m, "matrix", m)  # accept Dsm wrappers anywhere a matrix is
    out = np.asarray(m, dtype=np.float64)
    if out.ndim != 2 or out.shape[0] != out.shape[1]:
        raise ValueError(f"{name} must be square 2-D, got shape {out.shape}")
    if out.shape[0] < 1:
        raise ValueError(f"{name} must have n >= 1")
    if not np.all(np.isfinite(out)):
        raise ValueError(f"{name} contains non-finite entries")
    return out


@dataclass(frozen=True)
class StochasticityReport:
    """How far a matrix is from being doubly stochastic.

    ``frobenius_to_birkhoff`` stays None unless the (more expensive)
    projection distance was requested.
    """

    max_row_deviation: float
    max_col_deviation: float
    min_entry: float
    frobenius_to_birkhoff: float | None = None


def check_stochasticity(m, include_birkhoff_distance: bool = False) -> StochasticityReport:
    """Measure worst row/column sum deviation from 1 and the minimum entry."""
    m = as_square(m)
    row_dev = float(np.max(np.abs(m.sum(axis=1) - 1.0)))
    col_dev = float(np.max(np.abs(m.sum(axis=0) - 1.0)))
    min_entry = float(m.min())
    dist = None
    if include_birkhoff_distance:
        # local import: the projection module depends on this one
        from .birkhoff import birkhoff_distance

        dist = birkhoff_distance(m)
    return StochasticityReport(row_dev, col_dev, min_entry, dist)


@dataclass(frozen=True)
class Dsm:
    """A validated doubly stochastic matrix with its feasibility report."""

    matrix: np.ndarray
    tolerance: float
    report: StochasticityReport


def as_dsm(m, tolerance: float = 1e-9) -> Dsm:
    """Validate ``m`` as doubly stochastic within ``tolerance`` and wrap it.

    Raises ValueError when any entry is below ``-tolerance`` or a row/column
    sum deviates from 1 by more than ``tolerance``.
    """
    m = as_square(m)
    report = check_stochasticity(m)
    if report.min_entry < -tolerance:
        raise ValueError(
            f"matrix has entry {report.min_entry} below -{tolerance}; not doubly stochastic"
        )
    if report.max_row_deviation > tolerance or report.max_col_deviation > tolerance:
        raise ValueError(
            "row/col sums deviate from 1 by "
            f"({report.max_row_deviation}, {report.max_col_deviation}); "
            f"tolerance is {tolerance}"
        )
    return Dsm(m, float(tolerance), report)


def _matrix_of(p) -> np.ndarray:
    return p.matrix if isinstance(p, Dsm) else as_square(p)


def shannon_entropy(p) -> float:
    """Mean over rows of the natural-log Shannon entropy -sum p*ln(p).

    Zero entries contribute zero; tiny negative entries (within validation
    slack) are clamped to zero first.  Accepts a Dsm or a plain row-wise
    distribution matrix.  The row mean is at most ln(n), attained by the
    uniform matrix.
    """
    m = np.clip(_matrix_of(p), 0.0, None)
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(m > 0.0, -m * np.log(np.where(m > 0.0, m, 1.0)), 0.0)
    return float(terms.sum(axis=1).mean())


def frobenius_distance(a, b) -> float:
    """Frobenius norm of a - b; the two matrices must share a shape."""
    a = as_square(a, "a")
    b = as_square(b, "b")
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch: {a.shape} vs {b.shape}")
    return float(np.linalg.norm(a - b))


def spearman_rho(a, b) -> float:
    """Spearman rank correlation of the flattened entries of two matrices.

    Ties get average ranks.  A constant input has no rank ordering, so zero
    rank variance is an error rather than a silent NaN.
    """
    a = as_square(a, "a")
    b = as_square(b, "b")
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch: {a.shape} vs {b.shape}")
    ra = rankdata(a.ravel(), method="average")
    rb = rankdata(b.ravel(), method="average")
    if np.ptp(ra) == 0.0 or np.ptp(rb) == 0.0:
        raise ValueError("rank variance is zero (all entries tie); rho undefined")
    ra = ra - ra.mean()
    rb = rb - rb.mean()
    return float(ra @ rb / np.sqrt((ra @ ra) * (rb @ rb)))


# ---------------------------------------------------------------------------
# matrix serialization: CSV (one row per line) and JSON ({"n": .., "data": ..})

def load_matrix_csv(path) -> np.ndarray:
    out = np.loadtxt(path, delimiter=",", ndmin=2, dtype=np.float64)
    return as_square(out, str(path))


def save_matrix_csv(path, m) -> None:
    np.savetxt(path, as_square(m), delimiter=",", fmt="%.17g")


def load_matrix_json(path) -> np.ndarray:
    if hasattr(path, "read"):
        obj = json.load(path)
    else:
        with open(path) as fh:
            obj = json.load(fh)
    try:
        n = int(obj["n"])
        data = obj["data"]
    except (TypeError, KeyError) as exc:
        raise ValueError("matrix JSON needs fields 'n' and 'data'") from exc
    if len(data) != n * n:
        raise ValueError(f"'data' has {len(data)} entries, expected n*n = {n * n}")
    return as_square(np.asarray(data, dtype=np.float64).reshape(n, n))


def save_matrix_json(path, m) -> None:
    m = as_square(m)
    obj = {"n": int(m.shape[0]), "data": [float(x) for x in m.ravel()]}
    if hasattr(path, "write"):
        json.dump(obj, path)
    else:
        with open(path, "w") as fh:
            json.dump(obj, fh)


def load_matrix(path, fmt: str | None = None) -> np.ndarray:
    """Load a square matrix, inferring CSV vs JSON from suffix when fmt is None."""
    if fmt is None:
        fmt = "json" if str(path).endswith(".json") else "csv"
    if fmt == "json":
        return load_matrix_json(path)
    if fmt == "csv":
        return load_matrix_csv(path)
    raise ValueError(f"unknown matrix format {fmt!r}")
