"""Expressivity sweeps over exhaustive input grids.

How many distinct outputs does a normalizer produce over an exhaustive grid
of inputs?  Two input families: the ``cube`` grid takes every matrix whose
entries lie on {0, 1/(d-1), ..., 1} (d^(n*n) matrices), and the ``sphere``
grid takes every matrix whose columns are grid points of exact unit
Euclidean norm (checked in integer arithmetic, so no float fuzz decides
membership).  Outputs are rounded to a fixed number of decimals and counted
as byte patterns.

Enumeration is index-addressed (matrix j is decodable directly), so sweeps
can restart from any offset and can be split across worker processes; chunk
results are merged in index order, which makes reports identical for every
worker count.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from itertools import product

import numpy as np

from .core import frobenius_distance, shannon_entropy
from .operators import Operator, make_operator
from .sinkhorn import exp_scale

_SWEEP_CHUNK = 512  # fixed regardless of worker count

CUBE = "cube"
SPHERE = "sphere"


@dataclass(frozen=True)
class GridSpec:
    n: int
    d: int
    domain: str = CUBE
    rounding_decimals: int = 3

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("n must be >= 1")
        if self.d < 2:
            raise ValueError("grid resolution d must be >= 2")
        if self.domain not in (CUBE, SPHERE):
            raise ValueError(f"unknown grid domain {self.domain!r}")
        if self.rounding_decimals < 0:
            raise ValueError("rounding_decimals must be >= 0")


def sphere_columns(n: int, d: int) -> np.ndarray:
    """Grid columns with exactly unit 2-norm, lexicographic by digit tuple.

    A column (i_1/(d-1), ..., i_n/(d-1)) has unit norm iff sum of i^2 equals
    (d-1)^2, an exact integer test.
    """
    scale = d - 1
    cols = [
        digits
        for digits in product(range(d), repeat=n)
        if sum(v * v for v in digits) == scale * scale
    ]
    if not cols:
        raise ValueError(f"no unit-norm columns on the (n={n}, d={d}) grid")
    return np.array(cols, dtype=np.float64) / scale


def grid_total(spec: GridSpec) -> int:
    if spec.domain == CUBE:
        return spec.d ** (spec.n * spec.n)
    return len(sphere_columns(spec.n, spec.d)) ** spec.n


def grid_matrix(spec: GridSpec, index: int) -> np.ndarray:
    """Decode grid matrix ``index`` (odometer order, first cell/column most significant)."""
    if spec.domain == CUBE:
        cells = spec.n * spec.n
        digits = np.empty(cells, dtype=np.int64)
        for c in reversed(range(cells)):
            index, digits[c] = divmod(index, spec.d)
        if index:
            raise IndexError("grid index out of range")
        return digits.reshape(spec.n, spec.n) / (spec.d - 1)
    cols = sphere_columns(spec.n, spec.d)
    picks = np.empty(spec.n, dtype=np.int64)
    for c in reversed(range(spec.n)):
        index, picks[c] = divmod(index, len(cols))
    if index:
        raise IndexError("grid index out of range")
    return cols[picks].T.copy()


def enumerate_grid(spec: GridSpec, start: int = 0, stop: int | None = None,
                   max_total: int = 2**32):
    """Yield (index, matrix) over [start, stop); guards against runaway sizes."""
    total = grid_total(spec)
    if total > max_total:
        raise ValueError(f"grid has {total} matrices, above the {max_total} guard")
    stop = total if stop is None else min(stop, total)
    if not 0 <= start <= stop:
        raise ValueError(f"bad index range [{start}, {stop})")
    for index in range(start, stop):
        yield index, grid_matrix(spec, index)


@dataclass(frozen=True)
class SweepReport:
    total_inputs: int
    unique_outputs: int
    count_multiset: list[int]       # per-output multiplicities, descending
    entropy_stats: dict
    residual_stats: dict


def _resolve(operator) -> Operator:
    if isinstance(operator, Operator):
        return operator
    if isinstance(operator, tuple):
        name, kw = operator
        return make_operator(name, **kw)
    return Operator("custom", operator)


def _apply(op: Operator, m: np.ndarray, tau: float) -> np.ndarray:
    return op.fn(exp_scale(m, tau) if op.needs_positive else m)


def _sweep_chunk(spec: GridSpec, operator, tau: float, lo: int, hi: int):
    op = _resolve(operator)
    # 128-bit digests as two uint64 columns: 16 bytes/output keeps the full
    # 43M-input grids inside a few hundred MB, where a dict of raw matrix
    # bytes would not fit in memory.
    digests = np.empty((hi - lo, 2), dtype=np.uint64)
    entropies = np.empty(hi - lo)
    residuals = np.empty(hi - lo)
    for index, m in enumerate_grid(spec, lo, hi):
        out = _apply(op, m, tau)
        rounded = np.round(out, spec.rounding_decimals) + 0.0  # +0.0 folds -0.0 into 0.0
        digest = hashlib.blake2b(rounded.tobytes(), digest_size=16).digest()
        digests[index - lo] = np.frombuffer(digest, dtype=np.uint64)
        entropies[index - lo] = shannon_entropy(out)
        residuals[index - lo] = frobenius_distance(m, out)
    return digests, entropies, residuals


def _sweep_chunk_star(args):
    return _sweep_chunk(*args)


def _stats(values: np.ndarray) -> dict:
    return {
        "min": float(values.min()),
        "median": float(np.median(values)),
        "mean": float(values.mean()),
        "max": float(values.max()),
    }


def uniqueness_sweep(spec: GridSpec, operator, *, exp_scale_tau: float = 1.0,
                     workers: int = 1, start: int = 0, stop: int | None = None,
                     max_total: int = 2**32) -> SweepReport:
    """Count distinct rounded outputs over the grid.

    ``operator`` is an :class:`Operator`, a bare callable, or a picklable
    (name, settings) pair; only the latter works with ``workers > 1``.
    Positive-domain operators receive exp_scale(m, exp_scale_tau).
    """
    total = grid_total(spec)
    if total > max_total:
        raise ValueError(f"grid has {total} matrices, above the {max_total} guard")
    stop = total if stop is None else min(stop, total)
    if workers > 1 and not isinstance(operator, tuple):
        raise ValueError("parallel sweeps need a picklable (name, settings) operator")
    tasks = [
        (spec, operator, exp_scale_tau, lo, min(lo + _SWEEP_CHUNK, stop))
        for lo in range(start, stop, _SWEEP_CHUNK)
    ]
    if workers > 1 and len(tasks) > 1:
        import multiprocessing

        with multiprocessing.get_context("fork").Pool(workers) as pool:
            results = pool.map(_sweep_chunk_star, tasks)
    else:
        results = [_sweep_chunk_star(t) for t in tasks]
    digests = (np.concatenate([r[0] for r in results])
               if results else np.zeros((0, 2), dtype=np.uint64))
    entropies = np.concatenate([r[1] for r in results]) if results else np.zeros(0)
    residuals = np.concatenate([r[2] for r in results]) if results else np.zeros(0)
    _, counts = np.unique(digests, axis=0, return_counts=True)
    return SweepReport(
        total_inputs=stop - start,
        unique_outputs=int(counts.size),
        count_multiset=np.sort(counts)[::-1].tolist(),
        entropy_stats=_stats(entropies) if entropies.size else {},
        residual_stats=_stats(residuals) if residuals.size else {},
    )


def tradeoff_sweep(inputs, operator, *, exp_scale_tau: float = 1.0) -> list[dict]:
    """Per-input entropy of the output and Frobenius residual to the input."""
    op = _resolve(operator)
    rows = []
    for m in inputs:
        out = _apply(op, np.asarray(m, dtype=np.float64), exp_scale_tau)
        rows.append(
            {"entropy": shannon_entropy(out), "residual": frobenius_distance(m, out)}
        )
    return rows


def probe_invariances(operator, trials: int = 10, seed: int = 0, n: int = 4,
                      tolerance: float = 1e-8) -> dict:
    """Empirically test scale invariance and permutation equivariance.

    Scale: f(lam m) = f(m) for lam in {0.5, 2, 10}.  Permutation:
    f(P1 m P2) = P1 f(m) P2 for random permutations.  Inputs are sampled
    from the operator's domain (uniform [0.1, 10] when it needs positivity,
    standard normal otherwise).  The first failure of each kind is kept as a
    witness (input, transform, max deviation); everything derives from
    ``seed``, so witnesses are reproducible.
    """
    op = _resolve(operator)
    rng = np.random.default_rng(seed)
    scale_witness = None
    perm_witness = None
    for _ in range(trials):
        if op.needs_positive:
            m = rng.uniform(0.1, 10.0, (n, n))
        else:
            m = rng.standard_normal((n, n))
        base = op.fn(m)
        for lam in (0.5, 2.0, 10.0):
            dev = float(np.abs(op.fn(lam * m) - base).max())
            if dev > tolerance and scale_witness is None:
                scale_witness = {
                    "matrix": m.tolist(),
                    "lam": lam,
                    "max_abs_deviation": dev,
                }
        p1 = rng.permutation(n)
        p2 = rng.permutation(n)
        dev = float(np.abs(op.fn(m[p1][:, p2]) - base[p1][:, p2]).max())
        if dev > tolerance and perm_witness is None:
            perm_witness = {
                "matrix": m.tolist(),
                "row_permutation": p1.tolist(),
                "col_permutation": p2.tolist(),
                "max_abs_deviation": dev,
            }
    return {
        "operator": op.name,
        "trials": trials,
        "tolerance": tolerance,
        "scale_invariant": scale_witness is None,
        "permutation_equivariant": perm_witness is None,
        "scale_witness": scale_witness,
        "permutation_witness": perm_witness,
    }
