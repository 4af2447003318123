"""Named constructors for the matrix-to-matrix normalizers.

Sweeps, invariance probes and the command line all refer to operators by
name plus a flat settings dict, which keeps them easy to rebuild inside
worker processes.  ``needs_positive`` marks operators whose domain is
strictly positive matrices (the Sinkhorn family); sweep drivers feed those
through :func:`~birkhoff_attn.sinkhorn.exp_scale` first.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import attention
from .birkhoff import ProjectionSettings, project
from .qontot import CircuitConfig, param_count, simulate_dsm
from .qr import qr_dsm
from .sinkhorn import sinkhorn_naive, sinkhorn_ot


@dataclass(frozen=True)
class Operator:
    name: str
    fn: Callable[[np.ndarray], np.ndarray]
    needs_positive: bool = False


def qontot_theta(config: CircuitConfig, theta_seed: int) -> np.ndarray:
    """The uniform(-1, 1) parameter draw used whenever theta comes from a seed."""
    return np.random.default_rng(theta_seed).uniform(-1.0, 1.0, param_count(config))


def make_operator(name: str, **kw) -> Operator:
    if name == "sinkhorn-naive":
        k = int(kw.pop("iterations", 21))
        _reject_extras(name, kw)
        return Operator(name, lambda m: sinkhorn_naive(m, k), needs_positive=True)
    if name == "sinkhorn-ot":
        k = int(kw.pop("iterations", 21))
        _reject_extras(name, kw)
        return Operator(name, lambda m: sinkhorn_ot(m, k), needs_positive=True)
    if name == "birkhoff-project":
        settings = ProjectionSettings(
            method=kw.pop("method", "dykstra"),
            tolerance=float(kw.pop("tolerance", 1e-11)),
            max_iterations=int(kw.pop("max_iterations", 100_000)),
        )
        _reject_extras(name, kw)
        return Operator(name, lambda m: project(m, settings).matrix)
    if name == "qr":
        seed = kw.pop("noise_seed", None)
        seed = None if seed is None else int(seed)
        _reject_extras(name, kw)
        return Operator(name, lambda m: qr_dsm(m, noise_seed=seed).matrix)
    if name == "qontot":
        config = CircuitConfig(
            dsm_dim=int(kw.pop("dsm_dim")),
            aux_qubits=int(kw.pop("aux_qubits", 0)),
            layers=int(kw.pop("layers", 1)),
            ansatz=kw.pop("ansatz", "simple"),
        )
        theta = kw.pop("theta", None)
        if theta is None:
            theta = qontot_theta(config, int(kw.pop("theta_seed")))
        else:
            theta = np.asarray(theta, dtype=np.float64)
            kw.pop("theta_seed", None)
        _reject_extras(name, kw)
        return Operator(name, lambda m: simulate_dsm(config, theta, m).matrix)
    if name == "softmax":
        tau = float(kw.pop("tau", 1.0))
        _reject_extras(name, kw)
        return Operator(name, lambda m: attention.softmax_rows(m, tau))
    if name == "norm-softmax":
        tau = float(kw.pop("tau", 1.0))
        power = int(kw.pop("power", 1))
        _reject_extras(name, kw)
        return Operator(name, lambda m: attention.norm_softmax(m, tau, power))
    raise ValueError(f"unknown operator {name!r}")


def _reject_extras(name: str, kw: dict) -> None:
    if kw:
        raise ValueError(f"unexpected settings for operator {name!r}: {sorted(kw)}")


OPERATOR_NAMES = (
    "sinkhorn-naive",
    "sinkhorn-ot",
    "birkhoff-project",
    "qr",
    "qontot",
    "softmax",
    "norm-softmax",
)
