"""Dense float64 kernels shared by every other module.

Plain functions over numpy arrays: affine maps, ReLU, squared error,
SGD/Adam updates over flat parameter lists, and a central-difference
gradient oracle used to verify hand-derived backward passes.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np


class ShapeMismatch(ValueError):
    """Operand shapes are incompatible for the requested operation."""


def as_vec(values) -> np.ndarray:
    """Coerce to a finite 1-D float64 vector."""
    v = np.ascontiguousarray(values, dtype=np.float64)
    if v.ndim != 1:
        raise ShapeMismatch(f"expected a 1-D vector, got shape {v.shape}")
    if not np.all(np.isfinite(v)):
        raise ValueError("vector contains non-finite entries")
    return v


def as_mat(values, rows: int | None = None, cols: int | None = None) -> np.ndarray:
    """Coerce to a finite 2-D float64 matrix.

    A flat sequence is accepted when ``rows``/``cols`` are given; storage is
    row-major.
    """
    v = np.ascontiguousarray(values, dtype=np.float64)
    if v.ndim == 1 and rows is not None and cols is not None:
        if v.size != rows * cols:
            raise ShapeMismatch(f"{v.size} values cannot fill a {rows}x{cols} matrix")
        v = v.reshape(rows, cols)
    if v.ndim != 2:
        raise ShapeMismatch(f"expected a 2-D matrix, got shape {v.shape}")
    if rows is not None and cols is not None and v.shape != (rows, cols):
        raise ShapeMismatch(f"expected shape ({rows}, {cols}), got {v.shape}")
    if not np.all(np.isfinite(v)):
        raise ValueError("matrix contains non-finite entries")
    return v


def affine(w: np.ndarray, x: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Return ``w @ x + b`` with explicit shape checking."""
    w = np.asarray(w, dtype=np.float64)
    x = np.asarray(x, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if w.ndim != 2 or x.ndim != 1 or b.ndim != 1:
        raise ShapeMismatch(
            f"affine expects matrix/vector/vector, got {w.shape}/{x.shape}/{b.shape}"
        )
    if w.shape[1] != x.shape[0]:
        raise ShapeMismatch(f"matrix is {w.shape[0]}x{w.shape[1]} but input has length {x.shape[0]}")
    if w.shape[0] != b.shape[0]:
        raise ShapeMismatch(f"matrix is {w.shape[0]}x{w.shape[1]} but bias has length {b.shape[0]}")
    out = w @ x + b
    if not np.all(np.isfinite(out)):
        raise ValueError("affine produced non-finite output")
    return out


def relu(x: np.ndarray) -> np.ndarray:
    """Elementwise max(0, x).  The subgradient used at 0 is 0."""
    return np.maximum(np.asarray(x, dtype=np.float64), 0.0)


def mse(y: float, yhat: float) -> float:
    """Squared error of a single prediction."""
    return (float(y) - float(yhat)) ** 2


def _check_pair(params: Sequence[np.ndarray], grads: Sequence[np.ndarray]) -> None:
    if len(params) != len(grads):
        raise ShapeMismatch(f"{len(params)} parameters but {len(grads)} gradients")
    for i, (p, g) in enumerate(zip(params, grads)):
        if np.shape(p) != np.shape(g):
            raise ShapeMismatch(f"entry {i}: parameter shape {np.shape(p)} vs gradient shape {np.shape(g)}")


def sgd_step(params: Sequence[np.ndarray], grads: Sequence[np.ndarray], eta: float) -> list[np.ndarray]:
    """One plain gradient-descent update: p <- p - eta * g."""
    if eta <= 0:
        raise ValueError("learning rate must be positive")
    _check_pair(params, grads)
    return [np.asarray(p, dtype=np.float64) - eta * np.asarray(g, dtype=np.float64) for p, g in zip(params, grads)]


@dataclass
class AdamState:
    """Per-parameter first/second moment accumulators plus hyperparameters."""

    m: list[np.ndarray]
    v: list[np.ndarray]
    step: int
    beta1: float
    beta2: float
    eps: float
    eta: float

    @classmethod
    def init(
        cls,
        params: Sequence[np.ndarray],
        eta: float = 1e-3,
        beta1: float = 0.9,
        beta2: float = 0.999,
        eps: float = 1e-8,
    ) -> "AdamState":
        if eta <= 0:
            raise ValueError("learning rate must be positive")
        return cls(
            m=[np.zeros_like(np.asarray(p, dtype=np.float64)) for p in params],
            v=[np.zeros_like(np.asarray(p, dtype=np.float64)) for p in params],
            step=0,
            beta1=beta1,
            beta2=beta2,
            eps=eps,
            eta=eta,
        )


def adam_step(
    params: Sequence[np.ndarray], grads: Sequence[np.ndarray], state: AdamState
) -> tuple[list[np.ndarray], AdamState]:
    """One bias-corrected Adam update.  Returns new params and new state."""
    _check_pair(params, grads)
    _check_pair(params, state.m)
    t = state.step + 1
    new_m, new_v, new_p = [], [], []
    for p, g, m, v in zip(params, grads, state.m, state.v):
        g = np.asarray(g, dtype=np.float64)
        m1 = state.beta1 * m + (1.0 - state.beta1) * g
        v1 = state.beta2 * v + (1.0 - state.beta2) * g * g
        mhat = m1 / (1.0 - state.beta1**t)
        vhat = v1 / (1.0 - state.beta2**t)
        new_p.append(np.asarray(p, dtype=np.float64) - state.eta * mhat / (np.sqrt(vhat) + state.eps))
        new_m.append(m1)
        new_v.append(v1)
    return new_p, AdamState(new_m, new_v, t, state.beta1, state.beta2, state.eps, state.eta)


def finite_diff_grad(
    f: Callable[[Sequence[np.ndarray]], float],
    params: Sequence[np.ndarray],
    h: float = 1e-5,
) -> list[np.ndarray]:
    """Central-difference gradient estimate of a scalar objective.

    ``f`` receives the (temporarily perturbed) parameter list and must return
    a finite scalar; it is evaluated twice per parameter entry.  This is the
    oracle the hand-derived backward passes are checked against, so it must
    stay independent of them.
    """
    if h <= 0:
        raise ValueError("step size must be positive")
    base = [np.array(p, dtype=np.float64) for p in params]
    grads = [np.zeros_like(p) for p in base]
    for pi, p in enumerate(base):
        flat = p.reshape(-1)
        gflat = grads[pi].reshape(-1)
        for i in range(flat.size):
            orig = flat[i]
            flat[i] = orig + h
            up = float(f(base))
            flat[i] = orig - h
            down = float(f(base))
            flat[i] = orig
            if not (np.isfinite(up) and np.isfinite(down)):
                raise ValueError(f"objective returned a non-finite value at parameter {pi}[{i}]")
            gflat[i] = (up - down) / (2.0 * h)
    return grads
