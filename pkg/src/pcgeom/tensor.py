"""Dense tensors at a point, index gymnastics and pseudo-orthonormal frames."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

__all__ = [
    "TensorValue",
    "Frame",
    "FrameError",
    "SingularMetricError",
    "raise_lower",
    "contract",
    "build_frame",
    "is_symmetric",
    "is_antisymmetric",
    "frame_trace",
]

UPPER, LOWER = "u", "l"
SINGULAR_DET = 1e-12
FRAME_DEGENERATE = 1e-10


class SingularMetricError(ValueError):
    pass


class FrameError(ArithmeticError):
    """Gram-Schmidt degenerated; callers resample the point."""


@dataclass(frozen=True)
class TensorValue:
    """Components of a tensor at one point.

    ``variance[k]`` is ``"u"`` (contravariant) or ``"l"`` (covariant) for
    axis ``k`` of ``data``. A scalar has empty variance.
    """

    data: np.ndarray
    variance: tuple[str, ...]

    def __post_init__(self):
        data = np.array(self.data, dtype=float)  # own copy: values never alias
        variance = tuple(self.variance)
        if data.ndim != len(variance):
            raise ValueError(f"rank {data.ndim} does not match variance {variance}")
        if data.ndim and len(set(data.shape)) != 1:
            raise ValueError(f"non-square component array {data.shape}")
        bad = [v for v in variance if v not in (UPPER, LOWER)]
        if bad:
            raise ValueError(f"bad variance markers {bad}")
        object.__setattr__(self, "data", data)
        object.__setattr__(self, "variance", variance)

    @property
    def dims(self) -> int:
        return self.data.shape[0] if self.data.ndim else 0

    @property
    def rank(self) -> int:
        return len(self.variance)


def _check_metric(g: TensorValue, g_inv: TensorValue | None = None) -> None:
    if g.variance != (LOWER, LOWER):
        raise ValueError("metric must be a (0,2) tensor")
    if abs(np.linalg.det(g.data)) < SINGULAR_DET:
        raise SingularMetricError(f"singular metric (det={np.linalg.det(g.data):.3e})")
    if g_inv is not None and g_inv.variance != (UPPER, UPPER):
        raise ValueError("inverse metric must be a (2,0) tensor")


def raise_lower(t: TensorValue, slot: int, g: TensorValue, g_inv: TensorValue | None = None) -> TensorValue:
    """Flip the variance of axis ``slot`` using the metric (or its inverse)."""
    _check_metric(g, g_inv)
    if not 0 <= slot < t.rank:
        raise IndexError(f"slot {slot} out of range for rank {t.rank}")
    if g_inv is None:
        g_inv = TensorValue(np.linalg.inv(g.data), (UPPER, UPPER))
    m = g.data if t.variance[slot] == UPPER else g_inv.data
    data = np.moveaxis(np.tensordot(m, t.data, axes=([1], [slot])), 0, slot)
    variance = list(t.variance)
    variance[slot] = LOWER if variance[slot] == UPPER else UPPER
    return TensorValue(data, tuple(variance))


def contract(t: TensorValue, slot_a: int, slot_b: int) -> TensorValue | float:
    """Trace over one upper and one lower slot; returns a float for rank 0."""
    if slot_a == slot_b:
        raise ValueError("cannot contract a slot with itself")
    if {t.variance[slot_a], t.variance[slot_b]} != {UPPER, LOWER}:
        raise ValueError(f"variance mismatch: slots {slot_a},{slot_b} are {t.variance[slot_a]},{t.variance[slot_b]}")
    data = np.trace(t.data, axis1=slot_a, axis2=slot_b)
    variance = tuple(v for k, v in enumerate(t.variance) if k not in (slot_a, slot_b))
    if not variance:
        return float(data)
    return TensorValue(data, variance)


def is_symmetric(t: TensorValue, tol: float = 1e-10) -> bool:
    return t.rank == 2 and float(np.max(np.abs(t.data - t.data.T), initial=0.0)) <= tol


def is_antisymmetric(t: TensorValue, tol: float = 1e-10) -> bool:
    return t.rank == 2 and float(np.max(np.abs(t.data + t.data.T), initial=0.0)) <= tol


@dataclass(frozen=True)
class Frame:
    """Pseudo-orthonormal frame: ``g(E_i, E_j) = signs[i] * delta_ij``.

    ``vectors`` has shape (n, n); row ``i`` is the contravariant vector E_i.
    """

    vectors: np.ndarray
    signs: np.ndarray

    def __len__(self) -> int:
        return len(self.signs)


def build_frame(g: np.ndarray | TensorValue, seed_basis: Sequence[Sequence[float]] | np.ndarray | None = None) -> Frame:
    """Modified Gram-Schmidt for an indefinite inner product.

    At each step the remaining projected seed vector with the largest
    ``|g(v, v)|`` is normalized next. Raises :class:`FrameError` when every
    remaining candidate is (numerically) null.
    """
    g = g.data if isinstance(g, TensorValue) else np.asarray(g, dtype=float)
    n = g.shape[0]
    if abs(np.linalg.det(g)) < SINGULAR_DET:
        raise SingularMetricError("singular metric")
    pool = np.eye(n) if seed_basis is None else np.array(seed_basis, dtype=float)
    if pool.shape != (n, n):
        raise ValueError(f"seed basis must have shape ({n}, {n})")
    if abs(np.linalg.det(pool)) < 1e-12:
        raise ValueError("seed basis is linearly dependent")
    pool = [row.copy() for row in pool]
    vectors, signs = [], []
    while pool:
        norms = [float(v @ g @ v) for v in pool]
        k = int(np.argmax(np.abs(norms)))
        if abs(norms[k]) < FRAME_DEGENERATE:
            raise FrameError("all remaining projected vectors are null")
        v = pool.pop(k) / np.sqrt(abs(norms[k]))
        s = 1.0 if norms[k] > 0 else -1.0
        vectors.append(v)
        signs.append(s)
        # g(E, E) = s, so the projection coefficient is s * g(w, E)
        pool = [w - s * float(w @ g @ v) * v for w in pool]
    return Frame(np.array(vectors), np.array(signs))


def frame_trace(frame: Frame, bilinear: np.ndarray) -> float:
    """Sum of ``eps_i * B(E_i, E_i)`` for a bilinear form given by components."""
    E = frame.vectors
    return float(np.einsum("i,ia,ab,ib->", frame.signs, E, bilinear, E))
