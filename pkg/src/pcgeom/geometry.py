"""Chart-level Riemannian and pseudo-Riemannian geometry.

Conventions (fixed throughout the package):

* ``Γ[k, i, j] = Γ^k_{ij}``, the Levi-Civita connection.
* ``R[l, k, i, j] = R^l_{kij}`` with ``R(∂_i, ∂_j)∂_k = R^l_{kij} ∂_l`` and
  ``R(X, Y) = [∇_X, ∇_Y] - ∇_[X,Y]``.
* Lowered curvature ``R(X, Y, Z, W) = g(R(X, Y)Z, W)``.
* ``Ric(X, Y) = trace(Z -> R(Z, X)Y)``, i.e. ``Ric_{kj} = R^i_{kij}``.
* Endomorphisms are stored as ``A[i, j] = A^i_j`` so that ``(A X)^i = A^i_j X^j``.
* Derivative arrays carry the differentiation index first:
  ``dA[k, ...] = ∂_k A[...]`` and ``nabla_A[k, ...] = (∇_k A)[...]``.
* Exterior derivative and wedge product use the "half" convention by
  default: ``dη(X, Y) = ½(Xη(Y) - Yη(X) - η([X, Y]))``. The "one"
  convention drops the ½ (and the ⅓ on 2-forms).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Sequence

import numpy as np

from .expr import ExprDomainError, Expression
from .tensor import SINGULAR_DET, SingularMetricError, TensorValue

__all__ = [
    "ChartManifold",
    "VectorField",
    "OneForm",
    "EndoField",
    "TwoForm",
    "PointGeometry",
    "SamplingError",
    "expr_jets",
    "christoffel",
    "riemann",
    "ricci",
    "ricci_operator",
    "scalar",
    "covariant_derivative",
    "lie_derivative",
    "exterior_derivative",
    "nabla_vector",
    "nabla_oneform",
    "nabla_endo",
    "lie_endo",
    "lie_oneform",
    "lie_metric",
    "nijenhuis_tensor",
    "d_oneform",
    "d_twoform",
    "wedge",
    "form_factor",
    "second_bianchi_residual",
]

CONVENTIONS = ("half", "one")
DET_FLOOR = 1e-10


class SamplingError(RuntimeError):
    """Could not find enough admissible sample points."""


def form_factor(convention: str, degree: int) -> float:
    """Normalisation of the alternating sum defining d on ``degree``-forms."""
    if convention not in CONVENTIONS:
        raise ValueError(f"unknown exterior-derivative convention {convention!r}")
    return 1.0 / (degree + 1) if convention == "half" else 1.0


@dataclass(frozen=True)
class VectorField:
    components: tuple[Expression, ...]


@dataclass(frozen=True)
class OneForm:
    components: tuple[Expression, ...]


@dataclass(frozen=True)
class EndoField:
    """(1,1) tensor field; ``components[i][j]`` is the i-th component of A∂_j."""

    components: tuple[tuple[Expression, ...], ...]


@dataclass(frozen=True)
class TwoForm:
    components: tuple[tuple[Expression, ...], ...]


@dataclass(frozen=True)
class ChartManifold:
    """A single coordinate chart carrying a metric.

    ``sample_box`` holds one closed interval per coordinate; ``exclude``
    expressions must be nonzero at accepted sample points. ``domain`` is an
    optional extra membership test (used by pulled-back charts).
    """

    coords: tuple[str, ...]
    metric: tuple[tuple[Expression, ...], ...]
    sample_box: tuple[tuple[float, float], ...]
    exclude: tuple[Expression, ...] = ()
    name: str = ""
    domain: Callable[[np.ndarray], bool] | None = field(default=None, compare=False)

    def __post_init__(self):
        n = len(self.coords)
        if len(self.metric) != n or any(len(row) != n for row in self.metric):
            raise ValueError(f"metric must be {n}x{n}")
        for i in range(n):
            for j in range(i):
                if self.metric[i][j] != self.metric[j][i]:
                    raise ValueError(
                        f"metric is not symmetric as written: g[{self.coords[i]},{self.coords[j]}]"
                        f" = {self.metric[i][j]} but g[{self.coords[j]},{self.coords[i]}] = {self.metric[j][i]}"
                    )
        if len(self.sample_box) != n:
            raise ValueError("sample_box needs one interval per coordinate")
        for lo, hi in self.sample_box:
            if not lo <= hi:
                raise ValueError(f"empty sample interval [{lo}, {hi}]")

    @property
    def dim(self) -> int:
        return len(self.coords)

    def metric_at(self, p: Sequence[float]) -> np.ndarray:
        return np.array([[e(p) for e in row] for row in self.metric])

    def admissible(self, p: np.ndarray) -> bool:
        try:
            if self.domain is not None and not self.domain(p):
                return False
            if any(abs(e(p)) < 1e-8 for e in self.exclude):
                return False
            return abs(np.linalg.det(self.metric_at(p))) >= DET_FLOOR
        except (ExprDomainError, ValueError, OverflowError):
            return False

    def draw_point(self, rng: np.random.Generator, budget: int = 1000) -> np.ndarray:
        lo = np.array([b[0] for b in self.sample_box])
        hi = np.array([b[1] for b in self.sample_box])
        for _ in range(budget):
            p = lo + (hi - lo) * rng.random(self.dim)
            if self.admissible(p):
                return p
        raise SamplingError(f"no admissible point found in {budget} draws on chart {self.name or self.coords}")

    def sample_points(self, k: int, rng: np.random.Generator) -> np.ndarray:
        return np.array([self.draw_point(rng) for _ in range(k)])


def expr_jets(exprs, p: np.ndarray, order: int = 2):
    """Values and derivatives of an array-like of expressions at ``p``.

    Returns ``(val, d1, d2)`` with ``d1[k, ...] = ∂_k`` and
    ``d2[k, l, ...] = ∂_k ∂_l``; ``d2`` is ``None`` when ``order == 1``.
    """
    if isinstance(exprs[0], (tuple, list)):
        shape = (len(exprs), len(exprs[0]))
        flat = [e for row in exprs for e in row]
    else:
        shape = (len(exprs),)
        flat = list(exprs)
    n = len(p)
    val = np.empty(len(flat))
    d1 = np.empty((n, len(flat)))
    d2 = np.empty((n, n, len(flat))) if order >= 2 else None
    cache: dict[Expression, object] = {}
    for idx, e in enumerate(flat):
        c = e.constant_value()
        if c is not None:
            val[idx] = c
            d1[:, idx] = 0.0
            if d2 is not None:
                d2[:, :, idx] = 0.0
            continue
        jet = cache.get(e)
        if jet is None:
            jet = cache[e] = e.jet(p)
        val[idx] = jet.value
        d1[:, idx] = jet.grad
        if d2 is not None:
            d2[:, :, idx] = jet.hess
    val = val.reshape(shape)
    d1 = d1.reshape((n,) + shape)
    if d2 is not None:
        d2 = d2.reshape((n, n) + shape)
    return val, d1, d2


# ---------------------------------------------------------------------------
# connection-level formulas on raw arrays


def christoffel_from_metric(g: np.ndarray, ginv: np.ndarray, dg: np.ndarray) -> np.ndarray:
    # A[l, i, j] = ∂_i g_jl + ∂_j g_il - ∂_l g_ij
    A = np.einsum("ijl->lij", dg) + np.einsum("jil->lij", dg) - dg
    return 0.5 * np.einsum("kl,lij->kij", ginv, A)


def nabla_vector(V: np.ndarray, dV: np.ndarray, G: np.ndarray) -> np.ndarray:
    """``out[k, i] = (∇_k V)^i``."""
    return dV + np.einsum("ikm,m->ki", G, V)


def nabla_oneform(w: np.ndarray, dw: np.ndarray, G: np.ndarray) -> np.ndarray:
    """``out[k, j] = (∇_k w)_j``."""
    return dw - np.einsum("mkj,m->kj", G, w)


def nabla_endo(A: np.ndarray, dA: np.ndarray, G: np.ndarray) -> np.ndarray:
    """``out[k, i, j] = (∇_k A)^i_j``."""
    return dA + np.einsum("ikm,mj->kij", G, A) - np.einsum("mkj,im->kij", G, A)


def nabla_covariant2(B: np.ndarray, dB: np.ndarray, G: np.ndarray) -> np.ndarray:
    """``out[k, i, j] = (∇_k B)_{ij}`` for a (0,2) tensor."""
    return dB - np.einsum("mki,mj->kij", G, B) - np.einsum("mkj,im->kij", G, B)


def lie_endo(A: np.ndarray, dA: np.ndarray, V: np.ndarray, dV: np.ndarray) -> np.ndarray:
    """``(L_V A)^i_j = V^k ∂_k A^i_j - A^k_j ∂_k V^i + A^i_k ∂_j V^k``."""
    return np.einsum("k,kij->ij", V, dA) - np.einsum("kj,ki->ij", A, dV) + np.einsum("ik,jk->ij", A, dV)


def lie_oneform(w: np.ndarray, dw: np.ndarray, V: np.ndarray, dV: np.ndarray) -> np.ndarray:
    """``(L_V w)_j = V^k ∂_k w_j + w_k ∂_j V^k``."""
    return np.einsum("k,kj->j", V, dw) + np.einsum("k,jk->j", w, dV)


def lie_metric(g: np.ndarray, dg: np.ndarray, V: np.ndarray, dV: np.ndarray) -> np.ndarray:
    """``(L_V g)_{ij} = V^k ∂_k g_ij + g_kj ∂_i V^k + g_ik ∂_j V^k``."""
    return np.einsum("k,kij->ij", V, dg) + np.einsum("kj,ik->ij", g, dV) + np.einsum("ik,jk->ij", g, dV)


def nijenhuis_tensor(A: np.ndarray, dA: np.ndarray) -> np.ndarray:
    """Nijenhuis tensor ``N[i, a, b]`` of an endomorphism field from its 1-jet.

    ``N(X, Y) = A²[X, Y] + [AX, AY] - A[AX, Y] - A[X, AY]`` evaluated on
    coordinate fields, whose brackets vanish.
    """
    t = np.einsum("ka,kib->iab", A, dA)
    u = np.einsum("im,bma->iab", A, dA)
    return t - t.transpose(0, 2, 1) + u - u.transpose(0, 2, 1)


def d_oneform(dw: np.ndarray, convention: str = "half") -> np.ndarray:
    """Components ``dw(∂_a, ∂_b)`` from ``dw[k, j] = ∂_k w_j``."""
    return form_factor(convention, 1) * (dw - dw.T)


def d_twoform(dB: np.ndarray, convention: str = "half") -> np.ndarray:
    """Components ``dB(∂_a, ∂_b, ∂_c)`` from ``dB[k, i, j] = ∂_k B_ij``."""
    cyc = dB + np.einsum("bca->abc", dB) + np.einsum("cab->abc", dB)
    return form_factor(convention, 2) * cyc


def wedge(a: np.ndarray, b: np.ndarray, convention: str = "half") -> np.ndarray:
    """Wedge of two 1-forms, normalised consistently with :func:`d_oneform`."""
    return form_factor(convention, 1) * (np.outer(a, b) - np.outer(b, a))


def riemann_from_christoffel(G: np.ndarray, dG: np.ndarray) -> np.ndarray:
    """``R[l, k, i, j] = ∂_iΓ^l_jk - ∂_jΓ^l_ik + Γ^l_im Γ^m_jk - Γ^l_jm Γ^m_ik``."""
    return (
        np.einsum("iljk->lkij", dG)
        - np.einsum("jlik->lkij", dG)
        + np.einsum("lim,mjk->lkij", G, G)
        - np.einsum("ljm,mik->lkij", G, G)
    )


class PointGeometry:
    """Metric jets and derived curvature of a chart at one point (lazy)."""

    def __init__(self, M: ChartManifold, p: Sequence[float]):
        self.M = M
        self.p = np.asarray(p, dtype=float)
        self.dim = M.dim
        self.g, self.dg, self.d2g = expr_jets(M.metric, self.p, order=2)
        det = np.linalg.det(self.g)
        if abs(det) < SINGULAR_DET:
            raise SingularMetricError(f"singular metric at {self.p.tolist()} (det={det:.3e})")

    @cached_property
    def ginv(self) -> np.ndarray:
        return np.linalg.inv(self.g)

    @cached_property
    def gamma(self) -> np.ndarray:
        return christoffel_from_metric(self.g, self.ginv, self.dg)

    @cached_property
    def dgamma(self) -> np.ndarray:
        """``dgamma[m, k, i, j] = ∂_m Γ^k_ij``."""
        ginv, dg, d2g = self.ginv, self.dg, self.d2g
        A = np.einsum("ijl->lij", dg) + np.einsum("jil->lij", dg) - dg
        # ∂_m A[l,i,j]; d2g[m, k, i, j] = ∂_m ∂_k g_ij
        dA = np.einsum("mijl->mlij", d2g) + np.einsum("mjil->mlij", d2g) - np.einsum("mlij->mlij", d2g)
        dginv = -np.einsum("ka,mab,bl->mkl", ginv, dg, ginv)
        return 0.5 * (np.einsum("mkl,lij->mkij", dginv, A) + np.einsum("kl,mlij->mkij", ginv, dA))

    @cached_property
    def riemann(self) -> np.ndarray:
        return riemann_from_christoffel(self.gamma, self.dgamma)

    @cached_property
    def riemann_lowered(self) -> np.ndarray:
        """``Rl[a, b, c, d] = g(R(∂_a, ∂_b)∂_c, ∂_d)``."""
        return np.einsum("lcab,ld->abcd", self.riemann, self.g)

    @cached_property
    def ricci(self) -> np.ndarray:
        return np.einsum("ikij->kj", self.riemann)

    @cached_property
    def ricci_operator(self) -> np.ndarray:
        """``Q[i, j]`` with ``g(Q X, Y) = Ric(X, Y)``."""
        return self.ginv @ self.ricci

    @cached_property
    def scalar(self) -> float:
        return float(np.einsum("jk,jk->", self.ginv, self.ricci))

    def nabla_metric(self) -> np.ndarray:
        return nabla_covariant2(self.g, self.dg, self.gamma)

    def curv(self, X: np.ndarray, Y: np.ndarray, Z: np.ndarray) -> np.ndarray:
        """``R(X, Y)Z`` for batches of vectors (rows)."""
        return np.einsum("lkij,bi,bj,bk->bl", self.riemann, X, Y, Z)


# ---------------------------------------------------------------------------
# public per-point operations returning TensorValue


def christoffel(M: ChartManifold, p) -> TensorValue:
    return TensorValue(PointGeometry(M, p).gamma, ("u", "l", "l"))


def riemann(M: ChartManifold, p) -> TensorValue:
    return TensorValue(PointGeometry(M, p).riemann, ("u", "l", "l", "l"))


def ricci(M: ChartManifold, p) -> TensorValue:
    return TensorValue(PointGeometry(M, p).ricci, ("l", "l"))


def ricci_operator(M: ChartManifold, p) -> TensorValue:
    return TensorValue(PointGeometry(M, p).ricci_operator, ("u", "l"))


def scalar(M: ChartManifold, p) -> float:
    return PointGeometry(M, p).scalar


def covariant_derivative(fld, M: ChartManifold, p) -> TensorValue:
    """Covariant derivative; the differentiation slot comes first in the result."""
    geo = PointGeometry(M, p)
    if isinstance(fld, VectorField):
        v, dv, _ = expr_jets(fld.components, geo.p, order=1)
        return TensorValue(nabla_vector(v, dv, geo.gamma), ("l", "u"))
    if isinstance(fld, OneForm):
        w, dw, _ = expr_jets(fld.components, geo.p, order=1)
        return TensorValue(nabla_oneform(w, dw, geo.gamma), ("l", "l"))
    if isinstance(fld, EndoField):
        a, da, _ = expr_jets(fld.components, geo.p, order=1)
        return TensorValue(nabla_endo(a, da, geo.gamma), ("l", "u", "l"))
    raise TypeError(f"unsupported field type {type(fld).__name__}")


def lie_derivative(fld, direction: VectorField, M: ChartManifold, p, via_connection: bool = False) -> TensorValue:
    """Lie derivative along ``direction``.

    With ``via_connection=True`` the partial derivatives are replaced by
    Levi-Civita covariant derivatives, which gives the same tensor because
    the connection is torsion free.
    """
    p = np.asarray(p, dtype=float)
    V, dV, _ = expr_jets(direction.components, p, order=1)
    G = PointGeometry(M, p).gamma if via_connection else None
    if via_connection:
        dV = nabla_vector(V, dV, G)
    if isinstance(fld, EndoField):
        a, da, _ = expr_jets(fld.components, p, order=1)
        if via_connection:
            da = nabla_endo(a, da, G)
        return TensorValue(lie_endo(a, da, V, dV), ("u", "l"))
    if isinstance(fld, OneForm):
        w, dw, _ = expr_jets(fld.components, p, order=1)
        if via_connection:
            dw = nabla_oneform(w, dw, G)
        return TensorValue(lie_oneform(w, dw, V, dV), ("l",))
    if fld is M or isinstance(fld, ChartManifold):
        geo = PointGeometry(M, p)
        dg = geo.nabla_metric() if via_connection else geo.dg
        return TensorValue(lie_metric(geo.g, dg, V, dV), ("l", "l"))
    raise TypeError(f"unsupported field type {type(fld).__name__}")


def exterior_derivative(form, M: ChartManifold, p, convention: str = "half") -> TensorValue:
    p = np.asarray(p, dtype=float)
    if isinstance(form, OneForm):
        _, dw, _ = expr_jets(form.components, p, order=1)
        return TensorValue(d_oneform(dw, convention), ("l", "l"))
    if isinstance(form, TwoForm):
        _, dB, _ = expr_jets(form.components, p, order=1)
        return TensorValue(d_twoform(dB, convention), ("l", "l", "l"))
    raise TypeError(f"unsupported form type {type(form).__name__}")


def _covariant_riemann(geo: PointGeometry, dR: np.ndarray) -> np.ndarray:
    """``out[m, l, k, i, j] = ∇_m R^l_kij`` given ``dR[m] = ∂_m R``."""
    G, R = geo.gamma, geo.riemann
    return (
        dR
        + np.einsum("lms,skij->mlkij", G, R)
        - np.einsum("smk,lsij->mlkij", G, R)
        - np.einsum("smi,lksj->mlkij", G, R)
        - np.einsum("smj,lkis->mlkij", G, R)
    )


def second_bianchi_residual(M: ChartManifold, p, step: float = 1e-4) -> float:
    """Max of the cyclic sum ∇_m R^l_kij + ∇_i R^l_kjm + ∇_j R^l_kmi.

    ∂R is one central finite-difference layer over exactly differentiated
    curvature. The result is normalised by max(1, max|∇R|).
    """
    p = np.asarray(p, dtype=float)
    geo = PointGeometry(M, p)
    n = M.dim
    dR = np.empty((n,) + geo.riemann.shape)
    for m in range(n):
        e = np.zeros(n)
        e[m] = step
        dR[m] = (PointGeometry(M, p + e).riemann - PointGeometry(M, p - e).riemann) / (2 * step)
    nR = _covariant_riemann(geo, dR)
    cyc = nR + np.einsum("ilkjm->mlkij", nR) + np.einsum("jlkmi->mlkij", nR)
    return float(np.max(np.abs(cyc)) / max(1.0, float(np.max(np.abs(nR)))))
