"""Curvature identities as residuals with explicit applicability gates.

Every identity is an :class:`IdentityCase`: a function producing the list of
individual terms of ``LHS − RHS`` (so the terms sum to zero when the identity
holds), plus the hypotheses under which it is claimed. Multilinear
identities receive batches of test vectors (coordinate-basis combinations
plus random tuples, see :func:`pcgeom.structure.vector_tuples`); pointwise
identities receive only the point.

The residual of one evaluation is ``|Σ terms| / max(1, max |term|)`` in the
max-norm, so tolerances are scale free.

Conventions fixed here (the source leaves them implicit):

* ``Ric*(X, Y) = Σ_i ε_i R(X, E_i, φY, φE_i)`` with
  ``R(X, Y, Z, W) = g(R(X, Y)Z, W)``. This is the ordering for which the
  Ricci identity ``cor-wn2`` holds; see :func:`star_ricci_matrix`.
* ``r* = Σ_{i,j} ε_i ε_j R(E_i, E_j, φE_j, φE_i)``, which equals
  ``−Σ_j ε_j Ric*(E_j, E_j)``. With this r* the scalar identity ``cor-wn4``
  holds in the form printed for ε₀ = 1.
* ``Tr(∇φ)² = Σ_{i,j} ε_i ε_j g((∇_{E_i}φ)E_j, (∇_{E_i}φ)E_j)`` (squared
  norm); the cross pairing is available with ``tr_nabla_phi="cross"``.
* ``cor-wn4`` is evaluated with the ε₀ factors that tracing ``cor-wn2``
  produces; for ε₀ = 1 they disappear. The residual of the form without
  them is reported in the details.
"""

from __future__ import annotations

import zlib
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Sequence

import numpy as np

from .cone import ConeManifold, ConePoint, build_cone, proposition_residuals
from .geometry import (
    SamplingError,
    christoffel_from_metric,
    d_twoform,
    expr_jets,
    form_factor,
    lie_endo,
    lie_oneform,
    second_bianchi_residual,
)
from .residuals import ResidualReport, skipped, summarize
from .structure import (
    PCStructure,
    StructureClass,
    StructurePoint,
    batch_residual,
    classify,
    vector_tuples,
)
from .tensor import FrameError, SingularMetricError, build_frame

__all__ = [
    "SUITES",
    "IdentityCase",
    "PointContext",
    "RunOptions",
    "RunResult",
    "REGISTRY",
    "identities_for",
    "run_identities",
    "sample_points",
    "star_ricci_matrix",
    "star_scalar",
    "tr_nabla_phi_sq",
    "p_tensor",
    "conformally_flat_riemann",
    "ric0_terms",
    "ric1_terms",
    "ric2_terms",
    "nr9b_terms",
    "residual_gray",
    "residual_a0",
    "residual_w0",
    "residual_rcw2",
    "residual_wn1",
    "star_ricci",
    "residual_wn2",
    "residual_wn3",
    "residual_wn4",
    "residual_trp",
    "residual_normal_suite",
    "residual_conformally_flat",
]

SUITES = ("axioms", "geometry", "structure", "cone", "contact", "normal")

FD_STEP = 1e-5


def point_residual(terms) -> float:
    """``|Σ terms| / max(1, max |term|)`` for arrays of any (common) shape."""
    if isinstance(terms, (float, int, np.floating)):
        return float(terms)
    arrs = [np.asarray(t, dtype=float) for t in terms]
    total = np.sum(arrs, axis=0)
    scale = max([1.0] + [float(np.max(np.abs(a), initial=0.0)) for a in arrs])
    return float(np.max(np.abs(total), initial=0.0)) / scale


def _col(a: np.ndarray) -> np.ndarray:
    return np.asarray(a)[:, None]


# ---------------------------------------------------------------------------
# per-point context


class PointContext:
    """Lazily built structure, frame and cone data at one sampled point."""

    def __init__(self, S: PCStructure, p, cone: ConeManifold | None = None, t: float = 1.0):
        self.S = S
        self.p = np.asarray(p, dtype=float)
        self.cone = cone
        self.t = t

    @cached_property
    def sp(self) -> StructurePoint:
        return StructurePoint(self.S, self.p)

    @cached_property
    def frame(self):
        return self.sp.frame()

    @cached_property
    def cp(self) -> ConePoint:
        if self.cone is None:
            self.cone = build_cone(self.S, check=False)
        return ConePoint(self.cone, np.concatenate([[self.t], self.p]))


# ---------------------------------------------------------------------------
# frame sums


def star_ricci_matrix(sp: StructurePoint, frame=None) -> np.ndarray:
    """``Ric*(∂_a, ∂_b) = Σ_i ε_i R(∂_a, E_i, φ∂_b, φE_i)``."""
    F = sp.frame() if frame is None else frame
    E, s = F.vectors, F.signs
    PE = E @ sp.phi_m.T
    return np.einsum("i,ie,if,aecf,cb->ab", s, E, PE, sp.geo.riemann_lowered, sp.phi_m)


def star_scalar(sp: StructurePoint, frame=None) -> float:
    """``r* = Σ_{i,j} ε_i ε_j R(E_i, E_j, φE_j, φE_i)``."""
    F = sp.frame() if frame is None else frame
    E, s = F.vectors, F.signs
    PE = E @ sp.phi_m.T
    return float(np.einsum("i,j,ia,jb,jc,id,abcd->", s, s, E, E, PE, PE, sp.geo.riemann_lowered))


def _nabla_phi_frame(sp: StructurePoint, frame) -> np.ndarray:
    """``M[i] = ∇_{E_i} φ`` as matrices."""
    return np.einsum("ik,kab->iab", frame.vectors, sp.nphi)


def tr_nabla_phi_sq(sp: StructurePoint, frame=None, mode: str = "norm") -> float:
    """Frame trace of (∇φ)²: squared norm (``"norm"``) or cross pairing (``"cross"``)."""
    F = sp.frame() if frame is None else frame
    E, s, g = F.vectors, F.signs, sp.g_m
    M = _nabla_phi_frame(sp, F)
    V = np.einsum("iab,jb->ija", M, E)  # V[i, j] = (∇_{E_i}φ)E_j
    if mode == "norm":
        return float(np.einsum("i,j,ija,ab,ijb->", s, s, V, g, V))
    if mode == "cross":
        return float(np.einsum("i,j,ija,ab,jib->", s, s, V, g, V))
    raise ValueError(f"tr_nabla_phi must be 'norm' or 'cross', got {mode!r}")


def _frame_dPhi(sp: StructurePoint, frame, A, B) -> np.ndarray:
    """Rows ``(∇_{E_i}Φ)(A, B)`` for batched A, B: shape (batch, frame)."""
    nPhiE = np.einsum("ik,kab->iab", frame.vectors, sp.nPhi)
    return np.einsum("pa,iab,pb->pi", A, nPhiE, B)


def p_tensor(sp: StructurePoint, A, B, C) -> np.ndarray:
    """``P(A, B, C) = (∇_AΦ)(B, C) + ε₀ε₁g(A, C)η(B) − ε₀ε₁g(A, B)η(C)``."""
    c = sp.e0 * sp.e1
    return sp.dPhi_op(A, B, C) + c * sp.g(A, C) * sp.eta(B) - c * sp.g(A, B) * sp.eta(C)


# ---------------------------------------------------------------------------
# term builders; each returns terms that sum to zero when the identity holds


def _comm(sp: StructurePoint, A, B, V) -> list[np.ndarray]:
    """``[R(A, B), φ]V`` as two terms."""
    return [sp.R(A, B, sp.phi(V)), -sp.phi(sp.R(A, B, V))]


def _scaled(c: float, terms: list[np.ndarray]) -> list[np.ndarray]:
    return [c * t for t in terms]


def a0_terms(sp: StructurePoint, Z, X, Y, delta: int) -> list[np.ndarray]:
    e0, e1 = sp.e0, sp.e1
    phi, g = sp.phi, sp.g
    pZ, pX, pY = phi(Z), phi(X), phi(Y)
    xi = sp.xi(len(Z))
    etaY = _col(sp.eta(Y))
    pN = phi(sp.N(Z, X))
    lhs = (
        _scaled(delta, _comm(sp, Z, pX, Y))
        + _scaled(delta, _comm(sp, pZ, X, Y))
        + _scaled(e1, _comm(sp, pZ, pX, pY))
        + _comm(sp, Z, X, pY)
        + [etaY * sp.R(pZ, pX, xi), e1 * etaY * sp.R(Z, X, xi)]
    )
    rhs = [
        delta * e1 * sp.dphi_op(pN, Y),
        delta * _col(g(pN, Y)) * xi,
        -delta * e0 * etaY * pN,
    ]
    if delta != 1:
        c = -e0 * e1 * (delta - 1)
        rhs += [
            2 * c * _col(g(pZ, Y)) * pX,
            -2 * c * _col(g(pX, Y)) * pZ,
            -c * _col(g(pZ, pY)) * X,
            c * _col(g(pX, pY)) * Z,
            c * _col(g(Z, Y)) * phi(pX),
            -c * _col(g(X, Y)) * phi(pZ),
        ]
    return lhs + [-t for t in rhs]


def w0_terms(sp: StructurePoint, Z, X, Y) -> list[np.ndarray]:
    e0, e1 = sp.e0, sp.e1
    phi, g, eta = sp.phi, sp.g, sp.eta
    pZ, pX, pY = phi(Z), phi(X), phi(Y)
    xi = sp.xi(len(Z))
    etaY = _col(eta(Y))
    nZX, nXZ = sp.dphi_op(Z, X), sp.dphi_op(X, Z)
    A = nZX - nXZ
    lhs = (
        _comm(sp, Z, pX, Y)
        + _comm(sp, pZ, X, Y)
        + _scaled(-e1, _comm(sp, pZ, pX, pY))
        + _scaled(-1, _comm(sp, Z, X, pY))
        + [-e1 * etaY * sp.R(Z, X, xi), -etaY * sp.R(pZ, pX, xi)]
    )
    rhs = [
        -2 * sp.dphi_op(A, Y),
        2 * e0 * e1 * _col(eta(X)) * sp.dphi_op(Z, Y),
        -2 * e0 * e1 * _col(eta(Z)) * sp.dphi_op(X, Y),
        -2 * e1 * _col(g(Y, A)) * xi,
        2 * e0 * e1 * etaY * A,
        -4 * e0 * _col(g(pX, pY)) * phi(pZ),
        4 * e0 * _col(g(pZ, pY)) * phi(pX),
        4 * e0 * e1 * _col(g(Y, pX)) * pZ,
        -4 * e0 * e1 * _col(g(Y, pZ)) * pX,
    ]
    return lhs + [-t for t in rhs]


def rcw2_terms(sp: StructurePoint, frame, Z, X, Y, W) -> list[np.ndarray]:
    e0, e1 = sp.e0, sp.e1
    phi, g, eta, Rl, dPhi = sp.phi, sp.g, sp.eta, sp.Rl, sp.dPhi_op
    pZ, pX, pY, pW = phi(Z), phi(X), phi(Y), phi(W)
    fsum = np.einsum("i,pi,pi->p", frame.signs, _frame_dPhi(sp, frame, Z, X), _frame_dPhi(sp, frame, W, Y))
    c = e0 * e1
    lhs = [
        Rl(Z, pX, pY, W),
        Rl(Z, pX, Y, pW),
        Rl(pZ, X, pY, W),
        Rl(pZ, X, Y, pW),
        -Rl(pZ, pX, Y, W),
        -e1 * Rl(pZ, pX, pY, pW),
        -e1 * Rl(Z, X, Y, W),
        -Rl(Z, X, pY, pW),
    ]
    rhs = [
        -2 * fsum,
        2 * c * dPhi(Z, W, Y) * eta(X),
        -2 * c * dPhi(X, W, Y) * eta(Z),
        -2 * c * dPhi(Y, Z, X) * eta(W),
        2 * c * dPhi(W, Z, X) * eta(Y),
        4 * e0 * g(pX, pY) * g(pZ, pW),
        -4 * e0 * g(pZ, pY) * g(pX, pW),
        4 * c * g(Y, pX) * g(pZ, W),
        -4 * c * g(Y, pZ) * g(pX, W),
    ]
    return lhs + [-t for t in rhs]


def cyclic_dPhi_terms(sp: StructurePoint, X, Y, Z) -> list[np.ndarray]:
    """``(∇_XΦ)(Z, Y) + (∇_YΦ)(X, Z) + (∇_ZΦ)(Y, X)``."""
    return [sp.dPhi_op(X, Z, Y), sp.dPhi_op(Y, X, Z), sp.dPhi_op(Z, Y, X)]


def wn1a_terms(sp: StructurePoint, X) -> list[np.ndarray]:
    e1 = sp.e1
    xi = sp.xi(len(X))
    phi, h = sp.phi, sp.h
    return [sp.R(xi, X, xi), e1 * phi(sp.R(xi, phi(X), xi)), -2 * phi(phi(X)), 2 * e1 * h(h(X))]


def wn1b_terms(sp: StructurePoint, X, Y, Z) -> list[np.ndarray]:
    e0, e1 = sp.e0, sp.e1
    phi, g, eta, Rl = sp.phi, sp.g, sp.eta, sp.Rl
    xi = sp.xi(len(X))
    pX, pY, pZ = phi(X), phi(Y), phi(Z)
    U = e0 * X - e1 * sp.h(X)
    lhs = [-e1 * Rl(xi, X, Y, Z), -Rl(xi, X, pY, pZ), Rl(xi, pX, pY, Z), Rl(xi, pX, Y, pZ)]
    rhs = [2 * sp.dPhi_op(sp.h(X), Y, Z), -2 * e0 * g(U, Z) * eta(Y), 2 * e0 * g(U, Y) * eta(Z)]
    return lhs + [-t for t in rhs]


def wn2_terms(sp: StructurePoint, frame, X, Y) -> list[np.ndarray]:
    e0, e1, n = sp.e0, sp.e1, sp.n
    g, h, phi = sp.g, sp.h, sp.phi
    Sm = star_ricci_matrix(sp, frame)
    M = _nabla_phi_frame(sp, frame)
    G = np.einsum("i,ica,cd,idb->ab", frame.signs, M, sp.g_m, M)
    lhs = [
        sp.Ric(phi(X), phi(Y)),
        -e1 * sp.Ric(X, Y),
        np.einsum("pa,ab,pb->p", X, Sm, Y),
        np.einsum("pa,ab,pb->p", Y, Sm, X),
    ]
    rhs = [
        -np.einsum("pa,ab,pb->p", X, G, Y),
        (4 * n - 1) * e0 * g(X, Y),
        sp.eta(X) * sp.eta(Y),
        -2 * e1 * g(X, h(Y)),
        -e0 * g(h(X), h(Y)),
    ]
    return lhs + [-t for t in rhs]


def wn3_terms(sp: StructurePoint) -> list:
    xi = sp.xi_v
    return [float(xi @ sp.geo.ricci @ xi), sp.e1 * (2 * sp.n - float(np.trace(sp.h_m @ sp.h_m)))]


def wn4_terms(sp: StructurePoint, frame, mode: str = "norm", general: bool = True) -> list:
    """``r* + ε₁r + 4n²ε₀ − ε₀Tr h² − ½(Tr(∇φ)² − 4nε₀)`` (``general=False`` drops the ε₀)."""
    e0 = sp.e0 if general else 1
    n = sp.n
    trh2 = float(np.trace(sp.h_m @ sp.h_m))
    T = tr_nabla_phi_sq(sp, frame, mode)
    return [star_scalar(sp, frame), sp.e1 * sp.geo.scalar, 4 * n * n * e0, -e0 * trh2, -0.5 * T, 2 * n * e0]


def constant_curvature_terms(sp: StructurePoint, k: float) -> list[np.ndarray]:
    """``R(X, Y, Z, W) − k(g(Y, Z)g(X, W) − g(X, Z)g(Y, W))`` as tensors."""
    g = sp.g_m
    return [sp.geo.riemann_lowered, -k * (np.einsum("bc,ad->abcd", g, g) - np.einsum("ac,bd->abcd", g, g))]


def trp_terms(sp: StructurePoint, frame, Z, X, W, Y) -> list[np.ndarray]:
    E, s = frame.vectors, frame.signs
    B = len(Z)
    out = []
    for i in range(len(s)):
        Ei = np.broadcast_to(E[i], (B, len(E[i])))
        out.append(s[i] * p_tensor(sp, Ei, Z, X) * p_tensor(sp, Ei, W, Y))
    return out


def n3_terms(sp: StructurePoint, Z, X, Y) -> list[np.ndarray]:
    e1 = sp.e1
    pZ, pX, pY = sp.phi(Z), sp.phi(X), sp.phi(Y)
    xi = sp.xi(len(Z))
    etaY = _col(sp.eta(Y))
    return (
        _comm(sp, Z, pX, Y)
        + _comm(sp, pZ, X, Y)
        + _scaled(e1, _comm(sp, pZ, pX, pY))
        + _comm(sp, Z, X, pY)
        + [e1 * etaY * sp.R(Z, X, xi), etaY * sp.R(pZ, pX, xi)]
    )


def opkrzyw_terms(sp: StructurePoint, Z, X, Y) -> list[np.ndarray]:
    e1, phi, R = sp.e1, sp.phi, sp.R
    pZ, pX, pY = phi(Z), phi(X), phi(Y)
    return [
        e1 * R(Z, X, Y),
        -phi(R(Z, X, pY)),
        R(Z, pX, pY),
        -phi(R(Z, pX, Y)),
        R(pZ, X, pY),
        -phi(R(pZ, X, Y)),
        R(pZ, pX, Y),
        -e1 * phi(R(pZ, pX, pY)),
    ]


def nr9a_terms(sp: StructurePoint, X, Y) -> list[np.ndarray]:
    e1, phi, R = sp.e1, sp.phi, sp.R
    xi = sp.xi(len(X))
    pX, pY = phi(X), phi(Y)
    return [e1 * R(xi, X, Y), -phi(R(xi, X, pY)), R(xi, pX, pY), -phi(R(xi, pX, Y))]


# Array-level forms of the conformally flat corollaries. They take plain
# matrices so they can be exercised on manufactured curvature tensors.


def conformally_flat_riemann(g: np.ndarray, ric: np.ndarray) -> np.ndarray:
    """``R[l, k, i, j]`` of a metric with vanishing Weyl tensor and Ricci tensor ``ric``."""
    m = g.shape[0]
    Q = np.linalg.solve(g, ric)
    r = float(np.trace(Q))
    eye = np.eye(m)
    a = 1.0 / (m - 2)
    b = r / ((m - 1) * (m - 2))
    return a * (
        np.einsum("jk,li->lkij", g, Q)
        + np.einsum("jk,li->lkij", ric, eye)
        - np.einsum("ik,lj->lkij", g, Q)
        - np.einsum("ik,lj->lkij", ric, eye)
    ) - b * (np.einsum("jk,li->lkij", g, eye) - np.einsum("ik,lj->lkij", g, eye))


def nr9b_terms(R: np.ndarray, phi: np.ndarray, xi: np.ndarray, eps1: int, X) -> list[np.ndarray]:
    """``ε₁R(ξ, X)ξ − φR(ξ, φX)ξ`` from a curvature array ``R[l, k, i, j]``."""
    Rxi = np.einsum("lkij,k,i->jl", R, xi, xi)  # Rxi[j] = R(ξ, ∂_j)ξ
    return [eps1 * X @ Rxi, -(X @ phi.T @ Rxi) @ phi.T]


def ric0_terms(Q: np.ndarray, phi: np.ndarray, xi: np.ndarray, eta: np.ndarray, X) -> list[np.ndarray]:
    """``QφX − φQX − η(QφX)ξ + η(X)φQξ`` with Q the Ricci operator."""
    QpX = X @ phi.T @ Q.T
    return [QpX, -X @ Q.T @ phi.T, -np.outer(QpX @ eta, xi), np.outer(X @ eta, phi @ Q @ xi)]


def ric1_terms(ric: np.ndarray, phi: np.ndarray, xi: np.ndarray, eta: np.ndarray, eps1: int, X, Y) -> list[np.ndarray]:
    """``Ric(X, Y) + ε₁Ric(φX, φY) − η(X)Ric(Y, ξ) − η(Y)Ric(X, ξ) + η(X)η(Y)Ric(ξ, ξ)``."""

    def bil(A, B):
        return np.einsum("pa,ab,pb->p", A, ric, B)

    pX, pY = X @ phi.T, Y @ phi.T
    ex, ey = X @ eta, Y @ eta
    rx = ric @ xi
    return [bil(X, Y), eps1 * bil(pX, pY), -ex * (Y @ rx), -ey * (X @ rx), ex * ey * float(xi @ rx)]


def ric2_terms(ric: np.ndarray, phi: np.ndarray, xi: np.ndarray, eta: np.ndarray, eps1: int, X) -> list[np.ndarray]:
    """``Ric(X, X) + ε₁Ric(φX, φX)`` on ``X ∈ Ker η`` (X is projected first)."""
    X = X - np.outer(X @ eta, xi)
    pX = X @ phi.T
    return [np.einsum("pa,ab,pb->p", X, ric, X), eps1 * np.einsum("pa,ab,pb->p", pX, ric, pX)]


def weyl_terms(sp: StructurePoint) -> list[np.ndarray]:
    return [sp.geo.riemann, -conformally_flat_riemann(sp.g_m, sp.geo.ricci)]


# ---------------------------------------------------------------------------
# geometry checks


def _fd_christoffel(sp: StructurePoint) -> np.ndarray:
    M, p = sp.S.base, sp.p
    n = M.dim
    dg = np.empty((n, n, n))
    for k in range(n):
        e = np.zeros(n)
        e[k] = FD_STEP
        dg[k] = (M.metric_at(p + e) - M.metric_at(p - e)) / (2 * FD_STEP)
    return christoffel_from_metric(sp.g_m, sp.geo.ginv, dg)


def _riemann_symmetries(sp: StructurePoint) -> dict[str, list[np.ndarray]]:
    Rl = sp.geo.riemann_lowered
    return {
        "riemann-antisym-12": [Rl, np.einsum("abcd->bacd", Rl)],
        "riemann-antisym-34": [Rl, np.einsum("abcd->abdc", Rl)],
        "riemann-pair": [Rl, -np.einsum("abcd->cdab", Rl)],
        "bianchi-1": [Rl, np.einsum("abcd->bcad", Rl), np.einsum("abcd->cabd", Rl)],
    }


def _dd_eta(sp: StructurePoint) -> np.ndarray:
    _, _, d2 = expr_jets(sp.S.eta.components, sp.p, order=2)
    # ∂_k (dη)_ab = f (∂_k∂_a η_b − ∂_k∂_b η_a)
    ddeta = form_factor(sp.S.d_eta, 1) * (d2 - np.einsum("kab->kba", d2))
    return d_twoform(ddeta, sp.S.d_eta)


def _leibniz_terms(sp: StructurePoint, X, Y) -> list[np.ndarray]:
    """∇_X(φY) = (∇_Xφ)Y + φ∇_XY for coordinate-constant Y."""
    G = sp.geo.gamma
    # derivative of the field φY along ∂_k is (∂_kφ)Y; covariantly add Γ(φY)
    dV = np.einsum("kij,pj->pki", sp.dphi, Y)
    nV = dV + np.einsum("ikm,mj,pj->pki", G, sp.phi_m, Y)
    direct = np.einsum("pk,pki->pi", X, nV)
    nablaXY = np.einsum("ikm,pk,pm->pi", G, X, Y)
    return [direct, -sp.dphi_op(X, Y), -sp.phi(nablaXY)]


def _lie_terms(sp: StructurePoint) -> list[np.ndarray]:
    """L_ξφ and L_ξη from partial derivatives against the same from ∇."""
    a = lie_endo(sp.phi_m, sp.dphi, sp.xi_v, sp.dxi).ravel()
    b = lie_oneform(sp.eta_v, sp.deta, sp.xi_v, sp.dxi)
    a2 = lie_endo(sp.phi_m, sp.nphi, sp.xi_v, sp.nxi).ravel()
    b2 = lie_oneform(sp.eta_v, sp.neta, sp.xi_v, sp.nxi)
    return [np.concatenate([a, b]), -np.concatenate([a2, b2])]


def _h_property_residual(sp: StructurePoint) -> float:
    h, phi, g, xi, eta = sp.h_m, sp.phi_m, sp.g_m, sp.xi_v, sp.eta_v
    gh = g @ h
    return max(
        point_residual([gh, -gh.T]),
        point_residual([phi @ h, h @ phi]),
        point_residual([np.trace(h)]),
        point_residual([h @ xi]),
        point_residual([eta @ h]),
    )


# ---------------------------------------------------------------------------
# registry


@dataclass(frozen=True)
class IdentityCase:
    """One identity: its terms, hypotheses and how it is sampled.

    ``kind`` is ``"multilinear"`` (``fn(ctx, *vectors, **kw)`` returns batched
    terms), ``"pointwise"`` (``fn(ctx, **kw)`` returns terms or a residual) or
    ``"equivalence"`` (``fn(ctx, **kw)`` returns the two residuals whose
    vanishing must agree). ``deltas`` is ``None``, ``"cond15"`` (every δ for
    which the base satisfies the δ-condition) or ``"pm"`` (δ = ±1).
    """

    id: str
    suite: str
    fn: Callable
    kind: str = "pointwise"
    arity: int = 0
    scope: str = "base"
    hypotheses: tuple[str, ...] = ()
    deltas: str | None = None
    needs_frame: bool = False
    min_tol: float = 0.0
    max_points: int | None = None
    precondition: Callable | None = None
    description: str = ""


def _axiom_case(name: str, key: str) -> IdentityCase:
    def fn(ctx):
        res = ctx.sp.axiom_residuals()
        return res.get(key, 0.0)

    return IdentityCase(name, "axioms", fn, description=key)


_AXIOMS = [
    ("axiom-phi-squared", "phi^2 = eps1 (I - eta (x) xi)"),
    ("axiom-eta-xi", "eta(xi) = 1"),
    ("axiom-phi-xi", "phi xi = 0"),
    ("axiom-eta-phi", "eta o phi = 0"),
    ("axiom-metric", "g(phi X, phi Y) = -eps1 (g(X,Y) - eps0 eta(X) eta(Y))"),
    ("axiom-eta-g-xi", "eta(X) = eps0 g(X, xi)"),
    ("axiom-g-xi-xi", "g(xi, xi) = eps0"),
]


# preconditions: fn(ctxs, tol, delta) -> (ok, residual, reason)


def _pre_constant_curvature(ctxs, tol, delta):
    worst = 0.0
    for c in ctxs:
        sp = c.sp
        worst = max(worst, point_residual(constant_curvature_terms(sp, -sp.e0 * sp.e1)))
    return worst <= tol, worst, "no constant-curvature example: curvature is not constant -eps0*eps1"


def _pre_conformally_flat(ctxs, tol, delta):
    S = ctxs[0].S
    if S.dim < 5:
        return False, None, f"requires dimension >= 5 (got {S.dim})"
    worst = max(point_residual(weyl_terms(c.sp)) for c in ctxs)
    return worst <= tol, worst, "not conformally flat: Weyl reconstruction residual exceeds tolerance"


def _pre_gray(ctxs, tol, delta):
    worst = 0.0
    for c in ctxs:
        X, Y = vector_tuples(c.cp.dim, 2)
        worst = max(worst, float(np.max(batch_residual(c.cp.condition14_terms(X, Y, delta)))))
    return worst <= tol, worst, f"cone condition [nabla_JX, J] = delta J [nabla_X, J] fails for delta={delta:+d}"


def _equiv_norm(ctx):
    sp = ctx.sp
    X, Y = vector_tuples(sp.dim, 2)
    return sp.normal_residual(), float(np.max(batch_residual(sp.normality_criterion_terms(X, Y))))


def _equiv_prop(key):
    def fn(ctx, delta=None):
        res = proposition_residuals(ctx.cp)
        k = key if delta is None else f"{key}{delta:+d}"
        return res[f"{k}:cone"], res[f"{k}:base"]

    return fn


def _build_registry() -> list[IdentityCase]:
    cases: list[IdentityCase] = [_axiom_case(n, k) for n, k in _AXIOMS]
    cases.append(
        IdentityCase(
            "axiom-paracomplex",
            "axioms",
            lambda ctx: ctx.sp.paracomplex_residual() if ctx.S.eps1 == 1 else 0.0,
            description="phi on ker eta has eigenvalues +1 and -1, each with multiplicity n (eps1 = 1 only)",
        )
    )

    G = "geometry"
    cases += [
        IdentityCase(
            "christoffel-symmetry", G, lambda c: [c.sp.geo.gamma, -np.einsum("kij->kji", c.sp.geo.gamma)]
        ),
        IdentityCase(
            "christoffel-fd", G, lambda c: [c.sp.geo.gamma, -_fd_christoffel(c.sp)], min_tol=1e-6,
            description="exact Christoffels against central differences of the metric",
        ),
        IdentityCase("metric-compatibility", G, lambda c: [c.sp.geo.nabla_metric()]),
    ]
    for key in ("riemann-antisym-12", "riemann-antisym-34", "riemann-pair", "bianchi-1"):
        cases.append(IdentityCase(key, G, lambda c, _k=key: _riemann_symmetries(c.sp)[_k]))
    cases += [
        IdentityCase("ricci-symmetric", G, lambda c: [c.sp.geo.ricci, -c.sp.geo.ricci.T]),
        IdentityCase(
            "bianchi-2", G, lambda c: second_bianchi_residual(c.S.base, c.p), min_tol=1e-7, max_points=16,
            description="uses one finite-difference layer over exact curvature",
        ),
        IdentityCase("dd-eta", G, lambda c: [_dd_eta(c.sp)]),
        IdentityCase("leibniz-phi", G, lambda c, X, Y: _leibniz_terms(c.sp, X, Y), kind="multilinear", arity=2),
        IdentityCase("lie-connection", G, lambda c: _lie_terms(c.sp)),
        IdentityCase("nijenhuis-connection", G, lambda c: [c.sp.N_t, -c.sp.N_connection]),
    ]

    St = "structure"
    cases += [
        IdentityCase("Phi-antisymmetric", St, lambda c: [c.sp.Phi_m, c.sp.Phi_m.T]),
        IdentityCase("N-antisymmetric", St, lambda c: [c.sp.N_t, np.einsum("iab->iba", c.sp.N_t)]),
        IdentityCase(
            "thm-a0", St, lambda c, Z, X, Y, delta: a0_terms(c.sp, Z, X, Y, delta),
            kind="multilinear", arity=3, deltas="cond15",
        ),
        IdentityCase("prop-norm", St, _equiv_norm, kind="equivalence"),
    ]

    Co = "cone"
    cases += [
        IdentityCase("cone-invariants", Co, lambda c: max(c.cp.invariant_residuals().values()), scope="cone"),
        IdentityCase("cone-connection", Co, lambda c: c.cp.connection_residual(), scope="cone"),
        IdentityCase("cone-nabla-J", Co, lambda c: c.cp.delJ_residual(), scope="cone"),
        IdentityCase("cone-curvature", Co, lambda c: c.cp.curvature_residual(), scope="cone"),
        IdentityCase("cone-curvature-J", Co, lambda c: c.cp.curvature_J_residual(), scope="cone"),
        IdentityCase("cone-nijenhuis", Co, lambda c: c.cp.nijenhuis_residual(), scope="cone"),
        IdentityCase("cone-d-omega", Co, lambda c: c.cp.dOmega_residual(), scope="cone"),
        IdentityCase("prop-kaehler", Co, _equiv_prop("prop-kaehler"), kind="equivalence", scope="cone"),
        IdentityCase("prop-almost-kaehler", Co, _equiv_prop("prop-almost-kaehler"), kind="equivalence", scope="cone"),
        IdentityCase("prop-delta", Co, _equiv_prop("prop-delta"), kind="equivalence", scope="cone", deltas="pm"),
        IdentityCase(
            "thm-gray", Co, lambda c, X, Y, V, delta: c.cp.gray_terms(X, Y, V, delta),
            kind="multilinear", arity=3, scope="cone", deltas="pm", precondition=_pre_gray,
        ),
    ]

    Ct, cm = "contact", ("contact_metric",)
    cases += [
        IdentityCase("h-properties", Ct, lambda c: _h_property_residual(c.sp), hypotheses=cm),
        IdentityCase(
            "eq-nabla-xi", Ct,
            lambda c, X: [c.sp.dxi_op(X), c.sp.e0 * c.sp.phi(X), -c.sp.e1 * c.sp.phi(c.sp.h(X))],
            kind="multilinear", arity=1, hypotheses=cm,
        ),
        IdentityCase("phi-twist", Ct, lambda c, X, Y: _phi_twist_terms(c.sp, X, Y), kind="multilinear", arity=2, hypotheses=cm),
        IdentityCase("prop-s3", Ct, lambda c, X, Y: _s3_terms(c.sp, X, Y), kind="multilinear", arity=2, hypotheses=cm),
        IdentityCase(
            "prop-nijenhuis", Ct, lambda c, X, Y: _nijen_terms(c.sp, X, Y), kind="multilinear", arity=2, hypotheses=cm
        ),
        IdentityCase("nabla-xi-xi", Ct, lambda c: [c.sp.xi_v @ c.sp.nxi], hypotheses=cm),
        IdentityCase("nabla-xi-phi", Ct, lambda c: [np.einsum("k,kij->ij", c.sp.xi_v, c.sp.nphi)], hypotheses=cm),
        IdentityCase(
            "thm-w0", Ct, lambda c, Z, X, Y: w0_terms(c.sp, Z, X, Y), kind="multilinear", arity=3, hypotheses=cm
        ),
        IdentityCase(
            "thm-rcw2", Ct, lambda c, Z, X, Y, W: rcw2_terms(c.sp, c.frame, Z, X, Y, W),
            kind="multilinear", arity=4, hypotheses=cm, needs_frame=True,
        ),
        IdentityCase(
            "rcw2-cyclic", Ct, lambda c, X, Y, Z: cyclic_dPhi_terms(c.sp, X, Y, Z),
            kind="multilinear", arity=3, hypotheses=cm,
        ),
        IdentityCase("cor-wn1a", Ct, lambda c, X: wn1a_terms(c.sp, X), kind="multilinear", arity=1, hypotheses=cm),
        IdentityCase(
            "cor-wn1b", Ct, lambda c, X, Y, Z: wn1b_terms(c.sp, X, Y, Z), kind="multilinear", arity=3, hypotheses=cm
        ),
        IdentityCase(
            "cor-wn2", Ct, lambda c, X, Y: wn2_terms(c.sp, c.frame, X, Y),
            kind="multilinear", arity=2, hypotheses=cm, needs_frame=True,
        ),
        IdentityCase("cor-wn3", Ct, lambda c: wn3_terms(c.sp), hypotheses=cm),
        IdentityCase(
            "cor-wn4", Ct, lambda c, tr_nabla_phi="norm": wn4_terms(c.sp, c.frame, tr_nabla_phi),
            hypotheses=cm, needs_frame=True,
        ),
        IdentityCase(
            "cor-trp", Ct, lambda c, Z, X, W, Y: trp_terms(c.sp, c.frame, Z, X, W, Y),
            kind="multilinear", arity=4, hypotheses=cm, needs_frame=True, precondition=_pre_constant_curvature,
        ),
    ]

    No, nm = "normal", ("normal",)
    cases += [
        IdentityCase(
            "normality-criterion", No, lambda c, X, Y: c.sp.normality_criterion_terms(X, Y), kind="multilinear", arity=2,
            hypotheses=nm,
        ),
        IdentityCase("thm-n3", No, lambda c, Z, X, Y: n3_terms(c.sp, Z, X, Y), kind="multilinear", arity=3, hypotheses=nm),
        IdentityCase(
            "thm-opkrzyw", No, lambda c, Z, X, Y: opkrzyw_terms(c.sp, Z, X, Y), kind="multilinear", arity=3,
            hypotheses=nm,
        ),
        IdentityCase("cor-nr9a", No, lambda c, X, Y: nr9a_terms(c.sp, X, Y), kind="multilinear", arity=2, hypotheses=nm),
        IdentityCase(
            "cor-nr9b", No, lambda c, X: nr9b_terms(c.sp.geo.riemann, c.sp.phi_m, c.sp.xi_v, c.sp.e1, X),
            kind="multilinear", arity=1, hypotheses=nm,
        ),
        IdentityCase(
            "cor-ric0", No, lambda c, X: ric0_terms(c.sp.geo.ricci_operator, c.sp.phi_m, c.sp.xi_v, c.sp.eta_v, X),
            kind="multilinear", arity=1, hypotheses=nm, precondition=_pre_conformally_flat,
        ),
        IdentityCase(
            "cor-ric1", No,
            lambda c, X, Y: ric1_terms(c.sp.geo.ricci, c.sp.phi_m, c.sp.xi_v, c.sp.eta_v, c.sp.e1, X, Y),
            kind="multilinear", arity=2, hypotheses=nm, precondition=_pre_conformally_flat,
        ),
        IdentityCase(
            "cor-ric2", No,
            lambda c, X: ric2_terms(c.sp.geo.ricci, c.sp.phi_m, c.sp.xi_v, c.sp.eta_v, c.sp.e1, X),
            kind="multilinear", arity=1, hypotheses=nm, precondition=_pre_conformally_flat,
        ),
    ]
    ids = [c.id for c in cases]
    assert len(ids) == len(set(ids)), "identity ids must be unique"
    return cases


def _phi_twist_terms(sp: StructurePoint, X, Y) -> list[np.ndarray]:
    """ε₁(∇_{φX}φ)φY − (∇_Xφ)Y − 2ε₁g(X, Y)ξ + ε₁η(Y)(ε₀X − ε₁hX + ε₀η(X)ξ)."""
    e0, e1 = sp.e0, sp.e1
    xi = sp.xi(len(X))
    etaY = _col(sp.eta(Y))
    return [
        e1 * sp.dphi_op(sp.phi(X), sp.phi(Y)),
        -sp.dphi_op(X, Y),
        -2 * e1 * _col(sp.g(X, Y)) * xi,
        e1 * e0 * etaY * X,
        -etaY * sp.h(X),
        e1 * e0 * etaY * _col(sp.eta(X)) * xi,
    ]


def _s3_terms(sp: StructurePoint, X, Y) -> list[np.ndarray]:
    """(∇_{φX}φ)Y + φ(∇_Xφ)Y + ε₀ε₁(g(φ(ε₀X + ε₁hX), Y)ξ − 2η(Y)φX)."""
    e0, e1 = sp.e0, sp.e1
    xi = sp.xi(len(X))
    pX = sp.phi(X)
    return [
        sp.dphi_op(pX, Y),
        sp.phi(sp.dphi_op(X, Y)),
        e0 * e1 * _col(sp.g(sp.phi(e0 * X + e1 * sp.h(X)), Y)) * xi,
        -2 * e0 * e1 * _col(sp.eta(Y)) * pX,
    ]


def _nijen_terms(sp: StructurePoint, X, Y) -> list[np.ndarray]:
    e0, e1 = sp.e0, sp.e1
    phi = sp.phi
    rhs = [
        -2 * phi(sp.dphi_op(X, Y)),
        2 * phi(sp.dphi_op(Y, X)),
        2 * e0 * e1 * _col(sp.eta(Y)) * phi(X),
        -2 * e0 * e1 * _col(sp.eta(X)) * phi(Y),
        2 * e1 * _col(sp.g(X, phi(Y))) * sp.xi(len(X)),
    ]
    return [sp.N(X, Y)] + [-t for t in rhs]


REGISTRY: tuple[IdentityCase, ...] = tuple(_build_registry())


def identities_for(suites: Sequence[str]) -> list[IdentityCase]:
    wanted = set(SUITES) if "all" in suites else set(suites)
    unknown = wanted - set(SUITES)
    if unknown:
        raise ValueError(f"unknown suite(s): {', '.join(sorted(unknown))}")
    return [c for c in REGISTRY if c.suite in wanted]


# ---------------------------------------------------------------------------
# runner


@dataclass
class RunOptions:
    tr_nabla_phi: str = "norm"


@dataclass
class RunResult:
    example: str
    reports: list[ResidualReport]
    classification: StructureClass | None
    points: np.ndarray
    config: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        """True when every non-skipped identity passed."""
        return all(r.passed for r in self.reports if not r.skipped)

    @property
    def exit_code(self) -> int:
        return 0 if self.ok else 1

    def report(self, identity: str, delta: int | None = None) -> ResidualReport:
        for r in self.reports:
            if r.identity == identity and (delta is None or r.delta == delta):
                return r
        raise KeyError(identity)


def sample_points(S: PCStructure, k: int, rng: np.random.Generator, budget_factor: int = 10) -> np.ndarray:
    """``k`` admissible base points at which a pseudo-orthonormal frame exists."""
    M = S.base
    out = []
    for _ in range(budget_factor * k):
        p = M.draw_point(rng)
        try:
            build_frame(M.metric_at(p))
        except (FrameError, SingularMetricError):
            continue
        out.append(p)
        if len(out) == k:
            return np.array(out)
    raise SamplingError(f"only {len(out)} of {k} points had a usable frame after {budget_factor * k} draws")


def _delta_code(delta: int | None) -> int:
    return {None: 0, 1: 1, -1: 2}[delta]


def _rng(seed: int, ident: str, idx: int, delta: int | None) -> np.random.Generator:
    return np.random.default_rng([seed, zlib.crc32(ident.encode()), idx, _delta_code(delta)])


def _evaluate(case: IdentityCase, ctxs, seed, vectors, tol, delta, options: RunOptions) -> ResidualReport:
    use = ctxs if case.max_points is None else ctxs[: case.max_points]
    tol_eff = max(tol, case.min_tol)
    kw = {} if delta is None else {"delta": delta}
    details: dict = {}
    if case.id == "cor-wn4":
        kw["tr_nabla_phi"] = options.tr_nabla_phi
        details["tr_nabla_phi"] = options.tr_nabla_phi
    name = ctxs[0].S.name
    if case.kind == "equivalence":
        lhs = rhs = 0.0
        for c in use:
            a, b = case.fn(c, **kw)
            lhs, rhs = max(lhs, a), max(rhs, b)
        agree = (lhs <= tol) == (rhs <= tol)
        details.update({"lhs_residual": lhs, "rhs_residual": rhs, "lhs_vanishes": lhs <= tol, "rhs_vanishes": rhs <= tol})
        return summarize(
            case.id, name, [0.0 if agree else 1.0], tol, suite=case.suite, delta=delta, points=len(use), details=details
        )
    values = []
    nvec = 0
    for idx, c in enumerate(use):
        if case.kind == "pointwise":
            values.append(point_residual(case.fn(c, **kw)))
            continue
        dim = c.cp.dim if case.scope == "cone" else c.S.dim
        vecs = vector_tuples(dim, case.arity, _rng(seed, case.id, idx, delta), vectors)
        nvec = len(vecs[0])
        values.append(batch_residual(case.fn(c, *vecs, **kw)))
    if case.id == "cor-wn4":
        details["printed_form_residual"] = max(
            point_residual(wn4_terms(c.sp, c.frame, options.tr_nabla_phi, general=False)) for c in use
        )
    return summarize(
        case.id, name, values, tol_eff, suite=case.suite, delta=delta, points=len(use), vectors=nvec, details=details
    )


def run_identities(
    S: PCStructure,
    suites: Sequence[str] = ("all",),
    points: int = 32,
    vectors: int = 8,
    seed: int = 0,
    tol: float = 1e-7,
    classify_tol: float = 1e-7,
    options: RunOptions | None = None,
) -> RunResult:
    """Evaluate every identity of ``suites`` on ``S``; reports are in registry order."""
    if points < 1:
        raise ValueError("points must be >= 1")
    if tol <= 0:
        raise ValueError("tol must be > 0")
    options = options or RunOptions()
    cases = identities_for(suites)
    pts = sample_points(S, points, np.random.default_rng([seed, 0]))
    trng = np.random.default_rng([seed, 1])
    cone = build_cone(S, check=False) if any(c.scope == "cone" for c in cases) else None
    ts = trng.uniform(0.5, 2.0, size=len(pts))
    ctxs = [PointContext(S, p, cone, float(t)) for p, t in zip(pts, ts)]

    axiom_worst = max(max(c.sp.axiom_residuals().values()) for c in ctxs)
    axioms_ok = axiom_worst <= max(tol, 1e-9)
    cls = classify(S, pts, tol=classify_tol, axiom_tol=np.inf) if axioms_ok else None
    flags = cls.flags() if cls else {}

    reports: list[ResidualReport] = []
    for case in cases:
        if case.suite != "axioms" and not axioms_ok:
            reports.append(skipped(case.id, S.name, "structure axioms fail", suite=case.suite, tol=tol))
            continue
        missing = [h for h in case.hypotheses if not flags.get(h, False)]
        if missing:
            reason = "requires " + ", ".join(missing) + " (not satisfied at sampled points)"
            reports.append(skipped(case.id, S.name, reason, suite=case.suite, tol=tol))
            continue
        if case.deltas is None:
            deltas: tuple = (None,)
        elif case.deltas == "cond15":
            deltas = cls.condition15
            if not deltas:
                reason = "the delta-condition on nabla phi holds for no delta"
                reports.append(skipped(case.id, S.name, reason, suite=case.suite, tol=tol))
                continue
        else:
            deltas = (1, -1)
        for delta in deltas:
            pre_details = {}
            if case.precondition is not None:
                ok, res, reason = case.precondition(ctxs, tol, delta)
                pre_details = {"precondition_residual": res}
                if not ok:
                    rep = skipped(case.id, S.name, reason, suite=case.suite, delta=delta, tol=tol)
                    rep.details.update(pre_details)
                    reports.append(rep)
                    continue
            rep = _evaluate(case, ctxs, seed, vectors, tol, delta, options)
            rep.details.update(pre_details)
            reports.append(rep)

    config = {
        "example": S.name,
        "suites": list(suites),
        "points": points,
        "vectors": vectors,
        "seed": seed,
        "tol": tol,
        "classify_tol": classify_tol,
        "d_eta": S.d_eta,
        "tr_nabla_phi": options.tr_nabla_phi,
    }
    return RunResult(S.name, reports, cls, pts, config)


# ---------------------------------------------------------------------------
# single-evaluation helpers


def _rows(*vs):
    return [np.atleast_2d(np.asarray(v, dtype=float)) for v in vs]


def residual_gray(C: ConeManifold, delta: int, X, Y, V, p) -> float:
    cp = ConePoint(C, p)
    return float(batch_residual(cp.gray_terms(*_rows(X, Y, V), delta))[0])


def residual_a0(S: PCStructure, delta: int, Z, X, Y, p) -> float:
    return float(batch_residual(a0_terms(StructurePoint(S, p), *_rows(Z, X, Y), delta))[0])


def residual_w0(S: PCStructure, Z, X, Y, p) -> float:
    return float(batch_residual(w0_terms(StructurePoint(S, p), *_rows(Z, X, Y)))[0])


def residual_rcw2(S: PCStructure, Z, X, Y, W, p, frame=None) -> float:
    sp = StructurePoint(S, p)
    return float(batch_residual(rcw2_terms(sp, frame or sp.frame(), *_rows(Z, X, Y, W)))[0])


def residual_wn1(S: PCStructure, X, Y, Z, p) -> tuple[float, float]:
    sp = StructurePoint(S, p)
    (x,) = _rows(X)
    return (
        float(batch_residual(wn1a_terms(sp, x))[0]),
        float(batch_residual(wn1b_terms(sp, *_rows(X, Y, Z)))[0]),
    )


def star_ricci(S: PCStructure, X, Y, p, frame=None) -> float:
    sp = StructurePoint(S, p)
    return float(np.asarray(X, dtype=float) @ star_ricci_matrix(sp, frame) @ np.asarray(Y, dtype=float))


def residual_wn2(S: PCStructure, X, Y, p, frame=None) -> float:
    sp = StructurePoint(S, p)
    return float(batch_residual(wn2_terms(sp, frame or sp.frame(), *_rows(X, Y)))[0])


def residual_wn3(S: PCStructure, p) -> float:
    return point_residual(wn3_terms(StructurePoint(S, p)))


def residual_wn4(S: PCStructure, p, tr_nabla_phi: str = "norm", general: bool = True) -> float:
    sp = StructurePoint(S, p)
    return point_residual(wn4_terms(sp, sp.frame(), tr_nabla_phi, general))


def residual_trp(S: PCStructure, Z, X, W, Y, p, frame=None) -> float:
    sp = StructurePoint(S, p)
    return float(batch_residual(trp_terms(sp, frame or sp.frame(), *_rows(Z, X, W, Y)))[0])


def residual_normal_suite(S: PCStructure, Z, X, Y, p) -> dict[str, float]:
    sp = StructurePoint(S, p)
    z, x, y = _rows(Z, X, Y)
    return {
        "thm-n3": float(batch_residual(n3_terms(sp, z, x, y))[0]),
        "thm-opkrzyw": float(batch_residual(opkrzyw_terms(sp, z, x, y))[0]),
        "cor-nr9a": float(batch_residual(nr9a_terms(sp, x, y))[0]),
        "cor-nr9b": float(batch_residual(nr9b_terms(sp.geo.riemann, sp.phi_m, sp.xi_v, sp.e1, x))[0]),
    }


def residual_conformally_flat(S: PCStructure, X, Y, p) -> tuple[float, float, float]:
    sp = StructurePoint(S, p)
    x, y = _rows(X, Y)
    g = sp.geo
    return (
        float(batch_residual(ric0_terms(g.ricci_operator, sp.phi_m, sp.xi_v, sp.eta_v, x))[0]),
        float(batch_residual(ric1_terms(g.ricci, sp.phi_m, sp.xi_v, sp.eta_v, sp.e1, x, y))[0]),
        float(batch_residual(ric2_terms(g.ricci, sp.phi_m, sp.xi_v, sp.eta_v, sp.e1, x))[0]),
    )
