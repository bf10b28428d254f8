"""Almost (para)contact metric structures on a chart.

A structure is the quadruple (φ, ξ, η, g) with signs ε₀ = g(ξ, ξ) and
ε₁ = ±1 (−1 contact type, +1 paracontact type) subject to

    φ² = ε₁(I − η⊗ξ),  η(ξ) = 1,  g(φX, φY) = −ε₁(g(X, Y) − ε₀η(X)η(Y)).

:class:`StructurePoint` evaluates every tensor the package needs at one
point and exposes them as operators on batches of vectors (arrays of shape
``(B, dim)``), so identities can be written once and evaluated on many
argument tuples at the same time.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import cached_property
from typing import Sequence

import numpy as np

from . import geometry as geom
from .geometry import ChartManifold, EndoField, OneForm, PointGeometry, VectorField, expr_jets
from .tensor import TensorValue, build_frame

__all__ = [
    "PCStructure",
    "StructurePoint",
    "StructureClass",
    "AxiomError",
    "NotContactMetricError",
    "relative_residual",
    "check_axioms",
    "fundamental_form",
    "nijenhuis",
    "n1_n2_n3_n4",
    "h_operator",
    "classify",
    "vector_tuples",
    "batch_residual",
    "batch_defect",
]


class AxiomError(ValueError):
    """A defining identity of the structure fails; ``axiom`` names it."""

    def __init__(self, axiom: str, point, residual: float):
        self.axiom = axiom
        self.point = np.asarray(point).tolist()
        self.residual = residual
        super().__init__(f"axiom '{axiom}' fails at point {self.point} (residual {residual:.3e})")


class NotContactMetricError(ValueError):
    pass


def relative_residual(lhs, rhs=0.0) -> float:
    """max|lhs − rhs| / max(1, max|lhs|, max|rhs|)."""
    lhs = np.asarray(lhs, dtype=float)
    rhs = np.asarray(rhs, dtype=float)
    scale = max(1.0, float(np.max(np.abs(lhs), initial=0.0)), float(np.max(np.abs(rhs), initial=0.0)))
    return float(np.max(np.abs(lhs - rhs), initial=0.0)) / scale


@dataclass(frozen=True)
class PCStructure:
    base: ChartManifold
    phi: EndoField
    xi: VectorField
    eta: OneForm
    eps0: int
    eps1: int
    d_eta: str = "half"
    name: str = ""
    notes: str = field(default="", compare=False)

    def __post_init__(self):
        if self.eps0 not in (1, -1) or self.eps1 not in (1, -1):
            raise ValueError("eps0 and eps1 must be +1 or -1")
        n = self.base.dim
        if n % 2 == 0:
            raise ValueError(f"structure needs an odd-dimensional chart, got dimension {n}")
        if len(self.xi.components) != n or len(self.eta.components) != n:
            raise ValueError("xi and eta need one component per coordinate")
        if len(self.phi.components) != n or any(len(r) != n for r in self.phi.components):
            raise ValueError(f"phi must be {n}x{n}")
        geom.form_factor(self.d_eta, 1)

    @property
    def dim(self) -> int:
        return self.base.dim

    @property
    def n(self) -> int:
        return (self.base.dim - 1) // 2

    def with_convention(self, d_eta: str) -> "PCStructure":
        return PCStructure(self.base, self.phi, self.xi, self.eta, self.eps0, self.eps1, d_eta, self.name, self.notes)

    def at(self, p) -> "StructurePoint":
        return StructurePoint(self, p)


def _b(v: np.ndarray, B: int) -> np.ndarray:
    return np.broadcast_to(v, (B, v.shape[-1]))


class StructurePoint:
    """All structure tensors at one point, with batched operator helpers."""

    def __init__(self, S: PCStructure, p):
        self.S = S
        self.p = np.asarray(p, dtype=float)
        self.geo = PointGeometry(S.base, self.p)
        self.e0, self.e1 = S.eps0, S.eps1
        self.dim = S.dim
        self.n = S.n
        self.phi_m, self.dphi, _ = expr_jets(S.phi.components, self.p, order=1)
        self.xi_v, self.dxi, _ = expr_jets(S.xi.components, self.p, order=1)
        self.eta_v, self.deta, _ = expr_jets(S.eta.components, self.p, order=1)

    # ---- raw tensors -----------------------------------------------------
    @property
    def g_m(self) -> np.ndarray:
        return self.geo.g

    @cached_property
    def nphi(self) -> np.ndarray:
        return geom.nabla_endo(self.phi_m, self.dphi, self.geo.gamma)

    @cached_property
    def nxi(self) -> np.ndarray:
        return geom.nabla_vector(self.xi_v, self.dxi, self.geo.gamma)

    @cached_property
    def neta(self) -> np.ndarray:
        return geom.nabla_oneform(self.eta_v, self.deta, self.geo.gamma)

    @cached_property
    def Phi_m(self) -> np.ndarray:
        """Φ(∂_a, ∂_b) = g(∂_a, φ∂_b)."""
        return self.geo.g @ self.phi_m

    @cached_property
    def nPhi(self) -> np.ndarray:
        """(∇_k Φ)(∂_a, ∂_b) = g(∂_a, (∇_k φ)∂_b)."""
        return np.einsum("ac,kcb->kab", self.geo.g, self.nphi)

    @cached_property
    def dPhi_partial(self) -> np.ndarray:
        """∂_k Φ_ab by the product rule on exact jets."""
        return np.einsum("kac,cb->kab", self.geo.dg, self.phi_m) + np.einsum("ac,kcb->kab", self.geo.g, self.dphi)

    @cached_property
    def d_eta_m(self) -> np.ndarray:
        return geom.d_oneform(self.deta, self.S.d_eta)

    @cached_property
    def N_t(self) -> np.ndarray:
        """Nijenhuis tensor N[i, a, b] of φ from partial derivatives."""
        return geom.nijenhuis_tensor(self.phi_m, self.dphi)

    @cached_property
    def N_connection(self) -> np.ndarray:
        """−φ(∇_Xφ)Y + φ(∇_Yφ)X + (∇_{φX}φ)Y − (∇_{φY}φ)X."""
        phi, nphi = self.phi_m, self.nphi
        t = np.einsum("ka,kib->iab", phi, nphi)
        u = np.einsum("im,amb->iab", phi, nphi)
        return -u + u.transpose(0, 2, 1) + t - t.transpose(0, 2, 1)

    @cached_property
    def N1_t(self) -> np.ndarray:
        return self.N_t - 2 * self.e1 * np.einsum("ab,i->iab", self.d_eta_m, self.xi_v)

    @cached_property
    def N2_t(self) -> np.ndarray:
        """(L_{φX}η)(Y) − (L_{φY}η)(X) on coordinate fields."""
        L = np.einsum("ka,kb->ab", self.phi_m, self.deta) + np.einsum("k,bka->ab", self.eta_v, self.dphi)
        return L - L.T

    @cached_property
    def N3_t(self) -> np.ndarray:
        return geom.lie_endo(self.phi_m, self.dphi, self.xi_v, self.dxi)

    @cached_property
    def N4_t(self) -> np.ndarray:
        return geom.lie_oneform(self.eta_v, self.deta, self.xi_v, self.dxi)

    @cached_property
    def h_m(self) -> np.ndarray:
        return 0.5 * self.N3_t

    # ---- batched operators ------------------------------------------------
    def xi(self, B: int) -> np.ndarray:
        return _b(self.xi_v, B)

    def phi(self, X: np.ndarray) -> np.ndarray:
        return X @ self.phi_m.T

    def h(self, X: np.ndarray) -> np.ndarray:
        return X @ self.h_m.T

    def eta(self, X: np.ndarray) -> np.ndarray:
        return X @ self.eta_v

    def g(self, X: np.ndarray, Y: np.ndarray) -> np.ndarray:
        return np.einsum("bi,ij,bj->b", X, self.geo.g, Y)

    def R(self, X, Y, Z) -> np.ndarray:
        return self.geo.curv(X, Y, Z)

    def Rl(self, X, Y, Z, W) -> np.ndarray:
        """g(R(X, Y)Z, W)."""
        return self.g(self.geo.curv(X, Y, Z), W)

    def Ric(self, X, Y) -> np.ndarray:
        return np.einsum("bi,ij,bj->b", X, self.geo.ricci, Y)

    def dphi_op(self, X, Y) -> np.ndarray:
        """(∇_X φ)Y."""
        return np.einsum("kij,bk,bj->bi", self.nphi, X, Y)

    def dxi_op(self, X) -> np.ndarray:
        """∇_X ξ."""
        return X @ self.nxi

    def deta_op(self, X, Y) -> np.ndarray:
        """(∇_X η)(Y)."""
        return np.einsum("kj,bk,bj->b", self.neta, X, Y)

    def dPhi_op(self, X, Y, Z) -> np.ndarray:
        """(∇_X Φ)(Y, Z)."""
        return self.g(Y, self.dphi_op(X, Z))

    def N(self, X, Y) -> np.ndarray:
        return np.einsum("iab,pa,pb->pi", self.N_t, X, Y)

    def frame(self, seed_basis=None):
        return build_frame(self.geo.g, seed_basis)

    # ---- axiom residuals -------------------------------------------------
    def axiom_residuals(self) -> dict[str, float]:
        g, phi, xi, eta = self.geo.g, self.phi_m, self.xi_v, self.eta_v
        e0, e1 = self.e0, self.e1
        I = np.eye(self.dim)
        out = {
            "phi^2 = eps1 (I - eta (x) xi)": relative_residual(phi @ phi, e1 * (I - np.outer(xi, eta))),
            "eta(xi) = 1": relative_residual(eta @ xi, 1.0),
            "phi xi = 0": relative_residual(phi @ xi),
            "eta o phi = 0": relative_residual(eta @ phi),
            "g(phi X, phi Y) = -eps1 (g(X,Y) - eps0 eta(X) eta(Y))": relative_residual(
                phi.T @ g @ phi, -e1 * (g - e0 * np.outer(eta, eta))
            ),
            "eta(X) = eps0 g(X, xi)": relative_residual(eta, e0 * (g @ xi)),
            "g(xi, xi) = eps0": relative_residual(xi @ g @ xi, e0),
        }
        if e1 == 1:
            out["phi|ker eta has eigenvalues +1, -1 with multiplicity n"] = self.paracomplex_residual()
        return out

    def paracomplex_residual(self) -> float:
        _, _, vt = np.linalg.svd(self.eta_v[None, :])
        basis = vt[1:].T  # columns span ker η
        restricted = np.linalg.lstsq(basis, self.phi_m @ basis, rcond=None)[0]
        ev = np.linalg.eigvals(restricted)
        if np.max(np.abs(ev.imag)) > 1e-6:
            return float(np.max(np.abs(ev.imag)))
        target = np.array([-1.0] * self.n + [1.0] * self.n)
        return float(np.max(np.abs(np.sort(ev.real) - target)))

    # ---- structure-level residuals --------------------------------------
    def contact_residual(self) -> float:
        """Φ − dη."""
        return relative_residual(self.Phi_m, self.d_eta_m)

    def normal_residual(self) -> float:
        return relative_residual(self.N1_t)

    def sasakian_tensor(self) -> np.ndarray:
        """(∇_Xφ)Y + ε₁g(X,Y)ξ − ε₀ε₁η(Y)X as T[k, i, j] (X=∂_k, Y=∂_j)."""
        e0, e1 = self.e0, self.e1
        return (
            self.nphi
            + e1 * np.einsum("kj,i->kij", self.geo.g, self.xi_v)
            - e0 * e1 * np.einsum("j,ik->kij", self.eta_v, np.eye(self.dim))
        )

    def sasakian_residual(self) -> float:
        return relative_residual(self.sasakian_tensor())

    def condition15_terms(self, X, Y, delta: int) -> list[np.ndarray]:
        """(∇_{φX}φ)Y − δφ(∇_Xφ)Y − δε₁(∇_Xη)(Y)ξ − (δ−1)(ε₁g(φX,Y)ξ − ε₀ε₁η(Y)φX)."""
        e0, e1 = self.e0, self.e1
        B = len(X)
        xi = self.xi(B)
        phiX = self.phi(X)
        return [
            self.dphi_op(phiX, Y),
            -delta * self.phi(self.dphi_op(X, Y)),
            -delta * e1 * self.deta_op(X, Y)[:, None] * xi,
            -(delta - 1) * e1 * self.g(phiX, Y)[:, None] * xi,
            (delta - 1) * e0 * e1 * self.eta(Y)[:, None] * phiX,
        ]

    def normality_criterion_terms(self, X, Y) -> list[np.ndarray]:
        """φ(∇_Xφ)Y − (∇_{φX}φ)Y + ε₁(∇_Xη)(Y)ξ."""
        return [
            self.phi(self.dphi_op(X, Y)),
            -self.dphi_op(self.phi(X), Y),
            self.e1 * self.deta_op(X, Y)[:, None] * self.xi(len(X)),
        ]


def vector_tuples(dim: int, arity: int, rng: np.random.Generator | None = None, n_random: int = 8):
    """Coordinate-basis tuples (all combinations) plus random unit-box tuples.

    Returns a list of ``arity`` arrays of shape ``(B, dim)``.
    """
    eye = np.eye(dim)
    combos = list(itertools.product(range(dim), repeat=arity))
    cols = [eye[[c[k] for c in combos]] for k in range(arity)]
    if rng is not None and n_random > 0:
        extra = rng.uniform(-1.0, 1.0, size=(arity, n_random, dim))
        cols = [np.vstack([cols[k], extra[k]]) for k in range(arity)]
    return cols


def batch_residual(terms: Sequence[np.ndarray]) -> np.ndarray:
    """Per-row |Σ terms| / max(1, max_t |term|), max-norm over components."""
    arrs = [np.asarray(t, dtype=float) for t in terms]
    arrs = [a[:, None] if a.ndim == 1 else a for a in arrs]
    total = np.sum(arrs, axis=0)
    scale = np.max(np.stack([np.max(np.abs(a), axis=1) for a in arrs]), axis=0)
    return np.max(np.abs(total), axis=1) / np.maximum(1.0, scale)


def batch_defect(terms: Sequence[np.ndarray]) -> np.ndarray:
    arrs = [np.asarray(t, dtype=float) for t in terms]
    arrs = [a[:, None] if a.ndim == 1 else a for a in arrs]
    return np.sum(arrs, axis=0)


# ---------------------------------------------------------------------------
# public operations


def check_axioms(S: PCStructure, points: np.ndarray, tol: float = 1e-9) -> dict[str, float]:
    """Max axiom residuals over ``points``; raises :class:`AxiomError` on failure."""
    worst: dict[str, float] = {}
    for p in points:
        for name, r in StructurePoint(S, p).axiom_residuals().items():
            if r > tol:
                raise AxiomError(name, p, r)
            worst[name] = max(worst.get(name, 0.0), r)
    return worst


def fundamental_form(S: PCStructure, p) -> TensorValue:
    return TensorValue(StructurePoint(S, p).Phi_m, ("l", "l"))


def nijenhuis(S: PCStructure, p) -> TensorValue:
    return TensorValue(StructurePoint(S, p).N_t, ("u", "l", "l"))


def n1_n2_n3_n4(S: PCStructure, p) -> tuple[TensorValue, TensorValue, TensorValue, TensorValue]:
    sp = StructurePoint(S, p)
    return (
        TensorValue(sp.N1_t, ("u", "l", "l")),
        TensorValue(sp.N2_t, ("l", "l")),
        TensorValue(sp.N3_t, ("u", "l")),
        TensorValue(sp.N4_t, ("l",)),
    )


def h_operator(S: PCStructure, p, tol: float = 1e-7) -> TensorValue:
    """h = ½ L_ξ φ; refused unless Φ = dη holds at ``p``."""
    sp = StructurePoint(S, p)
    r = sp.contact_residual()
    if r > tol:
        raise NotContactMetricError(f"structure is not contact metric at {sp.p.tolist()} (|Φ − dη| = {r:.3e})")
    return TensorValue(sp.h_m, ("u", "l"))


@dataclass(frozen=True)
class StructureClass:
    axioms_ok: bool
    contact_metric: bool
    normal: bool
    sasakian: bool
    condition15: tuple[int, ...] = ()
    points: int = 0
    tol: float = 0.0
    residuals: dict = field(default_factory=dict, compare=False)

    @property
    def condition15_delta(self) -> int | None:
        """Preferred δ: +1 when it qualifies, else −1, else None."""
        if 1 in self.condition15:
            return 1
        if -1 in self.condition15:
            return -1
        return None

    def flags(self) -> dict[str, bool]:
        return {
            "axioms_ok": self.axioms_ok,
            "contact_metric": self.contact_metric,
            "normal": self.normal,
            "sasakian": self.sasakian,
            "condition15_plus": 1 in self.condition15,
            "condition15_minus": -1 in self.condition15,
        }

    def as_dict(self) -> dict:
        return {
            "axioms_ok": self.axioms_ok,
            "contact_metric": self.contact_metric,
            "normal": self.normal,
            "sasakian": self.sasakian,
            "condition15_delta": self.condition15_delta,
            "condition15_deltas": list(self.condition15),
        }


def classify(
    S: PCStructure,
    points: int | np.ndarray = 32,
    tol: float = 1e-7,
    seed: int = 0,
    axiom_tol: float | None = None,
) -> StructureClass:
    """Sampling-based classification: a flag holds if it holds at every point."""
    if isinstance(points, (int, np.integer)):
        pts = S.base.sample_points(int(points), np.random.default_rng(seed))
    else:
        pts = np.asarray(points, dtype=float)
    check_axioms(S, pts, tol if axiom_tol is None else axiom_tol)
    worst = {"contact": 0.0, "normal": 0.0, "sasakian": 0.0, "cond15+1": 0.0, "cond15-1": 0.0}
    for p in pts:
        sp = StructurePoint(S, p)
        worst["contact"] = max(worst["contact"], sp.contact_residual())
        worst["normal"] = max(worst["normal"], sp.normal_residual())
        worst["sasakian"] = max(worst["sasakian"], sp.sasakian_residual())
        X, Y = vector_tuples(S.dim, 2)
        for delta in (1, -1):
            r = float(np.max(batch_residual(sp.condition15_terms(X, Y, delta))))
            key = f"cond15{delta:+d}"
            worst[key] = max(worst[key], r)
    deltas = tuple(d for d in (1, -1) if worst[f"cond15{d:+d}"] <= tol)
    return StructureClass(
        axioms_ok=True,
        contact_metric=worst["contact"] <= tol,
        normal=worst["normal"] <= tol,
        sasakian=worst["sasakian"] <= tol,
        condition15=deltas,
        points=len(pts),
        tol=tol,
        residuals=worst,
    )
