"""The cone ℝ₊ × M over an almost (para)contact metric manifold.

The cone chart has coordinates ``(t, x¹, …, x^{2n+1})`` and carries

    g̃ = −ε₀ε₁ dt² + t² g,   J∂t = −(ε₀/t) ξ,   JX = φX − ε₀ε₁ t η(X) ∂t.

Every closed-form statement about (g̃, J) is checked here against a direct
computation on the cone chart: Christoffels, ∇̃J, curvature, R̃J and the
Nijenhuis tensor Ñ, together with the three equivalences relating the cone
to the base (Kähler ⇔ Sasakian, almost Kähler ⇔ contact metric, and the
δ-condition on ∇̃J ⇔ its base counterpart).

Index 0 of every cone array is the t direction.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from . import geometry as geom
from .expr import constant, coordinate
from .geometry import ChartManifold, EndoField, PointGeometry, expr_jets
from .residuals import ResidualReport, summarize
from .structure import PCStructure, StructurePoint, batch_residual, check_axioms, relative_residual, vector_tuples

__all__ = [
    "ConeManifold",
    "ConePoint",
    "build_cone",
    "T_RANGE",
    "verify_cone_connection",
    "verify_cone_delJ",
    "verify_cone_curvature",
    "verify_cone_nijenhuis",
    "proposition_suite",
]

T_RANGE = (0.5, 2.0)


def _t_name(coords: tuple[str, ...]) -> str:
    name = "t"
    while name in coords:
        name += "_"
    return name


@dataclass(frozen=True)
class ConeManifold:
    base: PCStructure
    chart: ChartManifold
    J: EndoField

    @property
    def dim(self) -> int:
        return self.chart.dim

    @property
    def t_name(self) -> str:
        return self.chart.coords[0]

    def at(self, p) -> "ConePoint":
        return ConePoint(self, p)

    def sample_points(self, k: int, rng: np.random.Generator) -> np.ndarray:
        return self.chart.sample_points(k, rng)

    def lift_points(self, base_points: np.ndarray, rng: np.random.Generator) -> np.ndarray:
        """Attach a t coordinate in ``T_RANGE`` to each base point."""
        base_points = np.atleast_2d(base_points)
        t = rng.uniform(*T_RANGE, size=len(base_points))
        return np.column_stack([t, base_points])


def build_cone(S: PCStructure, check: bool = True, seed: int = 0) -> ConeManifold:
    """Cone chart over ``S``; the base axioms are checked first unless ``check=False``."""
    M = S.base
    if check:
        check_axioms(S, M.sample_points(8, np.random.default_rng(seed)))
    tn = _t_name(M.coords)
    coords = (tn,) + M.coords
    m = M.dim
    e0, e1 = S.eps0, S.eps1
    t = coordinate(tn, coords)
    zero = constant(0.0, coords)

    def lift(e):
        return e.with_coords(coords)

    metric = [[zero] * (m + 1) for _ in range(m + 1)]
    metric[0][0] = constant(-e0 * e1, coords)
    for i in range(m):
        for j in range(i + 1):
            gij = M.metric[i][j]
            e = zero if gij.is_zero() else t**2 * lift(gij)
            metric[1 + i][1 + j] = metric[1 + j][1 + i] = e

    J = [[zero] * (m + 1) for _ in range(m + 1)]
    for i in range(m):
        xi_i = S.xi.components[i]
        if not xi_i.is_zero():
            J[1 + i][0] = (-e0) * lift(xi_i) / t
    for j in range(m):
        eta_j = S.eta.components[j]
        if not eta_j.is_zero():
            J[0][1 + j] = (-e0 * e1) * t * lift(eta_j)
        for i in range(m):
            J[1 + i][1 + j] = lift(S.phi.components[i][j])

    base_domain = M.domain
    chart = ChartManifold(
        coords=coords,
        metric=tuple(tuple(r) for r in metric),
        sample_box=(T_RANGE,) + tuple(M.sample_box),
        exclude=tuple(lift(e) for e in M.exclude),
        name=f"cone({M.name or S.name})",
        domain=None if base_domain is None else (lambda p, _d=base_domain: _d(np.asarray(p)[1:])),
    )
    return ConeManifold(S, chart, EndoField(tuple(tuple(r) for r in J)))


def _embed_vec(v: np.ndarray) -> np.ndarray:
    """Base vectors (rows) as cone vectors with zero ∂t part."""
    v = np.atleast_2d(v)
    return np.column_stack([np.zeros(len(v)), v])


class ConePoint:
    """Cone-chart tensors at one point together with the base point data."""

    def __init__(self, C: ConeManifold, p):
        self.C = C
        self.p = np.asarray(p, dtype=float)
        self.t = float(self.p[0])
        self.geo = PointGeometry(C.chart, self.p)
        self.J_m, self.dJ, _ = expr_jets(C.J.components, self.p, order=1)
        self.base = StructurePoint(C.base, self.p[1:])
        self.e0, self.e1 = C.base.eps0, C.base.eps1
        self.dim = C.dim

    # direct cone-chart tensors
    @cached_property
    def nJ(self) -> np.ndarray:
        """(∇̃_k J)^i_j."""
        return geom.nabla_endo(self.J_m, self.dJ, self.geo.gamma)

    @cached_property
    def NJ(self) -> np.ndarray:
        return geom.nijenhuis_tensor(self.J_m, self.dJ)

    @cached_property
    def Omega(self) -> np.ndarray:
        """Ω(∂_a, ∂_b) = g̃(∂_a, J∂_b)."""
        return self.geo.g @ self.J_m

    @cached_property
    def dOmega(self) -> np.ndarray:
        dO = np.einsum("kac,cb->kab", self.geo.dg, self.J_m) + np.einsum("ac,kcb->kab", self.geo.g, self.dJ)
        return geom.d_twoform(dO, self.C.base.d_eta)

    # batched operators on cone vectors
    def Jop(self, X):
        return X @ self.J_m.T

    def g(self, X, Y):
        return np.einsum("bi,ij,bj->b", X, self.geo.g, Y)

    def R(self, X, Y, Z):
        return self.geo.curv(X, Y, Z)

    def dJ_op(self, X, Y):
        """(∇̃_X J)Y."""
        return np.einsum("kij,bk,bj->bi", self.nJ, X, Y)

    def N_op(self, X, Y):
        return np.einsum("iab,pa,pb->pi", self.NJ, X, Y)

    # closed-form predictions built from base data
    def _embed_matrix_block(self, base_block: np.ndarray) -> np.ndarray:
        m = self.dim - 1
        out = np.zeros((self.dim,) * base_block.ndim)
        out[(slice(1, None),) * base_block.ndim] = base_block
        assert base_block.shape == (m,) * base_block.ndim
        return out

    def predicted_metric(self) -> np.ndarray:
        out = self._embed_matrix_block(self.t**2 * self.base.g_m)
        out[0, 0] = -self.e0 * self.e1
        return out

    def predicted_J(self) -> np.ndarray:
        b, t = self.base, self.t
        out = self._embed_matrix_block(b.phi_m)
        out[1:, 0] = -(self.e0 / t) * b.xi_v
        out[0, 1:] = -self.e0 * self.e1 * t * b.eta_v
        return out

    def predicted_Omega(self) -> np.ndarray:
        """t²Φ − 2t η∧dt."""
        b, t = self.base, self.t
        eta = np.concatenate([[0.0], b.eta_v])
        dt = np.zeros(self.dim)
        dt[0] = 1.0
        return self._embed_matrix_block(t**2 * b.Phi_m) - 2 * t * geom.wedge(eta, dt, self.C.base.d_eta)

    def predicted_dOmega(self) -> np.ndarray:
        """t²dΦ + 2t dt∧(Φ − dη)."""
        b, t, conv = self.base, self.t, self.C.base.d_eta
        dPhi = geom.d_twoform(b.dPhi_partial, conv)
        B = self._embed_matrix_block(b.Phi_m - b.d_eta_m)
        dt = np.zeros(self.dim)
        dt[0] = 1.0
        # (α∧B)(X,Y,Z) with the same normalisation as d on 2-forms
        aB = np.einsum("a,bc->abc", dt, B)
        wedge = geom.form_factor(conv, 2) * (aB + np.einsum("bca->abc", aB) + np.einsum("cab->abc", aB))
        return self._embed_matrix_block(t**2 * dPhi) + 2 * t * wedge

    def predicted_gamma(self) -> np.ndarray:
        """Γ̃ from ∇̃_∂t∂t = 0, ∇̃_X∂t = ∇̃_∂tX = X/t, ∇̃_XY = ∇_XY + ε₀ε₁t g(X,Y)∂t."""
        b, t, m = self.base, self.t, self.dim - 1
        G = np.zeros((self.dim,) * 3)
        G[1:, 1:, 1:] = b.geo.gamma
        G[0, 1:, 1:] = self.e0 * self.e1 * t * b.g_m
        G[1:, 0, 1:] = np.eye(m) / t
        G[1:, 1:, 0] = np.eye(m) / t
        return G

    def predicted_nJ(self) -> np.ndarray:
        """(∇̃J) from the four closed-form cases; index order [k, i, j]."""
        b, t, e0, e1, m = self.base, self.t, self.e0, self.e1, self.dim - 1
        out = np.zeros((self.dim,) * 3)
        # (∇̃_X J)∂t = −(1/t)(ε₀∇_Xξ + φX)
        out[1:, 1:, 0] = -(1.0 / t) * (e0 * b.nxi + b.phi_m.T)
        # (∇̃_X J)Y tangent part
        out[1:, 1:, 1:] = (
            b.nphi
            + e1 * np.einsum("kj,i->kij", b.g_m, b.xi_v)
            - e0 * e1 * np.einsum("j,ik->kij", b.eta_v, np.eye(m))
        )
        # ∂t part: −ε₀ε₁t((∇_Xη)Y − g(X, φY))
        out[1:, 0, 1:] = -e0 * e1 * t * (b.neta - b.Phi_m)
        return out

    def predicted_riemann(self) -> np.ndarray:
        """R̃[l,k,i,j] from R̃(X,Y)Z = R(X,Y)Z + ε₀ε₁(g(Y,Z)X − g(X,Z)Y), zero otherwise."""
        b, m = self.base, self.dim - 1
        eye = np.eye(m)
        g = b.g_m
        block = b.geo.riemann + self.e0 * self.e1 * (
            np.einsum("jk,li->lkij", g, eye) - np.einsum("ik,lj->lkij", g, eye)
        )
        return self._embed_matrix_block(block)

    def predicted_RJ(self) -> np.ndarray:
        """RJ[l,k,i,j] = (R̃(∂_i,∂_j) J∂_k)^l from the closed forms."""
        b, t, e0, e1, m = self.base, self.t, self.e0, self.e1, self.dim - 1
        eye = np.eye(m)
        R = b.geo.riemann
        out = np.zeros((self.dim,) * 4)
        # R̃(X,Y)(J∂t) = −(ε₀/t)[R(X,Y)ξ + ε₁η(Y)X − ε₁η(X)Y]
        Rxi = np.einsum("lkij,k->lij", R, b.xi_v)
        out[1:, 0, 1:, 1:] = -(e0 / t) * (
            Rxi + e1 * np.einsum("j,li->lij", b.eta_v, eye) - e1 * np.einsum("i,lj->lij", b.eta_v, eye)
        )
        # R̃(X,Y)(JZ) = R(X,Y)φZ + ε₀ε₁g(Y,φZ)X − ε₀ε₁g(X,φZ)Y
        Rphi = np.einsum("lmij,mk->lkij", R, b.phi_m)
        out[1:, 1:, 1:, 1:] = Rphi + e0 * e1 * (
            np.einsum("jk,li->lkij", b.Phi_m, eye) - np.einsum("ik,lj->lkij", b.Phi_m, eye)
        )
        return out

    def direct_RJ(self) -> np.ndarray:
        return np.einsum("lmij,mk->lkij", self.geo.riemann, self.J_m)

    def predicted_NJ(self) -> np.ndarray:
        """Ñ(X,Y) = N⁽¹⁾ − ε₀ε₁tN⁽²⁾∂t,  Ñ(∂t,Y) = −(ε₀/t)N⁽³⁾Y + ε₁N⁽⁴⁾(Y)∂t."""
        b, t, e0, e1 = self.base, self.t, self.e0, self.e1
        out = np.zeros((self.dim,) * 3)
        out[1:, 1:, 1:] = b.N1_t
        out[0, 1:, 1:] = -e0 * e1 * t * b.N2_t
        out[1:, 0, 1:] = -(e0 / t) * b.N3_t
        out[0, 0, 1:] = e1 * b.N4_t
        out[:, 1:, 0] = -out[:, 0, 1:]
        return out

    # residuals -------------------------------------------------------------
    def invariant_residuals(self) -> dict[str, float]:
        J, g, e1 = self.J_m, self.geo.g, self.e1
        return {
            "metric-block": relative_residual(g, self.predicted_metric()),
            "J-components": relative_residual(J, self.predicted_J()),
            "J^2 = eps1 I": relative_residual(J @ J, e1 * np.eye(self.dim)),
            "g(JX, JY) = -eps1 g(X, Y)": relative_residual(J.T @ g @ J, -e1 * g),
            "Omega = t^2 Phi - 2t eta^dt": relative_residual(self.Omega, self.predicted_Omega()),
        }

    def connection_residual(self) -> float:
        return relative_residual(self.geo.gamma, self.predicted_gamma())

    def delJ_residual(self) -> float:
        return relative_residual(self.nJ, self.predicted_nJ())

    def curvature_residual(self) -> float:
        return relative_residual(self.geo.riemann, self.predicted_riemann())

    def curvature_J_residual(self) -> float:
        return relative_residual(self.direct_RJ(), self.predicted_RJ())

    def nijenhuis_residual(self) -> float:
        return relative_residual(self.NJ, self.predicted_NJ())

    def dOmega_residual(self) -> float:
        return relative_residual(self.dOmega, self.predicted_dOmega())

    def kaehler_defect(self) -> float:
        """max-norm of ∇̃J (relative)."""
        return relative_residual(self.nJ)

    def almost_kaehler_defect(self) -> float:
        return relative_residual(self.dOmega)

    def condition14_terms(self, X, Y, delta: int) -> list[np.ndarray]:
        """(∇̃_{JX}J)Y − δJ(∇̃_XJ)Y on cone vectors."""
        return [self.dJ_op(self.Jop(X), Y), -delta * self.Jop(self.dJ_op(X, Y))]

    def gray_terms(self, X, Y, V, delta: int) -> list[np.ndarray]:
        """[∇̃_{Ñ(X,Y)}, J]V against the curvature side of the generalised commutator identity."""
        e1 = self.e1
        J, R = self.Jop, self.R
        JX, JY = J(X), J(Y)

        def comm(A, B):
            # [R̃(A,B), J]V = R̃(A,B)JV − J R̃(A,B)V
            return R(A, B, J(V)), -J(R(A, B, V))

        a1, a2 = comm(X, Y)
        b1, b2 = comm(JX, JY)
        c1, c2 = comm(JX, Y)
        d1, d2 = comm(X, JY)
        return [
            self.dJ_op(self.N_op(X, Y), V),
            e1 * a1,
            e1 * a2,
            b1,
            b2,
            -delta * J(c1),
            -delta * J(c2),
            -delta * J(d1),
            -delta * J(d2),
        ]


# ---------------------------------------------------------------------------
# report-level operations


def _cone_points(C: ConeManifold, points, seed: int) -> np.ndarray:
    if isinstance(points, (int, np.integer)):
        return C.sample_points(int(points), np.random.default_rng(seed))
    return np.asarray(points, dtype=float)


def _verify(C, points, seed, tol, identity, fn) -> ResidualReport:
    pts = _cone_points(C, points, seed)
    vals = [fn(ConePoint(C, p)) for p in pts]
    return summarize(identity, C.base.name, vals, tol, suite="cone", points=len(pts))


def verify_cone_connection(C: ConeManifold, points=32, seed: int = 0, tol: float = 1e-8) -> ResidualReport:
    return _verify(C, points, seed, tol, "cone-connection", ConePoint.connection_residual)


def verify_cone_delJ(C: ConeManifold, points=32, seed: int = 0, tol: float = 1e-8) -> ResidualReport:
    return _verify(C, points, seed, tol, "cone-nabla-J", ConePoint.delJ_residual)


def verify_cone_curvature(C: ConeManifold, points=32, seed: int = 0, tol: float = 1e-8) -> ResidualReport:
    def both(cp):
        return max(cp.curvature_residual(), cp.curvature_J_residual())

    return _verify(C, points, seed, tol, "cone-curvature", both)


def verify_cone_nijenhuis(C: ConeManifold, points=32, seed: int = 0, tol: float = 1e-8) -> ResidualReport:
    return _verify(C, points, seed, tol, "cone-nijenhuis", ConePoint.nijenhuis_residual)


def proposition_residuals(cp: ConePoint, X=None, Y=None) -> dict[str, float]:
    """Both sides of each cone/base equivalence at one point."""
    b = cp.base
    out = {
        "prop-kaehler:cone": cp.kaehler_defect(),
        "prop-kaehler:base": b.sasakian_residual(),
        "prop-almost-kaehler:cone": cp.almost_kaehler_defect(),
        "prop-almost-kaehler:base": b.contact_residual(),
    }
    if X is None:
        X, Y = vector_tuples(cp.dim, 2)
    bX, bY = vector_tuples(b.dim, 2)
    for delta in (1, -1):
        out[f"prop-delta{delta:+d}:cone"] = float(np.max(batch_residual(cp.condition14_terms(X, Y, delta))))
        out[f"prop-delta{delta:+d}:base"] = float(np.max(batch_residual(b.condition15_terms(bX, bY, delta))))
    return out


def proposition_suite(C: ConeManifold, points=32, seed: int = 0, tol: float = 1e-7) -> list[ResidualReport]:
    """Co-vanishing checks; residual 0 when both sides agree, 1 otherwise."""
    pts = _cone_points(C, points, seed)
    worst: dict[str, float] = {}
    for p in pts:
        for k, v in proposition_residuals(ConePoint(C, p)).items():
            worst[k] = max(worst.get(k, 0.0), v)
    reports = []
    for name, delta in (("prop-kaehler", None), ("prop-almost-kaehler", None), ("prop-delta", 1), ("prop-delta", -1)):
        key = name if delta is None else f"{name}{delta:+d}"
        lhs, rhs = worst[f"{key}:cone"], worst[f"{key}:base"]
        agree = (lhs <= tol) == (rhs <= tol)
        rep = summarize(
            name,
            C.base.name,
            [0.0 if agree else 1.0],
            0.5,
            suite="cone",
            delta=delta,
            points=len(pts),
            details={"cone_residual": lhs, "base_residual": rhs, "cone_vanishes": lhs <= tol, "base_vanishes": rhs <= tol},
        )
        reports.append(rep)
    return reports
