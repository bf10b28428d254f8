import numpy as np
import pytest

from conftest import builtin, make_chart
from pcgeom.expr import parse
from pcgeom.geometry import (
    EndoField,
    OneForm,
    TwoForm,
    VectorField,
    christoffel,
    covariant_derivative,
    exterior_derivative,
    lie_derivative,
    ricci,
    ricci_operator,
    riemann,
    scalar,
    second_bianchi_residual,
)

SPHERE = make_chart(("th", "ph"), {(0, 0): "1", (1, 1): "sin(th)^2"}, box=[(0.3, 2.8), (-3, 3)], name="S2")
XYZ = ("x", "y", "z")


def random_chart():
    return make_chart(
        XYZ,
        {(0, 0): "2 + sin(y)", (1, 0): "0.3*x*z", (1, 1): "1 + x^2", (2, 1): "0.2*cos(x)", (2, 2): "exp(0.3*y)"},
        box=[(-0.5, 0.5)] * 3,
    )


def fd_christoffel(M, p, h=1e-5):
    n = M.dim
    dg = np.zeros((n, n, n))
    for k in range(n):
        e = np.eye(n)[k] * h
        dg[k] = (M.metric_at(p + e) - M.metric_at(p - e)) / (2 * h)
    ginv = np.linalg.inv(M.metric_at(p))
    low = 0.5 * (np.einsum("jli->lij", dg) + np.einsum("ilj->lij", dg) - dg)
    return np.einsum("kl,lij->kij", ginv, low)


def test_flat_christoffels_vanish():
    # TRIVIAL: flat
    M = make_chart(XYZ, {(0, 0): "1", (1, 1): "1", (2, 2): "1"})
    p = np.array([0.1, 0.2, 0.3])
    assert np.all(christoffel(M, p).data == 0)
    assert np.all(riemann(M, p).data == 0)


def test_sphere_christoffels():
    # DERIVED: closed form on the round 2-sphere
    th = 1.1
    G = christoffel(SPHERE, [th, 0.4]).data
    assert G[0, 1, 1] == pytest.approx(-np.sin(th) * np.cos(th), rel=1e-14)
    assert G[1, 0, 1] == pytest.approx(np.cos(th) / np.sin(th), rel=1e-14)
    assert G[1, 1, 0] == G[1, 0, 1]
    assert G[0, 0, 0] == 0 and G[1, 1, 1] == 0


def test_sphere_curvature():
    # DERIVED: unit sphere, sectional curvature 1
    th = 0.9
    p = [th, 0.2]
    R = riemann(SPHERE, p).data
    g = SPHERE.metric_at(p)
    Rl = np.einsum("lkij,ld->ijkd", R, g)  # Rl[a,b,c,d] = g(R(a,b)c, d)
    assert Rl[0, 1, 1, 0] == pytest.approx(np.sin(th) ** 2, rel=1e-13)
    np.testing.assert_allclose(ricci(SPHERE, p).data, g, atol=1e-13)
    np.testing.assert_allclose(ricci_operator(SPHERE, p).data, np.eye(2), atol=1e-13)
    assert scalar(SPHERE, p) == pytest.approx(2.0, rel=1e-13)


def test_christoffels_match_finite_differences(rng):
    # DERIVED: finite-difference oracle
    M = random_chart()
    for p in M.sample_points(4, rng):
        np.testing.assert_allclose(christoffel(M, p).data, fd_christoffel(M, p), rtol=1e-6, atol=1e-8)


def test_riemann_symmetries(rng):
    M = random_chart()
    for p in M.sample_points(4, rng):
        R = riemann(M, p).data
        g = M.metric_at(p)
        Rl = np.einsum("lkij,ld->ijkd", R, g)
        s = max(1.0, np.abs(Rl).max())
        assert np.abs(Rl + Rl.transpose(1, 0, 2, 3)).max() / s < 1e-12
        assert np.abs(Rl + Rl.transpose(0, 1, 3, 2)).max() / s < 1e-12
        assert np.abs(Rl - Rl.transpose(2, 3, 0, 1)).max() / s < 1e-12
        cyc = Rl + Rl.transpose(1, 2, 0, 3) + Rl.transpose(2, 0, 1, 3)
        assert np.abs(cyc).max() / s < 1e-12
        assert second_bianchi_residual(M, p) < 1e-7


def test_metric_compatibility_via_eta():
    # eta = g(., xi) on the Sasakian example, so nabla eta is nabla xi lowered
    S = builtin("sasakian-r3")
    p = np.array([0.3, -0.7, 1.1])
    nxi = covariant_derivative(S.xi, S.base, p).data
    neta = covariant_derivative(S.eta, S.base, p).data
    np.testing.assert_allclose(neta, nxi @ S.base.metric_at(p), atol=1e-13)


def test_lie_derivative_connection_form(rng):
    S = builtin("sasakian-r3")
    V = VectorField(tuple(parse(s, XYZ) for s in ("x*y", "sin(z)", "1 + x^2")))
    for p in S.base.sample_points(3, rng):
        for fld in (S.phi, S.eta):
            a = lie_derivative(fld, V, S.base, p).data
            b = lie_derivative(fld, V, S.base, p, via_connection=True).data
            np.testing.assert_allclose(a, b, atol=1e-12)
        # the Reeb field of a Sasakian structure preserves phi
        assert np.abs(lie_derivative(S.phi, S.xi, S.base, p).data).max() < 1e-13


def test_exterior_derivative_conventions():
    # TRIVIAL: d(x dy) = dx ^ dy
    w = OneForm((parse("0", XYZ), parse("x", XYZ), parse("0", XYZ)))
    M = random_chart()
    p = [0.1, 0.2, 0.3]
    half = exterior_derivative(w, M, p, "half").data
    one = exterior_derivative(w, M, p, "one").data
    assert half[0, 1] == pytest.approx(0.5) and half[1, 0] == pytest.approx(-0.5)
    assert one[0, 1] == pytest.approx(1.0)
    with pytest.raises(ValueError):
        exterior_derivative(w, M, p, "bogus")


def test_d_squared_vanishes():
    srcs = ("y*z^2", "sin(x*z)", "exp(x - y)")
    w = [parse(s, XYZ) for s in srcs]
    # components of dw under the "one" convention, written symbolically
    B = tuple(tuple(w[j].diff(i) - w[i].diff(j) for j in range(3)) for i in range(3))
    M = random_chart()
    dd = exterior_derivative(TwoForm(B), M, [0.2, -0.1, 0.4], "one").data
    assert np.abs(dd).max() < 1e-12
    ddh = exterior_derivative(TwoForm(B), M, [0.2, -0.1, 0.4], "half").data
    assert np.abs(ddh).max() < 1e-12


def test_unsupported_field_types():
    M = random_chart()
    with pytest.raises(TypeError):
        covariant_derivative("nope", M, [0, 0, 0])
    with pytest.raises(TypeError):
        exterior_derivative(VectorField(()), M, [0, 0, 0])
    assert isinstance(builtin("sasakian-r3").phi, EndoField)


def test_asymmetric_metric_rejected():
    with pytest.raises(ValueError):
        from pcgeom.geometry import ChartManifold

        a, b, z = parse("1", XYZ), parse("x", XYZ), parse("0", XYZ)
        ChartManifold(XYZ, ((a, b, z), (z, a, z), (z, z, a)), ((-1, 1),) * 3)
