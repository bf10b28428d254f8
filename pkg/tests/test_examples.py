import numpy as np
import pytest

from conftest import builtin
from pcgeom.examples import (
    EXAMPLES,
    PullbackError,
    builtin_text,
    example_names,
    get_example,
    load_builtin,
    pullback,
    standard_diffeos,
)
from pcgeom.expr import parse
from pcgeom.geometry import PointGeometry
from pcgeom.identities import run_identities
from pcgeom.structure import StructurePoint, classify


def test_registry():
    names = example_names()
    assert len(names) == len(set(names))
    labels = [e.label for e in EXAMPLES if e.label]
    assert labels == ["E1", "E2", "E3", "E4", "E5"]
    assert get_example("E3").name == "kenmotsu-warped"
    assert load_builtin("E1").name == "sasakian-r3"
    with pytest.raises(KeyError):
        load_builtin("E9")
    for e in EXAMPLES:
        S = builtin(e.name)
        assert (S.eps0, S.eps1) == (e.eps0, e.eps1)
        assert builtin_text(e.name).strip()


def test_sign_classes_covered():
    classes = {(e.eps0, e.eps1) for e in EXAMPLES}
    assert classes == {(1, 1), (1, -1), (-1, 1), (-1, -1)}


def test_cosymplectic_is_flat(rng):
    S = builtin("cosymplectic-flat")
    for p in S.base.sample_points(4, rng):
        assert np.abs(PointGeometry(S.base, p).riemann).max() <= 1e-12
        assert np.abs(StructurePoint(S, p).nphi).max() <= 1e-12


def identity_diffeo(S):
    old = S.base.coords
    new = tuple(c + "_" for c in old)
    return [parse(c, old) for c in old], [parse(c, new) for c in new]


def test_identity_pullback_keeps_components(rng):
    S = builtin("sasakian-r3")
    P = pullback(S, *identity_diffeo(S))
    for p in S.base.sample_points(4, rng):
        np.testing.assert_array_equal(P.base.metric_at(p), S.base.metric_at(p))
        a, b = StructurePoint(P, p), StructurePoint(S, p)
        np.testing.assert_array_equal(a.phi_m, b.phi_m)
        np.testing.assert_array_equal(a.xi_v, b.xi_v)
        np.testing.assert_array_equal(a.eta_v, b.eta_v)


def test_standard_diffeos_are_inverse_pairs(rng):
    for e in EXAMPLES:
        S = builtin(e.name)
        diffeos = standard_diffeos(S)
        assert [d[0] for d in diffeos] == ["shear", "cyclic", "cubic"]
        for _, F, G in diffeos:
            for p in S.base.sample_points(4, rng):
                q = np.array([f(p) for f in F])
                np.testing.assert_allclose([g(q) for g in G], p, atol=1e-12)


def test_shear_preserves_sasakian_verdicts():
    S = builtin("sasakian-r3")
    _, F, G = standard_diffeos(S)[0]
    P = pullback(S, F, G)
    a = run_identities(S, points=8, seed=4)
    b = run_identities(P, points=8, seed=4)
    assert [r.status for r in a.reports] == [r.status for r in b.reports]
    for x, y in zip(a.reports, b.reports):
        if x.max_residual is not None:
            assert abs(x.max_residual - y.max_residual) <= 1e-6
    assert classify(P, 16).flags() == classify(S, 16).flags()


def test_permutation_keeps_ric_xi_xi(rng):
    S = builtin("hopf-s3")
    _, F, G = standard_diffeos(S)[1]
    P = pullback(S, F, G)
    for p in S.base.sample_points(4, rng):
        q = np.array([f(p) for f in F])
        a, b = StructurePoint(S, p), StructurePoint(P, q)
        assert b.xi_v @ b.geo.ricci @ b.xi_v == pytest.approx(a.xi_v @ a.geo.ricci @ a.xi_v, abs=1e-9)


def test_pulled_back_domain_respects_old_box(rng):
    S = builtin("sasakian-r3")
    _, F, G = standard_diffeos(S)[2]
    P = pullback(S, F, G)
    lo = np.array([b[0] for b in S.base.sample_box])
    hi = np.array([b[1] for b in S.base.sample_box])
    for q in P.base.sample_points(16, rng):
        p = np.array([g(q) for g in G])
        assert np.all(p >= lo) and np.all(p <= hi)


def test_pullback_errors():
    S = builtin("sasakian-r3")
    old = S.base.coords
    new = ("a", "b", "c")
    F = [parse(s, old) for s in ("x", "y + x", "z")]
    wrong_inverse = [parse(s, new) for s in ("a", "b", "c")]
    with pytest.raises(PullbackError):
        pullback(S, F, wrong_inverse)
    # a map that forgets a coordinate cannot pass the round trip
    collapse = [parse(s, old) for s in ("x", "x", "z")]
    with pytest.raises(PullbackError):
        pullback(S, collapse, [parse(s, new) for s in ("a", "b", "c")])
    with pytest.raises(PullbackError):
        pullback(S, F[:2], wrong_inverse[:2])
    with pytest.raises(PullbackError):
        pullback(S, [parse("a", new)] * 3, wrong_inverse)
