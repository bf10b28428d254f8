from functools import lru_cache

import numpy as np
import pytest

from conftest import builtin, make_chart
from pcgeom.cone import build_cone
from pcgeom.examples import EXAMPLES
from pcgeom.geometry import PointGeometry
from pcgeom.identities import (
    REGISTRY,
    SUITES,
    RunOptions,
    a0_terms,
    conformally_flat_riemann,
    identities_for,
    nr9b_terms,
    p_tensor,
    rcw2_terms,
    residual_a0,
    residual_conformally_flat,
    residual_gray,
    residual_normal_suite,
    residual_rcw2,
    residual_trp,
    residual_w0,
    residual_wn1,
    residual_wn2,
    residual_wn3,
    residual_wn4,
    ric0_terms,
    run_identities,
    star_ricci,
    star_ricci_matrix,
    star_scalar,
    tr_nabla_phi_sq,
    w0_terms,
    wn1b_terms,
    wn2_terms,
)
from pcgeom.structure import StructurePoint, batch_defect

NAMES = [e.name for e in EXAMPLES]
SPEC = {e.name: e for e in EXAMPLES}


@lru_cache(maxsize=None)
def full_run(name):
    return run_identities(builtin(name), points=8, vectors=4, seed=11)


def point(name, seed=0):
    S = builtin(name)
    return S.base.sample_points(1, np.random.default_rng(seed))[0]


def rand_vecs(rng, dim, k, n=6):
    return [rng.uniform(-1, 1, size=(n, dim)) for _ in range(k)]


def test_registry_ids_are_unique_and_suites_known():
    ids = [c.id for c in REGISTRY]
    assert len(ids) == len(set(ids))
    assert {c.suite for c in REGISTRY} == set(SUITES)
    assert identities_for(("all",)) == list(REGISTRY)
    assert all(c.suite == "normal" for c in identities_for(("normal",)))
    with pytest.raises(ValueError):
        identities_for(("bogus",))
    flags = {"contact_metric", "normal", "sasakian", "axioms_ok"}
    assert all(set(c.hypotheses) <= flags for c in REGISTRY)


@pytest.mark.parametrize("name", NAMES)
def test_every_evaluated_identity_passes(name):
    res = full_run(name)
    failed = [(r.identity, r.delta, r.max_residual) for r in res.reports if not r.passed and not r.skipped]
    assert failed == []
    assert res.ok and res.exit_code == 0


@pytest.mark.parametrize("name", NAMES)
def test_skip_correctness(name):
    spec = SPEC[name]
    res = full_run(name)
    for r in res.reports:
        if r.suite == "contact":
            assert r.skipped == (not spec.contact_metric) or r.identity in ("cor-trp",)
        if r.suite == "normal" and not spec.normal:
            assert r.skipped and "normal" in r.skipped_reason
        if r.skipped:
            assert r.skipped_reason and r.max_residual is None and not r.passed
    for d in (1, -1):
        gray = res.report("thm-gray", d)
        assert gray.skipped == (d not in spec.condition15)
        a0 = [r for r in res.reports if r.identity == "thm-a0"]
        assert sorted(r.delta for r in a0) == sorted(spec.condition15)


def test_constant_curvature_gating():
    for name in NAMES:
        r = full_run(name).report("cor-trp")
        if name == "hopf-s3":
            assert r.passed and r.details["precondition_residual"] <= 1e-7
        else:
            assert r.skipped
            if SPEC[name].contact_metric:
                assert r.skipped_reason.startswith("no constant-curvature example")


def test_conformally_flat_gating():
    for name in NAMES:
        for cid in ("cor-ric0", "cor-ric1", "cor-ric2"):
            r = full_run(name).report(cid)
            assert r.passed == (name == "warped-cosh-r5"), (name, cid, r.skipped_reason)


def test_contact_suite_on_kenmotsu_is_all_skipped():
    res = run_identities(builtin("kenmotsu-warped"), suites=("contact",), points=4)
    assert res.reports and all(r.skipped for r in res.reports)
    assert res.exit_code == 0


def test_tolerance_floor_reports_failures():
    res = run_identities(builtin("hopf-s3"), points=4, tol=1e-15)
    bad = [r for r in res.reports if r.status == "fail"]
    assert bad and all(r.max_residual > 1e-15 for r in bad)
    assert res.exit_code == 1


def test_argument_validation():
    with pytest.raises(ValueError):
        run_identities(builtin("sasakian-r3"), points=0)
    with pytest.raises(ValueError):
        run_identities(builtin("sasakian-r3"), tol=0)


# ---- multilinearity and specialisation -------------------------------------


@pytest.mark.parametrize("name", ["flat-contact-r3", "contact-timelike-r3", "paracontact-r3"])
def test_multilinearity(name, rng):
    S = builtin(name)
    sp = StructurePoint(S, point(name))
    fr = sp.frame()
    builders = [
        (lambda Z, X, Y, W: rcw2_terms(sp, fr, Z, X, Y, W), 4),
        (lambda Z, X, Y: w0_terms(sp, Z, X, Y), 3),
        (lambda Z, X, Y: a0_terms(sp, Z, X, Y, -1), 3),
        (lambda X, Y, Z: wn1b_terms(sp, X, Y, Z), 3),
        (lambda X, Y: wn2_terms(sp, fr, X, Y)[:-3], 2),  # the last terms are the constant g, eta and h parts
    ]
    for build, arity in builders:
        args = rand_vecs(rng, S.dim, arity)
        base = build(*args)
        d0 = batch_defect(base)
        for k in range(arity):
            doubled = list(args)
            doubled[k] = 2 * args[k]
            terms = build(*doubled)
            for a, b in zip(base, terms):
                np.testing.assert_allclose(b, 2 * a, atol=1e-9)
            np.testing.assert_allclose(batch_defect(terms), 2 * d0, atol=1e-9)


@pytest.mark.parametrize("name", ["sasakian-r3", "paracontact-r3", "hopf-s3"])
def test_rcw2_at_xi_reproduces_wn1b(name, rng):
    S = builtin(name)
    sp = StructurePoint(S, point(name))
    X, Y, W = rand_vecs(rng, S.dim, 3)
    xi = sp.xi(len(X))
    r = rcw2_terms(sp, sp.frame(), xi, X, Y, W)
    w = wn1b_terms(sp, X, Y, W)
    lhs_r, lhs_w = np.sum(r[:8], axis=0), np.sum(w[:4], axis=0)
    assert np.abs(lhs_w).max() > 1e-3  # not a vacuous comparison
    np.testing.assert_allclose(lhs_r, lhs_w, atol=1e-9)
    np.testing.assert_allclose(np.sum(r[8:], axis=0), np.sum(w[4:], axis=0), atol=1e-9)


def test_star_ricci_frame_independence(rng):
    for name in ("sasakian-r3", "flat-paracontact-r3", "contact-timelike-r3"):
        S = builtin(name)
        p = point(name)
        sp = StructurePoint(S, p)
        f1 = sp.frame(rng.normal(size=(3, 3)))
        f2 = sp.frame(rng.normal(size=(3, 3)))
        np.testing.assert_allclose(star_ricci_matrix(sp, f1), star_ricci_matrix(sp, f2), atol=1e-8)
        assert star_scalar(sp, f1) == pytest.approx(star_scalar(sp, f2), abs=1e-8)
        assert tr_nabla_phi_sq(sp, f1) == pytest.approx(tr_nabla_phi_sq(sp, f2), abs=1e-8)
        X, Y = rng.normal(size=3), rng.normal(size=3)
        assert star_ricci(S, X, Y, p, f1) == pytest.approx(star_ricci(S, X, Y, p, f2), abs=1e-8)
        assert star_scalar(sp, f1) == pytest.approx(-np.trace(np.linalg.solve(sp.g_m, star_ricci_matrix(sp, f1))))


# ---- single-evaluation wrappers ---------------------------------------------


def test_wrappers_on_sasakian(rng):
    S = builtin("sasakian-r3")
    p = point("sasakian-r3")
    Z, X, Y, W = rng.normal(size=(4, 3))
    assert residual_a0(S, 1, Z, X, Y, p) < 1e-7
    assert residual_a0(S, -1, Z, X, Y, p) < 1e-7
    assert residual_a0(S, -1, X, X, Y, p) < 1e-9
    assert residual_w0(S, Z, X, Y, p) < 1e-7
    assert residual_rcw2(S, Z, X, Y, W, p) < 1e-7
    assert max(residual_wn1(S, X, Y, Z, p)) < 1e-8
    xi = StructurePoint(S, p).xi_v
    assert max(residual_wn1(S, xi, Y, Z, p)) < 1e-12
    assert residual_wn2(S, X, Y, p) < 1e-7
    assert residual_wn2(S, xi, xi, p) < 1e-9
    assert residual_wn3(S, p) < 1e-8
    assert residual_wn4(S, p) < 1e-6
    assert residual_trp(S, Z, X, W, Y, p) < 1e-9
    assert max(residual_normal_suite(S, Z, X, Y, p).values()) < 1e-7


def test_ric_xi_xi_is_two_on_sasakian():
    # PAPER: Ric(xi, xi) = -eps1 (2n - |h|^2) with n = 1, h = 0
    S = builtin("sasakian-r3")
    for seed in range(4):
        sp = StructurePoint(S, point("sasakian-r3", seed))
        assert sp.xi_v @ sp.geo.ricci @ sp.xi_v == pytest.approx(2.0, abs=1e-8)


def test_p_tensor_vanishes_on_sasakian(rng):
    for name in ("sasakian-r3", "hopf-s3", "paracontact-r3"):
        sp = StructurePoint(builtin(name), point(name))
        A, B, C = rand_vecs(rng, 3, 3)
        assert np.abs(p_tensor(sp, A, B, C)).max() < 1e-9
    sp = StructurePoint(builtin("flat-contact-r3"), point("flat-contact-r3"))
    assert np.abs(p_tensor(sp, *rand_vecs(rng, 3, 3))).max() > 1e-3


def test_gray_wrapper(rng):
    C = build_cone(builtin("sasakian-r3"))
    p = C.sample_points(1, rng)[0]
    X, Y, V = rng.normal(size=(3, 4))
    assert residual_gray(C, 1, X, Y, V, p) < 1e-7
    assert residual_gray(C, 1, X, X, V, p) < 1e-12


def test_cosymplectic_normal_suite_exactly_zero(rng):
    S = builtin("cosymplectic-flat")
    p = point("cosymplectic-flat")
    Z, X, Y = rng.normal(size=(3, 3))
    assert max(residual_normal_suite(S, Z, X, Y, p).values()) <= 1e-12


# ---- conformally flat algebra -----------------------------------------------


def test_dimension_three_is_conformally_flat(rng):
    # DERIVED: the Weyl tensor vanishes identically in dimension 3
    M = make_chart(("x", "y", "z"), {(0, 0): "2 + sin(y)", (1, 0): "0.3*x*z", (1, 1): "1 + x^2", (2, 2): "exp(y)"})
    for p in M.sample_points(3, rng):
        geo = PointGeometry(M, p)
        np.testing.assert_allclose(conformally_flat_riemann(geo.g, geo.ricci), geo.riemann, atol=1e-11)


def test_synthetic_conformally_flat_algebra(rng):
    S = builtin("warped-cosh-r5")
    sp = StructurePoint(S, point("warped-cosh-r5"))
    g, phi, xi, eta = sp.g_m, sp.phi_m, sp.xi_v, sp.eta_v
    X = rng.normal(size=(6, 5))
    good = 0.7 * g + 1.9 * np.outer(eta, eta)
    R = conformally_flat_riemann(g, good)
    # the manufactured tensor has the requested Ricci tensor
    np.testing.assert_allclose(np.einsum("ikij->kj", R), good, atol=1e-12)
    assert np.abs(batch_defect(nr9b_terms(R, phi, xi, sp.e1, X))).max() < 1e-12
    Q = np.linalg.solve(g, good)
    assert np.abs(batch_defect(ric0_terms(Q, phi, xi, eta, X))).max() < 1e-12
    A = rng.normal(size=(5, 5))
    bad = A + A.T
    Rb = conformally_flat_riemann(g, bad)
    assert np.abs(batch_defect(nr9b_terms(Rb, phi, xi, sp.e1, X))).max() > 1e-3
    Qb = np.linalg.solve(g, bad)
    assert np.abs(batch_defect(ric0_terms(Qb, phi, xi, eta, X))).max() > 1e-3


def test_conformally_flat_wrapper(rng):
    S = builtin("warped-cosh-r5")
    p = point("warped-cosh-r5")
    X, Y = rng.normal(size=(2, 5))
    assert max(residual_conformally_flat(S, X, Y, p)) < 1e-6
    xi = StructurePoint(S, p).xi_v
    assert residual_conformally_flat(S, xi, Y, p)[0] <= 1e-12


# ---- negative controls and conventions --------------------------------------


def test_negated_star_ricci_fails_wn2(rng, monkeypatch):
    import pcgeom.identities as ids

    S = builtin("sasakian-r3")
    p = point("sasakian-r3")
    X, Y = rng.normal(size=(2, 3))
    orig = ids.star_ricci_matrix
    monkeypatch.setattr(ids, "star_ricci_matrix", lambda sp, frame=None: -orig(sp, frame))
    assert residual_wn2(S, X, Y, p) > 1e-2


def test_wrong_delta_fails_a0_off_condition(rng):
    # kenmotsu-warped satisfies the delta condition only for +1
    S = builtin("kenmotsu-warped")
    sp = StructurePoint(S, point("kenmotsu-warped"))
    Z, X, Y = rand_vecs(rng, 3, 3, n=16)
    assert np.max(np.abs(batch_defect(a0_terms(sp, Z, X, Y, 1)))) < 1e-9
    assert np.max(np.abs(batch_defect(a0_terms(sp, Z, X, Y, -1)))) > 1e-3


def test_tr_nabla_phi_options():
    S = builtin("sasakian-r3")
    p = point("sasakian-r3")
    assert residual_wn4(S, p, "norm") < 1e-6
    assert residual_wn4(S, p, "cross") > 1e-2
    res = run_identities(S, suites=("contact",), points=4, options=RunOptions(tr_nabla_phi="cross"))
    assert res.report("cor-wn4").status == "fail"
    with pytest.raises(ValueError):
        tr_nabla_phi_sq(StructurePoint(S, p), mode="other")


def test_timelike_wn4_general_form():
    for name in ("contact-timelike-r3", "paracontact-timelike-r3"):
        S = builtin(name)
        p = point(name)
        assert residual_wn4(S, p, general=True) < 1e-6
        assert residual_wn4(S, p, general=False) > 1e-2
        r = full_run(name).report("cor-wn4")
        assert r.passed and r.details["printed_form_residual"] > 1e-2
    r = full_run("sasakian-r3").report("cor-wn4")
    assert r.details["printed_form_residual"] < 1e-6


def test_axiom_failure_skips_everything_else():
    from pcgeom.examples import builtin_text
    from pcgeom.specfile import loads

    S = loads(builtin_text("sasakian-r3").replace("xi 3 = 2", "xi 3 = 2.5"))
    res = run_identities(S, points=4)
    assert res.exit_code == 1 and res.classification is None
    for r in res.reports:
        if r.suite != "axioms":
            assert r.skipped and r.skipped_reason == "structure axioms fail"
    assert res.report("axiom-eta-xi").status == "fail"
