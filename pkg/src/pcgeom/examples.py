"""Built-in example structures and a pullback fuzzer.

Each built-in ships as a ``.pcm`` spec file under ``pcgeom/data`` together
with the classification it is expected to have. :func:`pullback` moves a
structure to new coordinates through an explicit polynomial diffeomorphism,
which gives tensoriality checks: every scalar residual must be unchanged.
"""

from __future__ import annotations

from dataclasses import dataclass
from importlib import resources
from typing import Sequence

import numpy as np

from .expr import Expression, parse
from .geometry import ChartManifold, EndoField, OneForm, VectorField
from .specfile import loads
from .structure import PCStructure, StructureClass

__all__ = [
    "ExampleSpec",
    "EXAMPLES",
    "PullbackError",
    "example_names",
    "get_example",
    "builtin_text",
    "load_builtin",
    "pullback",
    "standard_diffeos",
    "matches_expected",
]


@dataclass(frozen=True)
class ExampleSpec:
    name: str
    eps0: int
    eps1: int
    contact_metric: bool
    normal: bool
    sasakian: bool
    condition15: tuple[int, ...]
    label: str = ""
    notes: str = ""

    @property
    def filename(self) -> str:
        return f"{self.name}.pcm"

    def load(self) -> PCStructure:
        return load_builtin(self.name)


EXAMPLES: tuple[ExampleSpec, ...] = (
    ExampleSpec("sasakian-r3", 1, -1, True, True, True, (1, -1), "E1", "Sasakian structure on R^3"),
    ExampleSpec("paracontact-r3", 1, 1, True, True, True, (1, -1), "E2", "para-Sasakian structure on R^3"),
    ExampleSpec("kenmotsu-warped", 1, -1, False, True, False, (1,), "E3", "warped product, exp(2z)"),
    ExampleSpec("cosymplectic-flat", 1, -1, False, True, False, (1,), "E4", "flat product, parallel phi"),
    ExampleSpec("hopf-s3", 1, -1, True, True, True, (1, -1), "E5", "unit 3-sphere, constant curvature 1"),
    ExampleSpec("flat-contact-r3", 1, -1, True, False, False, (-1,), "", "contact metric, not normal"),
    ExampleSpec("flat-paracontact-r3", 1, 1, True, False, False, (-1,), "", "paracontact metric, not normal"),
    ExampleSpec("contact-timelike-r3", -1, -1, True, False, False, (-1,), "", "timelike Reeb field, contact metric"),
    ExampleSpec(
        "paracontact-timelike-r3", -1, 1, True, False, False, (-1,), "", "timelike Reeb field, paracontact metric"
    ),
    ExampleSpec("kenmotsu-timelike", -1, -1, False, True, False, (1,), "", "timelike Reeb field, normal"),
    ExampleSpec("warped-cosh-r5", 1, -1, False, True, False, (1,), "", "dimension 5, normal, conformally flat"),
)


def example_names() -> list[str]:
    return [e.name for e in EXAMPLES]


def get_example(name: str) -> ExampleSpec:
    for e in EXAMPLES:
        if name in (e.name, e.label):
            return e
    raise KeyError(f"unknown example {name!r}; known: {', '.join(example_names())}")


def builtin_text(name: str) -> str:
    spec = get_example(name)
    return resources.files("pcgeom").joinpath("data").joinpath(spec.filename).read_text(encoding="utf-8")


def load_builtin(name: str) -> PCStructure:
    """Built-in structure by name (``"sasakian-r3"``) or label (``"E1"``)."""
    spec = get_example(name)
    return loads(builtin_text(spec.name), spec.filename)


def matches_expected(spec: ExampleSpec, cls: StructureClass) -> list[str]:
    """Names of flags where ``cls`` disagrees with the expectation (empty when it matches)."""
    bad = []
    for key in ("contact_metric", "normal", "sasakian"):
        if getattr(cls, key) != getattr(spec, key):
            bad.append(key)
    if tuple(sorted(cls.condition15)) != tuple(sorted(spec.condition15)):
        bad.append("condition15")
    return bad


# ---------------------------------------------------------------------------
# pullback


class PullbackError(ValueError):
    pass


def _new_names(coords: Sequence[str]) -> tuple[str, ...]:
    out = []
    for c in coords:
        name = c + "_"
        while name in coords:
            name += "_"
        out.append(name)
    return tuple(out)


def standard_diffeos(S: PCStructure) -> list[tuple[str, list[Expression], list[Expression]]]:
    """Three polynomial diffeomorphisms (shear, cyclic permutation, cubic) with inverses.

    Each entry is ``(label, new-in-terms-of-old, old-in-terms-of-new)``.
    """
    old = S.base.coords
    new = _new_names(old)
    m = len(old)
    a, b, c = old[0], old[1], old[-1]
    A, B, C = new[0], new[1], new[-1]

    def build(fwd: dict[int, str], inv: dict[int, str]):
        F = [parse(fwd.get(i, old[i]), old) for i in range(m)]
        G = [parse(inv.get(i, new[i]), new) for i in range(m)]
        return F, G

    out = []
    out.append(("shear", *build({1: f"{b} + 0.1*{a}^2"}, {1: f"{B} - 0.1*{A}^2"})))
    perm_f = {i: old[(i + 1) % m] for i in range(m)}
    perm_i = {i: new[(i - 1) % m] for i in range(m)}
    out.append(("cyclic", *build(perm_f, perm_i)))
    out.append(
        (
            "cubic",
            *build(
                {1: f"{b} + 0.05*{a}^3", m - 1: f"{c} + 0.1*{a}*{b}"},
                {1: f"{B} - 0.05*{A}^3", m - 1: f"{C} - 0.1*{A}*({B} - 0.05*{A}^3)"},
            ),
        )
    )
    return out


def _eval(exprs: Sequence[Expression], p) -> np.ndarray:
    return np.array([e(p) for e in exprs])


def pullback(
    S: PCStructure,
    diffeo: Sequence[Expression],
    inverse: Sequence[Expression],
    check_points: int = 16,
    seed: int = 0,
    name: str | None = None,
) -> PCStructure:
    """The structure ``S`` written in new coordinates ``x' = diffeo(x)``.

    ``diffeo`` is expressed over the old coordinates and ``inverse`` over the
    new ones (their coordinate list names the new chart). The round trip is
    checked at ``check_points`` old points and the Jacobian must be
    invertible there.
    """
    M = S.base
    m = M.dim
    if len(diffeo) != m or len(inverse) != m:
        raise PullbackError(f"need {m} expressions for the map and for its inverse")
    if any(e.coords != M.coords for e in diffeo):
        raise PullbackError("diffeo expressions must use the old coordinates")
    new = inverse[0].coords
    if any(e.coords != new for e in inverse) or len(new) != m:
        raise PullbackError("inverse expressions must share one coordinate list of the same dimension")

    rng = np.random.default_rng(seed)
    pts = M.sample_points(check_points, rng)
    for p in pts:
        q = _eval(diffeo, p)
        back = _eval(inverse, q)
        if np.max(np.abs(back - p)) > 1e-9 * max(1.0, float(np.max(np.abs(p)))):
            raise PullbackError(f"inverse check failed at {p.tolist()}: got {back.tolist()}")
        jac = np.array([[e.diff(k)(p) for k in range(m)] for e in diffeo])
        if abs(np.linalg.det(jac)) < 1e-10:
            raise PullbackError(f"singular Jacobian at {p.tolist()}")

    # A[a][a'] = ∂x^a/∂x'^a' (over new coords); K[a'][a] = ∂x'^a'/∂x^a composed with the inverse
    A = [[inverse[a].diff(k) for k in range(m)] for a in range(m)]
    K = [[diffeo[i].diff(a).substitute(inverse) for a in range(m)] for i in range(m)]

    def sub(e: Expression) -> Expression:
        return e.substitute(inverse)

    def total(terms: list[Expression], coords) -> Expression:
        acc = None
        for t in terms:
            if t.is_zero():
                continue
            acc = t if acc is None else acc + t
        return acc if acc is not None else parse("0", coords)

    g = [[sub(e) for e in row] for row in M.metric]
    metric = [[None] * m for _ in range(m)]
    for i in range(m):
        for j in range(i, m):
            e = total([g[a][b] * A[a][i] * A[b][j] for a in range(m) for b in range(m) if not g[a][b].is_zero()], new)
            metric[i][j] = metric[j][i] = e
    phi = [[sub(e) for e in row] for row in S.phi.components]
    phi_new = tuple(
        tuple(
            total(
                [K[i][a] * phi[a][b] * A[b][j] for a in range(m) for b in range(m) if not phi[a][b].is_zero()], new
            )
            for j in range(m)
        )
        for i in range(m)
    )
    xi = [sub(e) for e in S.xi.components]
    eta = [sub(e) for e in S.eta.components]
    xi_new = tuple(total([K[i][a] * xi[a] for a in range(m) if not xi[a].is_zero()], new) for i in range(m))
    eta_new = tuple(total([eta[a] * A[a][j] for a in range(m) if not eta[a].is_zero()], new) for j in range(m))

    # sample box: bounding box of the image; membership is decided in old coordinates
    img = np.array([_eval(diffeo, p) for p in M.sample_points(256, rng)])
    lo, hi = img.min(axis=0), img.max(axis=0)
    old_lo = np.array([b[0] for b in M.sample_box])
    old_hi = np.array([b[1] for b in M.sample_box])

    def domain(q, _inv=tuple(inverse)):
        p = _eval(_inv, q)
        return bool(np.all(p >= old_lo) and np.all(p <= old_hi) and M.admissible(p))

    chart = ChartManifold(
        coords=new,
        metric=tuple(tuple(r) for r in metric),
        sample_box=tuple(zip(lo.tolist(), hi.tolist())),
        exclude=tuple(sub(e) for e in M.exclude),
        name=name or f"{M.name}-pullback",
        domain=domain,
    )
    return PCStructure(
        base=chart,
        phi=EndoField(phi_new),
        xi=VectorField(xi_new),
        eta=OneForm(eta_new),
        eps0=S.eps0,
        eps1=S.eps1,
        d_eta=S.d_eta,
        name=name or f"{S.name}-pullback",
        notes=S.notes,
    )
