import numpy as np
import pytest

from conftest import builtin
from pcgeom.examples import EXAMPLES, builtin_text
from pcgeom.specfile import SpecParseError, dumps, load, loads

NAMES = [e.name for e in EXAMPLES]


def sasaki_text():
    return builtin_text("sasakian-r3")


@pytest.mark.parametrize("name", NAMES)
def test_dump_load_roundtrip(name):
    S = builtin(name)
    T = loads(dumps(S))
    assert T.eps0 == S.eps0 and T.eps1 == S.eps1 and T.d_eta == S.d_eta and T.name == S.name
    assert T.base.coords == S.base.coords and T.base.sample_box == S.base.sample_box
    p = S.base.sample_points(3, np.random.default_rng(0))
    for q in p:
        np.testing.assert_array_equal(T.base.metric_at(q), S.base.metric_at(q))
        np.testing.assert_array_equal([e(q) for e in T.xi.components], [e(q) for e in S.xi.components])
        np.testing.assert_array_equal(
            [[e(q) for e in r] for r in T.phi.components], [[e(q) for e in r] for r in S.phi.components]
        )
    assert dumps(T) == dumps(S)


def test_load_from_path(tmp_path):
    f = tmp_path / "s.pcm"
    f.write_text(sasaki_text())
    S = load(f)
    assert S.name == "sasakian-r3" and S.dim == 3


def test_coordinate_name_indices():
    text = sasaki_text().replace("g 3 1 = -y/4", "g z x = -y/4")
    S = loads(text)
    assert S.base.metric[2][0](np.array([0.0, 2.0, 0.0])) == -0.5


def test_asymmetric_metric_rejected():
    text = sasaki_text().replace("g 3 1 = -y/4", "g 3 1 = -y/4\ng 1 3 = y/4")
    with pytest.raises(SpecParseError) as info:
        loads(text)
    assert info.value.line is not None


def test_syntax_error_has_line_number():
    lines = sasaki_text().splitlines()
    k = next(i for i, l in enumerate(lines) if l.startswith("g 2 2"))
    lines[k] = "g 2 2 = 1/*4"
    with pytest.raises(SpecParseError) as info:
        loads("\n".join(lines), "bad.pcm")
    assert info.value.line == k + 1
    assert f"bad.pcm:{k + 1}" in str(info.value)


@pytest.mark.parametrize(
    "old,new",
    [
        ("eps0 = 1", "eps0 = 2"),
        ("d_eta = half", "d_eta = quarter"),
        ("dim = 3", "dim = 4"),
        ("coords = x, y, z", "coords = x, y, y"),
        ("[phi]", "[psi]"),
        ("name = sasakian-r3", "name = a\nname = b"),
        ("phi 1 2 = 1", "phi 1 = 1"),
        ("phi 1 2 = 1", "phi 1 7 = 1"),
        ("xi 3 = 2", "xi w = 2"),
        ("sample_box = x:[-2, 2] y:[-2, 2] z:[-2, 2]", "sample_box = x:[-2, 2] y:[-2, 2]"),
        ("sample_box = x:[-2, 2] y:[-2, 2] z:[-2, 2]", "sample_box = x:[2, -2] y:[-2, 2] z:[-2, 2]"),
        ("eps1 = -1", "colour = blue"),
    ],
)
def test_malformed_files(old, new):
    text = sasaki_text()
    assert old in text
    with pytest.raises(SpecParseError):
        loads(text.replace(old, new, 1))


def test_missing_header_and_metric():
    text = sasaki_text()
    with pytest.raises(SpecParseError):
        loads(text.replace("eps1 = -1\n", ""))
    head = text.split("[metric]")[0]
    with pytest.raises(SpecParseError):
        loads(head)


def test_exclude_section():
    S = loads(builtin_text("hopf-s3"))
    assert len(S.base.exclude) == 1
    k = S.base.coords.index("th")
    p = np.array([np.mean(b) for b in S.base.sample_box])
    p[k] = 0.0
    assert not S.base.admissible(p)
