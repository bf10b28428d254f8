"""Command-line front end: ``verify``, ``list-examples``, ``export-example``."""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from . import examples, specfile
from .geometry import SamplingError
from .identities import SUITES, RunOptions, RunResult, run_identities
from .specfile import SpecParseError
from .structure import AxiomError, PCStructure, check_axioms

__all__ = ["RunConfig", "load_spec", "load_manifold", "run", "to_json", "to_text", "main"]

AXIOM_CHECK_POINTS = 16


@dataclass(frozen=True)
class RunConfig:
    manifold: str
    suites: tuple[str, ...] = ("all",)
    points: int = 32
    vectors: int = 8
    seed: int = 0
    tol: float = 1e-7
    classify_tol: float = 1e-7
    d_eta: str | None = None
    tr_nabla_phi: str = "norm"
    output: str = "text"

    def __post_init__(self):
        if self.points < 1:
            raise ValueError("points must be >= 1")
        if self.vectors < 0:
            raise ValueError("vectors must be >= 0")
        if not self.tol > 0:
            raise ValueError("tol must be > 0")
        bad = [s for s in self.suites if s != "all" and s not in SUITES]
        if bad:
            raise ValueError(f"unknown suite(s) {', '.join(bad)}; choose from all, {', '.join(SUITES)}")


def load_spec(path: str | Path, seed: int = 0) -> PCStructure:
    """Parse a spec file and check the structure axioms at sampled points."""
    S = specfile.load(path)
    check_axioms(S, S.base.sample_points(AXIOM_CHECK_POINTS, np.random.default_rng(seed)))
    return S


def load_manifold(source: str, seed: int = 0) -> PCStructure:
    """Built-in name or label, otherwise a spec-file path."""
    try:
        examples.get_example(source)
    except KeyError:
        if not Path(source).exists():
            raise FileNotFoundError(
                f"{source!r} is neither a built-in example ({', '.join(examples.example_names())}) nor a file"
            ) from None
        return load_spec(source, seed)
    return examples.load_builtin(source)


def run(config: RunConfig) -> RunResult:
    S = load_manifold(config.manifold, config.seed)
    if config.d_eta is not None:
        S = S.with_convention(config.d_eta)
    return run_identities(
        S,
        suites=config.suites,
        points=config.points,
        vectors=config.vectors,
        seed=config.seed,
        tol=config.tol,
        classify_tol=config.classify_tol,
        options=RunOptions(tr_nabla_phi=config.tr_nabla_phi),
    )


# ---------------------------------------------------------------------------
# output


def _encode(obj) -> str:
    """JSON with every float printed to 17 significant digits."""
    if obj is None or isinstance(obj, (bool, np.bool_)):
        return json.dumps(None if obj is None else bool(obj))
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if math.isnan(x):
            return "null"
        if math.isinf(x):
            return '"inf"' if x > 0 else '"-inf"'
        return format(x, ".17g")
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, dict):
        return "{" + ", ".join(f"{json.dumps(str(k))}: {_encode(v)}" for k, v in obj.items()) + "}"
    if isinstance(obj, np.ndarray):
        return _encode(obj.tolist())
    if isinstance(obj, (list, tuple)):
        return "[" + ", ".join(_encode(v) for v in obj) + "]"
    raise TypeError(f"cannot encode {type(obj).__name__}")


def report_dict(result: RunResult) -> dict:
    cls = result.classification
    reports = []
    for r in result.reports:
        d = r.as_dict()
        d["details"] = dict(sorted(d["details"].items()))
        reports.append(d)
    return {
        "config": result.config,
        "classification": None if cls is None else {**cls.flags(), "condition15": list(cls.condition15)},
        "summary": {
            "passed": sum(r.passed for r in result.reports),
            "failed": sum(not r.passed and not r.skipped for r in result.reports),
            "skipped": sum(r.skipped for r in result.reports),
            "ok": result.ok,
        },
        "identities": reports,
    }


def to_json(result: RunResult) -> str:
    return _encode(report_dict(result)) + "\n"


def to_text(result: RunResult) -> str:
    lines = [f"example: {result.example}"]
    cfg = result.config
    lines.append(
        "config: " + " ".join(f"{k}={cfg[k]}" for k in cfg if k != "example")
    )
    cls = result.classification
    if cls is not None:
        flags = " ".join(f"{k}={'yes' if v else 'no'}" for k, v in cls.flags().items())
        lines.append(f"class: {flags} delta={list(cls.condition15)}")
    width = max((len(r.identity) for r in result.reports), default=10)
    for r in result.reports:
        name = r.identity + ("" if r.delta is None else f"[{r.delta:+d}]")
        if r.skipped:
            lines.append(f"SKIP  {name:<{width + 4}} {r.skipped_reason}")
        else:
            tag = "PASS" if r.passed else "FAIL"
            lines.append(f"{tag}  {name:<{width + 4}} max={r.max_residual:.3e} mean={r.mean_residual:.3e} tol={r.tolerance:.1e}")
    s = report_dict(result)["summary"]
    lines.append(f"{s['passed']} passed, {s['failed']} failed, {s['skipped']} skipped")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# entry point


def _suites(text: str) -> tuple[str, ...]:
    return tuple(s.strip() for s in text.split(",") if s.strip())


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="pcgeom", description="Numerical curvature-identity checks on almost (para)contact metric charts.")
    sub = ap.add_subparsers(dest="command", required=True)

    v = sub.add_parser("verify", help="run identity suites on a manifold")
    v.add_argument("--manifold", required=True, help="built-in name/label or path to a .pcm file")
    v.add_argument("--suite", default="all", type=_suites, help=f"comma list from all,{','.join(SUITES)}")
    v.add_argument("--points", type=int, default=32)
    v.add_argument("--vectors", type=int, default=8)
    v.add_argument("--seed", type=int, default=0)
    v.add_argument("--tol", type=float, default=1e-7)
    v.add_argument("--classify-tol", type=float, default=1e-7)
    v.add_argument("--d-eta", choices=("half", "one"), default=None, help="override the file's d(eta) convention")
    v.add_argument("--tr-nabla-phi", choices=("norm", "cross"), default="norm")
    v.add_argument("--format", choices=("text", "json"), default="text")
    v.add_argument("--output", "-o", default=None, help="write the report to a file instead of stdout")

    sub.add_parser("list-examples", help="list built-in examples")

    e = sub.add_parser("export-example", help="print a built-in example as a spec file")
    e.add_argument("name")
    return ap


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)

    if args.command == "list-examples":
        for ex in examples.EXAMPLES:
            label = ex.label or "-"
            print(f"{ex.name:<26} {label:<3} eps0={ex.eps0:+d} eps1={ex.eps1:+d}  {ex.notes}")
        return 0

    if args.command == "export-example":
        try:
            sys.stdout.write(specfile.dumps(examples.load_builtin(args.name)))
        except KeyError as exc:
            print(f"error: {exc.args[0]}", file=sys.stderr)
            return 2
        return 0

    try:
        config = RunConfig(
            manifold=args.manifold,
            suites=args.suite,
            points=args.points,
            vectors=args.vectors,
            seed=args.seed,
            tol=args.tol,
            classify_tol=args.classify_tol,
            d_eta=args.d_eta,
            tr_nabla_phi=args.tr_nabla_phi,
            output=args.format,
        )
        result = run(config)
    except SpecParseError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return 2
    except AxiomError as exc:
        print(f"axiom error: {exc}", file=sys.stderr)
        return 2
    except SamplingError as exc:
        print(f"sampling error: {exc}", file=sys.stderr)
        return 2
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2

    text = to_json(result) if config.output == "json" else to_text(result)
    if args.output:
        Path(args.output).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return result.exit_code


if __name__ == "__main__":
    sys.exit(main())
