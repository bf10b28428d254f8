"""Per-identity residual reports."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

__all__ = ["ResidualReport", "summarize", "skipped"]

PASS, FAIL, SKIP = "pass", "fail", "skip"


@dataclass
class ResidualReport:
    """Outcome of one identity on one example.

    ``status`` is ``"pass"`` exactly when ``max_residual <= tolerance``;
    skipped identities carry ``skipped_reason`` and never count as passed.
    """

    identity: str
    example: str
    suite: str = ""
    delta: int | None = None
    points: int = 0
    vectors: int = 0
    max_residual: float | None = None
    mean_residual: float | None = None
    tolerance: float = 0.0
    status: str = SKIP
    skipped_reason: str | None = None
    details: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.status == PASS

    @property
    def skipped(self) -> bool:
        return self.status == SKIP

    def as_dict(self) -> dict:
        return {
            "id": self.identity,
            "example": self.example,
            "suite": self.suite,
            "delta": self.delta,
            "points": self.points,
            "vectors": self.vectors,
            "max_residual": self.max_residual,
            "mean_residual": self.mean_residual,
            "tolerance": self.tolerance,
            "status": self.status,
            "skipped_reason": self.skipped_reason,
            "details": self.details,
        }


def summarize(
    identity: str,
    example: str,
    values: Iterable[np.ndarray | float],
    tol: float,
    *,
    suite: str = "",
    delta: int | None = None,
    points: int = 0,
    vectors: int = 0,
    details: dict | None = None,
) -> ResidualReport:
    """Max/mean reduction of per-point residual arrays into a report."""
    arrs = [np.atleast_1d(np.asarray(v, dtype=float)).ravel() for v in values]
    flat = np.concatenate(arrs) if arrs else np.zeros(0)
    if flat.size == 0:
        return skipped(identity, example, "no residuals evaluated", suite=suite, delta=delta, tol=tol)
    mx = float(np.max(flat))
    if not np.isfinite(mx):
        mx = float("inf")
    return ResidualReport(
        identity=identity,
        example=example,
        suite=suite,
        delta=delta,
        points=points,
        vectors=vectors,
        max_residual=mx,
        mean_residual=float(np.mean(flat)),
        tolerance=tol,
        status=PASS if mx <= tol else FAIL,
        details=dict(details or {}),
    )


def skipped(identity: str, example: str, reason: str, *, suite: str = "", delta: int | None = None, tol: float = 0.0) -> ResidualReport:
    return ResidualReport(
        identity=identity, example=example, suite=suite, delta=delta, tolerance=tol, status=SKIP, skipped_reason=reason
    )
