"""The three-correlator space of length-2 sequential measurements.

A point holds the three pairwise sequential correlators of binary
observables measured at three times.  Quantum mechanics fills the body
1 + 2 q12 q13 q23 >= q12^2 + q13^2 + q23^2 (the 3x3 unit-diagonal PSD
condition); classical history-independent models fill the inscribed
tetrahedron cut out by the four facet inequalities.  The boundary of the
quantum body solves a quadratic in q23, giving a closed-form two-sheet
sampler.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

_RANGE_SLACK = 1e-12


@dataclass(frozen=True)
class LgPoint:
    """Correlator triple (q12, q13, q23), each within [-1, 1]."""

    q12: float
    q13: float
    q23: float

    def __post_init__(self):
        for name in ("q12", "q13", "q23"):
            value = getattr(self, name)
            if not math.isfinite(value):
                raise ValueError(f"{name} must be finite")
            if abs(value) > 1.0 + _RANGE_SLACK:
                raise ValueError(f"{name} = {value} lies outside [-1, 1]")

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.q12, self.q13, self.q23)


def quantum_member(p: LgPoint, tol: float = 1e-9) -> bool:
    """Membership in the quantum body (3x3 correlation-matrix condition)."""
    q12, q13, q23 = p.as_tuple()
    if max(abs(q12), abs(q13), abs(q23)) > 1.0 + tol:
        return False
    det = 1.0 + 2.0 * q12 * q13 * q23 - q12 * q12 - q13 * q13 - q23 * q23
    return det >= -tol


def classical_member(p: LgPoint, tol: float = 1e-9) -> bool:
    """Membership in the classical tetrahedron (four facet inequalities)."""
    q12, q13, q23 = p.as_tuple()
    return (
        q12 + q23 - q13 <= 1.0 + tol
        and q12 - q23 + q13 <= 1.0 + tol
        and -q12 + q23 + q13 <= 1.0 + tol
        and -q12 - q23 - q13 <= 1.0 + tol
    )


def sample_surface(grid: int) -> list:
    """Boundary points of the quantum body on a (q12, q13) grid.

    For each grid pair the boundary equation
    q23^2 - 2 q12 q13 q23 + (q12^2 + q13^2 - 1) = 0 has the real roots
    q12 q13 -+ sqrt((1 - q12^2)(1 - q13^2)); both sheets are emitted as
    (point, sheet) with sheet in {"lower", "upper"}.
    """
    if grid < 2:
        raise ValueError("grid must be >= 2")
    coords = [-1.0 + 2.0 * i / (grid - 1) for i in range(grid)]
    out = []
    for q12 in coords:
        for q13 in coords:
            disc = (1.0 - q12 * q12) * (1.0 - q13 * q13)
            if disc < 0.0:
                continue
            root = math.sqrt(disc)
            base = q12 * q13
            lower = min(max(base - root, -1.0), 1.0)
            upper = min(max(base + root, -1.0), 1.0)
            out.append((LgPoint(q12, q13, lower), "lower"))
            if upper != lower:
                out.append((LgPoint(q12, q13, upper), "upper"))
    return out


def surface_csv_rows(points) -> list:
    """CSV lines (header first) with 17-significant-digit coordinates."""
    rows = ["q12,q13,q23,sheet"]
    for point, sheet in points:
        rows.append(
            f"{point.q12:.17g},{point.q13:.17g},{point.q23:.17g},{sheet}"
        )
    return rows


def write_surface_csv(points, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(surface_csv_rows(points)))
        fh.write("\n")
