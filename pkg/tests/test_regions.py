import math

import numpy as np
import pytest

from tempora import regions, scenarios, sdp
from tempora.regions import LgPoint


def matrix_of(p):
    return np.array(
        [
            [1.0, p.q12, p.q13],
            [p.q12, 1.0, p.q23],
            [p.q13, p.q23, 1.0],
        ]
    )


def det_identity(p):
    return (
        1.0
        + 2.0 * p.q12 * p.q13 * p.q23
        - p.q12 ** 2
        - p.q13 ** 2
        - p.q23 ** 2
    )


class TestLgPoint:
    def test_validation(self):
        p = LgPoint(0.1, -0.2, 0.3)
        assert p.as_tuple() == (0.1, -0.2, 0.3)
        with pytest.raises(ValueError):
            LgPoint(1.5, 0.0, 0.0)
        with pytest.raises(ValueError):
            LgPoint(float("nan"), 0.0, 0.0)


class TestMembership:
    def test_known_points(self):
        assert regions.classical_member(LgPoint(1.0, 1.0, 1.0))
        assert regions.quantum_member(LgPoint(1.0, 1.0, 1.0))
        # the quantum LG optimum sits outside the classical tetrahedron
        half = LgPoint(0.5, -0.5, 0.5)
        assert regions.quantum_member(half)
        assert not regions.classical_member(half)
        assert not regions.quantum_member(LgPoint(1.0, 1.0, -1.0))
        assert not regions.classical_member(LgPoint(1.0, 1.0, -1.0))

    def test_classical_tetrahedron_vertices(self):
        for v in [(1, 1, 1), (1, -1, -1), (-1, 1, -1), (-1, -1, 1)]:
            p = LgPoint(*map(float, v))
            assert regions.classical_member(p)
            assert regions.quantum_member(p)

    def test_classical_subset_of_quantum_on_grid(self):
        qs = np.linspace(-1.0, 1.0, 51)
        violations = 0
        for q12 in qs:
            for q13 in qs:
                for q23 in qs:
                    p = LgPoint(q12, q13, q23)
                    if regions.classical_member(p) and not regions.quantum_member(p):
                        violations += 1
        assert violations == 0

    def test_quantum_membership_matches_min_eigenvalue(self):
        rng = np.random.default_rng(31)
        for _ in range(10_000):
            p = LgPoint(*rng.uniform(-1.0, 1.0, size=3))
            by_region = regions.quantum_member(p)
            by_eig = float(np.linalg.eigvalsh(matrix_of(p))[0]) >= -1e-9
            assert by_region == by_eig, p.as_tuple()


class TestSurface:
    def test_points_satisfy_boundary_identity(self):
        pts = regions.sample_surface(60)
        assert pts
        for p, sheet in pts:
            assert sheet in ("lower", "upper")
            assert abs(det_identity(p)) < 1e-9
            assert regions.quantum_member(p)

    def test_sheets_cover_extremes(self):
        pts = regions.sample_surface(3)
        tuples = {
            (round(p.q12, 6), round(p.q13, 6), round(p.q23, 6))
            for p, _ in pts
        }
        assert (1.0, 1.0, 1.0) in tuples
        assert (1.0, -1.0, -1.0) in tuples

    def test_grid_validation(self):
        with pytest.raises(ValueError):
            regions.sample_surface(1)

    def test_csv_rows_round_trip(self, tmp_path):
        pts = regions.sample_surface(5)
        rows = regions.surface_csv_rows(pts)
        assert rows[0] == "q12,q13,q23,sheet"
        assert len(rows) == len(pts) + 1
        for row, (p, sheet) in zip(rows[1:], pts):
            c12, c13, c23, name = row.split(",")
            # 17 significant digits reproduce the doubles exactly
            assert float(c12) == p.q12
            assert float(c13) == p.q13
            assert float(c23) == p.q23
            assert name == sheet
        path = tmp_path / "surface.csv"
        regions.write_surface_csv(pts, path)
        assert path.read_text().splitlines() == rows


def test_lg_maximum_over_quantum_region():
    # coarse grid plus local refinement around the best corner
    best = -np.inf
    qs = np.linspace(-1.0, 1.0, 41)
    for q12 in qs:
        for q13 in qs:
            for q23 in qs:
                p = LgPoint(q12, q13, q23)
                if regions.quantum_member(p):
                    best = max(best, q12 + q23 - q13)

    def refine(center, width, steps):
        nonlocal best
        c12, c13, c23 = center
        for q12 in np.linspace(c12 - width, c12 + width, steps):
            for q13 in np.linspace(c13 - width, c13 + width, steps):
                for q23 in np.linspace(c23 - width, c23 + width, steps):
                    vals = np.clip([q12, q13, q23], -1.0, 1.0)
                    p = LgPoint(*vals)
                    if regions.quantum_member(p):
                        best = max(best, p.q12 + p.q23 - p.q13)

    refine((0.5, -0.5, 0.5), 0.06, 13)
    assert best == pytest.approx(1.5, abs=1e-4)
    solved = sdp.solve_correlation(
        scenarios.correlation_from_scenario(scenarios.leggett_garg()), tol=1e-10
    )
    assert solved.primal_value == pytest.approx(best, abs=1e-4)
    assert best <= 1.5 + 1e-9


def test_surface_touches_lg_maximizer():
    # the LG optimum (1/2, -1/2, 1/2) lies on the boundary surface
    p = LgPoint(0.5, -0.5, 0.5)
    assert abs(det_identity(p)) < 1e-12
    assert regions.quantum_member(p)
    moved = LgPoint(0.5, -0.5, 0.5 + 1e-3)
    assert det_identity(moved) < 0.0
    assert not regions.quantum_member(moved)
