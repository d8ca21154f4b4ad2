import random
from fractions import Fraction as F

import pytest
import sympy as sp

from qscatter.lattice import (GradedLattice, det, frac_str, hermite_rows, inverse, nullspace, pentagon, primitive,
                              solve, vec_index)
from qscatter.polyhedra import Polyhedron


def rand_matrix(r, n, lo=-4, hi=4):
    return [[F(r.randint(lo, hi), r.randint(1, 3)) for _ in range(n)] for _ in range(n)]


def test_linear_algebra_against_sympy():
    r = random.Random(1)
    for n in (2, 3, 4):
        for _ in range(5):
            m = rand_matrix(r, n)
            M = sp.Matrix(m)
            assert det(m) == F(str(M.det()))
            if M.det() != 0:
                inv = inverse(m)
                assert sp.Matrix(inv) == M.inv()
                rhs = [F(r.randint(-3, 3)) for _ in range(n)]
                x = solve(m, rhs)
                assert M * sp.Matrix(x) == sp.Matrix(rhs)


def test_nullspace():
    rows = [[1, 2, 3], [2, 4, 6]]
    ns = nullspace(rows, 3)
    assert len(ns) == 2
    for v in ns:
        assert all(sum(a * b for a, b in zip(row, v)) == 0 for row in rows)


def test_primitive_and_index():
    assert primitive((F(2, 3), F(4, 3))) == (1, 2)
    assert primitive((-4, 6)) == (-2, 3)
    assert vec_index((6, -9)) == 3
    with pytest.raises(ValueError):
        primitive((0, 0))


def test_hermite_rows_span():
    rows = [[2, 4], [3, 5]]
    h = hermite_rows(rows)
    # same lattice: index |det| = 2
    assert abs(det(h)) == abs(det(rows)) == 2


def test_graded_lattice_basics():
    lat = pentagon(2, (1, 2))
    assert lat.W((1, 0), (0, 1)) == 2 and lat.W((0, 1), (1, 0)) == -2
    assert lat.pi1((1, 0)) == (0, 2)
    assert lat.unfrozen == (0, 1)
    assert lat.scale == 2
    assert lat.in_nplus((1, 2)) and not lat.in_nplus((0, 0)) and lat.in_nplus((0, 0), allow_zero=True)
    assert not lat.in_nplus((1, -1))
    with pytest.raises(ValueError):
        GradedLattice(2, ((0, 1), (1, 0)))
    with pytest.raises(ValueError):
        GradedLattice(2, ((0, F(1, 2)), (F(-1, 2), 0)), (), {0: 1, 1: 1})


def test_frozen_directions():
    lat = GradedLattice(3, ((0, 1, 1), (-1, 0, 0), (-1, 0, 0)), {2}, {0: 1, 1: 1})
    assert lat.unfrozen == (0, 1)
    assert not lat.in_nplus((0, 0, 1))
    assert lat.active_pi1((0, 0, 1)) == (-1, 0)  # (W(f_3, f_1), W(f_3, f_2))


def test_image_lattice_index():
    lat = pentagon(2)
    img = lat.image_lattice()
    # pi_1(N) = 2Z^2 here, so pi_1(f_1) is primitive in the image
    assert img.index((1, 0)) == 1
    assert img.index((2, 2)) == 2
    assert img.index((3, 0)) == 3


def test_json_roundtrip():
    lat = GradedLattice(3, ((0, 1, F(1, 2)), (-1, 0, 0), (F(-1, 2), 0, 0)), {2}, {0: 2, 1: 1, 2: 2})
    data = lat.to_json()
    assert data["skew_form"][0][2] == "1/2"
    assert GradedLattice.from_json(data) == lat
    with pytest.raises(ValueError):
        GradedLattice.from_json({"rank": 2})
    assert frac_str(F(-3, 4)) == "-3/4"


def test_polyhedron_queries():
    cone = Polyhedron.from_generators([(0, 0)], rays=[(1, 0), (1, 1)])
    assert cone.contains((2, 1)) and not cone.contains((-1, 0))
    assert cone.contains_relint((2, 1)) and not cone.contains_relint((1, 0))
    assert cone.is_cone() and cone.dim == 2
    assert len(cone.facets()) == 2
    ray = Polyhedron(2, [((1, -1), 0)], [((1, 0), 0)])
    assert ray.line_hit((0, 1), (1, 0)) == 1
    assert ray.line_hit((0, 1), (-1, 0)) is None
    assert ray.line_hit((1, 1), (1, 1)) == "inside"
    p = ray.relint_point()
    assert ray.contains_relint(p)
    assert ray.key() == Polyhedron(2, [((2, -2), 0)], [((3, 0), 0)]).key()
