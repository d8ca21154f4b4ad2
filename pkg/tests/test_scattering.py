import json
import time
from fractions import Fraction as F

import pytest
import sympy as sp

from qscatter.coeff_ring import ClassicalRing, QuantumRing
from qscatter.lattice import GradedLattice, pentagon
from qscatter.scattering import (GenericityError, JointError, ScatteringDiagram, check_consistency,
                                 initial_diagram, path_ordered_product, scatter)
from qscatter.torus import TruncatedSeries, coeff_str


def wall_key(diag):
    return sorted((w.exponent, w.support.key(), tuple(sorted((k, coeff_str(c)) for k, c in w.logfn.items())))
                  for w in diag.walls)


@pytest.mark.parametrize("lat,order", [(pentagon(1), 5), (pentagon(2), 4), (pentagon(1, (1, 2)), 4),
                                       (pentagon(3), 3)])
def test_direct_and_perturbation_agree(lat, order):
    direct = scatter(lat, order, method="direct")
    pert = scatter(lat, order, method="perturbation", rng=2)
    assert wall_key(direct) == wall_key(pert)
    assert check_consistency(direct)["pass"]


def test_kronecker_central_wall_classical():
    # (1 + z^{f_1})^2, (1 + z^{f_2})^2 scatter to (1 - z^{f_1+f_2})^{-4} on the central ray;
    # the crossing exponent W(m, n') is twice the primitive pairing, so f = (1 - y)^-2 here
    diag = scatter(pentagon(2), 6, ring=ClassicalRing())
    central = next(w for w in diag.walls if w.exponent == (1, 1))
    assert {k: c * k * k for k, c in central.logfn.items()} == {1: 2, 2: 2, 3: 2}


def test_kronecker_walls():
    diag = scatter(pentagon(2), 6)
    exps = sorted(w.exponent for w in diag.walls)
    # initial walls, the central ray, and the first rays of the two sequences
    assert (1, 1) in exps and (1, 2) in exps and (2, 1) in exps
    assert all(sum(e) <= 6 for e in exps)
    assert check_consistency(diag)["pass"]


def test_classical_crossing_against_binomial():
    # crossing f_i^perp from x_i > 0 to x_i < 0 sends z^m to z^m (1 + z^{f_i})^{W(m, f_i)}
    lat = pentagon(2)
    order = 5
    diag = initial_diagram(lat, order, ClassicalRing())
    y = sp.Symbol("y")
    cases = [((0, 1), 0, [(F(1), F(1, 3)), (F(-1), F(1, 3))]),
             ((1, 0), 1, [(F(1, 3), F(1)), (F(1, 3), F(-1))])]
    for m, i, path in cases:
        f = lat.basis_vector(i)
        e = lat.W(m, f)
        ser = sp.series((1 + y) ** e, y, 0, order + 1).removeO()
        expect = {tuple(a + k * b for a, b in zip(m, f)): F(str(ser.coeff(y, k)))
                  for k in range(order + 1) if ser.coeff(y, k) != 0}
        assert path_ordered_product(diag, path, m, order).terms == expect


def test_crossing_back_and_forth_is_identity():
    lat = pentagon(1)
    diag = scatter(lat, 6)
    P, Qp = (F(1), F(1, 3)), (F(-1), F(1, 3))
    there = path_ordered_product(diag, [P, Qp], (0, 1), 6)
    back = path_ordered_product(diag, [Qp, P], there, 6)
    assert back == TruncatedSeries.monomial(lat, diag.ring, (0, 1), 6)
    # W(f_2, f_1) = -1: the classical shadow is z^{f_2} (1 + z^{f_1})^{-1}
    assert there.classical_limit().terms == {(k, 1): F((-1) ** k) for k in range(7)}


def test_consistency_fails_without_a_wall():
    diag = scatter(pentagon(1), 4)
    broken = ScatteringDiagram(diag.lattice, diag.ring, [w for w in diag.walls if w.exponent != (1, 1)],
                               diag.order, meta=dict(diag.meta))
    assert not check_consistency(broken)["pass"]


def test_path_through_wall_joint_rejected():
    diag = scatter(pentagon(1), 3)
    with pytest.raises((JointError, GenericityError)):
        path_ordered_product(diag, [(F(1), F(1)), (F(-1), F(-1))], (1, 0))


def test_frozen_seed_and_json():
    lat = GradedLattice(3, ((0, 1, 1), (-1, 0, 0), (-1, 0, 0)), {2}, {0: 1, 1: 1})
    diag = scatter(lat, 4)
    assert check_consistency(diag)["pass"]
    data = json.loads(json.dumps(diag.to_json()))
    assert data["order"] == 4 and data["kind"] == "standard"
    assert len(data["walls"]) == len(diag.walls)
    for w in data["walls"]:
        assert set(w) >= {"normal", "support", "exponent_dir", "logfn"}


def test_rank3_timing():
    lat = GradedLattice(3, ((0, 1, 0), (-1, 0, 1), (0, -1, 0)), (), {0: 1, 1: 1, 2: 1})
    t = time.time()
    diag = scatter(lat, 4)
    assert check_consistency(diag)["pass"]
    assert time.time() - t < 60


def test_quantum_classical_engines_agree():
    lat = pentagon(2)
    q = scatter(lat, 5, ring=QuantumRing(1))
    c = scatter(lat, 5, ring=ClassicalRing())
    qk = sorted((w.exponent, w.support.key(), tuple(sorted((k, v.classical_limit()) for k, v in w.logfn.items())))
                for w in q.walls)
    ck = sorted((w.exponent, w.support.key(), tuple(sorted(w.logfn.items()))) for w in c.walls)
    assert qk == ck
