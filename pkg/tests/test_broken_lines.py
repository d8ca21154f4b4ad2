import random
from fractions import Fraction as F

import pytest

from qscatter.broken_lines import (alpha_from_traces, broken_lines, expand_in_theta_basis, generic_point,
                                   structure_constant, theta, theta_product, trace_data, window)
from qscatter.coeff_ring import ClassicalRing, QRational
from qscatter.lattice import GradedLattice, pentagon
from qscatter.scattering import GenericityError, path_ordered_product, scatter

Q = (F(713, 1000), F(-291, 1000))
A3 = GradedLattice(3, ((0, 1, 0), (-1, 0, 1), (0, -1, 0)), (), {0: 1, 1: 1, 2: 1})


@pytest.fixture(scope="module")
def a2():
    return scatter(pentagon(1), 6)


def test_a2_thetas_by_hand(a2):
    # at this Q: theta_{f_1} = z^{f_1}(1 + z^{f_2}), theta_{-f_1} = z^{-f_1} + z^{f_2}
    t1 = theta(a2, (1, 0), Q)
    assert t1.terms == {(1, 0): 1, (1, 1): 1}
    assert theta(a2, (-1, 0), Q).terms == {(-1, 0): 1, (0, 1): 1}
    assert theta(a2, (0, 1), Q).terms == {(0, 1): 1, (1, 1): 1, (1, 2): 1}


def test_quantum_exchange_relation(a2):
    # multiplying the series above in the quantum torus by hand gives 1 + q^{+-1} theta_{f_2}
    q = QRational.qpow(1)
    t2 = theta(a2, (0, 1), Q).terms
    for pair, c in (([(1, 0), (-1, 0)], q), ([(-1, 0), (1, 0)], q.inverse())):
        got = {n: v for n, v in theta_product(a2, pair, Q, 4).terms.items() if v != 0}
        assert got == {(0, 0): 1, **{n: c * v for n, v in t2.items()}}


def test_kernel_exponent_is_monomial():
    lat = GradedLattice(3, ((0, 1, 1), (-1, 0, 0), (-1, 0, 0)), {2}, {0: 1, 1: 1})
    diag = scatter(lat, 3)
    p = (0, 1, -1)  # W(p, .) = 0
    assert not any(lat.pi1(p))
    assert theta(diag, p, generic_point(diag, 1)).terms == {p: diag.ring.one}


@pytest.mark.parametrize("lat,order", [(pentagon(1), 5), (pentagon(2), 5), (A3, 3)])
def test_theta_transports_along_paths(lat, order):
    diag = scatter(lat, order, rng=3)
    r = random.Random(1)
    for _ in range(4):
        p = tuple(r.randint(-2, 2) for _ in range(lat.rank))
        Q1, Q2 = generic_point(diag, r), generic_point(diag, r)
        t1 = theta(diag, p, Q1, order)
        assert path_ordered_product(diag, [Q1, Q2], t1, order) == theta(diag, p, Q2, order)


def test_broken_line_bends_and_json(a2):
    lines = broken_lines(a2, (-1, 0), Q, 4)
    assert sorted(b.final for b in lines) == [(-1, 0), (0, 1)]
    bent = next(b for b in lines if b.bends)
    data = bent.to_json()
    assert data["initial"] == [-1, 0] and data["final"] == [0, 1]
    assert len(data["bends"]) == 1


def test_endpoint_on_wall_rejected(a2):
    with pytest.raises(GenericityError):
        theta(a2, (1, 0), (F(0), F(1, 2)))


def test_structure_constants_positive_and_local(a2):
    val, cert = structure_constant(a2, (1, 0), (-1, 0), (0, 1))
    assert val == QRational.qpow(1)
    assert cert["agree"] and len(cert["points"]) >= 3
    zero, info = structure_constant(a2, (1, 0), (0, 1), (0, 0))
    assert zero == 0 and "reason" in info


def test_classical_products_commute():
    diag = scatter(pentagon(2), 5, ring=ClassicalRing())
    a = theta_product(diag, [(-1, 0), (0, -1)], Q, 4)
    b = theta_product(diag, [(0, -1), (-1, 0)], Q, 4)
    assert a == b


def test_expand_and_trace(a2):
    prod = theta_product(a2, [(1, 0), (-1, 0)], Q, 3)
    coeffs = expand_in_theta_basis(a2, prod, Q)
    assert coeffs == {(0, 0): 1, (0, 1): QRational.qpow(1)}
    assert trace_data(a2, [(1, 0), (-1, 0)], Q, 3) == 1
    win = window(a2.lattice, (0, 0), 2)
    alphas, gram = alpha_from_traces(a2, (1, 0), (-1, 0), win, Q, 3)
    assert alphas[(0, 1)] == QRational.qpow(1) and alphas[(0, 0)] == 1
