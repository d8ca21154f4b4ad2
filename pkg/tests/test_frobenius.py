from fractions import Fraction as F

import pytest
import sympy as sp

from qscatter.coeff_ring import ClassicalRing, QRational, qnum
from qscatter.lattice import pentagon
from qscatter.scattering import scatter
from qscatter.frobenius import (at_root, classical_frobenius_check, limit_identity, quantum_frobenius_check,
                                root_specialization, scaling_bijection_check, tree_divisibility_check)

Q = (F(291, 1000), F(-713, 1000))


@pytest.mark.parametrize("lat,u,p", [(pentagon(1), (1, 1), 5), (pentagon(2), (1, 1), 3),
                                     (pentagon(2), (1, 0), 2), (pentagon(1, (1, 2)), (1, 0), 3)])
def test_classical_frobenius(lat, u, p):
    rep = classical_frobenius_check(scatter(lat, 5, ring=ClassicalRing()), u, p, 5, Q=Q)
    assert rep.verdict and len(rep.rows) > 1
    assert rep.to_json()["kind"] == "classical"


def test_quantum_frobenius_half_integral_scale():
    # D = 2: q^(1/2) -> zeta_3^2 keeps q and q^(1/2) primitive
    lat = pentagon(1, (1, 2))
    rep = quantum_frobenius_check(scatter(lat, 6), (1, 0), 3, 6, Q=Q)
    assert rep.verdict
    assert rep.notes["specialization"] == "q^(1/2) -> zeta_3^2"
    # classical theta_{f_1} has z^{f_1 + f_2} with coefficient 2 here
    row = next(r for r in rep.rows if r["exponent"] == [3, 3])
    assert row["classical"] == "2" and row["at_root"] == ["2", "0"]


def test_quantum_frobenius_negative_control():
    # against the wrong classical diagram the comparison must fail
    qd = scatter(pentagon(1), 6)
    cd = scatter(pentagon(2), 6, ring=ClassicalRing())
    assert not quantum_frobenius_check(qd, (1, 0), 3, 6, Q=Q, cdiag=cd).verdict


def test_root_specialization_rules():
    assert root_specialization(pentagon(1), 5) == 1
    assert root_specialization(pentagon(1, (1, 2)), 5) == 3  # 2 * 3 = 1 mod 5
    with pytest.raises(ValueError):
        root_specialization(pentagon(1), 4)
    with pytest.raises(ValueError):
        root_specialization(pentagon(1, (1, 3)), 3)
    with pytest.raises(ValueError):
        quantum_frobenius_check(scatter(pentagon(1), 2), (1, 0), 2)


def test_at_root_rescales():
    # q^(1/2) at zeta_5^3 is zeta_5^3
    x = QRational.qpow(F(1, 2), 2)
    assert at_root(x, 5, 3).coords == (0, 0, 0, 1)
    # [5]_q vanishes at a primitive 5th root
    assert at_root(qnum(5), 5, 1).is_zero()


@pytest.mark.parametrize("a,w,d,k", [(1, 1, 1, 3), (1, 2, 1, 3), (2, 3, 2, 5), (3, 1, 3, 5), (1, 4, 2, 7)])
def test_limit_identity_against_sympy(a, w, d, k):
    q = sp.Symbol("q", positive=True)
    expr = (-1) ** (k * w - 1) * (q ** (k * k * a) - q ** (-k * k * a)) / (
        k * w * (q ** sp.Rational(k * w, d) - q ** -sp.Rational(k * w, d)))
    lhs, rhs = limit_identity(a, w, d, k)
    assert lhs == F(str(sp.limit(expr, q, 1)))
    assert lhs == rhs


def test_tree_divisibility_small():
    lat = pentagon(1)
    u = (1, 0)
    surv = vanish = 0
    for n in ((4, 1), (4, 2), (3, 3), (5, 1)):
        ok, s, info = tree_divisibility_check(lat, u, 3, n, Q)
        assert ok, info["bad"]
        surv += sum(s.values())
        vanish += info["vanishing"]
    assert surv > 0 and vanish > 0


def test_scaling_bijection_small():
    ok, info = scaling_bijection_check(pentagon(1), (1, 0), 3, (1, 1), Q)
    assert ok
    assert info["surviving"] == [{"w": {"1": [3]}, "trees": 1}]
