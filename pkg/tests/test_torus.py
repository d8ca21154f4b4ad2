import random

from qscatter.coeff_ring import ClassicalRing, QRational, QuantumRing
from qscatter.lattice import pentagon
from qscatter.torus import TorusMonomial, TruncatedSeries, coeff_from_str, coeff_str, monomial_mul


def rand_series(r, lat, ring, base, order):
    terms = {}
    for _ in range(6):
        a, b = r.randint(0, 2), r.randint(0, 2)
        terms[(base[0] + a, base[1] + b)] = ring.coerce(r.randint(-3, 3)) * ring.qpow(r.randint(-2, 2))
    return TruncatedSeries(lat, ring, base, order, terms)


def test_monomial_commutation():
    lat = pentagon(1)
    a = TorusMonomial(QRational(1), (1, 0))
    b = TorusMonomial(QRational(1), (0, 1))
    ab, ba = monomial_mul(a, b, lat), monomial_mul(b, a, lat)
    assert ab.exponent == ba.exponent == (1, 1)
    assert ab.coeff == QRational.qpow(2) * ba.coeff


def test_product_associative_and_distributive():
    lat, ring = pentagon(2), QuantumRing(1)
    r = random.Random(4)
    for _ in range(5):
        x, y, z = (rand_series(r, lat, ring, (0, 0), 4) for _ in range(3))
        assert (x * y) * z == x * (y * z)
        assert x * (y + z) == x * y + x * z


def test_truncation_and_base():
    lat, ring = pentagon(1), QuantumRing(1)
    s = TruncatedSeries(lat, ring, (1, 0), 2, {(1, 0): 1, (2, 1): 2, (3, 1): 5, (0, 1): 7})
    # (3, 1) is beyond the order and (0, 1) is outside the cone above the base
    assert set(s.terms) == {(1, 0), (2, 1)}
    assert s.truncate(1).terms == {(1, 0): ring.one}


def test_classical_limit_and_strings():
    lat, ring = pentagon(1), QuantumRing(2)
    c = ring.qnum(3) * ring.qpow(1)
    s = TruncatedSeries.monomial(lat, ring, (0, 0), 3, c)
    cl = s.classical_limit()
    assert cl.ring.classical and cl.coefficient((0, 0)) == 3
    assert coeff_from_str(coeff_str(c), ring) == c
    assert coeff_from_str("5/2", ClassicalRing()) == 2.5
