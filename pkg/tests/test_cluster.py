import json
import random
from fractions import Fraction as F

import pytest
import sympy as sp

from qscatter.cluster import (ChamberError, NotQuantizable, Seed, a2_seed, chamber_cluster_check,
                              classical_mutation_pullback, compatible_pair, mid_theta, mutate, mutate_word,
                              principal_seed, quantum_mutation_pullback, scattering_data)
from qscatter.lattice import det

B2 = Seed(2, ((0, 1), (-1, 0)), multipliers=(1, 2))
A3 = Seed(3, ((0, 1, 0), (-1, 0, 1), (0, -1, 0)))
QP = (F(1013, 1000), F(1026, 1000), F(1039, 1000), F(1052, 1000))


def fz_mutation(b, k):
    n = len(b)
    out = [[0] * n for _ in range(n)]
    for i in range(n):
        for j in range(n):
            if i == k or j == k:
                out[i][j] = -b[i][j]
            else:
                s = (b[i][k] > 0) - (b[i][k] < 0)
                out[i][j] = b[i][j] + s * max(b[i][k] * b[k][j], 0)
    return out


@pytest.mark.parametrize("seed", [a2_seed(), B2, A3])
def test_exchange_matrix_follows_matrix_mutation(seed):
    r = random.Random(seed.rank)
    for _ in range(4):
        word = [r.choice(seed.unfrozen) for _ in range(4)]
        seeds = mutate_word(seed, word)
        for s, j, t in zip(seeds, word, seeds[1:]):
            assert t.exchange_matrix() == fz_mutation(s.exchange_matrix(), j)
            assert abs(det([list(b) for b in t.basis])) == 1


def test_mutation_rejects_frozen():
    s = Seed(3, ((0, 1, 1), (-1, 0, 0), (-1, 0, 0)), frozen={2})
    with pytest.raises(ValueError):
        mutate(s, 2)
    with pytest.raises(ValueError):
        Seed(2, ((0, F(1, 2)), (F(-1, 2), 0)))


@pytest.mark.parametrize("seed", [a2_seed(), B2, principal_seed(A3).seed])
def test_compatible_pair(seed):
    pair = compatible_pair(seed)
    assert pair.check()
    lam = pair.lam
    assert all(lam[i][j] == -lam[j][i] for i in range(seed.rank) for j in range(seed.rank))


def test_not_quantizable():
    # B is singular on an odd-rank seed with no frozen directions to repair it
    with pytest.raises(NotQuantizable):
        compatible_pair(A3)


def test_principal_seed():
    ps = principal_seed(a2_seed())
    assert ps.rank == 4 and ps.seed.frozen == frozenset({2, 3})
    assert abs(det([list(row) for row in ps.seed.skew])) == 1
    with pytest.raises(ValueError):
        principal_seed(mutate(a2_seed(), 0))


def test_seed_json_roundtrip():
    for seed in (B2, mutate(A3, 1)):
        data = json.loads(json.dumps(seed.to_json()))
        assert Seed.from_json(data) == seed
    assert Seed.from_json({"rank": 2, "skew_form": [["0", "1"], ["-1", "0"]],
                           "multipliers": {"1": 2}}) == B2
    with pytest.raises(ValueError):
        Seed.from_json({"rank": 2})


def test_quantum_pullback_has_classical_limit():
    seed = a2_seed()
    for j in (0, 1):
        for m in ((1, 0), (0, 1), (-1, 2), (2, -1)):
            q = quantum_mutation_pullback(seed, j, "X", m, 5)
            c = classical_mutation_pullback(seed, j, "X", m, 5)
            got = {n: v for n, v in q.classical_limit().terms.items() if v != 0}
            assert got == {n: v for n, v in c.items() if sum(n) - sum(m) <= 5}


def test_quantum_pullback_a_side_classical_limit():
    # the quantum A-side result is in f-coordinates (f_i = B_1(e_i)); the classical one in M
    seed = a2_seed()
    data = scattering_data(seed, "A")
    checked = 0
    for j in (0, 1):
        for m in ((-1, 0), (0, -1), (-2, 1), (1, -2), (-1, -1)):
            if sum(a * b for a, b in zip(m, seed.basis[j])) > 0:
                continue  # keep the classical side a polynomial
            c = classical_mutation_pullback(seed, j, "A", m, 8)
            mf = tuple(int(x) for x in data.to_f(m))
            q = quantum_mutation_pullback(seed, j, "A", mf, 8, data=data)
            got = {tuple(int(x) for x in data.from_f(n)): v
                   for n, v in q.classical_limit().terms.items() if v != 0}
            assert got == c
            checked += 1
    assert checked >= 4


@pytest.mark.parametrize("side,classical", [("X", False), ("X", True), ("A", False)])
def test_chamber_green_words(side, classical):
    seed = a2_seed() if side == "X" else principal_seed(a2_seed()).seed
    for word in ((0,), (1, 0)):
        rep = chamber_cluster_check(seed, word, 4, side=side, classical=classical)
        assert rep["pass"], rep


def test_chamber_rejects_red_word():
    with pytest.raises(ChamberError):
        chamber_cluster_check(a2_seed(), (0, 0), 3)


def a2_cluster_monomials():
    x1, x2 = sp.symbols("x1 x2")
    xs = [x1, x2]
    while len(xs) < 7:
        xs.append(sp.cancel((1 + xs[-1]) / xs[-2]))
    assert sp.cancel(xs[5] - x1) == 0 and sp.cancel(xs[6] - x2) == 0  # period 5
    mons = {}
    for i in range(5):
        for a in range(3):
            for b in range(3 - a):
                e = sp.expand(sp.cancel(xs[i] ** a * xs[i + 1] ** b))
                mons[e] = (i, a, b)
    return x1, x2, mons


def test_mid_theta_a2_are_cluster_monomials():
    x1, x2, mons = a2_cluster_monomials()
    for p in ((1, 0), (-1, 0), (0, -1), (-1, -1), (1, -1), (-1, 1), (2, -1), (-2, 0)):
        th, meta = mid_theta(a2_seed(), p, QP, 4)
        assert meta["status"] == "stable"
        assert th.get(p) == 1
        expr = sp.expand(sum(sp.Rational(c.numerator, c.denominator) * x1**m[0] * x2**m[1]
                             for m, c in th.items()))
        assert expr in mons, (p, expr)
    # theta_{(-1,-1)} = x_3 x_4 carries a coefficient 2
    th, _ = mid_theta(a2_seed(), (-1, -1), QP, 4)
    assert th[(-2, 0)] == 2
