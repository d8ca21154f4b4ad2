"""Seeds, mutations, compatible pairs and the cluster-side scattering diagrams.

Conventions.  A seed lives on N = Z^r with basis e_i (coordinates are taken
w.r.t. the *initial* basis, so a mutated seed stores its basis as integer
vectors).  M = N^* uses the dual coordinates.  On the X side the scattering
lattice is N itself with f_i = e_i.  On the A side it is M with f_i = B_1(e_i)
and form Lambda; the GradedLattice we hand to the engine is written in the
f-basis, so its skew matrix is Lambda(f_i, f_j).
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction

from .coeff_ring import ClassicalRing, QuantumRing, is_zero
from .lattice import GradedLattice, as_fraction, det, frac_str, inverse, matmul, primitive, solve, transpose
from .scattering import (
    initial_diagram, path_crossings, path_ordered_product, poly_mul_trunc, poly_pow_trunc, scatter,
)
from .torus import TruncatedSeries, add_into, coeff_str, within


class NotQuantizable(ValueError):
    pass


class ChamberError(RuntimeError):
    pass


def _vec(v):
    return tuple(int(x) for x in v)


def _pos(x):
    return x if x > 0 else 0


@dataclass(frozen=True)
class Seed:
    rank: int
    skew: tuple  # {e_i, e_j} for the *initial* basis
    frozen: frozenset = frozenset()
    multipliers: tuple = ()
    basis: tuple = ()  # e_i as integer vectors in initial coordinates

    def __post_init__(self):
        r = self.rank
        skew = tuple(tuple(as_fraction(x) for x in row) for row in self.skew)
        if len(skew) != r or any(len(row) != r for row in skew):
            raise ValueError(f"skew form must be {r}x{r}")
        if any(skew[i][j] != -skew[j][i] for i in range(r) for j in range(r)):
            raise ValueError("form is not skew-symmetric")
        mult = tuple(as_fraction(x) for x in (self.multipliers or [1] * r))
        if len(mult) != r or any(x <= 0 for x in mult):
            raise ValueError("need one positive multiplier per basis vector")
        basis = tuple(_vec(b) for b in self.basis) if self.basis else tuple(
            tuple(int(i == j) for j in range(r)) for i in range(r))
        object.__setattr__(self, "skew", skew)
        object.__setattr__(self, "multipliers", mult)
        object.__setattr__(self, "basis", basis)
        object.__setattr__(self, "frozen", frozenset(int(i) for i in self.frozen))
        for i in range(r):
            for j in range(r):
                if self.eps(i, j).denominator != 1:
                    raise ValueError(f"epsilon_{i}{j} = d_{j}{{e_{i}, e_{j}}} is not an integer")

    @property
    def unfrozen(self):
        return tuple(i for i in range(self.rank) if i not in self.frozen)

    def form(self, a, b):
        """{a, b} for vectors in initial coordinates."""
        r = self.rank
        return sum(a[i] * self.skew[i][j] * b[j] for i in range(r) for j in range(r) if a[i] and b[j])

    def eps(self, i, j):
        return self.multipliers[j] * self.form(self.basis[i], self.basis[j])

    def B(self, n, j):
        """B(n, e_j) = d_j {n, e_j}."""
        return self.multipliers[j] * self.form(n, self.basis[j])

    def B1(self, i):
        """B(e_i, .) as a covector in dual coordinates."""
        r = self.rank
        # B(e_i, e_l) = eps_il; solve <v, basis_l> = eps_il
        vals = [self.eps(i, l) for l in range(r)]
        v = solve([list(b) for b in self.basis], vals)
        return tuple(v)

    def exchange_matrix(self):
        return [[self.eps(i, j) for j in range(self.rank)] for i in range(self.rank)]

    def to_json(self):
        return {
            "rank": self.rank,
            "frozen": sorted(self.frozen),
            "skew_form": [[frac_str(x) for x in row] for row in self.skew],
            "multipliers": [frac_str(x) for x in self.multipliers],
            "basis": [list(b) for b in self.basis],
        }

    @classmethod
    def from_json(cls, data):
        if isinstance(data, str):
            data = json.loads(data)
        try:
            r = int(data["rank"])
            skew = [[as_fraction(x) for x in row] for row in data["skew_form"]]
        except (KeyError, TypeError, ValueError) as e:
            raise ValueError(f"bad seed data: {e}") from e
        mult = data.get("multipliers") or [1] * r
        if isinstance(mult, dict):
            mult = [mult.get(str(i), mult.get(i, 1)) for i in range(r)]
        return cls(r, skew, frozenset(data.get("frozen", [])), tuple(as_fraction(x) for x in mult),
                   tuple(tuple(b) for b in data.get("basis", [])))


def a2_seed():
    """eps_12 = 1 = -eps_21, all d_i = 1."""
    return Seed(2, ((0, 1), (-1, 0)))


def mutate(seed, j):
    if j in seed.frozen:
        raise ValueError(f"index {j} is frozen")
    if not 0 <= j < seed.rank:
        raise ValueError(f"index {j} out of range")
    ej = seed.basis[j]
    new = []
    for i, ei in enumerate(seed.basis):
        if i == j:
            new.append(tuple(-x for x in ej))
        else:
            k = _pos(seed.eps(i, j))
            new.append(tuple(a + int(k) * b for a, b in zip(ei, ej)))
    return Seed(seed.rank, seed.skew, seed.frozen, seed.multipliers, tuple(new))


def mutate_word(seed, word):
    out = [seed]
    for j in word:
        out.append(mutate(out[-1], j))
    return out


# compatible pairs


@dataclass(frozen=True)
class CompatiblePair:
    seed: Seed
    lam: tuple  # Lambda on M in dual coordinates

    def __call__(self, a, b):
        r = self.seed.rank
        return sum(a[i] * self.lam[i][j] * b[j] for i in range(r) for j in range(r) if a[i] and b[j])

    def check(self):
        s = self.seed
        for j in s.unfrozen:
            bj = s.B1(j)
            row = [self(bj, tuple(int(k == l) for l in range(s.rank))) for k in range(s.rank)]
            # Lambda(B_1(e_j), .) is a functional on M, i.e. a vector in N
            if tuple(row) != tuple(Fraction(x) / s.multipliers[j] for x in s.basis[j]):
                return False
        return True


def compatible_pair(seed):
    """A skew Lambda on M with Lambda(B_1(e_j), .) = e_j / d_j for unfrozen j."""
    r = seed.rank
    B1 = [list(seed.B1(i)) for i in range(r)]
    if det(B1) != 0 and not seed.frozen:
        # Lambda = B^-1 D in the basis pair (B_1(e_i)), (e_i)
        Bm = [list(row) for row in B1]
        Binv = inverse(Bm)
        E = [list(map(Fraction, b)) for b in seed.basis]
        # Lambda(B1_i, m) = <e_i, m>/d_i  =>  B1 . Lam = Dinv . E
        rhs = [[x / seed.multipliers[i] for x in E[i]] for i in range(r)]
        lam = matmul(Binv, rhs)
    else:
        lam = _solve_lambda(seed, B1)
    pair = CompatiblePair(seed, tuple(tuple(Fraction(x) for x in row) for row in lam))
    assert pair.check()
    return pair


def _solve_lambda(seed, B1):
    r = seed.rank
    idx = [(a, b) for a in range(r) for b in range(a + 1, r)]
    rows, rhs = [], []
    for j in seed.unfrozen:
        for k in range(r):
            row = [Fraction(0)] * len(idx)
            for t, (a, b) in enumerate(idx):
                # Lambda[a][b] = x_t, Lambda[b][a] = -x_t; entry (B1_j . Lambda)_k
                if b == k:
                    row[t] += B1[j][a]
                if a == k:
                    row[t] -= B1[j][b]
            rows.append(row)
            rhs.append(Fraction(seed.basis[j][k]) / seed.multipliers[j])
    if not idx:
        x = []
        if any(rhs):
            raise NotQuantizable("no compatible Lambda: the seed is not quantizable")
    else:
        x = solve(rows, rhs)
        if x is None:
            raise NotQuantizable("no compatible Lambda: the seed is not quantizable")
    lam = [[Fraction(0)] * r for _ in range(r)]
    for t, (a, b) in enumerate(idx):
        lam[a][b] = x[t]
        lam[b][a] = -x[t]
    return lam


# principal coefficients


@dataclass(frozen=True)
class PrincipalSeed:
    seed: Seed  # the doubled seed on N + M
    base: Seed

    @property
    def rank(self):
        return self.seed.rank


def principal_seed(seed):
    """Seed on N + M with form {n1,n2} + m2(n1) - m1(n2), frozen F_1 u I_2."""
    if seed.basis != tuple(tuple(int(i == j) for j in range(seed.rank)) for i in range(seed.rank)):
        raise ValueError("principal_seed expects a seed in its own initial basis")
    r = seed.rank
    R = 2 * r
    skew = [[Fraction(0)] * R for _ in range(R)]
    for i in range(r):
        for j in range(r):
            skew[i][j] = seed.skew[i][j]
        # {(e_i, 0), (0, e_i^*)} = e_i^*(e_i) = 1
        skew[i][r + i] = Fraction(1)
        skew[r + i][i] = Fraction(-1)
    frozen = set(seed.frozen) | set(range(r, R))
    mult = tuple(seed.multipliers) * 2
    out = Seed(R, tuple(map(tuple, skew)), frozenset(frozen), mult)
    if abs(det([list(row) for row in out.skew])) != 1:
        raise AssertionError("principal form is not unimodular")
    return PrincipalSeed(out, seed)


# the lattices handed to the scattering engine


@dataclass
class ClusterDiagramData:
    """Lattice data for one side.

    `lattice`/`sign` are the initial data as defined (Lambda and Psi^-1 on the
    A side).  `engine`/`engine_sign` are what the completion runs on.  On the A
    side these are -Lambda and Psi: the defined data only scatters to a
    consistent diagram with outgoing walls along +pi_1, and q -> q^-1 maps
    (Lambda, Psi^-1) to (-Lambda, Psi), whose walls are outgoing in the usual
    sense.  `bar` records that engine coefficients must be conjugated back.
    """

    side: str
    seed: Seed
    lattice: GradedLattice
    sign: int
    fbasis: tuple  # f_i as vectors in N (X side) or M (A side)
    pair: CompatiblePair = None
    engine: GradedLattice = None
    engine_sign: int = 1
    bar: bool = False

    def to_f(self, v):
        """Coordinates of v (in N or M) w.r.t. the f-basis."""
        x = solve(transpose([list(map(Fraction, f)) for f in self.fbasis]), list(map(Fraction, v)))
        if x is None:
            raise ValueError("vector not in the span of the f-basis")
        return tuple(x)

    def from_f(self, c):
        r = len(self.fbasis)
        return tuple(sum(Fraction(c[i]) * self.fbasis[i][k] for i in range(r)) for k in range(r))

    def direction(self, seed, j):
        """f-coordinates of the mutation direction of index j in a mutated seed."""
        return self.to_f(seed.basis[j]) if self.side == "X" else self.to_f(seed.B1(j))


def scattering_data(seed, side="X", pair=None):
    r = seed.rank
    mult = {i: seed.multipliers[i] for i in range(r)}
    if side == "X":
        skew = [[seed.form(seed.basis[i], seed.basis[j]) for j in range(r)] for i in range(r)]
        lat = GradedLattice(r, skew, seed.frozen, mult)
        return ClusterDiagramData("X", seed, lat, 1, seed.basis, engine=lat)
    if side != "A":
        raise ValueError("side must be 'A' or 'X'")
    pair = pair or compatible_pair(seed)
    fb = tuple(seed.B1(i) for i in range(r))
    if det([list(f) for f in fb]) == 0:
        raise NotQuantizable("B_1 of the frozen directions must be supplied for a degenerate form")
    skew = [[pair(fb[i], fb[j]) for j in range(r)] for i in range(r)]
    lat = GradedLattice(r, skew, seed.frozen, mult)
    eng = GradedLattice(r, [[-x for x in row] for row in skew], seed.frozen, mult)
    return ClusterDiagramData("A", seed, lat, -1, fb, pair, eng, 1, True)


def build_diagram(seed, side="X", order=4, pair=None, ring=None, classical=False):
    """The initial diagram: Psi(z^{e_i}) on the X side, Psi(z^{B_1(e_i)})^-1 on the A side."""
    data = scattering_data(seed, side, pair)
    lat = data.lattice
    ring = ring or (ClassicalRing() if classical else QuantumRing(lat.scale))
    diag = initial_diagram(lat, order, ring, data.sign)
    diag.meta["side"] = side
    return diag, data


def complete_diagram(seed, side="X", order=4, pair=None, classical=False, rng=0):
    """scat of the side's initial diagram, run on the engine data (see ClusterDiagramData)."""
    data = scattering_data(seed, side, pair)
    lat = data.engine
    ring = ClassicalRing() if classical else QuantumRing(lat.scale)
    diag = scatter(lat, order, rng=rng, ring=ring, sign=data.engine_sign)
    diag.meta["side"] = side
    diag.meta["conjugated"] = data.bar
    return diag, data


def bar_series(series, lat=None):
    """Apply q^(1/D) -> q^(-1/D) to every coefficient (optionally re-homing the lattice)."""
    out = TruncatedSeries(lat or series.lat, series.ring, series.base, series.order)
    out.terms = {n: (c.bar() if hasattr(c, "bar") else c) for n, c in series.terms.items()}
    return out


# mutation pullbacks


def _classical_series(n, psi, e, order):
    """z^n (1 + z^psi)^e as {exponent: Fraction}; binomial series cut at order if e < 0."""
    out = {}
    top = e if e >= 0 else order
    c = Fraction(1)
    for k in range(top + 1):
        out[tuple(a + k * b for a, b in zip(n, psi))] = c
        c = c * (e - k) / (k + 1)
    return out


def classical_mutation_pullback(seed, j, side, m, order=4):
    """mu_j^* z^m: z^n(1+z^{e_j})^{-B(n,e_j)} on X, z^m(1+z^{B(e_j,.)})^{-m(e_j)} on A."""
    if j in seed.frozen:
        raise ValueError(f"index {j} is frozen")
    m = _vec(m)
    if side == "X":
        e = -seed.B(m, j)
        psi = seed.basis[j]
    elif side == "A":
        e = -sum(a * b for a, b in zip(m, seed.basis[j]))
        psi = seed.B1(j)
        if any(x.denominator != 1 for x in psi):
            raise ValueError("B_1(e_j) is not integral")
        psi = _vec(psi)
    else:
        raise ValueError("side must be 'A' or 'X'")
    if e.denominator != 1:
        raise ValueError("non-integral mutation exponent")
    return _classical_series(m, psi, int(e), order)


def _conjugation_factor(ring, k, c, K, inverse):
    """Polynomial in y of prod_{a=1}^{|k|} (1 + q^{s(2a-1)/c} y)^{-s}, or its inverse; s = sign k."""
    s = 1 if k > 0 else -1
    poly = [ring.one]
    for a in range(1, abs(k) + 1):
        poly = poly_mul_trunc(poly + [ring.zero], [ring.one, ring.qpow(Fraction(s * (2 * a - 1)) / c)], K, ring)
    e = -s if not inverse else s
    return poly_pow_trunc(poly, e, K, ring)


def conjugate(lat, ring, psi, c, series, inverse=False):
    """Psi_{q^{1/c}}(z^psi) f Psi^{-1} (or the inverse conjugation) applied termwise."""
    psi = _vec(psi)
    base, order = series.base, series.order
    if not lat.in_nplus(psi):
        raise ChamberError("conjugation by Psi(z^psi) needs psi in N^+")
    dpsi = sum(psi)
    out = TruncatedSeries(lat, ring, base, order)
    for n, cn in series.terms.items():
        w = lat.W(n, psi)
        k = c * w
        if k.denominator != 1:
            raise ValueError("c W(n, psi) is not an integer")
        k = int(k)
        if k == 0:
            add_into(out.terms, n, cn)
            continue
        K = (order - (sum(n) - sum(base))) // dpsi
        fac = _conjugation_factor(ring, k, c, K, inverse)
        for t, ct in enumerate(fac):
            if is_zero(ct):
                continue
            m = tuple(a + t * b for a, b in zip(n, psi))
            if within(lat, m, base, order):
                # z^{t psi} z^n = q^{W(t psi, n)} z^{t psi + n}
                add_into(out.terms, m, cn * ct * ring.qpow(t * lat.W(psi, n)))
    return out


def quantum_mutation_pullback(seed, j, side, m, order=4, pair=None, data=None, ring=None):
    """Quantum mu_j^*: conjugation by Psi_{q^{1/d_j}} on X, its inverse with Lambda on A.

    The result lives in the scattering lattice of the *initial* seed of `data`
    (f-coordinates), so mutated seeds can be composed in a fixed torus.
    """
    if j in seed.frozen:
        raise ValueError(f"index {j} is frozen")
    if data is None:
        data = scattering_data(seed, side, pair)
    elif data.side != side:
        raise ValueError("scattering data for the other side")
    lat = data.lattice
    ring = ring or QuantumRing(lat.scale)
    if isinstance(m, TruncatedSeries):
        series = m
    else:
        series = TruncatedSeries.monomial(lat, ring, _vec(m), order)
    psi = data.direction(seed, j)
    if any(x.denominator != 1 for x in psi):
        raise ValueError("mutation direction is not in the f-lattice")
    return conjugate(lat, ring, psi, seed.multipliers[j], series, inverse=(side == "A"))


# chamber check


def _tropical_step(data, seed, j, x):
    """Inverse of the piecewise-linear identification T_j at an active point x."""
    lat = data.engine
    f = data.direction(seed, j)
    fx = lat.active_pairing(f, x)
    if fx <= 0:
        return x
    sgn = data.engine_sign
    d = seed.multipliers[j]
    pi = lat.active_pi1(f)
    # T_j(x) = x + sgn d_j <f_j, x>_+ pi_1(f_j); <f_j, pi_1(f_j)> = 0 so the inverse is explicit
    return tuple(a - sgn * d * fx * b for a, b in zip(x, pi))


def chamber_point(data, seeds):
    """An interior point of the chamber of seeds[-1], pulled back to the initial diagram."""
    lat = data.engine
    last = seeds[-1]
    fs = [data.direction(last, i) for i in lat.unfrozen]
    # <f'_i, x> = 1 on active coordinates
    x = solve([[f[a] for a in lat.unfrozen] for f in fs], [Fraction(1)] * len(fs))
    if x is None:
        raise ChamberError("mutated f-vectors are not independent")
    x = tuple(x)
    for k in range(len(seeds) - 2, -1, -1):
        x = _tropical_step(data, seeds[k], _word_index(seeds[k], seeds[k + 1]), x)
    return x


def _word_index(s0, s1):
    for j in s0.unfrozen:
        if mutate(s0, j).basis == s1.basis:
            return j
    raise ChamberError("consecutive seeds are not related by a mutation")


def _is_green(data, seed, j):
    f = data.direction(seed, j)
    if any(x.denominator != 1 for x in f):
        return False
    return data.engine.in_nplus(_vec(f))


def _generic_near(diag, x, scale=Fraction(1, 97)):
    for t in range(1, 40):
        y = tuple(a + scale * Fraction(t * (i + 2), 7 * (i + 3)) * (1 if i % 2 == 0 else -1)
                  for i, a in enumerate(x))
        if not any(w.support.contains(y) for w in diag.walls):
            return y
    raise ChamberError("could not find a generic chamber point")


def _primitive_active(v, lat):
    return primitive(tuple(Fraction(v[a]) for a in lat.unfrozen))


def chamber_cluster_check(seed, word, order=4, side="X", pair=None, diag=None, data=None, classical=False):
    """Compare the path-ordered product from the chamber of mu_word(S) back to C^+
    with the composite of mutation pullbacks, on every generator z^{f_i}.

    Only green words (every mutation direction in N^+) are accepted; their
    chambers are reached without a tropical change of coordinates.
    """
    if diag is None:
        diag, data = complete_diagram(seed, side, order, pair, classical)
    lat, eng, ring = data.lattice, data.engine, diag.ring
    seeds = mutate_word(seed, word)
    for k, j in enumerate(word):
        if not _is_green(data, seeds[k], j):
            raise ChamberError(f"step {k} (index {j}) is not a green mutation")
    pts = [_generic_near(diag, chamber_point(data, seeds[:k + 1])) for k in range(len(seeds))]
    for k, j in enumerate(word):
        crossed = path_crossings(diag, [pts[k], pts[k + 1]])
        want = _primitive_active(data.direction(seeds[k], j), eng)
        if not crossed or any(primitive(w.support.eqs[0][0]) != want for w, _ in crossed):
            raise ChamberError(f"segment {k} does not cross exactly the wall of index {j}")
    path = list(reversed(pts))
    rows = []
    ok = True
    for i in range(lat.rank):
        gen = lat.basis_vector(i)
        lhs = path_ordered_product(diag, path, gen, order)
        lhs = bar_series(lhs, lat) if data.bar else lhs
        rhs = TruncatedSeries.monomial(lat, ring, gen, order)
        for k in range(len(word) - 1, -1, -1):
            rhs = _pullback(seeds[k], word[k], side, rhs, data, ring)
        res = lhs - rhs
        good = res.is_zero()
        ok = ok and good
        rows.append({"generator": list(gen), "pass": good, "residual": res.to_json()})
    return {
        "side": side, "word": list(word), "order": order, "classical": ring.classical, "pass": ok,
        "points": [[frac_str(c) for c in p] for p in pts], "generators": rows,
    }


def _pullback(seed, j, side, series, data, ring):
    if ring.classical:
        return _classical_pullback_series(seed, j, side, series, data)
    return quantum_mutation_pullback(seed, j, side, series, data=data, ring=ring)


def _classical_pullback_series(seed, j, side, series, data):
    lat = data.lattice
    psi = _vec(data.direction(seed, j))
    c = seed.multipliers[j]
    out = TruncatedSeries(lat, series.ring, series.base, series.order)
    for n, cn in series.terms.items():
        # X: (1+y)^{-cW}; A, being an inverse conjugation: (1+y)^{+cW}
        e = c * lat.W(n, psi) * (-1 if side == "X" else 1)
        K = series.order - (sum(n) - sum(series.base))
        for m, cm in _classical_series(n, psi, int(e), K).items():
            if within(lat, m, series.base, series.order):
                add_into(out.terms, m, cn * cm)
    return out


# theta functions on the middle algebra via principal coefficients


def mid_theta(seed, p, Q, order=4, probe=2, rng=0):
    """Classical theta_p for p in M, through A^prin with section m -> (m, 0),
    specialised at z^{(0, n)} = 1.  Returns ({m: coeff}, meta)."""
    from .broken_lines import theta
    prin = principal_seed(seed)
    ps = prin.seed
    r = seed.rank
    data = scattering_data(ps, "A")
    ring = ClassicalRing()
    top = order + probe
    diag = scatter(data.engine, top, ring=ring, sign=data.engine_sign, rng=rng)
    pf = data.to_f(tuple(p) + (0,) * r)
    if any(x.denominator != 1 for x in pf):
        raise ValueError("section image is not in the f-lattice")
    pf = _vec(pf)
    Q = tuple(Fraction(x) for x in Q)
    results = []
    for k in (order, top):
        th = theta(diag, pf, Q, k)
        special = {}
        for n, c in th.terms.items():
            m = data.from_f(n)
            key = tuple(int(x) for x in m[:r])
            special[key] = special.get(key, Fraction(0)) + c
        results.append({m: c for m, c in special.items() if c != 0})
    stable = results[0] == results[1]
    meta = {"section": "m -> (m, 0)", "order": order, "probe_order": top,
            "status": "stable" if stable else "order-limited"}
    return results[0], meta


def laurent_product(a, b):
    out = {}
    for m1, c1 in a.items():
        for m2, c2 in b.items():
            m = tuple(x + y for x, y in zip(m1, m2))
            out[m] = out.get(m, 0) + c1 * c2
    return {m: c for m, c in out.items() if c != 0}


def laurent_json(f):
    return [{"exponent": list(m), "coeff": coeff_str(c)} for m, c in sorted(f.items())]
