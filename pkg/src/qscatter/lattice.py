"""Lattices with a skew form, the grading d, pi_1 and exact rational linear algebra."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from functools import reduce
from math import gcd


def _lcm(a, b):
    return a * b // gcd(a, b)


def as_fraction(v):
    if isinstance(v, Fraction):
        return v
    if isinstance(v, int):
        return Fraction(v)
    return Fraction(str(v).strip())


def frac_str(x):
    x = Fraction(x)
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


# linear algebra over Q


def rank(rows):
    return len(row_reduce(rows)[0])


def row_reduce(rows):
    """Reduced row echelon form; returns (nonzero rows, pivot columns)."""
    m = [list(map(Fraction, r)) for r in rows]
    if not m:
        return [], []
    ncol = len(m[0])
    pivots = []
    r = 0
    for c in range(ncol):
        p = next((i for i in range(r, len(m)) if m[i][c] != 0), None)
        if p is None:
            continue
        m[r], m[p] = m[p], m[r]
        inv = 1 / m[r][c]
        m[r] = [x * inv for x in m[r]]
        for i in range(len(m)):
            if i != r and m[i][c] != 0:
                f = m[i][c]
                m[i] = [a - f * b for a, b in zip(m[i], m[r])]
        pivots.append(c)
        r += 1
        if r == len(m):
            break
    return m[:r], pivots


def nullspace(rows, ncol=None):
    """Basis of {x : rows . x = 0}."""
    if not rows:
        n = ncol
        return [tuple(Fraction(int(i == j)) for j in range(n)) for i in range(n)]
    ncol = len(rows[0])
    red, piv = row_reduce(rows)
    free = [c for c in range(ncol) if c not in piv]
    basis = []
    for fc in free:
        v = [Fraction(0)] * ncol
        v[fc] = Fraction(1)
        for r, pc in zip(red, piv):
            v[pc] = -r[fc]
        basis.append(tuple(v))
    return basis


def solve(rows, rhs):
    """One solution of rows . x = rhs, or None."""
    ncol = len(rows[0]) if rows else 0
    aug = [list(r) + [b] for r, b in zip(rows, rhs)]
    red, piv = row_reduce(aug)
    if ncol in piv:
        return None
    x = [Fraction(0)] * ncol
    for r, pc in zip(red, piv):
        x[pc] = r[ncol]
    return tuple(x)


def det(m):
    m = [list(map(Fraction, r)) for r in m]
    n = len(m)
    d = Fraction(1)
    for c in range(n):
        p = next((i for i in range(c, n) if m[i][c] != 0), None)
        if p is None:
            return Fraction(0)
        if p != c:
            m[c], m[p] = m[p], m[c]
            d = -d
        d *= m[c][c]
        for i in range(c + 1, n):
            f = m[i][c] / m[c][c]
            if f:
                m[i] = [a - f * b for a, b in zip(m[i], m[c])]
    return d


def inverse(m):
    n = len(m)
    aug = [list(map(Fraction, r)) + [Fraction(int(i == j)) for j in range(n)] for i, r in enumerate(m)]
    red, piv = row_reduce(aug)
    if piv[:n] != list(range(n)):
        raise ValueError("singular matrix")
    return [r[n:] for r in red]


def matmul(a, b):
    return [[sum(x * y for x, y in zip(row, col)) for col in zip(*b)] for row in a]


def transpose(a):
    return [list(r) for r in zip(*a)]


def dot(a, b):
    return sum(x * y for x, y in zip(a, b))


def primitive(v):
    """Primitive integer vector on the ray through a nonzero rational vector."""
    v = [Fraction(x) for x in v]
    den = reduce(_lcm, (x.denominator for x in v), 1)
    ints = [int(x * den) for x in v]
    g = reduce(gcd, (abs(i) for i in ints), 0)
    if g == 0:
        raise ValueError("zero vector has no primitive direction")
    return tuple(i // g for i in ints)


def vec_index(v):
    g = reduce(gcd, (abs(int(x)) for x in v), 0)
    if g == 0:
        raise ValueError("index of the zero vector is undefined")
    return g


def hermite_rows(rows):
    """Integer row-style Hermite basis of the lattice spanned by integer rows."""
    m = [list(map(int, r)) for r in rows if any(r)]
    if not m:
        return []
    ncol = len(m[0])
    out = []
    r = 0
    for c in range(ncol):
        while True:
            nz = [i for i in range(r, len(m)) if m[i][c] != 0]
            if not nz:
                break
            p = min(nz, key=lambda i: abs(m[i][c]))
            m[r], m[p] = m[p], m[r]
            done = True
            for i in range(r + 1, len(m)):
                if m[i][c]:
                    q = m[i][c] // m[r][c]
                    m[i] = [a - q * b for a, b in zip(m[i], m[r])]
                    if m[i][c]:
                        done = False
            if done:
                break
        if r < len(m) and m[r][c] != 0:
            if m[r][c] < 0:
                m[r] = [-a for a in m[r]]
            out.append(tuple(m[r]))
            r += 1
            if r == len(m):
                break
    return out


@dataclass(frozen=True)
class ImageLattice:
    """Basis of pi_1(N) inside M_Q, with the coordinate map N -> Mbar."""

    basis: tuple  # rows, rational covectors
    lattice: "GradedLattice"

    @property
    def rank(self):
        return len(self.basis)

    def coords(self, covector):
        """Coordinates of a rational covector in pi_1(N)_Q w.r.t. the basis."""
        if not self.basis:
            if any(covector):
                raise ValueError("covector not in the image")
            return ()
        x = solve(transpose(self.basis), list(covector))
        if x is None:
            raise ValueError("covector not in the image")
        return x

    def forward(self, n):
        return self.coords(self.lattice.pi1(n))

    def index(self, n):
        """Index of pi_1(n) in Mbar."""
        c = self.forward(n)
        if any(x.denominator != 1 for x in c):
            raise ValueError("pi_1(n) not in the image lattice")
        return vec_index([int(x) for x in c])


@dataclass(frozen=True)
class GradedLattice:
    """N = Z^r with basis f_i, frozen set F, skew form W and multipliers d_i."""

    rank: int
    skew: tuple
    frozen: frozenset = frozenset()
    multipliers: dict = field(default_factory=dict)

    def __post_init__(self):
        r = self.rank
        skew = tuple(tuple(as_fraction(x) for x in row) for row in self.skew)
        if len(skew) != r or any(len(row) != r for row in skew):
            raise ValueError(f"skew form must be {r}x{r}")
        for i in range(r):
            for j in range(r):
                if skew[i][j] != -skew[j][i]:
                    raise ValueError("form is not skew-symmetric")
        object.__setattr__(self, "skew", skew)
        object.__setattr__(self, "frozen", frozenset(int(i) for i in self.frozen))
        mult = {int(i): as_fraction(v) for i, v in dict(self.multipliers).items()}
        for i, v in mult.items():
            if v <= 0:
                raise ValueError("multipliers must be positive")
        object.__setattr__(self, "multipliers", mult)
        ints = all(x.denominator == 1 for row in skew for x in row)
        object.__setattr__(self, "_int_skew", tuple(tuple(int(x) for x in row) for row in skew) if ints else None)
        for i, di in mult.items():
            row = [di * x for x in skew[i]]
            if any(x.denominator != 1 for x in row):
                raise ValueError(f"d_{i} pi_1(f_{i}) is not integral")

    # basic data

    @property
    def unfrozen(self):
        return tuple(i for i in range(self.rank) if i not in self.frozen)

    def d(self, i):
        if i not in self.multipliers:
            raise KeyError(f"no multiplier for index {i}")
        return self.multipliers[i]

    @property
    def scale(self):
        """Least integer D making q^W and all [w/d_i]_q exponents integral."""
        D = 1
        for row in self.skew:
            for x in row:
                D = _lcm(D, x.denominator)
        for v in self.multipliers.values():
            D = _lcm(D, v.numerator)
        return D

    def W(self, a, b):
        if self._int_skew is not None:
            s = self._int_skew
            return sum(a[i] * sum(s[i][j] * b[j] for j in range(self.rank) if b[j]) for i in range(self.rank) if a[i])
        return sum(a[i] * self.skew[i][j] * b[j] for i in range(self.rank) for j in range(self.rank))

    def pi1(self, n):
        """W(n, .) as a covector in dual coordinates."""
        return tuple(sum(n[i] * self.skew[i][j] for i in range(self.rank)) for j in range(self.rank))

    def d_deg(self, n):
        return sum(n)

    def basis_vector(self, i):
        return tuple(int(j == i) for j in range(self.rank))

    def in_nplus(self, n, allow_zero=False):
        if any(n[i] != 0 for i in self.frozen):
            return False
        if any(n[i] < 0 for i in range(self.rank)):
            return False
        return allow_zero or any(n)

    def image_lattice(self):
        D = self.scale
        rows = [[int(x * D) for x in self.skew[i]] for i in range(self.rank)]
        basis = tuple(tuple(Fraction(x, D) for x in row) for row in hermite_rows(rows))
        return ImageLattice(basis, self)

    def kernel(self):
        """Basis of ker pi_1 over Q."""
        return nullspace([list(col) for col in zip(*self.skew)], self.rank)

    def active_pi1(self, n):
        """pi_1(n) restricted to the unfrozen coordinates x_a = <f_a, .>."""
        return tuple(self.W(n, self.basis_vector(a)) for a in self.unfrozen)

    def active_pairing(self, n, x):
        """<n, x> for n in the span of unfrozen f_a and x in active coordinates."""
        return sum(n[a] * xa for a, xa in zip(self.unfrozen, x))

    # serialization

    def to_json(self):
        return {
            "rank": self.rank,
            "frozen": sorted(self.frozen),
            "skew_form": [[frac_str(x) for x in row] for row in self.skew],
            "multipliers": {str(i): frac_str(v) for i, v in sorted(self.multipliers.items())},
        }

    @classmethod
    def from_json(cls, data):
        if isinstance(data, str):
            data = json.loads(data)
        try:
            r = int(data["rank"])
            skew = [[as_fraction(x) for x in row] for row in data["skew_form"]]
        except (KeyError, TypeError, ValueError) as e:
            raise ValueError(f"bad lattice data: {e}") from e
        frozen = data.get("frozen", [])
        mult = {int(k): as_fraction(v) for k, v in data.get("multipliers", {}).items()}
        return cls(r, skew, frozen, mult)


@dataclass(frozen=True)
class MonoidSpec:
    """The cone sigma_P and the ideal P minus units, for a graded lattice."""

    lattice: GradedLattice

    def generators(self):
        lat = self.lattice
        gens = [lat.basis_vector(i) for i in lat.unfrozen]
        for i in sorted(lat.frozen):
            e = lat.basis_vector(i)
            gens.append(e)
            gens.append(tuple(-x for x in e))
        return gens

    def in_P(self, n):
        return all(n[i] >= 0 for i in self.lattice.unfrozen)

    def in_ideal(self, n):
        return self.in_P(n) and any(n[i] > 0 for i in self.lattice.unfrozen)


def pentagon(W=1, d=(1, 1)):
    """Rank-2 seed with W(f_1, f_2) = W."""
    return GradedLattice(2, ((0, W), (-W, 0)), frozenset(), {0: d[0], 1: d[1]})
