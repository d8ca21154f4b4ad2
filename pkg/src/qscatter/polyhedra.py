"""Exact rational polyhedra in low dimension.

A polyhedron is kept in H-representation: equalities a.x = b and
inequalities a.x >= b.  The V-representation (points, rays, lines) is found
by brute-force enumeration of tight subsystems, which is exact and cheap at
the ambient dimensions used here (at most four).
"""

from __future__ import annotations

from fractions import Fraction
from functools import reduce
from itertools import combinations
from math import gcd

from .lattice import dot, nullspace, row_reduce, solve


def _lcm(a, b):
    return a * b // gcd(a, b)


def normalize_row(a, b=Fraction(0), sign_free=False):
    """Scale (a, b) to a primitive integer row; for equalities also fix the sign."""
    vals = list(a) + [b]
    den = reduce(_lcm, (Fraction(x).denominator for x in vals), 1)
    ints = [int(Fraction(x) * den) for x in vals]
    g = reduce(gcd, (abs(i) for i in ints[:-1]), 0)
    if g == 0:
        return None
    g = gcd(g, abs(ints[-1])) if ints[-1] else g
    ints = [i // g for i in ints]
    if sign_free:
        first = next(i for i in ints[:-1] if i)
        if first < 0:
            ints = [-i for i in ints]
    return tuple(Fraction(i) for i in ints[:-1]), Fraction(ints[-1])


def _vec_key(v):
    """Primitive integer direction of a nonzero rational vector."""
    den = reduce(_lcm, (x.denominator for x in v), 1)
    ints = [int(x * den) for x in v]
    g = reduce(gcd, (abs(i) for i in ints), 0)
    return tuple(i // g for i in ints)


class Polyhedron:
    __slots__ = ("n", "eqs", "ineqs", "_v", "_key", "_min")

    def __init__(self, n, eqs=(), ineqs=()):
        self.n = n
        self.eqs = tuple((tuple(map(Fraction, a)), Fraction(b)) for a, b in eqs)
        self.ineqs = tuple((tuple(map(Fraction, a)), Fraction(b)) for a, b in ineqs)
        self._v = None
        self._key = None
        self._min = False

    @classmethod
    def canonical(cls, n, eqs, ineqs, vrep=None):
        """Build from an irredundant H-rep, bringing rows to the canonical form used by key()."""
        p = cls(n)
        p.eqs = _canon_eqs(eqs)
        eq_h = [list(a) + [-b] for a, b in p.eqs]
        p.ineqs = tuple(sorted(_canon_ineq(a, b, eq_h) for a, b in ineqs))
        p._v = vrep
        p._min = True
        return p

    @classmethod
    def whole(cls, n):
        return cls(n)

    @classmethod
    def hyperplane(cls, normal, value):
        return cls(len(normal), [(normal, value)])

    @classmethod
    def from_generators(cls, points, rays=(), lines=()):
        p = cls(len(points[0]))
        p._v = ([tuple(map(Fraction, x)) for x in points],
                [tuple(map(Fraction, r)) for r in rays],
                [tuple(map(Fraction, l)) for l in lines])
        eqs, ineqs = _vrep_to_hrep(p.n, *p._v)
        p.eqs, p.ineqs = eqs, ineqs
        return p

    # representation conversion

    def vrep(self):
        """(points, rays, lines), or None when empty."""
        if self._v is None:
            self._v = _hrep_to_vrep(self.n, self.eqs, self.ineqs) or False
        return self._v or None

    def is_empty(self):
        return self.vrep() is None

    @property
    def dim(self):
        v = self.vrep()
        if v is None:
            return -1
        pts, rays, lines = v
        p0 = pts[0]
        dirs = [tuple(a - b for a, b in zip(p, p0)) for p in pts[1:]] + list(rays) + list(lines)
        return len(row_reduce(dirs)[0]) if dirs else 0

    def relint_point(self, weights=None):
        v = self.vrep()
        if v is None:
            raise ValueError("empty polyhedron")
        pts, rays, _ = v
        k = len(pts)
        x = [sum(p[i] for p in pts) / k for i in range(self.n)]
        for j, r in enumerate(rays):
            w = weights[j] if weights else 1
            x = [a + w * b for a, b in zip(x, r)]
        return tuple(x)

    def minimized(self):
        if self._min:
            return self
        v = self.vrep()
        if v is None:
            return self
        q = Polyhedron(self.n)
        q.eqs, q.ineqs = _vrep_to_hrep(self.n, *v)
        q._v = v
        q._min = True
        return q

    def key(self):
        """Canonical hashable description of the point set."""
        if self._key is None:
            m = self.minimized()
            if m.vrep() is None:
                self._key = ("empty",)
            else:
                self._key = (m.eqs, tuple(sorted(m.ineqs)))
        return self._key

    # queries

    def contains(self, x):
        return (all(dot(a, x) == b for a, b in self.eqs)
                and all(dot(a, x) >= b for a, b in self.ineqs))

    def contains_relint(self, x):
        """x in the relative interior (requires a minimized H-rep)."""
        m = self.minimized()
        return (all(dot(a, x) == b for a, b in m.eqs)
                and all(dot(a, x) > b for a, b in m.ineqs))

    def tight(self, x):
        m = self.minimized()
        return [(a, b) for a, b in m.ineqs if dot(a, x) == b]

    def intersect(self, other):
        return Polyhedron(self.n, self.eqs + other.eqs, self.ineqs + other.ineqs)

    def add_ray(self, r):
        v = self.vrep()
        if v is None:
            return self
        pts, rays, lines = v
        return Polyhedron.from_generators(pts, list(rays) + [tuple(map(Fraction, r))], lines)

    def recession(self):
        return Polyhedron(self.n, [(a, 0) for a, _ in self.eqs], [(a, 0) for a, _ in self.ineqs])

    def translate(self, t):
        return Polyhedron(self.n, [(a, b + dot(a, t)) for a, b in self.eqs],
                          [(a, b + dot(a, t)) for a, b in self.ineqs])

    def facets(self):
        """Faces of codimension one inside the polyhedron."""
        m = self.minimized()
        out = []
        for a, b in m.ineqs:
            f = Polyhedron(self.n, m.eqs + ((a, b),), m.ineqs)
            if f.dim == m.dim - 1:
                out.append(f)
        return out

    def is_cone(self):
        return all(b == 0 for _, b in self.eqs) and all(b == 0 for _, b in self.ineqs)

    def line_hit(self, x0, d):
        """Parameters t > 0 with x0 + t d in the polyhedron, for codim-one sets.

        Returns a single Fraction, None, or the string 'inside' when the
        whole line lies in the carrier hyperplane.
        """
        (a, b), = self.eqs[:1] or [(None, None)]
        if a is None:
            raise ValueError("line_hit needs a hyperplane carrier")
        ad = dot(a, d)
        ax = dot(a, x0)
        if ad == 0:
            return "inside" if ax == b else None
        t = (b - ax) / ad
        if t <= 0:
            return None
        x = tuple(p + t * q for p, q in zip(x0, d))
        for c, e in self.eqs[1:]:
            if dot(c, x) != e:
                return None
        for c, e in self.ineqs:
            if dot(c, x) < e:
                return None
        return t

    def to_json(self):
        from .lattice import frac_str
        return {
            "equalities": [{"a": [frac_str(x) for x in a], "b": frac_str(b)} for a, b in self.eqs],
            "inequalities": [{"a": [frac_str(x) for x in a], "b": frac_str(b)} for a, b in self.ineqs],
        }

    def __repr__(self):
        return f"Polyhedron(n={self.n}, eqs={len(self.eqs)}, ineqs={len(self.ineqs)})"


def _hrep_to_vrep(n, eqs, ineqs):
    if eqs:
        x0 = solve([a for a, _ in eqs], [b for _, b in eqs])
        if x0 is None:
            return None
        N = nullspace([a for a, _ in eqs])
    else:
        x0 = tuple(Fraction(0) for _ in range(n))
        N = nullspace([], n)
    k = len(N)
    A, B = [], []
    for a, b in ineqs:
        row = [dot(a, col) for col in N]
        rhs = b - dot(a, x0)
        if not any(row):
            if rhs > 0:
                return None
            continue
        A.append(row)
        B.append(rhs)

    def lift(y):
        return tuple(x0[i] + sum(y[j] * N[j][i] for j in range(k)) for i in range(n))

    def lift_dir(y):
        return tuple(sum(y[j] * N[j][i] for j in range(k)) for i in range(n))

    if k == 0:
        return [x0], [], []
    L = nullspace(A, k) if A else nullspace([], k)
    C = row_reduce(A)[0] if A else []
    lines = [lift_dir(l) for l in L]
    kk = len(C)
    if kk == 0:
        return [x0], [], lines
    M = [[dot(row, c) for c in C] for row in A]
    pts = {}
    for S in combinations(range(len(M)), kk):
        w = solve([M[i] for i in S], [B[i] for i in S])
        if w is None:
            continue
        if len(row_reduce([M[i] for i in S])[0]) < kk:
            continue
        if all(dot(M[i], w) >= B[i] for i in range(len(M))):
            y = [sum(w[j] * C[j][t] for j in range(kk)) for t in range(k)]
            pts[tuple(w)] = lift(y)
    if not pts:
        return None
    rays = {}
    if kk >= 1:
        for S in combinations(range(len(M)), kk - 1):
            sub = [M[i] for i in S]
            ns = nullspace(sub, kk) if sub else nullspace([], kk)
            if len(ns) != 1:
                continue
            for sgn in (1, -1):
                d = tuple(sgn * x for x in ns[0])
                if all(dot(M[i], d) >= 0 for i in range(len(M))):
                    y = [sum(d[j] * C[j][t] for j in range(kk)) for t in range(k)]
                    v = lift_dir(y)
                    rays[_vec_key(v)] = tuple(Fraction(x) for x in _vec_key(v))
    return list(pts.values()), list(rays.values()), lines


def _vrep_to_hrep(n, pts, rays, lines):
    p0 = pts[0]
    dirs = [tuple(a - b for a, b in zip(p, p0)) for p in pts[1:]] + list(rays) + list(lines)
    basis = row_reduce(dirs)[0] if dirs else []
    k = len(basis)
    eq_normals = nullspace(basis, n) if basis else nullspace([], n)
    eqs = _canon_eqs([(a, dot(a, p0)) for a in eq_normals])
    if k == 0:
        return eqs, ()
    # homogenized generators
    gens = [tuple(p) + (Fraction(1),) for p in pts] + [tuple(r) + (Fraction(0),) for r in rays]
    lin = [tuple(l) + (Fraction(0),) for l in lines]
    eq_h = [list(a) + [-b] for a, b in eqs]
    facets = {}
    need = k - len(lin)
    for S in combinations(range(len(gens)), need):
        vecs = [gens[i] for i in S] + lin
        if len(row_reduce(vecs)[0]) != k:
            continue
        cands = nullspace(vecs, n + 1)
        h = None
        for c in cands:
            if any(dot(c, g) != 0 for g in gens):
                h = c
                break
        if h is None:
            continue
        vals = [dot(h, g) for g in gens]
        if all(v >= 0 for v in vals):
            pass
        elif all(v <= 0 for v in vals):
            h = [-x for x in h]
        else:
            continue
        r = _canon_ineq(h[:-1], -h[-1], eq_h)
        if r is not None:
            facets[r] = True
    return eqs, tuple(sorted(facets))


def _canon_eqs(eqs):
    if not eqs:
        return ()
    red = row_reduce([list(a) + [b] for a, b in eqs])[0]
    return tuple(normalize_row(row[:-1], row[-1], sign_free=True) for row in red)


def _canon_ineq(a, b, eq_h):
    """Reduce a.x >= b modulo the equality rows and scale it to primitive integers."""
    h = list(a) + [-Fraction(b)]
    if eq_h:
        er, ep = row_reduce(eq_h)
        for row, pc in zip(er, ep):
            if h[pc]:
                f = h[pc]
                h = [x - f * y for x, y in zip(h, row)]
    a, b = tuple(h[:-1]), -h[-1]
    if not any(a):
        return None
    return normalize_row(a, b)


def angle_sort_key(v):
    """Key sorting nonzero 2-vectors counterclockwise from the positive x-axis."""
    x, y = v
    half = 0 if (y > 0 or (y == 0 and x > 0)) else 1
    return half, _Slope(x, y)


class _Slope:
    __slots__ = ("x", "y")

    def __init__(self, x, y):
        self.x, self.y = x, y

    def __lt__(self, other):
        # within a half plane, a precedes b iff cross(a, b) > 0
        return self.x * other.y - self.y * other.x > 0

    def __eq__(self, other):
        return self.x * other.y - self.y * other.x == 0 and self.x * other.x + self.y * other.y > 0
