"""Walls, scattering diagrams, path-ordered products and completion.

Geometry happens in the active space: coordinates x_a = <f_a, x> for the
unfrozen indices a.  Every wall normal lies in the span of the unfrozen f_a,
so frozen directions of M_R are a lineality space shared by all walls and
can be dropped.  When nothing is frozen the active space is M_R itself.

Wall functions are stored in log form: log g = sum_k b_k zhat^(k n') for the
primitive exponent n'.  Crossing with sign eps acts on plain monomials by

    c z^m  ->  c z^m * exp(eps * sum_k b_k [k W(m, n')]_q y^k),   y^j z^m := z^(m + j n').
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from math import comb, factorial

from .coeff_ring import ClassicalRing, QuantumRing, is_zero
from .lattice import GradedLattice, dot, frac_str, primitive, solve, vec_index
from .polyhedra import Polyhedron, _canon_eqs, angle_sort_key
from .torus import TruncatedSeries, add_into, coeff_str


class GenericityError(RuntimeError):
    pass


class JointError(ValueError):
    pass


def default_ring(lat, classical=False):
    return ClassicalRing() if classical else QuantumRing(lat.scale)


# walls


@dataclass
class Wall:
    support: Polyhedron
    exponent: tuple  # primitive n' in N^+
    logfn: dict  # level k -> coefficient of zhat^(k n')
    mask: int = 0

    def incoming(self, lat):
        rec = self.support.recession()
        return rec.contains(lat.active_pi1(self.exponent))

    def levels(self):
        return sorted(k for k, c in self.logfn.items() if not is_zero(c))

    def to_json(self, lat):
        return {
            "normal": list(self.exponent),
            "support": _support_json(self.support, lat),
            "exponent_dir": list(self.exponent),
            "incoming": self.incoming(lat),
            "logfn": {str(k): coeff_str(c) for k, c in sorted(self.logfn.items())},
        }


@dataclass
class NilpotentWall:
    """(d, 1 + a zhat^n u_I); parents index into the owning list."""

    support: Polyhedron
    exponent: tuple
    coeff: object
    mask: int
    parents: tuple = None
    label: object = None
    # rank-2 fast path: carrier point, direction and whether it is a full line
    point: tuple = None
    direction: tuple = None
    is_line: bool = False
    # three active directions: the parents' meeting set p + [lo, hi] * line_dir
    seg: tuple = None

    def to_json(self, lat, slots):
        return {
            "support": _support_json(self.support, lat),
            "exponent": list(self.exponent),
            "coeff": coeff_str(self.coeff),
            "index_set": mask_to_pairs(self.mask, lat, slots),
            "parents": list(self.parents) if self.parents else None,
        }


def _support_json(support, lat):
    """Pad active-coordinate covectors with zeros at frozen positions."""
    act = lat.unfrozen

    def pad(a):
        full = [Fraction(0)] * lat.rank
        for pos, i in enumerate(act):
            full[i] = a[pos]
        return [frac_str(x) for x in full]

    return {
        "equalities": [{"a": pad(a), "b": frac_str(b)} for a, b in support.eqs],
        "inequalities": [{"a": pad(a), "b": frac_str(b)} for a, b in support.ineqs],
    }


def mask_to_pairs(mask, lat, slots):
    out = []
    act = lat.unfrozen
    bit = 0
    while mask >> bit:
        if mask >> bit & 1:
            out.append([act[bit // slots], bit % slots + 1])
        bit += 1
    return out


@dataclass
class ScatteringDiagram:
    lattice: GradedLattice
    ring: object
    walls: list
    order: int
    kind: str = "standard"
    slots: int = 0
    meta: dict = field(default_factory=dict)

    @property
    def dim(self):
        return len(self.lattice.unfrozen)

    def to_json(self):
        lat = self.lattice
        if self.kind == "standard":
            walls = [w.to_json(lat) for w in canonical_order(self.walls)]
        else:
            walls = [w.to_json(lat, self.slots) for w in self.walls]
        return {"order": self.order, "kind": self.kind, "classical": self.ring.classical,
                "lattice": lat.to_json(), "walls": walls, "meta": self.meta}


def canonical_order(walls):
    return sorted(walls, key=lambda w: (w.exponent, w.support.key()))


def hyperplane_support(lat, n, value=Fraction(0)):
    """{x : <n, x> = value} in active coordinates."""
    a = tuple(Fraction(n[i]) for i in lat.unfrozen)
    return Polyhedron(len(a), [(a, value)])


def ray_support(lat, n, apex=None):
    """apex + R_{>=0} (-pi_1(n))."""
    u = len(lat.unfrozen)
    apex = apex or tuple(Fraction(0) for _ in range(u))
    d = tuple(-Fraction(x) for x in lat.active_pi1(n))
    a = tuple(Fraction(n[i]) for i in lat.unfrozen)
    return Polyhedron(u, [(a, dot(a, apex))], [(d, dot(d, apex))]).minimized()


def initial_diagram(lat, order, ring=None, sign=1):
    """One full-hyperplane wall per unfrozen index with levels sign * R_{w,d_i;q}."""
    ring = ring or default_ring(lat)
    walls = []
    for i in lat.unfrozen:
        di = lat.d(i)
        logfn = {w: ring.r(w, di) * sign for w in range(1, order + 1)}
        walls.append(Wall(hyperplane_support(lat, lat.basis_vector(i)), lat.basis_vector(i), logfn))
    return ScatteringDiagram(lat, ring, walls, order, meta={"initial_sign": sign})


# crossing actions


def exp_series(a, K, ring):
    """Coefficients e_0..e_K of exp(sum_{k>=1} a[k] y^k)."""
    e = [ring.one]
    for n in range(1, K + 1):
        acc = ring.zero
        for k in range(1, n + 1):
            ak = a.get(k)
            if ak is not None and not is_zero(ak) and not is_zero(e[n - k]):
                acc = acc + ak * e[n - k] * k
        e.append(acc / n if not is_zero(acc) else ring.zero)
    return e


def poly_mul_trunc(a, b, K, ring):
    out = [ring.zero] * (K + 1)
    for i, x in enumerate(a[:K + 1]):
        if is_zero(x):
            continue
        for j, y in enumerate(b[:K + 1 - i]):
            if not is_zero(y):
                out[i + j] = out[i + j] + x * y
    return out


def poly_inv_trunc(a, K, ring):
    inv = [ring.one / a[0]]
    for n in range(1, K + 1):
        acc = ring.zero
        for k in range(1, n + 1):
            if k < len(a) and not is_zero(a[k]):
                acc = acc + a[k] * inv[n - k]
        inv.append(-acc / a[0])
    return inv


def poly_pow_trunc(a, e, K, ring):
    if e < 0:
        a = poly_inv_trunc(a, K, ring)
        e = -e
    out = [ring.one] + [ring.zero] * K
    base = list(a[:K + 1]) + [ring.zero] * (K + 1 - len(a))
    while e:
        if e & 1:
            out = poly_mul_trunc(out, base, K, ring)
        base = poly_mul_trunc(base, base, K, ring)
        e >>= 1
    return out


class CrossingCache:
    """Per-wall memo of the series multiplying z^m when crossing."""

    def __init__(self, ring):
        self.ring = ring
        self.cache = {}

    def factor(self, wall, w, eps, K):
        key = (id(wall), w, eps, K)
        hit = self.cache.get(key)
        if hit is not None:
            return hit
        ring = self.ring
        if ring.classical:
            s = self._classical(wall, w * eps, K)
        else:
            a = {k: c * ring.qnum(k * w) * eps for k, c in wall.logfn.items() if k <= K}
            s = exp_series(a, K, ring)
        self.cache[key] = s
        return s

    def _classical(self, wall, e, K):
        # z^m (f)^(W(m, n')) with f = exp(sum k b_k y^k)
        ring = self.ring
        key = (id(wall), "f", K)
        f = self.cache.get(key)
        if f is None:
            f = exp_series({k: ring.coerce(c) * k for k, c in wall.logfn.items() if k <= K}, K, ring)
            self.cache[key] = f
        e = Fraction(e)
        if e.denominator == 1:
            return poly_pow_trunc(f, int(e), K, ring)
        return exp_series({k: ring.coerce(c) * k * e for k, c in wall.logfn.items() if k <= K}, K, ring)


def cross_action(wall, sign, series, lat, ring=None, cache=None):
    """Ad(g)^sign applied to a TruncatedSeries (or a mask-keyed dict)."""
    ring = ring or series.ring
    cache = cache or CrossingCache(ring)
    if isinstance(series, TruncatedSeries):
        terms = {(n, 0): c for n, c in series.terms.items()}
        out = _cross_terms(wall, sign, terms, lat, ring, cache, series.base, series.order)
        res = TruncatedSeries(lat, ring, series.base, series.order)
        for (n, mask), c in out.items():
            if mask:
                raise ValueError("nilpotent crossing produced u-terms on a plain series")
            res.terms[n] = c
        return res
    raise TypeError("cross_action expects a TruncatedSeries")


def _cross_terms(wall, eps, terms, lat, ring, cache, base, order):
    out = {}
    dbase = sum(base)
    if isinstance(wall, NilpotentWall):
        n, a, wm = wall.exponent, wall.coeff, wall.mask
        dn = sum(n)
        for (m, mask), c in terms.items():
            add_into(out, (m, mask), c)
            if mask & wm:
                continue
            w = lat.W(m, n)
            if w == 0 or sum(m) - dbase + dn > order:
                continue
            add_into(out, (tuple(x + y for x, y in zip(m, n)), mask | wm), c * a * ring.qnum(w) * eps)
        return out
    n = wall.exponent
    dn = sum(n)
    for (m, mask), c in terms.items():
        w = lat.W(m, n)
        room = order - (sum(m) - dbase)
        if w == 0 or room < dn:
            add_into(out, (m, mask), c)
            continue
        K = room // dn
        s = cache.factor(wall, w, eps, K)
        for j, sj in enumerate(s):
            if is_zero(sj):
                continue
            add_into(out, (tuple(x + j * y for x, y in zip(m, n)), mask), c * sj)
    return out


def apply_crossings(crossings, terms, lat, ring, base, order, cache=None):
    """Compose crossings in time order on a mask-keyed term dict."""
    cache = cache or CrossingCache(ring)
    for wall, eps in crossings:
        terms = _cross_terms(wall, eps, terms, lat, ring, cache, base, order)
    return terms


def crossing_sign(lat, wall, velocity):
    """sign <n_d, -gamma'> for a path moving with the given active velocity."""
    s = -lat.active_pairing(wall.exponent, velocity)
    if s == 0:
        raise JointError("path tangent to a wall")
    return 1 if s > 0 else -1


def path_crossings(diag, path):
    """Ordered (wall, sign) list along a polyline in active coordinates."""
    lat = diag.lattice
    out = []
    for x in (path[0], path[-1]):
        for w in diag.walls:
            if w.support.contains(x):
                raise JointError(f"path endpoint {x} lies on a wall support")
    for a, b in zip(path, path[1:]):
        d = tuple(Fraction(y) - Fraction(x) for x, y in zip(a, b))
        hits = []
        for w in diag.walls:
            t = w.support.line_hit(a, d)
            if t is None:
                continue
            if t == "inside":
                raise JointError("path runs inside a wall")
            if t >= 1:
                continue
            x = tuple(p + t * q for p, q in zip(a, d))
            if not w.support.contains_relint(x):
                raise JointError(f"path passes through the joint {x}")
            hits.append((t, w))
        hits.sort(key=lambda h: h[0])
        for i, (t, w) in enumerate(hits):
            for t2, w2 in hits[i + 1:]:
                if t2 != t:
                    break
                if primitive(w.support.eqs[0][0]) != primitive(w2.support.eqs[0][0]):
                    x = tuple(p + t * q for p, q in zip(a, d))
                    raise JointError(f"path passes through the joint {x}")
            out.append((w, crossing_sign(lat, w, d)))
    return out


def path_ordered_product(diag, path, m, order=None):
    """Transport the monomial (or series) m along the path."""
    lat, ring = diag.lattice, diag.ring
    order = diag.order if order is None else order
    if not isinstance(m, TruncatedSeries):
        m = TruncatedSeries.monomial(lat, ring, m, order)
    crossings = path_crossings(diag, path)
    terms = {(n, 0): c for n, c in m.terms.items()}
    terms = apply_crossings(crossings, terms, lat, ring, m.base, min(order, m.order))
    out = TruncatedSeries(lat, ring, m.base, min(order, m.order))
    for (n, mask), c in terms.items():
        out.terms[n] = c
    return out


# local loops around joints


def local_crossings(walls, x, u1, u2, lat):
    """Counterclockwise crossing groups of a small loop around x in the plane x + <u1, u2>."""
    rays = []
    for w in walls:
        m = w.support.minimized()
        (a, _), = m.eqs[:1]
        if len(m.eqs) != 1:
            raise GenericityError("wall support is not of codimension one")
        au1, au2 = dot(a, u1), dot(a, u2)
        if au1 == 0 and au2 == 0:
            raise GenericityError("transverse plane lies in a wall carrier")
        rho = (au2, -au1)
        tight = [(c, e) for c, e in m.ineqs if dot(c, x) == e]
        for sgn in (1, -1):
            st = (sgn * rho[0], sgn * rho[1])
            v = tuple(st[0] * p + st[1] * q for p, q in zip(u1, u2))
            vals = [dot(c, v) for c, _ in tight]
            if any(val == 0 for val in vals):
                raise GenericityError("transverse plane meets a wall face")
            if all(val > 0 for val in vals):
                rays.append((angle_sort_key(st), st, w))
    rays.sort(key=lambda r: r[0])
    groups = []
    for key, st, w in rays:
        tangent = tuple(-st[1] * p + st[0] * q for p, q in zip(u1, u2))
        eps = crossing_sign(lat, w, tangent)
        if groups and groups[-1][0] == key:
            groups[-1][1].append((w, eps))
        else:
            groups.append((key, [(w, eps)]))
    return [g for _, g in groups]


def loop_defect(walls, x, u1, u2, lat, ring, order, cache=None):
    """Residual (loop transport minus identity) on every generator z^(f_j)."""
    groups = local_crossings(walls, x, u1, u2, lat)
    seq = [c for g in groups for c in g]
    cache = cache or CrossingCache(ring)
    out = {}
    for j in range(lat.rank):
        f = lat.basis_vector(j)
        terms = apply_crossings(seq, {(f, 0): ring.one}, lat, ring, f, order, cache)
        add_into(terms, (f, 0), -ring.one)
        out[j] = terms
    return out


def _random_vector(rng, u, scale=97):
    return tuple(Fraction(rng.randint(-scale, scale), rng.randint(1, scale)) for _ in range(u))


def find_joints(diag):
    """Representative relative-interior points of codimension-two joint pieces."""
    u = diag.dim
    walls = diag.walls
    cands = {}
    if u < 2:
        return []
    for w in walls:
        for f in w.support.facets():
            if f.dim == u - 2:
                cands.setdefault(f.key(), f)
    for w1, w2 in combinations(walls, 2):
        a1 = w1.support.minimized().eqs[0][0]
        a2 = w2.support.minimized().eqs[0][0]
        if primitive(a1) == primitive(a2):
            continue
        inter = w1.support.intersect(w2.support)
        if inter.dim == u - 2:
            cands.setdefault(inter.key(), inter)
    return list(cands.values())


def check_consistency(diag, order=None, rng=0, attempts=5):
    """Loop test at every joint; returns a report dict."""
    lat, ring = diag.lattice, diag.ring
    order = diag.order if order is None else order
    u = diag.dim
    report = {"pass": True, "joints_checked": 0, "failures": []}
    if u < 2 or not diag.walls:
        return report
    r = random.Random(rng)
    cache = CrossingCache(ring)
    for J in find_joints(diag):
        for _ in range(attempts):
            weights = [Fraction(r.randint(1, 50), r.randint(1, 50)) for _ in range(8)]
            x = J.relint_point(weights)
            if u == 2:
                u1, u2 = (Fraction(1), Fraction(0)), (Fraction(0), Fraction(1))
            else:
                u1, u2 = _random_vector(r, u), _random_vector(r, u)
            at = [w for w in diag.walls if w.support.contains(x)]
            try:
                defect = loop_defect(at, x, u1, u2, lat, ring, order, cache)
            except GenericityError:
                continue
            break
        else:
            raise GenericityError("could not build a transverse loop at a joint")
        report["joints_checked"] += 1
        bad = {j: t for j, t in defect.items() if t}
        if bad:
            report["pass"] = False
            report["failures"].append({
                "joint": [frac_str(c) for c in x],
                "residual": {str(j): _residual_json(t, lat) for j, t in bad.items()},
            })
    return report


def _residual_json(terms, lat):
    return [{"exponent": list(n), "level": [n[i] for i in range(lat.rank)],
             "coeff": coeff_str(c)} for (n, _), c in sorted(terms.items())]


def residual_levels(report, lat):
    """Set of exponent-minus-generator levels occurring in a failed report."""
    out = set()
    for f in report["failures"]:
        for j, terms in f["residual"].items():
            fj = lat.basis_vector(int(j))
            for t in terms:
                out.add(tuple(a - b for a, b in zip(t["exponent"], fj)))
    return out


# order-by-order completion for two active directions


def complete_direct(diag):
    """Consistent completion when the active space is two-dimensional.

    The only joint is the origin.  At each degree d the loop defect is
    central, and the correction for exponent n is read from the
    z^(f_j + n) coefficient of the defect on z^(f_j), which equals
    eps * b * [W(f_j, n)]_q.
    """
    lat, ring = diag.lattice, diag.ring
    if diag.dim != 2:
        raise ValueError("order-by-order completion needs a two-dimensional active space")
    walls = [Wall(w.support, w.exponent, dict(w.logfn)) for w in diag.walls]
    origin = (Fraction(0), Fraction(0))
    u1, u2 = (Fraction(1), Fraction(0)), (Fraction(0), Fraction(1))
    for deg in range(2, diag.order + 1):
        cache = CrossingCache(ring)
        defect = loop_defect(walls, origin, u1, u2, lat, ring, deg, cache)
        needed = {}
        for j, terms in defect.items():
            fj = lat.basis_vector(j)
            for (m, _), c in terms.items():
                n = tuple(a - b for a, b in zip(m, fj))
                if sum(n) != deg:
                    raise ArithmeticError(f"defect below degree {deg} at {n}")
                w = lat.W(fj, n)
                if w == 0:
                    raise ArithmeticError(f"non-central defect at {n}")
                needed.setdefault(n, []).append((c, w))
        for n, vals in sorted(needed.items()):
            k = vec_index(n)
            prim = tuple(x // k for x in n)
            support = ray_support(lat, prim)
            probe = tuple(-x for x in lat.active_pi1(prim))
            tangent = (-probe[1], probe[0])
            eps = 1 if -lat.active_pairing(prim, tangent) > 0 else -1
            betas = {-c / (ring.qnum(w) * eps) for c, w in vals}
            if len(betas) != 1:
                raise ArithmeticError(f"inconsistent corrections for exponent {n}")
            beta = betas.pop()
            target = next((w for w in walls if w.exponent == prim and w.support.key() == support.key()), None)
            if target is None:
                walls.append(Wall(support, prim, {k: beta}))
            else:
                target.logfn[k] = target.logfn.get(k, ring.zero) + beta
    walls = [w for w in walls if any(not is_zero(c) for c in w.logfn.values())]
    return ScatteringDiagram(lat, ring, walls, diag.order, meta=dict(diag.meta, method="direct"))


# perturbation, completion, asymptotics, collapse


def _random_offset(rng):
    return Fraction(rng.randint(-10**6, 10**6), rng.randint(10**5, 10**6 + 7))


def perturb_factor(diag_in, order=None, rng=0, slots=None):
    """Factor each initial wall into nilpotent pieces on generic parallel hyperplanes."""
    lat, ring = diag_in.lattice, diag_in.ring
    k = diag_in.order if order is None else order
    slots = k if slots is None else slots
    r = rng if isinstance(rng, random.Random) else random.Random(rng)
    act = lat.unfrozen
    walls = []
    for w0 in diag_in.walls:
        i = next(a for a in act if w0.exponent == lat.basis_vector(a))
        pos = act.index(i)
        for w in range(1, min(k, slots) + 1):
            coeff = ring.coerce(w0.logfn.get(w, ring.zero)) * factorial(w)
            if is_zero(coeff):
                continue
            n = tuple(w * x for x in lat.basis_vector(i))
            for J in combinations(range(slots), w):
                c = _random_offset(r)
                mask = sum(1 << (pos * slots + j) for j in J)
                walls.append(_hyper_nil(lat, n, i, c, coeff, mask, label=(i, w, J)))
    meta = dict(diag_in.meta, slots=slots)
    return ScatteringDiagram(lat, ring, walls, k, kind="perturbed", slots=slots, meta=meta)


def _hyper_nil(lat, n, i, c, coeff, mask, label=None):
    u = len(lat.unfrozen)
    pos = lat.unfrozen.index(i)
    a = tuple(Fraction(int(j == pos)) for j in range(u))
    support = Polyhedron(u, [(a, c)])
    point = direction = None
    if u == 2:
        point = tuple(c if j == pos else Fraction(0) for j in range(2))
        direction = tuple(Fraction(x) for x in lat.active_pi1(lat.basis_vector(i)))
    return NilpotentWall(support, n, coeff, mask, None, label, point, direction, True)


def leaf_wall(lat, i, w, c, coeff, label_bit):
    """Leaf wall f_i^perp + offset with exponent w f_i, used for tropical counts."""
    n = tuple(w * x for x in lat.basis_vector(i))
    return _hyper_nil(lat, n, i, Fraction(c), coeff, 1 << label_bit, label=(i, w, label_bit))


def complete(perturbed, order=None, check_generic=True):
    """Add walls from interacting pairs until stable (idempotent)."""
    lat, ring = perturbed.lattice, perturbed.ring
    k = perturbed.order if order is None else order
    walls = list(perturbed.walls)
    u = perturbed.dim
    done_pairs = {w.parents for w in walls if w.parents}
    by_deg = {}
    for idx, w in enumerate(walls):
        by_deg.setdefault(bin(w.mask).count("1"), []).append(idx)
    meets = {}
    i = 0
    while i < len(walls):
        w1 = walls[i]
        d1 = bin(w1.mask).count("1")
        for d2 in range(1, k - d1 + 1):
            for j in by_deg.get(d2, ()):
                if j >= i:
                    break
                w2 = walls[j]
                if w1.mask & w2.mask:
                    continue
                wv = lat.W(w2.exponent, w1.exponent)
                meet = _meet(w1, w2, u)
                if meet is None:
                    continue
                point, interior = meet
                if check_generic and d1 + d2 < k and point is not None:
                    meets.setdefault(point, set()).update((i, j))
                if wv == 0 or not interior or (j, i) in done_pairs:
                    continue
                n = tuple(a + b for a, b in zip(w1.exponent, w2.exponent))
                coeff = w1.coeff * w2.coeff * ring.qnum(abs(wv))
                child = _child(lat, w1, w2, n, coeff, (j, i), u)
                done_pairs.add((j, i))
                walls.append(child)
                by_deg.setdefault(d1 + d2, []).append(len(walls) - 1)
        i += 1
    if check_generic:
        _check_triples(walls, meets, k, u)
    return ScatteringDiagram(lat, ring, walls, k, kind="perturbed", slots=perturbed.slots,
                             meta=dict(perturbed.meta))


def _meet(w1, w2, u):
    """Intersection of two walls: (hashable location, in both relative interiors)."""
    if u == 2 and w1.point is not None and w2.point is not None:
        (p1, d1), (p2, d2) = (w1.point, w1.direction), (w2.point, w2.direction)
        det = d1[1] * d2[0] - d1[0] * d2[1]
        if det == 0:
            return None
        rx, ry = p2[0] - p1[0], p2[1] - p1[1]
        s = (ry * d2[0] - rx * d2[1]) / det
        t = (ry * d1[0] - rx * d1[1]) / det
        if (not w1.is_line and s < 0) or (not w2.is_line and t < 0):
            return None
        x = (p1[0] + s * d1[0], p1[1] + s * d1[1])
        interior = (w1.is_line or s > 0) and (w2.is_line or t > 0)
        return x, interior
    if u == 3:
        return _meet3(w1, w2)
    inter = w1.support.intersect(w2.support)
    if inter.dim != u - 2:
        return None
    x = inter.relint_point()
    interior = w1.support.contains_relint(x) and w2.support.contains_relint(x)
    return (inter.key(), inter), interior


def _cross3(a, b):
    return (a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0])


def _meet3(w1, w2):
    """Clip the common line of two planar walls to an interval."""
    (a1, b1), (a2, b2) = w1.support.eqs[0], w2.support.eqs[0]
    line = _cross3(a1, a2)
    if not any(line):
        return None
    p = solve([a1, a2], [b1, b2])
    lo = hi = None
    boundary = False
    for w, a in ((w1, a1), (w2, a2)):
        for c, e in w.support.ineqs:
            if not any(_cross3(c, a)):
                continue
            cd = dot(c, line)
            gap = e - dot(c, p)
            if cd == 0:
                if gap > 0:
                    return None
                boundary = boundary or gap == 0
            elif cd > 0:
                lo = gap / cd if lo is None else max(lo, gap / cd)
            else:
                hi = gap / cd if hi is None else min(hi, gap / cd)
    if lo is not None and hi is not None and lo >= hi:
        return None
    key = _canon_eqs([(a1, b1), (a2, b2)])
    return (key, (p, line, lo, hi)), not boundary


def _child(lat, w1, w2, n, coeff, parents, u):
    d = tuple(-Fraction(x) for x in lat.active_pi1(n))
    a = tuple(Fraction(n[i]) for i in lat.unfrozen)
    mask = w1.mask | w2.mask
    if u == 2 and w1.point is not None:
        x, _ = _meet(w1, w2, u)
        support = Polyhedron(2, [(a, dot(a, x))], [(d, dot(d, x))])
        return NilpotentWall(support, n, coeff, mask, parents, None, x, d, False)
    if u == 3:
        (_, seg), _ = _meet3(w1, w2)
        return NilpotentWall(_sector3(a, d, seg), n, coeff, mask, parents, direction=d, seg=seg)
    (key, inter), _ = _meet(w1, w2, u)
    support = inter.add_ray(d).minimized()
    return NilpotentWall(support, n, coeff, mask, parents)


def _sector3(a, d, seg, cone=False):
    """(p + [lo, hi] line) + R_{>=0} d inside the plane a.x = a.p; cone=True drops offsets."""
    p, line, lo, hi = seg
    zero = (Fraction(0),) * 3
    if cone:
        p = zero
        lo = None if lo is None else Fraction(0)
        hi = None if hi is None else Fraction(0)
    ct = _cross3(a, line)
    if dot(ct, d) < 0:
        ct = tuple(-x for x in ct)
    cs = _cross3(a, d)
    if dot(cs, line) < 0:
        cs = tuple(-x for x in cs)
    ineqs = [(ct, dot(ct, p))]
    pts, rays, lines = [], [d], []
    if lo is not None:
        x = tuple(pi + lo * li for pi, li in zip(p, line))
        ineqs.append((cs, dot(cs, x)))
        pts.append(x)
    if hi is not None:
        x = tuple(pi + hi * li for pi, li in zip(p, line))
        ineqs.append((tuple(-c for c in cs), -dot(cs, x)))
        pts.append(x)
    if lo is None and hi is None:
        pts, lines = [p], [line]
    elif lo is None:
        rays.append(tuple(-x for x in line))
    elif hi is None:
        rays.append(line)
    if cone and lo is not None and hi is not None:
        pts = [zero]
        ineqs = ineqs[:1] + [(cs, 0), (tuple(-c for c in cs), 0)]
    return Polyhedron.canonical(3, [(a, dot(a, p))], ineqs, (pts[:1] if cone else pts, rays, lines))


def _check_triples(walls, meets, k, u):
    for where, idxs in meets.items():
        if len(idxs) < 3:
            continue
        for a, b, c in combinations(sorted(idxs), 3):
            ma, mb, mc = walls[a].mask, walls[b].mask, walls[c].mask
            if ma & mb or ma & mc or mb & mc:
                continue
            if bin(ma | mb | mc).count("1") > k:
                continue
            if u != 2:
                inter = walls[a].support.intersect(walls[b].support).intersect(walls[c].support)
                if inter.dim != u - 2:
                    continue
            raise GenericityError("three index-disjoint walls meet in codimension two")


def perturbed_scatter(diag_in, order=None, rng=0, attempts=8, slots=None):
    """Run perturb_factor + complete, resampling offsets on genericity failure."""
    r = random.Random(rng)
    last = None
    for attempt in range(attempts):
        try:
            pert = perturb_factor(diag_in, order, r, slots)
            out = complete(pert)
            out.meta["resamples"] = attempt
            return out
        except GenericityError as e:
            last = e
    raise GenericityError(f"offsets not generic after {attempts} attempts: {last}")


def asymptotic(diag):
    """Drop offsets; keep supports whose recession cone is still a wall."""
    lat, u = diag.lattice, diag.dim
    if diag.kind == "standard":
        merged = {}
        for w in diag.walls:
            cone = w.support.recession().minimized()
            if cone.dim != u - 1:
                continue
            key = (w.exponent, cone.key())
            if key in merged:
                tgt = merged[key]
                for lv, c in w.logfn.items():
                    tgt.logfn[lv] = tgt.logfn.get(lv, diag.ring.zero) + c
            else:
                merged[key] = Wall(cone, w.exponent, dict(w.logfn))
        return ScatteringDiagram(lat, diag.ring, list(merged.values()), diag.order, meta=dict(diag.meta))
    merged = {}
    for w in diag.walls:
        if u == 2 and w.point is not None:
            d = primitive(w.direction)
            key = (w.exponent, w.mask, d, w.is_line)
            cone = None
        elif u == 3 and (w.seg is not None or not w.support.ineqs):
            if w.seg is not None and w.seg[2] is not None and w.seg[3] is not None:
                continue
            a = w.support.eqs[0][0]
            if w.seg is None:
                cone = Polyhedron.canonical(3, [(a, 0)], [])
            else:
                cone = _sector3(a, w.direction, w.seg, cone=True)
            key = (w.exponent, w.mask, cone.key())
        else:
            cone = w.support.recession().minimized()
            if cone.dim != u - 1:
                continue
            key = (w.exponent, w.mask, cone.key())
        if key in merged:
            merged[key][1] = merged[key][1] + w.coeff
        else:
            merged[key] = [w, w.coeff, cone]
    walls = []
    for key, (w, coeff, cone) in merged.items():
        if is_zero(coeff):
            continue
        if cone is None:
            d = tuple(Fraction(x) for x in key[2])
            zero = (Fraction(0), Fraction(0))
            a = tuple(Fraction(w.exponent[i]) for i in lat.unfrozen)
            if w.is_line:
                cone = Polyhedron(2, [(a, 0)])
            else:
                cone = Polyhedron(2, [(a, 0)], [(d, 0)])
            walls.append(NilpotentWall(cone, w.exponent, coeff, w.mask, None, w.label, zero, w.direction, w.is_line))
        else:
            walls.append(NilpotentWall(cone, w.exponent, coeff, w.mask, None, w.label))
    return ScatteringDiagram(lat, diag.ring, walls, diag.order, kind="asymptotic",
                             slots=diag.slots, meta=dict(diag.meta))


def collapse(diag):
    """Replace u-monomials by t-monomials and set t = 1."""
    lat, ring = diag.lattice, diag.ring
    if diag.kind not in ("asymptotic", "perturbed"):
        raise ValueError("collapse expects a perturbed or asymptotic diagram")
    if diag.kind == "perturbed":
        diag = asymptotic(diag)
    K = diag.slots
    merged = {}
    for w in diag.walls:
        n = w.exponent
        denom = 1
        for i in lat.unfrozen:
            denom *= factorial(n[i]) * comb(K, n[i])
        c = w.coeff * Fraction(1, denom)
        k = vec_index(n)
        prim = tuple(x // k for x in n)
        key = (prim, w.support.key())
        if key not in merged:
            merged[key] = Wall(w.support.minimized(), prim, {})
        tgt = merged[key]
        tgt.logfn[k] = tgt.logfn.get(k, ring.zero) + c
    walls = [w for w in merged.values() if any(not is_zero(c) for c in w.logfn.values())]
    for w in walls:
        w.logfn = {lv: c for lv, c in w.logfn.items() if not is_zero(c)}
    return ScatteringDiagram(lat, ring, walls, diag.order, meta=dict(diag.meta, method="perturbation"))


def merge_by_direction(diag):
    """Combine walls with the same exponent whose supports coincide."""
    merged = {}
    for w in diag.walls:
        key = (w.exponent, w.support.key())
        if key in merged:
            for lv, c in w.logfn.items():
                merged[key].logfn[lv] = merged[key].logfn.get(lv, diag.ring.zero) + c
        else:
            merged[key] = Wall(w.support, w.exponent, dict(w.logfn))
    return ScatteringDiagram(diag.lattice, diag.ring, list(merged.values()), diag.order, meta=dict(diag.meta))


def scatter(lat, order, method="auto", rng=0, ring=None, sign=1, slots=None):
    """scat_k of the standard initial diagram."""
    ring = ring or default_ring(lat)
    init = initial_diagram(lat, order, ring, sign)
    if not lat.unfrozen:
        return init
    if method == "auto":
        method = "direct" if len(lat.unfrozen) == 2 else "perturbation"
    if method == "direct":
        return complete_direct(init)
    if method == "perturbation":
        pert = perturbed_scatter(init, order, rng, slots=slots)
        out = collapse(asymptotic(pert))
        out.meta["resamples"] = pert.meta.get("resamples", 0)
        return out
    raise ValueError(f"unknown method {method!r}")


def wall_function_at(diag, x):
    """Sum of log wall functions over walls containing x, keyed by exponent."""
    out = {}
    for w in diag.walls:
        if w.support.contains(x):
            for lv, c in w.logfn.items():
                n = tuple(lv * a for a in w.exponent)
                out[n] = out.get(n, diag.ring.zero) + c
    return {n: c for n, c in out.items() if not is_zero(c)}
