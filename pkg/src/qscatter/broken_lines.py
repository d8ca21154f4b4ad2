"""Broken lines, theta functions and structure constants.

Broken lines are enumerated backwards from their endpoint Q: starting from a
candidate final exponent, the segment is traced against its direction of
travel and at every wall we branch on how much of the exponent was picked up
there.  The remaining budget v - p has to stay in N^+ u {0} and be used up
exactly when the initial segment escapes to infinity.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction

from .coeff_ring import is_zero
from .lattice import frac_str, primitive
from .scattering import CrossingCache, GenericityError, NilpotentWall
from .torus import TruncatedSeries, add_into, coeff_str


@dataclass
class Bend:
    point: tuple
    wall: object
    j: int  # multiple of the primitive exponent picked up (1 for nilpotent walls)
    before: tuple
    after: tuple


@dataclass
class BrokenLine:
    initial: tuple
    final: tuple
    coeff: object
    bends: tuple  # in time order
    mask: int = 0

    @property
    def exponents(self):
        return (self.initial,) + tuple(b.after for b in self.bends)

    def to_json(self):
        return {
            "initial": list(self.initial),
            "final": list(self.final),
            "coeff": coeff_str(self.coeff),
            "bends": [{"point": [frac_str(x) for x in b.point], "exponent_after": list(b.after)}
                      for b in self.bends],
        }


def _compositions(lat, total):
    """All a in N^+ u {0} with d(a) = total."""
    act = lat.unfrozen
    out = []

    def rec(pos, left, cur):
        if pos == len(act) - 1:
            cur[act[pos]] = left
            out.append(tuple(cur))
            cur[act[pos]] = 0
            return
        for x in range(left + 1):
            cur[act[pos]] = x
            rec(pos + 1, left - x, cur)
        cur[act[pos]] = 0

    if not act:
        return [tuple([0] * lat.rank)] if total == 0 else []
    rec(0, total, [0] * lat.rank)
    return out


def final_candidates(lat, p, order):
    return [tuple(a + b for a, b in zip(p, c)) for d in range(order + 1) for c in _compositions(lat, d)]


class _Tracer:
    def __init__(self, diag, order):
        self.diag = diag
        self.lat = diag.lattice
        self.ring = diag.ring
        self.order = order
        self.cache = CrossingCache(self.ring)
        self.walls = list(diag.walls)
        self.carriers = [w.support.minimized() for w in self.walls]

    def next_hits(self, x, vel):
        best, group = None, []
        for w, sup in zip(self.walls, self.carriers):
            t = sup.line_hit(x, vel)
            if t is None:
                continue
            if t == "inside":
                raise GenericityError("broken line runs inside a wall")
            if best is None or t < best:
                best, group = t, [w]
            elif t == best:
                group.append(w)
        if best is None:
            return None, []
        y = tuple(a + best * b for a, b in zip(x, vel))
        normal = None
        for w, sup in zip(self.walls, self.carriers):
            if w in group:
                if not sup.contains_relint(y):
                    raise GenericityError(f"broken line passes through the joint {y}")
                nrm = primitive(sup.eqs[0][0])
                if normal is None:
                    normal = nrm
                elif nrm != normal:
                    raise GenericityError(f"broken line passes through the joint {y}")
        return y, group

    def options(self, wall, v, rem, mask):
        """(j, factor, new exponent, new remainder, new mask) for bending at wall."""
        lat = self.lat
        if isinstance(wall, NilpotentWall):
            n = wall.exponent
            if mask & wall.mask:
                return
            w = lat.W(v, n)
            if w == 0:
                return
            nrem = tuple(a - b for a, b in zip(rem, n))
            if lat.in_nplus(nrem, allow_zero=True):
                yield 1, wall.coeff * self.ring.qnum(abs(w)), tuple(a - b for a, b in zip(v, n)), nrem, mask | wall.mask
            return
        n = wall.exponent
        w = lat.W(v, n)
        if w == 0:
            return
        dn = sum(n)
        K = sum(rem) // dn
        if K == 0:
            return
        s = self.cache.factor(wall, abs(w), 1, K)
        for j in range(1, K + 1):
            nrem = tuple(a - j * b for a, b in zip(rem, n))
            if not lat.in_nplus(nrem, allow_zero=True):
                break
            if is_zero(s[j]):
                continue
            yield j, s[j], tuple(a - j * b for a, b in zip(v, n)), nrem, mask

    def trace(self, Q, p, vfinal, out):
        rem = tuple(a - b for a, b in zip(vfinal, p))
        self._dfs(Q, vfinal, rem, self.ring.one, 0, (), p, out)

    def _dfs(self, x, v, rem, coeff, mask, bends, p, out):
        vel = tuple(Fraction(c) for c in self.lat.active_pi1(v))
        if not any(vel):
            if not any(rem):
                out.append(_finish(p, v, coeff, bends, mask))
            return
        y, group = self.next_hits(x, vel)
        if y is None:
            if not any(rem):
                out.append(_finish(p, v, coeff, bends, mask))
            return
        self._group(group, 0, y, v, rem, coeff, mask, bends, p, out)

    def _group(self, group, idx, y, v, rem, coeff, mask, bends, p, out):
        if idx == len(group):
            self._dfs(y, v, rem, coeff, mask, bends, p, out)
            return
        wall = group[idx]
        self._group(group, idx + 1, y, v, rem, coeff, mask, bends, p, out)
        for j, f, nv, nrem, nmask in self.options(wall, v, rem, mask):
            b = Bend(y, wall, j, nv, v)
            self._group(group, idx + 1, y, nv, nrem, coeff * f, nmask, bends + (b,), p, out)


def _finish(p, v_initial, coeff, bends, mask):
    # bends were collected backwards from Q
    fwd = tuple(reversed(bends))
    final = fwd[-1].after if fwd else v_initial
    return BrokenLine(p, final, coeff, fwd, mask)


def _check_endpoint(diag, Q):
    for w in diag.walls:
        if w.support.contains(Q):
            raise GenericityError(f"endpoint {tuple(map(frac_str, Q))} lies on a wall")


def broken_lines(diag, p, Q, order=None, finals=None):
    """All broken lines with initial exponent p ending at Q, up to d-budget order."""
    order = diag.order if order is None else order
    Q = tuple(Fraction(x) for x in Q)
    _check_endpoint(diag, Q)
    tracer = _Tracer(diag, order)
    out = []
    for v in finals or final_candidates(diag.lattice, p, order):
        tracer.trace(Q, tuple(p), v, out)
    return [b for b in out if not is_zero(b.coeff)]


def theta(diag, p, Q, order=None):
    """theta_{p,Q} as a TruncatedSeries with base p."""
    lat, ring = diag.lattice, diag.ring
    order = diag.order if order is None else order
    p = tuple(p)
    if not any(lat.active_pi1(p)):
        return TruncatedSeries.monomial(lat, ring, p, order)
    out = TruncatedSeries(lat, ring, p, order)
    for b in broken_lines(diag, p, Q, order):
        add_into(out.terms, b.final, b.coeff)
    return out


def theta_product(diag, exps, Q, order=None):
    """Ordered product theta_{p_1} ... theta_{p_s} at Q."""
    order = diag.order if order is None else order
    acc = None
    for p in exps:
        t = theta(diag, p, Q, order)
        acc = t if acc is None else acc * t
    return acc


def product_coefficient(diag, p1, p2, n, Q, order=None):
    return theta_product(diag, [p1, p2], Q, order).coefficient(n)


def generic_point(diag, rng=0, scale=1000, attempts=50, near=None, eps=None):
    """A rational point off every wall support (optionally near a given point)."""
    r = rng if isinstance(rng, random.Random) else random.Random(rng)
    u = diag.dim
    for _ in range(attempts):
        delta = tuple(Fraction(r.randint(-scale, scale), r.randint(scale // 2, scale)) for _ in range(u))
        if near is None:
            Q = delta
        else:
            Q = tuple(Fraction(a) + eps * b for a, b in zip(near, delta))
        if not any(w.support.contains(Q) for w in diag.walls):
            return Q
    raise GenericityError("no generic point found")


def structure_constant(diag, p1, p2, p, order=None, rng=0, eps=Fraction(1, 1000)):
    """alpha(p1, p2; p) with Q close to pi_1(p); returns (value, certificate)."""
    lat = diag.lattice
    order = diag.order if order is None else order
    budget = sum(p) - sum(p1) - sum(p2)
    if budget < 0 or not lat.in_nplus(tuple(a - b - c for a, b, c in zip(p, p1, p2)), allow_zero=True):
        return diag.ring.zero, {"reason": "outside the cone"}
    if budget > order:
        raise ValueError("exponent beyond the truncation order")
    target = tuple(Fraction(x) for x in lat.active_pi1(p))
    r = random.Random(rng)
    vals = []
    points = []
    for trial in range(2):
        base = generic_point(diag, r, near=target, eps=eps)
        delta = tuple((a - b) / eps for a, b in zip(base, target))
        for scale in (eps, eps / 2, eps / 4):
            Q = tuple(a + scale * b for a, b in zip(target, delta))
            for attempt in range(10):
                try:
                    vals.append(product_coefficient(diag, p1, p2, p, Q, budget))
                    points.append(Q)
                    break
                except GenericityError:
                    Q = generic_point(diag, r, near=target, eps=scale)
            else:
                raise GenericityError("could not find a generic endpoint near pi_1(p)")
    if any(v != vals[0] for v in vals):
        raise GenericityError("structure constant depends on the chosen endpoint")
    cert = {"points": [[frac_str(c) for c in Q] for Q in points], "agree": True}
    return vals[0], cert


def expand_in_theta_basis(diag, f, Q, order=None):
    """Coefficients {p: alpha_p} with f = sum alpha_p theta_{p,Q} to f's order."""
    base, top = f.base, f.order if order is None else min(order, f.order)
    rest = dict(f.terms)
    out = {}
    dbase = sum(base)
    while rest:
        n = min(rest, key=lambda m: (sum(m), m))
        c = rest[n]
        dn = sum(n) - dbase
        if dn > top:
            break
        out[n] = c
        t = theta(diag, n, Q, top - dn)
        for m, cm in t.terms.items():
            add_into(rest, m, -c * cm)
        rest = {m: v for m, v in rest.items() if sum(m) - dbase <= top}
    return out


def trace(diag, f, Q):
    """Coefficient of theta_0 = 1 in the theta expansion of f."""
    zero = tuple(0 for _ in range(diag.lattice.rank))
    return expand_in_theta_basis(diag, f, Q).get(zero, diag.ring.zero)


def trace_data(diag, exps, Q, order):
    """Tr(theta_{e_1} ... theta_{e_s}) using expansions at Q."""
    return trace(diag, theta_product(diag, exps, Q, order), Q)


def alpha_from_traces(diag, p1, p2, window, Q, order):
    """Recover alpha(p1, p2; p') on a window of exponents from trace data.

    Tr(theta_{p1} theta_{p2} theta_{-p'}) = sum_p alpha(p1, p2; p) Tr(theta_p theta_{-p'})
    and the pairing is triangular, so the window is solved in order of d.
    """
    def neg(v):
        return tuple(-x for x in v)

    alphas = {}
    gram = {}
    for pp in sorted(window, key=lambda v: (sum(v), v)):
        t3 = trace_data(diag, [p1, p2, neg(pp)], Q, order)
        acc = t3
        for p, a in alphas.items():
            g = trace_data(diag, [p, neg(pp)], Q, order)
            gram[(p, pp)] = g
            acc = acc - a * g
        gpp = trace_data(diag, [pp, neg(pp)], Q, order)
        gram[(pp, pp)] = gpp
        alphas[pp] = acc / gpp
    return alphas, gram


def window(lat, base, depth):
    return [tuple(a + b for a, b in zip(base, c)) for d in range(depth + 1) for c in _compositions(lat, d)]
