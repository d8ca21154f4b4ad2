"""Marked tropical disks and curves with Block-Gottsche multiplicities.

Trees are produced in two independent ways.  The main path builds a leaf
diagram (one nilpotent wall per constraint hyperplane d_ij), completes it,
and reconstructs a tree from every tuple of broken lines (or every
full-label wall met by a line) by tracing wall ancestry.  The oracle path
enumerates rooted binary trees over the leaf labels and solves for edge
lengths exactly; it only handles two active directions.
"""

from __future__ import annotations

import random
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product as iproduct
from math import factorial

from .broken_lines import broken_lines
from .coeff_ring import is_zero
from .lattice import det, dot, frac_str, solve
from .scattering import (GenericityError, ScatteringDiagram, complete,
                         default_ring, leaf_wall)
from .torus import coeff_str


# weight vectors


@dataclass(frozen=True)
class WeightVector:
    """parts[i] is the sorted tuple (w_i1 <= ... <= w_il_i) for unfrozen i."""

    parts: tuple  # ((i, (w_i1, ...)), ...) sorted by i

    @classmethod
    def of(cls, mapping):
        return cls(tuple(sorted((int(i), tuple(sorted(ws))) for i, ws in mapping.items() if ws)))

    def as_dict(self):
        return dict(self.parts)

    def leaves(self):
        """[(i, j, w_ij)] with j counting from 1 within each index."""
        return [(i, j + 1, w) for i, ws in self.parts for j, w in enumerate(ws)]

    def total(self, lat):
        n = [0] * lat.rank
        for i, ws in self.parts:
            n[i] += sum(ws)
        return tuple(n)

    def aut(self):
        out = 1
        for _, ws in self.parts:
            for c in Counter(ws).values():
                out *= factorial(c)
        return out

    def fact(self):
        out = 1
        for _, _, w in self.leaves():
            out *= factorial(w)
        return out

    def R(self, lat, ring, sign=1):
        out = ring.one
        for i, _, w in self.leaves():
            out = out * ring.r(w, lat.d(i)) * sign
        return out

    def __len__(self):
        return sum(len(ws) for _, ws in self.parts)

    def to_json(self):
        return {str(i): list(ws) for i, ws in self.parts}


def _partitions(n, largest=None):
    largest = n if largest is None else largest
    if n == 0:
        yield ()
        return
    for k in range(min(n, largest), 0, -1):
        for rest in _partitions(n - k, k):
            yield (k,) + rest


def weight_vectors(lat, target):
    """All weight vectors with sum_ij w_ij f_i = target (target in N^+ u {0})."""
    if not lat.in_nplus(tuple(target), allow_zero=True):
        return []
    act = lat.unfrozen
    choices = [list(_partitions(target[i])) for i in act]
    return [WeightVector.of({i: p for i, p in zip(act, combo)}) for combo in iproduct(*choices)]


# trees


@dataclass
class Edge:
    parent: int
    child: int  # None for unbounded edges
    lift: tuple
    marking: tuple = None  # ("E", i, j) or ("F", k)


@dataclass
class TropicalTree:
    vertices: list  # exact positions in active coordinates; vertex 0 is Q_out
    edges: list
    root_order: list = field(default_factory=list)  # edge index toward F_1, F_2, ...

    def children(self, v):
        return [e for e in self.edges if e.parent == v]

    def canonical(self):
        pos = self.vertices
        out = []
        for e in self.edges:
            out.append((pos[e.parent], None if e.child is None else pos[e.child], e.lift, e.marking))
        return tuple(sorted(out, key=repr))

    def weights(self, lat):
        img = lat.image_lattice()
        return [img.index(e.lift) for e in self.edges]

    def mult_q(self, lat, ring):
        m = ring.one
        for v in range(1, len(self.vertices)):
            kids = self.children(v)
            if len(kids) != 2:
                raise GenericityError("non-trivalent vertex")
            w = abs(lat.W(kids[0].lift, kids[1].lift))
            m = m * ring.qnum(w)
        lifts = [self.edges[i].lift for i in self.root_order]
        e = sum(lat.W(lifts[i], lifts[j]) for i in range(len(lifts)) for j in range(i + 1, len(lifts)))
        return m * ring.qpow(e)

    def balanced(self, lat):
        """Lift balancing at every non-root vertex (parent lift = sum of child lifts)."""
        for v in range(1, len(self.vertices)):
            up = [e for e in self.edges if e.child == v]
            kids = self.children(v)
            if len(up) != 1:
                return False
            tot = tuple(sum(c) for c in zip(*[k.lift for k in kids]))
            if tot != up[0].lift:
                return False
        return True

    def to_json(self, lat=None):
        img = lat.image_lattice() if lat is not None else None
        return {
            "vertices": [[frac_str(x) for x in p] for p in self.vertices],
            "edges": [{"from": e.parent, "to": e.child, "lift": list(e.lift),
                       "weight": img.index(e.lift) if img else None,
                       "marking": list(e.marking) if e.marking else None} for e in self.edges],
            "q_out_order": self.root_order,
        }


# leaf diagrams


def random_offsets(ww, rng=0, scale=Fraction(1, 1000)):
    """c_ij with d_ij = {x_i = c_ij}; small relative to unit-size endpoints."""
    r = rng if isinstance(rng, random.Random) else random.Random(rng)
    return {(i, j): scale * Fraction(r.randint(-10**6, 10**6), r.randint(10**5, 10**6 + 7))
            for i, j, _ in ww.leaves()}


def leaf_diagram(lat, ww, offsets, ring=None, sign=1):
    """Completed diagram from one wall per constraint hyperplane, one label bit per leaf."""
    ring = ring or default_ring(lat)
    walls = []
    for bit, (i, j, w) in enumerate(ww.leaves()):
        coeff = ring.r(w, lat.d(i)) * (factorial(w) * sign)
        wall = leaf_wall(lat, i, w, offsets[(i, j)], coeff, bit)
        wall.label = ("E", i, j)
        walls.append(wall)
    init = ScatteringDiagram(lat, ring, walls, len(walls), kind="perturbed", slots=1)
    return complete(init, order=len(walls))


def _full_mask(ww):
    return (1 << len(ww)) - 1


def _attach(diag, wall, vid, verts, edges):
    """Hang the ancestry disk of wall from vertex vid."""
    lat = diag.lattice
    if wall.parents is None:
        edges.append(Edge(vid, None, wall.exponent, wall.label))
        return
    x = verts[vid]
    vel = lat.active_pi1(wall.exponent)
    p1, p2 = (diag.walls[k] for k in wall.parents)
    a, b = p1.support.eqs[0]
    t = (b - dot(a, x)) / dot(a, vel)
    if t <= 0:
        raise GenericityError("ancestry trace does not reach the parents' meeting point")
    y = tuple(xi + t * vi for xi, vi in zip(x, vel))
    if not (p1.support.contains(y) and p2.support.contains(y)):
        raise GenericityError("ancestry trace missed the parents' meeting point")
    verts.append(y)
    yid = len(verts) - 1
    edges.append(Edge(vid, yid, wall.exponent))
    _attach(diag, p1, yid, verts, edges)
    _attach(diag, p2, yid, verts, edges)


def tree_from_lines(diag, lines, Q):
    verts = [tuple(Q)]
    edges = []
    order = []
    for k, line in enumerate(lines):
        cur = 0
        first = True
        for b in reversed(line.bends):
            verts.append(b.point)
            vid = len(verts) - 1
            edges.append(Edge(cur, vid, b.after))
            if first:
                order.append(len(edges) - 1)
                first = False
            _attach(diag, b.wall, vid, verts, edges)
            cur = vid
        edges.append(Edge(cur, None, line.initial, ("F", k + 1)))
        if first:
            order.append(len(edges) - 1)
    return TropicalTree(verts, edges, order)


def tree_from_wall(diag, wall, x):
    verts = [tuple(x)]
    edges = []
    _attach(diag, wall, 0, verts, edges)
    return TropicalTree(verts, edges, [0])


@dataclass
class TropResult:
    trees: list
    coeffs: list  # scattering-side coefficient per tree
    ntrop: object
    consistent: bool  # coefficient == Mult_q * R_w * prod w_ij! for every tree


def enumerate_trop(lat, pp, ww, offsets, Q=None, line=None, ring=None, sign=1):
    """Trees in T_{m,p,w}(m_ij, Q) via wall ancestry, with their multiplicities."""
    ring = ring or default_ring(lat)
    diag = leaf_diagram(lat, ww, offsets, ring, sign)
    full = _full_mask(ww)
    norm = ww.R(lat, ring, sign) * ww.fact()
    trees, coeffs = [], []
    if not pp:
        if line is None:
            raise ValueError("a line is needed when no p is given")
        P, u = (tuple(Fraction(c) for c in v) for v in line)
        for w in diag.walls:
            if w.mask != full:
                continue
            a, b = w.support.eqs[0]
            au = dot(a, u)
            if au == 0:
                raise ValueError("line is not transverse to the wall")
            x = tuple(p + (b - dot(a, P)) / au * c for p, c in zip(P, u))
            if not w.support.contains(x):
                continue
            if not w.support.contains_relint(x):
                raise GenericityError("line meets a wall boundary")
            trees.append(tree_from_wall(diag, w, x))
            coeffs.append(w.coeff)
    else:
        Q = tuple(Fraction(c) for c in Q)
        budget = sum(ww.total(lat))
        per = [broken_lines(diag, p, Q, budget) for p in pp]
        for combo in iproduct(*per):
            mask = 0
            ok = True
            for bl in combo:
                if mask & bl.mask:
                    ok = False
                    break
                mask |= bl.mask
            if not ok or mask != full:
                continue
            c = ring.one
            finals = [bl.final for bl in combo]
            for bl in combo:
                c = c * bl.coeff
            e = sum(lat.W(finals[i], finals[j]) for i in range(len(finals)) for j in range(i + 1, len(finals)))
            trees.append(tree_from_lines(diag, combo, Q))
            coeffs.append(c * ring.qpow(e))
    mults = [t.mult_q(lat, ring) for t in trees]
    consistent = all(m * norm == c for m, c in zip(mults, coeffs))
    total = ring.zero
    for m in mults:
        total = total + m
    return TropResult(trees, coeffs, total, consistent)


def ntrop(lat, pp, ww, offsets, Q=None, line=None, ring=None, sign=1):
    return enumerate_trop(lat, pp, ww, offsets, Q, line, ring, sign).ntrop


def _resampled(fn, rng, attempts=8):
    r = rng if isinstance(rng, random.Random) else random.Random(rng)
    last = None
    for _ in range(attempts):
        try:
            return fn(r)
        except GenericityError as e:
            last = e
    raise GenericityError(f"no generic offsets after {attempts} attempts: {last}")


def tropfrob_coefficient(lat, p_list, n, Q, order, ring=None, rng=0, sign=1,
                         scale=Fraction(1, 1000), details=False):
    """sum over w in W(n) of N^trop(w) R_w / |Aut w|."""
    ring = ring or default_ring(lat)
    for p in p_list:
        if not any(lat.active_pi1(p)):
            raise ValueError(f"p = {p} lies in ker pi_1")
    target = tuple(a - sum(ps) for a, ps in zip(n, zip(*p_list)))
    if not lat.in_nplus(target, allow_zero=True):
        return (ring.zero, []) if details else ring.zero
    if sum(target) > order:
        raise ValueError("d-budget exceeds the truncation order")
    r = random.Random(rng)
    total = ring.zero
    rows = []
    for ww in weight_vectors(lat, target):
        res = _resampled(lambda rr: enumerate_trop(lat, p_list, ww, random_offsets(ww, rr, scale), Q,
                                                   ring=ring, sign=sign), r)
        contrib = res.ntrop * ww.R(lat, ring, sign) / ww.aut()
        total = total + contrib
        rows.append({"w": ww, "ntrop": res.ntrop, "trees": len(res.trees), "consistent": res.consistent,
                     "result": res})
    return (total, rows) if details else total


def scat_function_from_trop(lat, n, line, order, ring=None, rng=0, sign=1, scale=Fraction(1, 1000)):
    """Predicted levels {k: coefficient of zhat^(k n)} of log g_Q, Q = line meets n-perp."""
    ring = ring or default_ring(lat)
    n = tuple(n)
    P, u = (tuple(Fraction(c) for c in v) for v in line)
    a = tuple(Fraction(n[i]) for i in lat.unfrozen)
    if dot(a, u) == 0:
        raise ValueError("line is not transverse to n-perp")
    r = random.Random(rng)
    out = {}
    k = 1
    while k * sum(n) <= order:
        acc = ring.zero
        for ww in weight_vectors(lat, tuple(k * x for x in n)):
            res = _resampled(lambda rr: enumerate_trop(lat, [], ww, random_offsets(ww, rr, scale),
                                                       line=(P, u), ring=ring, sign=sign), r)
            acc = acc + res.ntrop * ww.R(lat, ring, sign) / ww.aut()
        if not is_zero(acc):
            out[k] = acc
        k += 1
    return out


def ntrop_invariance(lat, pp, ww, Q=None, line=None, samples=3, ring=None, rng=0, sign=1,
                     scale=Fraction(1, 1000)):
    """N^trop for several independent offset samples; returns (agree, values)."""
    r = random.Random(rng)
    vals = []
    for _ in range(samples):
        res = _resampled(lambda rr: enumerate_trop(lat, pp, ww, random_offsets(ww, rr, scale), Q, line,
                                                   ring=ring, sign=sign), r)
        vals.append(res.ntrop)
    return all(v == vals[0] for v in vals), vals


def scat_disks_check(diag, rng=0, attempts=8):
    """Compare every wall function of diag with the tropical disk count on a
    transverse line through a relative-interior point of the wall."""
    lat, ring, order = diag.lattice, diag.ring, diag.order
    sign = diag.meta.get("initial_sign", 1)
    r = random.Random(rng)
    rows = []
    ok = True
    seen = set()
    for wall in diag.walls:
        key = (wall.exponent, wall.support.key())
        if key in seen:
            continue
        seen.add(key)
        x = wall.support.relint_point()
        actual = {}
        for w in diag.walls:
            if w.exponent == wall.exponent and w.support.contains(x):
                for k, c in w.logfn.items():
                    actual[k] = actual.get(k, ring.zero) + c
        a = tuple(Fraction(wall.exponent[i]) for i in lat.unfrozen)
        for _ in range(attempts):
            u = tuple(Fraction(r.randint(-97, 97), r.randint(1, 97)) for _ in a)
            if dot(a, u) == 0:
                continue
            P = tuple(p - c for p, c in zip(x, u))
            try:
                pred = scat_function_from_trop(lat, wall.exponent, (P, u), order, ring, r.randrange(2**32), sign)
                break
            except GenericityError:
                continue
        else:
            raise GenericityError("no transverse line found for a wall")
        dn = sum(wall.exponent)
        levels = sorted(k for k in set(pred) | set(actual) if k * dn <= order)
        good = all(pred.get(k, ring.zero) == actual.get(k, ring.zero) for k in levels)
        ok = ok and good
        rows.append({"exponent": list(wall.exponent), "point": [frac_str(c) for c in x],
                     "line": [[frac_str(c) for c in P], [frac_str(c) for c in u]],
                     "tropical": {str(k): coeff_str(pred.get(k, ring.zero)) for k in levels},
                     "diagram": {str(k): coeff_str(actual.get(k, ring.zero)) for k in levels},
                     "pass": good})
    return ok, rows


# brute-force oracle (two active directions)


def _binary_trees(labels):
    """Unordered full binary trees on a tuple of leaf labels."""
    if len(labels) == 1:
        yield labels[0]
        return
    first, rest = labels[0], labels[1:]
    m = len(rest)
    for bits in range(1 << m):
        left = (first,) + tuple(rest[i] for i in range(m) if bits >> i & 1)
        right = tuple(rest[i] for i in range(m) if not bits >> i & 1)
        if not right:
            continue
        for lt in _binary_trees(left):
            for rt in _binary_trees(right):
                yield (lt, rt)


def brute_force_trees(lat, pp, ww, offsets, Q=None, line=None, ring=None):
    """All rigid trees with the given leaf data, found by exact position solving."""
    ring = ring or default_ring(lat)
    if len(lat.unfrozen) != 2:
        raise ValueError("the brute-force enumerator handles two active directions only")
    act = lat.unfrozen
    leaf_info = {}
    for i, j, w in ww.leaves():
        leaf_info[("E", i, j)] = (tuple(w * x for x in lat.basis_vector(i)), act.index(i), offsets[(i, j)])
    for k, p in enumerate(pp):
        leaf_info[("F", k + 1)] = (tuple(p), None, None)
    elabels = [("E", i, j) for i, j, _ in ww.leaves()]
    s = len(pp)
    found = []
    if s == 0:
        groups_list = [[tuple(elabels)]]
    else:
        groups_list = []
        for assign in iproduct(range(s), repeat=len(elabels)):
            groups = [[("F", k + 1)] for k in range(s)]
            for lab, g in zip(elabels, assign):
                groups[g].append(lab)
            groups_list.append([tuple(g) for g in groups])
    for groups in groups_list:
        for shapes in iproduct(*[list(_binary_trees(g)) for g in groups]):
            t = _solve_shape(lat, ring, shapes, leaf_info, Q, line)
            if t is not None:
                found.append(t)
    return found


def _lift_of(shape, leaf_info):
    if isinstance(shape[0], str):
        return leaf_info[shape][0]
    a, b = (_lift_of(x, leaf_info) for x in shape)
    return tuple(x + y for x, y in zip(a, b))


def _solve_shape(lat, ring, shapes, leaf_info, Q, line):
    # unknowns: one length per bounded edge, plus the root parameter on the line
    bounded = []  # (parent node id, child shape, lift)
    nodes = []  # (shape, parent index or -1, edge index or None)
    rows_pos = {}  # node index -> affine expression: (const vector, coeff matrix over unknowns)

    def walk(shape, parent):
        idx = len(nodes)
        if isinstance(shape[0], str):
            nodes.append((shape, parent, None))
            return idx
        bounded.append(idx)
        nodes.append((shape, parent, len(bounded) - 1))
        for sub in shape:
            walk(sub, idx)
        return idx

    for sh in shapes:
        walk(sh, -1)
    nb = len(bounded)
    nvar = nb + (1 if not Q else 0)
    dim = 2

    def root_expr():
        if Q:
            return [Fraction(c) for c in Q], [[Fraction(0)] * nvar for _ in range(dim)]
        P, u = (tuple(Fraction(c) for c in v) for v in line)
        coef = [[Fraction(0)] * nvar for _ in range(dim)]
        for r in range(dim):
            coef[r][nb] = u[r]
        return list(P), coef

    def pos(idx):
        if idx == -1:
            return root_expr()
        if idx in rows_pos:
            return rows_pos[idx]
        shape, parent, e = nodes[idx]
        const, coef = pos(parent)
        coef = [row[:] for row in coef]
        vel = lat.active_pi1(_lift_of(shape, leaf_info))
        for r in range(dim):
            coef[r][e] += vel[r]
        rows_pos[idx] = (const, coef)
        return rows_pos[idx]

    A, rhs = [], []
    for idx, (shape, parent, e) in enumerate(nodes):
        if e is not None:
            continue
        lift, coord, c = leaf_info[shape]
        if coord is None:
            continue
        const, coef = pos(parent)
        A.append(coef[coord])
        rhs.append(c - const[coord])
    if len(A) != nvar:
        return None
    if nvar:
        if det(A) == 0:
            return None
        sol = solve(A, rhs)
    else:
        sol = ()
    if any(sol[e] <= 0 for e in range(nb)):
        return None

    def place(idx):
        const, coef = pos(idx)
        return tuple(const[r] + sum(coef[r][v] * sol[v] for v in range(nvar)) for r in range(dim))

    root = place(-1)
    verts = [root]
    vid = {-1: 0}
    edges = []
    order = []
    for idx, (shape, parent, e) in enumerate(nodes):
        lift = _lift_of(shape, leaf_info)
        if e is None:
            edges.append(Edge(vid[parent], None, lift, shape))
        else:
            l1, l2 = (_lift_of(x, leaf_info) for x in shape)
            if lat.W(l1, l2) == 0:
                return None
            verts.append(place(idx))
            vid[idx] = len(verts) - 1
            edges.append(Edge(vid[parent], vid[idx], lift))
        if parent == -1:
            order.append((_f_in(shape), len(edges) - 1))
    return TropicalTree(verts, edges, [i for _, i in sorted(order)])


def _f_in(shape):
    if isinstance(shape[0], str):
        return shape[1] if shape[0] == "F" else 10**9
    return min(_f_in(x) for x in shape)


def tree_multiset(trees):
    return Counter(t.canonical() for t in trees)
