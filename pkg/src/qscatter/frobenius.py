"""Frobenius checks on computed theta functions.

Classical: theta_u^p and theta_{pu} agree coefficientwise modulo p.
Quantum: at a primitive k-th root of unity (k odd) theta_{ku} becomes the
classical theta_u with every exponent multiplied by k.
"""

from __future__ import annotations

import random
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from math import gcd

from .broken_lines import generic_point, theta
from .coeff_ring import ClassicalRing, CyclotomicElement, PoleError, QRational, QuantumRing, eval_at_root, is_zero
from .lattice import frac_str
from .scattering import scatter
from .torus import coeff_str
from .tropical import _resampled, enumerate_trop, random_offsets, weight_vectors


@dataclass
class FrobeniusReport:
    kind: str
    u: tuple
    modulus: int  # the prime p or the root order k
    order: int
    Q: tuple
    rows: list = field(default_factory=list)
    verdict: bool = True
    notes: dict = field(default_factory=dict)

    def to_json(self):
        return {
            "kind": self.kind, "u": list(self.u), "modulus": self.modulus, "order": self.order,
            "Q": [frac_str(x) for x in self.Q], "pass": self.verdict, "rows": self.rows,
            "notes": self.notes,
        }


def _mod(c, p):
    c = Fraction(c)
    if c.denominator % p == 0:
        raise ValueError(f"coefficient {c} has a denominator divisible by {p}")
    return c.numerator * pow(c.denominator, -1, p) % p


def _classical_diagram(diag):
    if diag.ring.classical:
        return diag
    return scatter(diag.lattice, diag.order, ring=ClassicalRing(), sign=diag.meta.get("initial_sign", 1))


def classical_frobenius_check(diag, u, p, order=None, Q=None, rng=0):
    """theta_u^p == theta_{pu} (mod p) on every exponent within the order."""
    order = diag.order if order is None else order
    cdiag = _classical_diagram(diag)
    u = tuple(u)
    Q = tuple(Q) if Q is not None else generic_point(cdiag, rng)
    th = theta(cdiag, u, Q, order)
    power = th
    for _ in range(p - 1):
        power = power * th
    pu = tuple(p * x for x in u)
    rhs = theta(cdiag, pu, Q, order)
    rep = FrobeniusReport("classical", u, p, order, Q)
    for n in sorted(set(power.terms) | set(rhs.terms), key=lambda v: (sum(v), v)):
        a, b = power.coefficient(n), rhs.coefficient(n)
        ok = _mod(a, p) == _mod(b, p)
        rep.verdict = rep.verdict and ok
        rep.rows.append({"exponent": list(n), "power": coeff_str(a), "theta_pu": coeff_str(b), "pass": ok})
    return rep


def root_specialization(lat, k):
    """The power a with q^(1/D) -> zeta_k^a, so that q and every q^(1/d_i) are primitive."""
    if k % 2 == 0:
        raise ValueError("the root order must be odd")
    D = lat.scale
    if gcd(D, k) != 1:
        raise ValueError(f"no primitive specialization: gcd(D={D}, k={k}) != 1")
    a = pow(D, -1, k) if k > 1 else 0
    for i in lat.unfrozen:
        di = lat.d(i)
        e = Fraction(D, 1) / di * a  # q^(1/d_i) = (q^(1/D))^(D/d_i)
        if e.denominator != 1 or gcd(int(e), k) != 1:
            raise ValueError(f"q^(1/d_{i}) is not a primitive {k}-th root under this specialization")
    return a


def at_root(x, k, a):
    """x(q^(1/D) = zeta_k^a) in Q(zeta_k)."""
    if isinstance(x, QRational):
        x = x.rescale(x.D * a) if a > 1 else x
    return eval_at_root(x, k)


def quantum_frobenius_check(diag, u, k, order=None, Q=None, rng=0, cdiag=None):
    """theta_{ku}|_{q = zeta_k} against theta_u at q = 1 with exponents scaled by k."""
    if k % 2 == 0 or k < 1:
        raise ValueError("the root order must be a positive odd integer")
    order = diag.order if order is None else order
    lat = diag.lattice
    a = root_specialization(lat, k)
    cdiag = cdiag or _classical_diagram(diag)
    u = tuple(u)
    Q = tuple(Q) if Q is not None else generic_point(diag, rng)
    ku = tuple(k * x for x in u)
    quantum = theta(diag, ku, Q, order)
    classical = theta(cdiag, u, Q, order // k)
    rep = FrobeniusReport("quantum", u, k, order, Q, notes={"specialization": f"q^(1/{lat.scale}) -> zeta_{k}^{a}"})
    expected = {tuple(k * x for x in n): c for n, c in classical.terms.items()}
    for n in sorted(set(quantum.terms) | set(expected), key=lambda v: (sum(v), v)):
        row = {"exponent": list(n)}
        c = quantum.coefficient(n)
        try:
            val = at_root(c, k, a)
        except PoleError as e:
            rep.verdict = False
            row.update({"quantum": coeff_str(c), "pass": False, "error": str(e)})
            rep.rows.append(row)
            continue
        want = CyclotomicElement.rational(k, expected.get(n, 0))
        ok = val == want
        rep.verdict = rep.verdict and ok
        row.update({"quantum": coeff_str(c), "at_root": [str(x) for x in val.coords],
                    "classical": str(expected.get(n, 0)), "pass": ok})
        rep.rows.append(row)
    return rep


# tropical side


def _tree_value(tree, lat, ring, ww, sign):
    return tree.mult_q(lat, ring) * ww.R(lat, ring, sign) / ww.aut()


def tree_divisibility_check(lat, u, k, n, Q, ring=None, rng=0, sign=1, scale=Fraction(1, 1000)):
    """Every tree for theta_{ku} at z^n whose value at zeta_k is nonzero (or a pole)
    has all edge weights divisible by k.

    Returns (ok, surviving counts by weight vector, info) where info records the
    offending trees and how many trees vanished at the root."""
    ring = ring or QuantumRing(lat.scale)
    a = root_specialization(lat, k)
    ku = tuple(k * x for x in u)
    target = tuple(x - y for x, y in zip(n, ku))
    if not lat.in_nplus(target, allow_zero=True) or not any(target):
        return True, Counter(), {"bad": [], "vanishing": 0}
    r = random.Random(rng)
    img = lat.image_lattice()
    ok = True
    surviving = Counter()
    bad = []
    vanishing = 0
    for ww in weight_vectors(lat, target):
        res = _resampled(lambda rr: enumerate_trop(lat, [ku], ww, random_offsets(ww, rr, scale), Q,
                                                   ring=ring, sign=sign), r)
        for t in res.trees:
            v = _tree_value(t, lat, ring, ww, sign)
            try:
                alive = not at_root(v, k, a).is_zero()
            except PoleError:
                alive = True
            if not alive:
                vanishing += 1
                continue
            surviving[ww] += 1
            weights = [img.index(e.lift) for e in t.edges]
            if any(w % k for w in weights):
                ok = False
                bad.append({"w": ww.to_json(), "weights": weights})
    return ok, surviving, {"bad": bad, "vanishing": vanishing}


def scaling_bijection_check(lat, u, k, n, Q, rng=0, sign=1, scale=Fraction(1, 1000)):
    """Surviving trees for (ku, kn) correspond to classical trees for (u, n) under w -> k w."""
    ring = QuantumRing(lat.scale)
    kn = tuple(k * x for x in n)
    ok, surviving, info = tree_divisibility_check(lat, u, k, kn, Q, ring, rng, sign, scale)
    cring = ClassicalRing()
    target = tuple(x - y for x, y in zip(n, u))
    classical = Counter()
    if lat.in_nplus(target, allow_zero=True) and any(target):
        r = random.Random(rng + 1)
        for ww in weight_vectors(lat, target):
            res = _resampled(lambda rr: enumerate_trop(lat, [tuple(u)], ww, random_offsets(ww, rr, scale), Q,
                                                       ring=cring, sign=sign), r)
            live = sum(1 for t in res.trees if not is_zero(_tree_value(t, lat, cring, ww, sign)))
            if live:
                classical[_scaled(ww, k)] += live
    return ok and surviving == classical, {"surviving": _count_json(surviving), "classical": _count_json(classical),
                                           "vanishing": info["vanishing"], "bad": info["bad"]}


def _scaled(ww, k):
    return type(ww).of({i: tuple(k * w for w in ws) for i, ws in ww.parts})


def _count_json(c):
    return [{"w": ww.to_json(), "trees": m} for ww, m in sorted(c.items(), key=lambda kv: repr(kv[0]))]


def limit_identity(a, w, d, k):
    """[k^2 a]_q R_{kw,d;q} at a primitive k-th root vs [a]_1 R_{w,d;1}, using the
    paired bracket (q^x - q^-x) in numerator and denominator.

    With that normalization [k^2 a] R_{kw,d} = (-1)^{kw-1} (q^{k^2 a} - q^{-k^2 a})
    / (kw (q^{kw/d} - q^{-kw/d})), a 0/0 form at zeta_k; L'Hopital in q gives
    (-1)^{kw-1} k a d / w^2, which matches a d (-1)^{w-1} / w^2 for odd k.
    """
    t = Fraction(k * k * a, 1)
    s = Fraction(k * w) / d
    # d/dq (q^x - q^-x) at q = 1 is 2x
    lhs = Fraction((-1) ** (k * w - 1)) * (2 * t) / (k * w * 2 * s)
    rhs = Fraction(a) * (-1) ** (w - 1) / (w * (Fraction(w) / d))
    return lhs, rhs
