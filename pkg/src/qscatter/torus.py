"""Monomials and truncated series in the quantum torus z^a z^b = q^W(a,b) z^(a+b)."""

from __future__ import annotations

from dataclasses import dataclass

from .coeff_ring import QRational, QuantumRing, from_string, is_zero, to_string


@dataclass(frozen=True)
class TorusMonomial:
    coeff: object
    exponent: tuple


def monomial_mul(a, b, lat, ring=None):
    ring = ring or QuantumRing(lat.scale)
    if len(a.exponent) != lat.rank or len(b.exponent) != lat.rank:
        raise ValueError("exponent length does not match the lattice rank")
    w = lat.W(a.exponent, b.exponent)
    c = ring.coerce(a.coeff) * ring.coerce(b.coeff) * ring.qpow(w)
    return TorusMonomial(c, tuple(x + y for x, y in zip(a.exponent, b.exponent)))


def add_into(acc, n, c):
    if is_zero(c):
        return
    old = acc.get(n)
    if old is None:
        acc[n] = c
    else:
        s = old + c
        if is_zero(s):
            del acc[n]
        else:
            acc[n] = s


def within(lat, n, base, order):
    diff = tuple(x - y for x, y in zip(n, base))
    return lat.in_nplus(diff, allow_zero=True) and sum(diff) <= order


class TruncatedSeries:
    """sum c_n z^n with n - base in N^+ u {0} and d(n - base) <= order."""

    __slots__ = ("lat", "ring", "base", "order", "terms")

    def __init__(self, lat, ring, base, order, terms=None):
        self.lat = lat
        self.ring = ring
        self.base = tuple(base)
        self.order = order
        self.terms = {}
        for n, c in (terms or {}).items():
            n = tuple(n)
            if not within(lat, n, self.base, order):
                continue
            add_into(self.terms, n, ring.coerce(c))

    @classmethod
    def monomial(cls, lat, ring, n, order, c=None):
        return cls(lat, ring, n, order, {tuple(n): ring.one if c is None else c})

    def copy(self):
        s = TruncatedSeries(self.lat, self.ring, self.base, self.order)
        s.terms = dict(self.terms)
        return s

    def __add__(self, other):
        self._compatible(other)
        out = self.copy()
        out.order = min(self.order, other.order)
        out.terms = {n: c for n, c in out.terms.items() if within(self.lat, n, self.base, out.order)}
        for n, c in other.terms.items():
            if within(self.lat, n, self.base, out.order):
                add_into(out.terms, n, c)
        return out

    def __neg__(self):
        out = self.copy()
        out.terms = {n: -c for n, c in self.terms.items()}
        return out

    def __sub__(self, other):
        return self + (-other)

    def scale(self, c):
        out = self.copy()
        out.terms = {n: v * c for n, v in self.terms.items() if not is_zero(v * c)}
        return out

    def __mul__(self, other):
        """Ordered quantum-torus product."""
        lat, ring = self.lat, self.ring
        base = tuple(x + y for x, y in zip(self.base, other.base))
        order = min(self.order, other.order)
        out = TruncatedSeries(lat, ring, base, order)
        for n1, c1 in self.terms.items():
            d1 = sum(n1) - sum(self.base)
            for n2, c2 in other.terms.items():
                if d1 + sum(n2) - sum(other.base) > order:
                    continue
                n = tuple(x + y for x, y in zip(n1, n2))
                add_into(out.terms, n, c1 * c2 * ring.qpow(lat.W(n1, n2)))
        return out

    def truncate(self, order):
        out = TruncatedSeries(self.lat, self.ring, self.base, order)
        out.terms = {n: c for n, c in self.terms.items() if sum(n) - sum(self.base) <= order}
        return out

    def coefficient(self, n):
        return self.terms.get(tuple(n), self.ring.zero)

    def _compatible(self, other):
        if self.base != other.base:
            raise ValueError("series with different base points")

    def __eq__(self, other):
        if not isinstance(other, TruncatedSeries):
            return NotImplemented
        order = min(self.order, other.order)
        a = self.truncate(order).terms
        b = other.truncate(order).terms
        return a.keys() == b.keys() and all(a[n] == b[n] for n in a)

    def is_zero(self):
        return not self.terms

    def classical_limit(self):
        from .coeff_ring import ClassicalRing
        cl = ClassicalRing()
        return TruncatedSeries(self.lat, cl, self.base, self.order,
                               {n: cl.coerce(c) for n, c in self.terms.items()})

    def to_json(self):
        return {
            "base": list(self.base),
            "order": self.order,
            "terms": [{"exponent": list(n), "coeff": coeff_str(c)} for n, c in sorted(self.terms.items())],
        }

    def __repr__(self):
        inner = ", ".join(f"{n}: {coeff_str(c)}" for n, c in sorted(self.terms.items()))
        return f"TruncatedSeries(base={self.base}, order={self.order}, {{{inner}}})"


def coeff_str(c):
    if isinstance(c, QRational):
        if c.is_rational():
            return str(c.to_fraction())
        return to_string(c)
    return str(c)


def coeff_from_str(s, ring):
    return ring.coerce(from_string(s))
