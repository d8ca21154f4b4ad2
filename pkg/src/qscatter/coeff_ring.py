"""Exact coefficients: rational functions in x = q^(1/D), quantum integers,
classical limits and evaluation at roots of unity.

A QRational is stored as ``c * x^s * P(x) / Q(x)`` where P, Q are coprime
primitive integer polynomials with nonzero constant terms and positive
leading coefficients, and c is a nonzero rational.  That form is unique, so
equality is a tuple comparison once both sides share a scale.
"""

from __future__ import annotations

import re
from fractions import Fraction
from math import gcd

from flint import fmpq, fmpq_poly, fmpz_poly


class ScaleError(ValueError):
    pass


class PoleError(ArithmeticError):
    pass


def _lcm(a, b):
    return a * b // gcd(a, b)


def _low(p):
    """Lowest exponent with a nonzero coefficient."""
    cs = p.coeffs()
    for i, c in enumerate(cs):
        if c != 0:
            return i
    raise ValueError("zero polynomial")


_ONE = fmpz_poly([1])


def _to_fmpq(v):
    if isinstance(v, fmpq):
        return v
    if isinstance(v, int):
        return fmpq(v)
    if isinstance(v, Fraction):
        return fmpq(v.numerator, v.denominator)
    raise TypeError(f"cannot convert {type(v).__name__} to a rational")


def _frac(c):
    return Fraction(int(c.p), int(c.q))


class QRational:
    __slots__ = ("c", "s", "P", "Q", "D")

    def __init__(self, value=0, D=1):
        self.D = D
        self.c = _to_fmpq(value)
        self.s = 0
        self.P = _ONE
        self.Q = _ONE

    @classmethod
    def _raw(cls, c, s, P, Q, D):
        r = object.__new__(cls)
        r.c, r.s, r.P, r.Q, r.D = c, s, P, Q, D
        return r

    @classmethod
    def _make(cls, c, s, P, Q, D, reduce=True):
        """Normalize c*x^s*P/Q with P, Q integer polynomials."""
        if c == 0 or P.is_zero():
            return cls._raw(fmpq(0), 0, _ONE, _ONE, D)
        if Q.is_zero():
            raise ZeroDivisionError("zero denominator")
        if reduce and not Q.is_one():
            g = P.gcd(Q)
            if not g.is_one():
                P = P // g
                Q = Q // g
        lp = _low(P)
        if lp:
            P = P.right_shift(lp)
        lq = _low(Q)
        if lq:
            Q = Q.right_shift(lq)
        s = s + lp - lq
        cp = P.content()
        if P.leading_coefficient() < 0:
            cp = -cp
        if cp != 1:
            P = P // cp
        cq = Q.content()
        if Q.leading_coefficient() < 0:
            cq = -cq
        if cq != 1:
            Q = Q // cq
        return cls._raw(c * fmpq(cp) / fmpq(cq), s, P, Q, D)

    # constructors

    @classmethod
    def laurent(cls, terms, D=1):
        """From a mapping exponent-of-x -> rational."""
        terms = {e: _to_fmpq(v) for e, v in terms.items() if v != 0}
        if not terms:
            return cls(0, D)
        lo = min(terms)
        poly = fmpq_poly([terms.get(lo + i, 0) for i in range(max(terms) - lo + 1)])
        return cls._make(fmpq(1, int(poly.denom())), lo, poly.numer(), _ONE, D, reduce=False)

    @classmethod
    def qpow(cls, e, D=1):
        """q^e, with e rational and D*e integral."""
        e = Fraction(e) * D
        if e.denominator != 1:
            raise ScaleError(f"q^{Fraction(e, D)} is not integral at scale {D}")
        return cls._raw(fmpq(1), int(e), _ONE, _ONE, D)

    # scale handling

    def rescale(self, D):
        if D == self.D:
            return self
        if D % self.D:
            raise ScaleError(f"cannot rescale from {self.D} to {D}")
        k = D // self.D
        if self.c == 0:
            return QRational(0, D)
        return QRational._raw(self.c, self.s * k, _inflate(self.P, k), _inflate(self.Q, k), D)

    def minimal_scale(self):
        """The same value at the smallest admissible scale."""
        if self.c == 0:
            return QRational(0, 1)
        g = self.D
        g = gcd(g, self.s)
        for p in (self.P, self.Q):
            for i, a in enumerate(p.coeffs()):
                if a != 0:
                    g = gcd(g, i)
        if g == 1:
            return self
        return QRational._raw(self.c, self.s // g, _deflate(self.P, g), _deflate(self.Q, g), self.D // g)

    def _common(self, other):
        if not isinstance(other, QRational):
            other = QRational(other, self.D)
        if other.D == self.D:
            return self, other
        D = _lcm(self.D, other.D)
        return self.rescale(D), other.rescale(D)

    # predicates

    def is_zero(self):
        return self.c == 0

    def is_laurent(self):
        return self.Q.is_one()

    def is_rational(self):
        return self.c == 0 or (self.s == 0 and self.P.is_one() and self.Q.is_one())

    def to_fraction(self):
        if not self.is_rational():
            raise ValueError(f"{self} is not a constant")
        return _frac(self.c)

    # arithmetic

    def __neg__(self):
        return QRational._raw(-self.c, self.s, self.P, self.Q, self.D)

    def __add__(self, other):
        if isinstance(other, (int, Fraction)):
            if other == 0:
                return self
            other = QRational(other, self.D)
        elif not isinstance(other, QRational):
            return NotImplemented
        a, b = self._common(other)
        if a.c == 0:
            return b
        if b.c == 0:
            return a
        s = min(a.s, b.s)
        pa = fmpq_poly(a.P.left_shift(a.s - s)) * a.c
        pb = fmpq_poly(b.P.left_shift(b.s - s)) * b.c
        if a.Q == b.Q:
            num = pa + pb
            den = a.Q
        else:
            g = a.Q.gcd(b.Q)
            qa = a.Q // g
            qb = b.Q // g
            num = pa * fmpq_poly(qb) + pb * fmpq_poly(qa)
            den = qa * b.Q
        if num.is_zero():
            return QRational(0, a.D)
        return QRational._make(fmpq(1, int(num.denom())), s, num.numer(), den, a.D)

    __radd__ = __add__

    def __sub__(self, other):
        if isinstance(other, (int, Fraction)):
            return self + (-other)
        if not isinstance(other, QRational):
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, Fraction, fmpq)):
            if other == 0:
                return QRational(0, self.D)
            return QRational._raw(self.c * _to_fmpq(other), self.s, self.P, self.Q, self.D)
        if not isinstance(other, QRational):
            return NotImplemented
        a, b = self._common(other)
        if a.c == 0 or b.c == 0:
            return QRational(0, a.D)
        P1, Q1, P2, Q2 = a.P, a.Q, b.P, b.Q
        if not Q2.is_one() and not P1.is_one():
            g = P1.gcd(Q2)
            if not g.is_one():
                P1, Q2 = P1 // g, Q2 // g
        if not Q1.is_one() and not P2.is_one():
            g = P2.gcd(Q1)
            if not g.is_one():
                P2, Q1 = P2 // g, Q1 // g
        return QRational._make(a.c * b.c, a.s + b.s, P1 * P2, Q1 * Q2, a.D, reduce=False)

    __rmul__ = __mul__

    def inverse(self):
        if self.c == 0:
            raise ZeroDivisionError("inverse of zero")
        return QRational._make(1 / self.c, -self.s, self.Q, self.P, self.D, reduce=False)

    def __truediv__(self, other):
        if isinstance(other, (int, Fraction)):
            if other == 0:
                raise ZeroDivisionError("division by zero")
            return self * (Fraction(1) / Fraction(other))
        if not isinstance(other, QRational):
            return NotImplemented
        return self * other.inverse()

    def __rtruediv__(self, other):
        return self.inverse() * other

    def __pow__(self, n):
        if not isinstance(n, int):
            return NotImplemented
        if n < 0:
            return self.inverse() ** (-n)
        result = QRational(1, self.D)
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    # comparison

    def _key(self):
        m = self.minimal_scale()
        if m.c == 0:
            return (0,)
        return (m.D, m.c, m.s, tuple(int(x) for x in m.P.coeffs()), tuple(int(x) for x in m.Q.coeffs()))

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            return self.is_rational() and _frac(self.c) == other
        if not isinstance(other, QRational):
            return NotImplemented
        if self.D == other.D:
            return (self.c == other.c and self.s == other.s and self.P == other.P
                    and self.Q == other.Q)
        a, b = self._common(other)
        return a == b

    def __hash__(self):
        if self.is_rational():
            return hash(_frac(self.c))
        return hash(self._key())

    def __bool__(self):
        return self.c != 0

    # views

    def numerator_terms(self):
        """Numerator as {exponent of x: Fraction}."""
        out = {}
        for i, a in enumerate(self.P.coeffs()):
            if a != 0:
                out[self.s + i] = _frac(self.c * a)
        return out

    def denominator_terms(self):
        return {i: Fraction(int(a)) for i, a in enumerate(self.Q.coeffs()) if a != 0}

    def classical_limit(self):
        return classical_limit(self)

    def bar(self):
        """The image under q^(1/D) -> q^(-1/D)."""
        if self.c == 0:
            return self
        P = fmpz_poly(self.P.coeffs()[::-1])
        Q = fmpz_poly(self.Q.coeffs()[::-1])
        s = -self.s - self.P.degree() + self.Q.degree()
        return QRational._make(self.c, s, P, Q, self.D, reduce=False)

    def __repr__(self):
        return f"QRational({to_string(self)!r})"

    def __str__(self):
        return to_string(self)


def _inflate(p, k):
    cs = p.coeffs()
    out = [0] * ((len(cs) - 1) * k + 1)
    for i, a in enumerate(cs):
        out[i * k] = a
    return fmpz_poly(out)


def _deflate(p, k):
    return fmpz_poly(p.coeffs()[::k])


# quantum numbers


def qnum(w, D=1):
    """[w]_q = (q^w - q^-w)/(q - q^-1) at scale D."""
    w = Fraction(w)
    e = w * D
    if e.denominator != 1:
        raise ScaleError(f"[{w}]_q needs D*w integral, D={D}")
    e = int(e)
    if e == 0:
        return QRational(0, D)
    sign = 1 if e > 0 else -1
    e = abs(e)
    # (x^e - x^-e)/(x^D - x^-D) = x^(D-e) (x^(2e) - 1)/(x^(2D) - 1)
    num = fmpz_poly([-1] + [0] * (2 * e - 1) + [1])
    den = fmpz_poly([-1] + [0] * (2 * D - 1) + [1])
    return QRational._make(fmpq(sign), D - e, num, den, D)


def r_coeff(w, d, D=1):
    """R_{w,d;q} = (-1)^(w-1) / (w [w/d]_q)."""
    w = int(w)
    sign = 1 if w % 2 else -1
    return qnum(Fraction(w) / Fraction(d), D).inverse() * Fraction(sign, w)


def classical_limit(x):
    if isinstance(x, (int, Fraction)):
        return Fraction(x)
    if x.c == 0:
        return Fraction(0)
    den = x.Q(1)
    if den == 0:
        raise PoleError(f"{x} has a pole at q = 1")
    return _frac(x.c * fmpq(x.P(1)) / fmpq(den))


# cyclotomic fields


class CyclotomicElement:
    """Element of Q[x]/Phi_m(x), x standing for a primitive m-th root of unity."""

    __slots__ = ("m", "poly")

    def __init__(self, m, poly):
        self.m = m
        phi = _cyclo(m)
        p = fmpq_poly(poly) if not isinstance(poly, fmpq_poly) else poly
        self.poly = p % phi if p.degree() >= phi.degree() else p

    @property
    def coords(self):
        n = _cyclo(self.m).degree()
        cs = [_frac(c) for c in self.poly.coeffs()]
        return tuple(cs + [Fraction(0)] * (n - len(cs)))

    @classmethod
    def rational(cls, m, v):
        return cls(m, fmpq_poly([_to_fmpq(v)]))

    def _check(self, other):
        if isinstance(other, (int, Fraction)):
            return CyclotomicElement.rational(self.m, other)
        if other.m != self.m:
            raise ValueError("different cyclotomic fields")
        return other

    def __add__(self, other):
        other = self._check(other)
        return CyclotomicElement(self.m, self.poly + other.poly)

    __radd__ = __add__

    def __neg__(self):
        return CyclotomicElement(self.m, -self.poly)

    def __sub__(self, other):
        return self + (-self._check(other))

    def __mul__(self, other):
        other = self._check(other)
        return CyclotomicElement(self.m, self.poly * other.poly)

    __rmul__ = __mul__

    def inverse(self):
        if self.poly.is_zero():
            raise ZeroDivisionError("inverse of zero in cyclotomic field")
        g, a, _ = self.poly.xgcd(_cyclo(self.m))
        return CyclotomicElement(self.m, a / g)

    def __truediv__(self, other):
        return self * self._check(other).inverse()

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            other = CyclotomicElement.rational(self.m, other)
        if not isinstance(other, CyclotomicElement):
            return NotImplemented
        return self.m == other.m and self.poly == other.poly

    def __hash__(self):
        return hash((self.m, self.coords))

    def is_zero(self):
        return self.poly.is_zero()

    def __repr__(self):
        return f"CyclotomicElement({self.m}, {[str(c) for c in self.coords]})"


_CYCLO = {}


def _cyclo(m):
    if m not in _CYCLO:
        _CYCLO[m] = fmpq_poly(fmpz_poly.cyclotomic(m))
    return _CYCLO[m]


def eval_at_root(x, m):
    """Image of x under q^(1/D) -> zeta_m."""
    if isinstance(x, (int, Fraction)):
        return CyclotomicElement.rational(m, x)
    phi = _cyclo(m)
    if x.c == 0:
        return CyclotomicElement.rational(m, 0)
    qd = fmpq_poly(x.Q) % phi
    if qd.is_zero():
        raise PoleError(f"denominator of {x} vanishes at a primitive {m}-th root of unity")
    num = fmpq_poly(x.P) * x.c
    shift = CyclotomicElement(m, fmpq_poly([0] * (x.s % m) + [1]))
    return CyclotomicElement(m, num) * shift / CyclotomicElement(m, qd)


# serialization

_TERM = re.compile(r"([+-]?\s*[0-9/]+)\*q\^\((-?\d+)/(\d+)\)")


def _poly_string(terms, D):
    if not terms:
        return "0"
    parts = []
    for e in sorted(terms):
        c = terms[e]
        parts.append(f"{c}*q^({e}/{D})")
    return " + ".join(parts).replace("+ -", "- ")


def to_string(x):
    if x.c == 0:
        return f"0*q^(0/{x.D})/1*q^(0/{x.D})"
    return f"({_poly_string(x.numerator_terms(), x.D)})/({_poly_string(x.denominator_terms(), x.D)})"


def _parse_poly(text):
    text = text.strip()
    if text.startswith("(") and text.endswith(")"):
        text = text[1:-1]
    text = text.replace(" ", "")
    terms = {}
    D = None
    pos = 0
    for m in _TERM.finditer(text):
        if m.start() != pos:
            raise ValueError(f"bad term near {text[pos:m.start() + 10]!r}")
        pos = m.end()
        c = Fraction(m.group(1).replace("+", ""))
        e, d = int(m.group(2)), int(m.group(3))
        if D is not None and d != D:
            raise ValueError("mixed scales in one polynomial")
        D = d
        terms[e] = terms.get(e, 0) + c
    if pos != len(text):
        raise ValueError(f"trailing text {text[pos:]!r}")
    return terms, D


def from_string(text):
    """Inverse of to_string; also accepts a bare rational such as '-3/4'."""
    text = text.strip()
    if "q^" not in text:
        return QRational(Fraction(text))
    depth = 0
    split = None
    for i, ch in enumerate(text):
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        elif ch == "/" and depth == 0 and i > 0 and text[i - 1] == ")":
            split = i
    if split is None:
        num, D = _parse_poly(text)
        return QRational.laurent(num, D or 1)
    num, D1 = _parse_poly(text[:split])
    den, D2 = _parse_poly(text[split + 1:])
    D = D1 or D2 or 1
    return QRational.laurent(num, D) / QRational.laurent(den, D2 or D)


# coefficient rings used by the engines


class QuantumRing:
    """Coefficients in Q(q^(1/D))."""

    classical = False

    def __init__(self, D=1):
        self.D = D
        self.zero = QRational(0, D)
        self.one = QRational(1, D)
        self._qnum = {}

    def coerce(self, v):
        if isinstance(v, QRational):
            return v.rescale(self.D) if v.D != self.D else v
        return QRational(v, self.D)

    def qpow(self, e):
        return QRational.qpow(e, self.D)

    def qnum(self, w):
        w = Fraction(w)
        if w not in self._qnum:
            self._qnum[w] = qnum(w, self.D)
        return self._qnum[w]

    def r(self, w, d):
        return r_coeff(w, d, self.D)

    def hbar(self):
        """q - q^-1, the factor relating z-hat to z."""
        return self.qpow(1) - self.qpow(-1)


class ClassicalRing:
    """q = 1: coefficients are Fractions."""

    classical = True
    D = 1
    zero = Fraction(0)
    one = Fraction(1)

    def coerce(self, v):
        if isinstance(v, QRational):
            return classical_limit(v)
        return Fraction(v)

    def qpow(self, e):
        return Fraction(1)

    def qnum(self, w):
        return Fraction(w)

    def r(self, w, d):
        return Fraction((-1) ** (w - 1)) / (w * Fraction(w) / Fraction(d))


def is_zero(c):
    return c == 0 if not isinstance(c, QRational) else c.c == 0
