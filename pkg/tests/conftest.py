from pathlib import Path

import sympy as sp

from qscatter.coeff_ring import QRational

SEEDS = Path(__file__).resolve().parent.parent / "seeds"
X = sp.Symbol("x", positive=True)  # x = q^(1/D)

# acceptance lines collected by test_acceptance, printed in the terminal summary
ACCEPTANCE = {}


def to_sympy(c):
    """A coefficient as a sympy rational function of x = q^(1/D)."""
    if not isinstance(c, QRational):
        return sp.Rational(str(c))
    if c.c == 0:
        return sp.Integer(0)
    P = sum(sp.Integer(int(a)) * X**i for i, a in enumerate(c.P.coeffs()))
    Q = sum(sp.Integer(int(a)) * X**i for i, a in enumerate(c.Q.coeffs()))
    return sp.Rational(str(c.c)) * X**c.s * P / Q


def same(a, b):
    return sp.cancel(to_sympy(a) - b) == 0


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE):
        terminalreporter.write_line(ACCEPTANCE[k])

