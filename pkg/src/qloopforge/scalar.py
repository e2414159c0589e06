"""Exact ground-field arithmetic and quantum combinatorics.

A :class:`ScalarField` is the field of rational functions over the integers
in the deformation variable ``t`` and finitely many declared spectral
parameters.  The quantum parameter is fixed once and for all as ``q = t**2``,
so every q-expression is a Laurent expression in t.  Elements ("scalars")
are sympy sparse fraction-field elements: immutable, hashable, kept in
canonical reduced form (coprime numerator/denominator, normalized sign), with
decidable equality.

Spectral parameters are multiplicatively independent by declaration, so a
point on the q-power lattice of a parameter is represented symbolically by
:class:`SpectralPoint` (base parameter plus an integer q-exponent) instead of
by its field value.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

from sympy import ZZ
from sympy.polys.fields import field

__all__ = ["ScalarField", "SpectralPoint", "scalar_str"]


@dataclass(frozen=True, order=True)
class SpectralPoint:
    """A point ``base * q**k`` with base a declared parameter (or 1).

    Two points are equal iff base and exponent agree; distinct declared
    bases never collide because parameters are independent transcendentals.
    """

    base: str  # declared parameter name, or "" for the unit 1
    k: int = 0

    def shift(self, dk: int) -> "SpectralPoint":
        return SpectralPoint(self.base, self.k + dk)

    def __str__(self) -> str:
        if not self.base:
            head = ""
        else:
            head = self.base
        if self.k == 0:
            return head or "1"
        qpart = "q" if self.k == 1 else f"q^{self.k}"
        return f"{head}*{qpart}" if head else qpart

    @staticmethod
    def parse(text: str) -> "SpectralPoint":
        """Parse strings like ``a*q^3``, ``a``, ``q^-2`` or ``1``."""
        s = text.strip().replace(" ", "")
        if s in ("", "1"):
            return SpectralPoint("")
        base = ""
        k = 0
        for piece in s.split("*"):
            if piece == "1":
                continue
            if piece == "q":
                k += 1
            elif piece.startswith("q^"):
                k += int(piece[2:])
            elif piece.isidentifier():
                if base:
                    raise ValueError(f"more than one base parameter in {text!r}")
                base = piece
            else:
                raise ValueError(f"cannot parse spectral point {text!r}")
        return SpectralPoint(base, k)


class ScalarField:
    """Rational functions in t and declared parameters, with q = t**2."""

    def __init__(self, params: Sequence[str] = ()):
        params = tuple(params)
        if "t" in params:
            raise ValueError("'t' is reserved for the deformation variable")
        if len(set(params)) != len(params):
            raise ValueError("duplicate parameter names")
        names = ("t",) + params
        created = field(list(names), ZZ)
        self.ring = created[0]
        gens = created[1:]
        self.t = gens[0]
        self.param_names = params
        self._params = dict(zip(params, gens[1:]))
        self.q = self.t ** 2
        self.one = self.ring.one
        self.zero = self.ring.zero
        self._qint_cache: dict[int, object] = {}

    # -- constructors -------------------------------------------------

    def __call__(self, n: int):
        return self.ring.one * n

    def param(self, name: str):
        return self._params[name]

    def qpow(self, k: int):
        """q**k as a scalar (negative k allowed)."""
        return self.q ** k

    def point_value(self, p: SpectralPoint):
        base = self._params[p.base] if p.base else self.one
        return base * self.qpow(p.k)

    def point_from_value(self, value) -> Optional[SpectralPoint]:
        """Recognize a scalar of the form base*q**k; None if not of that shape."""
        num, den = value.numer, value.denom
        if len(num.terms()) != 1 or len(den.terms()) != 1:
            return None
        (nexp, ncoef), = num.terms()
        (dexp, dcoef), = den.terms()
        if abs(ncoef) != 1 or abs(dcoef) != 1 or ncoef != dcoef:
            return None
        exps = [a - b for a, b in zip(nexp, dexp)]
        tpow, parpows = exps[0], exps[1:]
        if tpow % 2 != 0:
            return None
        base = ""
        for name, e in zip(self.param_names, parpows):
            if e == 0:
                continue
            if e != 1 or base:
                return None
            base = name
        return SpectralPoint(base, tpow // 2)

    # -- quantum combinatorics ----------------------------------------

    def qint(self, n: int):
        """The balanced quantum integer (q**n - q**-n)/(q - q**-1)."""
        if n in self._qint_cache:
            return self._qint_cache[n]
        if n < 0:
            val = -self.qint(-n)
        else:
            val = self.zero
            for j in range(n):
                val = val + self.qpow(n - 1 - 2 * j)
        self._qint_cache[n] = val
        return val

    def qfact(self, n: int):
        if n < 0:
            raise ValueError("qfact requires n >= 0")
        val = self.one
        for j in range(1, n + 1):
            val = val * self.qint(j)
        return val

    def qbinom(self, n: int, m: int):
        if not 0 <= m <= n:
            raise ValueError("qbinom requires 0 <= m <= n")
        return self.qfact(n) / (self.qfact(m) * self.qfact(n - m))

    def qratio_product(self, num: Iterable[int], den: Iterable[int]):
        """Product of quantum integers over ``num`` divided by the one over
        ``den``, cancelled as formal multisets before evaluation.

        Matching indices cancel even when they are 0 (where the quantum
        integer itself vanishes); a surviving 0 in the denominator is a
        domain error, a surviving 0 in the numerator gives 0.
        """
        sign = 1
        num_abs: dict[int, int] = {}
        den_abs: dict[int, int] = {}
        for i in num:
            if i < 0:
                sign, i = -sign, -i
            num_abs[i] = num_abs.get(i, 0) + 1
        for i in den:
            if i < 0:
                sign, i = -sign, -i
            den_abs[i] = den_abs.get(i, 0) + 1
        for i in sorted(set(num_abs) & set(den_abs)):
            c = min(num_abs[i], den_abs[i])
            num_abs[i] -= c
            den_abs[i] -= c
        if den_abs.get(0, 0) > 0:
            raise ZeroDivisionError(
                "uncancelled zero quantum integer in denominator")
        if num_abs.get(0, 0) > 0:
            return self.zero
        val = self.one * sign
        for i, c in num_abs.items():
            for _ in range(c):
                val = val * self.qint(i)
        for i, c in den_abs.items():
            for _ in range(c):
                val = val / self.qint(i)
        return val

    # -- misc -----------------------------------------------------------

    def __repr__(self) -> str:
        return f"ScalarField(params={self.param_names!r})"


def _poly_str(poly) -> str:
    """Deterministic plain-text form of a sparse polynomial, '^' powers."""
    gens = [str(g) for g in poly.ring.gens]
    terms = sorted(poly.terms(), reverse=True)
    if not terms:
        return "0"
    parts = []
    for exps, coef in terms:
        factors = []
        c = int(coef)
        for name, e in zip(gens, exps):
            if e == 1:
                factors.append(name)
            elif e != 0:
                factors.append(f"{name}^{e}")
        if not factors:
            body = str(abs(c))
        else:
            body = "*".join(factors)
            if abs(c) != 1:
                body = f"{abs(c)}*{body}"
        parts.append(("-" if c < 0 else "+", body))
    sign0, body0 = parts[0]
    out = ("-" if sign0 == "-" else "") + body0
    for sign, body in parts[1:]:
        out += sign + body
    return out


def scalar_str(x) -> str:
    """Canonical fraction string, e.g. ``(t^4+1)/t^2``."""
    num, den = x.numer, x.denom
    ns = _poly_str(num)
    if den == num.ring.one:
        return ns
    ds = _poly_str(den)
    if len(num.terms()) > 1:
        ns = f"({ns})"
    if len(den.terms()) > 1:
        ds = f"({ds})"
    return f"{ns}/{ds}"
