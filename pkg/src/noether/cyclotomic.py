"""Arithmetic in Z[zeta_n] for an odd prime n.

Elements are stored on the power basis 1, z, ..., z^(n-2); anything of
higher degree is folded back with z^n = 1 and
z^(n-1) = -(1 + z + ... + z^(n-2)).

The norm is computed as the determinant of the multiplication-by-x matrix
on that basis (:func:`norm_matrix`); the product of all Galois conjugates
(:func:`norm_by_conjugates`) is kept as an independent cross-check.
"""

from __future__ import annotations

import math
import operator
import re
from dataclasses import dataclass
from functools import lru_cache, reduce
from typing import Sequence

from .errors import ArgumentError, ParseError, PreconditionError
from .linalg import IMatrix, det


@lru_cache(maxsize=None)
def _is_odd_prime(n: int) -> bool:
    from sympy import isprime
    return n > 2 and isprime(n)


def check_conductor(n: int) -> int:
    n = operator.index(n)
    if not _is_odd_prime(n):
        raise ArgumentError(f"conductor must be an odd prime, got {n}")
    return n


@dataclass(frozen=True)
class CycInt:
    """x = coeffs[0] + coeffs[1] z + ... + coeffs[n-2] z^(n-2), z = zeta_n."""

    n: int
    coeffs: tuple[int, ...]

    def __post_init__(self):
        check_conductor(self.n)
        coeffs = tuple(operator.index(c) for c in self.coeffs)
        if len(coeffs) != self.n - 1:
            raise ArgumentError(f"need {self.n - 1} coefficients for n={self.n}, got {len(coeffs)}")
        object.__setattr__(self, "coeffs", coeffs)

    @classmethod
    def from_dict(cls, n: int, terms: dict[int, int]) -> CycInt:
        """Build from ``{exponent: coefficient}``; any exponent is allowed."""
        raw = [0] * n
        for e, c in terms.items():
            raw[e % n] += c
        return reduce_poly(raw, n)

    @classmethod
    def constant(cls, n: int, c: int) -> CycInt:
        return cls(n, (c,) + (0,) * (n - 2))

    @classmethod
    def zeta(cls, n: int, power: int = 1) -> CycInt:
        return cls.from_dict(n, {power: 1})

    @classmethod
    def parse(cls, text: str, n: int) -> CycInt:
        return parse(text, n)

    def __str__(self) -> str:
        return format_cycint(self)

    def is_zero(self) -> bool:
        return not any(self.coeffs)

    def __add__(self, other: CycInt) -> CycInt:
        _same_field(self, other)
        return CycInt(self.n, tuple(map(operator.add, self.coeffs, other.coeffs)))

    def __sub__(self, other: CycInt) -> CycInt:
        _same_field(self, other)
        return CycInt(self.n, tuple(map(operator.sub, self.coeffs, other.coeffs)))

    def __neg__(self) -> CycInt:
        return CycInt(self.n, tuple(-c for c in self.coeffs))

    def __mul__(self, other: CycInt) -> CycInt:
        return mul(self, other)


def _same_field(x: CycInt, y: CycInt) -> None:
    if x.n != y.n:
        raise ArgumentError(f"elements live in different rings: n={x.n} vs n={y.n}")


def reduce_poly(raw: Sequence[int], n: int) -> CycInt:
    """Canonical element equal to sum raw[i] z^i modulo the n-th cyclotomic polynomial."""
    n = check_conductor(n)
    folded = [0] * n
    for i, c in enumerate(raw):
        folded[i % n] += operator.index(c)
    top = folded[n - 1]
    return CycInt(n, tuple(c - top for c in folded[:n - 1]))


def mul(x: CycInt, y: CycInt) -> CycInt:
    """Product reduced to the canonical basis."""
    _same_field(x, y)
    n = x.n
    acc = [0] * n
    for i, a in enumerate(x.coeffs):
        if a:
            for j, b in enumerate(y.coeffs):
                if b:
                    acc[(i + j) % n] += a * b
    return reduce_poly(acc, n)


def conjugate(x: CycInt, k: int) -> CycInt:
    """Image of x under the automorphism z -> z^k."""
    n = x.n
    if math.gcd(k, n) != 1:
        raise ArgumentError(f"z -> z^{k} is not an automorphism for n={n}")
    acc = [0] * n
    for i, c in enumerate(x.coeffs):
        acc[(i * k) % n] += c
    return reduce_poly(acc, n)


def norm_matrix(x: CycInt) -> IMatrix:
    """Matrix of multiplication by x on the basis 1, z, ..., z^(n-2).

    Column j holds the coordinates of x z^j; entry (i, j) is
    ``c[(i - j) mod n] - c[n - 1 - j]`` with c = (alpha_0, ..., alpha_{n-2}, 0).
    Column 0 is alpha itself and column 1 reads
    (-alpha_{n-2}, alpha_0 - alpha_{n-2}, ..., alpha_{n-3} - alpha_{n-2}).
    """
    n = x.n
    c = x.coeffs + (0,)
    return IMatrix._wrap(tuple(
        tuple(c[(i - j) % n] - c[n - 1 - j] for j in range(n - 1)) for i in range(n - 1)
    ))


def norm(x: CycInt) -> int:
    """N_{Q(zeta_n)/Q}(x) as an exact determinant; norm(0) == 0."""
    return det(norm_matrix(x))


def norm_by_conjugates(x: CycInt) -> int:
    """Product of the n-1 Galois conjugates, carried out in Z[zeta_n].

    Raises if the product is not a rational integer, which would mean the
    ring arithmetic is broken.
    """
    prod = reduce(mul, (conjugate(x, k) for k in range(1, x.n)))
    if any(prod.coeffs[1:]):
        raise ArithmeticError(f"conjugate product is not rational: {prod}")
    return prod.coeffs[0]


def content(x: CycInt) -> int:
    """gcd of the coefficients (0 for the zero element)."""
    return reduce(math.gcd, x.coeffs, 0)


def evaluate(x: CycInt, r: int) -> int:
    """sum alpha_i r^i over the integers (no reduction)."""
    acc = 0
    for c in reversed(x.coeffs):
        acc = acc * r + c
    return acc


def cyclotomic_value(n: int, r: int) -> int:
    """Phi_n(r) = 1 + r + ... + r^(n-1)."""
    return sum(r ** i for i in range(n))


def eval_mod(x: CycInt, r: int, p: int) -> int:
    """Image of x under Z[zeta_n] -> Z/pZ, zeta_n -> r.

    The map is a ring homomorphism exactly when Phi_n(r) = 0 mod p; that is
    checked (for r of multiplicative order n it is the same as r^n = 1).
    """
    if p <= 1:
        raise ArgumentError(f"modulus must exceed 1, got {p}")
    r %= p
    if sum(pow(r, i, p) for i in range(x.n)) % p:
        raise PreconditionError(
            f"z -> {r} does not define a homomorphism Z[zeta_{x.n}] -> Z/{p}Z"
        )
    acc = 0
    for c in reversed(x.coeffs):
        acc = (acc * r + c) % p
    return acc


# ---------------------------------------------------------------------------
# text format: "a0 + a1*z + a2*z^2", z standing for zeta_n
# ---------------------------------------------------------------------------

_TERM = re.compile(
    r"""\s*(?P<sign>[+-])?\s*
        (?:
          (?P<coef>\d+)\s*(?:\*\s*(?P<z1>z)(?:\s*(?:\^|\*\*)\s*(?P<e1>\d+))?)?
        | (?P<z2>z)(?:\s*(?:\^|\*\*)\s*(?P<e2>\d+))?
        )\s*""",
    re.VERBOSE,
)


def parse(text: str, n: int) -> CycInt:
    """Parse ``"1 + z + z^4"``-style text (``**`` also accepted for powers)."""
    n = check_conductor(n)
    src = text.strip()
    if not src:
        raise ParseError("empty expression")
    terms: dict[int, int] = {}
    pos = 0
    first = True
    while pos < len(src):
        m = _TERM.match(src, pos)
        if not m or m.end() == pos or (not first and not m.group("sign")):
            raise ParseError(f"cannot parse {text!r} near position {pos}")
        sign = -1 if m.group("sign") == "-" else 1
        if m.group("z2"):
            coef, exp = 1, int(m.group("e2") or 1)
        else:
            coef = int(m.group("coef"))
            exp = int(m.group("e1") or 1) if m.group("z1") else 0
        terms[exp] = terms.get(exp, 0) + sign * coef
        pos = m.end()
        first = False
    return CycInt.from_dict(n, terms)


def format_cycint(x: CycInt) -> str:
    parts = []
    for i, c in enumerate(x.coeffs):
        if not c:
            continue
        mag = abs(c)
        if i == 0:
            body = str(mag)
        else:
            zpow = "z" if i == 1 else f"z^{i}"
            body = zpow if mag == 1 else f"{mag}*{zpow}"
        sign = "-" if c < 0 else "+"
        if not parts:
            parts.append(body if c > 0 else f"-{body}")
        else:
            parts.append(f"{sign} {body}")
    return " ".join(parts) if parts else "0"
