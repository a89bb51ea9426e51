"""Cyclotomic numbers, the ring K[t]/(t^p - 1), and division-free determinants.

Two coefficient backends share one contract:

* :class:`RingElement` -- exact, coefficients are :class:`CycNumber` values in
  ``Q(zeta_N)`` represented on the power basis ``1, x, ..., x^(phi(N)-1)``
  modulo the N-th cyclotomic polynomial;
* :class:`ApproxRingElement` -- complex floating point with an equality
  tolerance (default ``1e-9``).

Heavy computations (Jacobian determinants over many generating systems) do
not go through these element classes but through the *value domain*: since
``C[t]/(t^p - 1)`` is isomorphic to ``C^p`` via evaluation at the p-th roots of
unity, a ring element is stored as its p values.  When p divides the
conductor N the same holds exactly over ``Q(zeta_N)``.  The value-domain
algebras below (:class:`ExactValues`, :class:`ComplexValues`) give a
vectorized multiply on numpy arrays, on top of which the Berkowitz
determinant runs without any division.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from math import gcd
from typing import Sequence

import numpy as np
import sympy

from .errors import ModulusMismatch, PreconditionViolated


def _lcm(a: int, b: int) -> int:
    return a * b // gcd(a, b)


def euler_phi(n: int) -> int:
    return int(sympy.totient(n))


@dataclass(frozen=True)
class _Field:
    N: int
    phi: int
    red: tuple  # red[k] = x^k written on the power basis, 0 <= k < max(N, 2 phi)
    units: tuple  # residues coprime to N


@lru_cache(maxsize=None)
def _field(N: int) -> _Field:
    if N < 1:
        raise PreconditionViolated(f"conductor must be positive, got {N}")
    x = sympy.Symbol("x")
    low_to_high = [int(c) for c in reversed(sympy.Poly(sympy.cyclotomic_poly(N, x), x).all_coeffs())]
    phi = len(low_to_high) - 1
    red = []
    for k in range(phi):
        v = [0] * phi
        v[k] = 1
        red.append(tuple(v))
    top = max(N, 2 * phi)
    cur = list(red[-1])
    for _ in range(phi, top):
        # multiply cur by x and reduce x^phi = -sum_{i<phi} c_i x^i
        carry = cur[-1]
        cur = [0] + cur[:-1]
        for i in range(phi):
            cur[i] -= carry * low_to_high[i]
        red.append(tuple(cur))
    units = tuple(k for k in range(1, N + 1) if gcd(k, N) == 1)
    return _Field(N, phi, tuple(red), units)


def _normalize(num: list, den: int) -> tuple[tuple, int]:
    if den == 0:
        raise ZeroDivisionError("zero denominator")
    if den < 0:
        num = [-c for c in num]
        den = -den
    g = den
    for c in num:
        if g == 1:
            break
        g = gcd(g, c)
    if g > 1:
        num = [c // g for c in num]
        den //= g
    return tuple(num), den


class CycNumber:
    """An element of the cyclotomic field ``Q(zeta_N)``.

    Coefficients are integers over a common positive denominator.  Binary
    operations between different conductors lift both operands to the lcm.
    Equality is exact; hashing is only consistent among equal conductors.
    """

    __slots__ = ("N", "num", "den")

    def __init__(self, N: int, num: Sequence[int], den: int = 1):
        F = _field(N)
        num = [int(c) for c in num]
        if len(num) > F.phi:
            acc = [0] * F.phi
            for k, c in enumerate(num):
                if c:
                    row = F.red[k % N] if k >= len(F.red) else F.red[k]
                    for i in range(F.phi):
                        acc[i] += c * row[i]
            num = acc
        else:
            num = num + [0] * (F.phi - len(num))
        self.N = N
        self.num, self.den = _normalize(num, int(den))

    @classmethod
    def _raw(cls, N, num, den):
        z = cls.__new__(cls)
        z.N, z.num, z.den = N, num, den
        return z

    # -- constructors ---------------------------------------------------------
    @classmethod
    def rational(cls, q, N: int = 1) -> CycNumber:
        q = Fraction(q)
        return cls(N, [q.numerator], q.denominator)

    @classmethod
    def zero(cls, N: int = 1) -> CycNumber:
        return cls.rational(0, N)

    @classmethod
    def one(cls, N: int = 1) -> CycNumber:
        return cls.rational(1, N)

    @property
    def phi(self) -> int:
        return len(self.num)

    # -- conductor handling ---------------------------------------------------
    def lift(self, M: int) -> CycNumber:
        """Re-express in ``Q(zeta_M)`` (requires ``N | M``) via ``x -> x^(M/N)``."""
        if M == self.N:
            return self
        if M % self.N:
            raise PreconditionViolated(f"cannot lift conductor {self.N} to {M}")
        F = _field(M)
        step = M // self.N
        acc = [0] * F.phi
        for k, c in enumerate(self.num):
            if c:
                row = F.red[(k * step) % M]
                for i in range(F.phi):
                    acc[i] += c * row[i]
        return CycNumber._raw(M, tuple(acc), self.den)

    def _coerce(self, other):
        if isinstance(other, CycNumber):
            if other.N == self.N:
                return self, other
            M = _lcm(self.N, other.N)
            return self.lift(M), other.lift(M)
        if isinstance(other, (int, Fraction)):
            return self, CycNumber.rational(other, self.N)
        if isinstance(other, np.integer):
            return self, CycNumber.rational(int(other), self.N)
        return None, None

    # -- arithmetic -----------------------------------------------------------
    def __add__(self, other):
        a, b = self._coerce(other)
        if a is None:
            return NotImplemented
        num = [x * b.den + y * a.den for x, y in zip(a.num, b.num)]
        return CycNumber._raw(a.N, *_normalize(num, a.den * b.den))

    __radd__ = __add__

    def __neg__(self):
        return CycNumber._raw(self.N, tuple(-c for c in self.num), self.den)

    def __sub__(self, other):
        a, b = self._coerce(other)
        if a is None:
            return NotImplemented
        return a + (-b)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        a, b = self._coerce(other)
        if a is None:
            return NotImplemented
        F = _field(a.N)
        phi = F.phi
        conv = [0] * (2 * phi - 1)
        for i, x in enumerate(a.num):
            if x:
                for j, y in enumerate(b.num):
                    if y:
                        conv[i + j] += x * y
        out = conv[:phi]
        for d in range(phi, 2 * phi - 1):
            c = conv[d]
            if c:
                row = F.red[d]
                for i in range(phi):
                    out[i] += c * row[i]
        return CycNumber._raw(a.N, *_normalize(out, a.den * b.den))

    __rmul__ = __mul__

    def __truediv__(self, other):
        a, b = self._coerce(other)
        if a is None:
            return NotImplemented
        return a * b.inverse()

    def __rtruediv__(self, other):
        return self.inverse() * other

    def __pow__(self, k: int):
        if k < 0:
            return self.inverse() ** (-k)
        out = CycNumber.one(self.N)
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def galois(self, k: int) -> CycNumber:
        """Apply the automorphism ``zeta_N -> zeta_N^k`` (``gcd(k, N) = 1``)."""
        if gcd(k, self.N) != 1:
            raise PreconditionViolated(f"{k} is not a unit mod {self.N}")
        F = _field(self.N)
        acc = [0] * F.phi
        for e, c in enumerate(self.num):
            if c:
                row = F.red[(e * k) % self.N]
                for i in range(F.phi):
                    acc[i] += c * row[i]
        return CycNumber._raw(self.N, tuple(acc), self.den)

    def conj(self) -> CycNumber:
        return self.galois(self.N - 1) if self.N > 2 else self

    def norm(self) -> Fraction:
        out = self
        for k in _field(self.N).units:
            if k != 1:
                out = out * self.galois(k)
        return out.as_fraction()

    def inverse(self) -> CycNumber:
        if self.is_zero():
            raise ZeroDivisionError("inverse of zero")
        rest = CycNumber.one(self.N)
        for k in _field(self.N).units:
            if k != 1:
                rest = rest * self.galois(k)
        nrm = (self * rest).as_fraction()
        return rest * (1 / nrm)

    # -- predicates / conversion ---------------------------------------------
    def is_zero(self) -> bool:
        return not any(self.num)

    def is_rational(self) -> bool:
        return not any(self.num[1:])

    def is_real(self) -> bool:
        return self == self.conj()

    def as_fraction(self) -> Fraction:
        if not self.is_rational():
            raise ValueError(f"{self} is not rational")
        return Fraction(self.num[0], self.den)

    def to_complex(self) -> complex:
        z = np.exp(2j * np.pi / self.N)
        return complex(sum(c * z ** k for k, c in enumerate(self.num)) / self.den)

    def key(self) -> tuple:
        return (self.N, self.num, self.den)

    def __eq__(self, other):
        a, b = self._coerce(other)
        if a is None:
            return NotImplemented
        return a.num == b.num and a.den == b.den

    def __hash__(self):
        if self.is_rational():
            return hash(Fraction(self.num[0], self.den))
        return hash(self.key())

    def __str__(self):
        parts = []
        for k, c in enumerate(self.num):
            if not c:
                continue
            mono = "" if k == 0 else ("z" if k == 1 else f"z^{k}")
            if not mono:
                parts.append(f"{c:+d}")
            elif c in (1, -1):
                parts.append(("+" if c > 0 else "-") + mono)
            else:
                parts.append(f"{c:+d}*{mono}")
        s = " ".join(parts) if parts else "0"
        s = s[1:] if s.startswith("+") else s
        if self.den != 1:
            s = f"({s})/{self.den}"
        return s

    def __repr__(self):
        return f"CycNumber[N={self.N}]({self})"


def zeta_power(N: int, k: int) -> CycNumber:
    """``zeta_N^k`` on the power basis of ``Q(zeta_N)``."""
    if N < 1:
        raise PreconditionViolated(f"N must be positive, got {N}")
    F = _field(N)
    return CycNumber._raw(N, F.red[k % N], 1)


def multiplicative_order(z: CycNumber) -> int | None:
    """Order of a root of unity, or None if ``z`` is not one."""
    one = CycNumber.one(z.N)
    M = z.N if z.N % 2 == 0 else 2 * z.N
    w = one
    for k in range(1, M + 1):
        w = w * z
        if w == one:
            return k
    return None


# -- the ring K[t]/(t^p - 1) ---------------------------------------------------

Scalar = int | Fraction | CycNumber


class RingElement:
    """Exact element ``sum_k c_k t^k`` of ``Q(zeta_N)[t]/(t^p - 1)``."""

    __slots__ = ("p", "N", "coeffs")

    def __init__(self, p: int, coeffs: Sequence[Scalar], N: int | None = None):
        if p < 1:
            raise PreconditionViolated("modulus p must be positive")
        cs = [c if isinstance(c, CycNumber) else CycNumber.rational(c) for c in coeffs]
        cs = cs + [CycNumber.zero()] * max(0, p - len(cs))
        if len(cs) > p:
            folded = [CycNumber.zero()] * p
            for k, c in enumerate(cs):
                folded[k % p] = folded[k % p] + c
            cs = folded
        M = N or 1
        for c in cs:
            M = _lcm(M, c.N)
        self.p = p
        self.N = M
        self.coeffs = tuple(c.lift(M) for c in cs)

    @classmethod
    def zero(cls, p: int, N: int = 1) -> RingElement:
        return cls(p, [], N)

    @classmethod
    def one(cls, p: int, N: int = 1) -> RingElement:
        return cls(p, [1], N)

    @classmethod
    def monomial(cls, p: int, c: Scalar, k: int, N: int = 1) -> RingElement:
        cs: list = [0] * p
        cs[k % p] = c
        return cls(p, cs, N)

    is_exact = True

    def _check(self, other):
        if isinstance(other, ApproxRingElement):
            raise ModulusMismatch("cannot mix exact and approximate ring elements")
        if other.p != self.p:
            raise ModulusMismatch(f"moduli differ: {self.p} vs {other.p}")

    def __add__(self, other):
        if isinstance(other, (int, Fraction, CycNumber)):
            other = RingElement.monomial(self.p, other, 0)
        if not isinstance(other, (RingElement, ApproxRingElement)):
            return NotImplemented
        self._check(other)
        return RingElement(self.p, [a + b for a, b in zip(self.coeffs, other.coeffs)])

    __radd__ = __add__

    def __neg__(self):
        return RingElement(self.p, [-c for c in self.coeffs], self.N)

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, Fraction, CycNumber)):
            return RingElement(self.p, [c * other for c in self.coeffs])
        if not isinstance(other, (RingElement, ApproxRingElement)):
            return NotImplemented
        return ring_mul(self, other)

    def __rmul__(self, other):
        if isinstance(other, (int, Fraction, CycNumber)):
            return self * other
        return NotImplemented

    def __pow__(self, k: int):
        if k < 0:
            raise ValueError("negative powers are not defined in general")
        out = RingElement.one(self.p, self.N)
        for _ in range(k):
            out = out * self
        return out

    def shift(self, k: int) -> RingElement:
        """Multiply by ``t^k``."""
        p = self.p
        return RingElement(p, [self.coeffs[(i - k) % p] for i in range(p)], self.N)

    def scale(self, c: Scalar) -> RingElement:
        return self * c

    def is_zero(self) -> bool:
        return all(c.is_zero() for c in self.coeffs)

    def __eq__(self, other):
        if isinstance(other, (int, Fraction, CycNumber)):
            other = RingElement.monomial(self.p, other, 0)
        if isinstance(other, ApproxRingElement):
            return self.to_approx() == other
        if not isinstance(other, RingElement):
            return NotImplemented
        return self.p == other.p and all(a == b for a, b in zip(self.coeffs, other.coeffs))

    def __hash__(self):
        return hash(self.key())

    def key(self) -> tuple:
        """Canonical serialized form (for hash-based grouping)."""
        return (self.p, self.N, tuple((c.num, c.den) for c in self.coeffs))

    def to_approx(self) -> ApproxRingElement:
        return ApproxRingElement(self.p, [c.to_complex() for c in self.coeffs])

    def complex_coeffs(self) -> np.ndarray:
        return np.array([c.to_complex() for c in self.coeffs])

    def to_json(self) -> list:
        return [[list(c.num), c.den] for c in self.coeffs]

    def __str__(self):
        terms = []
        for k, c in enumerate(self.coeffs):
            if c.is_zero():
                continue
            mono = "" if k == 0 else ("t" if k == 1 else f"t^{k}")
            terms.append(f"({c}){'*' + mono if mono else ''}")
        return " + ".join(terms) if terms else "0"

    def __repr__(self):
        return f"RingElement[p={self.p}, N={self.N}]({self})"


class ApproxRingElement:
    """Element of ``C[t]/(t^p - 1)`` with complex coefficients."""

    TOL = 1e-9
    is_exact = False

    __slots__ = ("p", "coeffs")

    def __init__(self, p: int, coeffs):
        c = np.zeros(p, dtype=complex)
        arr = np.asarray(coeffs, dtype=complex).ravel()
        for k, v in enumerate(arr):
            c[k % p] += v
        self.p = p
        self.coeffs = c

    @classmethod
    def zero(cls, p: int) -> ApproxRingElement:
        return cls(p, [])

    @classmethod
    def one(cls, p: int) -> ApproxRingElement:
        return cls(p, [1])

    @classmethod
    def monomial(cls, p: int, c: complex, k: int) -> ApproxRingElement:
        out = cls(p, [])
        out.coeffs[k % p] = c
        return out

    @classmethod
    def from_values(cls, values) -> ApproxRingElement:
        values = np.asarray(values, dtype=complex)
        return cls(len(values), np.fft.ifft(values))

    def values(self) -> np.ndarray:
        return np.fft.fft(self.coeffs)

    def _coerce(self, other):
        if isinstance(other, RingElement):
            other = other.to_approx()
        if isinstance(other, ApproxRingElement):
            if other.p != self.p:
                raise ModulusMismatch(f"moduli differ: {self.p} vs {other.p}")
            return other
        return None

    def __add__(self, other):
        if isinstance(other, (int, float, complex, Fraction)):
            return ApproxRingElement(self.p, self.coeffs + np.eye(1, self.p, 0)[0] * complex(other))
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return ApproxRingElement(self.p, self.coeffs + o.coeffs)

    __radd__ = __add__

    def __neg__(self):
        return ApproxRingElement(self.p, -self.coeffs)

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, CycNumber):
            other = other.to_complex()
        if isinstance(other, (int, float, complex, Fraction, np.number)):
            return ApproxRingElement(self.p, self.coeffs * complex(other))
        if isinstance(other, RingElement):
            raise ModulusMismatch("cannot mix exact and approximate ring elements")
        if not isinstance(other, ApproxRingElement):
            return NotImplemented
        return ring_mul(self, other)

    def __rmul__(self, other):
        return self * other

    def shift(self, k: int) -> ApproxRingElement:
        return ApproxRingElement(self.p, np.roll(self.coeffs, k))

    def is_zero(self, tol: float | None = None) -> bool:
        return float(np.max(np.abs(self.coeffs), initial=0.0)) <= (tol or self.TOL)

    def distance(self, other) -> float:
        o = self._coerce(other)
        return float(np.max(np.abs(self.coeffs - o.coeffs), initial=0.0))

    def close(self, other, tol: float | None = None) -> bool:
        return self.distance(other) <= (tol if tol is not None else self.TOL)

    def __eq__(self, other):
        if isinstance(other, (int, float, complex, Fraction)):
            other = ApproxRingElement.monomial(self.p, complex(other), 0)
        if self._coerce(other) is None:
            return NotImplemented
        return self.close(other)

    __hash__ = None

    def to_approx(self) -> ApproxRingElement:
        return self

    def complex_coeffs(self) -> np.ndarray:
        return self.coeffs.copy()

    def to_json(self) -> list:
        return [[float(c.real), float(c.imag)] for c in self.coeffs]

    def __str__(self):
        terms = []
        for k, c in enumerate(self.coeffs):
            if abs(c) <= self.TOL:
                continue
            mono = "" if k == 0 else ("t" if k == 1 else f"t^{k}")
            terms.append(f"({c.real:.6g}{c.imag:+.6g}j){'*' + mono if mono else ''}")
        return " + ".join(terms) if terms else "0"

    def __repr__(self):
        return f"ApproxRingElement[p={self.p}]({self})"


AnyRingElement = RingElement | ApproxRingElement


def ring_mul(x: AnyRingElement, y: AnyRingElement) -> AnyRingElement:
    """Product in ``K[t]/(t^p - 1)``; both factors must share p and backend."""
    if x.p != y.p:
        raise ModulusMismatch(f"moduli differ: {x.p} vs {y.p}")
    if isinstance(x, RingElement) != isinstance(y, RingElement):
        raise ModulusMismatch("cannot mix exact and approximate ring elements")
    p = x.p
    if isinstance(x, ApproxRingElement):
        return ApproxRingElement.from_values(x.values() * y.values())
    N = _lcm(x.N, y.N)
    a = [c.lift(N) for c in x.coeffs]
    b = [c.lift(N) for c in y.coeffs]
    out = [CycNumber.zero(N)] * p
    for i, ai in enumerate(a):
        if ai.is_zero():
            continue
        for j, bj in enumerate(b):
            if bj.is_zero():
                continue
            k = (i + j) % p
            out[k] = out[k] + ai * bj
    return RingElement(p, out, N)


def bar(x: AnyRingElement) -> AnyRingElement:
    """The involution ``t -> t^-1`` combined with complex conjugation of coefficients."""
    p = x.p
    if isinstance(x, ApproxRingElement):
        return ApproxRingElement(p, np.conj(x.coeffs[(-np.arange(p)) % p]))
    return RingElement(p, [x.coeffs[(-k) % p].conj() for k in range(p)], x.N)


def geometric_sum(base_root, u: int, q: int, p: int) -> AnyRingElement:
    """``sum_{m<q} base^m t^(u m)``; exact for a CycNumber base, approximate for complex."""
    if q < 0:
        raise PreconditionViolated("q must be non-negative")
    if isinstance(base_root, (CycNumber, int, Fraction)):
        b = base_root if isinstance(base_root, CycNumber) else CycNumber.rational(base_root)
        cs = [CycNumber.zero(b.N)] * p
        w = CycNumber.one(b.N)
        for m in range(q):
            k = (u * m) % p
            cs[k] = cs[k] + w
            w = w * b
        return RingElement(p, cs, b.N)
    b = complex(base_root)
    cs = np.zeros(p, dtype=complex)
    for m in range(q):
        cs[(u * m) % p] += b ** m
    return ApproxRingElement(p, cs)


def _root_order_ok(zeta, q: int) -> bool:
    if isinstance(zeta, CycNumber):
        one = CycNumber.one(zeta.N)
        if zeta ** q != one:
            return False
        return all(zeta ** (q // l) != one for l in sympy.primefactors(q))
    z = complex(zeta)
    if abs(z ** q - 1) > 1e-9:
        return False
    return all(abs(z ** (q // l) - 1) > 1e-9 for l in sympy.primefactors(q))


def pi_product(a: int, b: int, r, p: int, q: int, zeta=None) -> AnyRingElement:
    """``r (zeta^a t^a - 1)(zeta^-a t^-a - 1)(t^b - 1)(t^-b - 1)`` in ``K[t]/(t^p-1)``.

    ``zeta`` defaults to the exact ``zeta_q``; pass a complex number for the
    approximate backend (then ``r`` may be any real number).
    """
    if p < 3 or q % p:
        raise PreconditionViolated(f"need p >= 3 and p | q, got p={p}, q={q}")
    if gcd(a, q) != 1 or gcd(b, p) != 1:
        raise PreconditionViolated(f"need gcd(a, q) = gcd(b, p) = 1, got a={a}, b={b}")
    if zeta is None:
        zeta = zeta_power(q, 1)
    if not _root_order_ok(zeta, q):
        raise PreconditionViolated(f"zeta is not a primitive {q}-th root of unity")
    if isinstance(zeta, CycNumber):
        za = zeta ** (a % q)
        f1 = RingElement(p, [], zeta.N) + RingElement.monomial(p, za, a) - 1
        f2 = bar(f1)
        g1 = RingElement.monomial(p, 1, b, zeta.N) - 1
        g2 = bar(g1)
        if isinstance(r, float):
            r = Fraction(r).limit_denominator()
        return ring_mul(ring_mul(f1, f2), ring_mul(g1, g2)) * r
    z = complex(zeta)
    vals_t = np.exp(-2j * np.pi * np.arange(p) / p)
    f = (z ** a * vals_t ** a - 1) * (z ** -a * vals_t ** -a - 1)
    g = (vals_t ** b - 1) * (vals_t ** -b - 1)
    return ApproxRingElement.from_values(complex(r) * f * g)


def pi_expansion(a: int, b: int, r, p: int, q: int, zeta=None) -> RingElement:
    """The expanded nine-term form of ``pi_product`` (an independent oracle)."""
    if zeta is None:
        zeta = zeta_power(q, 1)
    za, zma = zeta ** (a % q), zeta ** ((-a) % q)
    N = zeta.N
    m = lambda c, k: RingElement.monomial(p, c, k, N)  # noqa: E731
    inner = (m(4, 0) - m(2 * za, a) - m(2 * zma, -a)
             - (m(2, b) - m(za, a + b) - m(zma, -a + b))
             - (m(2, -b) - m(za, a - b) - m(zma, -a - b)))
    return inner * r


# -- injectivity scan -----------------------------------------------------------

@dataclass
class ScanReport:
    p: int
    q: int
    r_set: list
    triple_count: int
    classes: list = field(default_factory=list)      # collision classes (size >= 2)
    violations: list = field(default_factory=list)   # pairs with a != +-a' mod q

    @property
    def ok(self) -> bool:
        return not self.violations

    def to_dict(self) -> dict:
        fmt = lambda tr: [tr[0], tr[1], str(tr[2])]  # noqa: E731
        return {
            "p": self.p, "q": self.q, "r_set": [str(r) for r in self.r_set],
            "triple_count": self.triple_count,
            "collision_classes": [[fmt(t) for t in c] for c in self.classes],
            "violations": [[fmt(a), fmt(b)] for a, b in self.violations],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


def pi_injectivity_scan(p: int, q: int, r_set: Sequence) -> ScanReport:
    """Enumerate all ``Pi(a, b, r)`` and group them by exact value."""
    if p < 3 or q % p:
        raise PreconditionViolated(f"need p >= 3 and p | q, got p={p}, q={q}")
    rs = [Fraction(r) for r in r_set]
    if not rs or any(r == 0 for r in rs):
        raise PreconditionViolated("r_set must be nonempty and exclude 0")
    zeta = zeta_power(q, 1)
    groups: dict = {}
    count = 0
    for a in range(1, q):
        if gcd(a, q) != 1:
            continue
        for b in range(1, p):
            if gcd(b, p) != 1:
                continue
            base = pi_product(a, b, 1, p, q, zeta)
            for r in rs:
                groups.setdefault((base * r).key(), []).append((a, b, r))
                count += 1
    rep = ScanReport(p, q, rs, count)
    for members in groups.values():
        if len(members) < 2:
            continue
        rep.classes.append(members)
        for i, x in enumerate(members):
            for y in members[i + 1:]:
                if (x[0] - y[0]) % q and (x[0] + y[0]) % q:
                    rep.violations.append((x, y))
    rep.classes.sort()
    return rep


# -- determinants ----------------------------------------------------------------

class RingMatrix:
    """Square matrix of ring elements sharing modulus and backend."""

    def __init__(self, entries):
        rows = [list(r) for r in entries]
        n = len(rows)
        if any(len(r) != n for r in rows):
            raise PreconditionViolated("RingMatrix must be square")
        if n:
            p = rows[0][0].p
            exact = isinstance(rows[0][0], RingElement)
            for r in rows:
                for e in r:
                    if e.p != p or isinstance(e, RingElement) != exact:
                        raise ModulusMismatch("inconsistent modulus or backend")
        self.entries = rows

    @property
    def size(self) -> int:
        return len(self.entries)

    def __getitem__(self, rc):
        return self.entries[rc[0]][rc[1]]

    def det(self):
        return det_division_free(self)


def _berkowitz(A, n, one, zero, mul, dot, matvec):
    """Characteristic-polynomial iteration; returns det(A).

    Works on anything supporting ``+``/``-`` and the supplied ``mul``; never
    divides.  ``A`` is accessed through ``A(i, j)`` style slicing helpers so
    the same loop serves scalar ring elements and batched numpy arrays.
    """
    c = [one, -A["entry"](0, 0)]
    for r in range(2, n + 1):
        R = A["row"](r - 1, r - 1)
        S = A["col"](r - 1, r - 1)
        M = A["sub"](r - 1)
        col = [one, -A["entry"](r - 1, r - 1)]
        v = S
        for k in range(r - 1):
            col.append(-dot(R, v))
            if k < r - 2:
                v = matvec(M, v)
        new = []
        for i in range(r + 1):
            acc = zero
            for j in range(min(i, r - 1) + 1):
                acc = acc + mul(col[i - j], c[j])
            new.append(acc)
        c = new
    return c[n] if n % 2 == 0 else -c[n]


def det_division_free(M):
    """Determinant over a commutative ring (zero divisors allowed), Berkowitz style."""
    rows = M.entries if isinstance(M, RingMatrix) else [list(r) for r in M]
    n = len(rows)
    if n == 0:
        raise PreconditionViolated("empty matrix")
    e0 = rows[0][0]
    one = e0 * 0 + 1
    zero = e0 * 0
    mul = lambda a, b: a * b  # noqa: E731

    def dot(R, v):
        acc = zero
        for a, b in zip(R, v):
            acc = acc + a * b
        return acc

    def matvec(Mx, v):
        return [dot(row, v) for row in Mx]

    A = {
        "entry": lambda i, j: rows[i][j],
        "row": lambda i, k: [rows[i][j] for j in range(k)],
        "col": lambda j, k: [rows[i][j] for i in range(k)],
        "sub": lambda k: [rows[i][:k] for i in range(k)],
    }
    return _berkowitz(A, n, one, zero, mul, dot, matvec)


# -- value-domain algebras (vectorized) --------------------------------------------

class ComplexValues:
    """``C[t]/(t^p - 1)`` stored pointwise at ``t = exp(-2 pi i m / p)``."""

    exact = False

    def __init__(self, p: int):
        self.p = p
        self.t = np.exp(-2j * np.pi * np.arange(p) / p)

    @staticmethod
    def mul(a, b):
        return a * b

    @staticmethod
    def matmul(A, B):
        return A @ B

    @staticmethod
    def ones(shape):
        return np.ones(shape, dtype=complex)

    @staticmethod
    def zeros(shape):
        return np.zeros(shape, dtype=complex)

    def scalar(self, c, shape=()):
        return np.full(shape, complex(c.to_complex() if isinstance(c, CycNumber) else c))

    def t_power(self, k: int):
        return self.t ** k

    def to_ring(self, values) -> ApproxRingElement:
        return ApproxRingElement.from_values(values)

    def from_ring(self, x: AnyRingElement) -> np.ndarray:
        return x.to_approx().values()

    def batch_shape(self, x) -> tuple:
        return x.shape

    def equal(self, a, b, tol: float) -> np.ndarray:
        # compare in coefficient space to keep the tolerance meaningful
        d = np.fft.ifft(a - b, axis=-1)
        return np.max(np.abs(d), axis=-1) <= tol

    def det(self, A):
        return berkowitz_det_array(A, self)


class ExactValues:
    """``Z[zeta_N][t]/(t^p - 1)`` stored pointwise, exactly, with ``p | N``.

    Arrays carry the power-basis axis *first*: an array of shape
    ``(phi, *batch)`` holds one cyclotomic integer per batch position.  All
    entries are Python integers (numpy object dtype), so nothing overflows.
    Point m corresponds to ``t = zeta_N^(-(N/p) m)``.
    """

    exact = True

    def __init__(self, N: int, p: int):
        if N % p:
            raise PreconditionViolated(f"p={p} must divide the conductor N={N}")
        F = _field(N)
        self.N, self.p, self.phi = N, p, F.phi
        Mt = np.zeros((F.phi * F.phi, F.phi), dtype=object)
        for i in range(F.phi):
            for j in range(F.phi):
                Mt[i * F.phi + j] = F.red[i + j]
        self._mt = Mt.T.copy()  # (phi, phi^2)
        step = N // p
        self.t = self.pack([zeta_power(N, -step * m) for m in range(p)])

    def pack(self, nums: Sequence[CycNumber]) -> np.ndarray:
        out = np.zeros((self.phi, len(nums)), dtype=object)
        for k, c in enumerate(nums):
            c = c.lift(self.N) if isinstance(c, CycNumber) else CycNumber.rational(c, self.N)
            if c.den != 1:
                raise PreconditionViolated("value-domain arrays hold cyclotomic integers only")
            out[:, k] = c.num
        return out

    def unpack(self, arr) -> list[CycNumber]:
        flat = arr.reshape(self.phi, -1)
        return [CycNumber._raw(self.N, tuple(int(v) for v in flat[:, k]), 1)
                for k in range(flat.shape[1])]

    def mul(self, a, b):
        prod = a[:, None] * b[None, :]
        sh = prod.shape
        flat = prod.reshape((self.phi * self.phi,) + sh[2:])
        return np.tensordot(self._mt, flat, axes=1)

    def matmul(self, A, B):
        return self.mul(A[..., :, :, None], B[..., None, :, :]).sum(axis=-2)

    def ones(self, shape):
        out = np.zeros((self.phi,) + tuple(shape), dtype=object)
        out[0] = 1
        return out

    def zeros(self, shape):
        return np.zeros((self.phi,) + tuple(shape), dtype=object)

    def scalar(self, c, shape=()):
        vec = self.pack([c])[:, 0]
        out = np.zeros((self.phi,) + tuple(shape), dtype=object)
        out[...] = vec.reshape((self.phi,) + (1,) * len(shape))
        return out

    def t_power(self, k: int):
        step = self.N // self.p
        return self.pack([zeta_power(self.N, -step * m * k) for m in range(self.p)])

    def to_ring(self, values) -> RingElement:
        """Inverse transform of a length-p value vector (shape ``(phi, p)``)."""
        vals = self.unpack(values)
        step = self.N // self.p
        cs = []
        for k in range(self.p):
            acc = CycNumber.zero(self.N)
            for m, v in enumerate(vals):
                acc = acc + v * zeta_power(self.N, step * m * k)
            cs.append(acc * Fraction(1, self.p))
        return RingElement(self.p, cs, self.N)

    def from_ring(self, x: RingElement) -> np.ndarray:
        step = self.N // self.p
        vals = []
        for m in range(self.p):
            acc = CycNumber.zero(self.N)
            for k, c in enumerate(x.coeffs):
                if not c.is_zero():
                    acc = acc + c * zeta_power(self.N, -step * m * k)
            vals.append(acc)
        return self.pack(vals)

    def batch_shape(self, x) -> tuple:
        return x.shape[1:]

    def equal(self, a, b, tol: float = 0.0) -> np.ndarray:
        d = a - b
        return ~np.any(d != 0, axis=(0, -1))

    def det(self, A):
        return berkowitz_det_array(A, self)


def berkowitz_det_array(A, alg):
    """Batched division-free determinant over a value-domain algebra.

    ``A`` has trailing shape ``(n, n)``; for :class:`ExactValues` the leading
    axis is the cyclotomic basis axis.
    """
    n = A.shape[-1]
    shape = A[..., 0, 0].shape
    one = alg.ones(shape if not alg.exact else shape[1:])
    zero = one * 0

    def dot(R, v):
        return alg.mul(R, v).sum(axis=-1)

    def matvec(M, v):
        return alg.mul(M, v[..., None, :]).sum(axis=-1)

    acc = {
        "entry": lambda i, j: A[..., i, j],
        "row": lambda i, k: A[..., i, :k],
        "col": lambda j, k: A[..., :k, j],
        "sub": lambda k: A[..., :k, :k],
    }
    return _berkowitz(acc, n, one, zero, alg.mul, dot, matvec)
