"""The evaluation representation eta, Jacobian determinants of generating
systems, and invariant-based certification of Nielsen inequivalence.

For a pair of generators ``s_a, s_b`` whose orders share a divisor
``p >= 3``, eta sends ``Z G`` into 2x2 matrices over ``K[t]/(t^p - 1)``:

* ``eta(s_a) = M(zeta_a) diag(t, t^-1)`` where ``rho(s_a) = M(zeta_a)`` for a
  representation rho of ``G / <<s_b>>`` in which s_a is diagonal;
* ``eta(s_b) = C^-1 diag(t^-1, t) C`` with ``C = rho(s_{a+1} ... s_{b-1})``
  (indices cyclic), so the long relator still maps to the identity;
* every other ``s_i`` maps to ``rho(s_i)``; handle generators and the
  auxiliary ``d_k`` map to ``I``; crosscap generators map to ``diag(i, -i)``.

For standard generating systems U, V the invariant is
``Pi(u_a, u_b, 1) * det eta(dV/dU)``, where the Fox Jacobian is taken for
lifts of V's entries as words in U's entries.  It does not depend on the
lifts and is unchanged by Nielsen operations, so a difference from
``Pi(u_a, u_b, 1)`` proves that U and V are not Nielsen equivalent.

All heavy arithmetic runs in the value domain of :mod:`.cyclo`.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from math import gcd
from typing import Sequence

import numpy as np

from .cyclo import (ApproxRingElement, ComplexValues, CycNumber, ExactValues,
                    RingElement, pi_product, zeta_power)
from .errors import (BuildFailed, CheckFailed, IncompatibleSystems,
                     NoSharedDivisor, PreconditionViolated, UnknownGenerator)
from .presentation import (CANONICAL_FOUR, EXCEPTIONAL_UNKNOWN, FuchsianPresentation,
                           StandardGenSys, criterion_decide, is_exceptional,
                           mod_inverse_exponents, quotient)
from .sl2rep import (RepData, build_cyclic_faithful, build_quotient_rep,
                     exact_quotient_rep)
from .words import FoxPolynomial, FreeWord, apply_nielsen, fox_derivative

APPROX_TOL = 1e-8
CONSISTENT = "Consistent"
INEQUIVALENT = "Inequivalent"
SKIPPED = "Skipped"


def _lcm(a: int, b: int) -> int:
    return a * b // gcd(a, b)


# -- value-domain 2x2 helpers --------------------------------------------------------

def _stack2(e00, e01, e10, e11):
    return np.stack([np.stack([e00, e01], -1), np.stack([e10, e11], -1)], -2)


def _inv2(M):
    """Inverse of a determinant-one 2x2 block (division free)."""
    return _stack2(M[..., 1, 1], -M[..., 0, 1], -M[..., 1, 0], M[..., 0, 0])


def _identity(alg, p: int):
    one = alg.ones((p,))
    zero = alg.zeros((p,))
    return _stack2(one, zero, zero, one)


def _const(alg, p: int, M):
    """Constant 2x2 matrix (complex entries or CycNumbers) broadcast over the points."""
    if alg.exact:
        packed = alg.pack([M[0][0], M[0][1], M[1][0], M[1][1]])  # (phi, 4)
        out = np.empty((alg.phi, p, 2, 2), dtype=object)
        out[...] = packed.reshape(alg.phi, 1, 2, 2)
        return out
    M = np.asarray(M, dtype=complex)
    return np.broadcast_to(M, (p, 2, 2)).copy()


@dataclass
class EtaRep:
    P: FuchsianPresentation
    pair: tuple[int, int]
    p: int
    quotient_rep: RepData
    alg: object                      # ExactValues or ComplexValues
    images: dict                     # symbol -> value-domain 2x2 array
    inverses: dict
    zeta_exponent: int               # zeta_a = exp(2 pi i k / gamma_a)

    @property
    def backend(self) -> str:
        return "exact" if self.alg.exact else "approx"

    @property
    def gamma_a(self) -> int:
        return self.P.exponents[self.pair[0] - 1]

    def zeta(self):
        """The diagonal root of ``s_a`` (CycNumber when exact)."""
        g = self.gamma_a
        if self.alg.exact:
            return zeta_power(g, self.zeta_exponent)
        return complex(np.exp(2j * np.pi * self.zeta_exponent / g))

    def pi_values(self, a: int, b: int, r=1):
        """Values of ``Pi(a, b, r)`` built with ``zeta_a`` (a, b taken as given)."""
        key = (a, b, r)
        cache = self.__dict__.setdefault("_pi_cache", {})
        if key not in cache:
            cache[key] = self._pi_values(a, b, r)
        return cache[key]

    def _pi_values(self, a: int, b: int, r=1):
        alg, p = self.alg, self.p
        g = self.gamma_a
        if alg.exact:
            N = alg.N
            za = zeta_power(N, (self.zeta_exponent * a * (N // g)) % N)
            zma = zeta_power(N, (-self.zeta_exponent * a * (N // g)) % N)
            one = alg.ones((p,))
            f1 = alg.mul(alg.scalar(za, (p,)), alg.t_power(a)) - one
            f2 = alg.mul(alg.scalar(zma, (p,)), alg.t_power(-a)) - one
            g1 = alg.t_power(b) - one
            g2 = alg.t_power(-b) - one
            out = alg.mul(alg.mul(f1, f2), alg.mul(g1, g2))
            r = Fraction(r)
            if r.denominator != 1:
                raise PreconditionViolated("exact value arrays need an integral r")
            return out * r.numerator
        z = self.zeta() ** a
        t = alg.t
        return complex(r) * (z * t ** a - 1) * (t ** -a / z - 1) * (t ** b - 1) * (t ** -b - 1)

    def pi_element(self, a: int, b: int, r=1):
        """``Pi(a, b, r)`` as a ring element (checked preconditions)."""
        return pi_product(a % self.gamma_a, b % self.p, r, self.p, self.gamma_a, self.zeta())

    @property
    def zeta1(self):
        return self.zeta()

    @property
    def generator_images(self) -> dict:
        """Images of all symbols as 2x2 matrices of ring elements."""
        return {s: self.to_ring_matrix(M) for s, M in self.images.items()}

    def matrix(self, symbol: int):
        return self.images[symbol]

    def to_ring_matrix(self, vals) -> list:
        return [[self.alg.to_ring(vals[..., r, c]) for c in range(2)] for r in range(2)]


def choose_pair(P: FuchsianPresentation, index: int) -> tuple[int, int] | None:
    """Partner maximizing ``gcd(gamma_index, gamma_partner) >= 3`` (ties: smallest index)."""
    g = P.exponents[index - 1]
    best = None
    for b in range(1, P.ell + 1):
        if b == index:
            continue
        d = gcd(g, P.exponents[b - 1])
        if d >= 3 and (best is None or d > best[0]):
            best = (d, b)
    return None if best is None else (best[1], best[0])


def build_eta(P: FuchsianPresentation, pair: tuple[int, int] | None = None,
              root_choices=None, seed=0, backend: str = "auto",
              rep: RepData | None = None) -> EtaRep:
    """Assemble eta for the pair ``(a, b)`` (default: best pair overall)."""
    if pair is None:
        cands = []
        for a in range(1, P.ell + 1):
            if P.exponents[a - 1] >= 3:
                ch = choose_pair(P, a)
                if ch:
                    cands.append((-ch[1], a, ch[0]))
        if not cands:
            raise NoSharedDivisor(f"no two exponents of {P.describe()} share a divisor >= 3")
        cands.sort()
        pair = (cands[0][1], cands[0][2])
    a, b = pair
    if a == b or not (1 <= a <= P.ell and 1 <= b <= P.ell):
        raise PreconditionViolated(f"invalid pair {pair}")
    p = gcd(P.exponents[a - 1], P.exponents[b - 1])
    if p < 3:
        raise NoSharedDivisor(f"gcd of gamma_{a} and gamma_{b} is {p} < 3")
    ga = P.exponents[a - 1]
    extra_sign = (-1) ** P.crosscaps
    base = P.base()
    k_a = 1
    if root_choices is not None:
        item = root_choices[a - 1]
        k_a = item[1] if isinstance(item, (tuple, list)) else int(item)
    if rep is None:
        if backend in ("auto", "exact"):
            rep = exact_quotient_rep(base, b, a, first_root=k_a, extra_sign=extra_sign)
            if rep is None and backend == "exact":
                raise BuildFailed("no exact cyclotomic quotient representation exists here")
        if rep is None:
            rep = build_quotient_rep(base, b, a, root_choices, seed, extra_sign=extra_sign)
    if backend == "approx" or not rep.is_exact:
        alg = ComplexValues(p)
        exact = False
    else:
        N = _lcm(_lcm(rep.conductor, ga), p)
        if P.crosscaps:
            N = _lcm(N, 4)
        alg = ExactValues(N, p)
        exact = True
    k_a = rep.root_choices[a - 1][1]

    def rho(i):
        return rep.exact_images[i - 1] if exact else rep.generator_images[i - 1]

    images: dict = {}
    for i in range(1, P.ell + 1):
        images[i] = _const(alg, p, rho(i))
    # s_a: rho(s_a) diag(t, t^-1)
    if exact:
        lam = rho(a)[0][0]
        lam_i = rho(a)[1][1]
        e00 = alg.mul(alg.scalar(lam, (p,)), alg.t_power(1))
        e11 = alg.mul(alg.scalar(lam_i, (p,)), alg.t_power(-1))
    else:
        A = rep.generator_images[a - 1]
        e00 = A[0, 0] * alg.t
        e11 = A[1, 1] / alg.t
    zero = alg.zeros((p,))
    images[a] = _stack2(e00, zero, zero, e11)
    # s_b: C^-1 diag(t^-1, t) C, C = rho(product strictly between a and b)
    C = _identity(alg, p)
    i = a % P.ell + 1
    while i != b:
        C = alg.matmul(C, images[i])
        i = i % P.ell + 1
    D = _stack2(alg.t_power(-1), zero, zero, alg.t_power(1))
    images[b] = alg.matmul(alg.matmul(_inv2(C), D), C)
    L = P.ell
    for r in range(1, P.aux_count + 1):
        if P.crosscaps:
            if exact:
                iu = zeta_power(4, 1)
                images[L + r] = _const(alg, p, [[iu, CycNumber.zero()], [CycNumber.zero(), -iu]])
            else:
                images[L + r] = _const(alg, p, [[1j, 0], [0, -1j]])
        else:
            images[L + r] = _identity(alg, p)
    inverses = {s: _inv2(M) for s, M in images.items()}
    return EtaRep(P, (a, b), p, rep, alg, images, inverses, k_a)


def _block_det(alg, J):
    """Determinant of a matrix of 2x2 blocks, batched over the value axes.

    When the block pattern is triangular up to a simultaneous reordering of
    block rows and block columns (always true for canonical lifts), the
    determinant is the product of the 2x2 determinants of the matched blocks:
    a permutation of 2x2 blocks is even, so no sign appears.  Otherwise the
    division-free Berkowitz determinant is used.
    """
    n = J.shape[-1] // 2
    nz = np.zeros((n, n), dtype=bool)
    for r in range(n):
        for c in range(n):
            nz[r, c] = bool(np.any(J[..., 2 * r:2 * r + 2, 2 * c:2 * c + 2] != 0))
    rows, cols = set(range(n)), set(range(n))
    matched = []
    while rows:
        found = None
        for c in cols:
            rs = [r for r in rows if nz[r, c]]
            if len(rs) == 1:
                found = (rs[0], c)
                break
            if not rs:
                return alg.mul(J[..., 0, 0], J[..., 0, 0]) * 0   # zero column
        if found is None:
            for r in rows:
                cs = [c for c in cols if nz[r, c]]
                if len(cs) == 1:
                    found = (r, cs[0])
                    break
        if found is None:
            return alg.det(J)
        matched.append(found)
        rows.discard(found[0])
        cols.discard(found[1])
    out = None
    for r, c in matched:
        B = J[..., 2 * r:2 * r + 2, 2 * c:2 * c + 2]
        d = alg.mul(B[..., 0, 0], B[..., 1, 1]) - alg.mul(B[..., 0, 1], B[..., 1, 0])
        out = d if out is None else alg.mul(out, d)
    return out


# -- evaluation through a generating system ---------------------------------------------

class Evaluator:
    """Evaluates words and Fox derivatives over U's tuple through eta.

    Variable ``X_c`` (1-based tuple position) is sent to ``eta(s_i)^u_i`` for
    the c-th entry ``s_i^u_i`` of U, or to the auxiliary generator's image.
    """

    def __init__(self, E: EtaRep, U: StandardGenSys):
        self.E, self.U = E, U
        P = E.P
        U.validate(P)
        self.alg = E.alg
        self.p = E.p
        self.arity = P.ell - 1 + P.aux_count
        self.var_symbol = U.indices() + [P.ell + r for r in range(1, P.aux_count + 1)]
        self._id = _identity(self.alg, self.p)
        self._zero = self._id * 0
        self._pow: dict = {}
        self._geo: dict = {}
        self._words: dict = {FreeWord.identity(): self._id}
        self._rows: dict = {}
        for c, s in enumerate(self.var_symbol, 1):
            e = U.u[s - 1] if s <= P.ell else 1
            self._pow[(c, 0)] = self._id
            self._pow[(c, 1)] = self._sym_power(s, e)
            self._pow[(c, -1)] = _inv2(self._pow[(c, 1)])

    def _sym_power(self, s: int, e: int):
        E = self.E
        base = E.images[s] if e > 0 else E.inverses[s]
        out = self._id
        for _ in range(abs(e)):
            out = self.alg.matmul(out, base)
        return out

    def xpow(self, c: int, e: int):
        key = (c, e)
        if key not in self._pow:
            if not 1 <= c <= self.arity:
                raise UnknownGenerator(c)
            step = 1 if e > 0 else -1
            self._pow[key] = self.alg.matmul(self.xpow(c, e - step), self._pow[(c, step)])
        return self._pow[key]

    def geo(self, c: int, e: int):
        """Value of the Fox derivative of ``X_c^e`` with respect to ``X_c``."""
        key = (c, e)
        if key not in self._geo:
            if e == 0:
                val = self._zero
            elif e > 0:
                val = self.geo(c, e - 1) + self.xpow(c, e - 1)
            else:
                val = self.geo(c, e + 1) - self.xpow(c, e)
            self._geo[key] = val
        return self._geo[key]

    def word(self, w: FreeWord):
        if w in self._words:
            return self._words[w]
        syl = w.syllables
        head = FreeWord._raw(syl[:-1])
        g, e = syl[-1]
        val = self.alg.matmul(self.word(head), self.xpow(g, e))
        if len(self._words) < 200000:
            self._words[w] = val
        return val

    def poly(self, f: FoxPolynomial):
        out = self._zero
        for w, c in f.terms.items():
            out = out + self.word(w) * c
        return out

    def jacobian_row(self, W: FreeWord) -> list:
        """All Fox-derivative blocks of one word in a single left-to-right pass."""
        if W in self._rows:
            return self._rows[W]
        if W.max_generator() > self.arity:
            raise UnknownGenerator(W.max_generator())
        row = [None] * self.arity
        prefix = self._id
        for g, e in W.syllables:
            contrib = self.alg.matmul(prefix, self.geo(g, e))
            row[g - 1] = contrib if row[g - 1] is None else row[g - 1] + contrib
            prefix = self.alg.matmul(prefix, self.xpow(g, e))
        row = [self._zero if r is None else r for r in row]
        if len(self._rows) < 4096:
            self._rows[W] = row
        return row

    def jacobian_matrix(self, words: Sequence[FreeWord]):
        n = self.arity
        if len(words) != n:
            raise IncompatibleSystems(f"need {n} lifts, got {len(words)}")
        alg = self.alg
        J = alg.zeros((self.p, 2 * n, 2 * n)) if alg.exact else np.zeros((self.p, 2 * n, 2 * n), complex)
        for r, W in enumerate(words):
            for c, blk in enumerate(self.jacobian_row(W)):
                J[..., 2 * r:2 * r + 2, 2 * c:2 * c + 2] = blk
        return J


def eval_eta(E: EtaRep, poly: FoxPolynomial | FreeWord, U: StandardGenSys) -> list:
    """``eta`` of a polynomial in U's tuple variables, as 2x2 ring elements."""
    ev = Evaluator(E, U)
    if isinstance(poly, FreeWord):
        poly = FoxPolynomial.of(poly)
    return E.to_ring_matrix(ev.poly(poly))


# -- lifts ---------------------------------------------------------------------------------

def standard_lifts(P: FuchsianPresentation, U: StandardGenSys, V: StandardGenSys) -> list[FreeWord]:
    """Words in U's tuple variables representing V's entries (in V's order)."""
    if U.ell != P.ell or V.ell != P.ell:
        raise IncompatibleSystems("generating systems and presentation disagree on l")
    U.validate(P)
    V.validate(P)
    L = P.ell
    j, k = U.missing, V.missing
    z = mod_inverse_exponents(P, U)
    pos = {s: c for c, s in enumerate(U.indices(), 1)}
    for r in range(1, P.aux_count + 1):
        pos[L + r] = L - 1 + r

    def sym_to_x(sym: int, e: int) -> FreeWord:
        if sym <= L:
            return FreeWord.gen(pos[sym], z[sym - 1] * e)
        return FreeWord.gen(pos[sym], e)

    lifts = []
    for h in V.indices():
        if h != j:
            lifts.append(sym_to_x(h, V.u[h - 1]))
        else:
            rot = P.rotated_relator(j)
            Y0 = FreeWord.identity()
            for g, e in rot.syllables:
                Y0 = Y0 * sym_to_x(g, e)
            lifts.append(Y0.inverse() ** V.u[j - 1])
    for r in range(1, P.aux_count + 1):
        lifts.append(FreeWord.gen(pos[L + r]))
    return lifts


def kernel_relators(P: FuchsianPresentation, U: StandardGenSys) -> list[tuple[str, FreeWord]]:
    """Relators in U's variables: ``X_c^gamma`` and the rewritten long relator power."""
    L = P.ell
    z = mod_inverse_exponents(P, U)
    pos = {s: c for c, s in enumerate(U.indices(), 1)}
    for r in range(1, P.aux_count + 1):
        pos[L + r] = L - 1 + r
    rels = [(f"X{pos[i]}^{P.exponents[i - 1]}", FreeWord.gen(pos[i], P.exponents[i - 1]))
            for i in U.indices()]
    j = U.missing
    body = FreeWord.identity()
    for g, e in P.rotated_relator(j).syllables:
        body = body * FreeWord.gen(pos[g], (z[g - 1] if g <= L else 1) * e)
    rels.append(("R0", body ** P.exponents[j - 1]))
    return rels


# -- the invariant ----------------------------------------------------------------------------

@dataclass
class InvariantValue:
    values: object       # value-domain vector
    alg: object
    p: int

    @property
    def backend(self) -> str:
        return "exact" if self.alg.exact else "approx"

    def ring(self):
        return self.alg.to_ring(self.values)

    def distance(self, other) -> float:
        ov = other.values if isinstance(other, InvariantValue) else other
        if self.alg.exact:
            return 0.0 if np.array_equal(self.values, ov) else float("inf")
        return float(np.max(np.abs(np.fft.ifft(self.values - ov))))

    def equals(self, other, tol: float = APPROX_TOL) -> bool:
        if self.alg.exact:
            ov = other.values if isinstance(other, InvariantValue) else other
            return bool(np.array_equal(self.values, ov))
        ov = other.values if isinstance(other, InvariantValue) else other
        scale = max(1.0, float(np.max(np.abs(np.fft.ifft(ov)))))
        return self.distance(other) <= tol * scale

    def to_json(self):
        return self.ring().to_json()

    def __str__(self):
        return str(self.ring())


def invariant_product(E: EtaRep, P: FuchsianPresentation, U: StandardGenSys,
                      V_lifts: Sequence[FreeWord], evaluator: Evaluator | None = None
                      ) -> InvariantValue:
    """``Pi(u_a, u_b, 1) * det eta(dV/dU)`` for lifts of V's entries in U's variables."""
    ev = evaluator or Evaluator(E, U)
    J = ev.jacobian_matrix(V_lifts)
    det = _block_det(E.alg, J)
    a, b = E.pair
    piv = E.pi_values(U.u[a - 1], U.u[b - 1])
    return InvariantValue(E.alg.mul(piv, det), E.alg, E.p)


def invariant_batch(E: EtaRep, U: StandardGenSys, lift_sets: Sequence[Sequence[FreeWord]],
                    evaluator: Evaluator | None = None) -> list[InvariantValue]:
    """Vectorized :func:`invariant_product` over many V's sharing the same U."""
    ev = evaluator or Evaluator(E, U)
    if not lift_sets:
        return []
    mats = [ev.jacobian_matrix(ls) for ls in lift_sets]
    axis = 1 if E.alg.exact else 0
    J = np.stack(mats, axis=axis)
    det = _block_det(E.alg, J)
    a, b = E.pair
    piv = E.pi_values(U.u[a - 1], U.u[b - 1])
    prod = E.alg.mul(piv[..., None, :], det)
    out = []
    for k in range(len(lift_sets)):
        out.append(InvariantValue(prod[:, k] if E.alg.exact else prod[k], E.alg, E.p))
    return out


def closed_form_invariant(E: EtaRep, U: StandardGenSys, V: StandardGenSys) -> InvariantValue:
    """Prediction for canonical lifts from the eigenvalues of the eta images.

    Each diagonal block ``d(X_h^e)/dX_h`` has determinant
    ``S_e(mu^u) S_e(mu^-u)`` with ``S_e(x) = 1 + x + ... + x^(e-1)`` and
    ``mu^(+-1)`` the eigenvalues of ``eta(s_h)``; when the missing indices
    differ, the rebuilt row contributes ``S_{v_j}`` of ``eta(s_j)`` times
    ``S_{z_k}`` of ``eta(s_k)^u_k``.
    """
    P = E.P
    alg, p = E.alg, E.p
    a, b = E.pair
    j, k = U.missing, V.missing
    z = mod_inverse_exponents(P, U)

    def eig(h: int, e: int):
        """Value vector of the eigenvalue ``mu_h^e``."""
        if alg.exact:
            N = alg.N
            if h == a:
                lam = E.quotient_rep.exact_images[a - 1][0][0].lift(N)
                return alg.mul(alg.scalar(lam ** (e % N), (p,)), alg.t_power(e))
            if h == b:
                return alg.t_power(-e)
            lam = E.quotient_rep.exact_images[h - 1][0][0].lift(N)
            return alg.scalar(lam ** (e % N), (p,))
        if h == a:
            lam = E.quotient_rep.generator_images[a - 1][0, 0]
            return lam ** e * alg.t ** e
        if h == b:
            return alg.t ** (-e)
        g, kk = E.quotient_rep.root_choices[h - 1]
        if g == 2 or h == E.quotient_rep.killed_index:
            lam = -1.0 if g == 2 else 1.0
        else:
            lam = np.exp(2j * np.pi * kk / g)
        return np.full(p, complex(lam) ** e)

    def S(h: int, u: int, n: int):
        """S_n(mu_h^u) * S_n(mu_h^-u) as values."""
        one = alg.ones((p,))
        tot1, tot2 = alg.zeros((p,)), alg.zeros((p,))
        x1, x2 = eig(h, u), eig(h, -u)
        c1, c2 = one, one
        for _ in range(n):
            tot1 = tot1 + c1
            tot2 = tot2 + c2
            c1 = alg.mul(c1, x1)
            c2 = alg.mul(c2, x2)
        return alg.mul(tot1, tot2)

    D = alg.ones((p,))
    for h in range(1, P.ell + 1):
        if h in (j, k):
            continue
        D = alg.mul(D, S(h, U.u[h - 1], z[h - 1] * V.u[h - 1]))
    if j != k:
        D = alg.mul(D, S(j, 1, V.u[j - 1]))
        D = alg.mul(D, S(k, U.u[k - 1], z[k - 1]))
    piv = E.pi_values(U.u[a - 1], U.u[b - 1])
    return InvariantValue(alg.mul(piv, D), alg, p)


def extract_r(inv: InvariantValue, v1: int, v2: int, E: EtaRep, tol: float = APPROX_TOL):
    """Real r with ``inv = Pi(v1, v2, r)``, or None.

    Exact backend: r is a real cyclotomic number (CycNumber).  Approximate
    backend: least squares with residual and ``|Im r| <= 1e-7`` checks; the
    complex r is returned as ``(r, imag_part)`` via :func:`extract_r_complex`.
    """
    res = extract_r_complex(inv, v1, v2, E, tol)
    if res is None:
        return None
    r, im = res
    if E.alg.exact:
        return r
    return r if abs(im) <= 1e-7 else None


def extract_r_complex(inv: InvariantValue, v1: int, v2: int, E: EtaRep, tol: float = APPROX_TOL):
    if gcd(v1, E.gamma_a) != 1 or gcd(v2, E.p) != 1:
        return None
    base = E.pi_values(v1, v2)
    if E.alg.exact:
        alg = E.alg
        bv = alg.unpack(base)
        iv = alg.unpack(inv.values)
        r = None
        for x, y in zip(bv, iv):
            if not x.is_zero():
                r = y / x
                break
        if r is None:
            return None
        for x, y in zip(bv, iv):
            if x * r != y:
                return None
        if not r.is_real():
            return None
        return r, 0.0
    bc = np.fft.ifft(base)
    ic = np.fft.ifft(inv.values)
    denom = np.vdot(bc, bc)
    if abs(denom) < 1e-300:
        return None
    r = np.vdot(bc, ic) / denom
    resid = float(np.max(np.abs(ic - r * bc)))
    scale = max(1.0, float(np.max(np.abs(ic))))
    if resid > tol * scale:
        return None
    return float(r.real), float(r.imag)


@dataclass
class AnnihilationReport:
    entries: list = field(default_factory=list)   # (relator, variable, max deviation)
    passed: bool = True

    def to_dict(self):
        return {"pass": self.passed,
                "entries": [{"relator": r, "variable": c, "deviation": d} for r, c, d in self.entries]}


def relator_annihilation_check(E: EtaRep, P: FuchsianPresentation, U: StandardGenSys,
                               tol: float = APPROX_TOL, raise_on_fail: bool = True
                               ) -> AnnihilationReport:
    """``Pi(u_a, u_b, 1) * eta(dR/dX_c) = 0`` for every kernel relator R and variable c."""
    ev = Evaluator(E, U)
    a, b = E.pair
    piv = E.pi_values(U.u[a - 1], U.u[b - 1])
    rep = AnnihilationReport()
    for name, R in kernel_relators(P, U):
        row = ev.jacobian_row(R)
        for c, blk in enumerate(row, 1):
            prod = E.alg.mul(piv[..., None, None], blk)
            if E.alg.exact:
                dev = 0.0 if not np.any(prod != 0) else float("inf")
            else:
                dev = float(np.max(np.abs(np.fft.ifft(prod, axis=0))))
            rep.entries.append((name, c, dev))
            if dev > tol:
                rep.passed = False
                if raise_on_fail:
                    raise CheckFailed(f"relator {name}, variable X{c}: deviation {dev}")
    return rep


# -- certification ---------------------------------------------------------------------------

@dataclass
class PositionResult:
    index: int
    status: str                         # Consistent / Inequivalent / Skipped
    partner: int | None = None
    p: int | None = None
    reason: str = ""
    witness_u: object = None           # InvariantValue (serialized lazily)
    witness_v: object = None
    r: object = None

    def to_dict(self) -> dict:
        d = {"index": self.index, "status": self.status, "partner": self.partner,
             "p": self.p, "reason": self.reason}
        if self.witness_u is not None:
            d["witness_u"] = self.witness_u.to_json()
            d["witness_v"] = self.witness_v.to_json()
        if self.r is not None:
            d["r"] = str(self.r) if isinstance(self.r, CycNumber) else self.r
        return d


@dataclass
class CertifiedReport:
    verdict: str                     # Inequivalent / Consistent / ExceptionalUnknown / SkippedEverywhere
    positions: list
    backend: str
    tolerance: float
    reduced: bool = False            # canonical 4-quotient applied
    condition: str | None = None

    def to_dict(self) -> dict:
        return {"verdict": self.verdict, "backend": self.backend, "tolerance": self.tolerance,
                "reduced_to_canonical_four_quotient": self.reduced,
                "condition": self.condition,
                "positions": [p.to_dict() for p in self.positions]}

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


def _reduce_system(S: StandardGenSys, P: FuchsianPresentation) -> StandardGenSys:
    return StandardGenSys(S.missing, tuple(x % g if i != S.missing else 1
                                           for i, (x, g) in enumerate(zip(S.u, P.exponents), 1)))


class Certifier:
    """Caches one eta per position so that many (U, V) pairs share the setup."""

    def __init__(self, P: FuchsianPresentation, backend: str = "auto", seed=0,
                 tol: float = APPROX_TOL, root_choices=None):
        self.P0 = P
        self.exceptional, self.condition = is_exceptional(P)
        Ps = quotient(P, CANONICAL_FOUR)
        self.reduced = Ps.exponents != P.exponents
        self.P = Ps
        self.backend = backend
        self.seed = seed
        self.tol = tol
        self.root_choices = root_choices
        self._eta: dict = {}

    def eta(self, index: int):
        if index not in self._eta:
            P = self.P
            if P.exponents[index - 1] < 5:
                self._eta[index] = (None, f"gamma_{index} = {P.exponents[index - 1]} < 5")
            else:
                ch = choose_pair(P, index)
                if ch is None:
                    self._eta[index] = (None, "no partner sharing a divisor >= 3")
                else:
                    try:
                        E = build_eta(P, (index, ch[0]), self.root_choices,
                                      seed=self.seed + index, backend=self.backend)
                        self._eta[index] = (E, "")
                    except BuildFailed as e:
                        self._eta[index] = (None, f"representation build failed: {e}")
        return self._eta[index]

    def certify_many(self, U: StandardGenSys, Vs: Sequence[StandardGenSys]) -> list[CertifiedReport]:
        P = self.P
        if self.exceptional:
            return [CertifiedReport(EXCEPTIONAL_UNKNOWN, [], self.backend, self.tol,
                                    self.reduced, self.condition) for _ in Vs]
        U = _reduce_system(U, P)
        Vs = [_reduce_system(V, P) for V in Vs]
        per_v: list = [[] for _ in Vs]
        backend_used = set()
        for i in range(1, P.ell + 1):
            E, reason = self.eta(i)
            if E is None:
                for res in per_v:
                    res.append(PositionResult(i, SKIPPED, reason=reason))
                continue
            backend_used.add(E.backend)
            a, b = E.pair
            ev = Evaluator(E, U)
            ref = InvariantValue(E.pi_values(U.u[a - 1], U.u[b - 1]), E.alg, E.p)
            lifts = [standard_lifts(P, U, V) for V in Vs]
            invs = invariant_batch(E, U, lifts, ev)
            for V, inv, res in zip(Vs, invs, per_v):
                same = inv.equals(ref, self.tol)
                r = extract_r(inv, V.u[a - 1], V.u[b - 1], E, self.tol)
                res.append(PositionResult(i, CONSISTENT if same else INEQUIVALENT, b, E.p,
                                          witness_u=None if same else ref,
                                          witness_v=None if same else inv, r=r))
        out = []
        bk = "/".join(sorted(backend_used)) or self.backend
        for res in per_v:
            stats = {r.status for r in res}
            if INEQUIVALENT in stats:
                verdict = INEQUIVALENT
            elif CONSISTENT in stats:
                verdict = CONSISTENT
            else:
                verdict = "SkippedEverywhere"
            out.append(CertifiedReport(verdict, res, bk, self.tol, self.reduced))
        return out

    def certify(self, U: StandardGenSys, V: StandardGenSys) -> CertifiedReport:
        return self.certify_many(U, [V])[0]


def certify_inequivalence(P: FuchsianPresentation, U: StandardGenSys, V: StandardGenSys,
                          backend: str = "auto", seed=0, tol: float = APPROX_TOL) -> CertifiedReport:
    """Compare invariants of U and V at every position that admits eta."""
    U.validate(P)
    V.validate(P)
    return Certifier(P, backend, seed, tol).certify(U, V)


# -- numeric verification of Nielsen certificates ----------------------------------------------

def symbol_images(P: FuchsianPresentation, seed) -> dict:
    """Numeric images of all symbols under a random cyclic-faithful representation."""
    extra = (-1) ** P.crosscaps
    R = build_cyclic_faithful(P.base(), seed=seed, extra_sign=extra)
    imgs = {i: R.generator_images[i - 1] for i in range(1, P.ell + 1)}
    for r in range(1, P.aux_count + 1):
        imgs[P.ell + r] = np.diag([1j, -1j]) if P.crosscaps else np.eye(2, dtype=complex)
    return imgs


def verify_certificate(P: FuchsianPresentation, cert, seeds: Sequence[int] = (0, 1, 2, 3, 4),
                       tol: float = 1e-7) -> bool:
    """Replay the certificate on matrices under several seeded representations."""
    for seed in seeds:
        imgs = symbol_images(P, seed)

        def ev(w: FreeWord):
            return w.map(imgs, np.eye(2, dtype=complex), lambda x, y: x @ y, np.linalg.inv)

        cur = [ev(w) for w in cert.source]
        for op in cert.ops:
            cur = apply_nielsen(cur, op, mul=lambda x, y: x @ y, inv=np.linalg.inv)
        target = [ev(w) for w in cert.target]
        for A, B in zip(cur, target):
            if np.max(np.abs(A - B)) > tol * max(1.0, float(np.max(np.abs(B)))):
                return False
    return True


def perturb_lifts(P: FuchsianPresentation, U: StandardGenSys, lifts: Sequence[FreeWord], rng,
                  max_insertions: int = 2, conj_length: int = 3) -> list[FreeWord]:
    """Multiply each lift on the left by random conjugates of kernel relators.

    The perturbed words represent the same group elements, so any invariant
    computed from them must not change.
    """
    from .words import perturb_by_relators, random_word
    rels = [R for _, R in kernel_relators(P, U)]
    arity = P.ell - 1 + P.aux_count
    out = []
    for W in lifts:
        ins = []
        for _ in range(int(rng.integers(1, max_insertions + 1))):
            conj = random_word(rng, arity, int(rng.integers(conj_length + 1)))
            R = rels[int(rng.integers(len(rels)))]
            ins.append((conj, R, int(rng.choice([-1, 1]))))
        out.append(perturb_by_relators(W, ins))
    return out
