"""Fuchsian-type presentations, their signature types and quotients, the
exceptional classifier, the sufficient conditions for cyclic-faithful
representations, the congruence criterion for Nielsen equivalence of standard
generating systems, and explicit Nielsen chains for the equivalent case.

Presentations have generators ``s_1..s_l`` with ``s_i^gamma_i = 1`` and one
long relator ``s_1 ... s_l Q`` where ``Q`` is

* empty (plain case),
* ``[a_1, b_1] ... [a_g, b_g]`` with ``[a, b] = a b a^-1 b^-1`` (genus g),
* ``c_1^2 ... c_h^2`` (h crosscaps), or
* an arbitrary word ``W`` in auxiliary generators ``d_1..d_q``.

Auxiliary generators are numbered after the ``s_i``: symbol ``l + r`` is the
r-th auxiliary generator (``a_1, b_1, a_2, ...``, or ``c_1..c_h``, or
``d_1..d_q``).
"""
from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from itertools import permutations
from math import gcd
from typing import Sequence

from .errors import (IncompatibleSystems, InvalidExponent, MalformedRecord,
                     NotEquivalent, NotInvertible)
from .words import (FreeWord, Invert, LeftMultiply, Permute, RightMultiply,
                    apply_nielsen)

FULL_TWO = "FullTwo"
CANONICAL_FOUR = "CanonicalFour"


@dataclass(frozen=True)
class FuchsianPresentation:
    exponents: tuple[int, ...]
    genus: int = 0
    crosscaps: int = 0
    extra_relator: FreeWord | None = None  # word over d_1..d_q (indices 1..q)

    def __post_init__(self):
        object.__setattr__(self, "exponents", tuple(int(g) for g in self.exponents))
        for g in self.exponents:
            if g < 2:
                raise InvalidExponent(f"exponent {g} < 2")
        if self.genus < 0 or self.crosscaps < 0:
            raise MalformedRecord("genus and crosscaps must be non-negative")
        extras = [self.genus > 0, self.crosscaps > 0, self.extra_relator is not None]
        if sum(extras) > 1:
            raise MalformedRecord("at most one of genus, crosscaps, extra relator may be set")

    @property
    def ell(self) -> int:
        return len(self.exponents)

    @property
    def m(self) -> int:
        return sum(1 for g in self.exponents if g >= 3)

    @property
    def n(self) -> int:
        return sum(1 for g in self.exponents if g == 2)

    @property
    def is_plain(self) -> bool:
        return self.genus == 0 and self.crosscaps == 0 and self.extra_relator is None

    @property
    def aux_count(self) -> int:
        if self.genus:
            return 2 * self.genus
        if self.crosscaps:
            return self.crosscaps
        if self.extra_relator is not None:
            return self.extra_relator.max_generator()
        return 0

    def aux_names(self) -> list[str]:
        if self.genus:
            return [f"{c}{j}" for j in range(1, self.genus + 1) for c in "ab"]
        if self.crosscaps:
            return [f"c{i}" for i in range(1, self.crosscaps + 1)]
        return [f"d{k}" for k in range(1, self.aux_count + 1)]

    def symbol_names(self) -> list[str]:
        return [f"s{i}" for i in range(1, self.ell + 1)] + self.aux_names()

    def tail_word(self) -> FreeWord:
        """The factor ``Q`` of the long relator, on symbols ``l+1, l+2, ...``."""
        L = self.ell
        if self.genus:
            out = FreeWord.identity()
            for j in range(self.genus):
                a, b = FreeWord.gen(L + 2 * j + 1), FreeWord.gen(L + 2 * j + 2)
                out = out * a * b * a.inverse() * b.inverse()
            return out
        if self.crosscaps:
            return FreeWord([(L + i, 2) for i in range(1, self.crosscaps + 1)])
        if self.extra_relator is not None:
            return FreeWord([(g + L, e) for g, e in self.extra_relator.syllables])
        return FreeWord.identity()

    def long_relator(self) -> FreeWord:
        return FreeWord([(i, 1) for i in range(1, self.ell + 1)]) * self.tail_word()

    def rotated_relator(self, j: int) -> FreeWord:
        """``s_{j+1} ... s_l Q s_1 ... s_{j-1}``, so that ``s_j`` equals its inverse."""
        L = self.ell
        after = FreeWord([(i, 1) for i in range(j + 1, L + 1)])
        before = FreeWord([(i, 1) for i in range(1, j)])
        return after * self.tail_word() * before

    def base(self) -> FuchsianPresentation:
        """The presentation with the auxiliary part removed (exponents only)."""
        return FuchsianPresentation(self.exponents)

    def describe(self) -> str:
        s = "(" + ",".join(map(str, self.exponents)) + ")"
        if self.genus:
            s += f" genus={self.genus}"
        if self.crosscaps:
            s += f" crosscaps={self.crosscaps}"
        if self.extra_relator is not None:
            s += " W=" + self.extra_relator.to_string("d")
        return s

    def to_dict(self) -> dict:
        d = {"exponents": list(self.exponents), "genus": self.genus, "crosscaps": self.crosscaps}
        if self.extra_relator is not None:
            d["extra_relator"] = self.extra_relator.to_string("d")
        return d


_D_TOKEN = re.compile(r"d(\d+)(?:\^\(?(-?\d+)\)?)?")


def parse_relator(text: str) -> FreeWord:
    """Parse a word over ``d1..dq`` such as ``"d1 d2 d1^-1 d2^-1"``."""
    text = text.strip()
    if text in ("", "1"):
        return FreeWord.identity()
    pos, syl = 0, []
    compact = re.sub(r"[\s*]+", " ", text).strip()
    for tok in compact.split(" "):
        pos = 0
        while pos < len(tok):
            m = _D_TOKEN.match(tok, pos)
            if not m:
                raise MalformedRecord(f"cannot parse relator {text!r}")
            g = int(m.group(1))
            if g < 1:
                raise MalformedRecord(f"bad generator d{g}")
            syl.append((g, int(m.group(2)) if m.group(2) else 1))
            pos = m.end()
    return FreeWord(syl)


def parse_presentation(record) -> FuchsianPresentation:
    """Build a presentation from a mapping with ``exponents`` and optional
    ``genus``, ``crosscaps``, ``extra_relator`` (keys may carry a ``group.`` prefix)."""
    if not isinstance(record, dict):
        raise MalformedRecord("record must be a mapping")
    rec = {k.split(".", 1)[1] if k.startswith("group.") else k: v for k, v in record.items()}
    if "exponents" not in rec:
        raise MalformedRecord("missing exponents")
    ex = rec["exponents"]
    if isinstance(ex, str):
        try:
            ex = [int(x) for x in ex.replace("[", "").replace("]", "").split(",") if x.strip()]
        except ValueError as e:
            raise MalformedRecord(f"bad exponents {rec['exponents']!r}") from e
    try:
        ex = [int(x) for x in ex]
        genus = int(rec.get("genus", 0) or 0)
        cross = int(rec.get("crosscaps", 0) or 0)
    except (TypeError, ValueError) as e:
        raise MalformedRecord(str(e)) from e
    rel = rec.get("extra_relator")
    W = parse_relator(rel) if isinstance(rel, str) and rel.strip() else (rel or None)
    for g in ex:
        if g < 2:
            raise InvalidExponent(f"exponent {g} < 2")
    P = FuchsianPresentation(tuple(ex), genus, cross, W)
    if P.is_plain and P.ell < 3:
        raise MalformedRecord("a plain presentation needs at least three generators")
    if P.ell < 1:
        raise MalformedRecord("at least one exponent is required")
    return P


# -- signature types and quotients ---------------------------------------------

@dataclass(frozen=True)
class SignatureType:
    sorted_exponents: tuple[int, ...]
    n: int

    @property
    def m(self) -> int:
        return len(self.sorted_exponents)

    def __str__(self):
        body = ",".join(map(str, self.sorted_exponents)) or "∅"
        return f"({body} | {self.n})"


def signature_type(P: FuchsianPresentation) -> SignatureType:
    big = tuple(sorted((g for g in P.exponents if g >= 3), reverse=True))
    return SignatureType(big, P.n + P.crosscaps)


def quotient(P: FuchsianPresentation, kind: str) -> FuchsianPresentation:
    """Full 2-quotient (halve every even exponent, drop trivialized generators)
    or canonical 4-quotient (halve exponents that are 2 mod 4 and above 2)."""
    if kind == FULL_TWO:
        ex = [g // 2 if g % 2 == 0 else g for g in P.exponents]
        ex = [g for g in ex if g != 1]
    elif kind == CANONICAL_FOUR:
        ex = [g // 2 if (g % 4 == 2 and g != 2) else g for g in P.exponents]
    else:
        raise ValueError(f"unknown quotient kind {kind!r}")
    return FuchsianPresentation(tuple(ex), P.genus, P.crosscaps, P.extra_relator)


# -- exceptional classifier ------------------------------------------------------

def star(entry: int, k: int) -> bool:
    """``entry`` matches ``k*``: equal to the odd number k or to 2k."""
    return k % 2 == 1 and (entry == k or entry == 2 * k)


def free_star(entry: int) -> bool:
    """``entry`` matches ``s*`` for some odd s, i.e. is not divisible by 4."""
    return entry % 4 != 0


def _assign(entries: tuple, patterns: Sequence) -> bool:
    """Is there a bijection entries -> patterns with every predicate true?"""
    for perm in set(permutations(entries)):
        if all(pred(e) for pred, e in zip(patterns, perm)):
            return True
    return False


_PQ = lambda e: star(e, 3) or star(e, 5)  # noqa: E731
_THREE = lambda e: star(e, 3)  # noqa: E731
_FIVE = lambda e: star(e, 5)  # noqa: E731
_FOUR = lambda e: e == 4  # noqa: E731
_ANY = lambda e: True  # noqa: E731


@lru_cache(maxsize=None)
def _classify(big: tuple, n: int) -> str | None:
    m = len(big)
    if m <= 3:
        return "a"
    if n % 2 == 0 and m == 4:
        # one free entry plus {5*, 4, 3*}; covers (g,6,5,4) and (g,5,4,3) and
        # stays stable under halving of exponents that are 2 mod 4
        if _assign(big, (_ANY, _FIVE, _FOUR, _THREE)):
            return "b"
        if big[2] == 4 and big[3] == 4:
            return "c"
    if n % 2 == 1 and m == 4:
        return "d"
    if n % 2 == 1 and m == 5:
        if _assign(big, (free_star, free_star, _PQ, _PQ, _THREE)):
            return "e"
    if n % 2 == 1 and m == 6:
        if _assign(big, (free_star, _PQ, _THREE, _THREE, _THREE, _THREE)):
            return "f"
    return None


def classify_signature(sig: SignatureType) -> str | None:
    return _classify(tuple(sig.sorted_exponents), sig.n)


def is_exceptional(P: FuchsianPresentation) -> tuple[bool, str | None]:
    """Evaluate the exceptional conditions (a)-(f); returns (flag, label).

    With an extra relator the test runs on the quotient by all ``d_k``, i.e. on
    the exponent list alone; with crosscaps ``n`` is replaced by ``n + h``.
    """
    sig = signature_type(P.base() if P.extra_relator is not None else P)
    label = classify_signature(sig)
    return label is not None, label


# -- sufficient conditions for cyclic-faithful representations ----------------------

@dataclass(frozen=True)
class RepCase:
    label: str | None
    lhs: Fraction   # sum over gamma >= 3 of 1/gamma'
    rhs: int        # m - 2

    def __str__(self):
        return f"{self.label or 'none'} (sum 1/gamma' = {self.lhs} vs m-2 = {self.rhs})"


def rep_case(P: FuchsianPresentation) -> RepCase:
    big = [g for g in P.exponents if g >= 3]
    m = len(big)
    n = P.n + P.crosscaps
    lhs = sum((Fraction(1, g // 2 if g % 2 == 0 else g) for g in big), Fraction(0))
    rhs = m - 2
    all_odd = all(g % 2 == 1 for g in big)
    label = None
    if any(g % 4 == 0 for g in big) and lhs < rhs:
        label = "1"
    elif all_odd and n % 2 == 0 and m >= 4:
        label = "2(i)"
    elif all_odd and n % 2 == 0 and m == 3 and any(g >= 5 for g in big):
        label = "2(ii)"
    elif all_odd and n % 2 == 1 and m >= 6:
        label = "3"
    elif all_odd and n % 2 == 1 and m == 5 and any(g >= 7 for g in big):
        label = "4(i)"
    elif all_odd and n % 2 == 1 and m == 5 and sum(g >= 5 for g in big) >= 2:
        label = "4(ii)"
    elif all_odd and n % 2 == 1 and m == 4 and sum(g >= 7 for g in big) >= 2:
        label = "4(iii)"
    elif all_odd and n % 2 == 1 and m == 4 and all(g >= 5 for g in big):
        label = "4(iv)"
    return RepCase(label, lhs, rhs)


# -- standard generating systems ------------------------------------------------------

@dataclass(frozen=True)
class StandardGenSys:
    """Exponent vector ``u`` of a standard generating system missing ``s_j``.

    ``u`` has one entry per generator ``s_1..s_l``; the entry at the missing
    index is the formal value 1.
    """

    missing: int
    u: tuple[int, ...]

    def __post_init__(self):
        u = tuple(int(x) for x in self.u)
        if not 1 <= self.missing <= len(u):
            raise IncompatibleSystems(f"missing index {self.missing} outside 1..{len(u)}")
        u = u[:self.missing - 1] + (1,) + u[self.missing:]
        object.__setattr__(self, "u", u)

    @classmethod
    def from_present(cls, missing: int, present: Sequence[int]) -> StandardGenSys:
        """Build from the ``l - 1`` exponents listed in index order skipping ``missing``."""
        present = [int(x) for x in present]
        if not 1 <= missing <= len(present) + 1:
            raise IncompatibleSystems(f"missing index {missing} outside 1..{len(present) + 1}")
        u = present[:missing - 1] + [1] + present[missing - 1:]
        return cls(missing, tuple(u))

    @property
    def ell(self) -> int:
        return len(self.u)

    def present(self) -> list[int]:
        return [x for i, x in enumerate(self.u, 1) if i != self.missing]

    def indices(self) -> list[int]:
        return [i for i in range(1, self.ell + 1) if i != self.missing]

    def validate(self, P: FuchsianPresentation) -> None:
        if self.ell != P.ell:
            raise IncompatibleSystems(f"system has {self.ell} entries, presentation has {P.ell}")
        for i, (x, g) in enumerate(zip(self.u, P.exponents), 1):
            if i != self.missing and gcd(x, g) != 1:
                raise IncompatibleSystems(f"gcd(u_{i}={x}, gamma_{i}={g}) != 1")

    def symbol_tuple(self, P: FuchsianPresentation) -> list[FreeWord]:
        """``(s_i^u_i for i != j) + auxiliary generators`` as words in the symbols."""
        out = [FreeWord.gen(i, self.u[i - 1]) for i in self.indices()]
        out += [FreeWord.gen(P.ell + r) for r in range(1, P.aux_count + 1)]
        return out

    def __str__(self):
        return f"missing={self.missing} u={self.present()}"


def mod_inverse_exponents(P: FuchsianPresentation, U: StandardGenSys) -> list[int]:
    """``z_i`` in ``1..gamma_i`` with ``z_i u_i = 1 mod gamma_i`` (formal ``z_j = 1``)."""
    out = []
    for i, (x, g) in enumerate(zip(U.u, P.exponents), 1):
        if i == U.missing:
            out.append(1)
            continue
        if gcd(x, g) != 1:
            raise NotInvertible(f"u_{i}={x} is not invertible modulo {g}")
        z = pow(x, -1, g)
        out.append(z if z else g)
    return out


# -- Nielsen certificates ---------------------------------------------------------------

def power_normal_form(W: FreeWord, P: FuchsianPresentation) -> FreeWord:
    """Reduce exponents of every ``s_i`` syllable into ``(-gamma_i/2, gamma_i/2]``."""
    L = P.ell
    cur = W
    while True:
        syl = []
        for g, e in cur.syllables:
            if g <= L:
                gam = P.exponents[g - 1]
                e %= gam
                if e > gam // 2:
                    e -= gam
            syl.append((g, e))
        nxt = FreeWord(syl)
        if nxt == cur:
            return cur
        cur = nxt


@dataclass
class NielsenCertificate:
    ops: list
    tuples: list                    # intermediate tuples (words), tuples[0] is the source
    source: list                    # U's symbol tuple
    target: list                    # V's symbol tuple
    substituted: int | None = None  # position (in V order) whose entry used the long relator
    relator_target: FreeWord | None = None  # word the substituted entry must reduce to

    @property
    def length(self) -> int:
        return len(self.ops)

    def replay(self) -> list:
        out = list(self.source)
        for op in self.ops:
            out = apply_nielsen(out, op)
        return out

    def verify_symbolic(self, P: FuchsianPresentation) -> bool:
        """Replay and compare with V's tuple modulo the power relators.

        The one entry that was rebuilt from the long relator is compared with
        the recorded relator expression instead of ``s_j^(+-1)``.
        """
        final = self.replay()
        if len(final) != len(self.target):
            return False
        for pos, (a, b) in enumerate(zip(final, self.target)):
            if pos == self.substituted:
                b = self.relator_target
            if power_normal_form(a, P) != power_normal_form(b, P):
                return False
        return True

    def to_list(self) -> list[str]:
        return [op.describe() for op in self.ops]

    def __str__(self):
        return "; ".join(self.to_list()) if self.ops else "(empty chain)"


def _congruent(a: int, b: int, g: int) -> tuple[bool, bool]:
    return (a - b) % g == 0, (a + b) % g == 0


def nielsen_certificate(P: FuchsianPresentation, U: StandardGenSys,
                        V: StandardGenSys) -> NielsenCertificate:
    """Explicit chain of elementary Nielsen operations taking U's tuple to V's.

    Valid in G: intermediate entries are words in the symbols, equal in G to
    the advertised group elements.
    """
    U.validate(P)
    V.validate(P)
    gam = P.exponents
    L = P.ell
    for i in range(L):
        plus, minus = _congruent(U.u[i], V.u[i], gam[i])
        if not (plus or minus):
            raise NotEquivalent(f"u_{i + 1}={U.u[i]} and v_{i + 1}={V.u[i]} differ mod {gam[i]}")
    j, k = U.missing, V.missing
    z = mod_inverse_exponents(P, U)
    ops: list = []
    cur = U.symbol_tuple(P)
    tuples = [list(cur)]

    def do(op):
        nonlocal cur
        cur = apply_nielsen(cur, op)
        ops.append(op)
        tuples.append(list(cur))

    # tuple position (1-based) of each symbol under U's ordering
    upos = {i: p for p, i in enumerate(U.indices(), 1)}
    for r in range(1, P.aux_count + 1):
        upos[L + r] = L - 1 + r

    def multiply_by(target: int, sym: int, eps: int, right: bool):
        """target <- target * sym^eps (or sym^eps * target), using the tuple entry for sym."""
        src = upos[sym]
        if sym <= L:
            g = gam[sym - 1]
            e = (eps * z[sym - 1]) % g
            if e > g // 2:
                e -= g
        else:
            e = eps
        if e < 0:
            do(Invert(src))
        for _ in range(abs(e)):
            do(RightMultiply(target, src) if right else LeftMultiply(target, src))
        if e < 0:
            do(Invert(src))

    substituted = None
    relator_target = None
    if j != k:
        tk = upos[k]
        # make entry k equal to s_k^-1
        if (U.u[k - 1] - 1) % gam[k - 1] == 0:
            do(Invert(tk))
        # s_j = (rotated relator)^-1 = A s_k^-1 B
        expr = P.rotated_relator(j).inverse()
        letters = list(expr.letters())
        cut = letters.index(-k)
        A, B = letters[:cut], letters[cut + 1:]
        for a in B:
            multiply_by(tk, abs(a), 1 if a > 0 else -1, right=True)
        for a in reversed(A):
            multiply_by(tk, abs(a), 1 if a > 0 else -1, right=False)
        # entry now equals s_j in G; match the sign of v_j
        vj_plus, _ = _congruent(1, V.u[j - 1], gam[j - 1])
        relator_target = expr
        if not vj_plus:
            do(Invert(tk))
            relator_target = expr.inverse()
        # reorder: the entry at tk plays s_j, everything else keeps its symbol
        slot_symbol = {p: i for i, p in upos.items()}
        slot_symbol[tk] = j
        order = V.indices() + [L + r for r in range(1, P.aux_count + 1)]
        inv_slot = {s: p for p, s in slot_symbol.items()}
        perm = tuple(inv_slot[s] for s in order)
        if perm != tuple(range(1, len(perm) + 1)):
            do(Permute(perm))
        vpos = {s: p for p, s in enumerate(order, 1)}
        substituted = vpos[j] - 1
    else:
        vpos = upos
    for i in range(1, L + 1):
        if i in (j, k):
            continue
        plus, minus = _congruent(U.u[i - 1], V.u[i - 1], gam[i - 1])
        if not plus:
            do(Invert(vpos[i]))
    return NielsenCertificate(ops, tuples, U.symbol_tuple(P), V.symbol_tuple(P),
                              substituted, relator_target)


# -- the congruence criterion --------------------------------------------------------------

EQUIVALENT = "Equivalent"
INEQUIVALENT = "Inequivalent"
EXCEPTIONAL_UNKNOWN = "ExceptionalUnknown"


@dataclass
class DecisionReport:
    verdict: str
    condition: str | None
    checks: list                       # (i, u_i, v_i, passed)
    signature: str = ""
    certificate: NielsenCertificate | None = None
    notes: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "verdict": self.verdict,
            "condition": self.condition,
            "signature": self.signature,
            "checks": [{"i": i, "u": u, "v": v, "pass": ok} for i, u, v, ok in self.checks],
            "certificate": self.certificate.to_list() if self.certificate else [],
            "notes": self.notes,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


def congruence_checks(P: FuchsianPresentation, U: StandardGenSys, V: StandardGenSys) -> list:
    out = []
    for i, g in enumerate(P.exponents, 1):
        plus, minus = _congruent(U.u[i - 1], V.u[i - 1], g)
        out.append((i, U.u[i - 1], V.u[i - 1], plus or minus))
    return out


def criterion_decide(P: FuchsianPresentation, U: StandardGenSys,
                     V: StandardGenSys) -> DecisionReport:
    """Nielsen (in)equivalence by the congruences ``u_i = +-v_i mod gamma_i``."""
    if U.ell != V.ell or U.ell != P.ell:
        raise IncompatibleSystems("generating systems and presentation disagree on l")
    U.validate(P)
    V.validate(P)
    exc, label = is_exceptional(P)
    checks = congruence_checks(P, U, V)
    sig = str(signature_type(P.base() if P.extra_relator is not None else P))
    if exc:
        return DecisionReport(EXCEPTIONAL_UNKNOWN, label, checks, sig)
    if all(ok for *_, ok in checks):
        cert = nielsen_certificate(P, U, V)
        return DecisionReport(EQUIVALENT, None, checks, sig, cert)
    return DecisionReport(INEQUIVALENT, None, checks, sig)


def all_standard_systems(P: FuchsianPresentation, missing: int) -> list[StandardGenSys]:
    """Every standard system missing ``s_missing`` with exponents in ``1..gamma_i - 1``."""
    from itertools import product
    ranges = []
    for i, g in enumerate(P.exponents, 1):
        if i == missing:
            ranges.append([1])
        else:
            ranges.append([x for x in range(1, g) if gcd(x, g) == 1] or [1])
    return [StandardGenSys(missing, tuple(u)) for u in product(*ranges)]
