"""Free group words, Nielsen operations and Fox calculus over ZF(X).

Generators are numbered ``1, 2, ...``; a letter is a nonzero integer whose
sign is the exponent sign (``-2`` is ``X2^-1``).  Words are stored in
syllable form, i.e. as runs ``(generator, exponent)``, so that large powers
stay cheap.  Tuple positions used by Nielsen operations are 1-based as well,
which keeps ``jacobian_of_elementary(op, n)`` aligned with ``(X1, ..., Xn)``.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Callable, Iterable, Iterator, Sequence

from .errors import FuchsNielsenError


class IndexOutOfRange(FuchsNielsenError, ValueError):
    pass


def _push(stack: list, g: int, e: int) -> None:
    if e == 0:
        return
    if stack and stack[-1][0] == g:
        e += stack.pop()[1]
        if e:
            stack.append((g, e))
    else:
        stack.append((g, e))


class FreeWord:
    """A freely reduced word in syllable form."""

    __slots__ = ("syllables", "_hash")

    def __init__(self, syllables: Iterable[tuple[int, int]] = ()):
        stack: list = []
        for g, e in syllables:
            if g <= 0:
                raise ValueError(f"generator index must be positive, got {g}")
            _push(stack, int(g), int(e))
        self.syllables: tuple[tuple[int, int], ...] = tuple(stack)
        self._hash = None

    @classmethod
    def _raw(cls, syllables: tuple) -> FreeWord:
        # caller guarantees the syllables are already reduced
        w = cls.__new__(cls)
        w.syllables = syllables
        w._hash = None
        return w

    @classmethod
    def identity(cls) -> FreeWord:
        return cls._raw(())

    @classmethod
    def gen(cls, g: int, e: int = 1) -> FreeWord:
        return cls(((g, e),))

    def __eq__(self, other):
        if not isinstance(other, FreeWord):
            return NotImplemented
        return self.syllables == other.syllables

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(self.syllables)
        return self._hash

    def __len__(self):
        return sum(abs(e) for _, e in self.syllables)

    def __bool__(self):
        return bool(self.syllables)

    def is_identity(self) -> bool:
        return not self.syllables

    def __mul__(self, other: FreeWord) -> FreeWord:
        if not isinstance(other, FreeWord):
            return NotImplemented
        stack = list(self.syllables)
        for g, e in other.syllables:
            _push(stack, g, e)
        return FreeWord._raw(tuple(stack))

    def inverse(self) -> FreeWord:
        return FreeWord._raw(tuple((g, -e) for g, e in reversed(self.syllables)))

    def __pow__(self, k: int) -> FreeWord:
        if k < 0:
            return self.inverse() ** (-k)
        out = FreeWord.identity()
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def letters(self) -> Iterator[int]:
        for g, e in self.syllables:
            letter = g if e > 0 else -g
            for _ in range(abs(e)):
                yield letter

    def generators(self) -> set[int]:
        return {g for g, _ in self.syllables}

    def max_generator(self) -> int:
        return max((g for g, _ in self.syllables), default=0)

    def sort_key(self):
        """Shortlex key on the letter expansion."""
        return (len(self), tuple(self.letters()))

    def substitute(self, images: Sequence[FreeWord]) -> FreeWord:
        """Apply the homomorphism ``X_g -> images[g - 1]``."""
        out = FreeWord.identity()
        for g, e in self.syllables:
            out = out * images[g - 1] ** e
        return out

    def map(self, images, one, mul: Callable, inv: Callable):
        """Evaluate the word in any group given generator images."""
        out = one
        for g, e in self.syllables:
            x = images[g] if e > 0 else inv(images[g])
            for _ in range(abs(e)):
                out = mul(out, x)
        return out

    def to_string(self, symbol: str = "X") -> str:
        if not self.syllables:
            return "1"
        parts = []
        for g, e in self.syllables:
            parts.append(f"{symbol}{g}" if e == 1 else f"{symbol}{g}^{e}")
        return " ".join(parts)

    def __str__(self):
        return self.to_string()

    def __repr__(self):
        return f"FreeWord({self.to_string()!r})"


_TOKEN = re.compile(r"\s*([A-Za-z]+)(\d+)(?:\^\(?(-?\d+)\)?)?\s*\*?")


def parse_word(text: str, symbol: str | None = None) -> FreeWord:
    """Parse ``"X1 X2^-1 X1^3"`` (also ``*``-separated) into a word.

    When ``symbol`` is given every token must use that letter prefix.
    """
    text = text.strip()
    if text in ("", "1"):
        return FreeWord.identity()
    pos = 0
    syl = []
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise ValueError(f"cannot parse word {text!r} at position {pos}")
        name, idx, exp = m.group(1), int(m.group(2)), m.group(3)
        if symbol is not None and name != symbol:
            raise ValueError(f"unexpected symbol {name!r} in {text!r}")
        syl.append((idx, int(exp) if exp is not None else 1))
        pos = m.end()
    return FreeWord(syl)


def normalize(letters: Iterable[int]) -> FreeWord:
    """Freely reduce a sequence of signed generator indices."""
    stack: list = []
    for a in letters:
        if a == 0:
            raise ValueError("0 is not a letter")
        _push(stack, abs(a), 1 if a > 0 else -1)
    return FreeWord._raw(tuple(stack))


class FoxPolynomial:
    """An element of the integral group ring ZF(X)."""

    __slots__ = ("terms",)

    def __init__(self, terms=None):
        clean = {}
        if terms:
            items = terms.items() if isinstance(terms, dict) else terms
            for w, c in items:
                if c:
                    c = clean.get(w, 0) + c
                    if c:
                        clean[w] = c
                    else:
                        clean.pop(w, None)
        self.terms: dict[FreeWord, int] = clean

    @classmethod
    def zero(cls) -> FoxPolynomial:
        return cls()

    @classmethod
    def one(cls) -> FoxPolynomial:
        return cls({FreeWord.identity(): 1})

    @classmethod
    def of(cls, w: FreeWord, c: int = 1) -> FoxPolynomial:
        return cls({w: c})

    def is_zero(self) -> bool:
        return not self.terms

    def __eq__(self, other):
        if isinstance(other, int):
            other = FoxPolynomial.one() * other
        if isinstance(other, FreeWord):
            other = FoxPolynomial.of(other)
        if not isinstance(other, FoxPolynomial):
            return NotImplemented
        return self.terms == other.terms

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    def __add__(self, other: FoxPolynomial) -> FoxPolynomial:
        out = dict(self.terms)
        for w, c in other.terms.items():
            c = out.get(w, 0) + c
            if c:
                out[w] = c
            else:
                del out[w]
        return _fox_raw(out)

    def __neg__(self) -> FoxPolynomial:
        return _fox_raw({w: -c for w, c in self.terms.items()})

    def __sub__(self, other: FoxPolynomial) -> FoxPolynomial:
        return self + (-other)

    def __mul__(self, other) -> FoxPolynomial:
        if isinstance(other, int):
            return FoxPolynomial({w: c * other for w, c in self.terms.items()})
        if isinstance(other, FreeWord):
            other = FoxPolynomial.of(other)
        if not isinstance(other, FoxPolynomial):
            return NotImplemented
        out: dict = {}
        for w1, c1 in self.terms.items():
            for w2, c2 in other.terms.items():
                w = w1 * w2
                c = out.get(w, 0) + c1 * c2
                if c:
                    out[w] = c
                else:
                    out.pop(w, None)
        return _fox_raw(out)

    def __rmul__(self, other) -> FoxPolynomial:
        if isinstance(other, int):
            return self * other
        if isinstance(other, FreeWord):
            return FoxPolynomial.of(other) * self
        return NotImplemented

    def substitute(self, images: Sequence[FreeWord]) -> FoxPolynomial:
        out: dict = {}
        for w, c in self.terms.items():
            v = w.substitute(images)
            out[v] = out.get(v, 0) + c
        return FoxPolynomial(out)

    def sorted_terms(self) -> list[tuple[FreeWord, int]]:
        return sorted(self.terms.items(), key=lambda wc: wc[0].sort_key())

    def augmentation(self) -> int:
        return sum(self.terms.values())

    def __str__(self):
        if not self.terms:
            return "0"
        parts = []
        for w, c in self.sorted_terms():
            ws = "" if w.is_identity() else w.to_string()
            if not ws:
                parts.append(f"{c:+d}")
            elif c == 1:
                parts.append(f"+{ws}")
            elif c == -1:
                parts.append(f"-{ws}")
            else:
                parts.append(f"{c:+d}*{ws}")
        s = " ".join(parts)
        return s[1:] if s.startswith("+") else s

    __repr__ = __str__


def _fox_raw(terms: dict) -> FoxPolynomial:
    p = FoxPolynomial.__new__(FoxPolynomial)
    p.terms = terms
    return p


def _check_arity(W: FreeWord, arity: int) -> None:
    if W.max_generator() > arity:
        raise IndexOutOfRange(f"word {W} uses a generator beyond arity {arity}")


def fox_derivative(W: FreeWord, i: int, arity: int) -> FoxPolynomial:
    """Fox derivative of ``W`` with respect to ``X_i``.

    Runs of ``X_i^k`` contribute the geometric sum ``1 + X_i + ... + X_i^(k-1)``
    (``-X_i^-1 - ... - X_i^-k`` for ``k < 0``) behind the current prefix.
    """
    if not 1 <= i <= arity:
        raise IndexOutOfRange(f"variable index {i} outside 1..{arity}")
    _check_arity(W, arity)
    out: dict = {}
    prefix: tuple = ()
    for g, e in W.syllables:
        if g == i:
            if e > 0:
                rng, sign = range(0, e), 1
            else:
                rng, sign = range(-1, e - 1, -1), -1
            for m in rng:
                w = FreeWord._raw(prefix + ((g, m),)) if m else FreeWord._raw(prefix)
                c = out.get(w, 0) + sign
                if c:
                    out[w] = c
                else:
                    del out[w]
        prefix = prefix + ((g, e),)
    return _fox_raw(out)


class FoxJacobian:
    """Matrix of Fox derivatives; row k holds the derivatives of word k."""

    def __init__(self, entries: Sequence[Sequence[FoxPolynomial]]):
        self.entries = tuple(tuple(row) for row in entries)

    @property
    def shape(self) -> tuple[int, int]:
        return len(self.entries), len(self.entries[0]) if self.entries else 0

    @classmethod
    def identity(cls, n: int) -> FoxJacobian:
        one, zero = FoxPolynomial.one(), FoxPolynomial.zero()
        return cls([[one if r == c else zero for c in range(n)] for r in range(n)])

    def __getitem__(self, rc):
        r, c = rc
        return self.entries[r][c]

    def __matmul__(self, other: FoxJacobian) -> FoxJacobian:
        n, k = self.shape
        k2, m = other.shape
        if k != k2:
            raise ValueError("shape mismatch")
        rows = []
        for r in range(n):
            row = []
            for c in range(m):
                acc = FoxPolynomial.zero()
                for t in range(k):
                    a = self.entries[r][t]
                    if a.terms:
                        b = other.entries[t][c]
                        if b.terms:
                            acc = acc + a * b
                row.append(acc)
            rows.append(row)
        return FoxJacobian(rows)

    def substitute(self, images: Sequence[FreeWord]) -> FoxJacobian:
        return FoxJacobian([[e.substitute(images) for e in row] for row in self.entries])

    def __eq__(self, other):
        if not isinstance(other, FoxJacobian):
            return NotImplemented
        return self.entries == other.entries

    def is_identity(self) -> bool:
        n, m = self.shape
        return n == m and self == FoxJacobian.identity(n)

    def __str__(self):
        return "\n".join("[" + ", ".join(str(e) for e in row) + "]" for row in self.entries)


def jacobian(words: Sequence[FreeWord], arity: int) -> FoxJacobian:
    return FoxJacobian([[fox_derivative(w, i, arity) for i in range(1, arity + 1)]
                        for w in words])


# -- Nielsen operations ------------------------------------------------------

@dataclass(frozen=True)
class Permute:
    """``result[k] = items[perm[k] - 1]``."""
    perm: tuple[int, ...]

    def inverse_ops(self) -> list:
        inv = [0] * len(self.perm)
        for k, src in enumerate(self.perm):
            inv[src - 1] = k + 1
        return [Permute(tuple(inv))]

    def describe(self) -> str:
        return f"permute{self.perm}"


@dataclass(frozen=True)
class RightMultiply:
    """Replace entry ``i`` by ``entry_i * entry_j``."""
    i: int
    j: int

    def inverse_ops(self) -> list:
        return [Invert(self.j), RightMultiply(self.i, self.j), Invert(self.j)]

    def describe(self) -> str:
        return f"x{self.i} <- x{self.i} x{self.j}"


@dataclass(frozen=True)
class LeftMultiply:
    """Replace entry ``i`` by ``entry_j * entry_i``."""
    i: int
    j: int

    def inverse_ops(self) -> list:
        return [Invert(self.j), LeftMultiply(self.i, self.j), Invert(self.j)]

    def describe(self) -> str:
        return f"x{self.i} <- x{self.j} x{self.i}"


@dataclass(frozen=True)
class Invert:
    i: int

    def inverse_ops(self) -> list:
        return [self]

    def describe(self) -> str:
        return f"x{self.i} <- x{self.i}^-1"


NielsenOp = Permute | RightMultiply | LeftMultiply | Invert


def _validate(op, n: int) -> None:
    if isinstance(op, Permute):
        if sorted(op.perm) != list(range(1, n + 1)):
            raise IndexOutOfRange(f"{op} is not a permutation of 1..{n}")
    elif isinstance(op, Invert):
        if not 1 <= op.i <= n:
            raise IndexOutOfRange(f"{op} outside arity {n}")
    else:
        if not (1 <= op.i <= n and 1 <= op.j <= n) or op.i == op.j:
            raise IndexOutOfRange(f"{op} invalid for arity {n}")


def apply_nielsen(items: Sequence, op, mul: Callable | None = None,
                  inv: Callable | None = None) -> list:
    """Apply one elementary Nielsen operation to a tuple.

    ``mul``/``inv`` default to ``*`` and ``.inverse()`` so the same code
    replays certificates on words and on matrices.
    """
    n = len(items)
    _validate(op, n)
    mul = mul or (lambda a, b: a * b)
    inv = inv or (lambda a: a.inverse())
    out = list(items)
    if isinstance(op, Permute):
        return [items[k - 1] for k in op.perm]
    if isinstance(op, Invert):
        out[op.i - 1] = inv(items[op.i - 1])
    elif isinstance(op, RightMultiply):
        out[op.i - 1] = mul(items[op.i - 1], items[op.j - 1])
    else:
        out[op.i - 1] = mul(items[op.j - 1], items[op.i - 1])
    return out


def apply_chain(items: Sequence, ops: Iterable, **kw) -> list:
    out = list(items)
    for op in ops:
        out = apply_nielsen(out, op, **kw)
    return out


def invert_chain(ops: Sequence) -> list:
    out = []
    for op in reversed(ops):
        out.extend(op.inverse_ops())
    return out


def basis(n: int) -> list[FreeWord]:
    return [FreeWord.gen(i) for i in range(1, n + 1)]


def jacobian_of_elementary(op, arity: int) -> FoxJacobian:
    return jacobian(apply_nielsen(basis(arity), op), arity)


def chain_jacobian(ops: Sequence, arity: int) -> FoxJacobian:
    """Jacobian of the chain's result, assembled by the chain rule.

    Step ``m`` contributes its elementary Jacobian with ``X`` replaced by the
    tuple reached before that step; factors multiply newest-first.
    """
    current = basis(arity)
    total = FoxJacobian.identity(arity)
    for op in ops:
        step = jacobian_of_elementary(op, arity).substitute(current)
        total = step @ total
        current = apply_nielsen(current, op)
    return total


def perturb_by_relators(W: FreeWord, insertions: Iterable[tuple[FreeWord, FreeWord, int]]
                        ) -> FreeWord:
    """Return ``(V1 R1^e1 V1^-1) ... (Vq Rq^eq Vq^-1) W``."""
    out = FreeWord.identity()
    for V, R, eps in insertions:
        if eps not in (1, -1):
            raise ValueError("insertion sign must be +1 or -1")
        out = out * V * R ** eps * V.inverse()
    return out * W


def perturbation_ideal_term(insertions: Sequence[tuple[FreeWord, FreeWord, int]],
                            i: int, arity: int) -> FoxPolynomial:
    """The relator part of the derivative change caused by ``perturb_by_relators``.

    Equals ``sum_h eps_h C_1...C_{h-1} V_h R_h^{(eps_h-1)/2} dR_h/dX_i`` with
    ``C_h = V_h R_h^eps_h V_h^-1``; modulo the relators this reduces to the
    left combination ``sum_h eps_h V_h dR_h/dX_i``.
    """
    out = FoxPolynomial.zero()
    prefix = FreeWord.identity()
    for V, R, eps in insertions:
        left = prefix * V if eps == 1 else prefix * V * R.inverse()
        out = out + (left * fox_derivative(R, i, arity)) * eps
        prefix = prefix * V * R ** eps * V.inverse()
    return out


# -- random generation (tests, sweeps) ----------------------------------------

def random_word(rng, arity: int, length: int, generators: Sequence[int] | None = None
                ) -> FreeWord:
    gens = list(generators) if generators is not None else list(range(1, arity + 1))
    letters = []
    for _ in range(length):
        g = gens[int(rng.integers(len(gens)))]
        letters.append(g if rng.random() < 0.5 else -g)
    return normalize(letters)


def random_nielsen_op(rng, arity: int):
    kind = int(rng.integers(4))
    if arity == 1:
        kind = 3
    if kind == 0:
        return Permute(tuple(int(x) + 1 for x in rng.permutation(arity)))
    i = int(rng.integers(arity)) + 1
    if kind == 3:
        return Invert(i)
    j = int(rng.integers(arity - 1)) + 1
    if j >= i:
        j += 1
    return RightMultiply(i, j) if kind == 1 else LeftMultiply(i, j)


def random_chain(rng, arity: int, max_length: int) -> list:
    return [random_nielsen_op(rng, arity) for _ in range(int(rng.integers(max_length + 1)))]
