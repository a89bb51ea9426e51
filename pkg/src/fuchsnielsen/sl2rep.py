"""Cyclic-faithful representations into SL2(C).

Every generator ``s_i`` with ``gamma_i >= 3`` must go to a conjugate of
``diag(zeta_i, zeta_i^-1)`` for a primitive ``gamma_i``-th root ``zeta_i``,
order-2 generators go to ``-I`` and the product of all images in index order
must be the identity.  Since ``-I`` is central, the images of the
``gamma >= 3`` generators must multiply to ``(-1)^n I``.

The numeric builder realizes this chain by chain: partial products get random
generic traces, each new factor is solved in the eigenbasis of the current
partial product (see :func:`fricke_triple`), and the last factor closes the
product.  An exact builder produces upper-triangular images with cyclotomic
integer entries whenever the eigenvalues can be chosen to multiply to the
required sign.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from math import gcd
from typing import Sequence

import numpy as np

from .cyclo import CycNumber, zeta_power
from .errors import (BuildFailed, DegenerateDiagonalization, NumericFailure,
                     PreconditionViolated)
from .presentation import FuchsianPresentation

DET_TOL = 1e-10
I2 = np.eye(2, dtype=complex)


def _lcm(a: int, b: int) -> int:
    return a * b // gcd(a, b)


def primitive_matrix(zeta: complex) -> np.ndarray:
    """``M(zeta) = diag(zeta, zeta^-1)``."""
    zeta = complex(zeta)
    if abs(abs(zeta) - 1) > 1e-9:
        raise PreconditionViolated(f"|zeta| must be 1, got {abs(zeta)}")
    return np.array([[zeta, 0], [0, 1 / zeta]], dtype=complex)


def root_of_unity(gamma: int, k: int) -> complex:
    return complex(np.exp(2j * np.pi * k / gamma))


def _eigen_root(x: complex) -> complex:
    """A root of ``lam^2 - x lam + 1``."""
    disc = np.sqrt(complex(x) * x - 4)
    lam = (x + disc) / 2
    if abs(lam) < 1e-300:
        lam = (x - disc) / 2
    return complex(lam)


def _solve_in_eigenbasis(lam: complex, y: complex, z: complex, b: complex) -> np.ndarray:
    """B with tr B = y and tr(diag(lam, 1/lam) B) = z, upper-right entry b."""
    li = 1 / lam
    a = (z - li * y) / (lam - li)
    d = y - a
    c = (a * d - 1) / b
    return np.array([[a, b], [c, d]], dtype=complex)


def fricke_triple(x: complex, y: complex, z: complex, rng=None) -> tuple[np.ndarray, np.ndarray]:
    """Matrices A, B in SL2(C) with ``tr A = x``, ``tr B = y``, ``tr AB = z``.

    For ``x != +-2`` A is diagonal.  For ``x = +-2`` A is (minus) a unipotent
    Jordan block and the pair may be reducible.
    """
    x, y, z = complex(x), complex(y), complex(z)
    b = 1.0 + 0j if rng is None else complex(rng.normal() + 1j * rng.normal())
    if abs(x - 2) < 1e-12 or abs(x + 2) < 1e-12:
        s = 1.0 if abs(x - 2) < 1e-12 else -1.0
        A = s * np.array([[1, 1], [0, 1]], dtype=complex)
        c = s * z - y
        if abs(c) > 1e-12:
            a = d = y / 2
            B = np.array([[a, (a * d - 1) / c], [c, d]], dtype=complex)
        else:
            a = _eigen_root(y)
            B = np.array([[a, 0], [0, 1 / a]], dtype=complex)
        return A, B
    lam = _eigen_root(x)
    A = np.array([[lam, 0], [0, 1 / lam]], dtype=complex)
    B = _solve_in_eigenbasis(lam, y, z, b)
    errs = (abs(np.trace(A) - x), abs(np.trace(B) - y), abs(np.trace(A @ B) - z),
            abs(np.linalg.det(B) - 1))
    if max(errs) > 1e-8 * max(1.0, abs(x), abs(y), abs(z)):
        raise NumericFailure(f"fricke_triple({x}, {y}, {z}) residuals {errs}")
    return A, B


def _eigvecs(P: np.ndarray, lam: complex) -> np.ndarray:
    """Columns: eigenvectors of the SL2 matrix P for lam and 1/lam."""
    p, q, r, s = P[0, 0], P[0, 1], P[1, 0], P[1, 1]
    cols = []
    for mu in (lam, 1 / lam):
        v1 = np.array([q, mu - p])
        v2 = np.array([mu - s, r])
        v = v1 if np.linalg.norm(v1) >= np.linalg.norm(v2) else v2
        cols.append(v / np.linalg.norm(v))
    return np.array(cols).T


@dataclass
class RepData:
    generator_images: list                     # one 2x2 complex array per generator s_i
    root_choices: list                         # (gamma_i, k_i); k_i = 0 for killed / order 2
    killed_index: int | None = None
    diagonalized_index: int | None = None
    residual: float = 0.0
    target_sign: int = 1                       # product of all s-images = target_sign * I
    attempts: int = 1
    exact_images: list | None = None           # optional 2x2 CycNumber matrices
    conductor: int | None = None

    @property
    def is_exact(self) -> bool:
        return self.exact_images is not None

    def image(self, i: int) -> np.ndarray:
        return self.generator_images[i - 1]

    def to_dict(self) -> dict:
        return {
            "images": [[[[float(v.real), float(v.imag)] for v in row] for row in A]
                       for A in self.generator_images],
            "root_choices": [list(rc) for rc in self.root_choices],
            "killed_index": self.killed_index,
            "diagonalized_index": self.diagonalized_index,
            "residual": self.residual,
            "target_sign": self.target_sign,
            "attempts": self.attempts,
            "exact": self.is_exact,
        }


def _default_roots(P: FuchsianPresentation, root_choices) -> list:
    if root_choices is None:
        return [(g, 1 if g >= 3 else 0) for g in P.exponents]
    rc = []
    for item, g in zip(root_choices, P.exponents):
        k = item[1] if isinstance(item, (tuple, list)) else int(item)
        rc.append((g, k))
    if len(rc) != P.ell:
        raise PreconditionViolated("one root choice per generator is required")
    for g, k in rc:
        if g >= 3 and gcd(k, g) != 1:
            raise PreconditionViolated(f"k={k} does not give a primitive {g}-th root")
    return rc


def _chain(targets: list, sign: int, rng, first_diagonal: complex | None):
    """Matrices A_1..A_m with prescribed traces and product ``sign * I``.

    ``targets`` holds the traces; if ``first_diagonal`` is given A_1 is
    exactly ``M(first_diagonal)``.
    """
    m = len(targets)
    if first_diagonal is not None:
        A1 = primitive_matrix(first_diagonal)
    else:
        A1, _ = fricke_triple(targets[0], 2.5, 2.5)
    mats = [A1]
    Pk = A1
    for k in range(1, m - 1):
        y = targets[k]
        if k == m - 2:
            z = sign * targets[m - 1]
        else:
            while True:
                z = complex(rng.uniform(-3, 3) + 1j * rng.uniform(-3, 3))
                if abs(z * z - 4) > 0.25:
                    break
        x = np.trace(Pk)
        if abs(x * x - 4) < 1e-6:
            raise NumericFailure("partial product is (nearly) parabolic")
        lam = _eigen_root(x)
        Q = _eigvecs(Pk, lam)
        b = complex(rng.normal() + 1j * rng.normal())
        Bp = _solve_in_eigenbasis(lam, y, z, b)
        B = Q @ Bp @ np.linalg.inv(Q)
        mats.append(B)
        Pk = Pk @ B
    mats.append(sign * np.linalg.inv(Pk))
    return mats


def _balance(mats: list, keep_diagonal: bool = True) -> list:
    """Conjugate by a diagonal matrix to even out off-diagonal magnitudes."""
    upper = sum(abs(M[0, 1]) for M in mats)
    lower = sum(abs(M[1, 0]) for M in mats)
    if upper < 1e-300 or lower < 1e-300:
        return mats
    s2 = np.sqrt(lower / upper)
    D = np.diag([np.sqrt(s2), 1 / np.sqrt(s2)]).astype(complex)
    Di = np.linalg.inv(D)
    return [D @ M @ Di for M in mats]


def _product(mats: Sequence[np.ndarray]) -> np.ndarray:
    out = I2.copy()
    for M in mats:
        out = out @ M
    return out


def _build(P: FuchsianPresentation, rc: list, killed: int | None, diag: int | None,
           seed, budget: int, extra_sign: int) -> RepData:
    L = P.ell
    alive = [i for i in range(1, L + 1) if i != killed]
    order2 = [i for i in alive if P.exponents[i - 1] == 2]
    big = [i for i in alive if P.exponents[i - 1] >= 3]
    sign = (-1) ** len(order2) * extra_sign
    if diag is not None:
        if P.exponents[diag - 1] < 3:
            raise DegenerateDiagonalization(f"generator {diag} has order {P.exponents[diag - 1]}")
        if diag not in big:
            raise PreconditionViolated("diagonalized generator must survive")
        start = big.index(diag)
        chain = big[start:] + big[:start]
    else:
        chain = big
    roots = {i: root_of_unity(rc[i - 1][0], rc[i - 1][1]) for i in big}
    images: dict = {i: -I2.copy() for i in order2}
    if killed is not None:
        images[killed] = I2.copy()
    rng = np.random.default_rng(seed)
    m = len(chain)
    attempt = 0
    last_err = "no attempt"
    while attempt < budget:
        attempt += 1
        try:
            if m == 0:
                if sign != 1:
                    raise BuildFailed("no generator of order >= 3 can absorb the sign -1")
                mats = []
            elif m == 1:
                raise BuildFailed("a single generator of order >= 3 cannot close the product")
            elif m == 2:
                i1, i2 = chain
                t1 = roots[i1] + 1 / roots[i1]
                t2 = roots[i2] + 1 / roots[i2]
                if abs(sign * t1 - t2) > 1e-9:
                    raise BuildFailed("two generators need matching traces up to the sign")
                A1 = primitive_matrix(roots[i1])
                mats = [A1, sign * np.linalg.inv(A1)]
            else:
                targets = [roots[i] + 1 / roots[i] for i in chain]
                mats = _chain(targets, sign, rng, roots[chain[0]] if diag is not None else None)
                mats = _balance(mats)
        except NumericFailure as e:
            last_err = str(e)
            continue
        for i, M in zip(chain, mats):
            images[i] = M
        imgs = [images[i] for i in range(1, L + 1)]
        residual = float(np.max(np.abs(_product(imgs) - extra_sign * I2)))
        rep = RepData(imgs, rc, killed, diag, residual, extra_sign, attempt)
        ver = verify_rep(rep, P)
        if ver.passed:
            return rep
        last_err = f"verification failed: {ver.summary()}"
        if m <= 2:
            break
    raise BuildFailed(f"no representation of {P.describe()} after {attempt} attempts ({last_err})")


def build_cyclic_faithful(P: FuchsianPresentation, root_choices=None, seed=0,
                          budget: int = 50, extra_sign: int = 1) -> RepData:
    """Numeric cyclic-faithful representation of the plain presentation.

    ``extra_sign`` lets callers fold a central factor of the long relator
    (e.g. ``c_i^2 -> -I``) into the target: the product of the ``s``-images is
    then ``extra_sign * I``.
    """
    rc = _default_roots(P, root_choices)
    return _build(P, rc, None, None, seed, budget, extra_sign)


def build_quotient_rep(P: FuchsianPresentation, killed_index: int, diagonalized_index: int,
                       root_choices=None, seed=0, budget: int = 50,
                       extra_sign: int = 1) -> RepData:
    """Representation of ``G / <<s_killed>>`` with ``s_diag -> M(zeta)`` exactly."""
    if killed_index == diagonalized_index:
        raise PreconditionViolated("killed and diagonalized generators must differ")
    rc = _default_roots(P, root_choices)
    rc[killed_index - 1] = (P.exponents[killed_index - 1], 0)
    return _build(P, rc, killed_index, diagonalized_index, seed, budget, extra_sign)


def _choose_exact_roots(gammas: list, fixed_first: int, sign: int, N: int) -> list | None:
    """Exponents k_i (k_0 fixed) with sum k_i N/gamma_i = 0 or N/2 mod N."""
    target = 0 if sign == 1 else N // 2
    steps = [N // g for g in gammas]
    reach = [{(fixed_first * steps[0]) % N: None}]
    for g, st in zip(gammas[1:], steps[1:]):
        nxt: dict = {}
        for res in reach[-1]:
            for k in range(1, g):
                if gcd(k, g) == 1:
                    r2 = (res + k * st) % N
                    if r2 not in nxt:
                        nxt[r2] = (res, k)
        reach.append(nxt)
    if target not in reach[-1]:
        return None
    ks = []
    res = target
    for level in range(len(gammas) - 1, 0, -1):
        prev, k = reach[level][res]
        ks.append(k)
        res = prev
    return [fixed_first] + ks[::-1]


def exact_quotient_rep(P: FuchsianPresentation, killed_index: int, diagonalized_index: int,
                       first_root: int = 1, extra_sign: int = 1) -> RepData | None:
    """Upper-triangular cyclic-faithful representation over ``Z[zeta_N]``.

    Returns None when no choice of primitive eigenvalues multiplies to the
    required sign.  The diagonalized generator maps to ``M(zeta^first_root)``.
    """
    L = P.ell
    if killed_index == diagonalized_index:
        raise PreconditionViolated("killed and diagonalized generators must differ")
    if P.exponents[diagonalized_index - 1] < 3:
        raise DegenerateDiagonalization("diagonalized generator must have order >= 3")
    alive = [i for i in range(1, L + 1) if i != killed_index]
    order2 = [i for i in alive if P.exponents[i - 1] == 2]
    big = [i for i in alive if P.exponents[i - 1] >= 3]
    sign = (-1) ** len(order2) * extra_sign
    start = big.index(diagonalized_index)
    chain = big[start:] + big[:start]
    gammas = [P.exponents[i - 1] for i in chain]
    N = 2
    for g in gammas:
        N = _lcm(N, g)
    ks = _choose_exact_roots(gammas, first_root, sign, N)
    if ks is None:
        return None
    one, zero = CycNumber.one(N), CycNumber.zero(N)
    lam = [zeta_power(N, k * (N // g)) for k, g in zip(ks, gammas)]
    lam_inv = [zeta_power(N, -k * (N // g)) for k, g in zip(ks, gammas)]
    # top-right entry of the product is sum_i b_i * prod_{j<i} lam_j * prod_{j>i} lam_j^-1
    coeff = []
    for i in range(len(chain)):
        c = one
        for j in range(i):
            c = c * lam[j]
        for j in range(i + 1, len(chain)):
            c = c * lam_inv[j]
        coeff.append(c)
    b = [zero] + [one] * (len(chain) - 1)
    if len(chain) >= 2:
        rest = zero
        for i in range(len(chain) - 1):
            rest = rest + coeff[i] * b[i]
        b[-1] = -rest * coeff[-1].inverse()
    exact: dict = {}
    for idx, i in enumerate(chain):
        exact[i] = [[lam[idx], b[idx]], [zero, lam_inv[idx]]]
    for i in order2:
        exact[i] = [[-one, zero], [zero, -one]]
    exact[killed_index] = [[one, zero], [zero, one]]
    exact_list = [exact[i] for i in range(1, L + 1)]
    imgs = [np.array([[e.to_complex() for e in row] for row in M]) for M in exact_list]
    rc = []
    kmap = dict(zip(chain, ks))
    for i in range(1, L + 1):
        rc.append((P.exponents[i - 1], kmap.get(i, 0)))
    residual = float(np.max(np.abs(_product(imgs) - extra_sign * I2)))
    # exact check of the product relation
    prod = [[one, zero], [zero, one]]
    for M in exact_list:
        prod = [[prod[r][0] * M[0][c] + prod[r][1] * M[1][c] for c in range(2)] for r in range(2)]
    want = [[one * extra_sign, zero], [zero, one * extra_sign]]
    if prod != want:
        raise BuildFailed("exact triangular construction violated the product relation")
    return RepData(imgs, rc, killed_index, diagonalized_index, residual, extra_sign, 1,
                   exact_list, N)


@dataclass
class VerificationReport:
    trace_errors: list
    order_errors: list
    det_errors: list
    residual: float
    tol: float
    flagged: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.flagged and self.residual <= self.tol

    def summary(self) -> str:
        return f"residual={self.residual:.3g} flagged={self.flagged}"

    def to_dict(self) -> dict:
        return {
            "trace_errors": self.trace_errors, "order_errors": self.order_errors,
            "det_errors": self.det_errors, "residual": self.residual,
            "tol": self.tol, "flagged": self.flagged, "pass": self.passed,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


def verify_rep(R: RepData, P: FuchsianPresentation, tol: float = 1e-9,
               order_tol: float = 1e-8) -> VerificationReport:
    """Check traces, orders, determinants and the product relation."""
    terr, oerr, derr, flagged = [], [], [], []
    for i, (A, (g, k)) in enumerate(zip(R.generator_images, R.root_choices), 1):
        A = np.asarray(A, dtype=complex)
        dev = abs(np.linalg.det(A) - 1)
        derr.append(float(dev))
        if i == R.killed_index:
            te = float(np.max(np.abs(A - I2)))
            oe = te
        elif g == 2:
            te = float(np.max(np.abs(A + I2)))
            oe = te
        else:
            z = root_of_unity(g, k)
            te = float(abs(np.trace(A) - (z + 1 / z)))
            oe = float(np.max(np.abs(np.linalg.matrix_power(A, g) - I2)))
            if gcd(k, g) != 1:
                flagged.append(i)
        terr.append(te)
        oerr.append(oe)
        scale = max(1.0, float(np.max(np.abs(A))))
        if te > tol or oe > order_tol * scale ** 2 or dev > DET_TOL * scale ** 2:
            if i not in flagged:
                flagged.append(i)
    prod = _product([np.asarray(A, dtype=complex) for A in R.generator_images])
    residual = float(np.max(np.abs(prod - R.target_sign * I2)))
    return VerificationReport(terr, oerr, derr, residual, tol, flagged)
