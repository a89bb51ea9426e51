"""Quick property suites behind ``fuchsnielsen selftest``."""
from __future__ import annotations

import itertools
import time
from dataclasses import dataclass

import numpy as np

from .cyclo import pi_injectivity_scan
from .invariant import (CONSISTENT, INEQUIVALENT, Certifier, Evaluator, InvariantValue,
                        build_eta, invariant_product, perturb_lifts, relator_annihilation_check,
                        standard_lifts, verify_certificate)
from .presentation import (EQUIVALENT, StandardGenSys, criterion_decide, parse_presentation)
from .sl2rep import build_cyclic_faithful, verify_rep
from .words import (apply_chain, basis, chain_jacobian, invert_chain, jacobian, random_chain)


@dataclass
class SuiteResult:
    name: str
    passed: bool
    detail: str
    seconds: float

    def to_dict(self) -> dict:
        return {"name": self.name, "pass": self.passed, "detail": self.detail,
                "seconds": round(self.seconds, 3)}


def _fox(rng) -> tuple[bool, str]:
    for _ in range(100):
        n = int(rng.integers(1, 6))
        ops = random_chain(rng, n, 8)
        words = apply_chain(basis(n), ops)
        if chain_jacobian(ops, n) != jacobian(words, n):
            return False, f"chain rule failed for {ops}"
        if apply_chain(words, invert_chain(ops)) != basis(n):
            return False, f"inverse chain failed for {ops}"
    return True, "100 random chains"


def _scan(rng) -> tuple[bool, str]:
    rep = pi_injectivity_scan(5, 10, [1, 2])
    return rep.ok, f"{rep.triple_count} triples, {len(rep.violations)} violations"


def _reps(rng) -> tuple[bool, str]:
    cases = [[5, 5, 5], [3, 3, 4, 5], [7, 3, 3, 3], [5, 5, 5, 5, 5], [8, 7, 5, 4, 3]]
    for ex in cases:
        P = parse_presentation({"exponents": ex})
        R = build_cyclic_faithful(P, seed=int(rng.integers(1 << 30)))
        if not verify_rep(R, P).passed:
            return False, f"representation check failed for {ex}"
    return True, f"{len(cases)} presentations"


def _invariant(rng) -> tuple[bool, str]:
    P = parse_presentation({"exponents": [5, 5, 5, 5, 5]})
    E = build_eta(P, (1, 2))
    U = StandardGenSys(5, (2, 1, 3, 1, 1))
    V = StandardGenSys(2, (4, 1, 2, 1, 4))
    relator_annihilation_check(E, P, U)
    ev = Evaluator(E, U)
    lifts = standard_lifts(P, U, V)
    ref = invariant_product(E, P, U, lifts, ev)
    for _ in range(10):
        if not invariant_product(E, P, U, perturb_lifts(P, U, lifts, rng), ev).equals(ref):
            return False, "lift perturbation changed the invariant"
    piu = InvariantValue(E.pi_values(U.u[0], U.u[1]), E.alg, E.p)
    for _ in range(10):
        W = apply_chain(basis(4), random_chain(rng, 4, 8))
        if not invariant_product(E, P, U, W, ev).equals(piu):
            return False, "Nielsen chain changed the invariant"
    return True, f"{E.backend} backend, 10 perturbations, 10 chains"


def _agreement(rng) -> tuple[bool, str]:
    P = parse_presentation({"exponents": [5, 5, 5, 5, 5]})
    C = Certifier(P)
    systems = [StandardGenSys(5, tuple(v) + (1,)) for v in itertools.product(range(1, 5), repeat=4)]
    picks = rng.choice(len(systems), size=6, replace=False)
    n = 0
    for i in picks:
        U = systems[int(i)]
        for V, rep in zip(systems, C.certify_many(U, systems)):
            d = criterion_decide(P, U, V)
            want = CONSISTENT if d.verdict == EQUIVALENT else INEQUIVALENT
            if rep.verdict != want:
                return False, f"decide/certify disagree on u={U.u} v={V.u}"
            if d.certificate is not None and n < 20:
                if not verify_certificate(P, d.certificate):
                    return False, f"certificate failed numerically for u={U.u} v={V.u}"
                n += 1
    return True, f"{len(picks) * len(systems)} pairs, {n} certificates replayed"


SUITES = [("fox-calculus", _fox), ("pi-scan", _scan), ("representations", _reps),
          ("invariant", _invariant), ("decide-vs-certify", _agreement)]


def run_selftest(seed: int = 0) -> list[SuiteResult]:
    rng = np.random.default_rng(seed)
    out = []
    for name, fn in SUITES:
        t0 = time.perf_counter()
        try:
            ok, detail = fn(rng)
        except Exception as exc:  # report, do not abort the remaining suites
            ok, detail = False, f"{type(exc).__name__}: {exc}"
        out.append(SuiteResult(name, ok, detail, time.perf_counter() - t0))
    return out
