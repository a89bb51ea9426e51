import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fuchsnielsen.cyclo import RingElement
from fuchsnielsen.errors import CheckFailed, NoSharedDivisor
from fuchsnielsen.invariant import (CONSISTENT, INEQUIVALENT, SKIPPED, Evaluator, InvariantValue,
                                    build_eta, certify_inequivalence, closed_form_invariant,
                                    eval_eta, extract_r, invariant_product, kernel_relators,
                                    perturb_lifts, relator_annihilation_check, standard_lifts)
from fuchsnielsen.presentation import StandardGenSys, parse_presentation
from fuchsnielsen.words import (FoxPolynomial, FreeWord, apply_chain, basis, fox_derivative,
                                perturbation_ideal_term, perturb_by_relators, random_chain,
                                random_word)

pp = parse_presentation
P5 = pp({"exponents": [5, 5, 5, 5, 5]})
X = FreeWord.gen


@pytest.fixture(scope="module")
def E5():
    return build_eta(P5, (1, 2), backend="exact")


def sys(missing, present):
    return StandardGenSys.from_present(missing, present)


# -- eta ------------------------------------------------------------------------------------

def test_eta_displayed_images(E5):
    assert E5.p == 5 and E5.backend == "exact"
    imgs = E5.generator_images
    z = E5.zeta1
    zero = RingElement.zero(5)
    assert imgs[1][0][0] == RingElement.monomial(5, z, 1)
    assert imgs[1][1][1] == RingElement.monomial(5, z.inverse(), -1)
    assert imgs[1][0][1] == zero and imgs[1][1][0] == zero
    assert imgs[2][0][0] == RingElement.monomial(5, 1, -1)
    assert imgs[2][1][1] == RingElement.monomial(5, 1, 1)
    assert imgs[2][0][1] == zero and imgs[2][1][0] == zero


def test_eta_generator_orders_and_dets(E5):
    alg = E5.alg
    for s in range(1, 6):
        M = E5.images[s]
        det = alg.mul(M[..., 0, 0], M[..., 1, 1]) - alg.mul(M[..., 0, 1], M[..., 1, 0])
        assert np.array_equal(det, alg.ones((5,)))
        acc = M
        for _ in range(4):
            acc = alg.matmul(acc, M)
        assert np.array_equal(acc, E5.images[s] * 0 + _id(alg))


def _id(alg):
    one, zero = alg.ones((5,)), alg.zeros((5,))
    return np.stack([np.stack([one, zero], -1), np.stack([zero, one], -1)], -2)


def test_no_shared_divisor():
    with pytest.raises(NoSharedDivisor):
        build_eta(pp({"exponents": [5, 3, 2, 2, 2]}))


def test_aux_generators_identity_and_crosscaps():
    E = build_eta(pp({"exponents": [5, 5, 5, 5], "genus": 1}), (1, 2))
    imgs = E.generator_images
    one, zero = RingElement.one(5), RingElement.zero(5)
    for s in (5, 6):
        assert imgs[s][0][0] == one and imgs[s][1][1] == one and imgs[s][0][1] == zero
    E = build_eta(pp({"exponents": [5, 5, 5, 5], "crosscaps": 2}), (1, 2))
    c = E.generator_images[5]
    assert abs(c[0][0].to_approx().complex_coeffs()[0] - 1j) < 1e-12


def test_eval_eta_examples(E5):
    U = sys(5, [1, 1, 1, 1])
    ident = eval_eta(E5, FreeWord.identity(), U)
    assert ident[0][0] == RingElement.one(5) and ident[0][1].is_zero()
    m = eval_eta(E5, X(1) * X(2), U)
    z = E5.zeta1
    assert m[0][0] == RingElement.monomial(5, z, 0) and m[1][1] == RingElement.monomial(5, z.inverse(), 0)
    assert m[0][1].is_zero() and m[1][0].is_zero()
    geo = fox_derivative(X(3, 5), 3, 4)
    assert all(e.is_zero() for row in eval_eta(E5, geo, U) for e in row)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_eval_eta_is_ring_homomorphism(seed):
    rng = np.random.default_rng(seed)
    E = build_eta(P5, (1, 2), backend="approx")
    U = sys(5, [2, 1, 3, 4])
    ev = Evaluator(E, U)
    a = FoxPolynomial.of(random_word(rng, 4, 5), 2) + FoxPolynomial.of(random_word(rng, 4, 4), -1)
    b = FoxPolynomial.of(random_word(rng, 4, 6), 3) + FoxPolynomial.one()
    assert np.allclose(ev.poly(a * b), E.alg.matmul(ev.poly(a), ev.poly(b)))
    assert np.allclose(ev.poly(a + b), ev.poly(a) + ev.poly(b))


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_single_pass_jacobian_matches_fox_polynomials(seed):
    rng = np.random.default_rng(seed)
    E = build_eta(P5, (1, 2), backend="approx")
    ev = Evaluator(E, sys(3, [1, 2, 3, 4]))
    W = random_word(rng, 4, 12)
    row = ev.jacobian_row(W)
    for c in range(4):
        assert np.allclose(row[c], ev.poly(fox_derivative(W, c + 1, 4)))


# -- lifts -------------------------------------------------------------------------------------

def test_lifts_identity():
    U = sys(5, [1, 1, 1, 1])
    assert standard_lifts(P5, U, U) == basis(4)


def test_lift_exponent():
    U = sys(5, [2, 1, 1, 1])
    V = sys(5, [1, 1, 1, 1])
    assert standard_lifts(P5, U, V)[0] == X(1, 3)


def test_lift_rebuilt_entry():
    U = sys(5, [1, 1, 1, 1])
    V = sys(4, [1, 1, 1, 2])
    lifts = standard_lifts(P5, U, V)
    Y0 = (X(1) * X(2) * X(3) * X(4)).inverse()
    assert lifts[3] == Y0 ** 2


# -- the invariant -------------------------------------------------------------------------------

def test_same_system_gives_pi(E5):
    U = sys(5, [2, 3, 1, 4])
    inv = invariant_product(E5, P5, U, standard_lifts(P5, U, U))
    assert inv.ring() == E5.pi_element(2, 3)
    assert extract_r(inv, 2, 3, E5) == 1


def test_invariant_example(E5):
    U = sys(5, [1, 1, 1, 1])
    V = sys(5, [2, 1, 1, 1])
    inv = invariant_product(E5, P5, U, standard_lifts(P5, U, V))
    assert inv.ring() != E5.pi_element(1, 1)
    r = extract_r(inv, 2, 1, E5)
    assert r is not None and r.is_real()
    assert inv.ring() == E5.pi_element(2, 1, 1) * r
    assert inv.equals(closed_form_invariant(E5, U, V))
    assert extract_r(inv, 1, 1, E5) is None


def test_closed_forms_all_missing_configurations(E5):
    rng = np.random.default_rng(5)
    for j in range(1, 6):
        for k in range(1, 6):
            U = sys(j, [int(x) for x in rng.integers(1, 5, 4)])
            V = sys(k, [int(x) for x in rng.integers(1, 5, 4)])
            inv = invariant_product(E5, P5, U, standard_lifts(P5, U, V))
            assert inv.equals(closed_form_invariant(E5, U, V)), (j, k)


def test_annihilation(E5):
    rep = relator_annihilation_check(E5, P5, sys(5, [2, 1, 3, 1]))
    assert rep.passed and len(rep.entries) == 5 * 4


def test_annihilation_detects_wrong_relator(E5, monkeypatch):
    import fuchsnielsen.invariant as inv_mod
    U = sys(5, [1, 1, 1, 1])
    monkeypatch.setattr(inv_mod, "kernel_relators", lambda P, U: [("bad", X(1, 4))])
    with pytest.raises(CheckFailed):
        relator_annihilation_check(E5, P5, U)


def test_perturbation_changes_derivatives_by_ideal_term(E5):
    # modulo the relators, d(perturbed)/dX = ideal term + d(original)/dX
    rng = np.random.default_rng(0)
    U = sys(5, [2, 1, 3, 4])
    ev = Evaluator(E5, U)
    rels = [R for _, R in kernel_relators(P5, U)]
    for _ in range(5):
        W = random_word(rng, 4, 6)
        ins = [(random_word(rng, 4, 3), rels[int(rng.integers(len(rels)))], int(rng.choice([-1, 1])))
               for _ in range(2)]
        Wp = perturb_by_relators(W, ins)
        for i in range(1, 5):
            lhs = ev.poly(fox_derivative(Wp, i, 4))
            rhs = ev.poly(perturbation_ideal_term(ins, i, 4)) + ev.poly(fox_derivative(W, i, 4))
            assert np.array_equal(lhs, rhs)


def test_lift_independence_and_nielsen_invariance(E5):
    rng = np.random.default_rng(1)
    U = sys(2, [3, 1, 2, 4])
    V = sys(4, [1, 2, 2, 3])
    ev = Evaluator(E5, U)
    lifts = standard_lifts(P5, U, V)
    ref = invariant_product(E5, P5, U, lifts, ev)
    for _ in range(5):
        assert invariant_product(E5, P5, U, perturb_lifts(P5, U, lifts, rng), ev).equals(ref)
    piu = InvariantValue(E5.pi_values(U.u[0], U.u[1]), E5.alg, E5.p)
    for _ in range(5):
        W = apply_chain(basis(4), random_chain(rng, 4, 8))
        assert invariant_product(E5, P5, U, W, ev).equals(piu)


def test_bogus_relator_breaks_lift_independence(E5):
    # negative control: "perturbing" with a non-relator must be detected
    U = sys(5, [1, 1, 1, 1])
    lifts = standard_lifts(P5, U, U)
    ref = invariant_product(E5, P5, U, lifts)
    bad = [perturb_by_relators(lifts[0], [(FreeWord.identity(), X(1, 2), 1)])] + lifts[1:]
    assert not invariant_product(E5, P5, U, bad).equals(ref)


# -- certification -------------------------------------------------------------------------------

def test_certify_inequivalent_example():
    rep = certify_inequivalence(P5, sys(5, [1, 1, 1, 1]), sys(5, [2, 1, 1, 1]))
    assert rep.verdict == INEQUIVALENT
    first = rep.positions[0]
    assert first.status == INEQUIVALENT and first.partner == 2
    d = rep.to_dict()
    assert d["positions"][0]["witness_u"] and d["positions"][0]["witness_v"]


def test_certify_consistent():
    rep = certify_inequivalence(P5, sys(5, [1, 2, 1, 4]), sys(3, [4, 3, 4, 1]))
    assert rep.verdict == CONSISTENT
    assert all(p.status == CONSISTENT for p in rep.positions)


def test_certify_skips_small_orders():
    P = pp({"exponents": [5, 5, 5, 4, 3]})
    rep = certify_inequivalence(P, sys(5, [1, 1, 1, 1]), sys(5, [1, 1, 1, 1]))
    assert rep.positions[3].status == SKIPPED and rep.positions[4].status == SKIPPED


def test_certify_exceptional():
    P = pp({"exponents": [7, 7, 7]})
    rep = certify_inequivalence(P, sys(3, [1, 1]), sys(3, [2, 1]))
    assert rep.verdict == "ExceptionalUnknown"


def test_certify_approx_matches_exact():
    U, V = sys(5, [1, 2, 1, 1]), sys(1, [3, 1, 4, 1])
    a = certify_inequivalence(P5, U, V, backend="exact")
    b = certify_inequivalence(P5, U, V, backend="approx")
    assert [p.status for p in a.positions] == [p.status for p in b.positions]


def test_certify_reduces_to_canonical_four_quotient():
    P = pp({"exponents": [10, 10, 5, 5, 5]})
    rep = certify_inequivalence(P, sys(5, [1, 1, 1, 1]), sys(5, [3, 1, 1, 1]))
    assert rep.reduced
    assert rep.verdict == INEQUIVALENT
