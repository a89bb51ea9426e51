import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fuchsnielsen.errors import IncompatibleSystems, InvalidExponent, MalformedRecord
from fuchsnielsen.invariant import verify_certificate
from fuchsnielsen.presentation import (CANONICAL_FOUR, EQUIVALENT, EXCEPTIONAL_UNKNOWN,
                                       FULL_TWO, INEQUIVALENT, StandardGenSys, criterion_decide,
                                       is_exceptional, mod_inverse_exponents, nielsen_certificate,
                                       parse_presentation, quotient, rep_case, signature_type)
from fuchsnielsen.words import Invert

pp = parse_presentation
P5 = pp({"exponents": [5, 5, 5, 5, 5]})


def sys5(missing, present):
    return StandardGenSys.from_present(missing, present)


# -- parsing and types -------------------------------------------------------------------

def test_counts():
    P = pp({"exponents": [5, 5, 5, 5, 5]})
    assert (P.ell, P.m, P.n) == (5, 5, 0)
    P = pp({"exponents": [7, 2, 5, 2, 3]})
    assert (P.m, P.n) == (3, 2)


def test_invalid_exponent():
    with pytest.raises(InvalidExponent):
        pp({"exponents": [5, 1, 3]})


def test_malformed_record():
    with pytest.raises(MalformedRecord):
        pp([5, 5, 5])


def test_prefixed_keys_and_variants():
    P = pp({"group.exponents": [5, 5, 5], "group.genus": 1})
    assert P.genus == 1 and P.aux_names() == ["a1", "b1"]
    P = pp({"exponents": [5, 5, 5], "crosscaps": 2})
    assert P.aux_count == 2
    P = pp({"exponents": [5, 5, 5], "extra_relator": "d1 d2 d1^-1 d2^-1"})
    assert P.aux_count == 2


def test_signature_types():
    assert str(signature_type(pp({"exponents": [2, 5, 2, 7, 3]}))) == "(7,5,3 | 2)"
    assert str(signature_type(pp({"exponents": [3, 3, 3], "crosscaps": 2}))) == "(3,3,3 | 2)"
    assert str(signature_type(pp({"exponents": [2, 2, 2]}))) == "(∅ | 3)"


def test_quotients():
    assert quotient(pp({"exponents": [6, 8, 2, 10]}), CANONICAL_FOUR).exponents == (3, 8, 2, 5)
    assert quotient(pp({"exponents": [6, 5, 2]}), FULL_TWO).exponents == (3, 5)


@given(st.lists(st.integers(2, 24), min_size=3, max_size=7))
def test_canonical_four_idempotent(ex):
    P = pp({"exponents": ex})
    Q = quotient(P, CANONICAL_FOUR)
    assert quotient(Q, CANONICAL_FOUR).exponents == Q.exponents


# -- classifier -------------------------------------------------------------------------------

@pytest.mark.parametrize("ex,flag,label", [
    ([7, 7, 7, 2, 2, 2, 2], True, "a"),
    ([8, 5, 4, 4, 2, 2], True, "c"),
    ([8, 7, 5, 4, 3], False, None),
    ([3, 3, 3, 3, 3, 2], True, "e"),
])
def test_exceptional_examples(ex, flag, label):
    assert is_exceptional(pp({"exponents": ex})) == (flag, label)


def test_rep_cases():
    assert rep_case(pp({"exponents": [8, 5, 3]})).label == "1"
    assert rep_case(pp({"exponents": [3, 3, 3, 3, 2, 2]})).label == "2(i)"
    assert rep_case(pp({"exponents": [3, 3, 3, 3, 3, 2]})).label is None


def test_mod_inverses():
    P = pp({"exponents": [5, 5, 7]})
    U = StandardGenSys(3, (2, 1, 1))
    assert mod_inverse_exponents(P, U)[:2] == [3, 1]
    P = pp({"exponents": [5, 5, 7]})
    U = StandardGenSys(1, (1, 1, 3))
    assert mod_inverse_exponents(P, U)[2] == 5


def test_system_validation():
    with pytest.raises(IncompatibleSystems):
        sys5(5, [5, 1, 1, 1]).validate(P5)
    with pytest.raises(IncompatibleSystems):
        StandardGenSys.from_present(7, [1, 1, 1, 1])


# -- decisions ------------------------------------------------------------------------------------

def test_decide_examples():
    U = sys5(5, [1, 1, 1, 1])
    assert criterion_decide(P5, U, sys5(5, [4, 1, 1, 1])).verdict == EQUIVALENT
    assert criterion_decide(P5, U, sys5(5, [2, 1, 1, 1])).verdict == INEQUIVALENT
    assert criterion_decide(P5, U, sys5(4, [1, 1, 1, 1])).verdict == EQUIVALENT
    P7 = pp({"exponents": [7, 7, 7]})
    rep = criterion_decide(P7, sys5(3, [1, 1]), sys5(3, [2, 1]))
    assert rep.verdict == EXCEPTIONAL_UNKNOWN and rep.condition == "a"


def test_decision_json():
    rep = criterion_decide(P5, sys5(5, [1, 1, 1, 1]), sys5(5, [4, 1, 1, 1]))
    d = rep.to_dict()
    assert set(d) >= {"verdict", "condition", "checks", "certificate"}
    assert d["certificate"] == ["x1 <- x1^-1"]


def test_certificate_examples():
    U = sys5(5, [2, 3, 1, 4])
    assert nielsen_certificate(P5, U, U).ops == []
    cert = nielsen_certificate(P5, sys5(5, [1, 1, 1, 1]), sys5(5, [4, 1, 1, 1]))
    assert cert.ops == [Invert(1)]
    cert = nielsen_certificate(P5, sys5(5, [1, 1, 1, 1]), sys5(4, [1, 1, 1, 1]))
    assert cert.verify_symbolic(P5)
    assert str(cert.relator_target) == "X4^-1 X3^-1 X2^-1 X1^-1"


PRESENTATIONS = [
    {"exponents": [5, 5, 5, 5, 5]},
    {"exponents": [7, 5, 3, 3, 3, 2, 2]},
    {"exponents": [5, 5, 5, 5], "genus": 1},
    {"exponents": [5, 5, 5, 5, 5], "crosscaps": 1},
    {"exponents": [9, 5, 7, 3, 3], "extra_relator": "d1 d2 d1^-1 d2^-1"},
]


@settings(max_examples=60, deadline=None)
@given(st.sampled_from(PRESENTATIONS), st.integers(0, 2**32 - 1))
def test_random_equivalent_pairs_certify(rec, seed):
    P = pp(rec)
    rng = np.random.default_rng(seed)
    j, k = (int(x) for x in rng.integers(1, P.ell + 1, 2))
    u = []
    for g in P.exponents:
        x = int(rng.integers(1, g))
        while np.gcd(x, g) != 1:
            x = int(rng.integers(1, g))
        u.append(x)
    U = StandardGenSys(j, tuple(1 if i + 1 == j else x for i, x in enumerate(u)))
    signs = rng.choice([-1, 1], size=P.ell)
    v = tuple(1 if i + 1 == k else (s * x) % g for i, (x, s, g) in enumerate(zip(u, signs, P.exponents)))
    V = StandardGenSys(k, v)
    rep = criterion_decide(P, U, V)
    if rep.verdict == EXCEPTIONAL_UNKNOWN:
        return
    # formal exponents at the missing indices may break the congruences
    ok = all(c[3] for c in rep.checks)
    assert rep.verdict == (EQUIVALENT if ok else INEQUIVALENT)
    if rep.certificate is not None:
        assert rep.certificate.verify_symbolic(P)
        assert verify_certificate(P, rep.certificate, seeds=[seed % 1000, 7])


def test_wrong_certificate_fails_numerically():
    cert = nielsen_certificate(P5, sys5(5, [1, 1, 1, 1]), sys5(5, [4, 1, 1, 1]))
    cert.ops = []
    assert not cert.verify_symbolic(P5)
    assert not verify_certificate(P5, cert)
