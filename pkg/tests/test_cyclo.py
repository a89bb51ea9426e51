from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fuchsnielsen.cyclo import (ApproxRingElement, ComplexValues, CycNumber, ExactValues,
                                RingElement, RingMatrix, bar, det_division_free, euler_phi,
                                geometric_sum, pi_expansion, pi_injectivity_scan, pi_product,
                                ring_mul, zeta_power)
from fuchsnielsen.errors import ModulusMismatch, PreconditionViolated


def cyc(N, coeffs):
    z = zeta_power(N, 1)
    out = CycNumber.zero(N)
    for k, c in enumerate(coeffs):
        out = out + z ** k * c
    return out


# -- cyclotomic numbers ---------------------------------------------------------------------

def test_zeta2_is_minus_one():
    assert zeta_power(2, 1) == CycNumber.rational(-1)


def test_i_squared():
    assert zeta_power(4, 1) ** 2 == CycNumber.rational(-1)


def test_fifth_roots_sum_to_zero():
    z = zeta_power(5, 1)
    assert sum((z ** k for k in range(5)), CycNumber.zero(5)).is_zero()


@pytest.mark.parametrize("N", [3, 4, 5, 8, 9, 12, 15, 20])
def test_zeta_matches_complex(N):
    for k in range(N):
        assert abs(zeta_power(N, k).to_complex() - np.exp(2j * np.pi * k / N)) < 1e-12


small = st.lists(st.integers(-5, 5), min_size=1, max_size=6)


@settings(max_examples=80, deadline=None)
@given(st.sampled_from([5, 7, 8, 12]), small, small, small)
def test_field_axioms(N, a, b, c):
    x, y, z = cyc(N, a), cyc(N, b), cyc(N, c)
    assert (x + y) * z == x * z + y * z
    assert (x * y) * z == x * (y * z)
    assert abs((x * y).to_complex() - x.to_complex() * y.to_complex()) < 1e-9
    if not x.is_zero():
        assert x * x.inverse() == CycNumber.one(N)


def test_mixed_conductors_lift():
    s = zeta_power(3, 1) + zeta_power(4, 1)
    assert s.N == 12
    assert abs(s.to_complex() - (np.exp(2j * np.pi / 3) + 1j)) < 1e-12


def test_real_detection():
    z = zeta_power(5, 1)
    assert (z + z.conj()).is_real()
    assert not z.is_real()


# -- ring elements -----------------------------------------------------------------------------

@pytest.mark.parametrize("p", [3, 5, 8])
def test_t_times_t_p_minus_1(p):
    t = RingElement.monomial(p, 1, 1)
    assert t * RingElement.monomial(p, 1, p - 1) == RingElement.one(p)


@pytest.mark.parametrize("p", [3, 5, 8])
def test_zero_divisors(p):
    t = RingElement.monomial(p, 1, 1)
    total = geometric_sum(1, 1, p, p)
    assert ((t - 1) * total).is_zero()


@pytest.mark.parametrize("q,u", [(5, 1), (5, 2), (10, 3), (15, 4)])
def test_geometric_identity(q, u):
    # (zeta^u t^u - 1) * sum_{m<q} (zeta^u t^u)^m = (zeta^(qu) t^(qu) - 1)
    p = 5
    zu = zeta_power(q, u)
    lhs = (RingElement.monomial(p, zu, u) - 1) * geometric_sum(zu, u, q, p)
    rhs = RingElement.monomial(p, zu ** q, q * u) - 1
    assert lhs == rhs


def test_geometric_sum_trivial_and_annihilation():
    assert geometric_sum(1, 3, 1, 5) == RingElement.one(5)
    t2 = RingElement.monomial(5, 1, 2)
    assert ((t2 - 1) * geometric_sum(1, 2, 10, 5)).is_zero()


def test_bar_examples():
    assert bar(RingElement.one(5)) == RingElement.one(5)
    z = zeta_power(5, 1)
    assert bar(RingElement.monomial(5, z, 1)) == RingElement.monomial(5, z.inverse(), 4)


@settings(max_examples=40, deadline=None)
@given(st.lists(small, min_size=5, max_size=5), st.lists(small, min_size=5, max_size=5))
def test_bar_is_ring_involution(a, b):
    x = RingElement(5, [cyc(5, c) for c in a])
    y = RingElement(5, [cyc(5, c) for c in b])
    assert bar(bar(x)) == x
    assert bar(x * y) == bar(x) * bar(y)


@settings(max_examples=40, deadline=None)
@given(st.lists(small, min_size=5, max_size=5), st.lists(small, min_size=5, max_size=5))
def test_exact_and_approx_agree(a, b):
    x = RingElement(5, [cyc(5, c) for c in a])
    y = RingElement(5, [cyc(5, c) for c in b])
    assert (x * y).to_approx().close(ring_mul(x.to_approx(), y.to_approx()), 1e-9)


def test_mixing_backends_or_moduli_fails():
    with pytest.raises(ModulusMismatch):
        ring_mul(RingElement.one(5), RingElement.one(3))
    with pytest.raises(ModulusMismatch):
        ring_mul(RingElement.one(5), ApproxRingElement.one(5))


# -- Pi ----------------------------------------------------------------------------------------

def test_pi_zero_scaling():
    assert pi_product(1, 2, 0, 5, 5).is_zero()


@pytest.mark.parametrize("a,b,p,q", [(1, 1, 3, 3), (2, 1, 5, 5), (3, 4, 5, 10), (5, 3, 4, 12)])
def test_pi_matches_expansion(a, b, p, q):
    for r in (1, 2, Fraction(1, 2)):
        assert pi_product(a, b, r, p, q) == pi_expansion(a, b, r, p, q)


def test_pi_p3_example():
    x = pi_product(1, 1, 1, 3, 3, zeta=np.exp(2j * np.pi / 3))
    expect = np.array([3, -1.5 - 1.5 * np.sqrt(3) * 1j, -1.5 + 1.5 * np.sqrt(3) * 1j])
    assert np.max(np.abs(x.complex_coeffs() - expect)) < 1e-12
    assert np.max(np.abs(pi_product(1, 1, 1, 3, 3).complex_coeffs() - expect)) < 1e-12


def test_pi_preconditions():
    with pytest.raises(PreconditionViolated):
        pi_product(1, 1, 1, 2, 4)
    with pytest.raises(PreconditionViolated):
        pi_product(1, 1, 1, 5, 7)
    with pytest.raises(PreconditionViolated):
        pi_product(5, 1, 1, 5, 5)
    with pytest.raises(PreconditionViolated):
        pi_product(1, 1, 1, 5, 5, zeta=zeta_power(5, 5))


def test_scan_p3():
    rep = pi_injectivity_scan(3, 3, [1])
    assert rep.ok and rep.triple_count == 4
    # (a, b) <-> (-a, -b) always collide; for p = q = 3 the b-sign is also invisible
    assert any({(1, 1), (2, 2)} <= {(a, b) for a, b, _ in c} for c in rep.classes)


def test_scan_p5():
    assert pi_injectivity_scan(5, 5, [1, 2]).ok


def test_scan_rejects_zero_r():
    with pytest.raises(PreconditionViolated):
        pi_injectivity_scan(5, 5, [1, 0])


def test_scan_json():
    rep = pi_injectivity_scan(3, 6, [1])
    d = rep.to_dict()
    assert d["p"] == 3 and d["q"] == 6 and d["violations"] == []


# -- determinants ---------------------------------------------------------------------------

def cofactor_det(M):
    """Independent oracle: Laplace expansion along the first row."""
    n = len(M)
    if n == 1:
        return M[0][0]
    total = None
    for c in range(n):
        minor = [row[:c] + row[c + 1:] for row in M[1:]]
        term = M[0][c] * cofactor_det(minor)
        if c % 2:
            term = -term
        total = term if total is None else total + term
    return total


def random_ring(rng, p, N):
    return RingElement(p, [cyc(N, rng.integers(-3, 4, size=euler_phi(N))) for _ in range(p)])


def test_det_diag():
    a = RingElement.monomial(5, 3, 1)
    b = RingElement.monomial(5, 2, 2)
    z = RingElement.zero(5)
    assert det_division_free(RingMatrix([[a, z], [z, b]])) == a * b


@pytest.mark.parametrize("seed", range(3))
def test_det_matches_cofactor_oracle(seed):
    rng = np.random.default_rng(seed)
    M = [[random_ring(rng, 5, 5) for _ in range(4)] for _ in range(4)]
    assert det_division_free(RingMatrix(M)) == cofactor_det(M)


def test_det_eta_generator_is_one():
    z = zeta_power(5, 1)
    A = RingElement.monomial(5, z, 1)
    B = RingElement.monomial(5, z.inverse(), -1)
    zero = RingElement.zero(5)
    assert det_division_free(RingMatrix([[A, zero], [zero, B]])) == RingElement.one(5)


@pytest.mark.parametrize("seed", range(3))
def test_value_domain_determinants(seed):
    rng = np.random.default_rng(seed)
    M = [[random_ring(rng, 5, 10) for _ in range(3)] for _ in range(3)]
    ref = cofactor_det(M)
    alg = ExactValues(10, 5)
    A = np.stack([np.stack([alg.from_ring(M[r][c]) for c in range(3)], -1) for r in range(3)], -2)
    assert alg.to_ring(alg.det(A)) == ref
    calg = ComplexValues(5)
    C = np.array([[M[r][c].to_approx().values() for c in range(3)] for r in range(3)])
    C = np.moveaxis(C, -1, 0)
    assert calg.to_ring(calg.det(C)).close(ref.to_approx(), 1e-8)
    assert np.allclose(calg.det(C), np.linalg.det(C))
