import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fuchsnielsen.presentation import is_exceptional, parse_presentation, rep_case
from fuchsnielsen.sl2rep import (RepData, build_cyclic_faithful, build_quotient_rep,
                                 exact_quotient_rep, fricke_triple, primitive_matrix, verify_rep)

pp = parse_presentation
I2 = np.eye(2)


def test_primitive_matrix_minus_one():
    assert np.allclose(primitive_matrix(-1), -I2)


@pytest.mark.parametrize("g,k", [(5, 1), (7, 3), (8, 3), (12, 5)])
def test_primitive_matrix_order_and_trace(g, k):
    z = np.exp(2j * np.pi * k / g)
    M = primitive_matrix(z)
    assert np.max(np.abs(np.linalg.matrix_power(M, g) - I2)) < 1e-9
    assert abs(np.trace(M) - 2 * np.cos(2 * np.pi * k / g)) < 1e-12


def test_fricke_identity_triple():
    A, B = fricke_triple(2, 2, 2)
    for M, tr in ((A, 2), (B, 2), (A @ B, 2)):
        assert abs(np.trace(M) - tr) < 1e-10


def test_fricke_zero_triple():
    A, B = fricke_triple(0, 0, 0)
    assert abs(np.trace(A)) < 1e-12 and abs(np.trace(B)) < 1e-12
    assert abs(np.trace(A @ B)) < 1e-12


@settings(max_examples=50, deadline=None)
@given(st.complex_numbers(max_magnitude=3, allow_nan=False, allow_infinity=False),
       st.complex_numbers(max_magnitude=3, allow_nan=False, allow_infinity=False),
       st.complex_numbers(max_magnitude=3, allow_nan=False, allow_infinity=False))
def test_fricke_random(x, y, z):
    A, B = fricke_triple(x, y, z, rng=np.random.default_rng(0))
    scale = max(1.0, np.abs(A).max(), np.abs(B).max()) ** 2
    assert abs(np.linalg.det(A) - 1) < 1e-8 * scale and abs(np.linalg.det(B) - 1) < 1e-8 * scale
    assert abs(np.trace(A) - x) < 1e-8 * scale
    assert abs(np.trace(B) - y) < 1e-8 * scale
    assert abs(np.trace(A @ B) - z) < 1e-8 * scale


def test_all_order_two():
    P = pp({"exponents": [2, 2, 2, 2]})
    R = build_cyclic_faithful(P)
    assert all(np.allclose(A, -I2) for A in R.generator_images)
    assert R.residual == 0 or R.residual < 1e-15


@pytest.mark.parametrize("ex", [[5, 5, 5], [5, 5, 5, 5, 5]])
def test_build_and_verify(ex):
    P = pp({"exponents": ex})
    R = build_cyclic_faithful(P, seed=3)
    rep = verify_rep(R, P)
    assert rep.passed and R.residual < 1e-9
    for A, (g, k) in zip(R.generator_images, R.root_choices):
        assert abs(np.trace(A) - 2 * np.cos(2 * np.pi * k / g)) < 1e-9


def test_quotient_rep_diagonal():
    P = pp({"exponents": [5, 5, 5, 5, 5]})
    R = build_quotient_rep(P, 2, 1)
    A = R.generator_images[0]
    assert A[0, 1] == 0 and A[1, 0] == 0
    assert abs(A[0, 0] * A[1, 1] - 1) < 1e-12
    assert np.allclose(R.generator_images[1], I2)
    for i, (A, (g, _)) in enumerate(zip(R.generator_images, R.root_choices), 1):
        assert np.max(np.abs(np.linalg.matrix_power(A, g) - I2)) < 1e-8
    assert verify_rep(R, P).passed


def test_exact_quotient_rep():
    P = pp({"exponents": [5, 5, 5, 5, 5]})
    R = exact_quotient_rep(P, 2, 1)
    assert R is not None and R.is_exact
    prod = I2.astype(complex)
    for A in R.generator_images:
        prod = prod @ A
    assert np.max(np.abs(prod - I2)) < 1e-12
    # a root of order 7 cannot be absorbed by the remaining orders: no exact solution
    assert exact_quotient_rep(pp({"exponents": [7, 5, 3, 3, 3, 2, 2]}), 4, 3) is None


def test_verify_flags_trace_perturbation():
    P = pp({"exponents": [5, 5, 5, 5]})
    R = build_cyclic_faithful(P, seed=1)
    bad = [A.copy() for A in R.generator_images]
    bad[2] = bad[2] + np.array([[1e-3, 0], [0, 0]])
    rep = verify_rep(RepData(bad, R.root_choices), P)
    assert not rep.passed and 3 in rep.flagged


def test_verify_parity_failure():
    P = pp({"exponents": [2, 2, 2]})
    R = RepData([-I2.astype(complex)] * 3, [(2, 0)] * 3)
    assert not verify_rep(R, P).passed


def _sweep_list():
    out = []
    for ell in range(3, 8):
        for ex in itertools.combinations_with_replacement([8, 7, 5, 4, 3], ell):
            P = pp({"exponents": list(ex)})
            if not is_exceptional(P)[0] and rep_case(P).label is not None:
                out.append(list(ex))
    return out[::25]


@pytest.mark.parametrize("ex", _sweep_list())
def test_sweep_sample(ex):
    P = pp({"exponents": ex})
    R = build_cyclic_faithful(P, seed=11)
    assert verify_rep(R, P).passed
