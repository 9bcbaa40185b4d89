import itertools

import numpy as np
import pytest
from hypothesis import given, settings

from weylsim.weyl_core import (DimensionMismatch, SizeLimitExceeded, WeylIndex, all_indices, character,
                               check_prime, materialize, phase_value, weyl_coefficient, weyl_conjugate,
                               weyl_decompose, weyl_inverse, weyl_mul, weyl_reconstruct)

from conftest import weyl_indices


def brute_weyl(w):
    """Independent dense construction: (x)_i Z^a_i X^b_i from scratch."""
    d = w.d
    om = np.exp(2j * np.pi / d)
    X = np.roll(np.eye(d), 1, axis=0)
    Z = np.diag(om ** np.arange(d))
    out = np.ones((1, 1))
    for a, b in zip(w.a, w.b):
        out = np.kron(out, np.linalg.matrix_power(Z, a) @ np.linalg.matrix_power(X, b))
    return out


@given(weyl_indices())
def test_materialize_matches_brute_force(ws):
    (w,) = ws
    assert np.abs(materialize(w) - brute_weyl(w)).max() < 1e-12


@given(weyl_indices(count=2))
def test_product_phase(ws):
    w1, w2 = ws
    k, w3 = weyl_mul(w1, w2)
    lhs = brute_weyl(w1) @ brute_weyl(w2)
    assert np.abs(lhs - phase_value(k, w1.d) * brute_weyl(w3)).max() < 1e-12


@given(weyl_indices(count=2))
def test_conjugation_phase(ws):
    w1, w2 = ws
    W1, W2 = brute_weyl(w1), brute_weyl(w2)
    k = weyl_conjugate(w1, w2)
    assert np.abs(W1 @ W2 @ W1.conj().T - phase_value(k, w1.d) * W2).max() < 1e-12


@given(weyl_indices())
def test_inverse(ws):
    (w,) = ws
    k, wi = weyl_inverse(w)
    assert np.abs(brute_weyl(w).conj().T - phase_value(k, w.d) * brute_weyl(wi)).max() < 1e-12


@given(weyl_indices(count=3))
def test_character_is_homomorphism_and_matches_conjugation(ws):
    lab, x, y = ws
    _, xy = weyl_mul(x, y)
    assert abs(character(lab, xy) - character(lab, x) * character(lab, y)) < 1e-12
    W, Wx = brute_weyl(lab), brute_weyl(x)
    assert np.abs(Wx @ W @ Wx.conj().T - character(lab, x) * W).max() < 1e-12


@given(weyl_indices())
def test_encodings_round_trip(ws):
    (w,) = ws
    assert WeylIndex.from_code(w.code, w.d, w.n) == w
    assert WeylIndex.from_string(w.to_string(), w.d) == w
    assert WeylIndex.from_local_codes(w.local_codes(), w.d) == w


def test_string_format_and_code_order():
    w = WeylIndex((1, 0), (0, 1), 2)
    assert w.to_string() == "10|01"
    # big-endian: qudit 0 is the most significant local code (a*d + b)
    assert w.code == 2 * 4 + 1
    assert [v.code for v in all_indices(3, 2)] == list(range(81))


@pytest.mark.parametrize("d,n", [(2, 1), (2, 2), (3, 1), (3, 2), (5, 1)])
def test_weyl_basis_orthonormal_and_complete(d, n, rng):
    D = d ** n
    X = rng.normal(size=(D, D)) + 1j * rng.normal(size=(D, D))
    c = weyl_decompose(X, d, n)
    assert np.abs(weyl_reconstruct(c, d, n) - X).max() < 1e-12
    for w1, w2 in itertools.islice(itertools.product(all_indices(d, n), repeat=2), 200):
        ip = weyl_coefficient(materialize(w2), w1)
        assert abs(ip - (w1 == w2)) < 1e-12


def test_errors():
    with pytest.raises(ValueError):
        check_prime(4)
    with pytest.raises(ValueError):
        WeylIndex((2,), (0,), 2)
    with pytest.raises(DimensionMismatch):
        weyl_mul(WeylIndex((1,), (0,), 2), WeylIndex((1, 0), (0, 0), 2))
    with pytest.raises(SizeLimitExceeded):
        materialize(WeylIndex.identity(2, 13))
    with pytest.raises(ValueError):
        WeylIndex.from_string("10|0", 2)
    with pytest.raises(DimensionMismatch):
        weyl_coefficient(np.eye(3), WeylIndex.identity(2, 1))


def test_support_restrict_embed():
    w = WeylIndex((0, 1, 2), (0, 0, 1), 3)
    assert w.support() == (1, 2)
    r = w.restrict((1, 2))
    assert r.embed((1, 2), 3) == w
    assert weyl_mul(w, w.negate())[1].is_identity()
