import numpy as np
import pytest
from hypothesis import assume, given, settings, strategies as st

from weylsim.noise import (CliffordGate, RotationGate, WeylDiagonalChannel, clifford_action, dephasing,
                           dephasing_kraus, depolarizing, depolarizing_survival, global_dephasing, invert_word,
                           local_dephasing, local_depolarizing, mixed_weyl_channel, parse_word, phi,
                           rotation_superop, solve_clifford_mapping, twirl, twirl_dense, weyl_spectral_gap,
                           weyl_table, word_unitary)
from weylsim.reps import Basis, channel_to_superop, comp_to_basis, kraus_to_superop, unitary_to_superop
from weylsim.weyl_core import WeylIndex, all_indices, materialize

from conftest import weyl_indices


def dense_eigenvalue(S, w):
    """``d^-n tr(W^dag S(W))`` from a row-major superoperator."""
    W = materialize(w)
    out = (S @ W.reshape(-1)).reshape(W.shape)
    return np.vdot(W, out) / W.shape[0]


def depolarizing_kraus_1q(p):
    """rho -> p rho + (1 - p) I/2 as a Pauli mixture."""
    X = np.array([[0, 1], [1, 0]])
    Y = np.array([[0, -1j], [1j, 0]])
    Z = np.diag([1, -1])
    q = (1 - p) / 4
    return [np.sqrt(1 - 3 * q) * np.eye(2), np.sqrt(q) * X, np.sqrt(q) * Y, np.sqrt(q) * Z]


def test_table_matches_dense_channels():
    p1, p2, p = 0.9, 0.8, 0.7
    tab = weyl_table(p1, p2, p)
    cols = {"I.Z": WeylIndex((0, 1), (0, 0), 2), "Z.ZX": WeylIndex((1, 1), (0, 1), 2),
            "ZX.Z": WeylIndex((1, 1), (1, 0), 2), "ZX.ZX": WeylIndex((1, 1), (1, 1), 2)}
    # two-qubit channels built from Kraus operators, independently of the library constructors
    k1, k2 = depolarizing_kraus_1q(p1), depolarizing_kraus_1q(p2)
    S_ldepol = kraus_to_superop([np.kron(a, b) for a in k1 for b in k2])
    Zk = lambda q: [np.sqrt((1 + q) / 2) * np.eye(2), np.sqrt((1 - q) / 2) * np.diag([1, -1])]
    S_ldeph = kraus_to_superop([np.kron(a, b) for a in Zk(p1) for b in Zk(p2)])
    projs = [np.diag(v) for v in np.eye(4)]
    S_gdeph = p * np.eye(16) + (1 - p) * kraus_to_superop(projs)
    S_gdep = p * np.eye(16) + (1 - p) * np.outer(np.eye(4).reshape(-1), np.eye(4).reshape(-1)) / 4
    dense = {"local_dephasing": S_ldeph, "global_dephasing": S_gdeph, "local_depolarizing": S_ldepol,
             "global_depolarizing": S_gdep}
    for row, S in dense.items():
        for c, w in cols.items():
            assert abs(tab[row][c] - dense_eigenvalue(S, w)) < 1e-12, (row, c)


@pytest.mark.parametrize("d,m", [(2, 1), (2, 2), (3, 1)])
def test_mixed_weyl_channel_matches_dense_mixture(d, m, rng):
    p = rng.dirichlet(np.ones(d ** (2 * m)))
    ch = mixed_weyl_channel(p, d, m)
    S = sum(pi * unitary_to_superop(materialize(w)) for pi, w in zip(p, all_indices(d, m)))
    assert np.abs(ch.dense() - S).max() < 1e-12
    assert np.abs(ch.mixing_probabilities() - p).max() < 1e-12
    assert ch.cp_check()


def test_cp_check_rejects_non_cp():
    ch = WeylDiagonalChannel([1, -1, -1, -1], 2, 1)
    assert not ch.cp_check()
    with pytest.raises(ValueError):
        WeylDiagonalChannel([0.5, 1, 1, 1], 2, 1)


@pytest.mark.parametrize("d", [2, 3])
def test_dephasing_kraus_realizes_dephasing(d):
    S = kraus_to_superop(dephasing_kraus(0.6, d))
    assert np.abs(S - dephasing(0.6, d).dense()).max() < 1e-12


def test_depolarizing_conventions():
    assert depolarizing_survival(0.1) == pytest.approx(0.9)
    ch = depolarizing(0.9)
    assert np.allclose(ch.eigenvalues, [1, 0.9, 0.9, 0.9])
    assert weyl_spectral_gap(ch) == pytest.approx(0.1)
    with pytest.raises(ValueError):
        depolarizing(1.2)


def test_local_and_global_families():
    assert np.allclose(local_depolarizing([0.9, 0.8]).eigenvalues,
                       np.kron([1, .9, .9, .9], [1, .8, .8, .8]))
    assert np.allclose(local_dephasing([0.9, 0.8]).eigenvalues, np.kron([1, .9, 1, .9], [1, .8, 1, .8]))
    g = global_dephasing(0.7)
    assert g.eigenvalue(WeylIndex((1, 1), (0, 0), 2)) == 1.0


@pytest.mark.parametrize("d,m", [(2, 1), (2, 2), (3, 1)])
def test_twirl_matches_group_average(d, m, rng):
    D = d ** m
    G = rng.normal(size=(3 * D, D)) + 1j * rng.normal(size=(3 * D, D))
    Q, _ = np.linalg.qr(G)
    op = channel_to_superop(kraus=[Q[i * D:(i + 1) * D] for i in range(3)], support=tuple(range(m)), d=d)
    tw = twirl(op)
    ref = comp_to_basis(twirl_dense(op.dense, d, m), d, m, Basis.WEYL)
    assert np.abs(np.diag(ref) - tw.eigenvalues).max() < 1e-12
    assert np.abs(ref - np.diag(np.diag(ref))).max() < 1e-12


@pytest.mark.parametrize("d,word", [(2, "H@0.S@0"), (3, "F@0.P@0.M2@0"), (5, "F^3@0.P^2@0"),
                                    (3, "CSUM@0,1.F@1"), (2, "CNOT@1,0.H@1")])
def test_clifford_image_matches_conjugation(d, word):
    m = max(int(c) for c in word if c.isdigit() and word[word.index(c) - 1] in "@,") + 1
    m = max(m, 1)
    g = CliffordGate.from_word(word, d, m)
    U = word_unitary(word, d, m)
    for w in all_indices(d, m):
        ph, w2 = clifford_action(g, w)
        assert np.abs(U @ materialize(w) @ U.conj().T - ph * materialize(w2)).max() < 1e-12
    Ui = word_unitary(invert_word(word, d, m), d, m)
    assert np.abs(Ui @ U - np.eye(d ** m)).max() < 1e-12


def test_parse_word_errors():
    with pytest.raises(ValueError):
        parse_word("Q@0", 2, 1)
    with pytest.raises(ValueError):
        parse_word("CSUM@0,0", 3, 2)
    with pytest.raises(ValueError):
        parse_word("F@3", 3, 2)
    with pytest.raises(ValueError):
        parse_word("M3@0", 3, 1)


@settings(max_examples=40, deadline=None)
@given(weyl_indices(count=2))
def test_solve_clifford_mapping(ws):
    w1, w2 = ws
    assume(w1.d ** w1.n <= 9)
    if w1.is_identity() or w2.is_identity():
        with pytest.raises(ValueError):
            solve_clifford_mapping(w1, w2)
        return
    g = solve_clifford_mapping(w1, w2)
    ph, img = g.image(w1)
    assert img == w2
    U = g.unitary
    assert np.abs(U @ materialize(w1) @ U.conj().T - ph * materialize(w2)).max() < 1e-10


@pytest.mark.parametrize("w1,w2,d", [("12|30", "01|11", 5), ("120|001", "002|210", 3)])
def test_solve_clifford_mapping_larger(w1, w2, d):
    a, b = WeylIndex.from_string(w1, d), WeylIndex.from_string(w2, d)
    ph, img = solve_clifford_mapping(a, b).image(a)
    assert img == b and abs(abs(ph) - 1) < 1e-12


@pytest.mark.parametrize("theta", [0.0, 0.3, np.pi / 4, 2.0, -1.1])
def test_rotation_norm_is_phi(theta):
    op = rotation_superop(RotationGate(theta, 0))
    assert op.l1_to_l1_norm() == pytest.approx(max(1.0, phi(theta)), abs=1e-12)
    assert phi(np.pi / 4) == pytest.approx(np.sqrt(2))
