"""Noise channels and gates: Weyl-diagonal channels, Cliffords, rotations, twirling.

Conventions
-----------
A Weyl-diagonal channel is stored through its eigenvalues ``lambda(w)`` over the
local codes of its support (``lambda(identity) = 1``).  Depolarizing and
dephasing strengths are *survival* parameters: ``p = 1`` is the identity channel
and ``p`` is the eigenvalue on the affected Weyl operators.

Clifford gates store their action on Weyl labels,
``C W_w C^dag = phase(w) W_{S w}``, as a symplectic matrix ``S`` acting on the
concatenated vector ``(a, b)`` together with a complex phase table indexed by
local code.
"""
from __future__ import annotations

import itertools
import re
from dataclasses import dataclass
from functools import lru_cache
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .reps import (Basis, LocalSuperOp, basis_to_comp, channel_to_superop, comp_to_basis, cptp_defects,
                   kraus_to_superop, snap, unitary_to_superop)
from .weyl_core import WeylIndex, check_prime, clock_matrix, local_weyl_matrices, shift_matrix


# ---------------------------------------------------------------------------
# label arithmetic helpers
# ---------------------------------------------------------------------------
@lru_cache(maxsize=64)
def _label_vectors(d: int, m: int) -> Tuple[np.ndarray, np.ndarray]:
    """Arrays ``a, b`` of shape (d^2m, m) listing every label in code order."""
    codes = np.arange(d ** (2 * m))
    a = np.zeros((codes.size, m), dtype=np.int64)
    b = np.zeros((codes.size, m), dtype=np.int64)
    r = codes.copy()
    for j in range(m - 1, -1, -1):
        q = r % (d * d)
        a[:, j] = q // d
        b[:, j] = q % d
        r //= d * d
    return a, b


@lru_cache(maxsize=32)
def conjugation_phase_table(d: int, m: int) -> np.ndarray:
    """``K[v, w]`` with ``W_v W_w W_v^dag = nu^{K[v, w]} W_w``."""
    a, b = _label_vectors(d, m)
    K = (a @ b.T - b @ a.T) % d
    K.setflags(write=False)
    return K


def _vec_to_code(vec: np.ndarray, d: int, m: int) -> int:
    code = 0
    for j in range(m):
        code = code * d * d + int(vec[j]) * d + int(vec[m + j])
    return code


# ---------------------------------------------------------------------------
# Weyl-diagonal channels
# ---------------------------------------------------------------------------
class WeylDiagonalChannel:
    """Channel diagonal in the Weyl basis on ``m`` qudits.

    Parameters
    ----------
    eigenvalues : array_like, shape (d^2m,)
        ``lambda(w)`` indexed by local code; ``eigenvalues[0]`` must be 1.
    d : int
    m : int
    label : str
    """

    def __init__(self, eigenvalues, d: int, m: int, label: str = ""):
        self.d = check_prime(d)
        self.m = int(m)
        lam = np.array(eigenvalues, dtype=complex).reshape(-1)
        if lam.shape[0] != d ** (2 * m):
            raise ValueError(f"expected {d ** (2 * m)} eigenvalues, got {lam.shape[0]}")
        if abs(lam[0] - 1.0) > 1e-12:
            raise ValueError("eigenvalue at the identity label must be 1")
        if np.abs(lam).max() > 1.0 + 1e-12:
            raise ValueError("eigenvalues must have modulus at most 1")
        self.eigenvalues = lam
        self.eigenvalues.setflags(write=False)
        self.label = label

    def __repr__(self):
        return f"WeylDiagonalChannel(label={self.label!r}, d={self.d}, m={self.m})"

    def eigenvalue(self, w) -> complex:
        code = w.code if isinstance(w, WeylIndex) else int(w)
        return complex(self.eigenvalues[code])

    def mixing_probabilities(self) -> np.ndarray:
        """Inverse character transform: ``p(v)`` with ``T = sum_v p(v) W_v . W_v^dag``."""
        K = conjugation_phase_table(self.d, self.m)
        nu = np.exp(-2j * np.pi * K / self.d)
        return (nu @ self.eigenvalues) / self.d ** (2 * self.m)

    def cp_check(self, tol: float = 1e-10) -> bool:
        """True iff the mixing probabilities are real, non-negative and sum to one."""
        p = self.mixing_probabilities()
        return bool(np.abs(p.imag).max() <= tol and p.real.min() >= -tol and abs(p.real.sum() - 1.0) <= tol)

    def dense(self) -> np.ndarray:
        """Row-major computational superoperator."""
        return basis_to_comp(np.diag(self.eigenvalues), self.d, self.m, Basis.WEYL)

    def to_superop(self, support: Optional[Sequence[int]] = None, basis=Basis.WEYL) -> LocalSuperOp:
        support = tuple(range(self.m)) if support is None else tuple(support)
        if len(support) != self.m:
            raise ValueError("support size does not match the channel")
        S = self.dense()
        M = np.diag(self.eigenvalues) if Basis(basis) is Basis.WEYL else comp_to_basis(S, self.d, self.m, basis)
        return LocalSuperOp(M, support, self.d, basis, self.label, dense=S)

    def compose(self, other: "WeylDiagonalChannel") -> "WeylDiagonalChannel":
        return WeylDiagonalChannel(self.eigenvalues * other.eigenvalues, self.d, self.m,
                                   f"{self.label}*{other.label}")

    def tensor(self, other: "WeylDiagonalChannel") -> "WeylDiagonalChannel":
        return WeylDiagonalChannel(np.kron(self.eigenvalues, other.eigenvalues), self.d, self.m + other.m,
                                   f"{self.label}(x){other.label}")


def mixed_weyl_channel(probs, d: int, m: int, label: str = "mixed_weyl") -> WeylDiagonalChannel:
    """``T(rho) = sum_v p(v) W_v rho W_v^dag`` from probabilities indexed by code."""
    p = np.asarray(probs, dtype=float).reshape(-1)
    K = conjugation_phase_table(d, m)
    lam = np.exp(2j * np.pi * K / d).T @ p
    return WeylDiagonalChannel(snap(lam), d, m, label)


def _check_rate(p, name="p"):
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"{name} = {p} must lie in [0, 1]")


def depolarizing(p: float, m: int = 1, d: int = 2) -> WeylDiagonalChannel:
    """Global depolarizing on ``m`` qudits: eigenvalue ``p`` on every non-identity label."""
    _check_rate(p)
    lam = np.full(d ** (2 * m), p, dtype=complex)
    lam[0] = 1.0
    return WeylDiagonalChannel(lam, d, m, f"depolarizing({p})")


def depolarizing_survival(probability: float) -> float:
    """Survival eigenvalue of a depolarizing channel with depolarizing probability ``probability``.

    ``rho -> (1 - q) rho + q I/d^m`` has eigenvalue ``1 - q`` on non-identity
    labels, so its Weyl spectral gap equals ``q``.
    """
    _check_rate(probability, "probability")
    return 1.0 - probability


def local_depolarizing(ps: Sequence[float], d: int = 2) -> WeylDiagonalChannel:
    """Tensor product of single-qudit depolarizing channels."""
    ch = depolarizing(ps[0], 1, d)
    for p in ps[1:]:
        ch = ch.tensor(depolarizing(p, 1, d))
    ch.label = f"local_depolarizing({', '.join(str(p) for p in ps)})"
    return ch


def dephasing(p: float, d: int = 2, m: int = 1, target: int = 0) -> WeylDiagonalChannel:
    """Dephasing of qudit ``target``: eigenvalue 1 where ``b_target = 0``, ``p`` otherwise."""
    _check_rate(p)
    if not 0 <= target < m:
        raise ValueError("target outside the support")
    _, b = _label_vectors(d, m)
    lam = np.where(b[:, target] == 0, 1.0, p).astype(complex)
    return WeylDiagonalChannel(lam, d, m, f"dephasing({p})")


def dephasing_kraus(p: float, d: int = 2) -> List[np.ndarray]:
    """Kraus form ``sum_k q_k Z^k . Z^-k`` realizing :func:`dephasing` on one qudit.

    ``q_0 = (1 + (d-1) p)/d`` and ``q_k = (1 - p)/d`` for ``k >= 1``.
    """
    _check_rate(p)
    Z = clock_matrix(d)
    qs = [(1 + (d - 1) * p) / d] + [(1 - p) / d] * (d - 1)
    return [np.sqrt(q) * np.linalg.matrix_power(Z, k) for k, q in enumerate(qs) if q > 0]


def local_dephasing(ps: Sequence[float], d: int = 2) -> WeylDiagonalChannel:
    """Independent dephasing with survival ``ps[i]`` on qudit ``i``."""
    ch = dephasing(ps[0], d)
    for p in ps[1:]:
        ch = ch.tensor(dephasing(p, d))
    ch.label = f"local_dephasing({', '.join(str(p) for p in ps)})"
    return ch


def global_dephasing(p: float, m: int = 2, d: int = 2) -> WeylDiagonalChannel:
    """``p * id + (1 - p) * (complete dephasing)``: eigenvalue ``p`` wherever ``b != 0``."""
    _check_rate(p)
    _, b = _label_vectors(d, m)
    lam = np.where(b.any(axis=1), p, 1.0).astype(complex)
    return WeylDiagonalChannel(lam, d, m, f"global_dephasing({p})")


def weyl_table(p1: float, p2: float, p: float) -> Dict[str, Dict[str, complex]]:
    """Eigenvalues of the standard two-qubit noise families on four reference labels.

    Columns are ``I (x) Z``, ``Z (x) ZX``, ``ZX (x) Z`` and ``ZX (x) ZX``.
    """
    cols = {
        "I.Z": WeylIndex((0, 1), (0, 0), 2),
        "Z.ZX": WeylIndex((1, 1), (0, 1), 2),
        "ZX.Z": WeylIndex((1, 1), (1, 0), 2),
        "ZX.ZX": WeylIndex((1, 1), (1, 1), 2),
    }
    rows = {
        "local_dephasing": local_dephasing([p1, p2]),
        "global_dephasing": global_dephasing(p, 2),
        "local_depolarizing": local_depolarizing([p1, p2]),
        "global_depolarizing": depolarizing(p, 2),
    }
    return {r: {c: ch.eigenvalue(w) for c, w in cols.items()} for r, ch in rows.items()}


# ---------------------------------------------------------------------------
# twirling and spectral gap
# ---------------------------------------------------------------------------
def twirl(channel: LocalSuperOp) -> WeylDiagonalChannel:
    """Projection onto Weyl-diagonal channels: keep the Weyl-basis diagonal."""
    M = channel.entries if channel.basis is Basis.WEYL else comp_to_basis(channel.dense, channel.d, channel.m)
    lam = np.diag(M).copy()
    lam[0] = 1.0 if abs(lam[0] - 1.0) < 1e-10 else lam[0]
    return WeylDiagonalChannel(lam, channel.d, channel.m, f"twirl({channel.label})")


def twirl_dense(S: np.ndarray, d: int, m: int) -> np.ndarray:
    """Explicit group average ``d^{-2m} sum_w W . W^dag o S o W^dag . W`` (test oracle)."""
    out = np.zeros_like(S, dtype=complex)
    from .weyl_core import all_indices, materialize
    for w in all_indices(d, m):
        W = materialize(w)
        U = unitary_to_superop(W)
        out += U @ S @ U.conj().T
    return out / d ** (2 * m)


def weyl_spectral_gap(channel) -> float:
    """``1 - max_{w != 0} |lambda(w)|`` (diagonal entries for a general map)."""
    if isinstance(channel, WeylDiagonalChannel):
        diag = channel.eigenvalues
    else:
        M = channel.entries if channel.basis is Basis.WEYL else comp_to_basis(channel.dense, channel.d, channel.m)
        diag = np.diag(M)
    return float(1.0 - np.abs(diag[1:]).max())


# ---------------------------------------------------------------------------
# Clifford gates
# ---------------------------------------------------------------------------
_TOKEN = re.compile(r"^(?P<name>[A-Za-z]+)(?P<c>\d*)(?:\^(?P<pow>\d+))?@(?P<q>\d+(?:,\d+)*)$")
_ALIASES = {"H": "F", "S": "P", "CNOT": "CSUM", "CX": "CSUM"}


def _fourier(d):
    j = np.arange(d)
    return np.exp(2j * np.pi * np.outer(j, j) / d) / np.sqrt(d)


def _phase_gate(d):
    j = np.arange(d)
    if d == 2:
        return np.diag([1.0, 1j])
    return np.diag(np.exp(2j * np.pi * (j * (j - 1) // 2) / d))


def _multiply_gate(d, c):
    if c % d == 0:
        raise ValueError("multiplier must be invertible mod d")
    U = np.zeros((d, d), dtype=complex)
    for j in range(d):
        U[(c * j) % d, j] = 1.0
    return U


def _csum(d, m, ctrl, tgt):
    D = d ** m
    U = np.zeros((D, D), dtype=complex)
    for idx in itertools.product(range(d), repeat=m):
        out = list(idx)
        out[tgt] = (idx[tgt] + idx[ctrl]) % d
        src = int(np.ravel_multi_index(idx, (d,) * m))
        dst = int(np.ravel_multi_index(out, (d,) * m))
        U[dst, src] = 1.0
    return U


def _embed_local(U1, d, m, q):
    out = np.ones((1, 1), dtype=complex)
    for j in range(m):
        out = np.kron(out, U1 if j == q else np.eye(d))
    return out




def _generator_order(name: str, d: int, c: int = 0) -> int:
    if name == "F":
        return 4
    if name == "P":
        return 4 if d == 2 else d
    if name == "CSUM":
        return d
    if name == "M":
        return d - 1
    return 1


def parse_word(word: str, d: int, m: int) -> List[Tuple[str, int, int, Tuple[int, ...]]]:
    """Parse ``"F@0.CSUM@0,1.P^2@1"`` into ``(name, c, power, qudits)`` tokens.

    Generators: ``F`` (Fourier), ``P`` (phase), ``M<c>`` (multiply by ``c``),
    ``CSUM`` (``|i,j> -> |i,i+j>``), ``I``.  At ``d = 2`` the aliases ``H``,
    ``S`` and ``CNOT`` are accepted.  Tokens apply left to right.
    """
    tokens = []
    if word.strip() in ("", "I", "id", "identity"):
        return tokens
    for raw in word.strip().split("."):
        mt = _TOKEN.match(raw.strip())
        if not mt:
            raise ValueError(f"malformed Clifford token {raw!r}")
        name = mt.group("name").upper()
        name = _ALIASES.get(name, name)
        c = int(mt.group("c")) if mt.group("c") else 0
        power = int(mt.group("pow")) if mt.group("pow") else 1
        qs = tuple(int(x) for x in mt.group("q").split(","))
        if any(q >= m for q in qs):
            raise ValueError(f"token {raw!r} addresses a qudit outside the support of size {m}")
        arity = 2 if name == "CSUM" else 1
        if name not in ("F", "P", "M", "CSUM", "I") or len(qs) != arity:
            raise ValueError(f"unknown generator or wrong arity in {raw!r}")
        if name == "M" and c % d == 0:
            raise ValueError(f"multiplier in {raw!r} must be invertible mod {d}")
        if name == "CSUM" and qs[0] == qs[1]:
            raise ValueError(f"CSUM needs distinct qudits in {raw!r}")
        tokens.append((name, c, power, qs))
    return tokens


def _token_unitary(tok, d, m):
    name, c, power, qs = tok
    if name == "F":
        U = _embed_local(_fourier(d), d, m, qs[0])
    elif name == "P":
        U = _embed_local(_phase_gate(d), d, m, qs[0])
    elif name == "M":
        U = _embed_local(_multiply_gate(d, c), d, m, qs[0])
    elif name == "CSUM":
        U = _csum(d, m, qs[0], qs[1])
    else:
        U = np.eye(d ** m, dtype=complex)
    return np.linalg.matrix_power(U, power)


def word_unitary(word: str, d: int, m: int) -> np.ndarray:
    U = np.eye(d ** m, dtype=complex)
    for tok in parse_word(word, d, m):
        U = _token_unitary(tok, d, m) @ U
    return U


def _format_token(tok) -> str:
    name, c, power, qs = tok
    s = name + (str(c) if name == "M" else "")
    if power != 1:
        s += f"^{power}"
    return s + "@" + ",".join(str(q) for q in qs)


def invert_word(word: str, d: int, m: int) -> str:
    out = []
    for tok in reversed(parse_word(word, d, m)):
        name, c, power, qs = tok
        order = _generator_order(name, d, c)
        p = (-power) % order
        if p:
            out.append(_format_token((name, c, p, qs)))
    return ".".join(out)


class CliffordGate:
    """Clifford unitary on ``m`` qudits described by its action on Weyl labels.

    Parameters
    ----------
    symplectic : ndarray, shape (2m, 2m)
        Integer matrix over ``Z_d`` mapping ``(a, b)`` to the image label.
    phases : ndarray, shape (d^2m,)
        ``phases[code(w)]`` with ``C W_w C^dag = phases[w] W_{S w}``.
    d, m : int
    word : str
        Generator word producing the gate (used to rebuild the dense unitary).
    """

    def __init__(self, symplectic, phases, d: int, m: int, word: str = "", unitary=None):
        self.d = check_prime(d)
        self.m = int(m)
        self.symplectic = np.asarray(symplectic, dtype=np.int64) % d
        self.phases = np.asarray(phases, dtype=complex)
        self.word = word
        self._unitary = None if unitary is None else np.asarray(unitary, dtype=complex)
        if not self.is_symplectic():
            raise ValueError("matrix does not preserve the symplectic form")

    # --------------------------------------------------------------- builders
    @classmethod
    def from_unitary(cls, U: np.ndarray, d: int, m: int, word: str = "", verify: bool = True) -> "CliffordGate":
        """Derive the symplectic action and phases from dense conjugation."""
        U = np.asarray(U, dtype=complex)
        M = comp_to_basis(unitary_to_superop(U), d, m, Basis.WEYL)
        D2 = d ** (2 * m)
        mags = np.abs(M)
        rows = mags.argmax(axis=0)
        if verify and not np.allclose(mags.sum(axis=0), 1.0, atol=1e-9):
            raise ValueError("unitary is not a Clifford: Weyl labels are not mapped to Weyl labels")
        phases = M[rows, np.arange(D2)]
        phases = snap(phases)
        a, b = _label_vectors(d, m)
        S = np.zeros((2 * m, 2 * m), dtype=np.int64)
        for j in range(2 * m):
            e = np.zeros(2 * m, dtype=np.int64)
            e[j] = 1
            code = _vec_to_code(e, d, m)
            r = rows[code]
            S[:, j] = np.concatenate([a[r], b[r]])
        gate = cls(S, phases, d, m, word, unitary=U)
        if verify:
            img = (np.concatenate([a, b], axis=1) @ S.T) % d
            img_codes = np.array([_vec_to_code(v, d, m) for v in img])
            if not np.array_equal(img_codes, rows):
                raise ValueError("label action is not linear; not a Clifford unitary")
        return gate

    @classmethod
    def from_word(cls, word: str, d: int, m: int) -> "CliffordGate":
        return cls.from_unitary(word_unitary(word, d, m), d, m, word=word, verify=m <= 2)

    @classmethod
    def identity(cls, d: int, m: int) -> "CliffordGate":
        return cls(np.eye(2 * m, dtype=np.int64), np.ones(d ** (2 * m)), d, m, "", unitary=np.eye(d ** m))

    # ------------------------------------------------------------- structure
    def symplectic_form(self) -> np.ndarray:
        m = self.m
        J = np.zeros((2 * m, 2 * m), dtype=np.int64)
        J[:m, m:] = np.eye(m, dtype=np.int64)
        J[m:, :m] = -np.eye(m, dtype=np.int64)
        return J

    def is_symplectic(self) -> bool:
        J = self.symplectic_form()
        S = self.symplectic
        return bool(np.all((S.T @ J @ S - J) % self.d == 0))

    @property
    def unitary(self) -> np.ndarray:
        if self._unitary is None:
            self._unitary = word_unitary(self.word, self.d, self.m)
        return self._unitary

    def image(self, w: WeylIndex) -> Tuple[complex, WeylIndex]:
        if w.n != self.m or w.d != self.d:
            raise ValueError(f"label {w} does not match the gate support (d={self.d}, m={self.m})")
        v = (self.symplectic @ w.vector()) % self.d
        return complex(self.phases[w.code]), WeylIndex(tuple(v[:self.m]), tuple(v[self.m:]), self.d)

    def to_superop(self, support: Optional[Sequence[int]] = None, basis=Basis.WEYL, label=None) -> LocalSuperOp:
        """Signed-permutation superoperator (exact in the Weyl basis)."""
        support = tuple(range(self.m)) if support is None else tuple(support)
        D2 = self.d ** (2 * self.m)
        a, b = _label_vectors(self.d, self.m)
        img = (np.concatenate([a, b], axis=1) @ self.symplectic.T) % self.d
        rows = np.array([_vec_to_code(v, self.d, self.m) for v in img])
        M = np.zeros((D2, D2), dtype=complex)
        M[rows, np.arange(D2)] = self.phases
        S = unitary_to_superop(self.unitary)
        if Basis(basis) is not Basis.WEYL:
            M = comp_to_basis(S, self.d, self.m, basis)
        return LocalSuperOp(M, support, self.d, basis, label or f"clifford:{self.word}", dense=S,
                            is_cptp=True, unital=True)

    def inverse(self) -> "CliffordGate":
        return CliffordGate.from_unitary(self.unitary.conj().T, self.d, self.m,
                                         invert_word(self.word, self.d, self.m), verify=False)

    def then(self, other: "CliffordGate") -> "CliffordGate":
        """Apply ``self`` first, then ``other``."""
        word = ".".join(x for x in (self.word, other.word) if x)
        return CliffordGate.from_unitary(other.unitary @ self.unitary, self.d, self.m, word, verify=False)

    def __repr__(self):
        return f"CliffordGate(word={self.word!r}, d={self.d}, m={self.m})"


def clifford_action(g: CliffordGate, w: WeylIndex) -> Tuple[complex, WeylIndex]:
    """``(phase, w')`` with ``C W_w C^dag = phase * W_{w'}``."""
    return g.image(w)


@lru_cache(maxsize=None)
def _local_generator_symplectics(d: int):
    """Single-qudit generators as 2x2 symplectic matrices on ``(a, b)``."""
    out = {}
    out["F"] = CliffordGate.from_word("F@0", d, 1).symplectic
    out["P"] = CliffordGate.from_word("P@0", d, 1).symplectic
    return out


@lru_cache(maxsize=None)
def _local_reducers(d: int) -> Dict[Tuple[int, int], Tuple[str, Tuple[int, int]]]:
    """For each nonzero local ``(a, b)`` a single-qudit word mapping it to ``(a', 0)``, ``a' != 0``.

    Found by breadth-first search over words in ``F`` and ``P``.
    """
    gens = _local_generator_symplectics(d)
    out = {}
    for a0 in range(d):
        for b0 in range(d):
            if a0 == 0 and b0 == 0:
                continue
            frontier = [("", np.array([a0, b0]))]
            seen = {(a0, b0)}
            found = None
            while frontier and found is None:
                nxt = []
                for w, v in frontier:
                    if v[1] == 0:
                        found = (w, (int(v[0]), 0))
                        break
                    for name, S in gens.items():
                        u = (S @ v) % d
                        key = (int(u[0]), int(u[1]))
                        if key not in seen:
                            seen.add(key)
                            nxt.append(((w + "." if w else "") + f"{name}@{{q}}", u))
                frontier = nxt
            out[(a0, b0)] = found
    return out


def _apply_word_to_vec(word: str, vec: np.ndarray, d: int, m: int) -> np.ndarray:
    if not word:
        return vec
    S = CliffordGate.from_word(word, d, m).symplectic
    return (S @ vec) % d


def _reduce_to_z0(w: WeylIndex) -> str:
    """Word of generators mapping ``w`` (non-identity) to ``Z^a`` on qudit 0 and then to ``Z_0``."""
    d, m = w.d, w.n
    words: List[str] = []
    vec = w.vector()

    def push(word):
        nonlocal vec
        if word:
            words.append(word)
            vec = _apply_word_to_vec(word, vec, d, m)

    # 1. make every qudit Z-type
    red = _local_reducers(d)
    for q in range(m):
        a, b = int(vec[q]), int(vec[m + q])
        if b != 0:
            push(red[(a, b)][0].replace("{q}", str(q)))
    # 2. collect all Z-weight on qudit 0 using controlled sums
    def candidates(i, j):
        for r in range(1, d):
            yield f"CSUM^{r}@{i},{j}" if r > 1 else f"CSUM@{i},{j}"

    if vec[0] == 0:
        k = next(q for q in range(m) if vec[q] != 0)
        for word in itertools.chain(candidates(0, k), candidates(k, 0)):
            v = _apply_word_to_vec(word, vec, d, m)
            if v[0] != 0 and not v[m:].any():
                push(word)
                break
    for k in range(1, m):
        if vec[k] == 0:
            continue
        for word in itertools.chain(candidates(0, k), candidates(k, 0)):
            v = _apply_word_to_vec(word, vec, d, m)
            if v[k] == 0 and v[0] != 0 and not v[m:].any():
                push(word)
                break
        else:  # pragma: no cover - cannot happen for prime d
            raise RuntimeError("failed to eliminate Z-weight")
    # 3. normalize the exponent
    a0 = int(vec[0])
    if a0 != 1:
        # conjugation by M_c scales the Z exponent by c^{-1}
        for c in range(2, d):
            word = f"M{c}@0"
            v = _apply_word_to_vec(word, vec, d, m)
            if v[0] == 1:
                push(word)
                break
    assert vec[0] == 1 and not vec[1:].any(), "reduction failed"
    return ".".join(words)


def solve_clifford_mapping(w1: WeylIndex, w2: WeylIndex) -> CliffordGate:
    """Clifford ``C`` with ``C W_{w1} C^dag`` proportional to ``W_{w2}``.

    Built from Fourier, phase, multiplication and controlled-sum generators.
    """
    if w1.d != w2.d or w1.n != w2.n:
        raise ValueError("labels live in different spaces")
    if w1.is_identity() or w2.is_identity():
        raise ValueError("the identity label cannot be mapped to or from a non-identity label")
    d, m = w1.d, w1.n
    if w1 == w2:
        return CliffordGate.identity(d, m)
    word1 = _reduce_to_z0(w1)
    word2 = _reduce_to_z0(w2)
    word = ".".join(x for x in (word1, invert_word(word2, d, m)) if x)
    gate = CliffordGate.from_unitary(word_unitary(word, d, m), d, m, word, verify=m <= 2)
    _, img = gate.image(w1)
    if img != w2:  # pragma: no cover - guarded by construction
        raise RuntimeError(f"Clifford solver produced {img} instead of {w2}")
    return gate


# ---------------------------------------------------------------------------
# rotations
# ---------------------------------------------------------------------------
@dataclass(frozen=True)
class RotationGate:
    """Single-qubit rotation ``exp(-i theta Y / 2)`` (``d = 2`` only)."""

    theta: float
    target: int = 0
    axis: str = "Y"
    d: int = 2

    def __post_init__(self):
        if self.d != 2:
            raise ValueError("rotation gates are defined for qubits only")
        if self.axis.upper() != "Y":
            raise ValueError("only Y rotations are supported")
        if not np.isfinite(self.theta):
            raise ValueError("rotation angle must be finite")

    def unitary(self) -> np.ndarray:
        c, s = np.cos(self.theta / 2), np.sin(self.theta / 2)
        return np.array([[c, -s], [s, c]], dtype=complex)


def rotation_superop(g: RotationGate, basis=Basis.WEYL) -> LocalSuperOp:
    """Superoperator of conjugation by ``exp(-i theta Y / 2)`` on ``g.target``."""
    if g.d != 2:
        raise ValueError("rotation gates are defined for qubits only")
    return channel_to_superop(unitary=g.unitary(), support=(g.target,), d=2, basis=basis,
                              label=f"rotation_y:{g.theta}")


def phi(theta: float) -> float:
    """Column l1 norm of a Y rotation by ``theta``: ``|cos theta| + |sin theta|``."""
    return abs(np.cos(theta)) + abs(np.sin(theta))
