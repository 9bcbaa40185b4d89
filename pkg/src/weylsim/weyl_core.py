"""Exact arithmetic for the Weyl-Heisenberg group on n qudits of prime dimension.

A Weyl operator is labelled by a pair of vectors ``(a, b)`` over Z_d and equals
the tensor product of single-qudit factors ``Z^{a_i} X^{b_i}``, where

    X|j> = |j + 1 mod d>,    Z|j> = exp(2 pi i j / d) |j>.

Phases are kept as integers modulo d (powers of ``nu = exp(2 pi i / d)``) so
products and conjugations are exact.  The dense helpers (``materialize``,
``weyl_coefficient``) serve as the oracle for every property test.

Integer encoding
----------------
Each qudit carries a local code ``q = a * d + b`` in ``[0, d^2)``.  A
multi-qudit index is encoded big-endian, qudit 0 being the most significant
digit, which matches the ``np.kron`` ordering used by ``materialize``:

    code = sum_i q_i * (d^2)^(n - 1 - i)
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Sequence, Tuple

import numpy as np

#: Largest Hilbert-space dimension ``d**n`` that ``materialize`` will build.
MAX_DENSE_DIM = 4096


class DimensionMismatch(ValueError):
    """Raised when two objects live on different (d, n) spaces."""


class SizeLimitExceeded(MemoryError):
    """Raised when a dense matrix would exceed :data:`MAX_DENSE_DIM`."""


def is_prime(d: int) -> bool:
    """Return True if ``d`` is a prime number."""
    if d < 2:
        return False
    if d < 4:
        return True
    if d % 2 == 0:
        return False
    k = 3
    while k * k <= d:
        if d % k == 0:
            return False
        k += 2
    return True


def check_prime(d: int) -> int:
    d = int(d)
    if not is_prime(d):
        raise ValueError(f"qudit dimension must be prime, got d={d}")
    return d


@dataclass(frozen=True)
class WeylIndex:
    """Label ``(a, b)`` of the Weyl operator ``W = (x)_i Z^{a_i} X^{b_i}``.

    Parameters
    ----------
    a, b : sequence of int
        Exponent vectors of equal length ``n``; entries are reduced mod ``d``
        only if they are already in range (out-of-range entries raise).
    d : int
        Prime local dimension.
    """

    a: Tuple[int, ...]
    b: Tuple[int, ...]
    d: int

    def __post_init__(self):
        check_prime(self.d)
        a = tuple(int(x) for x in self.a)
        b = tuple(int(x) for x in self.b)
        if len(a) != len(b) or len(a) < 1:
            raise ValueError("a and b must be non-empty and of equal length")
        for x in a + b:
            if not 0 <= x < self.d:
                raise ValueError(f"entries must lie in [0, {self.d}), got {x}")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)

    # ------------------------------------------------------------------ basics
    @property
    def n(self) -> int:
        return len(self.a)

    @classmethod
    def identity(cls, d: int, n: int) -> "WeylIndex":
        return cls((0,) * n, (0,) * n, d)

    @classmethod
    def from_vectors(cls, a: Iterable[int], b: Iterable[int], d: int) -> "WeylIndex":
        """Build an index reducing the entries modulo ``d``."""
        return cls(tuple(int(x) % d for x in a), tuple(int(x) % d for x in b), d)

    def is_identity(self) -> bool:
        return not any(self.a) and not any(self.b)

    def vector(self) -> np.ndarray:
        """Concatenated symplectic vector ``(a_0..a_{n-1}, b_0..b_{n-1})``."""
        return np.array(self.a + self.b, dtype=np.int64)

    def support(self) -> Tuple[int, ...]:
        """Qudits on which the operator acts non-trivially."""
        return tuple(i for i in range(self.n) if self.a[i] or self.b[i])

    # -------------------------------------------------------------- encodings
    def local_codes(self) -> np.ndarray:
        return np.array([x * self.d + y for x, y in zip(self.a, self.b)], dtype=np.int64)

    @property
    def code(self) -> int:
        d2 = self.d * self.d
        c = 0
        for q in self.local_codes():
            c = c * d2 + int(q)
        return c

    @classmethod
    def from_code(cls, code: int, d: int, n: int) -> "WeylIndex":
        d2 = d * d
        if not 0 <= code < d2 ** n:
            raise ValueError("code out of range")
        qs = []
        for _ in range(n):
            qs.append(code % d2)
            code //= d2
        qs.reverse()
        return cls(tuple(q // d for q in qs), tuple(q % d for q in qs), d)

    @classmethod
    def from_local_codes(cls, codes: Sequence[int], d: int) -> "WeylIndex":
        return cls(tuple(int(q) // d for q in codes), tuple(int(q) % d for q in codes), d)

    def to_string(self) -> str:
        """Serialize as ``"a1...an|b1...bn"`` in base-d digits."""
        return "".join(_digit(x) for x in self.a) + "|" + "".join(_digit(x) for x in self.b)

    @classmethod
    def from_string(cls, s: str, d: int) -> "WeylIndex":
        try:
            left, right = s.strip().split("|")
        except ValueError as exc:
            raise ValueError(f"malformed Weyl label {s!r}; expected 'a...|b...'") from exc
        if len(left) != len(right):
            raise ValueError(f"malformed Weyl label {s!r}; halves differ in length")
        return cls(tuple(int(c, 36) for c in left), tuple(int(c, 36) for c in right), d)

    def __str__(self) -> str:
        return self.to_string()

    # -------------------------------------------------------------- structure
    def restrict(self, support: Sequence[int]) -> "WeylIndex":
        return WeylIndex(tuple(self.a[i] for i in support), tuple(self.b[i] for i in support), self.d)

    def embed(self, support: Sequence[int], n: int) -> "WeylIndex":
        """Place this index on ``support`` inside an ``n``-qudit register."""
        if len(support) != self.n:
            raise DimensionMismatch("support length must equal index length")
        a = [0] * n
        b = [0] * n
        for j, q in enumerate(support):
            a[q] = self.a[j]
            b[q] = self.b[j]
        return WeylIndex(tuple(a), tuple(b), self.d)

    def negate(self) -> "WeylIndex":
        d = self.d
        return WeylIndex(tuple((-x) % d for x in self.a), tuple((-x) % d for x in self.b), d)


def _digit(x: int) -> str:
    return "0123456789abcdefghijklmnopqrstuvwxyz"[x]


def _check_pair(w1: WeylIndex, w2: WeylIndex) -> None:
    if w1.d != w2.d or w1.n != w2.n:
        raise DimensionMismatch(f"index spaces differ: (d={w1.d}, n={w1.n}) vs (d={w2.d}, n={w2.n})")


def all_indices(d: int, n: int):
    """Iterate over all ``d^(2n)`` indices in code order."""
    for c in range(d ** (2 * n)):
        yield WeylIndex.from_code(c, d, n)


# ---------------------------------------------------------------------------
# group operations
# ---------------------------------------------------------------------------
def weyl_mul(w1: WeylIndex, w2: WeylIndex) -> Tuple[int, WeylIndex]:
    """Multiply two Weyl operators.

    Returns ``(k, w3)`` with ``W(w1) W(w2) = nu^k W(w3)``.  Moving ``X^{b1}``
    past ``Z^{a2}`` uses ``X^b Z^a = nu^{-ab} Z^a X^b``, hence
    ``k = -sum_i b1_i a2_i (mod d)``.
    """
    _check_pair(w1, w2)
    d = w1.d
    k = -sum(x * y for x, y in zip(w1.b, w2.a)) % d
    w3 = WeylIndex(
        tuple((x + y) % d for x, y in zip(w1.a, w2.a)),
        tuple((x + y) % d for x, y in zip(w1.b, w2.b)),
        d,
    )
    return k, w3


def weyl_conjugate(w1: WeylIndex, w2: WeylIndex) -> int:
    """Phase exponent acquired when ``w1`` conjugates ``w2``.

    ``W1 W2 W1^dagger = nu^k W2`` with ``k = sum_i (a1_i b2_i - b1_i a2_i) mod d``,
    which follows from ``W1 W2 = nu^{-b1.a2} W12`` and ``W2 W1 = nu^{-b2.a1} W12``.
    """
    _check_pair(w1, w2)
    return sum(a1 * b2 - b1 * a2 for a1, b1, a2, b2 in zip(w1.a, w1.b, w2.a, w2.b)) % w1.d


def weyl_inverse(w: WeylIndex) -> Tuple[int, WeylIndex]:
    """Return ``(k, w')`` with ``W(w)^dagger = nu^k W(w')``."""
    d = w.d
    wn = w.negate()
    # W(-a,-b) W(a,b) = nu^{-(-b).a} I = nu^{a.b} I, so W^dag = nu^{-a.b} W(-a,-b)
    k = -sum(x * y for x, y in zip(w.a, w.b)) % d
    return k, wn


def character(label: WeylIndex, arg: WeylIndex) -> complex:
    """Character ``chi_label(arg) = exp(2 pi i / d (<b, a0> - <a, b0>))``."""
    _check_pair(label, arg)
    d = label.d
    k = (sum(x * y for x, y in zip(label.b, arg.a)) - sum(x * y for x, y in zip(label.a, arg.b))) % d
    return complex(np.exp(2j * np.pi * k / d))


def phase_value(k: int, d: int) -> complex:
    """Numerical value of ``nu^k``."""
    return complex(np.exp(2j * np.pi * (k % d) / d))


# ---------------------------------------------------------------------------
# dense oracle
# ---------------------------------------------------------------------------
@lru_cache(maxsize=None)
def shift_matrix(d: int) -> np.ndarray:
    X = np.zeros((d, d), dtype=complex)
    for j in range(d):
        X[(j + 1) % d, j] = 1.0
    X.setflags(write=False)
    return X


@lru_cache(maxsize=None)
def clock_matrix(d: int) -> np.ndarray:
    Z = np.diag(np.exp(2j * np.pi * np.arange(d) / d))
    Z.setflags(write=False)
    return Z


@lru_cache(maxsize=None)
def local_weyl_matrices(d: int) -> np.ndarray:
    """Array of shape ``(d^2, d, d)`` with ``Z^a X^b`` at local code ``a*d + b``."""
    X = shift_matrix(d)
    Z = clock_matrix(d)
    out = np.empty((d * d, d, d), dtype=complex)
    for a in range(d):
        Za = np.linalg.matrix_power(Z, a)
        for b in range(d):
            out[a * d + b] = Za @ np.linalg.matrix_power(X, b)
    out.setflags(write=False)
    return out


def materialize(w: WeylIndex) -> np.ndarray:
    """Dense ``d^n x d^n`` matrix of the Weyl operator ``w``."""
    dim = w.d ** w.n
    if dim > MAX_DENSE_DIM:
        raise SizeLimitExceeded(f"dense dimension {dim} exceeds {MAX_DENSE_DIM}")
    loc = local_weyl_matrices(w.d)
    out = np.ones((1, 1), dtype=complex)
    for q in w.local_codes():
        out = np.kron(out, loc[q])
    return out


def weyl_coefficient(X: np.ndarray, w: WeylIndex) -> complex:
    """Normalized Hilbert-Schmidt coefficient ``d^{-n} tr(W^dagger X)``."""
    X = np.asarray(X)
    dim = w.d ** w.n
    if X.shape != (dim, dim):
        raise DimensionMismatch(f"operator shape {X.shape} does not match d^n = {dim}")
    W = materialize(w)
    return complex(np.vdot(W, X) / dim)


def weyl_decompose(X: np.ndarray, d: int, n: int) -> np.ndarray:
    """All coefficients ``d^{-n} tr(W^dagger X)`` indexed by code."""
    return np.array([weyl_coefficient(X, w) for w in all_indices(d, n)])


def weyl_reconstruct(coeffs: np.ndarray, d: int, n: int) -> np.ndarray:
    """Inverse of :func:`weyl_decompose`."""
    dim = d ** n
    out = np.zeros((dim, dim), dtype=complex)
    for c, w in zip(coeffs, all_indices(d, n)):
        if c != 0:
            out += c * materialize(w)
    return out
