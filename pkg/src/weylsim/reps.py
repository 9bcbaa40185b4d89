"""Vector representations of states/observables and local superoperators.

Two product bases are supported:

* ``Basis.WEYL`` - the Weyl operators ``W_(a,b)``; normalization ``c = d^{-m}``.
* ``Basis.COMPUTATIONAL`` - matrix units ``|i><j|``; normalization ``c = 1``.

For a basis ``{B_k}`` with ``tr(B_k^dag B_l) = delta_kl / c`` the conventions are

* state:       ``rho(k) = tr(B_k^dag rho)``
* observable:  ``O(k)   = c tr(B_k^dag O)``
* channel:     ``M[r, k] = c tr(B_r^dag N(B_k))``

so that ``N(rho)(r) = sum_k M[r, k] rho(k)`` and
``tr(O rho) = sum_k conj(O(k)) rho(k)`` for Hermitian ``O``.  In the Weyl
basis this puts the ``d^{-n}`` factor on the observable, which keeps
``|rho(a,b)| <= 1`` for states.

Multi-qudit basis labels are encoded big-endian over the support with the
per-qudit local code ``a*d + b`` (Weyl) or ``i*d + j`` (computational).
"""
from __future__ import annotations

import enum
import warnings
from dataclasses import dataclass, field
from functools import lru_cache
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np

from . import kernels
from .weyl_core import WeylIndex, check_prime, local_weyl_matrices

#: Default cap on the number of qudits a single local superoperator may touch.
DEFAULT_MAX_ARITY = 3
#: Hard cap on the number of columns ``d^(2m)`` of a local superoperator.
MAX_SUPEROP_DIM = 4096


class Basis(str, enum.Enum):
    WEYL = "weyl"
    COMPUTATIONAL = "computational"


class ArityExceeded(ValueError):
    """A channel acts on more qudits than the configured local-arity cap."""


class ZeroColumn(ValueError):
    """A column with zero l1 norm was sampled; the path weight is exactly zero."""


class NonCPTPWarning(UserWarning):
    """Issued when a linear map that is not a quantum channel is ingested."""


# ---------------------------------------------------------------------------
# basis helpers
# ---------------------------------------------------------------------------
@lru_cache(maxsize=None)
def local_basis(d: int, basis: Basis = Basis.WEYL) -> np.ndarray:
    """Single-qudit basis matrices, shape ``(d^2, d, d)``, indexed by local code."""
    basis = Basis(basis)
    if basis is Basis.WEYL:
        return local_weyl_matrices(d)
    out = np.zeros((d * d, d, d), dtype=complex)
    for i in range(d):
        for j in range(d):
            out[i * d + j, i, j] = 1.0
    out.setflags(write=False)
    return out


def norm_factor(d: int, m: int, basis: Basis = Basis.WEYL) -> float:
    return float(d) ** (-m) if Basis(basis) is Basis.WEYL else 1.0


@lru_cache(maxsize=32)
def basis_vectors(d: int, m: int, basis: Basis = Basis.WEYL) -> np.ndarray:
    """Matrix ``V`` whose column ``k`` is the row-major ``vec`` of ``B_k`` on ``m`` qudits."""
    loc = local_basis(d, basis)
    D = d ** m
    mats = loc
    for _ in range(m - 1):
        mats = np.einsum("aij,bkl->abikjl", mats, loc).reshape(mats.shape[0] * d * d, mats.shape[1] * d,
                                                              mats.shape[2] * d)
    V = mats.reshape(d ** (2 * m), D * D).T.copy()
    V.setflags(write=False)
    return V


def basis_matrices(d: int, m: int, basis: Basis = Basis.WEYL) -> np.ndarray:
    """All ``d^(2m)`` basis matrices on ``m`` qudits, shape ``(d^2m, d^m, d^m)``."""
    D = d ** m
    return basis_vectors(d, m, basis).T.reshape(-1, D, D)


def kraus_to_superop(kraus: Sequence[np.ndarray]) -> np.ndarray:
    """Row-major superoperator ``sum_K K (x) conj(K)``."""
    kraus = [np.asarray(K, dtype=complex) for K in kraus]
    D = kraus[0].shape[0]
    S = np.zeros((D * D, D * D), dtype=complex)
    for K in kraus:
        S += np.kron(K, K.conj())
    return S


def unitary_to_superop(U: np.ndarray) -> np.ndarray:
    U = np.asarray(U, dtype=complex)
    return np.kron(U, U.conj())


def choi_matrix(S: np.ndarray) -> np.ndarray:
    """Choi matrix ``sum_ij |i><j| (x) N(|i><j|)`` of a row-major superoperator."""
    D = int(round(np.sqrt(S.shape[0])))
    # S[(k,l),(i,j)] -> J[(i,k),(j,l)]
    return S.reshape(D, D, D, D).transpose(2, 0, 3, 1).reshape(D * D, D * D)


def cptp_defects(S: np.ndarray) -> Tuple[float, float]:
    """Return ``(min Choi eigenvalue, trace-preservation defect)``."""
    D = int(round(np.sqrt(S.shape[0])))
    J = choi_matrix(S)
    Jh = 0.5 * (J + J.conj().T)
    min_eig = float(np.linalg.eigvalsh(Jh).min())
    # partial trace over output must be the identity
    tp = J.reshape(D, D, D, D).trace(axis1=1, axis2=3)
    tp_defect = float(np.abs(tp - np.eye(D)).max())
    herm_defect = float(np.abs(J - J.conj().T).max())
    return min_eig - herm_defect, tp_defect


def snap(M: np.ndarray, tol: float = 1e-13) -> np.ndarray:
    """Remove floating-point dust: zero tiny real/imaginary parts and snap near +-1 to +-1.

    Keeps signed permutations exact so Clifford norms are exactly one.
    """
    M = np.array(M, dtype=complex)
    re, im = M.real.copy(), M.imag.copy()
    for part in (re, im):
        part[np.abs(part) < tol] = 0.0
        near = np.abs(np.abs(part) - 1.0) < tol
        part[near] = np.sign(part[near])
    return re + 1j * im


def comp_to_basis(S: np.ndarray, d: int, m: int, basis: Basis = Basis.WEYL) -> np.ndarray:
    """Convert a row-major superoperator into the basis representation ``M``."""
    V = basis_vectors(d, m, basis)
    return snap(norm_factor(d, m, basis) * (V.conj().T @ S @ V))


def basis_to_comp(M: np.ndarray, d: int, m: int, basis: Basis = Basis.WEYL) -> np.ndarray:
    """Inverse of :func:`comp_to_basis`."""
    V = basis_vectors(d, m, basis)
    c = norm_factor(d, m, basis)
    # V^H V = I / c, hence V^{-1} = c V^H
    return c * (V @ M @ V.conj().T)


def split_codes(code: Union[int, np.ndarray], d: int, m: int) -> np.ndarray:
    """Big-endian split of a multi-qudit code into per-qudit local codes."""
    d2 = d * d
    code = np.asarray(code, dtype=np.int64)
    out = np.empty(code.shape + (m,), dtype=np.int64)
    r = code.copy()
    for j in range(m - 1, -1, -1):
        out[..., j] = r % d2
        r = r // d2
    return out


def join_codes(codes: np.ndarray, d: int) -> np.ndarray:
    d2 = d * d
    codes = np.asarray(codes, dtype=np.int64)
    out = np.zeros(codes.shape[:-1], dtype=np.int64)
    for j in range(codes.shape[-1]):
        out = out * d2 + codes[..., j]
    return out


# ---------------------------------------------------------------------------
# local superoperators
# ---------------------------------------------------------------------------
class LocalSuperOp:
    """A linear map on ``m`` qudits in a product basis, with l1 sampling tables.

    Parameters
    ----------
    entries : ndarray, shape (d^2m, d^2m)
        ``M[row, col] = c tr(B_row^dag N(B_col))``.
    support : sequence of int
        Qudits the map acts on, in the order used by the local codes.
    d : int
        Local dimension.
    basis : Basis
    label : str, optional
        Human-readable tag carried into circuit descriptions.
    dense : ndarray, optional
        The row-major computational superoperator the map was built from.  It is
        retained verbatim so that dense simulation does not round-trip through
        the basis representation.  Derived from ``entries`` when omitted.
    is_cptp : bool, optional
        Channel flag; computed from the Choi matrix when omitted.
    """

    def __init__(self, entries, support, d, basis=Basis.WEYL, label="", dense=None, is_cptp=None,
                 unital=None):
        self.d = check_prime(d)
        self.support = tuple(int(q) for q in support)
        self.m = len(self.support)
        if len(set(self.support)) != self.m:
            raise ValueError(f"support has repeated qudits: {self.support}")
        self.basis = Basis(basis)
        D = d ** (2 * self.m)
        entries = np.array(entries, dtype=complex)
        if entries.shape != (D, D):
            raise ValueError(f"entries must have shape {(D, D)}, got {entries.shape}")
        self.entries = entries
        self.entries.setflags(write=False)
        self.label = label
        if dense is None:
            dense = basis_to_comp(entries, d, self.m, self.basis)
        self.dense = np.asarray(dense, dtype=complex)
        self.dense.setflags(write=False)
        if is_cptp is None:
            min_eig, tp = cptp_defects(self.dense)
            is_cptp = min_eig > -1e-8 and tp < 1e-8
        self.is_cptp = bool(is_cptp)
        if unital is None:
            Dm = d ** self.m
            eye = np.eye(Dm).reshape(-1)
            unital = bool(np.abs(self.dense @ eye - eye).max() < 1e-10)
        self.unital = bool(unital)

        absval = np.abs(entries)
        self.column_l1 = absval.sum(axis=0)
        self.column_l1.setflags(write=False)
        with np.errstate(invalid="ignore", divide="ignore"):
            phase = np.where(absval > 0, entries / np.where(absval > 0, absval, 1.0), 0.0)
        # tables are stored column-major: [col, row]
        self.phase = np.ascontiguousarray(phase.T)
        self.phase.setflags(write=False)
        prob, alias = kernels.build_alias(absval.T)
        self.alias_prob = prob
        self.alias_idx = alias
        self.alias_prob.setflags(write=False)
        self.alias_idx.setflags(write=False)

    # ----------------------------------------------------------------- basics
    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    def __repr__(self) -> str:
        return f"LocalSuperOp(label={self.label!r}, support={self.support}, d={self.d}, basis={self.basis.value})"

    def l1_to_l1_norm(self) -> float:
        return float(self.column_l1.max())

    def relabel(self, support=None, label=None) -> "LocalSuperOp":
        return LocalSuperOp(self.entries, self.support if support is None else support, self.d, self.basis,
                            self.label if label is None else label, dense=self.dense, is_cptp=self.is_cptp,
                            unital=self.unital)

    def col_code(self, col) -> int:
        if isinstance(col, WeylIndex):
            if col.n != self.m or col.d != self.d:
                raise ValueError("column index does not match the operator support")
            return col.code
        return int(col)


def channel_to_superop(kraus=None, superop=None, unitary=None, support=(0,), d=2, basis=Basis.WEYL,
                       max_arity=DEFAULT_MAX_ARITY, label="") -> LocalSuperOp:
    """Build a :class:`LocalSuperOp` from Kraus operators, a unitary, or a dense superoperator.

    Exactly one of ``kraus``, ``superop`` (row-major computational) or
    ``unitary`` must be given.  Maps that are not CPTP are accepted with a
    :class:`NonCPTPWarning`.
    """
    d = check_prime(d)
    m = len(support)
    if m > max_arity:
        raise ArityExceeded(f"map acts on {m} qudits; local-arity cap is {max_arity}")
    if d ** (2 * m) > MAX_SUPEROP_DIM:
        raise ArityExceeded(f"superoperator dimension d^2m = {d ** (2 * m)} exceeds {MAX_SUPEROP_DIM}")
    given = [x is not None for x in (kraus, superop, unitary)]
    if sum(given) != 1:
        raise ValueError("give exactly one of kraus, superop, unitary")
    Dm = d ** m
    if kraus is not None:
        kraus = [np.asarray(K, dtype=complex) for K in kraus]
        for K in kraus:
            if K.shape != (Dm, Dm):
                raise ValueError(f"Kraus operator shape {K.shape} does not match d^m = {Dm}")
        S = kraus_to_superop(kraus)
    elif unitary is not None:
        U = np.asarray(unitary, dtype=complex)
        if U.shape != (Dm, Dm):
            raise ValueError(f"unitary shape {U.shape} does not match d^m = {Dm}")
        S = unitary_to_superop(U)
    else:
        S = np.asarray(superop, dtype=complex)
        if S.shape != (Dm * Dm, Dm * Dm):
            raise ValueError(f"superoperator shape {S.shape} does not match d^2m = {Dm * Dm}")
    min_eig, tp = cptp_defects(S)
    is_cptp = min_eig > -1e-8 and tp < 1e-8
    if not is_cptp:
        warnings.warn(f"map {label!r} is not CPTP (min Choi eig {min_eig:.3g}, TP defect {tp:.3g}); "
                      "sampling proceeds on the linear map", NonCPTPWarning, stacklevel=2)
    M = comp_to_basis(S, d, m, basis)
    return LocalSuperOp(M, support, d, basis, label, dense=S, is_cptp=is_cptp)


def superop_from_entries(entries, support, d, basis=Basis.WEYL, label="") -> LocalSuperOp:
    """Wrap a basis-representation matrix directly (e.g. a Lindbladian)."""
    return LocalSuperOp(entries, support, d, basis, label)


def column_sample(op: LocalSuperOp, col, rng: np.random.Generator):
    """Draw a row from column ``col`` with probability ``|M[row, col]| / ||M[:, col]||_1``.

    Returns ``(row, phase)`` where ``phase = M[row, col] / |M[row, col]|``.  The row
    has the same type as ``col`` (a :class:`WeylIndex` or an integer code).

    Raises
    ------
    ZeroColumn
        If the column has zero l1 norm.
    """
    c = op.col_code(col)
    if op.column_l1[c] == 0.0:
        raise ZeroColumn(f"column {col} of {op!r} has zero l1 norm")
    u = np.array([rng.random()])
    row = int(kernels.alias_draw(op.alias_prob[c], op.alias_idx[c], u)[0])
    phase = complex(op.phase[c, row])
    if isinstance(col, WeylIndex):
        return WeylIndex.from_code(row, op.d, op.m), phase
    return row, phase


def l1_to_l1_norm(op: LocalSuperOp) -> float:
    """Maximum column l1 norm."""
    return op.l1_to_l1_norm()


def adjoint_superop(op: LocalSuperOp) -> LocalSuperOp:
    """Heisenberg-picture map: conjugate transpose of the basis representation."""
    return LocalSuperOp(op.entries.conj().T, op.support, op.d, op.basis,
                        label=(op.label + "^*") if op.label else "adjoint",
                        dense=op.dense.conj().T, is_cptp=None, unital=None)


def embed_superop(op: LocalSuperOp, support: Sequence[int]) -> LocalSuperOp:
    """Extend ``op`` by the identity to the larger ``support`` (a superset)."""
    support = tuple(support)
    if not set(op.support) <= set(support):
        raise ValueError("target support must contain the operator support")
    d, m, M = op.d, len(support), op.entries
    pos = [support.index(q) for q in op.support]
    rest = [j for j in range(m) if support[j] not in op.support]
    D = d ** (2 * m)
    codes = split_codes(np.arange(D), d, m)
    sub = join_codes(codes[:, pos], d)
    restc = join_codes(codes[:, rest], d) if rest else np.zeros(D, dtype=np.int64)
    big = M[np.ix_(sub, sub)] * (restc[:, None] == restc[None, :])
    return LocalSuperOp(big, support, d, op.basis, op.label)


def compose_superops(op2: LocalSuperOp, op1: LocalSuperOp) -> LocalSuperOp:
    """Dense composition ``op2 o op1`` on the union of the supports."""
    if op1.basis != op2.basis or op1.d != op2.d:
        raise ValueError("operators live in different bases or dimensions")
    support = tuple(sorted(set(op1.support) | set(op2.support)))
    e1 = embed_superop(op1, support)
    e2 = embed_superop(op2, support)
    return LocalSuperOp(e2.entries @ e1.entries, support, op1.d, op1.basis, f"{op2.label}*{op1.label}")


def tensor_superops(op1: LocalSuperOp, op2: LocalSuperOp) -> LocalSuperOp:
    """Tensor product on the concatenated (disjoint) supports."""
    if set(op1.support) & set(op2.support):
        raise ValueError("supports overlap")
    return LocalSuperOp(np.kron(op1.entries, op2.entries), op1.support + op2.support, op1.d, op1.basis,
                        f"{op1.label}(x){op2.label}")


# ---------------------------------------------------------------------------
# circuits
# ---------------------------------------------------------------------------
@dataclass
class Circuit:
    """Ordered list of local superoperators on ``n`` qudits (application order)."""

    d: int
    n: int
    layers: List[LocalSuperOp] = field(default_factory=list)
    basis: Basis = Basis.WEYL

    def __post_init__(self):
        check_prime(self.d)
        for op in self.layers:
            self._check(op)

    def _check(self, op: LocalSuperOp):
        if op.d != self.d:
            raise ValueError(f"layer {op!r} has d={op.d}, circuit has d={self.d}")
        if Basis(op.basis) is not Basis(self.basis):
            raise ValueError(f"layer {op!r} uses basis {op.basis}, circuit uses {self.basis}")
        if any(not 0 <= q < self.n for q in op.support):
            raise ValueError(f"layer {op!r} has support outside [0, {self.n})")

    def append(self, op: LocalSuperOp) -> "Circuit":
        self._check(op)
        self.layers.append(op)
        return self

    def extend(self, ops) -> "Circuit":
        for op in ops:
            self.append(op)
        return self

    def __len__(self):
        return len(self.layers)

    def __iter__(self):
        return iter(self.layers)

    @property
    def labels(self) -> List[str]:
        return [op.label for op in self.layers]

    def adjoint(self) -> "Circuit":
        """Heisenberg-picture circuit: adjoint layers in reverse order."""
        return Circuit(self.d, self.n, [adjoint_superop(op) for op in reversed(self.layers)], self.basis)


def circuit_norm_groups(circuit: Circuit) -> List[List[int]]:
    """Greedy partition into runs of consecutive layers with pairwise disjoint supports."""
    groups: List[List[int]] = []
    used: set = set()
    for i, op in enumerate(circuit.layers):
        if groups and not (used & set(op.support)):
            groups[-1].append(i)
            used |= set(op.support)
        else:
            groups.append([i])
            used = set(op.support)
    return groups


def circuit_norm_bound(circuit: Circuit) -> float:
    """Upper bound on the l1->l1 norm of the composed circuit.

    Norms multiply exactly within each group of non-overlapping layers (tensor
    products) and sub-multiplicatively across groups.
    """
    bound = 1.0
    for group in circuit_norm_groups(circuit):
        g = 1.0
        for i in group:
            g *= circuit.layers[i].l1_to_l1_norm()
        bound *= g
    return bound


def exact_circuit_norm(circuit: Circuit) -> float:
    """Exact l1->l1 norm of the densely composed circuit (small n only)."""
    support = tuple(range(circuit.n))
    total = np.eye(circuit.d ** (2 * circuit.n), dtype=complex)
    for op in circuit.layers:
        total = embed_superop(op, support).entries @ total
    return float(np.abs(total).sum(axis=0).max())


# ---------------------------------------------------------------------------
# states and observables
# ---------------------------------------------------------------------------
class WeylVector:
    """Product-structured vector representation of a state or observable.

    The vector is the tensor product of ``blocks``, each a pair
    ``(support, amplitudes)`` with ``len(amplitudes) == d^(2|support|)``.  The
    supports must partition ``range(n)``.

    Attributes
    ----------
    kind : {"state", "observable"}
    """

    def __init__(self, kind, d, n, blocks, basis=Basis.WEYL):
        if kind not in ("state", "observable"):
            raise ValueError("kind must be 'state' or 'observable'")
        self.kind = kind
        self.d = check_prime(d)
        self.n = int(n)
        self.basis = Basis(basis)
        seen: List[int] = []
        blk = []
        for support, amps in blocks:
            support = tuple(int(q) for q in support)
            amps = np.array(amps, dtype=complex).reshape(-1)
            if amps.shape[0] != d ** (2 * len(support)):
                raise ValueError("block amplitude length does not match its support")
            amps.setflags(write=False)
            seen.extend(support)
            blk.append((support, amps))
        if sorted(seen) != list(range(self.n)):
            raise ValueError(f"block supports must partition range({self.n}); got {sorted(seen)}")
        self.blocks = blk
        self._l1 = [float(np.abs(a).sum()) for _, a in blk]
        self._tables = [kernels.build_alias(np.abs(a)[None, :]) for _, a in blk]

    # ------------------------------------------------------------------ norms
    def l1_norm(self) -> float:
        return float(np.prod(self._l1))

    def linf_norm(self) -> float:
        return float(np.prod([np.abs(a).max() for _, a in self.blocks]))

    # ----------------------------------------------------------------- access
    def amplitude(self, w) -> complex:
        codes = w.local_codes() if isinstance(w, WeylIndex) else np.asarray(w, dtype=np.int64)
        return complex(self.values(codes[None, :])[0])

    def values(self, codes: np.ndarray) -> np.ndarray:
        """Amplitudes at a batch of per-qudit code rows, shape (S, n) -> (S,)."""
        codes = np.asarray(codes, dtype=np.int64)
        out = np.ones(codes.shape[0], dtype=complex)
        for support, amps in self.blocks:
            out *= amps[join_codes(codes[:, list(support)], self.d)]
        return out

    def sample(self, uniforms: np.ndarray, backend=None) -> Tuple[np.ndarray, np.ndarray]:
        """Draw codes with probability ``|v(k)| / ||v||_1``.

        ``uniforms`` has shape (S, n_blocks).  Returns ``(codes, phases)`` with
        ``phases`` the unit-modulus phase of the drawn amplitude.
        """
        draw = kernels.alias_draw if backend is None else backend.alias_draw
        S = uniforms.shape[0]
        codes = np.zeros((S, self.n), dtype=np.int64)
        phases = np.ones(S, dtype=complex)
        for bi, ((support, amps), (prob, alias)) in enumerate(zip(self.blocks, self._tables)):
            idx = np.asarray(draw(prob[0], alias[0], np.ascontiguousarray(uniforms[:, bi])))
            codes[:, list(support)] = split_codes(idx, self.d, len(support))
            a = amps[idx]
            phases *= a / np.abs(a)
        return codes, phases

    @property
    def n_blocks(self) -> int:
        return len(self.blocks)

    def dense_vector(self) -> np.ndarray:
        """Full amplitude vector over all ``d^(2n)`` codes (small n only)."""
        D = self.d ** (2 * self.n)
        codes = split_codes(np.arange(D), self.d, self.n)
        return self.values(codes)

    def amplitudes(self, tol: float = 0.0) -> dict:
        """Sparse map ``WeylIndex -> amplitude`` of the nonzero entries (small n only)."""
        vec = self.dense_vector()
        return {WeylIndex.from_code(int(c), self.d, self.n): complex(vec[c])
                for c in np.nonzero(np.abs(vec) > tol)[0]}

    def to_operator(self) -> np.ndarray:
        """Reconstruct the dense operator (small n only)."""
        vec = self.dense_vector()
        B = basis_matrices(self.d, self.n, self.basis)
        op = np.tensordot(vec, B, axes=(0, 0))
        if self.kind == "state":
            op = op * norm_factor(self.d, self.n, self.basis)
        return op


def _check_density(rho: np.ndarray, tol: float = 1e-10):
    if not np.allclose(rho, rho.conj().T, atol=tol):
        raise ValueError("density matrix is not Hermitian")
    if abs(np.trace(rho) - 1.0) > tol:
        raise ValueError(f"density matrix has trace {np.trace(rho).real:.6g}, expected 1")
    if np.linalg.eigvalsh(0.5 * (rho + rho.conj().T)).min() < -tol:
        raise ValueError("density matrix is not positive semidefinite")


def _state_amplitudes(rho: np.ndarray, d: int, m: int, basis: Basis) -> np.ndarray:
    V = basis_vectors(d, m, basis)
    return snap(V.conj().T @ np.asarray(rho, dtype=complex).reshape(-1))


def _observable_amplitudes(O: np.ndarray, d: int, m: int, basis: Basis) -> np.ndarray:
    V = basis_vectors(d, m, basis)
    return snap(norm_factor(d, m, basis) * (V.conj().T @ np.asarray(O, dtype=complex).reshape(-1)))


def state_to_weyl(factors: Sequence[np.ndarray], basis=Basis.WEYL, d: Optional[int] = None) -> WeylVector:
    """Product state from single-qudit density matrices (O(n d^2) work)."""
    factors = [np.asarray(f, dtype=complex) for f in factors]
    d = factors[0].shape[0] if d is None else d
    blocks = []
    for i, f in enumerate(factors):
        if f.shape != (d, d):
            raise ValueError(f"factor {i} has shape {f.shape}, expected {(d, d)}")
        _check_density(f)
        blocks.append(((i,), _state_amplitudes(f, d, 1, Basis(basis))))
    return WeylVector("state", d, len(factors), blocks, basis)


def state_from_blocks(blocks, n: int, d: int, basis=Basis.WEYL) -> WeylVector:
    """State that is a product of density matrices on the given supports.

    Qudits not covered by any block are maximally mixed.
    """
    out = []
    covered = set()
    for support, rho in blocks:
        rho = np.asarray(rho, dtype=complex)
        _check_density(rho)
        out.append((tuple(support), _state_amplitudes(rho, d, len(support), Basis(basis))))
        covered |= set(support)
    for q in range(n):
        if q not in covered:
            out.append(((q,), _state_amplitudes(np.eye(d) / d, d, 1, Basis(basis))))
    return WeylVector("state", d, n, out, basis)


def observable_to_weyl(blocks, n: Optional[int] = None, d: Optional[int] = None, basis=Basis.WEYL,
                       check_hermitian: bool = True) -> WeylVector:
    """Observable that is a tensor product of local blocks (identity elsewhere).

    ``blocks`` is either a list of square matrices (one per qudit, in order) or
    a list of ``(support, matrix)`` pairs.
    """
    blocks = list(blocks)
    if blocks and not isinstance(blocks[0], tuple):
        blocks = [((i,), b) for i, b in enumerate(blocks)]
    if d is None:
        first_support, first_mat = blocks[0]
        d = int(round(np.asarray(first_mat).shape[0] ** (1.0 / len(first_support))))
    if n is None:
        n = 1 + max(q for s, _ in blocks for q in s)
    basis = Basis(basis)
    out = []
    covered = set()
    for support, O in blocks:
        O = np.asarray(O, dtype=complex)
        support = tuple(support)
        if O.shape != (d ** len(support),) * 2:
            raise ValueError(f"observable block on {support} has shape {O.shape}")
        if check_hermitian and not np.allclose(O, O.conj().T, atol=1e-12):
            raise ValueError(f"observable block on {support} is not Hermitian")
        out.append((support, _observable_amplitudes(O, d, len(support), basis)))
        covered |= set(support)
    for q in range(n):
        if q not in covered:
            out.append(((q,), _observable_amplitudes(np.eye(d), d, 1, basis)))
    return WeylVector("observable", d, n, out, basis)


_PAULI = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


def pauli_matrix(label: str) -> np.ndarray:
    return _PAULI[label.upper()]


def pauli_observable(label: str, basis=Basis.WEYL) -> WeylVector:
    """Hermitian Pauli string such as ``"ZIZ"`` as an observable vector."""
    return observable_to_weyl([pauli_matrix(c) for c in label], basis=basis)


def weyl_observable(w: WeylIndex, basis=Basis.WEYL) -> WeylVector:
    """A single (not necessarily Hermitian) Weyl operator as an observable vector."""
    loc = local_weyl_matrices(w.d)
    return observable_to_weyl([((i,), loc[q]) for i, q in enumerate(w.local_codes())], n=w.n, d=w.d,
                              basis=basis, check_hermitian=False)


def computational_state(bits: Sequence[int], d: int = 2, basis=Basis.WEYL) -> WeylVector:
    """Product computational-basis state ``|j_1 ... j_n>``."""
    facs = []
    for j in bits:
        f = np.zeros((d, d), dtype=complex)
        f[j, j] = 1.0
        facs.append(f)
    return state_to_weyl(facs, basis=basis, d=d)
