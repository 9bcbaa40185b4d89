"""Weyl randomized benchmarking: dense device simulation and decay estimators.

One run of length ``m`` prepares ``rho``, applies a uniformly random Weyl
operator ``W_0``, then ``m`` rounds of (uniformly random Weyl, noisy target
``T o U``), and finally the single Weyl operator inverting the product of the
``m`` round Weyls.  On the POVM outcome ``E`` the run returns the character
weight ``conj(chi_label(W_0))``, otherwise 0, so that

    E[y] = C mu^m,   C = d^{-n} tr(W^dag rho) tr(E W),
    mu = d^{-n} tr(W^dag (T o U)(W)),   W = W_label.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field, replace
from functools import lru_cache
from typing import Dict, List, Optional, Sequence, Union

import numpy as np

from .noise import CliffordGate, WeylDiagonalChannel, solve_clifford_mapping
from .reps import Basis, LocalSuperOp, comp_to_basis, cptp_defects, unitary_to_superop
from .weyl_core import MAX_DENSE_DIM, SizeLimitExceeded, WeylIndex, local_weyl_matrices, materialize

#: Dimension cap for the dense device simulator (``d^n``).
MAX_DEVICE_DIM = 64


class NonTermination(RuntimeError):
    """The adaptive estimator did not reach its stopping rule (spectral gap ~ 0)."""


class MagnitudeFloor(ValueError):
    """Decay signal too small for reliable phase estimation."""


# ---------------------------------------------------------------------------
# data types
# ---------------------------------------------------------------------------
@lru_cache(maxsize=16)
def _all_weyls(d: int, n: int) -> np.ndarray:
    """Every Weyl matrix on ``n`` qudits, shape (d^2n, d^n, d^n), in code order."""
    loc = local_weyl_matrices(d)
    mats = loc
    for _ in range(n - 1):
        mats = np.einsum("aij,bkl->abikjl", mats, loc).reshape(mats.shape[0] * d * d, mats.shape[1] * d,
                                                              mats.shape[2] * d)
    mats = np.ascontiguousarray(mats)
    mats.setflags(write=False)
    return mats


@lru_cache(maxsize=16)
def _label_arrays(d: int, n: int):
    codes = np.arange(d ** (2 * n))
    a = np.zeros((codes.size, n), dtype=np.int64)
    b = np.zeros((codes.size, n), dtype=np.int64)
    r = codes.copy()
    for j in range(n - 1, -1, -1):
        q = r % (d * d)
        a[:, j], b[:, j] = q // d, q % d
        r //= d * d
    return a, b


def _codes_from(a: np.ndarray, b: np.ndarray, d: int) -> np.ndarray:
    code = np.zeros(a.shape[0], dtype=np.int64)
    for j in range(a.shape[1]):
        code = code * d * d + a[:, j] * d + b[:, j]
    return code


def _as_dense_superop(x, d: int, n: int) -> Optional[np.ndarray]:
    if x is None:
        return None
    if isinstance(x, WeylDiagonalChannel):
        S = x.dense()
        if x.m == 1 and n > 1:
            full = S
            for _ in range(n - 1):
                full = _kron_superop(full, S, d)
            return full
        if x.m != n:
            raise ValueError("Weyl-diagonal channel must act on one qudit or on all qudits")
        return S
    if isinstance(x, CliffordGate):
        return unitary_to_superop(x.unitary)
    if isinstance(x, LocalSuperOp):
        if tuple(x.support) != tuple(range(n)):
            raise ValueError("device maps must act on all qudits in order")
        return np.asarray(x.dense)
    x = np.asarray(x, dtype=complex)
    D = d ** n
    if x.shape == (D, D):
        return unitary_to_superop(x)
    if x.shape == (D * D, D * D):
        return x
    raise ValueError(f"cannot interpret map of shape {x.shape}")


def _kron_superop(S1: np.ndarray, S2: np.ndarray, d: int) -> np.ndarray:
    """Row-major superoperator of ``S1 (x) S2`` (first factor on the leading qudits)."""
    D1 = int(round(np.sqrt(S1.shape[0])))
    D2 = int(round(np.sqrt(S2.shape[0])))
    T = np.einsum("abcd,efgh->aebfcgdh", S1.reshape(D1, D1, D1, D1), S2.reshape(D2, D2, D2, D2))
    D = D1 * D2
    return T.reshape(D * D, D * D)


@dataclass
class DeviceModel:
    """Synthetic device implementing ``T o U`` and, optionally, noisy Weyl gates.

    Parameters
    ----------
    d, n : int
    U : array_like or LocalSuperOp or CliffordGate, optional
        Target unitary (``d^n x d^n``) or its superoperator; identity if omitted.
    T : WeylDiagonalChannel or LocalSuperOp or array_like, optional
        Noise following ``U``; identity if omitted.
    T_W : WeylDiagonalChannel, optional
        Noise following every Weyl gate (one qudit, tensored, or all qudits).
    """

    d: int
    n: int
    U: object = None
    T: object = None
    T_W: object = None

    def __post_init__(self):
        D = self.d ** self.n
        if D > MAX_DEVICE_DIM:
            raise SizeLimitExceeded(f"device dimension {D} exceeds {MAX_DEVICE_DIM}")
        eye = np.eye(D * D, dtype=complex)
        SU = _as_dense_superop(self.U, self.d, self.n)
        ST = _as_dense_superop(self.T, self.d, self.n)
        self.S_U = eye if SU is None else SU
        self.S_T = eye if ST is None else ST
        self.S = self.S_T @ self.S_U
        self.S_W = _as_dense_superop(self.T_W, self.d, self.n)
        for name, S in (("U", self.S_U), ("T", self.S_T), ("T_W", self.S_W)):
            if S is None:
                continue
            min_eig, tp = cptp_defects(S)
            if min_eig < -1e-8 or tp > 1e-8:
                raise ValueError(f"device map {name} is not CPTP within 1e-8")

    def weyl_matrix(self) -> np.ndarray:
        """Weyl-basis matrix of ``T o U``."""
        return comp_to_basis(self.S, self.d, self.n, Basis.WEYL)

    def mu(self, label: WeylIndex, clifford: Optional[CliffordGate] = None) -> complex:
        """Exact decay base ``d^{-n} tr(W^dag (C o T o U)(W))``."""
        S = self.S if clifford is None else unitary_to_superop(clifford.unitary) @ self.S
        W = materialize(label)
        out = (S @ W.reshape(-1)).reshape(W.shape)
        return complex(np.vdot(W, out) / W.shape[0])


@dataclass
class SyntheticDevice:
    """Outcome source with prescribed mean ``C mu^m`` (for estimator harnesses).

    Each run returns ``q / |q|`` with probability ``|q|`` and 0 otherwise.
    """

    mu: complex
    C: complex = 1.0
    d: int = 2
    n: int = 1

    def q(self, m: int) -> complex:
        return complex(self.C * self.mu ** m)


@dataclass
class WRBConfig:
    """Benchmarking configuration for one label."""

    label: WeylIndex
    m: int = 1
    rho: Optional[np.ndarray] = None
    E: Optional[np.ndarray] = None
    runs: int = 1000

    def __post_init__(self):
        if self.m < 1:
            raise ValueError("sequence length must be at least 1")
        if self.rho is None or self.E is None:
            rho, E = choose_state_povm(self.label)
            self.rho = rho if self.rho is None else self.rho
            self.E = E if self.E is None else self.E
        self.rho = np.asarray(self.rho, dtype=complex)
        self.E = np.asarray(self.E, dtype=complex)
        ev = np.linalg.eigvalsh(0.5 * (self.E + self.E.conj().T))
        if ev.min() < -1e-10 or ev.max() > 1 + 1e-10:
            raise ValueError("POVM element must satisfy 0 <= E <= 1")

    def spam_constant(self) -> complex:
        """``C = d^{-n} tr(W^dag rho) tr(E W)``."""
        W = materialize(self.label)
        return complex(np.vdot(W, self.rho) * np.trace(self.E @ W) / W.shape[0])


@dataclass
class BenchmarkRecord:
    """Per-``m`` run outputs for one label."""

    label: WeylIndex
    outputs: Dict[int, np.ndarray] = field(default_factory=dict)

    def add(self, m: int, y: np.ndarray):
        y = np.asarray(y, dtype=complex)
        self.outputs[m] = np.concatenate([self.outputs[m], y]) if m in self.outputs else y

    @property
    def lengths(self) -> List[int]:
        return sorted(self.outputs)

    def q_hat(self, m: int) -> complex:
        return complex(self.outputs[m].mean())

    def stderr(self, m: int) -> float:
        y = self.outputs[m]
        return float(np.sqrt(np.var(y, ddof=1) / y.size)) if y.size > 1 else 0.0

    def Y(self, m: int) -> float:
        return float(self.outputs[m].real.mean())

    def Z(self, m: int) -> float:
        return float(self.outputs[m].imag.mean())

    def q2(self, m: int) -> float:
        """Pair estimator ``mean_k Re(s_k conj(s_{k+l}))`` over the first ``2l`` runs."""
        y = self.outputs[m]
        l = y.size // 2
        return float(np.mean((y[:l] * np.conj(y[l:2 * l])).real)) if l else float("nan")

    def runs(self, m: int) -> int:
        return int(self.outputs[m].size)

    def to_dict(self) -> dict:
        return {"label": self.label.to_string(), "d": self.label.d,
                "points": [{"m": m, "q_hat": [self.q_hat(m).real, self.q_hat(m).imag], "q2": self.q2(m),
                            "stderr": self.stderr(m), "runs": self.runs(m)} for m in self.lengths]}


@dataclass
class MuEstimate:
    """Estimated decay base ``mu = abs * exp(i phase)``."""

    abs: float
    phase: float
    label: WeylIndex
    C: complex
    m_max: int
    samples: int
    q2: Dict[int, float] = field(default_factory=dict)

    @property
    def value(self) -> complex:
        return complex(self.abs * np.exp(1j * self.phase))

    def to_dict(self) -> dict:
        return {"abs": self.abs, "phase": self.phase, "label": self.label.to_string(),
                "C": [complex(self.C).real, complex(self.C).imag], "m_max": self.m_max, "samples": self.samples,
                "q2": {str(k): v for k, v in self.q2.items()}}


# ---------------------------------------------------------------------------
# state / POVM choice
# ---------------------------------------------------------------------------
def choose_state_povm(label: WeylIndex):
    """Product eigenstate of ``W_label`` and the projector onto the matching eigenspace.

    The eigenspace has dimension ``d^(n-1)`` (non-identity label), giving
    ``C = 1/d``; for the identity label ``rho = |0...0><0...0|``, ``E = 1`` and ``C = 1``.
    """
    d, n = label.d, label.n
    loc = local_weyl_matrices(d)
    rho = np.ones((1, 1), dtype=complex)
    lam = 1.0 + 0j
    for q in label.local_codes():
        if q == 0:
            v = np.zeros(d, dtype=complex)
            v[0] = 1.0
        else:
            vals, vecs = np.linalg.eig(loc[q])
            v = vecs[:, 0] / np.linalg.norm(vecs[:, 0])
            lam *= vals[0]
        rho = np.kron(rho, np.outer(v, v.conj()))
    D = d ** n
    if label.is_identity():
        return rho, np.eye(D, dtype=complex)
    W = materialize(label) / lam
    E = np.zeros((D, D), dtype=complex)
    P = np.eye(D, dtype=complex)
    for _ in range(d):
        E += P
        P = P @ W
    E /= d
    return rho, 0.5 * (E + E.conj().T)


# ---------------------------------------------------------------------------
# dense simulation of WRB sequences
# ---------------------------------------------------------------------------
def _conj_batch(rho, Wb):
    return Wb @ rho @ np.conj(np.transpose(Wb, (0, 2, 1)))


def _apply_batch(rho, S):
    R, D, _ = rho.shape
    return (rho.reshape(R, D * D) @ S.T).reshape(R, D, D)


def simulate_runs(device: DeviceModel, cfg: WRBConfig, m: int, runs: int, rng: np.random.Generator,
                  clifford: Optional[CliffordGate] = None, weyl_noise: str = "paired") -> np.ndarray:
    """Outputs of ``runs`` independent sequences of length ``m`` (vectorized).

    Parameters
    ----------
    clifford : CliffordGate, optional
        Noiseless Clifford applied after every noisy ``T o U``.
    weyl_noise : {"paired", "collapsed"}
        With noisy Weyl gates, ``"paired"`` twirls each round explicitly as
        ``W_k^-1 (T o U) W_k`` (two noisy Weyls per round); ``"collapsed"`` uses one
        Weyl per round plus a single final inverse.
    """
    if isinstance(device, SyntheticDevice):
        q = device.q(m)
        hit = rng.random(runs) < abs(q)
        return np.where(hit, q / abs(q) if q != 0 else 0.0, 0.0).astype(complex)
    d, n = device.d, device.n
    D = d ** n
    if cfg.label.d != d or cfg.label.n != n:
        raise ValueError("label does not match the device")
    Wm = _all_weyls(d, n)
    la, lb = _label_arrays(d, n)
    nW = d ** (2 * n)
    S = device.S if clifford is None else unitary_to_superop(clifford.unitary) @ device.S
    SW = device.S_W
    paired = SW is not None and weyl_noise == "paired"
    rho = np.broadcast_to(cfg.rho, (runs, D, D)).copy()
    w0 = rng.integers(nW, size=runs)
    rho = _conj_batch(rho, Wm[w0])
    if SW is not None:
        rho = _apply_batch(rho, SW)
    acc_a = np.zeros((runs, n), dtype=np.int64)
    acc_b = np.zeros((runs, n), dtype=np.int64)
    for _ in range(m):
        wk = rng.integers(nW, size=runs)
        Wb = Wm[wk]
        rho = _conj_batch(rho, Wb)
        if SW is not None:
            rho = _apply_batch(rho, SW)
        rho = _apply_batch(rho, S)
        if paired:
            rho = _conj_batch(rho, np.conj(np.transpose(Wb, (0, 2, 1))))
            rho = _apply_batch(rho, SW)
        else:
            acc_a = (acc_a + la[wk]) % d
            acc_b = (acc_b + lb[wk]) % d
    if not paired:
        inv = _codes_from((-acc_a) % d, (-acc_b) % d, d)
        rho = _conj_batch(rho, Wm[inv])
        if SW is not None:
            rho = _apply_batch(rho, SW)
    p = np.einsum("ij,rji->r", cfg.E, rho).real
    hit = rng.random(runs) < np.clip(p, 0.0, 1.0)
    a, b = np.array(cfg.label.a), np.array(cfg.label.b)
    k = (la[w0] @ b - lb[w0] @ a) % d
    chi_conj = np.exp(-2j * np.pi * k / d)
    return np.where(hit, chi_conj, 0.0)


def run_wrb_once(device, cfg: WRBConfig, rng: np.random.Generator, clifford=None) -> complex:
    """Output of a single benchmarking sequence of length ``cfg.m``."""
    return complex(simulate_runs(device, cfg, cfg.m, 1, rng, clifford)[0])


def _spam(device, cfg) -> complex:
    return complex(device.C) if isinstance(device, SyntheticDevice) else cfg.spam_constant()


def estimate_q2(device, cfg: WRBConfig, l: int, rng: np.random.Generator, m: Optional[int] = None,
                clifford=None, record: Optional[BenchmarkRecord] = None) -> float:
    """Unbiased estimate of ``|q(m)|^2`` from ``2l`` independent runs."""
    if l < 1:
        raise ValueError("pair count must be at least 1")
    m = cfg.m if m is None else m
    y = simulate_runs(device, cfg, m, 2 * l, rng, clifford)
    if record is not None:
        record.add(m, y)
    return float(np.mean((y[:l] * np.conj(y[l:])).real))


def pairs_needed(target: float, delta: float) -> int:
    """Hoeffding pair count for additive error ``target`` on variables in [-1, 1]."""
    return int(math.ceil(2.0 * math.log(2.0 / delta) / target ** 2))


def adaptive_abs_mu(device, cfg: WRBConfig, epsilon: float, delta: float, rng: np.random.Generator,
                    u: float = 1.0, max_iter: int = 10, clifford=None,
                    record: Optional[BenchmarkRecord] = None) -> MuEstimate:
    """Doubling-schedule estimator of ``|mu|`` with multiplicative error ``O(eps (1 - |mu|))``.

    Sequence lengths ``m_i = 2^i + 1`` are used until ``|q(m_i)|^2 <= |q(1)|^2 / 3``.
    Each ``|q(m)|^2`` is estimated to additive error ``eps C^2 u^2`` with failure
    probability ``delta / max_iter``.  Since ``q(m) / q(1) = mu^(m-1)``, the output is
    ``(q2(m) / q2(1))^(1 / (2 (m - 1)))``.
    """
    C = _spam(device, cfg)
    target = epsilon * abs(C) ** 2 * u ** 2
    l = pairs_needed(target, delta / max_iter)
    rec = record if record is not None else BenchmarkRecord(cfg.label)
    q1 = estimate_q2(device, cfg, l, rng, 1, clifford, rec)
    s1 = rec.q_hat(1)
    q2s = {1: q1}
    samples = 2 * l
    i = 0
    m = 1
    qm = q1
    while qm > q1 / 3.0:
        i += 1
        if i > max_iter:
            raise NonTermination(f"no decay detected up to m = {m}; spectral gap may be zero")
        m = 2 ** i + 1
        qm = estimate_q2(device, cfg, l, rng, m, clifford, rec)
        q2s[m] = qm
        samples += 2 * l
    if q1 <= 0:
        raise NonTermination("|q(1)|^2 estimate is not positive; increase precision")
    ratio = max(qm, 0.0) / q1
    mu_abs = float(min(1.0, ratio ** (1.0 / (2 * (m - 1)))))
    if epsilon > abs(C) ** 2 * mu_abs ** 2 / 200.0:
        warnings.warn(f"epsilon = {epsilon} exceeds C^2 |mu|^2 / 200 = {abs(C) ** 2 * mu_abs ** 2 / 200:.3g}; "
                      "the multiplicative guarantee is not certified", UserWarning, stacklevel=2)
    phase = float(np.angle(s1 / C)) if s1 != 0 else 0.0
    return MuEstimate(mu_abs, phase, cfg.label, C, m, samples, q2s)


def _unwrap_fit(ms: Sequence[int], phases: Sequence[float]) -> float:
    """Fit ``phi_m = m theta (mod 2 pi)`` by sequential unwrapping and a fit through the origin."""
    theta = None
    un = []
    for m, ph in zip(ms, phases):
        if theta is None:
            val = ph
        else:
            pred = m * theta
            val = ph + 2 * np.pi * np.round((pred - ph) / (2 * np.pi))
        un.append(val)
        mm = np.array(ms[:len(un)], dtype=float)
        theta = float(np.dot(mm, un) / np.dot(mm, mm))
    return float(np.angle(np.exp(1j * theta)))


def estimate_phase(device, cfg: WRBConfig, m_list: Sequence[int], l: int, rng: np.random.Generator,
                   floor: float = 0.05, clifford=None, record: Optional[BenchmarkRecord] = None) -> float:
    """Phase ``theta`` of ``mu`` from ``Y_m + i Z_m`` over several sequence lengths.

    ``arg(q(m) / C) = m theta (mod 2 pi)``; the quadrant follows from the signs
    of ``Y_m`` and ``Z_m``.  Lengths where ``|q_hat(m)| < floor`` are refused
    because the phase error is amplified by ``|mu|^-m``.
    """
    C = _spam(device, cfg)
    ms = sorted(int(m) for m in m_list)
    phases = []
    for m in ms:
        y = simulate_runs(device, cfg, m, l, rng, clifford)
        if record is not None:
            record.add(m, y)
        q = y.mean()
        if abs(q) < floor:
            raise MagnitudeFloor(f"|q(m={m})| = {abs(q):.3g} below floor {floor}")
        Ym, Zm = q.real, q.imag
        phases.append(float(np.arctan2(Zm, Ym) - np.angle(C)))
    return _unwrap_fit(ms, phases)


def offdiagonal_mu(device: DeviceModel, w1: WeylIndex, w2: WeylIndex, cfg: Optional[WRBConfig], rng,
                   epsilon: float = 0.1, delta: float = 0.05, m_list: Sequence[int] = (1, 2, 3),
                   l_phase: int = 4000, max_iter: int = 10) -> MuEstimate:
    """Estimate the off-diagonal entry ``<T o U>^{(w2)}_{(w1)}`` via a noiseless Clifford.

    A Clifford ``C`` with ``C W_{w2} C^dag = e^{i psi} W_{w1}`` is applied after every
    noisy ``T o U``; the benchmark on label ``w1`` then decays with base
    ``e^{i psi} <T o U>^{(w2)}_{(w1)}``.
    """
    if w1.is_identity() or w2.is_identity():
        raise ValueError("off-diagonal estimation needs non-identity labels")
    cfg = WRBConfig(w1, 1, runs=1) if cfg is None else replace(cfg, label=w1)
    if w1 == w2:
        gate, psi = None, 0.0
    else:
        gate = solve_clifford_mapping(w2, w1)
        psi = float(np.angle(gate.image(w2)[0]))
    est = adaptive_abs_mu(device, cfg, epsilon, delta, rng, max_iter=max_iter, clifford=gate)
    theta = estimate_phase(device, cfg, m_list, l_phase, rng, clifford=gate)
    return replace(est, phase=float(np.angle(np.exp(1j * (theta - psi)))))


def correct_for_noisy_weyls(mu_raw: MuEstimate, mu_W: complex, weyls_per_round: int = 2) -> MuEstimate:
    """Remove the Weyl-gate noise factor ``mu_W^weyls_per_round`` from a fitted decay base."""
    if mu_W == 0:
        raise ValueError("Weyl-gate eigenvalue is zero")
    k = weyls_per_round
    return replace(mu_raw, abs=float(mu_raw.abs / abs(mu_W) ** k),
                   phase=float(np.angle(np.exp(1j * (mu_raw.phase - k * np.angle(mu_W))))))


def unitary_diagonal(U: np.ndarray, label: WeylIndex) -> complex:
    """``u(w) = d^{-n} tr(W^dag U W U^dag)``."""
    W = materialize(label)
    U = np.asarray(U, dtype=complex)
    return complex(np.vdot(W, U @ W @ U.conj().T) / W.shape[0])


def mu_to_noise_eigenvalue(mu: Union[MuEstimate, complex], u_diag: complex, tol: float = 1e-12) -> complex:
    """``lambda = mu / u`` for Weyl-diagonal noise after a known unitary.

    The error of ``mu`` is amplified by ``|u|^-1``.
    """
    if abs(u_diag) <= tol:
        raise ValueError("unitary diagonal is zero for this label; use off-diagonal estimation instead")
    val = mu.value if isinstance(mu, MuEstimate) else complex(mu)
    return complex(val / u_diag)


def fit_decay(record: BenchmarkRecord) -> Dict[str, float]:
    """Weighted log-linear fit ``log|q(m)| = log|C| + m log|mu|`` over the record's lengths."""
    ms, ys, ws = [], [], []
    for m in record.lengths:
        q = abs(record.q_hat(m))
        se = record.stderr(m)
        if q <= 0 or se <= 0:
            continue
        ms.append(m)
        ys.append(math.log(q))
        ws.append((q / se) ** 2)
    if len(ms) < 2:
        raise ValueError("need at least two sequence lengths with nonzero signal")
    A = np.vstack([np.ones(len(ms)), ms]).T
    sw = np.sqrt(ws)
    coef, *_ = np.linalg.lstsq(A * sw[:, None], np.array(ys) * sw, rcond=None)
    return {"abs_mu": float(math.exp(coef[1])), "abs_C": float(math.exp(coef[0]))}
