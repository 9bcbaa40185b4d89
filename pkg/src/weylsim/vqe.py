"""Noisy MaxCut VQE ansatz: circuit assembly, norm bounds and energy estimation.

The ansatz is ``[U(theta) U_ent]^D |0...0>`` with ``U(theta)`` a layer of
``Y(theta_{i,k}) = exp(-i theta Y / 2)`` rotations and ``U_ent`` a layer of
CNOTs.  Every rotation is followed by single-qubit depolarizing noise with
survival ``p_Y`` and every CNOT by two-qubit depolarizing noise with survival
``p_C``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .noise import CliffordGate, RotationGate, depolarizing, phi, rotation_superop
from .pathsampler import dense_evolve, estimate
from .reps import (Circuit, LocalSuperOp, compose_superops, computational_state, pauli_observable,
                   snap)


@dataclass
class MaxCutProblem:
    """``H = sum_{i<j} w_ij Z_i Z_j`` on an even number of qubits."""

    n: int
    weights: Dict[Tuple[int, int], float] = field(default_factory=dict)

    def __post_init__(self):
        if self.n < 2 or self.n % 2:
            raise ValueError("MaxCut ansatz needs an even number of qubits >= 2")
        clean = {}
        for (i, j), w in self.weights.items():
            i, j = int(i), int(j)
            if i == j or not (0 <= i < self.n and 0 <= j < self.n):
                raise ValueError(f"invalid edge ({i}, {j})")
            if not np.isfinite(w):
                raise ValueError("weights must be finite")
            key = (min(i, j), max(i, j))
            clean[key] = clean.get(key, 0.0) + float(w)
        self.weights = clean

    @classmethod
    def ring(cls, n: int, w: float = 1.0) -> "MaxCutProblem":
        return cls(n, {(i, (i + 1) % n): w for i in range(n)})

    def terms(self) -> List[Tuple[int, int, float]]:
        return [(i, j, w) for (i, j), w in sorted(self.weights.items()) if w != 0.0]

    def pauli_label(self, i: int, j: int) -> str:
        return "".join("Z" if q in (i, j) else "I" for q in range(self.n))


@dataclass
class AnsatzParams:
    """Angles ``theta`` (shape ``n x D``) and survival rates ``p_C``, ``p_Y``."""

    theta: np.ndarray
    p_C: float = 1.0
    p_Y: float = 1.0

    def __post_init__(self):
        self.theta = np.atleast_2d(np.asarray(self.theta, dtype=float))
        if not np.all(np.isfinite(self.theta)):
            raise ValueError("angles must be finite")
        for name, p in (("p_C", self.p_C), ("p_Y", self.p_Y)):
            if not 0.0 <= p <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1]")

    @property
    def depth(self) -> int:
        return self.theta.shape[1]


def entangler_pairs(n: int, brick_wall: bool = False) -> List[Tuple[int, int]]:
    """CNOT (control, target) pairs of ``U_ent``.

    Default: ``CNOT_{2i, 2i+1}`` for ``i = 1..n/2-1`` in 1-based numbering, i.e.
    ``(1, 2), (3, 4), ..., (n-3, n-2)`` in 0-based qubit indices.  With
    ``brick_wall`` the layer is ``(0, 1), (2, 3), ...`` followed by ``(1, 2), (3, 4), ...``.
    """
    if brick_wall:
        return [(i, i + 1) for i in range(0, n - 1, 2)] + [(i, i + 1) for i in range(1, n - 1, 2)]
    return [(2 * i - 1, 2 * i) for i in range(1, n // 2)]


_CNOT = None


def _cnot():
    global _CNOT
    if _CNOT is None:
        _CNOT = CliffordGate.from_word("CNOT@0,1", 2, 2)
    return _CNOT


def _noisy_rotation(theta: float, q: int, dep_y) -> List[LocalSuperOp]:
    return [rotation_superop(RotationGate(float(theta), q)), dep_y.to_superop((q,))]


def _merge(ops: Sequence[LocalSuperOp], label: str) -> LocalSuperOp:
    total = ops[0]
    for op in ops[1:]:
        total = compose_superops(op, total)
    return LocalSuperOp(snap(total.entries), total.support, total.d, total.basis, label)


def build_ansatz_circuit(prob: MaxCutProblem, params: AnsatzParams, brick_wall: bool = False,
                         grouped: bool = False) -> Circuit:
    """Noisy ansatz circuit: per depth, noisy rotations on every qubit then noisy CNOTs.

    With ``grouped`` each CNOT is merged with the noisy rotations on its two
    qubits (when those have not been absorbed yet) and its own noise into one
    two-qubit layer ``T_pC o CNOT o (Y (x) Y) o (S_pY (x) S_pY)``; leftover
    noisy rotations become single-qubit layers.  Both forms implement the same
    channel; the grouped one has a smaller norm bound.
    """
    n = prob.n
    if params.theta.shape[0] != n:
        raise ValueError(f"theta must have {n} rows")
    circ = Circuit(2, n)
    dep_y = depolarizing(params.p_Y, 1)
    dep_c = depolarizing(params.p_C, 2)
    pairs = entangler_pairs(n, brick_wall)
    for k in range(params.depth):
        rot = {i: _noisy_rotation(params.theta[i, k], i, dep_y) for i in range(n)}
        if not grouped:
            for i in range(n):
                circ.extend(rot[i])
            for c, t in pairs:
                circ.append(_cnot().to_superop((c, t), label="cnot"))
                circ.append(dep_c.to_superop((c, t)))
            continue
        pending = set(range(n))
        ent = []
        for c, t in pairs:
            ops = []
            for q in (c, t):
                if q in pending:
                    ops += rot[q]
                    pending.discard(q)
            ops += [_cnot().to_superop((c, t), label="cnot"), dep_c.to_superop((c, t))]
            ent.append(_merge(ops, f"sandwich({c},{t})"))
        for q in sorted(pending):
            circ.append(_merge(rot[q], f"noisy_rotation({q})"))
        circ.extend(ent)
    return circ


def ansatz_norm_product(prob: MaxCutProblem, params: AnsatzParams) -> float:
    """Product of closed-form sandwich norms over the (default-pairing) ansatz.

    Paired qubits contribute :func:`layer_norm`; unpaired qubits contribute
    ``max(1, p_Y phi(theta))``.
    """
    pairs = entangler_pairs(prob.n)
    paired = {q for pr in pairs for q in pr}
    total = 1.0
    for k in range(params.depth):
        th = params.theta[:, k]
        for c, t in pairs:
            total *= layer_norm(th[c], th[t], params.p_C, params.p_Y)
        for q in range(prob.n):
            if q not in paired:
                total *= max(1.0, params.p_Y * phi(th[q]))
    return total


def layer_norm(theta1: float, theta2: float, p_C: float, p_Y: float) -> float:
    """``||T_pC o (Y(theta1) (x) Y(theta2)) o (S_pY (x) S_pY)||_{l1->l1}`` in closed form."""
    for p in (p_C, p_Y):
        if not 0.0 <= p <= 1.0:
            raise ValueError("rates must lie in [0, 1]")
    f1, f2 = phi(theta1), phi(theta2)
    return float(max(1.0, p_Y ** 2 * p_C * f1 * f2, p_Y * p_C * f1, p_Y * p_C * f2))


@dataclass
class ComplexityReport:
    """Sample-count bound and efficiency diagnostics for the noisy ansatz."""

    samples: int
    growth: float
    efficient: bool
    polynomial_regime: bool
    printed_condition: bool

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def sample_complexity(n: int, D: int, epsilon: float, p_C: float, p_Y: float,
                      delta: float = 0.05) -> ComplexityReport:
    """``M = ceil(2 n^2 (2 p_C p_Y^2)^(2nD) log(1/delta) / eps^2)``.

    ``efficient`` flags ``p_C p_Y^2 < 1/2``; ``polynomial_regime`` flags
    ``(2 p_C p_Y^2)^(2nD) <= n^2 D^2``; ``printed_condition`` evaluates
    ``p_C p_Y^2 <= 1 + log(nD)/(nD)`` literally.
    """
    growth = (2.0 * p_C * p_Y ** 2) ** (2 * n * D)
    M = int(math.ceil(2.0 * n ** 2 * growth * math.log(1.0 / delta) / epsilon ** 2))
    nD = n * D
    printed = bool(nD > 0 and p_C * p_Y ** 2 <= 1 + math.log(nD) / nD)
    return ComplexityReport(M, growth, bool(p_C * p_Y ** 2 < 0.5), bool(growth <= max(1, nD) ** 2), printed)


def initial_state(n: int):
    return computational_state([0] * n)


def estimate_energy(prob: MaxCutProblem, params: AnsatzParams, epsilon: float, delta: float, seed: int = 0,
                    workers: int = 1, brick_wall: bool = False, prune: bool = True, samples: Optional[int] = None,
                    grouped: bool = True):
    """Heisenberg-picture path-sampling estimate of ``<H>`` on the noisy ansatz state.

    The grouped circuit is sampled by default (noise lowers its norm bound).
    Each term gets accuracy ``eps / (K |w_ij|)`` and failure probability
    ``delta / K`` (``K`` nonzero terms), so the energy is within ``eps`` with
    probability at least ``1 - delta``.

    Returns
    -------
    energy : float
    breakdown : list of dict
        Per-term mean, stderr, sample count and ``M_B``.
    """
    circ = build_ansatz_circuit(prob, params, brick_wall, grouped=grouped)
    rho = initial_state(prob.n)
    terms = prob.terms()
    K = len(terms)
    energy = 0.0
    breakdown = []
    for idx, (i, j, w) in enumerate(terms):
        E = pauli_observable(prob.pauli_label(i, j))
        eps_t = epsilon / (K * abs(w))
        est = estimate(circ, rho, E, eps_t, delta / K, seed=seed + idx, picture="heisenberg",
                       workers=workers, samples=samples, prune=prune)
        energy += w * est.mean.real
        breakdown.append({"i": i, "j": j, "w": w, "mean": est.mean.real, "stderr": est.stderr,
                          "samples": est.samples, "M_B": est.plan.M_B, "epsilon": eps_t})
    return float(energy), breakdown


def dense_energy(prob: MaxCutProblem, params: AnsatzParams, brick_wall: bool = False) -> float:
    """Exact ``<H>`` by dense density-matrix simulation (test oracle, small n)."""
    circ = build_ansatz_circuit(prob, params, brick_wall)
    n = prob.n
    rho = np.zeros((2 ** n, 2 ** n), dtype=complex)
    rho[0, 0] = 1.0
    out = dense_evolve(circ, rho)
    total = 0.0
    diag = np.real(np.diag(out))
    bits = (np.arange(2 ** n)[:, None] >> (n - 1 - np.arange(n))[None, :]) & 1
    for i, j, w in prob.terms():
        sign = 1 - 2 * (bits[:, i] ^ bits[:, j])
        total += w * float(np.dot(diag, sign))
    return total
