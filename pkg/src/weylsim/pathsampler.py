"""Quasiprobability path sampling for noisy circuits and Lindbladian evolutions.

A path starts at a basis label drawn with probability proportional to the
magnitude of the input vector and moves through each layer by drawing a row of
the current column with probability ``|M[row, col]| / ||M[:, col]||_1``.  The
product of column norms and entry phases, times the terminal amplitude, is an
unbiased estimate of ``tr(E C(rho))``.

Randomness is counter-based: the samples are split into fixed chunks and chunk
``c`` draws from ``Philox(SeedSequence([seed, c]))``, so results depend only on
``(seed, number of samples)`` and never on the worker schedule.
"""
from __future__ import annotations

import math
import time
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import List, Optional, Sequence

import numpy as np

from . import kernels
from .reps import Basis, Circuit, LocalSuperOp, WeylVector, adjoint_superop, embed_superop

#: Number of samples per independently seeded chunk.
CHUNK_SIZE = 16384
#: Relative slack allowed when asserting the per-sample magnitude bound.
BOUND_RTOL = 1e-9


class BoundViolation(AssertionError):
    """A path sample exceeded the planner's per-sample magnitude bound."""


@dataclass
class PathSample:
    """One estimator output and, optionally, the visited label codes."""

    value: complex
    path: Optional[List[np.ndarray]] = None


@dataclass
class SamplingPlan:
    """Sample-count plan ``ceil(2 M_B log(1/delta) / eps^2)`` (or a Chebyshev count)."""

    M_B: float
    samples_needed: int
    epsilon: float
    delta: float
    picture: str
    per_sample_bound: float
    layer_norms: List[float] = field(default_factory=list)
    method: str = "hoeffding"

    def to_dict(self) -> dict:
        return {"M_B": self.M_B, "samples_needed": self.samples_needed, "epsilon": self.epsilon,
                "delta": self.delta, "picture": self.picture, "per_sample_bound": self.per_sample_bound,
                "layer_norms": list(self.layer_norms), "method": self.method}


@dataclass
class Estimate:
    """Result of :func:`estimate`; unpacks as ``mean, stderr, plan``."""

    mean: complex
    stderr: float
    plan: SamplingPlan
    samples: int
    max_abs: float
    wall_time: float
    seed: int
    workers: int

    def __iter__(self):
        return iter((self.mean, self.stderr, self.plan))

    def to_dict(self) -> dict:
        return {"mean": [self.mean.real, self.mean.imag], "stderr": self.stderr, "samples": self.samples,
                "max_abs": self.max_abs, "wall_time": self.wall_time, "seed": self.seed,
                "workers": self.workers, "plan": self.plan.to_dict()}


# ---------------------------------------------------------------------------
# compiled layer tables
# ---------------------------------------------------------------------------
class CompiledLayers:
    """Flat sampling tables for a sequence of local superoperators (kernel input)."""

    def __init__(self, ops: Sequence[LocalSuperOp], d: int):
        self.d = d
        self.ops = list(ops)
        sup, sup_off, tab_off, col_off, dims = [], [0], [], [], []
        probs, aliases, phases, colnorms = [], [], [], []
        t_acc = c_acc = 0
        for op in self.ops:
            sup.extend(op.support)
            sup_off.append(len(sup))
            D = op.dim
            dims.append(D)
            tab_off.append(t_acc)
            col_off.append(c_acc)
            t_acc += D * D
            c_acc += D
            probs.append(op.alias_prob.ravel())
            aliases.append(op.alias_idx.ravel())
            phases.append(op.phase.ravel())
            colnorms.append(np.asarray(op.column_l1, dtype=np.float64))
        cat = lambda xs, dt: np.ascontiguousarray(np.concatenate(xs) if xs else np.zeros(0), dtype=dt)
        self.supports = np.asarray(sup, dtype=np.int64)
        self.sup_off = np.asarray(sup_off, dtype=np.int64)
        self.tab_off = np.asarray(tab_off, dtype=np.int64)
        self.col_off = np.asarray(col_off, dtype=np.int64)
        self.dims = np.asarray(dims, dtype=np.int64)
        self.prob = cat(probs, np.float64)
        self.alias = cat(aliases, np.int64)
        self.phase = cat(phases, np.complex128)
        self.colnorm = cat(colnorms, np.float64)

    def walk(self, codes, weights, uniforms, steps, active=None, backend=None):
        kern = kernels if backend is None else backend
        if len(steps) == 0:
            return codes, weights
        return kern.walk(codes, weights, np.ascontiguousarray(uniforms, dtype=np.float64), active,
                         np.ascontiguousarray(steps, dtype=np.int64), self.supports, self.sup_off, self.tab_off,
                         self.col_off, self.dims, self.prob, self.alias, self.phase, self.colnorm,
                         self.d * self.d)


# ---------------------------------------------------------------------------
# picture set-up
# ---------------------------------------------------------------------------
def _check_inputs(circuit: Circuit, rho: WeylVector, E: WeylVector):
    if rho.kind != "state" or E.kind != "observable":
        raise ValueError("rho must be a state vector and E an observable vector")
    for v in (rho, E):
        if v.d != circuit.d or v.n != circuit.n:
            raise ValueError(f"vector (d={v.d}, n={v.n}) does not match circuit (d={circuit.d}, n={circuit.n})")
        if v.basis is not Basis(circuit.basis):
            raise ValueError("vector and circuit use different bases")


def _identity_fixed(op: LocalSuperOp) -> bool:
    """True when the identity column is exactly the identity unit vector."""
    col = op.entries[:, 0]
    return bool(col[0] == 1.0 and not np.any(col[1:]))


def light_cone_layers(circuit: Circuit, E: WeylVector) -> List[int]:
    """Indices of layers inside the backward light cone of ``E``.

    A layer outside the cone acts on qudits where the Heisenberg-evolved
    observable is still the identity; if its adjoint fixes the identity exactly
    (trace-preserving layer) it contributes a factor of exactly one to every
    path and can be dropped without changing the estimator.
    """
    live = set()
    for support, amps in E.blocks:
        if np.any(amps[1:]) or amps[0] != 1.0:
            live |= set(support)
    keep = []
    for i in range(len(circuit.layers) - 1, -1, -1):
        op = circuit.layers[i]
        if live & set(op.support) or not _identity_fixed(adjoint_superop(op)):
            keep.append(i)
            live |= set(op.support)
    return sorted(keep)


def prune_circuit(circuit: Circuit, E: WeylVector) -> Circuit:
    keep = light_cone_layers(circuit, E)
    return Circuit(circuit.d, circuit.n, [circuit.layers[i] for i in keep], circuit.basis)


class _Setup:
    """Everything a chunk needs: start vector, terminal vector, compiled layers."""

    def __init__(self, circuit: Circuit, rho: WeylVector, E: WeylVector, picture: str):
        _check_inputs(circuit, rho, E)
        self.picture = picture
        if picture == "schrodinger":
            self.start, self.end = rho, E
            ops = list(circuit.layers)
        elif picture == "heisenberg":
            self.start, self.end = E, rho
            ops = [adjoint_superop(op) for op in reversed(circuit.layers)]
        else:
            raise ValueError("picture must be 'schrodinger' or 'heisenberg'")
        if self.start.l1_norm() == 0.0:
            raise ValueError("starting vector has zero l1 norm")
        self.ops = ops
        self.compiled = CompiledLayers(ops, circuit.d)
        self.steps = np.arange(len(ops), dtype=np.int64)
        self.n = circuit.n
        self.start_l1 = self.start.l1_norm()

    def finish(self, codes, weights):
        term = self.end.values(codes)
        if self.picture == "schrodinger":
            return weights * np.conj(term)
        return np.conj(weights) * term

    def run(self, rng: np.random.Generator, S: int, backend=None):
        u0 = rng.random((S, self.start.n_blocks))
        uw = rng.random((S, len(self.steps)))
        codes, ph = self.start.sample(u0, backend)
        weights = ph * self.start_l1
        codes, weights = self.compiled.walk(codes, weights, uw, self.steps, None, backend)
        return self.finish(codes, weights)


def _chunk_rng(seed: int, chunk: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([int(seed), int(chunk)])))


def _run_chunks(fn, total: int, seed: int, workers: int):
    """Run ``fn(rng, size)`` over deterministic chunks; return per-chunk outputs in order."""
    sizes = [CHUNK_SIZE] * (total // CHUNK_SIZE)
    if total % CHUNK_SIZE:
        sizes.append(total % CHUNK_SIZE)
    jobs = [(c, s) for c, s in enumerate(sizes)]
    call = lambda job: fn(_chunk_rng(seed, job[0]), job[1])
    if workers <= 1 or len(jobs) <= 1:
        return [call(j) for j in jobs]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(call, jobs))


def _summarize(chunks):
    """Ordered reduction of per-chunk samples into mean, stderr and max |x|."""
    n = sum(len(x) for x in chunks)
    s = complex(0.0)
    for x in chunks:
        s += complex(x.sum())
    mean = s / n
    ss = 0.0
    mx = 0.0
    for x in chunks:
        ss += float(np.sum(np.abs(x - mean) ** 2))
        if len(x):
            mx = max(mx, float(np.abs(x).max()))
    var = ss / (n - 1) if n > 1 else 0.0
    return mean, math.sqrt(var / n), mx


# ---------------------------------------------------------------------------
# public API
# ---------------------------------------------------------------------------
def _single(circuit, rho, E, rng, picture, record):
    setup = _Setup(circuit, rho, E, picture)
    u0 = rng.random((1, setup.start.n_blocks))
    codes, ph = setup.start.sample(u0)
    weights = ph * setup.start_l1
    path = [codes[0].copy()] if record else None
    for t in range(len(setup.ops)):
        u = rng.random((1, 1))
        codes, weights = setup.compiled.walk(codes, weights, u, setup.steps[t:t + 1])
        if record:
            path.append(codes[0].copy())
    return PathSample(complex(setup.finish(codes, weights)[0]), path)


def sample_path(circuit: Circuit, rho: WeylVector, E: WeylVector, rng: np.random.Generator,
                record: bool = False) -> PathSample:
    """One Schrodinger-picture path sample with ``E[x] = tr(E C(rho))``."""
    return _single(circuit, rho, E, rng, "schrodinger", record)


def sample_path_heisenberg(circuit: Circuit, rho: WeylVector, E: WeylVector, rng: np.random.Generator,
                           record: bool = False) -> PathSample:
    """One Heisenberg-picture path sample (starts from ``E``, walks the adjoint circuit)."""
    return _single(circuit, rho, E, rng, "heisenberg", record)


def sample_many(circuit: Circuit, rho: WeylVector, E: WeylVector, samples: int, seed: int = 0,
                picture: str = "schrodinger", workers: int = 1, backend=None) -> np.ndarray:
    """Vector of ``samples`` path outputs (deterministic in ``seed``)."""
    setup = _Setup(circuit, rho, E, picture)
    chunks = _run_chunks(lambda rng, S: setup.run(rng, S, backend), samples, seed, workers)
    return np.concatenate(chunks) if chunks else np.zeros(0, dtype=complex)


def per_sample_bound(circuit: Circuit, rho: WeylVector, E: WeylVector, picture: str = "schrodinger") -> float:
    """``||rho||_1 ||E||_inf prod ||N||`` (Schrodinger) or its Heisenberg analogue."""
    if picture == "schrodinger":
        norms = [op.l1_to_l1_norm() for op in circuit.layers]
        return rho.l1_norm() * E.linf_norm() * float(np.prod(norms))
    norms = [adjoint_superop(op).l1_to_l1_norm() for op in circuit.layers]
    return E.l1_norm() * rho.linf_norm() * float(np.prod(norms))


def hoeffding_samples(M_B: float, epsilon: float, delta: float) -> int:
    return int(math.ceil(2.0 * M_B * math.log(1.0 / delta) / epsilon ** 2))


def plan(circuit: Circuit, rho: WeylVector, E: WeylVector, epsilon: float, delta: float,
         picture: str = "schrodinger") -> SamplingPlan:
    """Sample count ``ceil(2 M_B log(1/delta) / eps^2)`` with ``M_B`` the squared per-sample bound."""
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    if not 0 < delta < 1:
        raise ValueError("delta must lie in (0, 1)")
    _check_inputs(circuit, rho, E)
    if picture == "schrodinger":
        norms = [op.l1_to_l1_norm() for op in circuit.layers]
    elif picture == "heisenberg":
        norms = [adjoint_superop(op).l1_to_l1_norm() for op in circuit.layers]
    else:
        raise ValueError("picture must be 'schrodinger' or 'heisenberg'")
    bound = per_sample_bound(circuit, rho, E, picture)
    M_B = bound ** 2
    return SamplingPlan(M_B, hoeffding_samples(M_B, epsilon, delta), epsilon, delta, picture, bound, norms)


def estimate(circuit: Circuit, rho: WeylVector, E: WeylVector, epsilon: float, delta: float,
             seed: int = 0, picture: str = "schrodinger", workers: int = 1, samples: Optional[int] = None,
             check_bound: bool = False, prune: bool = False, backend=None) -> Estimate:
    """Empirical mean of path samples with the planned (or given) sample count.

    Parameters
    ----------
    prune : bool
        In the Heisenberg picture, drop trace-preserving layers outside the
        backward light cone of ``E`` (exact; lowers ``M_B``).
    check_bound : bool
        Raise :class:`BoundViolation` if any sample exceeds the per-sample bound.
    """
    t0 = time.perf_counter()
    if prune:
        if picture != "heisenberg":
            raise ValueError("light-cone pruning applies to the Heisenberg picture")
        circuit = prune_circuit(circuit, E)
    p = plan(circuit, rho, E, epsilon, delta, picture)
    N = p.samples_needed if samples is None else int(samples)
    if N < 1:
        raise ValueError("need at least one sample")
    setup = _Setup(circuit, rho, E, picture)
    chunks = _run_chunks(lambda rng, S: setup.run(rng, S, backend), N, seed, workers)
    mean, se, mx = _summarize(chunks)
    if check_bound and mx > p.per_sample_bound * (1 + BOUND_RTOL) + 1e-12:
        raise BoundViolation(f"sample magnitude {mx} exceeds bound {p.per_sample_bound}")
    return Estimate(mean, se, p, N, mx, time.perf_counter() - t0, seed, workers)


def exact_path_expectation(circuit: Circuit, rho: WeylVector, E: WeylVector,
                           picture: str = "schrodinger") -> complex:
    """Exact expectation of the sampler by summing probability x value over all paths.

    Propagates the path distribution and accumulated weights label by label
    (exponential in ``n``; a test oracle independent of dense simulation).
    """
    setup = _Setup(circuit, rho, E, picture)
    start = setup.start
    vec = start.dense_vector()
    l1 = np.abs(vec).sum()
    # dist[k] = sum over paths ending at k of prob * weight
    d, n = circuit.d, circuit.n
    from .reps import join_codes, split_codes
    nz = np.nonzero(vec)[0]
    state = {int(k): (abs(vec[k]) / l1) * (vec[k] / abs(vec[k]) * l1) for k in nz}
    for op in setup.ops:
        new = {}
        for k, val in state.items():
            codes = split_codes(k, d, n)
            col = int(join_codes(codes[list(op.support)], d))
            cn = op.column_l1[col]
            if cn == 0:
                continue
            for row in np.nonzero(op.entries[:, col])[0]:
                prob = abs(op.entries[row, col]) / cn
                c2 = codes.copy()
                c2[list(op.support)] = split_codes(int(row), d, op.m)
                k2 = int(join_codes(c2, d))
                new[k2] = new.get(k2, 0) + prob * val * cn * op.phase[col, row]
        state = new
    total = 0j
    for k, val in state.items():
        codes = split_codes(k, d, n)[None, :]
        total += complex(setup.finish(codes, np.array([val]))[0])
    return total


def apply_local_superop(rho: np.ndarray, S: np.ndarray, support: Sequence[int], d: int, n: int) -> np.ndarray:
    """Apply a row-major local superoperator ``S`` on ``support`` to a dense ``d^n x d^n`` matrix."""
    m = len(support)
    T = np.asarray(rho, dtype=complex).reshape((d,) * (2 * n))
    rows = list(support)
    cols = [n + q for q in support]
    rest = [i for i in range(2 * n) if i not in rows and i not in cols]
    T = np.transpose(T, rows + cols + rest).reshape(d ** (2 * m), -1)
    T = (S @ T).reshape((d,) * (2 * n))
    inv = np.argsort(rows + cols + rest)
    return np.transpose(T, inv).reshape(d ** n, d ** n)


def dense_evolve(circuit: Circuit, rho_dense: np.ndarray) -> np.ndarray:
    """Dense density-matrix evolution through every layer (test oracle)."""
    rho = np.asarray(rho_dense, dtype=complex)
    for op in circuit.layers:
        rho = apply_local_superop(rho, op.dense, op.support, circuit.d, circuit.n)
    return rho


def dense_expectation(circuit: Circuit, rho_dense: np.ndarray, E_dense: np.ndarray) -> complex:
    """``tr(E C(rho))`` by dense density-matrix evolution (test oracle)."""
    return complex(np.trace(np.asarray(E_dense) @ dense_evolve(circuit, rho_dense)))


# ---------------------------------------------------------------------------
# Lindbladian evolutions
# ---------------------------------------------------------------------------
def lindbladian_superop(H=None, jumps=(), support=(0,), d=2, basis=Basis.WEYL, label="lindblad") -> LocalSuperOp:
    """Generator ``L(rho) = -i[H, rho] + sum_J (J rho J^dag - {J^dag J, rho}/2)`` as a local map."""
    from .reps import comp_to_basis
    Dm = d ** len(support)
    I = np.eye(Dm)
    Ls = np.zeros((Dm * Dm, Dm * Dm), dtype=complex)
    if H is not None:
        H = np.asarray(H, dtype=complex)
        Ls += -1j * (np.kron(H, I) - np.kron(I, H.T))
    for J in jumps:
        J = np.asarray(J, dtype=complex)
        JJ = J.conj().T @ J
        Ls += np.kron(J, J.conj()) - 0.5 * (np.kron(JJ, I) + np.kron(I, JJ.T))
    M = comp_to_basis(Ls, d, len(support), basis)
    return LocalSuperOp(M, support, d, basis, label, dense=Ls, is_cptp=False, unital=None)


@dataclass
class LindbladLayer:
    """``exp(t L)`` for a generator ``L`` with ``||L||_{l1->l1} <= 1``.

    Generators with larger norm are rescaled to ``L / ||L||`` with time
    ``t ||L||`` (same evolution) and a warning is issued.
    """

    generator: LocalSuperOp
    t: float

    def __post_init__(self):
        if self.t < 0:
            raise ValueError("evolution time must be non-negative")
        nrm = self.generator.l1_to_l1_norm()
        if nrm > 1.0 + 1e-12:
            warnings.warn(f"generator norm {nrm:.6g} > 1; rescaling L -> L/{nrm:.6g}, t -> t*{nrm:.6g}",
                          UserWarning, stacklevel=3)
            g = self.generator
            self.generator = LocalSuperOp(g.entries / nrm, g.support, g.d, g.basis, g.label,
                                          dense=g.dense / nrm, is_cptp=False, unital=g.unital)
            self.t = self.t * nrm

    @property
    def norm(self) -> float:
        return self.generator.l1_to_l1_norm()


def _lindblad_inputs(layers: Sequence[LindbladLayer], rho: WeylVector, E: WeylVector):
    if not layers:
        raise ValueError("need at least one layer")
    d = layers[0].generator.d
    n = rho.n
    circ = Circuit(d, n, [l.generator for l in layers], rho.basis)
    _check_inputs(circ, rho, E)
    return circ


class _LindbladSetup:
    def __init__(self, layers, rho, E, forced_q=None):
        self.circ = _lindblad_inputs(layers, rho, E)
        self.layers = list(layers)
        self.rho, self.E = rho, E
        self.compiled = CompiledLayers([l.generator for l in layers], self.circ.d)
        self.ts = np.array([l.t for l in layers], dtype=float)
        self.forced_q = None if forced_q is None else np.asarray(forced_q, dtype=np.int64)
        self.prefactor = 1.0 if forced_q is not None else math.exp(self.ts.sum())

    def run(self, rng, S, backend=None):
        L = len(self.layers)
        if self.forced_q is None:
            q = rng.poisson(self.ts, size=(S, L)).astype(np.int64)
        else:
            q = np.broadcast_to(self.forced_q, (S, L)).astype(np.int64)
        u0 = rng.random((S, self.rho.n_blocks))
        Q = q.max(axis=0) if S else np.zeros(L, dtype=np.int64)
        steps = np.repeat(np.arange(L, dtype=np.int64), Q)
        T = int(Q.sum())
        uw = rng.random((S, T))
        active = np.zeros((S, T), dtype=np.uint8)
        off = 0
        for l in range(L):
            j = np.arange(Q[l])
            active[:, off:off + Q[l]] = (j[None, :] < q[:, l:l + 1]).astype(np.uint8)
            off += Q[l]
        codes, ph = self.rho.sample(u0, backend)
        weights = ph * self.rho.l1_norm() * self.prefactor
        codes, weights = self.compiled.walk(codes, weights, uw, steps, active, backend)
        return weights * np.conj(self.E.values(codes))


def sample_lindblad_path(layers: Sequence[LindbladLayer], rho: WeylVector, E: WeylVector,
                         rng: np.random.Generator) -> PathSample:
    """One sample ``y`` with ``E[y] = tr(E exp(t_N L_N) ... exp(t_1 L_1)(rho))``."""
    setup = _LindbladSetup(layers, rho, E)
    return PathSample(complex(setup.run(rng, 1)[0]))


def lindblad_variance_bound(layers: Sequence[LindbladLayer], rho: WeylVector, E: WeylVector) -> float:
    """``exp(sum t (||L||^2 + 1)) ||rho||_1^2 ||E||_inf^2``."""
    expo = sum(l.t * (l.norm ** 2 + 1.0) for l in layers)
    return math.exp(expo) * rho.l1_norm() ** 2 * E.linf_norm() ** 2


def plan_lindblad(layers: Sequence[LindbladLayer], rho: WeylVector, E: WeylVector, epsilon: float,
                  delta: float = 1.0 / 3.0) -> SamplingPlan:
    """Chebyshev sample count ``ceil(V / (delta eps^2))`` (default success probability 2/3)."""
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    V = lindblad_variance_bound(layers, rho, E)
    N = int(math.ceil(V / (delta * epsilon ** 2)))
    return SamplingPlan(V, N, epsilon, delta, "schrodinger", math.sqrt(V), [l.norm for l in layers],
                        method="chebyshev")


def estimate_lindblad(layers: Sequence[LindbladLayer], rho: WeylVector, E: WeylVector, epsilon: float = 0.01,
                      delta: float = 1.0 / 3.0, seed: int = 0, workers: int = 1, samples: Optional[int] = None,
                      forced_q=None, backend=None):
    """Empirical mean of Lindblad path samples; returns ``(Estimate, variance)``.

    ``forced_q`` fixes the per-layer application counts (conditional sampler);
    the prefactor is then omitted so the mean estimates
    ``tr(E L_N^{q_N} ... L_1^{q_1}(rho))``.
    """
    t0 = time.perf_counter()
    p = plan_lindblad(layers, rho, E, epsilon, delta)
    N = p.samples_needed if samples is None else int(samples)
    setup = _LindbladSetup(layers, rho, E, forced_q)
    chunks = _run_chunks(lambda rng, S: setup.run(rng, S, backend), N, seed, workers)
    mean, se, mx = _summarize(chunks)
    var = se ** 2 * N
    return Estimate(mean, se, p, N, mx, time.perf_counter() - t0, seed, workers), var
