"""Hypergraph-local Weyl noise models and least-squares recovery from decay rates.

A local model assigns to each hyperedge ``e`` a table ``f_e`` over the labels
restricted to ``e``; the induced channel has eigenvalue
``lambda(w) = sum_e f_e(w|_e)``.

The raw tables are not identifiable from eigenvalues alone once two edges are
present (constants can be shifted between tables), so fitting uses an
equivalent *anchored* parametrization: one parameter ``g_S(x)`` for every set
``S`` in the down-closure of the edges (including the empty set) and every
assignment ``x`` of non-identity local labels to ``S``, with

    lambda(w) = sum_{S subset supp(w)} g_S(w|_S).

These coefficients are unique (Moebius inversion over subsets), and any
anchored solution converts back to raw tables.
"""
from __future__ import annotations

import itertools
import warnings
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.linalg import null_space

from .weyl_core import WeylIndex, all_indices, check_prime


class RankDeficient(np.linalg.LinAlgError):
    """The design matrix does not determine all parameters."""

    def __init__(self, msg, null_basis, names):
        super().__init__(msg)
        self.null_basis = null_basis
        self.names = names


@dataclass(frozen=True)
class Hypergraph:
    """Vertices ``0..n-1`` and a list of hyperedges (sorted vertex tuples)."""

    n: int
    edges: Tuple[Tuple[int, ...], ...]

    def __post_init__(self):
        edges = tuple(tuple(sorted(int(v) for v in e)) for e in self.edges)
        for e in edges:
            if not e:
                raise ValueError("hyperedges must be nonempty")
            if e[0] < 0 or e[-1] >= self.n:
                raise ValueError(f"hyperedge {e} outside [0, {self.n})")
            if len(set(e)) != len(e):
                raise ValueError(f"hyperedge {e} repeats a vertex")
        if len(set(edges)) != len(edges):
            raise ValueError("duplicate hyperedges")
        object.__setattr__(self, "edges", edges)

    @classmethod
    def path(cls, n: int) -> "Hypergraph":
        return cls(n, tuple((i, i + 1) for i in range(n - 1)))

    @classmethod
    def circle(cls, n: int) -> "Hypergraph":
        return cls(n, tuple(tuple(sorted((i, (i + 1) % n))) for i in range(n)))

    @classmethod
    def complete(cls, n: int, k: int = 2) -> "Hypergraph":
        return cls(n, tuple(itertools.combinations(range(n), k)))

    def down_closure(self) -> List[Tuple[int, ...]]:
        """All subsets of hyperedges (including the empty set), sorted by size then lexicographically."""
        sets = {()}
        for e in self.edges:
            for r in range(1, len(e) + 1):
                sets.update(itertools.combinations(e, r))
        return sorted(sets, key=lambda s: (len(s), s))

    def to_dict(self) -> dict:
        return {"n": self.n, "edges": [list(e) for e in self.edges]}


def parameter_count(g: Hypergraph, d: int) -> int:
    """Number of raw table entries ``sum_e d^(2|e|)``."""
    return int(sum(d ** (2 * len(e)) for e in g.edges))


def anchored_parameter_count(g: Hypergraph, d: int) -> int:
    """Number of identifiable parameters ``sum_S (d^2 - 1)^|S|`` over the down-closure."""
    return int(sum((d * d - 1) ** len(S) for S in g.down_closure()))


def _restricted_code(w: WeylIndex, support: Sequence[int]) -> int:
    d2 = w.d * w.d
    c = 0
    for q in support:
        c = c * d2 + w.a[q] * w.d + w.b[q]
    return c


@dataclass
class LocalNoiseModel:
    """Raw per-edge tables ``f_e`` (arrays over restricted codes)."""

    hypergraph: Hypergraph
    d: int
    tables: Dict[Tuple[int, ...], np.ndarray]

    def __post_init__(self):
        check_prime(self.d)
        for e in self.hypergraph.edges:
            t = np.asarray(self.tables[e], dtype=complex).reshape(-1)
            if t.size != self.d ** (2 * len(e)):
                raise ValueError(f"table for edge {e} has wrong size")
            self.tables[e] = t
        norm = sum(self.tables[e][0] for e in self.hypergraph.edges)
        if self.hypergraph.edges and abs(norm - 1.0) > 1e-9:
            raise ValueError(f"sum_e f_e(identity) = {norm}, expected 1")

    @classmethod
    def from_channels(cls, g: Hypergraph, d: int, weights: Sequence[float], channels) -> "LocalNoiseModel":
        """Convex mixture ``sum_e w_e T_e`` of Weyl-diagonal channels local to each edge."""
        tables = {}
        for e, w, ch in zip(g.edges, weights, channels):
            if ch.m != len(e) or ch.d != d:
                raise ValueError(f"channel for edge {e} has the wrong size")
            tables[e] = w * np.asarray(ch.eigenvalues)
        return cls(g, d, tables)

    def flat(self) -> np.ndarray:
        return np.concatenate([self.tables[e] for e in self.hypergraph.edges])

    def to_dict(self) -> dict:
        out = {"hypergraph": self.hypergraph.to_dict(), "d": self.d, "tables": {}}
        for e in self.hypergraph.edges:
            key = ",".join(str(v) for v in e)
            out["tables"][key] = {WeylIndex.from_code(c, self.d, len(e)).to_string(): [v.real, v.imag]
                                  for c, v in enumerate(self.tables[e])}
        return out


def induced_eigenvalue(model: LocalNoiseModel, label: WeylIndex) -> complex:
    """``lambda(w) = sum_e f_e(w|_e)``."""
    if label.d != model.d or label.n != model.hypergraph.n:
        raise ValueError("label does not match the model")
    return complex(sum(model.tables[e][_restricted_code(label, e)] for e in model.hypergraph.edges))


def default_labels(g: Hypergraph, d: int) -> List[WeylIndex]:
    """Identity plus every label whose support lies inside some hyperedge (deduplicated)."""
    seen = {}
    ident = WeylIndex.identity(d, g.n)
    seen[ident.code] = ident
    for e in g.edges:
        for codes in itertools.product(range(d * d), repeat=len(e)):
            a = [0] * g.n
            b = [0] * g.n
            for q, c in zip(e, codes):
                a[q], b[q] = c // d, c % d
            w = WeylIndex(tuple(a), tuple(b), d)
            seen.setdefault(w.code, w)
    return sorted(seen.values(), key=lambda w: (len(w.support()), w.support(), w.code))


def _anchored_columns(g: Hypergraph, d: int) -> List[Tuple[Tuple[int, ...], Tuple[int, ...]]]:
    cols = []
    for S in g.down_closure():
        for x in itertools.product(range(1, d * d), repeat=len(S)):
            cols.append((S, x))
    return cols


def _raw_columns(g: Hypergraph, d: int):
    return [(e, c) for e in g.edges for c in range(d ** (2 * len(e)))]


def design_row(label: WeylIndex, g: Hypergraph, parametrization: str = "anchored") -> np.ndarray:
    d = label.d
    codes = label.local_codes()
    if parametrization == "raw":
        cols = _raw_columns(g, d)
        return np.array([1.0 if _restricted_code(label, e) == c else 0.0 for e, c in cols])
    cols = _anchored_columns(g, d)
    return np.array([1.0 if all(codes[q] == xq for q, xq in zip(S, x)) else 0.0 for S, x in cols])


@dataclass
class FitProblem:
    """Linear system ``A f = mu_hat / u`` for the model parameters."""

    hypergraph: Hypergraph
    d: int
    labels: List[WeylIndex]
    A: np.ndarray
    observations: np.ndarray
    u_diags: np.ndarray
    parametrization: str = "anchored"
    column_names: List[str] = field(default_factory=list)


def _column_names(g, d, parametrization):
    if parametrization == "raw":
        return [f"f_{e}[{WeylIndex.from_code(c, d, len(e))}]" for e, c in _raw_columns(g, d)]
    return [f"g_{S}[{','.join(str(v) for v in x)}]" for S, x in _anchored_columns(g, d)]


def build_fit(model_shape: Hypergraph, measurements: Sequence[Tuple[WeylIndex, complex]],
              u_diags: Optional[Sequence[complex]] = None, d: Optional[int] = None,
              parametrization: str = "anchored") -> FitProblem:
    """Assemble the design matrix from measured ``(label, mu_hat)`` pairs.

    ``u_diags[i]`` is the known diagonal ``d^{-n} tr(W^dag U(W))`` of the target
    unitary at label ``i`` (1 for the identity unitary); observations are
    ``mu_hat / u``.
    """
    if parametrization not in ("anchored", "raw"):
        raise ValueError("parametrization must be 'anchored' or 'raw'")
    labels = [w for w, _ in measurements]
    if not labels:
        raise ValueError("no measurements")
    d = labels[0].d if d is None else d
    u = np.ones(len(labels), dtype=complex) if u_diags is None else np.asarray(u_diags, dtype=complex)
    for w, ui in zip(labels, u):
        if abs(ui) < 1e-12:
            raise ValueError(f"unitary diagonal vanishes at label {w}; measure this entry with the "
                             "off-diagonal (Clifford) estimator instead")
    mu = np.array([m for _, m in measurements], dtype=complex)
    A = np.array([design_row(w, model_shape, parametrization) for w in labels])
    npar = A.shape[1]
    if len(labels) < npar:
        warnings.warn(f"{len(labels)} measurements for {npar} parameters; the system is underdetermined",
                      UserWarning, stacklevel=2)
    return FitProblem(model_shape, d, labels, A, mu / u, u, parametrization,
                      _column_names(model_shape, d, parametrization))


def _check_rank(p: FitProblem, tol: Optional[float] = None):
    rank = np.linalg.matrix_rank(p.A, tol=tol)
    if rank < p.A.shape[1]:
        N = null_space(p.A)
        combos = []
        for k in range(N.shape[1]):
            v = N[:, k]
            idx = np.nonzero(np.abs(v) > 1e-8)[0]
            combos.append(" + ".join(f"{v[i]:+.3f}*{p.column_names[i]}" for i in idx[:8]))
        raise RankDeficient(f"design matrix has rank {rank} < {p.A.shape[1]}; unidentifiable combinations: "
                            + "; ".join(combos[:5]), N, p.column_names)


def solve_fit(p: FitProblem):
    """Least-squares parameters and residual norm ``||A f - y||_2``."""
    _check_rank(p)
    f, *_ = np.linalg.lstsq(p.A, p.observations, rcond=None)
    res = float(np.linalg.norm(p.A @ f - p.observations))
    return f, res


def _pinv(A: np.ndarray) -> np.ndarray:
    """``(A^dag A)^{-1} A^dag``."""
    return np.linalg.solve(A.conj().T @ A, A.conj().T)


def column_sum_norm(M: np.ndarray) -> float:
    return float(np.abs(M).sum(axis=0).max())


def row_sum_norm(M: np.ndarray) -> float:
    return float(np.abs(M).sum(axis=1).max())


def stability_bound(p: FitProblem, epsilon: float, mu_inf: float, norm: str = "column") -> float:
    """``eps |1 - mu_inf|^2 ||(A^dag A)^{-1} A^dag||`` with the max-column-sum norm.

    ``norm="row"`` uses the induced infinity norm (max row sum) instead.
    """
    _check_rank(p)
    P = _pinv(p.A)
    nrm = column_sum_norm(P) if norm == "column" else row_sum_norm(P)
    return float(epsilon * abs(1.0 - mu_inf) ** 2 * nrm)


def mu_infinity(measurements: Sequence[Tuple[WeylIndex, complex]]) -> float:
    """Largest decay magnitude over non-identity labels."""
    vals = [abs(m) for w, m in measurements if not w.is_identity()]
    return float(max(vals)) if vals else 0.0


def anchored_coefficients(model: LocalNoiseModel) -> np.ndarray:
    """Exact anchored parameters of a raw model (solves the default-label system)."""
    g, d = model.hypergraph, model.d
    labels = default_labels(g, d)
    A = np.array([design_row(w, g) for w in labels])
    lam = np.array([induced_eigenvalue(model, w) for w in labels])
    return np.linalg.solve(A, lam)


def anchored_to_model(g: Hypergraph, d: int, coeffs: np.ndarray) -> LocalNoiseModel:
    """Raw tables reproducing the anchored parameters (each set assigned to its first edge)."""
    cols = _anchored_columns(g, d)
    tables = {e: np.zeros(d ** (2 * len(e)), dtype=complex) for e in g.edges}
    owner = {}
    for S in g.down_closure():
        owner[S] = next(e for e in g.edges if set(S) <= set(e))
    for (S, x), val in zip(cols, coeffs):
        e = owner[S]
        for c in range(d ** (2 * len(e))):
            loc = WeylIndex.from_code(c, d, len(e)).local_codes()
            if all(loc[e.index(q)] == xq for q, xq in zip(S, x)):
                tables[e][c] += val
    return LocalNoiseModel(g, d, tables)


def random_local_model(g: Hypergraph, d: int, rng: np.random.Generator, strength: float = 0.1,
                       ) -> LocalNoiseModel:
    """Convex mixture of edge-local mixed-Weyl channels close to the identity."""
    from .noise import mixed_weyl_channel
    weights = rng.dirichlet(np.ones(len(g.edges)))
    chans = []
    for e in g.edges:
        D2 = d ** (2 * len(e))
        p = rng.random(D2)
        p[0] = 0.0
        p = strength * p / p.sum()
        p[0] = 1.0 - strength
        chans.append(mixed_weyl_channel(p, d, len(e)))
    return LocalNoiseModel.from_channels(g, d, weights, chans)
