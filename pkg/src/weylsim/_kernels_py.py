"""Pure numpy implementation of the sampling kernels.

Used when the compiled extension is unavailable or when the environment
variable ``WEYLSIM_PURE_PYTHON=1`` is set.  The functions here are the
reference semantics for ``_kernels.pyx``; both must produce bit-identical
outputs for identical inputs.
"""
import numpy as np


def build_alias(P):
    """Vose alias tables for each row of ``P``.

    Parameters
    ----------
    P : ndarray, shape (C, D)
        Non-negative weights; each row is normalized internally.  All-zero rows
        get a degenerate table that always returns the column itself.

    Returns
    -------
    prob : ndarray of float64, shape (C, D)
    alias : ndarray of int64, shape (C, D)
    """
    P = np.ascontiguousarray(P, dtype=np.float64)
    C, D = P.shape
    prob = np.ones((C, D), dtype=np.float64)
    alias = np.tile(np.arange(D, dtype=np.int64), (C, 1))
    for c in range(C):
        row = P[c]
        tot = float(np.cumsum(row)[-1])  # sequential sum, as in the compiled kernel
        if tot <= 0.0:
            continue
        scaled = (row / tot) * D
        small = [i for i in range(D) if scaled[i] < 1.0]
        large = [i for i in range(D) if scaled[i] >= 1.0]
        while small and large:
            s = small.pop()
            l = large.pop()
            prob[c, s] = scaled[s]
            alias[c, s] = l
            scaled[l] = (scaled[l] + scaled[s]) - 1.0
            if scaled[l] < 1.0:
                small.append(l)
            else:
                large.append(l)
        for i in large:
            prob[c, i] = 1.0
        for i in small:
            prob[c, i] = 1.0
    return prob, alias


def alias_draw(prob, alias, u):
    """Draw one index per uniform ``u`` from a single alias table (vectorized)."""
    D = prob.shape[0]
    x = u * D
    k = np.minimum(x.astype(np.int64), D - 1)
    f = x - k
    return np.where(f < prob[k], k, alias[k])


def walk(codes, weights, uniforms, active, steps, supports, sup_off, tab_off,
         col_off, dims, prob_flat, alias_flat, phase_flat, colnorm_flat, d2):
    """Advance a batch of paths through a sequence of local superoperators.

    ``codes`` (S, n) holds per-qudit local Weyl codes and ``weights`` (S,) the
    running complex path weights; both are updated in place.  Step ``t`` uses
    table ``steps[t]`` and uniform ``uniforms[:, t]``; if ``active`` is given,
    only rows with ``active[:, t] != 0`` are advanced.
    """
    S = codes.shape[0]
    for t in range(len(steps)):
        lid = steps[t]
        sup = supports[sup_off[lid]:sup_off[lid + 1]]
        m = len(sup)
        D = dims[lid]
        rows_sel = np.nonzero(weights != 0)[0] if active is None else \
            np.nonzero((weights != 0) & (active[:, t] != 0))[0]
        if rows_sel.size == 0:
            continue
        col = np.zeros(rows_sel.size, dtype=np.int64)
        for j in range(m):
            col = col * d2 + codes[rows_sel, sup[j]]
        cn = colnorm_flat[col_off[lid] + col]
        u = uniforms[rows_sel, t]
        x = u * D
        k = np.minimum(x.astype(np.int64), D - 1)
        f = x - k
        base = tab_off[lid] + col * D
        row = np.where(f < prob_flat[base + k], k, alias_flat[base + k])
        ph = phase_flat[base + row]
        zero = cn == 0.0
        new_w = weights[rows_sel] * (cn * ph)
        new_w[zero] = 0.0
        weights[rows_sel] = new_w
        r = row.copy()
        for j in range(m - 1, -1, -1):
            codes[rows_sel, sup[j]] = np.where(zero, codes[rows_sel, sup[j]], r % d2)
            r //= d2
    return codes, weights
