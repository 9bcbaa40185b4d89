# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled sampling kernels: Vose alias construction and batched path walks.

Semantics mirror ``_kernels_py`` exactly (same uniform-to-index mapping), so
the two backends are interchangeable and produce identical samples.
"""
import numpy as np
cimport numpy as cnp
from libc.stdint cimport int64_t, uint8_t

cnp.import_array()


def build_alias(P):
    cdef const double[:, ::1] Pv = np.ascontiguousarray(P, dtype=np.float64)
    cdef Py_ssize_t C = Pv.shape[0]
    cdef Py_ssize_t D = Pv.shape[1]
    prob_arr = np.ones((C, D), dtype=np.float64)
    alias_arr = np.tile(np.arange(D, dtype=np.int64), (C, 1))
    cdef double[:, ::1] prob = prob_arr
    cdef int64_t[:, ::1] alias = alias_arr
    cdef double[::1] scaled = np.empty(D, dtype=np.float64)
    cdef int64_t[::1] small = np.empty(D, dtype=np.int64)
    cdef int64_t[::1] large = np.empty(D, dtype=np.int64)
    cdef Py_ssize_t c, i, ns, nl
    cdef int64_t s, l
    cdef double tot
    with nogil:
        for c in range(C):
            tot = 0.0
            for i in range(D):
                tot = tot + Pv[c, i]
            if tot <= 0.0:
                continue
            ns = 0
            nl = 0
            for i in range(D):
                scaled[i] = (Pv[c, i] / tot) * D
                if scaled[i] < 1.0:
                    small[ns] = i
                    ns = ns + 1
                else:
                    large[nl] = i
                    nl = nl + 1
            while ns > 0 and nl > 0:
                ns = ns - 1
                s = small[ns]
                nl = nl - 1
                l = large[nl]
                prob[c, s] = scaled[s]
                alias[c, s] = l
                scaled[l] = (scaled[l] + scaled[s]) - 1.0
                if scaled[l] < 1.0:
                    small[ns] = l
                    ns = ns + 1
                else:
                    large[nl] = l
                    nl = nl + 1
            for i in range(nl):
                prob[c, large[i]] = 1.0
            for i in range(ns):
                prob[c, small[i]] = 1.0
    return prob_arr, alias_arr


def alias_draw(prob, alias, u):
    cdef const double[::1] p = np.ascontiguousarray(prob, dtype=np.float64)
    cdef const int64_t[::1] a = np.ascontiguousarray(alias, dtype=np.int64)
    cdef const double[::1] uv = np.ascontiguousarray(u, dtype=np.float64)
    cdef Py_ssize_t N = uv.shape[0]
    cdef Py_ssize_t D = p.shape[0]
    out_arr = np.empty(N, dtype=np.int64)
    cdef int64_t[::1] out = out_arr
    cdef Py_ssize_t i
    cdef int64_t k
    cdef double x, f
    with nogil:
        for i in range(N):
            x = uv[i] * D
            k = <int64_t> x
            if k > D - 1:
                k = D - 1
            f = x - k
            if f < p[k]:
                out[i] = k
            else:
                out[i] = a[k]
    return out_arr


def walk(codes, weights, uniforms, active, steps, supports, sup_off, tab_off,
         col_off, dims, prob_flat, alias_flat, phase_flat, colnorm_flat, int64_t d2):
    cdef int64_t[:, ::1] cv = codes
    cdef double complex[::1] wv = weights
    cdef const double[:, ::1] uv = uniforms
    cdef const uint8_t[:, ::1] av
    cdef bint has_active = active is not None
    if has_active:
        av = active
    cdef const int64_t[::1] st = np.ascontiguousarray(steps, dtype=np.int64)
    cdef const int64_t[::1] sup = np.ascontiguousarray(supports, dtype=np.int64)
    cdef const int64_t[::1] so = np.ascontiguousarray(sup_off, dtype=np.int64)
    cdef const int64_t[::1] to = np.ascontiguousarray(tab_off, dtype=np.int64)
    cdef const int64_t[::1] co = np.ascontiguousarray(col_off, dtype=np.int64)
    cdef const int64_t[::1] dm = np.ascontiguousarray(dims, dtype=np.int64)
    cdef const double[::1] pf = prob_flat
    cdef const int64_t[::1] af = alias_flat
    cdef const double complex[::1] phf = phase_flat
    cdef const double[::1] cnf = colnorm_flat
    cdef Py_ssize_t S = cv.shape[0]
    cdef Py_ssize_t T = st.shape[0]
    cdef Py_ssize_t s, t, j
    cdef int64_t lid, m, D, col, k, row, base, r, s0
    cdef double cn, x, f
    with nogil:
        for s in range(S):
            for t in range(T):
                if wv[s] == 0:
                    break
                if has_active and av[s, t] == 0:
                    continue
                lid = st[t]
                s0 = so[lid]
                m = so[lid + 1] - s0
                D = dm[lid]
                col = 0
                for j in range(m):
                    col = col * d2 + cv[s, sup[s0 + j]]
                cn = cnf[co[lid] + col]
                if cn == 0.0:
                    wv[s] = 0
                    break
                x = uv[s, t] * D
                k = <int64_t> x
                if k > D - 1:
                    k = D - 1
                f = x - k
                base = to[lid] + col * D
                if f < pf[base + k]:
                    row = k
                else:
                    row = af[base + k]
                wv[s] = wv[s] * (cn * phf[base + row])
                r = row
                for j in range(m - 1, -1, -1):
                    cv[s, sup[s0 + j]] = r % d2
                    r = r // d2
    return codes, weights
