# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled inner loops.  Signatures mirror ``_kernels_py`` exactly."""

import numpy as np
cimport numpy as cnp
from libc.math cimport tanh, atanh
from libc.stdint cimport int8_t, int16_t, int64_t

cnp.import_array()

cdef double TANH_CLAMP = 35.0
cdef double ATANH_CLAMP = 1.0 - 1e-15

# status codes shared with the Python fallback
STATUS_SUCCESS = 0
STATUS_STALL = 1
STATUS_CAP = 2
STATUS_CONFLICT = 3

MODE_BEC = 0
MODE_GALLAGER = 1
MODE_WEIGHTED = 2


def check_pair(const double[::1] xp, const double[::1] xn,
               const double[::1] yp, const double[::1] yn,
               const int16_t[:, ::1] table, const int64_t[::1] sat):
    """Density of the tanh-rule combination of two independent messages.

    Densities are split by sign into magnitude pmfs over bins ``0..K``
    (the last bin may stand for infinity); ``table[a, b]`` is the output bin.
    The table must be symmetric with ``table[a, b] == a`` for ``b >= sat[a]``,
    which lets each row stop early and settle its tail with suffix sums.
    """
    cdef Py_ssize_t K = xp.shape[0]
    cdef Py_ssize_t a, b, s
    cdef int16_t t
    cdef double ap, an, bp, bn
    zp = np.zeros(K)
    zn = np.zeros(K)
    cdef double[::1] zpv = zp
    cdef double[::1] znv = zn
    # suffix sums, index K is the empty tail
    sx = np.zeros((2, K + 1))
    sy = np.zeros((2, K + 1))
    cdef double[:, ::1] sxv = sx
    cdef double[:, ::1] syv = sy
    for a in range(K - 1, -1, -1):
        sxv[0, a] = sxv[0, a + 1] + xp[a]
        sxv[1, a] = sxv[1, a + 1] + xn[a]
        syv[0, a] = syv[0, a + 1] + yp[a]
        syv[1, a] = syv[1, a + 1] + yn[a]
    for a in range(K):
        ap = xp[a]
        an = xn[a]
        bp = yp[a]
        bn = yn[a]
        s = sat[a]
        if s < a + 1:
            s = a + 1
        # diagonal
        t = table[a, a]
        zpv[t] += ap * bp + an * bn
        znv[t] += ap * bn + an * bp
        # off-diagonal pairs (a, b) and (b, a) below the saturation point
        for b in range(a + 1, s):
            t = table[a, b]
            zpv[t] += ap * yp[b] + an * yn[b] + bp * xp[b] + bn * xn[b]
            znv[t] += ap * yn[b] + an * yp[b] + bp * xn[b] + bn * xp[b]
        # saturated tails land on bin a
        zpv[a] += ap * syv[0, s] + an * syv[1, s] + bp * sxv[0, s] + bn * sxv[1, s]
        znv[a] += ap * syv[1, s] + an * syv[0, s] + bp * sxv[1, s] + bn * sxv[0, s]
    return zp, zn


cdef inline double _clamp(double x) nogil:
    if x > TANH_CLAMP:
        return TANH_CLAMP
    if x < -TANH_CLAMP:
        return -TANH_CLAMP
    return x


cdef bint _soft_ok(const int64_t[::1] chk_ptr, const int64_t[::1] chk_edge,
                   const int64_t[::1] edge_var, double[::1] post):
    cdef Py_ssize_t c, k
    cdef int neg
    cdef double x
    for c in range(chk_ptr.shape[0] - 1):
        neg = 0
        for k in range(chk_ptr[c], chk_ptr[c + 1]):
            x = post[edge_var[chk_edge[k]]]
            if x == 0.0:
                return False
            if x < 0.0:
                neg += 1
        if neg & 1:
            return False
    return True


def bp_flood(const int64_t[::1] var_ptr, const int64_t[::1] var_edge,
             const int64_t[::1] chk_ptr, const int64_t[::1] chk_edge,
             const int64_t[::1] edge_var, const double[::1] llr0,
             int max_iter, bint early_stop=True):
    """Flooding sum-product decoding; returns ``(posterior, iterations, converged)``."""
    cdef Py_ssize_t n = llr0.shape[0]
    cdef Py_ssize_t m = chk_ptr.shape[0] - 1
    cdef Py_ssize_t E = edge_var.shape[0]
    cdef Py_ssize_t v, c, k, e, s, d, maxdeg = 1
    cdef int it
    cdef double acc, prod, tot
    for c in range(m):
        if chk_ptr[c + 1] - chk_ptr[c] > maxdeg:
            maxdeg = chk_ptr[c + 1] - chk_ptr[c]
    v2c_a = np.empty(E)
    c2v_a = np.zeros(E)
    post_a = np.array(llr0, dtype=np.float64)
    tb_a = np.empty(maxdeg)
    pre_a = np.empty(maxdeg)
    cdef double[::1] v2c = v2c_a
    cdef double[::1] c2v = c2v_a
    cdef double[::1] post = post_a
    cdef double[::1] tb = tb_a
    cdef double[::1] pre = pre_a
    for e in range(E):
        v2c[e] = llr0[edge_var[e]]
    if early_stop and _soft_ok(chk_ptr, chk_edge, edge_var, post):
        return post_a, 0, True
    for it in range(1, max_iter + 1):
        for c in range(m):
            s = chk_ptr[c]
            d = chk_ptr[c + 1] - s
            acc = 1.0
            for k in range(d):
                tb[k] = tanh(0.5 * _clamp(v2c[chk_edge[s + k]]))
                pre[k] = acc
                acc *= tb[k]
            acc = 1.0
            for k in range(d - 1, -1, -1):
                prod = pre[k] * acc
                acc *= tb[k]
                if prod > ATANH_CLAMP:
                    prod = ATANH_CLAMP
                elif prod < -ATANH_CLAMP:
                    prod = -ATANH_CLAMP
                c2v[chk_edge[s + k]] = 2.0 * atanh(prod)
        for v in range(n):
            tot = 0.0
            for k in range(var_ptr[v], var_ptr[v + 1]):
                tot += c2v[var_edge[k]]
            post[v] = llr0[v] + tot
            for k in range(var_ptr[v], var_ptr[v + 1]):
                e = var_edge[k]
                v2c[e] = llr0[v] + (tot - c2v[e])
        if early_stop and _soft_ok(chk_ptr, chk_edge, edge_var, post):
            return post_a, it, True
    return post_a, max_iter, _soft_ok(chk_ptr, chk_edge, edge_var, post)


cdef bint _hard_ok(const int64_t[::1] chk_ptr, const int64_t[::1] chk_edge,
                   const int64_t[::1] edge_var, int8_t[::1] word):
    cdef Py_ssize_t c, k
    cdef int neg
    cdef int8_t x
    for c in range(chk_ptr.shape[0] - 1):
        neg = 0
        for k in range(chk_ptr[c], chk_ptr[c + 1]):
            x = word[edge_var[chk_edge[k]]]
            if x == 0:
                return False
            if x < 0:
                neg += 1
        if neg & 1:
            return False
    return True


cdef inline int8_t _sgn(double x) nogil:
    if x > 0:
        return 1
    if x < 0:
        return -1
    return 0


def hard_flood(int mode,
               const int64_t[::1] var_ptr, const int64_t[::1] var_edge,
               const int64_t[::1] chk_ptr, const int64_t[::1] chk_edge,
               const int64_t[::1] edge_var, const int8_t[::1] r,
               const int64_t[:, ::1] cutoffs, const double[::1] weights,
               int max_iter):
    """Flooding decoder over {-1, 0, +1} messages.

    ``mode`` selects the variable map: erasure propagation, Gallager cutoff
    (``cutoffs[i, j]`` for iteration row ``i`` and degree ``j``) or weighted
    sign (``weights[i]``).  Schedule rows past the end repeat the last row.
    Returns ``(word, iterations, status)``.
    """
    cdef Py_ssize_t n = r.shape[0]
    cdef Py_ssize_t m = chk_ptr.shape[0] - 1
    cdef Py_ssize_t E = edge_var.shape[0]
    cdef Py_ssize_t v, c, k, e, j, row
    cdef Py_ssize_t n_rows = cutoffs.shape[0] if mode == MODE_GALLAGER else weights.shape[0]
    cdef int it, zeros, neg, dis, nk, others, b
    cdef int8_t prod, x, val, rv, msg
    cdef double tot, wr
    cdef bint changed
    v2c_a = np.empty(E, dtype=np.int8)
    c2v_a = np.zeros(E, dtype=np.int8)
    word_a = np.array(r, dtype=np.int8)
    cdef int8_t[::1] v2c = v2c_a
    cdef int8_t[::1] c2v = c2v_a
    cdef int8_t[::1] word = word_a
    for e in range(E):
        v2c[e] = r[edge_var[e]]
    if _hard_ok(chk_ptr, chk_edge, edge_var, word):
        return word_a, 0, STATUS_SUCCESS
    for it in range(1, max_iter + 1):
        row = it - 1 if it - 1 < n_rows else n_rows - 1
        for c in range(m):
            zeros = 0
            neg = 0
            for k in range(chk_ptr[c], chk_ptr[c + 1]):
                x = v2c[chk_edge[k]]
                if x == 0:
                    zeros += 1
                elif x < 0:
                    neg += 1
            prod = -1 if neg & 1 else 1
            for k in range(chk_ptr[c], chk_ptr[c + 1]):
                e = chk_edge[k]
                x = v2c[e]
                if x == 0:
                    c2v[e] = prod if zeros == 1 else 0
                else:
                    c2v[e] = prod * x if zeros == 0 else 0
        changed = False
        for v in range(n):
            rv = r[v]
            j = var_ptr[v + 1] - var_ptr[v]
            if mode == MODE_BEC:
                val = rv
                nk = 0
                for k in range(var_ptr[v], var_ptr[v + 1]):
                    x = c2v[var_edge[k]]
                    if x != 0:
                        nk += 1
                        if val == 0:
                            val = x
                        elif val != x:
                            word[v] = 0
                            return word_a, it, STATUS_CONFLICT
                for k in range(var_ptr[v], var_ptr[v + 1]):
                    e = var_edge[k]
                    if rv != 0:
                        msg = rv
                    else:
                        others = nk - (1 if c2v[e] != 0 else 0)
                        msg = val if others > 0 else 0
                    if msg != v2c[e]:
                        changed = True
                        v2c[e] = msg
                word[v] = val
            elif mode == MODE_GALLAGER:
                b = <int>cutoffs[row, j] if j < cutoffs.shape[1] else <int>(j - 1)
                dis = 0
                tot = rv
                for k in range(var_ptr[v], var_ptr[v + 1]):
                    x = c2v[var_edge[k]]
                    tot += x
                    if x == -rv:
                        dis += 1
                for k in range(var_ptr[v], var_ptr[v + 1]):
                    e = var_edge[k]
                    others = dis - (1 if c2v[e] == -rv else 0)
                    msg = -rv if (j > 1 and others >= b) else rv
                    if msg != v2c[e]:
                        changed = True
                        v2c[e] = msg
                x = _sgn(tot)
                word[v] = x if x != 0 else rv
            else:
                wr = weights[row] * rv
                tot = 0.0
                for k in range(var_ptr[v], var_ptr[v + 1]):
                    tot += c2v[var_edge[k]]
                for k in range(var_ptr[v], var_ptr[v + 1]):
                    e = var_edge[k]
                    msg = _sgn(wr + tot - c2v[e])
                    if msg != v2c[e]:
                        changed = True
                        v2c[e] = msg
                x = _sgn(wr + tot)
                word[v] = x if x != 0 else rv
        if _hard_ok(chk_ptr, chk_edge, edge_var, word):
            return word_a, it, STATUS_SUCCESS
        if not changed and it - 1 >= n_rows - 1:
            return word_a, it, STATUS_STALL
    return word_a, max_iter, STATUS_CAP


def peel(const int64_t[::1] var_ptr, const int64_t[::1] var_edge,
         const int64_t[::1] chk_ptr, const int64_t[::1] chk_edge,
         const int64_t[::1] edge_var, const int64_t[::1] edge_chk,
         const int8_t[::1] r):
    """Peeling decoder; returns ``(word, peels, consistent)``."""
    cdef Py_ssize_t n = r.shape[0]
    cdef Py_ssize_t m = chk_ptr.shape[0] - 1
    cdef Py_ssize_t v, c, k, e, c2, head = 0, tail = 0
    cdef int8_t val
    cdef int peels = 0
    word_a = np.array(r, dtype=np.int8)
    count_a = np.zeros(m, dtype=np.int64)
    parity_a = np.ones(m, dtype=np.int8)
    queue_a = np.empty(m + 1 + edge_var.shape[0], dtype=np.int64)
    cdef int8_t[::1] word = word_a
    cdef int64_t[::1] count = count_a
    cdef int8_t[::1] parity = parity_a
    cdef int64_t[::1] queue = queue_a
    for c in range(m):
        for k in range(chk_ptr[c], chk_ptr[c + 1]):
            val = word[edge_var[chk_edge[k]]]
            if val == 0:
                count[c] += 1
            else:
                parity[c] *= val
        if count[c] == 1:
            queue[tail] = c
            tail += 1
    while head < tail:
        c = queue[head]
        head += 1
        if count[c] != 1:
            continue
        v = -1
        for k in range(chk_ptr[c], chk_ptr[c + 1]):
            if word[edge_var[chk_edge[k]]] == 0:
                v = edge_var[chk_edge[k]]
                break
        val = parity[c]
        word[v] = val
        peels += 1
        for k in range(var_ptr[v], var_ptr[v + 1]):
            c2 = edge_chk[var_edge[k]]
            count[c2] -= 1
            parity[c2] *= val
            if count[c2] == 1:
                queue[tail] = c2
                tail += 1
    for c in range(m):
        if count[c] == 0 and parity[c] != 1:
            return word_a, peels, False
    return word_a, peels, True
