"""Pure numpy versions of the compiled kernels; used when the extension is absent."""

import numpy as np

TANH_CLAMP = 35.0
ATANH_CLAMP = 1.0 - 1e-15

STATUS_SUCCESS = 0
STATUS_STALL = 1
STATUS_CAP = 2
STATUS_CONFLICT = 3

MODE_BEC = 0
MODE_GALLAGER = 1
MODE_WEIGHTED = 2


def check_pair(xp, xn, yp, yn, table, sat):
    """Density of the tanh-rule combination of two independent messages.

    ``sat`` is only a speed hint for the compiled kernel; the full table is used here.
    """
    K = len(xp)
    ia = np.flatnonzero((xp != 0) | (xn != 0))
    ib = np.flatnonzero((yp != 0) | (yn != 0))
    t = table[np.ix_(ia, ib)].ravel()
    pos = (np.outer(xp[ia], yp[ib]) + np.outer(xn[ia], yn[ib])).ravel()
    neg = (np.outer(xp[ia], yn[ib]) + np.outer(xn[ia], yp[ib])).ravel()
    return (np.bincount(t, weights=pos, minlength=K), np.bincount(t, weights=neg, minlength=K))


def _edge_check_index(chk_ptr, chk_edge, n_edges):
    owner = np.empty(n_edges, dtype=np.int64)
    owner[chk_edge] = np.repeat(np.arange(len(chk_ptr) - 1), np.diff(chk_ptr))
    return owner


def _soft_ok(chk_of_edge, m, edge_var, post):
    x = post[edge_var]
    if np.any(x == 0):
        return False
    neg = np.bincount(chk_of_edge, weights=(x < 0), minlength=m)
    return bool(np.all(neg.astype(np.int64) % 2 == 0))


def bp_flood(var_ptr, var_edge, chk_ptr, chk_edge, edge_var, llr0, max_iter, early_stop=True):
    """Flooding sum-product decoding; returns ``(posterior, iterations, converged)``."""
    llr0 = np.asarray(llr0, dtype=np.float64)
    n = len(llr0)
    m = len(chk_ptr) - 1
    E = len(edge_var)
    chk_of_edge = _edge_check_index(chk_ptr, chk_edge, E)
    v2c = llr0[edge_var].copy()
    post = llr0.copy()
    if early_stop and _soft_ok(chk_of_edge, m, edge_var, post):
        return post, 0, True
    for it in range(1, max_iter + 1):
        t = np.tanh(0.5 * np.clip(v2c, -TANH_CLAMP, TANH_CLAMP))
        zero = t == 0
        mag = np.log(np.where(zero, 1.0, np.abs(t)))
        zeros = np.bincount(chk_of_edge, weights=zero, minlength=m)[chk_of_edge]
        negs = np.bincount(chk_of_edge, weights=(t < 0), minlength=m).astype(np.int64)[chk_of_edge]
        logsum = np.bincount(chk_of_edge, weights=mag, minlength=m)[chk_of_edge]
        # product over the other edges, zero-aware
        sign = np.where((negs - (t < 0)) % 2 == 1, -1.0, 1.0)
        others_zero = zeros - zero
        prod = np.where(others_zero > 0, 0.0, sign * np.exp(logsum - mag))
        prod = np.clip(prod, -ATANH_CLAMP, ATANH_CLAMP)
        c2v = 2.0 * np.arctanh(prod)
        tot = np.bincount(edge_var, weights=c2v, minlength=n)
        post = llr0 + tot
        v2c = llr0[edge_var] + (tot[edge_var] - c2v)
        if early_stop and _soft_ok(chk_of_edge, m, edge_var, post):
            return post, it, True
    return post, max_iter, _soft_ok(chk_of_edge, m, edge_var, post)


def _hard_ok(chk_of_edge, m, edge_var, word):
    return _soft_ok(chk_of_edge, m, edge_var, word.astype(np.float64))


def hard_flood(mode, var_ptr, var_edge, chk_ptr, chk_edge, edge_var, r, cutoffs, weights, max_iter):
    """Flooding decoder over {-1, 0, +1} messages; returns ``(word, iterations, status)``."""
    r = np.asarray(r, dtype=np.int8)
    n = len(r)
    m = len(chk_ptr) - 1
    E = len(edge_var)
    chk_of_edge = _edge_check_index(chk_ptr, chk_edge, E)
    deg = np.diff(var_ptr)
    deg_e = deg[edge_var]
    r_e = r[edge_var].astype(np.int64)
    n_rows = len(cutoffs) if mode == MODE_GALLAGER else len(weights)
    v2c = r_e.copy()
    word = r.copy()
    if _hard_ok(chk_of_edge, m, edge_var, word):
        return word, 0, STATUS_SUCCESS
    for it in range(1, max_iter + 1):
        row = min(it - 1, n_rows - 1)
        zero = v2c == 0
        zeros = np.bincount(chk_of_edge, weights=zero, minlength=m).astype(np.int64)[chk_of_edge]
        negs = np.bincount(chk_of_edge, weights=(v2c < 0), minlength=m).astype(np.int64)[chk_of_edge]
        prod = np.where(negs % 2 == 1, -1, 1)
        c2v = np.where(zero, np.where(zeros == 1, prod, 0), np.where(zeros == 0, prod * v2c, 0))
        if mode == MODE_BEC:
            pos = np.bincount(edge_var, weights=(c2v > 0), minlength=n) + (r > 0)
            neg = np.bincount(edge_var, weights=(c2v < 0), minlength=n) + (r < 0)
            bad = np.flatnonzero((pos > 0) & (neg > 0))
            if bad.size:
                word = np.where(pos > 0, 1, np.where(neg > 0, -1, 0)).astype(np.int8)
                word[bad] = 0
                return word, it, STATUS_CONFLICT
            val = np.where(pos > 0, 1, np.where(neg > 0, -1, 0))
            nk = (pos + neg - (r != 0))[edge_var]
            others = nk - (c2v != 0)
            new = np.where(r_e != 0, r_e, np.where(others > 0, val[edge_var], 0))
            word = val.astype(np.int8)
        elif mode == MODE_GALLAGER:
            cut = np.asarray(cutoffs)[row]
            b = np.where(deg_e < len(cut), cut[np.minimum(deg_e, len(cut) - 1)], deg_e - 1)
            dis_e = c2v == -r_e
            dis = np.bincount(edge_var, weights=dis_e, minlength=n)[edge_var]
            others = dis - dis_e
            new = np.where((deg_e > 1) & (others >= b), -r_e, r_e)
            tot = np.bincount(edge_var, weights=c2v, minlength=n) + r
            s = np.sign(tot).astype(np.int64)
            word = np.where(s != 0, s, r).astype(np.int8)
        else:
            wr = weights[row] * r.astype(np.float64)
            tot = np.bincount(edge_var, weights=c2v, minlength=n)
            new = np.sign(wr[edge_var] + tot[edge_var] - c2v).astype(np.int64)
            s = np.sign(wr + tot).astype(np.int64)
            word = np.where(s != 0, s, r).astype(np.int8)
        changed = not np.array_equal(new, v2c)
        v2c = new
        if _hard_ok(chk_of_edge, m, edge_var, word):
            return word, it, STATUS_SUCCESS
        if not changed and it - 1 >= n_rows - 1:
            return word, it, STATUS_STALL
    return word, max_iter, STATUS_CAP


def peel(var_ptr, var_edge, chk_ptr, chk_edge, edge_var, edge_chk, r):
    """Peeling decoder; returns ``(word, peels, consistent)``."""
    word = np.array(r, dtype=np.int8)
    m = len(chk_ptr) - 1
    vals = word[edge_var]
    count = np.bincount(edge_chk, weights=(vals == 0), minlength=m).astype(np.int64)
    negs = np.bincount(edge_chk, weights=(vals < 0), minlength=m).astype(np.int64)
    parity = np.where(negs % 2 == 1, -1, 1).tolist()
    count = count.tolist()
    wl = word.tolist()
    ev = edge_var.tolist()
    ec = edge_chk.tolist()
    cp = chk_ptr.tolist()
    ce = chk_edge.tolist()
    vp = var_ptr.tolist()
    ve = var_edge.tolist()
    queue = [c for c in range(m) if count[c] == 1]
    head = 0
    peels = 0
    while head < len(queue):
        c = queue[head]
        head += 1
        if count[c] != 1:
            continue
        v = next(ev[ce[k]] for k in range(cp[c], cp[c + 1]) if wl[ev[ce[k]]] == 0)
        val = parity[c]
        wl[v] = val
        peels += 1
        for k in range(vp[v], vp[v + 1]):
            c2 = ec[ve[k]]
            count[c2] -= 1
            parity[c2] *= val
            if count[c2] == 1:
                queue.append(c2)
    word = np.array(wl, dtype=np.int8)
    consistent = all(parity[c] == 1 for c in range(m) if count[c] == 0)
    return word, peels, consistent
