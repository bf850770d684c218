"""Jit-compiled numerical core shared by the grid and graph solvers.

Everything here is deliberately flat: a hand-rolled binary heap over
parallel arrays (lexicographic on (value, node index) so tie order is
deterministic), the one-node monotone update, single-pass fast marching on
uniform grids and on weighted graphs, multi-source Dijkstra, and the
Gauss-Seidel verification sweeps for the point-cloud scheme.  All functions
are ``njit(cache=True)`` and operate on primitive numpy arrays only.
"""

from __future__ import annotations

import numpy as np
from numba import njit

INF = np.inf


# ---------------------------------- heap ----------------------------------
# keys/idxs are preallocated; size is threaded through push/pop by value.

@njit(cache=True)
def _heap_push(keys, idxs, size, key, idx):
    i = size
    keys[i] = key
    idxs[i] = idx
    while i > 0:
        p = (i - 1) >> 1
        if keys[p] > keys[i] or (keys[p] == keys[i] and idxs[p] > idxs[i]):
            keys[p], keys[i] = keys[i], keys[p]
            idxs[p], idxs[i] = idxs[i], idxs[p]
            i = p
        else:
            break
    return size + 1


@njit(cache=True)
def _heap_pop(keys, idxs, size):
    key = keys[0]
    idx = idxs[0]
    size -= 1
    if size > 0:
        keys[0] = keys[size]
        idxs[0] = idxs[size]
        i = 0
        while True:
            l = 2 * i + 1
            r = l + 1
            best = i
            if l < size and (keys[l] < keys[best]
                             or (keys[l] == keys[best] and idxs[l] < idxs[best])):
                best = l
            if r < size and (keys[r] < keys[best]
                             or (keys[r] == keys[best] and idxs[r] < idxs[best])):
                best = r
            if best == i:
                break
            keys[best], keys[i] = keys[i], keys[best]
            idxs[best], idxs[i] = idxs[i], idxs[best]
            i = best
    return key, idx, size


# ----------------------------- one-node update -----------------------------

@njit(cache=True)
def godunov_update(a, m, hf):
    """Largest u solving sum_i max(0, u - a[i])^2 = hf^2 over the sorted a[:m].

    Only axes with a[i] < u participate; the prefix is grown while the
    candidate root still clears the next axis value.
    """
    if m == 0:
        return INF
    u = a[0] + hf
    s1 = 1.0
    s2 = a[0]
    s3 = a[0] * a[0]
    for k in range(1, m):
        if u <= a[k]:
            break
        s1 += 1.0
        s2 += a[k]
        s3 += a[k] * a[k]
        disc = s2 * s2 - s1 * (s3 - hf * hf)
        if disc < 0.0:
            break
        u = (s2 + np.sqrt(disc)) / s1
    return u


@njit(cache=True)
def _insort(buf, m, v):
    i = m
    while i > 0 and buf[i - 1] > v:
        buf[i] = buf[i - 1]
        i -= 1
    buf[i] = v
    return m + 1


# ------------------------------ grid marching ------------------------------

@njit(cache=True)
def _grid_candidate(j, dims, strides, h, speed, u, state, a_buf):
    d = dims.size
    m = 0
    for a in range(d):
        s = strides[a]
        c = (j // s) % dims[a]
        amin = INF
        if c > 0 and state[j - s] == 2:
            amin = u[j - s]
        if c + 1 < dims[a] and state[j + s] == 2 and u[j + s] < amin:
            amin = u[j + s]
        if amin < INF:
            m = _insort(a_buf, m, amin)
    return godunov_update(a_buf, m, h * speed[j])


@njit(cache=True)
def _grid_update_neighbors(i, dims, strides, h, speed, u, state,
                           hkeys, hidxs, hsize, a_buf):
    d = dims.size
    for a in range(d):
        s = strides[a]
        c = (i // s) % dims[a]
        for step in range(2):
            if step == 0:
                if c == 0:
                    continue
                j = i - s
            else:
                if c + 1 >= dims[a]:
                    continue
                j = i + s
            if state[j] == 2:
                continue
            cand = _grid_candidate(j, dims, strides, h, speed, u, state, a_buf)
            if cand < u[j]:
                u[j] = cand
                state[j] = 1
                hsize = _heap_push(hkeys, hidxs, hsize, cand, j)
    return hsize


@njit(cache=True)
def grid_fast_march(dims, h, speed, fixed_idx, fixed_val):
    """Single-pass monotone solve of |grad u| = speed on a uniform grid.

    Returns (values, acceptance order, accepted values in pop order).
    Fixed nodes are accepted up front at their given values.
    """
    n = speed.size
    d = dims.size
    strides = np.empty(d, np.int64)
    s = 1
    for a in range(d - 1, -1, -1):
        strides[a] = s
        s *= dims[a]
    u = np.full(n, INF)
    state = np.zeros(n, np.int8)  # 0 far, 1 trial, 2 accepted
    for k in range(fixed_idx.size):
        i = fixed_idx[k]
        if fixed_val[k] < u[i]:
            u[i] = fixed_val[k]
        state[i] = 2
    cap = 2 * d * n + fixed_idx.size + 16
    hkeys = np.empty(cap)
    hidxs = np.empty(cap, np.int64)
    hsize = 0
    a_buf = np.empty(d)
    for k in range(fixed_idx.size):
        hsize = _grid_update_neighbors(fixed_idx[k], dims, strides, h, speed,
                                       u, state, hkeys, hidxs, hsize, a_buf)
    order = np.empty(n, np.int64)
    order_vals = np.empty(n)
    n_acc = 0
    while hsize > 0:
        key, i, hsize = _heap_pop(hkeys, hidxs, hsize)
        if state[i] == 2:
            continue
        state[i] = 2
        u[i] = key
        order[n_acc] = i
        order_vals[n_acc] = key
        n_acc += 1
        hsize = _grid_update_neighbors(i, dims, strides, h, speed,
                                       u, state, hkeys, hidxs, hsize, a_buf)
    return u, order[:n_acc], order_vals[:n_acc]


# ------------------------------ graph marching ------------------------------

@njit(cache=True)
def graph_fast_march(indptr, indices, coef, rho2, fixed_idx):
    """Fast-marching pass for sum_j coef_ij max(0, u_i - u_j)^2 = rho2_i.

    coef carries the scheme coefficients (kernel weight / h^2).  Fixed nodes
    sit at zero.  Per node the participating accepted neighbors arrive in
    nondecreasing value order, so running sums give each re-solve in O(1);
    a neighbor that fails the inclusion test is excluded for good.
    """
    n = rho2.size
    u = np.full(n, INF)
    state = np.zeros(n, np.int8)
    s1 = np.zeros(n)
    s2 = np.zeros(n)
    s3 = np.zeros(n)
    cap = indices.size + fixed_idx.size + 16
    hkeys = np.empty(cap)
    hidxs = np.empty(cap, np.int64)
    hsize = 0
    order = np.empty(n, np.int64)
    order_vals = np.empty(n)
    n_acc = 0
    for k in range(fixed_idx.size):
        u[fixed_idx[k]] = 0.0
        state[fixed_idx[k]] = 2
    for k in range(fixed_idx.size):
        i = fixed_idx[k]
        for e in range(indptr[i], indptr[i + 1]):
            j = indices[e]
            if state[j] != 2:
                hsize = _graph_relax(i, j, coef[e], rho2, u, s1, s2, s3,
                                     hkeys, hidxs, hsize)
                if u[j] < INF:
                    state[j] = 1
    while hsize > 0:
        key, i, hsize = _heap_pop(hkeys, hidxs, hsize)
        if state[i] == 2:
            continue
        state[i] = 2
        u[i] = key
        order[n_acc] = i
        order_vals[n_acc] = key
        n_acc += 1
        for e in range(indptr[i], indptr[i + 1]):
            j = indices[e]
            if state[j] != 2:
                hsize = _graph_relax(i, j, coef[e], rho2, u, s1, s2, s3,
                                     hkeys, hidxs, hsize)
                if u[j] < INF:
                    state[j] = 1
    return u, order[:n_acc], order_vals[:n_acc]


@njit(cache=True)
def _graph_relax(i, j, c, rho2, u, s1, s2, s3, hkeys, hidxs, hsize):
    v = u[i]
    if u[j] <= v:
        return hsize  # cannot improve; v never participates
    t1 = s1[j] + c
    t2 = s2[j] + c * v
    t3 = s3[j] + c * v * v
    q = t1 * v * v - 2.0 * t2 * v + t3 - rho2[j]
    if q > 0.0:
        return hsize  # root would fall below v; exclusion is permanent
    s1[j] = t1
    s2[j] = t2
    s3[j] = t3
    disc = t2 * t2 - t1 * (t3 - rho2[j])
    if disc < 0.0:
        disc = 0.0
    root = (t2 + np.sqrt(disc)) / t1
    if root < u[j]:
        u[j] = root
        hsize = _heap_push(hkeys, hidxs, hsize, root, j)
    return hsize


@njit(cache=True)
def graph_local_solve(vals, coefs, m, rho2):
    """Largest u with sum_i coefs[i] max(0, u - vals[i])^2 = rho2, from scratch.

    vals/coefs need not be sorted; entries at/above the root drop out.  Falls
    back to bisection if the prefix walk goes numerically bad.
    """
    if m == 0:
        return INF
    # co-sort by value (insertion; m is a node degree)
    for i in range(1, m):
        v = vals[i]
        c = coefs[i]
        k = i
        while k > 0 and vals[k - 1] > v:
            vals[k] = vals[k - 1]
            coefs[k] = coefs[k - 1]
            k -= 1
        vals[k] = v
        coefs[k] = c
    s1 = 0.0
    s2 = 0.0
    s3 = 0.0
    for k in range(m):
        if not np.isfinite(vals[k]):
            break
        s1 += coefs[k]
        s2 += coefs[k] * vals[k]
        s3 += coefs[k] * vals[k] * vals[k]
        disc = s2 * s2 - s1 * (s3 - rho2)
        if disc >= 0.0:
            root = (s2 + np.sqrt(disc)) / s1
            nxt = vals[k + 1] if k + 1 < m else INF
            if root >= vals[k] - 1e-13 and root <= nxt:
                return root
    return _bisect_local(vals, coefs, m, rho2)


@njit(cache=True)
def _bisect_local(vals, coefs, m, rho2):
    lo = INF
    for k in range(m):
        if np.isfinite(vals[k]) and vals[k] < lo:
            lo = vals[k]
    if not np.isfinite(lo):
        return INF
    hi = lo + 1.0
    while _scheme_g(vals, coefs, m, hi) < rho2:
        hi = lo + 2.0 * (hi - lo)
        if hi - lo > 1e18:
            return INF
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if _scheme_g(vals, coefs, m, mid) < rho2:
            lo = mid
        else:
            hi = mid
        if hi - lo < 1e-12 * max(1.0, abs(hi)):
            break
    return 0.5 * (lo + hi)


@njit(cache=True)
def _scheme_g(vals, coefs, m, t):
    g = 0.0
    for k in range(m):
        if np.isfinite(vals[k]) and t > vals[k]:
            g += coefs[k] * (t - vals[k]) * (t - vals[k])
    return g


@njit(cache=True)
def graph_gauss_seidel(indptr, indices, coef, rho2, u, is_fixed, max_sweeps, tol):
    """In-place verification sweeps re-solving each node against all neighbors.

    Nodes are visited in increasing current value; returns (sweeps used,
    last max update).
    """
    n = u.size
    deg_max = 0
    for i in range(n):
        d = indptr[i + 1] - indptr[i]
        if d > deg_max:
            deg_max = d
    vals = np.empty(deg_max)
    cfs = np.empty(deg_max)
    sweeps = 0
    max_delta = 0.0
    for _ in range(max_sweeps):
        sweeps += 1
        order = np.argsort(u, kind="mergesort")
        max_delta = 0.0
        for oi in range(n):
            i = order[oi]
            if is_fixed[i]:
                continue
            m = 0
            for e in range(indptr[i], indptr[i + 1]):
                j = indices[e]
                if np.isfinite(u[j]):
                    vals[m] = u[j]
                    cfs[m] = coef[e]
                    m += 1
            newv = graph_local_solve(vals, cfs, m, rho2[i])
            if np.isfinite(newv) or np.isfinite(u[i]):
                delta = abs(newv - u[i])
                if np.isfinite(delta) and delta > max_delta:
                    max_delta = delta
                elif not np.isfinite(delta):
                    max_delta = INF
            u[i] = newv
        if max_delta < tol:
            break
    return sweeps, max_delta


@njit(cache=True)
def scheme_residuals(indptr, indices, coef, rho2, u, is_fixed):
    """|g_i(u) - rho2_i| at each free finite node; zero elsewhere."""
    n = u.size
    res = np.zeros(n)
    for i in range(n):
        if is_fixed[i] or not np.isfinite(u[i]):
            continue
        g = 0.0
        for e in range(indptr[i], indptr[i + 1]):
            j = indices[e]
            if np.isfinite(u[j]) and u[i] > u[j]:
                g += coef[e] * (u[i] - u[j]) * (u[i] - u[j])
        res[i] = abs(g - rho2[i])
    return res


# --------------------------------- dijkstra ---------------------------------

@njit(cache=True)
def graph_dijkstra(indptr, indices, cost, src_idx):
    """Multi-source shortest paths with nonnegative edge costs.

    Sources start at zero.  Heap ties resolve on the lower node index, so
    the acceptance order is deterministic.
    """
    n = indptr.size - 1
    dist = np.full(n, INF)
    done = np.zeros(n, np.int8)
    cap = indices.size + src_idx.size + 16
    hkeys = np.empty(cap)
    hidxs = np.empty(cap, np.int64)
    hsize = 0
    for k in range(src_idx.size):
        i = src_idx[k]
        if dist[i] > 0.0:
            dist[i] = 0.0
            hsize = _heap_push(hkeys, hidxs, hsize, 0.0, i)
    while hsize > 0:
        key, i, hsize = _heap_pop(hkeys, hidxs, hsize)
        if done[i]:
            continue
        done[i] = 1
        for e in range(indptr[i], indptr[i + 1]):
            j = indices[e]
            if done[j]:
                continue
            nd = key + cost[e]
            if nd < dist[j]:
                dist[j] = nd
                hsize = _heap_push(hkeys, hidxs, hsize, nd, j)
    return dist
