"""Hot loops for QUBO evaluation, Monte Carlo sweeps and exhaustive search.

Every kernel works on the minimization form of a problem given as a symmetric
CSR coupling matrix ``(indptr, indices, data)`` with zero diagonal, a linear
vector and a scalar offset::

    E(x) = offset + sum_i linear[i] x_i + sum_i sum_j Q_ij x_i x_j

The local field of variable ``i`` is ``f_i = linear[i] + 2 sum_j Q_ij x_j``;
flipping ``x_i`` changes the energy by ``(1 - 2 x_i) f_i``.

Kernels consume uniforms drawn by the caller, so the jitted and pure paths
produce bit-identical output for the same inputs.
"""

import math

import numpy as np

from ._accel import USE_NUMBA, njit


@njit
def energy(indptr, indices, data, linear, offset, x):
    e = offset
    n = x.shape[0]
    for i in range(n):
        if x[i]:
            e += linear[i]
            for p in range(indptr[i], indptr[i + 1]):
                if x[indices[p]]:
                    e += data[p]
    return e


@njit
def local_fields(indptr, indices, data, linear, x):
    n = x.shape[0]
    f = linear.copy()
    for i in range(n):
        if x[i]:
            for p in range(indptr[i], indptr[i + 1]):
                f[indices[p]] += 2.0 * data[p]
    return f


@njit
def flip(i, x, f, indptr, indices, data):
    """Flip ``x[i]`` in place, update fields, return the energy change."""
    if x[i]:
        delta = -f[i]
        x[i] = 0
        s = -2.0
    else:
        delta = f[i]
        x[i] = 1
        s = 2.0
    for p in range(indptr[i], indptr[i + 1]):
        f[indices[p]] += s * data[p]
    return delta


@njit
def _community_swap(node, k, u_pick, u_acc, beta, x, f, e, indptr, indices, data):
    # move a one-hot node to another community: two coupled flips
    base = node * k
    cur = -1
    for c in range(k):
        if x[base + c]:
            if cur >= 0:
                return e
            cur = c
    if cur < 0:
        return e
    new = (cur + 1 + int(u_pick * (k - 1))) % k
    d = flip(base + cur, x, f, indptr, indices, data)
    d += flip(base + new, x, f, indptr, indices, data)
    if d <= 0.0 or u_acc < math.exp(-beta * d):
        return e + d
    flip(base + new, x, f, indptr, indices, data)
    flip(base + cur, x, f, indptr, indices, data)
    return e


@njit
def metropolis_sweep(x, f, e, beta, u_acc, u_kind, u_pick, swap_fraction, k,
                     indptr, indices, data):
    """One pass over all variables; returns the updated energy.

    With ``swap_fraction > 0`` each site visit is replaced, with that
    probability, by a community-swap proposal for the node owning the site.
    """
    n = x.shape[0]
    use_swap = swap_fraction > 0.0 and k > 1
    for i in range(n):
        if use_swap and u_kind[i] < swap_fraction:
            e = _community_swap(i // k, k, u_pick[i], u_acc[i], beta, x, f, e,
                                indptr, indices, data)
            continue
        d = (1 - 2 * x[i]) * f[i]
        if d <= 0.0 or u_acc[i] < math.exp(-beta * d):
            flip(i, x, f, indptr, indices, data)
            e += d
    return e


@njit
def anneal(x, f, e, betas, u_acc, u_kind, u_pick, swap_fraction, k,
           indptr, indices, data, best_x, best_e, trace):
    """Simulated annealing over ``len(betas)`` sweeps.

    ``trace[s]`` receives the best-so-far energy after sweep ``s``. The best
    configuration is tracked after every accepted move.
    """
    n = x.shape[0]
    use_swap = swap_fraction > 0.0 and k > 1
    for s in range(betas.shape[0]):
        beta = betas[s]
        for i in range(n):
            if use_swap and u_kind[s, i] < swap_fraction:
                e = _community_swap(i // k, k, u_pick[s, i], u_acc[s, i], beta,
                                    x, f, e, indptr, indices, data)
            else:
                d = (1 - 2 * x[i]) * f[i]
                if d <= 0.0 or u_acc[s, i] < math.exp(-beta * d):
                    flip(i, x, f, indptr, indices, data)
                    e += d
                else:
                    continue
            if e < best_e:
                best_e = e
                best_x[:] = x
        trace[s] = best_e
    return e, best_e


@njit
def houdayer_move(a, b, fa, fb, ea, eb, u, indptr, indices, data, stack, mark):
    """Isoenergetic cluster exchange between two replicas.

    Picks a seed among the sites where ``a`` and ``b`` disagree, grows the
    connected cluster of disagreeing sites over nonzero couplings, and swaps
    its bits between the replicas. Returns ``(ea, eb, cluster_size)``.
    """
    n = a.shape[0]
    ndis = 0
    for i in range(n):
        if a[i] != b[i]:
            ndis += 1
    if ndis == 0:
        return ea, eb, 0
    target = int(u * ndis)
    seed = -1
    cnt = 0
    for i in range(n):
        if a[i] != b[i]:
            if cnt == target:
                seed = i
                break
            cnt += 1
    for i in range(n):
        mark[i] = 0
    top = 0
    stack[top] = seed
    top += 1
    mark[seed] = 1
    size = 0
    while top > 0:
        top -= 1
        i = stack[top]
        stack[n + size] = i
        size += 1
        for p in range(indptr[i], indptr[i + 1]):
            j = indices[p]
            if mark[j] == 0 and a[j] != b[j] and data[p] != 0.0:
                mark[j] = 1
                stack[top] = j
                top += 1
    for q in range(size):
        i = stack[n + q]
        ea += flip(i, a, fa, indptr, indices, data)
        eb += flip(i, b, fb, indptr, indices, data)
    return ea, eb, size


@njit
def exchange_replicas(X, F, E, betas, u_swap):
    """Adjacent-temperature swaps for every replica row. Returns accepted count."""
    nrep, ntemp, n = X.shape
    accepted = 0
    for r in range(nrep):
        for t in range(ntemp - 1):
            arg = (betas[t] - betas[t + 1]) * (E[r, t] - E[r, t + 1])
            if arg >= 0.0 or u_swap[r, t] < math.exp(arg):
                for i in range(n):
                    tmp = X[r, t, i]
                    X[r, t, i] = X[r, t + 1, i]
                    X[r, t + 1, i] = tmp
                    g = F[r, t, i]
                    F[r, t, i] = F[r, t + 1, i]
                    F[r, t + 1, i] = g
                te = E[r, t]
                E[r, t] = E[r, t + 1]
                E[r, t + 1] = te
                accepted += 1
    return accepted


@njit
def tempering_periods(X, F, E, betas, indptr, indices, data, linear, offset,
                      u_sweep, u_kind, u_pick, swap_fraction, k,
                      u_swap, u_cluster, cluster_on,
                      best_x, best_e, trace_e, check, log_before, log_after,
                      log_count, max_drift):
    """Run a chunk of parallel-tempering periods.

    Each period: ``u_sweep.shape[1]`` Metropolis sweeps of every replica,
    optional Houdayer moves between the two replicas of each temperature,
    then replica exchange. ``trace_e[p, s]`` is the best-so-far energy after
    sweep ``s`` of period ``p``. With ``check`` set, pair energies around each
    cluster move are recomputed from scratch into ``log_before``/``log_after``
    and the incremental energies are compared against full evaluations after
    every period (largest gap returned as drift).
    """
    nper = u_sweep.shape[0]
    nsw = u_sweep.shape[1]
    nrep, ntemp, n = X.shape
    stack = np.empty(2 * n, dtype=np.int64)
    mark = np.empty(n, dtype=np.int8)
    use_swap = swap_fraction > 0.0
    before = 0.0
    for p in range(nper):
        for s in range(nsw):
            for r in range(nrep):
                for t in range(ntemp):
                    if use_swap:
                        E[r, t] = metropolis_sweep(
                            X[r, t], F[r, t], E[r, t], betas[t], u_sweep[p, s, r, t],
                            u_kind[p, s, r, t], u_pick[p, s, r, t], swap_fraction, k,
                            indptr, indices, data)
                    else:
                        E[r, t] = metropolis_sweep(
                            X[r, t], F[r, t], E[r, t], betas[t], u_sweep[p, s, r, t],
                            u_sweep[p, s, r, t], u_sweep[p, s, r, t], 0.0, k,
                            indptr, indices, data)
                    if E[r, t] < best_e:
                        best_e = E[r, t]
                        best_x[:] = X[r, t]
            trace_e[p, s] = best_e
        if cluster_on[p] and nrep >= 2:
            for t in range(ntemp):
                if check:
                    before = (energy(indptr, indices, data, linear, offset, X[0, t])
                              + energy(indptr, indices, data, linear, offset, X[1, t]))
                ea, eb, size = houdayer_move(X[0, t], X[1, t], F[0, t], F[1, t],
                                             E[0, t], E[1, t], u_cluster[p, t],
                                             indptr, indices, data, stack, mark)
                E[0, t] = ea
                E[1, t] = eb
                if check and size > 0:
                    after = (energy(indptr, indices, data, linear, offset, X[0, t])
                             + energy(indptr, indices, data, linear, offset, X[1, t]))
                    if log_count < log_before.shape[0]:
                        log_before[log_count] = before
                        log_after[log_count] = after
                    log_count += 1
        exchange_replicas(X, F, E, betas, u_swap[p])
        if check:
            for r in range(nrep):
                for t in range(ntemp):
                    full = energy(indptr, indices, data, linear, offset, X[r, t])
                    gap = abs(full - E[r, t])
                    if gap > max_drift:
                        max_drift = gap
    return best_e, log_count, max_drift


@njit
def _lex_less(x, y):
    for i in range(x.shape[0]):
        if x[i] != y[i]:
            return x[i] < y[i]
    return False


@njit
def _gray_search(indptr, indices, data, linear, offset, n, tol):
    x = np.zeros(n, dtype=np.int8)
    f = linear.copy()
    e = offset
    best_e = e
    best_x = x.copy()
    total = 1 << n
    for step in range(1, total):
        i = 0
        v = step
        while (v & 1) == 0:
            v >>= 1
            i += 1
        e += flip(i, x, f, indptr, indices, data)
        if (step & 0xFFFF) == 0:
            e = energy(indptr, indices, data, linear, offset, x)
        if e < best_e - tol:
            best_e = e
            best_x[:] = x
        elif e <= best_e + tol and _lex_less(x, best_x):
            if e < best_e:
                best_e = e
            best_x[:] = x
    return best_x


def _chunked_search(dense, linear, offset, n, tol, chunk=1 << 15):
    # integer order with x[0] as the most significant bit is lexicographic order
    shifts = np.arange(n - 1, -1, -1, dtype=np.int64)
    best_e = np.inf
    best_code = -1
    for start in range(0, 1 << n, chunk):
        codes = np.arange(start, min(start + chunk, 1 << n), dtype=np.int64)
        X = ((codes[:, None] >> shifts) & 1).astype(np.float64)
        e = offset + X @ linear + np.einsum("ij,ij->i", X @ dense, X)
        m = e.min()
        if m < best_e - tol:
            best_e = m
            best_code = int(codes[np.argmax(e <= m + tol)])
        elif m < best_e:
            best_e = m
    return ((best_code >> shifts) & 1).astype(np.int8)


def exhaustive_minimum(indptr, indices, data, linear, offset, dense, tol):
    """Global minimizer; ties within ``tol`` go to the lexicographically smallest."""
    n = linear.shape[0]
    if USE_NUMBA:
        return _gray_search(indptr, indices, data, linear, offset, n, tol)
    return _chunked_search(dense, linear, offset, n, tol)


@njit
def min_badness_search(n, adj_idx, adj_ptr, adj_sign, order, kmax, upper):
    """Exact minimum frustration count over partitions into at most ``kmax`` parts.

    Depth-first branch and bound over restricted-growth labelings in the given
    node ``order``. Edges are counted once. Returns ``(best, labels)``.
    """
    labels = np.full(n, -1, dtype=np.int64)
    best_labels = np.zeros(n, dtype=np.int64)
    best = upper
    choice = np.full(n, -1, dtype=np.int64)
    cost = np.zeros(n + 1, dtype=np.int64)
    used = np.zeros(n + 1, dtype=np.int64)
    depth = 0
    while depth >= 0:
        if depth == n:
            if cost[n] < best:
                best = cost[n]
                best_labels[:] = labels
            depth -= 1
            continue
        node = order[depth]
        c = choice[depth] + 1
        limit = min(used[depth] + 1, kmax)
        advanced = False
        while c < limit:
            added = 0
            for p in range(adj_ptr[node], adj_ptr[node + 1]):
                j = adj_idx[p]
                lj = labels[j]
                if lj < 0:
                    continue
                if adj_sign[p] > 0:
                    if lj != c:
                        added += 1
                elif lj == c:
                    added += 1
            if cost[depth] + added < best:
                choice[depth] = c
                labels[node] = c
                cost[depth + 1] = cost[depth] + added
                used[depth + 1] = max(used[depth], c + 1)
                advanced = True
                break
            c += 1
        if advanced:
            depth += 1
            if depth < n:
                choice[depth] = -1
        else:
            labels[node] = -1
            choice[depth] = -1
            depth -= 1
            if depth >= 0:
                labels[order[depth]] = -1
    return best, best_labels
