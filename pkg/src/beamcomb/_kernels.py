"""Hot numeric kernels.

Everything here is written against the numpy subset that numba compiles in
nopython mode. ``beamcomb._accel.kernel`` decides at import time whether the
functions are jitted or left as plain numpy (``BEAMCOMB_DISABLE_JIT=1``).
Public wrappers with validation live in the sibling modules.
"""
import heapq

import numpy as np

from ._accel import kernel

# Status codes shared with the Python wrappers.
SECULAR_OK = 0
SECULAR_NO_ROOT = 1

CASE_SECULAR = 0
CASE_ZERO = 1
CASE_DOMINANT = 2


@kernel
def jacobi_hermitian(a, tol, max_sweeps):
    """Cyclic complex Jacobi. Returns (unsorted eigenvalues, eigenvectors, sweeps)."""
    n = a.shape[0]
    a = a.copy()
    v = np.zeros((n, n), dtype=np.complex128)
    for i in range(n):
        v[i, i] = 1.0
    norm = np.sqrt(np.sum(np.abs(a) ** 2))
    if norm == 0.0:
        return np.zeros(n), v, 0
    thresh = tol * norm
    skip = 1e-18 * norm
    sweeps = 0
    for sweep in range(max_sweeps + 1):
        off = 0.0
        for i in range(n):
            for j in range(i + 1, n):
                off += a[i, j].real ** 2 + a[i, j].imag ** 2
        if np.sqrt(2.0 * off) <= thresh or sweep == max_sweeps:
            break
        sweeps += 1
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                mag = np.abs(apq)
                if mag <= skip:
                    continue
                ph = np.conj(apq) / mag
                app = a[p, p].real
                aqq = a[q, q].real
                theta = (aqq - app) / (2.0 * mag)
                if np.abs(theta) > 1e150:
                    t = 0.5 / theta
                else:
                    t = 1.0 / (np.abs(theta) + np.sqrt(theta * theta + 1.0))
                    if theta < 0.0:
                        t = -t
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c
                # G = diag(1, e^{-i phi}) @ [[c, s], [-s, c]]
                g00 = c + 0j
                g01 = s + 0j
                g10 = -s * ph
                g11 = c * ph
                for k in range(n):
                    akp = a[k, p]
                    akq = a[k, q]
                    a[k, p] = akp * g00 + akq * g10
                    a[k, q] = akp * g01 + akq * g11
                for k in range(n):
                    apk = a[p, k]
                    aqk = a[q, k]
                    a[p, k] = np.conj(g00) * apk + np.conj(g10) * aqk
                    a[q, k] = np.conj(g01) * apk + np.conj(g11) * aqk
                a[p, q] = 0.0
                a[q, p] = 0.0
                a[p, p] = app - t * mag
                a[q, q] = aqq + t * mag
                for k in range(n):
                    vkp = v[k, p]
                    vkq = v[k, q]
                    v[k, p] = vkp * g00 + vkq * g10
                    v[k, q] = vkp * g01 + vkq * g11
    w = np.empty(n)
    for i in range(n):
        w[i] = a[i, i].real
    return w, v, sweeps


@kernel
def secular_value(mu, lam1, gaps, weights, d, r):
    """f at lambda = lam1 + mu, with gaps[i] = lam1 - lambda_i >= 0."""
    acc = 0.0
    for i in range(gaps.shape[0]):
        acc += weights[i] / (mu + gaps[i])
    return (lam1 + mu) * d - r - acc


@kernel
def secular_root(lam1, gaps, weights, d, r, mu_lo, mu_hi):
    """Root of the secular function in shifted coordinates mu = lambda - lam1.

    Bisection down to a relative width of 1e-8, then at most ten bracketed
    Newton steps. Returns (mu, status).
    """
    f_lo = secular_value(mu_lo, lam1, gaps, weights, d, r)
    if f_lo > 0.0:
        return mu_lo, SECULAR_NO_ROOT
    if f_lo == 0.0:
        return mu_lo, SECULAR_OK
    f_hi = secular_value(mu_hi, lam1, gaps, weights, d, r)
    # the analytic upper bound can sit a few ulps below the root
    grow = 0
    while f_hi < 0.0 and grow < 8:
        mu_hi = mu_hi * (1.0 + 1e-12) + 1e-300 + 4e-16 * np.abs(lam1 + mu_hi)
        f_hi = secular_value(mu_hi, lam1, gaps, weights, d, r)
        grow += 1
    if f_hi < 0.0:
        return mu_hi, SECULAR_NO_ROOT
    if f_hi == 0.0:
        return mu_hi, SECULAR_OK
    lo = mu_lo
    hi = mu_hi
    for _ in range(400):
        if hi - lo <= 1e-8 * (1.0 + np.abs(lam1 + hi)):
            break
        mid = 0.5 * (lo + hi)
        fm = secular_value(mid, lam1, gaps, weights, d, r)
        if fm == 0.0:
            return mid, SECULAR_OK
        if fm < 0.0:
            lo = mid
        else:
            hi = mid
    mu = 0.5 * (lo + hi)
    best = mu
    best_f = np.abs(secular_value(mu, lam1, gaps, weights, d, r))
    for _ in range(10):
        fm = secular_value(mu, lam1, gaps, weights, d, r)
        if fm == 0.0:
            return mu, SECULAR_OK
        if fm < 0.0:
            lo = mu
        else:
            hi = mu
        deriv = d
        for i in range(gaps.shape[0]):
            deriv += weights[i] / (mu + gaps[i]) ** 2
        step = mu - fm / deriv
        if step <= lo or step >= hi:
            step = 0.5 * (lo + hi)
        if step == mu:
            break
        mu = step
        fa = np.abs(secular_value(mu, lam1, gaps, weights, d, r))
        if fa < best_f:
            best_f = fa
            best = mu
    return best, SECULAR_OK


@kernel
def subproblem_core(lam, vecs, p, r, d, tol_q, cluster_tol):
    """Closed-form optimum of max_w eta([d_I; w]) given the eigenpairs of R_J.

    ``lam`` is non-increasing, ``vecs`` holds the matching eigenvectors as
    columns. Returns (lambda_star, case, w_J, root_status).
    """
    n = lam.shape[0]
    q = np.zeros(n, dtype=np.complex128)
    for i in range(n):
        acc = 0j
        for k in range(n):
            acc += np.conj(vecs[k, i]) * p[k]
        q[i] = acc
    weights = q.real ** 2 + q.imag ** 2
    lam1 = lam[0]
    ctol = cluster_tol * (1.0 + np.abs(lam1))
    m = 1
    while m < n and lam[m] >= lam1 - ctol:
        m += 1
    gaps = np.empty(n)
    for i in range(n):
        gaps[i] = 0.0 if i < m else lam1 - lam[i]
    w_top = np.sum(weights[:m])
    pp = np.sum(weights)

    degenerate = False
    status = SECULAR_OK
    if w_top <= tol_q * pp:
        c1 = lam1 * d - r
        for i in range(m, n):
            c1 -= weights[i] / gaps[i]
        if c1 > 0.0:
            degenerate = True
    mu = 0.0
    if not degenerate:
        mu_lo = 1e-12 * np.abs(lam1) + 1e-300
        disc = (d * lam1 - r) ** 2 + 4.0 * d * pp
        upper = (d * lam1 + r + np.sqrt(disc)) / (2.0 * d)
        mu_hi = max(upper - lam1, mu_lo)
        mu, status = secular_root(lam1, gaps, weights, d, r, mu_lo, mu_hi)
        if status != SECULAR_OK:
            degenerate = True

    w = np.zeros(n, dtype=np.complex128)
    if degenerate:
        if lam1 > r / d:
            for k in range(n):
                w[k] = vecs[k, 0]
            return lam1, CASE_DOMINANT, w, status
        return r / d, CASE_ZERO, w, status
    coeff = q / (mu + gaps)
    for k in range(n):
        acc = 0j
        for i in range(n):
            acc += vecs[k, i] * coeff[i]
        w[k] = acc
    return lam1 + mu, CASE_SECULAR, w, status


@kernel
def round_indices(w, n_alpha):
    """Nearest alphabet index for every entry of ``w``; zeros map to 0."""
    out = np.zeros(w.shape[0], dtype=np.int64)
    step = 2.0 * np.pi / n_alpha
    for i in range(w.shape[0]):
        if w[i].real == 0.0 and w[i].imag == 0.0:
            continue
        a = np.arctan2(w[i].imag, w[i].real) / step
        a = a % n_alpha
        k = int(np.ceil(a - 0.5))
        out[i] = k % n_alpha
    return out


@kernel
def rayleigh_indices(R, idx, alphabet):
    """x^H R x / x^H x for x = alphabet[idx]."""
    n = idx.shape[0]
    num = 0.0
    den = 0.0
    for i in range(n):
        xi = alphabet[idx[i]]
        acc = 0j
        for j in range(n):
            acc += R[i, j] * alphabet[idx[j]]
        num += (np.conj(xi) * acc).real
        den += xi.real ** 2 + xi.imag ** 2
    return num / den


@kernel
def evaluate_prefix(R, idx, l, alphabet, lam, vecs, tol_q, cluster_tol):
    """Relaxation bound for the node whose first ``l`` indices are fixed.

    Also rounds the relaxed optimiser to the alphabet and scores it. Returns
    (bound, case, rounded candidate indices, candidate value).
    """
    L = R.shape[0]
    cand = idx.copy()
    if l == L:
        val = rayleigh_indices(R, cand, alphabet)
        return val, CASE_SECULAR, cand, val
    p = np.empty(L - l, dtype=np.complex128)
    for k in range(l, L):
        acc = 0j
        for j in range(l):
            acc += R[k, j] * alphabet[idx[j]]
        p[k - l] = acc
    r = 0.0
    d = 0.0
    for i in range(l):
        xi = alphabet[idx[i]]
        acc = 0j
        for j in range(l):
            acc += R[i, j] * alphabet[idx[j]]
        r += (np.conj(xi) * acc).real
        d += xi.real ** 2 + xi.imag ** 2
    bound, case, w, _ = subproblem_core(lam, vecs, p, r, d, tol_q, cluster_tol)
    cand[l:] = round_indices(w, alphabet.shape[0])
    val = rayleigh_indices(R, cand, alphabet)
    return bound, case, cand, val


@kernel
def expand_children(R, idx, l, alphabet, lam, vecs, tol_q, cluster_tol):
    """Evaluate the children of a node with ``l`` fixed entries.

    ``lam``/``vecs`` must be the eigenpairs of the trailing block R[l+1:, l+1:].
    """
    n_alpha = alphabet.shape[0]
    L = R.shape[0]
    bounds = np.empty(n_alpha)
    values = np.empty(n_alpha)
    cands = np.empty((n_alpha, L), dtype=np.int64)
    child = idx.copy()
    for i in range(n_alpha):
        child[l] = i
        b, _, c, v = evaluate_prefix(R, child, l + 1, alphabet, lam, vecs, tol_q, cluster_tol)
        bounds[i] = b
        values[i] = v
        cands[i, :] = c
    return bounds, values, cands


@kernel
def exhaustive_search(R, alphabet):
    """Best x in alphabet^L with x[0] = alphabet[0], lexicographic first on ties."""
    L = R.shape[0]
    n_alpha = alphabet.shape[0]
    idx = np.zeros(L, dtype=np.int64)
    best_idx = idx.copy()
    best = -np.inf
    total = n_alpha ** (L - 1)
    for k in range(total):
        rem = k
        for pos in range(L - 1, 0, -1):
            idx[pos] = rem % n_alpha
            rem //= n_alpha
        val = rayleigh_indices(R, idx, alphabet)
        if val > best:
            best = val
            best_idx[:] = idx
    return best_idx, best


EXIT_EXHAUSTED = 0
EXIT_EPSILON = 1
EXIT_BUDGET = 2


@kernel
def bb_search(R, alphabet, lam_all, vecs_all, sizes, init_idx, init_val, epsilon, budget,
              tol_q, cluster_tol):
    """Best-first branch-and-bound for one column, first index fixed to 0.

    ``lam_all[l, :sizes[l]]`` / ``vecs_all[l, :sizes[l], :sizes[l]]`` hold the
    eigenpairs of R[l:, l:]. Heap ties are broken by insertion order.
    Returns (best_idx, best, expanded, pruned, exit_code, frontier_max, trajectory).
    """
    L = R.shape[0]
    n_alpha = alphabet.shape[0]
    best_idx = init_idx.copy()
    best = init_val
    traj = [best]
    expanded = 0
    pruned = 0
    exit_code = EXIT_EXHAUSTED
    frontier = -np.inf

    cap = 1024
    pool = np.zeros((cap, L), dtype=np.int64)
    level = np.zeros(cap, dtype=np.int64)
    free = [np.int64(x) for x in range(cap - 1, 0, -1)]
    n1 = sizes[1]
    bound, _, cand, val = evaluate_prefix(R, pool[0], 1, alphabet, lam_all[1, :n1],
                                          vecs_all[1, :n1, :n1], tol_q, cluster_tol)
    if val > best:
        best = val
        best_idx[:] = cand
        traj.append(best)
    level[0] = 1
    heap = [(-bound, np.int64(0), np.int64(0))]
    counter = 1

    while len(heap) > 0:
        b = -heap[0][0]
        if b <= best:
            pruned += len(heap)
            break
        if b - best < epsilon * best:
            exit_code = EXIT_EPSILON
            frontier = b
            break
        if expanded >= budget:
            exit_code = EXIT_BUDGET
            frontier = b
            break
        item = heapq.heappop(heap)
        slot = item[2]
        l = level[slot]
        prefix = pool[slot].copy()
        free.append(slot)
        expanded += 1
        n = sizes[l + 1]
        bounds, values, cands = expand_children(R, prefix, l, alphabet, lam_all[l + 1, :n],
                                                vecs_all[l + 1, :n, :n], tol_q, cluster_tol)
        for i in range(n_alpha):
            if l + 1 == L:
                if bounds[i] > best:
                    best = bounds[i]
                    best_idx[:] = prefix
                    best_idx[l] = i
                    traj.append(best)
                continue
            if bounds[i] > best:
                if len(free) == 0:
                    new_pool = np.zeros((2 * cap, L), dtype=np.int64)
                    new_pool[:cap] = pool
                    new_level = np.zeros(2 * cap, dtype=np.int64)
                    new_level[:cap] = level
                    for x in range(2 * cap - 1, cap - 1, -1):
                        free.append(np.int64(x))
                    pool = new_pool
                    level = new_level
                    cap *= 2
                s = free.pop()
                pool[s, :] = prefix
                pool[s, l] = i
                level[s] = l + 1
                heapq.heappush(heap, (-bounds[i], np.int64(counter), s))
                counter += 1
                if values[i] > best:
                    best = values[i]
                    best_idx[:] = cands[i]
                    traj.append(best)
            else:
                pruned += 1
    return best_idx, best, expanded, pruned, exit_code, frontier, np.array(traj)
