"""Compiled inner loops: cyclic Jacobi eigensolver and trajectory kernels.

The trajectory kernels consume pre-drawn uniform blocks (see seeds module
for the stream discipline) so a pure-Python mirror can replay them draw
for draw. All kernels are nogil so replicate pools get real parallelism.
"""
from __future__ import annotations

import numpy as np
from numba import njit

JACOBI_OFF_TOL = 1e-12
JACOBI_MAX_SWEEPS = 60


@njit(cache=True, nogil=True)
def jacobi_eigenvalues(a):
    """Eigenvalues of a symmetric matrix by cyclic Jacobi rotations.

    Mutates `a`; caller passes a copy. Sweeps until the off-diagonal
    Frobenius norm drops below JACOBI_OFF_TOL. Returns ascending values.
    """
    n = a.shape[0]
    for _ in range(JACOBI_MAX_SWEEPS):
        off2 = 0.0
        for i in range(n):
            for j in range(i + 1, n):
                off2 += a[i, j] * a[i, j]
        if 2.0 * off2 < JACOBI_OFF_TOL * JACOBI_OFF_TOL:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if apq == 0.0:
                    continue
                # classic two-sided rotation zeroing a[p,q]
                tau = (a[q, q] - a[p, p]) / (2.0 * apq)
                if tau >= 0.0:
                    t = 1.0 / (tau + np.sqrt(1.0 + tau * tau))
                else:
                    t = -1.0 / (-tau + np.sqrt(1.0 + tau * tau))
                c = 1.0 / np.sqrt(1.0 + t * t)
                s = t * c
                for k in range(n):
                    akp = a[k, p]
                    akq = a[k, q]
                    a[k, p] = c * akp - s * akq
                    a[k, q] = s * akp + c * akq
                for k in range(n):
                    apk = a[p, k]
                    aqk = a[q, k]
                    a[p, k] = c * apk - s * aqk
                    a[q, k] = s * apk + c * aqk
    d = np.empty(n)
    for i in range(n):
        d[i] = a[i, i]
    return np.sort(d)


@njit(cache=True, nogil=True, inline="always")
def _fermi(x):
    # overflow-safe logistic, monotone, never NaN
    if x >= 0.0:
        return 1.0 / (1.0 + np.exp(-x))
    e = np.exp(x)
    return e / (1.0 + e)


@njit(cache=True, nogil=True)
def bonabeau_chunk(eu, ev, h, eta, big_f, mu, t0, u_edge, u_coin, u_win,
                   window_start, stride, sig_out, mean_out, t_out, n_samples,
                   check_conservation):
    """Advance a fully-occupied trajectory by one block of steps.

    h is updated in place. Samples sigma/mean at post-step indices s with
    s % stride == 0 and s > window_start. Returns (new sample count,
    max per-step conservation residual seen in this block).
    """
    m = eu.shape[0]
    n = h.shape[0]
    c = 1.0 - mu
    max_resid = 0.0
    k = n_samples
    for idx in range(u_edge.shape[0]):
        e = int(u_edge[idx] * m)
        if e == m:
            e = m - 1  # u*m can round up to m at the top of the unit interval
        i = eu[e]
        j = ev[e]
        if u_coin[idx] < 0.5:
            i, j = j, i
        q = _fermi(eta * (h[i] - h[j]))
        s_before = 0.0
        if check_conservation:
            for a in range(n):
                s_before += h[a]
        if u_win[idx] < q:
            h[i] += 1.0
            h[j] -= big_f
        else:
            h[j] += 1.0
            h[i] -= big_f
        for a in range(n):
            h[a] *= c
        if check_conservation:
            s_after = 0.0
            for a in range(n):
                s_after += h[a]
            r = abs(s_after - c * (s_before + 1.0 - big_f))
            if r > max_resid:
                max_resid = r
        s = t0 + idx + 1
        if s > window_start and s % stride == 0:
            mean = 0.0
            for a in range(n):
                mean += h[a]
            mean /= n
            var = 0.0
            for a in range(n):
                d = h[a] - mean
                var += d * d
            sig_out[k] = np.sqrt(var / n)
            mean_out[k] = mean
            t_out[k] = s
            k += 1
    return k, max_resid


@njit(cache=True, nogil=True)
def _no_fightable_edge(eu, ev, h, ell):
    for e in range(eu.shape[0]):
        if h[eu[e]] > -ell and h[ev[e]] > -ell:
            return False
    return True


@njit(cache=True, nogil=True)
def competing_chunk(eu, ev, h, ell, eta_starts, eta_vals, fightable_only,
                    t0, u_edge, u_coin, u_win,
                    z0, fights0, z_out, zt_out):
    """Advance a competing-model trajectory by at most one block of steps.

    h is int64 and updated in place. Stops early when the non-absorbed
    agents form an independent set. Returns
    (steps_done, fights_done, z, terminal, invariants_ok, n_z)
    where z_out/zt_out receive the Z value and post-fight step index of
    every fight in the block. invariants_ok covers exact conservation
    (sum h == 0) and the h >= -ell floor after every fight.
    """
    m = eu.shape[0]
    n = h.shape[0]
    z = z0
    fights = fights0
    seg = 0
    while seg + 1 < eta_starts.shape[0] and eta_starts[seg + 1] <= t0:
        seg += 1
    nz = 0
    ok = True
    # fightable-edge index list, maintained only in restricted mode
    fidx = np.empty(m, np.int64)
    nf = 0
    if fightable_only:
        for e in range(m):
            if h[eu[e]] > -ell and h[ev[e]] > -ell:
                fidx[nf] = e
                nf += 1
        if nf == 0:
            return 0, fights, z, True, ok, nz
    for idx in range(u_edge.shape[0]):
        t = t0 + idx
        while seg + 1 < eta_starts.shape[0] and eta_starts[seg + 1] <= t:
            seg += 1
        if fightable_only:
            pick = int(u_edge[idx] * nf)
            if pick == nf:
                pick = nf - 1
            e = fidx[pick]
        else:
            e = int(u_edge[idx] * m)
            if e == m:
                e = m - 1
        i = eu[e]
        j = ev[e]
        if h[i] > -ell and h[j] > -ell:
            if u_coin[idx] < 0.5:
                i, j = j, i
            q = _fermi(eta_vals[seg] * (h[i] - h[j]))
            if u_win[idx] < q:
                w, l = i, j
            else:
                w, l = j, i
            # per-fight Z increment, exact in int64: 4n(h_w - h_l + 1)
            z += 4 * n * (h[w] - h[l] + 1)
            h[w] += 1
            h[l] -= 1
            fights += 1
            z_out[nz] = z
            zt_out[nz] = t + 1
            nz += 1
            if h[l] < -ell:
                ok = False
            if h[l] == -ell:
                s = 0
                for a in range(n):
                    s += h[a]
                if s != 0:
                    ok = False
                if fightable_only:
                    nf = 0
                    for ee in range(m):
                        if h[eu[ee]] > -ell and h[ev[ee]] > -ell:
                            fidx[nf] = ee
                            nf += 1
                    if nf == 0:
                        return idx + 1, fights, z, True, ok, nz
                elif _no_fightable_edge(eu, ev, h, ell):
                    return idx + 1, fights, z, True, ok, nz
    return u_edge.shape[0], fights, z, False, ok, nz
