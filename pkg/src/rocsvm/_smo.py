"""Dual coordinate-ascent core for the weighted hinge-loss SVM.

Maximises  D(mu) = sum(mu) - 0.5 mu' Q mu,  Q[i,j] = y_i y_j K[i,j],
subject to  0 <= mu_i <= caps_i  and  sum(y_i mu_i) = 0, by repeatedly
solving a two-variable subproblem.

G maintains the gradient of the equivalent minimisation problem,
G_t = y_t * f0(x_t) - 1 with f0 the bias-free decision value, so the
optimality score of sample t is v_t = -y_t G_t.  The first index is the
most violating one in I_up; the second maximises the guaranteed objective
decrease (v_i - v_t)^2 / (K_ii + K_tt - 2 K_it) over violating t in I_low.
First-order pair selection stalls on dense gaussian Gram matrices (near-
duplicate rows make the pair curvature vanish), so the second-order rule
is load-bearing, not an optimisation.  Convergence is declared when
max_{I_up} v - min_{I_low} v <= tol.

Two implementations: an @njit kernel and a numpy fallback.  They execute
identical floating-point operations; tests assert bit-equal results.
"""

from __future__ import annotations

import numpy as np

from ._accel import HAS_NUMBA, njit

_TAU = 1e-12

# status codes returned by the cores
CONVERGED = 0
MAX_UPDATES = 1


def _pair_step(mu_i, mu_j, cap_i, cap_j, same_sign, g_i, g_j, quad):
    """Closed-form clipped solution of the two-variable subproblem."""
    if quad <= 0.0:
        quad = _TAU
    if same_sign:
        delta = (g_i - g_j) / quad
        total = mu_i + mu_j
        mu_i -= delta
        mu_j += delta
        if total > cap_i:
            if mu_i > cap_i:
                mu_i = cap_i
                mu_j = total - cap_i
        else:
            if mu_j < 0.0:
                mu_j = 0.0
                mu_i = total
        if total > cap_j:
            if mu_j > cap_j:
                mu_j = cap_j
                mu_i = total - cap_j
        else:
            if mu_i < 0.0:
                mu_i = 0.0
                mu_j = total
    else:
        delta = (-g_i - g_j) / quad
        diff = mu_i - mu_j
        mu_i += delta
        mu_j += delta
        if diff > 0.0:
            if mu_j < 0.0:
                mu_j = 0.0
                mu_i = diff
        else:
            if mu_i < 0.0:
                mu_i = 0.0
                mu_j = -diff
        if diff > cap_i - cap_j:
            if mu_i > cap_i:
                mu_i = cap_i
                mu_j = cap_i - diff
        else:
            if mu_j > cap_j:
                mu_j = cap_j
                mu_i = cap_j + diff
    return mu_i, mu_j


def initial_gradient(K, y, mu):
    """G_t = y_t * sum_j y_j mu_j K[t, j] - 1 for a warm-start mu."""
    if np.any(mu != 0.0):
        f0 = K @ (y * mu)
        return y * f0 - 1.0
    return np.full(K.shape[0], -1.0)


def smo_numpy(K, y, caps, tol, max_updates, mu, record_passes=False):
    """Pure-numpy fallback. Returns (mu, G, updates, residual, status, trace)."""
    n = K.shape[0]
    G = initial_gradient(K, y, mu)
    pos = y > 0.0
    neg = ~pos
    trace = [] if record_passes else None
    updates = 0
    residual = 0.0
    status = MAX_UPDATES
    diag = np.ascontiguousarray(np.diag(K))
    while True:
        v = -(y * G)
        up = (pos & (mu < caps)) | (neg & (mu > 0.0))
        low = (neg & (mu < caps)) | (pos & (mu > 0.0))
        if not up.any() or not low.any():
            residual = 0.0
            status = CONVERGED
            break
        i = int(np.argmax(np.where(up, v, -np.inf)))
        residual = v[i] - float(np.min(np.where(low, v, np.inf)))
        if residual <= tol:
            status = CONVERGED
            break
        if updates >= max_updates:
            break
        gap = v[i] - v
        quads = np.maximum(diag[i] + diag - 2.0 * K[i], _TAU)
        decrease = np.where(low & (gap > 0.0), (gap * gap) / quads, -np.inf)
        j = int(np.argmax(decrease))
        quad = K[i, i] + K[j, j] - 2.0 * K[i, j]
        old_i = mu[i]
        old_j = mu[j]
        mu[i], mu[j] = _pair_step(old_i, old_j, caps[i], caps[j], y[i] == y[j], G[i], G[j], quad)
        a = y[i] * (mu[i] - old_i)
        b = y[j] * (mu[j] - old_j)
        G += y * (a * K[i] + b * K[j])
        updates += 1
        if record_passes and updates % n == 0:
            trace.append(dual_objective_from_gradient(mu, G))
    return mu, G, updates, residual, status, trace


def dual_objective_from_gradient(mu, G):
    """D(mu) = 0.5 * (sum(mu) - sum(mu * G)), using the maintained gradient."""
    return 0.5 * (float(np.sum(mu)) - float(mu @ G))


@njit(cache=True, nogil=True)
def _smo_jit(K, y, caps, tol, max_updates, mu):  # pragma: no cover - compiled
    n = K.shape[0]
    G = np.empty(n)
    warm = False
    for t in range(n):
        if mu[t] != 0.0:
            warm = True
            break
    if warm:
        for t in range(n):
            acc = 0.0
            for s in range(n):
                acc += y[s] * mu[s] * K[t, s]
            G[t] = y[t] * acc - 1.0
    else:
        for t in range(n):
            G[t] = -1.0
    updates = 0
    residual = 0.0
    status = MAX_UPDATES
    while True:
        m_val = -np.inf
        M_val = np.inf
        i = -1
        any_low = False
        for t in range(n):
            v = -(y[t] * G[t])
            if (y[t] > 0.0 and mu[t] < caps[t]) or (y[t] <= 0.0 and mu[t] > 0.0):
                if v > m_val:
                    m_val = v
                    i = t
            if (y[t] <= 0.0 and mu[t] < caps[t]) or (y[t] > 0.0 and mu[t] > 0.0):
                any_low = True
                if v < M_val:
                    M_val = v
        if i < 0 or not any_low:
            residual = 0.0
            status = CONVERGED
            break
        residual = m_val - M_val
        if residual <= tol:
            status = CONVERGED
            break
        if updates >= max_updates:
            break
        # second index: best guaranteed decrease among violating samples
        j = -1
        best_dec = -np.inf
        for t in range(n):
            if (y[t] <= 0.0 and mu[t] < caps[t]) or (y[t] > 0.0 and mu[t] > 0.0):
                gap = m_val - (-(y[t] * G[t]))
                if gap > 0.0:
                    quad_t = K[i, i] + K[t, t] - 2.0 * K[i, t]
                    if quad_t < _TAU:
                        quad_t = _TAU
                    dec = (gap * gap) / quad_t
                    if dec > best_dec:
                        best_dec = dec
                        j = t
        quad = K[i, i] + K[j, j] - 2.0 * K[i, j]
        if quad <= 0.0:
            quad = _TAU
        old_i = mu[i]
        old_j = mu[j]
        mu_i = old_i
        mu_j = old_j
        cap_i = caps[i]
        cap_j = caps[j]
        if y[i] == y[j]:
            delta = (G[i] - G[j]) / quad
            total = mu_i + mu_j
            mu_i -= delta
            mu_j += delta
            if total > cap_i:
                if mu_i > cap_i:
                    mu_i = cap_i
                    mu_j = total - cap_i
            else:
                if mu_j < 0.0:
                    mu_j = 0.0
                    mu_i = total
            if total > cap_j:
                if mu_j > cap_j:
                    mu_j = cap_j
                    mu_i = total - cap_j
            else:
                if mu_i < 0.0:
                    mu_i = 0.0
                    mu_j = total
        else:
            delta = (-G[i] - G[j]) / quad
            diff = mu_i - mu_j
            mu_i += delta
            mu_j += delta
            if diff > 0.0:
                if mu_j < 0.0:
                    mu_j = 0.0
                    mu_i = diff
            else:
                if mu_i < 0.0:
                    mu_i = 0.0
                    mu_j = -diff
            if diff > cap_i - cap_j:
                if mu_i > cap_i:
                    mu_i = cap_i
                    mu_j = cap_i - diff
            else:
                if mu_j > cap_j:
                    mu_j = cap_j
                    mu_i = cap_j + diff
        mu[i] = mu_i
        mu[j] = mu_j
        a = y[i] * (mu_i - old_i)
        b = y[j] * (mu_j - old_j)
        for t in range(n):
            G[t] += y[t] * (a * K[i, t] + b * K[j, t])
        updates += 1
    return mu, G, updates, residual, status


def smo_numba(K, y, caps, tol, max_updates, mu):
    """Numba-compiled path with the numpy fallback's return convention."""
    if not HAS_NUMBA:
        raise RuntimeError("numba backend requested but numba is not installed")
    mu, G, updates, residual, status = _smo_jit(K, y, caps, tol, int(max_updates), mu)
    return mu, G, updates, residual, status, None


def solve(K, y, caps, tol, max_updates, mu, backend, record_passes=False):
    if backend == "numpy":
        return smo_numpy(K, y, caps, tol, max_updates, mu, record_passes)
    return smo_numba(K, y, caps, tol, max_updates, mu)
