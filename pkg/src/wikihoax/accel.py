"""Hot numeric kernels: numba-compiled with a pure-numpy reference path.

The fallback implementations are the reference semantics; the jitted
twins are the same functions compiled, so both paths walk the identical
sequence of operations. Selection happens once at import:

* default: compile with numba when it is importable
* ``WIKIHOAX_NO_NUMBA=1`` (or any value other than ``0``/empty): force
  the fallback path
* numba missing: fall back silently

``USING_NUMBA`` reports which path is bound to the public names
(``kde_gaussian``, ``bocpd_modes``, ``svm_epochs``).
``benchmarks/bench_kernels.py`` times the two paths against each other.
"""

import math
import os

import numpy as np

_env = os.environ.get("WIKIHOAX_NO_NUMBA", "").strip()
_want_numba = _env in ("", "0")

if _want_numba:
    try:
        from numba import njit

        HAVE_NUMBA = True
    except ImportError:  # pragma: no cover - environment without numba
        HAVE_NUMBA = False
else:
    HAVE_NUMBA = False


# ---------------------------------------------------------------------------
# Gaussian KDE over a fixed grid
# ---------------------------------------------------------------------------

def kde_gaussian_numpy(events: np.ndarray, grid: np.ndarray, bandwidth: float) -> np.ndarray:
    """Sum-of-Gaussians density of `events` evaluated at `grid` points.

    One vectorized pass per grid point keeps memory at O(n) instead of
    materializing the full (grid x events) matrix.
    """
    n = events.shape[0]
    norm = 1.0 / (n * bandwidth * math.sqrt(2.0 * math.pi))
    out = np.empty(grid.shape[0], dtype=np.float64)
    for j in range(grid.shape[0]):
        z = (grid[j] - events) / bandwidth
        out[j] = norm * float(np.exp(-0.5 * z * z).sum())
    return out


def _kde_gaussian_loop(events, grid, bandwidth):
    n = events.shape[0]
    norm = 1.0 / (n * bandwidth * math.sqrt(2.0 * math.pi))
    out = np.empty(grid.shape[0], dtype=np.float64)
    for j in range(grid.shape[0]):
        acc = 0.0
        for i in range(n):
            z = (grid[j] - events[i]) / bandwidth
            acc += math.exp(-0.5 * z * z)
        out[j] = norm * acc
    return out


# ---------------------------------------------------------------------------
# Run-length recursion over monthly counts (constant hazard, Gamma-Poisson)
# ---------------------------------------------------------------------------

def bocpd_modes_impl(counts, hazard, alpha0, beta0):
    """Posterior-modal run length after each observation.

    Run length counts months elapsed since the current segment began: a
    segment observed for the first time has run length 0. Returns an
    int64 array of length T+1; entry 0 is the base case (the prior puts
    all mass on run length 0), entry t is the argmax of the run-length
    posterior after t monthly counts. The observation model is the
    Gamma-Poisson conjugate pair: a run that has absorbed r counts
    predicts the next count as negative binomial with shape
    alpha0 + sum(those counts) and rate beta0 + r; internally states
    are indexed by that absorbed count, one ahead of the exported run
    length. Everything stays in log space; the posterior is
    renormalized each step.
    """
    T = counts.shape[0]
    log_h = math.log(hazard)
    log_1mh = math.log1p(-hazard)
    modes = np.zeros(T + 1, dtype=np.int64)
    log_joint = np.empty(T + 1)
    sums = np.empty(T + 1)
    cp_buf = np.empty(T + 1)
    new_joint = np.empty(T + 1)
    log_joint[0] = 0.0
    sums[0] = 0.0
    m = 1
    for t in range(T):
        x = float(counts[t])
        lgx = math.lgamma(x + 1.0)
        cp_max = -np.inf
        for r in range(m):
            alpha = alpha0 + sums[r]
            beta = beta0 + r
            logpred = (
                math.lgamma(x + alpha)
                - math.lgamma(alpha)
                - lgx
                + alpha * math.log(beta / (beta + 1.0))
                - x * math.log(beta + 1.0)
            )
            v = log_joint[r] + logpred
            new_joint[r + 1] = v + log_1mh
            cp_buf[r] = v + log_h
            if cp_buf[r] > cp_max:
                cp_max = cp_buf[r]
        acc = 0.0
        for r in range(m):
            acc += math.exp(cp_buf[r] - cp_max)
        new_joint[0] = cp_max + math.log(acc)
        top = -np.inf
        for r in range(m + 1):
            if new_joint[r] > top:
                top = new_joint[r]
        z = 0.0
        for r in range(m + 1):
            z += math.exp(new_joint[r] - top)
        lz = top + math.log(z)
        best = 0
        best_v = -np.inf
        for r in range(m + 1):
            new_joint[r] -= lz
            if new_joint[r] > best_v:
                best_v = new_joint[r]
                best = r
        # run lengths grow by one; a fresh run restarts the count sum
        for r in range(m, 0, -1):
            sums[r] = sums[r - 1] + x
        sums[0] = 0.0
        for r in range(m + 1):
            log_joint[r] = new_joint[r]
        m += 1
        # state index = absorbed observations; exported run length is
        # months elapsed since the segment's first observation
        modes[t + 1] = best - 1 if best > 0 else 0
    return modes


bocpd_modes_numpy = bocpd_modes_impl


# ---------------------------------------------------------------------------
# Pegasos-style subgradient epochs over a CSR matrix
# ---------------------------------------------------------------------------

def svm_epochs_numpy(indptr, indices, data, y, cw, order, lam, n_features):
    """Epoch-based subgradient descent on the L2-regularized hinge loss.

    `order` is an (epochs, n) array of precomputed shuffles so the numba
    and fallback paths consume the identical sample sequence. Returns
    the averaged iterate (weights, bias) and the objective of the
    averaged iterate at the end of each epoch. The bias is treated as a
    constant-1 feature: it decays with the weights and counts in the
    regularization term, otherwise the early 1/(lam*t) steps leave it
    with a drift the averaging never washes out.
    """
    epochs, n = order.shape
    w = np.zeros(n_features)
    b = 0.0
    w_sum = np.zeros(n_features)
    b_sum = 0.0
    objs = np.empty(epochs)
    t = 0
    for e in range(epochs):
        for j in range(n):
            t += 1
            i = order[e, j]
            lo, hi = indptr[i], indptr[i + 1]
            cols = indices[lo:hi]
            vals = data[lo:hi]
            score = b + float(w[cols] @ vals)
            eta = 1.0 / (lam * t)
            w *= 1.0 - eta * lam
            b *= 1.0 - eta * lam
            if y[i] * score < 1.0:
                w[cols] += (eta * cw[i] * y[i]) * vals
                b += eta * cw[i] * y[i]
            w_sum += w
            b_sum += b
        w_avg = w_sum / t
        b_avg = b_sum / t
        total = 0.0
        for i in range(n):
            lo, hi = indptr[i], indptr[i + 1]
            score = b_avg + float(w_avg[indices[lo:hi]] @ data[lo:hi])
            total += cw[i] * max(0.0, 1.0 - y[i] * score)
        objs[e] = 0.5 * lam * (float(w_avg @ w_avg) + b_avg * b_avg) + total / n
    return w_sum / t, b_sum / t, objs


def _svm_epochs_loop(indptr, indices, data, y, cw, order, lam, n_features):
    epochs, n = order.shape
    w = np.zeros(n_features)
    b = 0.0
    w_sum = np.zeros(n_features)
    b_sum = 0.0
    objs = np.empty(epochs)
    t = 0
    for e in range(epochs):
        for j in range(n):
            t += 1
            i = order[e, j]
            lo, hi = indptr[i], indptr[i + 1]
            score = b
            for p in range(lo, hi):
                score += w[indices[p]] * data[p]
            eta = 1.0 / (lam * t)
            decay = 1.0 - eta * lam
            for k in range(n_features):
                w[k] *= decay
            b *= decay
            if y[i] * score < 1.0:
                step = eta * cw[i] * y[i]
                for p in range(lo, hi):
                    w[indices[p]] += step * data[p]
                b += eta * cw[i] * y[i]
            for k in range(n_features):
                w_sum[k] += w[k]
            b_sum += b
        inv_t = 1.0 / t
        reg = (b_sum * inv_t) ** 2
        for k in range(n_features):
            reg += (w_sum[k] * inv_t) ** 2
        total = 0.0
        for i in range(n):
            lo, hi = indptr[i], indptr[i + 1]
            score = b_sum * inv_t
            for p in range(lo, hi):
                score += (w_sum[indices[p]] * inv_t) * data[p]
            h = 1.0 - y[i] * score
            if h > 0.0:
                total += cw[i] * h
        objs[e] = 0.5 * lam * reg + total / n
    return w_sum / t, b_sum / t, objs


if HAVE_NUMBA:
    kde_gaussian = njit(cache=True, nogil=True)(_kde_gaussian_loop)
    bocpd_modes = njit(cache=True, nogil=True)(bocpd_modes_impl)
    svm_epochs = njit(cache=True, nogil=True)(_svm_epochs_loop)
    USING_NUMBA = True
else:
    kde_gaussian = kde_gaussian_numpy
    bocpd_modes = bocpd_modes_impl
    svm_epochs = svm_epochs_numpy
    USING_NUMBA = False
