"""Certified and estimated frame constants.

For a real measurement matrix M, a worst-case constant for recovering the
measurement vector up to sign from its moduli follows from the strong-split
constant sigma: the minimum over all row splits of the larger of the two
sub-frame lower bounds.  Splitting measurement indices by the sign of the
product of the two signals' measurements turns any pair into a (difference,
sum) decomposition controlled by sigma, giving

    min_{s = +-1} ||Mf - s Mg||_2  <=  sqrt(2) * lmax(M) / sigma * || |Mf| - |Mg| ||_2.

No closed-form analogue exists over the complex field, so complex local
constants are estimated by adversarial sampling and inflated by a safety
margin.
"""

from __future__ import annotations

import itertools
import math

import numpy as np
from scipy.optimize import minimize

from .errors import BudgetExceededError, DegenerateFrameError
from .measurement import COMPLEX, align_phase, align_phase_batch

#: largest row count for 2^m subset enumeration
SIGMA_BUDGET = 20
#: multiplier applied to sampled complex local stability estimates
COMPLEX_C0_MARGIN = 2.0
#: sigma below this fraction of the top singular value counts as zero
DEGENERATE_RTOL = 1e-12


def min_singular(m: np.ndarray) -> float:
    """inf over unit c of ||M c||_2; zero when M has a nontrivial null space."""
    m = np.atleast_2d(m)
    if m.shape[0] == 0 or m.shape[0] < m.shape[1]:
        return 0.0
    return float(np.linalg.svd(m, compute_uv=False)[-1])


def max_singular(m: np.ndarray) -> float:
    m = np.atleast_2d(m)
    if m.shape[0] == 0:
        return 0.0
    return float(np.linalg.svd(m, compute_uv=False)[0])


def complement_property_holds(m: np.ndarray, budget: int = SIGMA_BUDGET) -> bool:
    """True iff every row split leaves one side of full column rank.

    Equivalent to real phase retrievability of the row family.
    """
    m = np.atleast_2d(m)
    rows, n = m.shape
    if rows > budget:
        raise BudgetExceededError(f"{rows} rows exceeds subset budget {budget}")
    idx = np.arange(rows)

    def rank(sub: np.ndarray) -> int:
        return 0 if sub.shape[0] == 0 else int(np.linalg.matrix_rank(sub))

    for mask in range(1 << (rows - 1)):  # complement symmetry halves the work
        picked = (mask >> idx) & 1 == 1
        if rank(m[picked]) < n and rank(m[~picked]) < n:
            return False
    return True


def sigma_strong(m: np.ndarray, budget: int = SIGMA_BUDGET) -> float:
    """Strong-split constant by bitmask enumeration of all row subsets."""
    m = np.atleast_2d(np.asarray(m, dtype=np.float64))
    rows = m.shape[0]
    if rows > budget:
        raise BudgetExceededError(f"{rows} rows exceeds subset budget {budget}")
    idx = np.arange(rows)
    best = math.inf
    for mask in range(1 << rows):
        picked = (mask >> idx) & 1 == 1
        val = max(min_singular(m[picked]), min_singular(m[~picked]))
        if val < best:
            best = val
    return best


def sigma_strong_recursive(m: np.ndarray, budget: int = SIGMA_BUDGET) -> float:
    """Independent second enumeration path over subsets by size.

    Uses itertools.combinations instead of bitmasks; shares only the singular
    value kernel, so agreement with sigma_strong is a structural cross-check.
    """
    m = np.atleast_2d(np.asarray(m, dtype=np.float64))
    rows = m.shape[0]
    if rows > budget:
        raise BudgetExceededError(f"{rows} rows exceeds subset budget {budget}")
    all_rows = set(range(rows))
    best = math.inf
    for size in range(rows + 1):
        for combo in itertools.combinations(range(rows), size):
            rest = sorted(all_rows.difference(combo))
            val = max(min_singular(m[list(combo)]), min_singular(m[rest]))
            if val < best:
                best = val
    return best


def real_local_stability(m: np.ndarray, sigma: float | None = None) -> float:
    """Certified sign-recovery stability constant sqrt(2)*lmax/sigma."""
    if sigma is None:
        sigma = sigma_strong(m)
    lmax = max_singular(m)
    if sigma <= DEGENERATE_RTOL * lmax:
        raise DegenerateFrameError("sigma = 0: the row family is not phase retrievable")
    return math.sqrt(2.0) * lmax / sigma


def p_frame_bounds(m: np.ndarray, p: float, grid: int = 4096, rng=None) -> tuple[float, float]:
    """Numerical (lower, upper) constants of ||M c||_p against the domain
    p-norm ||c||_p.

    Exact via singular values for p = 2.  Otherwise the scale-invariant ratio
    is optimized over directions: dense angle grid for 2 columns, seeded
    random starts for more, each refined by derivative-free descent.
    """
    m = np.atleast_2d(np.asarray(m, dtype=np.float64))
    n = m.shape[1]
    if p == 2.0:
        svals = np.linalg.svd(m, compute_uv=False)
        lo = float(svals[-1]) if m.shape[0] >= n else 0.0
        return lo, float(svals[0])

    def ratio(c: np.ndarray) -> float:
        nc = float(np.sum(np.abs(c) ** p) ** (1.0 / p))
        if nc == 0.0:
            return math.inf
        return float(np.sum(np.abs(m @ c) ** p) ** (1.0 / p) / nc)

    if n == 1:
        v = ratio(np.ones(1))
        return v, v
    if n == 2:
        thetas = np.linspace(0.0, math.pi, grid, endpoint=False)
        dirs = np.stack([np.cos(thetas), np.sin(thetas)], axis=1)
    else:
        rng = np.random.default_rng(0) if rng is None else rng
        dirs = rng.standard_normal((grid, n))
        dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
    num = np.sum(np.abs(dirs @ m.T) ** p, axis=1) ** (1.0 / p)
    den = np.sum(np.abs(dirs) ** p, axis=1) ** (1.0 / p)
    vals = num / den
    lo_start = dirs[int(np.argmin(vals))]
    hi_start = dirs[int(np.argmax(vals))]
    res_lo = minimize(ratio, lo_start, method="Nelder-Mead", options={"xatol": 1e-12, "fatol": 1e-14})
    res_hi = minimize(lambda c: -ratio(c), hi_start, method="Nelder-Mead", options={"xatol": 1e-12, "fatol": 1e-14})
    lo = min(float(np.min(vals)), float(res_lo.fun))
    hi = max(float(np.max(vals)), float(-res_hi.fun))
    return lo, hi


def estimate_local_stability(
    m: np.ndarray,
    field: str,
    p: float,
    trials: int,
    rng: np.random.Generator,
) -> float:
    """Empirical worst ratio of aligned to phaseless measurement distance.

    Samples random pairs plus near-phase-equivalent pairs, where the ratio
    approaches its supremum.  A lower bound on the true constant: callers
    needing an upper bound must add a margin.
    """
    n = m.shape[1]

    def draw(count: int) -> np.ndarray:
        if field == COMPLEX:
            return rng.standard_normal((n, count)) + 1j * rng.standard_normal((n, count))
        return rng.standard_normal((n, count))

    worst = 1.0
    blocks = []
    half = max(trials // 2, 1)
    blocks.append((draw(half), draw(half)))
    # near-collinear pairs: g = xi*f + eps*h with shrinking eps
    f = draw(half)
    h = draw(half)
    eps = np.logspace(-6, 0, half)
    if field == COMPLEX:
        xi = np.exp(2j * math.pi * rng.random(half))
    else:
        xi = np.where(rng.random(half) < 0.5, 1.0, -1.0)
    blocks.append((f, xi[None, :] * f + eps[None, :] * h))
    for fs, gs in blocks:
        x = np.conj(m) @ fs
        y = np.conj(m) @ gs
        num = align_phase_batch(x, y, field) if p == 2.0 else None
        if num is None:
            num = np.array(
                [align_phase(x[:, j], y[:, j], field, p)[1] for j in range(x.shape[1])]
            )
        den = np.sum(np.abs(np.abs(x) - np.abs(y)) ** p, axis=0) ** (1.0 / p)
        scale = np.sum(np.abs(x) ** p, axis=0) ** (1.0 / p)
        good = den > 1e-14 * np.maximum(scale, 1e-300)
        if np.any(good):
            worst = max(worst, float(np.max(num[good] / den[good])))
    return worst
