"""Cyclic scheme of overlapping local measurements on d = a*L coordinates.

Window ell sees the 2a coordinates starting at ell*a (cyclically), measured by
a shifted copy of one local frame; consecutive windows overlap in a
coordinates and are glued by point evaluations there.  The base graph is the
L-cycle, so connectivity constants of the induced graph have closed forms for
signals whose windowed energy is pinned between s^2 and t^2.

The complex-field construction also carries the explicit adversarial pair
(all-ones against the single-frequency exponential) whose measured stability
ratio grows linearly in L, matching the bound's growth.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .certify import (
    COMPLEX_C0_MARGIN,
    SIGMA_BUDGET,
    complement_property_holds,
    estimate_local_stability,
    real_local_stability,
    sigma_strong,
)
from .errors import ClassError, FieldError, SchemeError
from .graphs import algebraic_connectivity, cheeger_interval
from .measurement import COMPLEX, REAL, Frame, align_phase, as_field_array
from .scheme import LsccScheme, cycle_graph, induce_graph
from .stability import (
    complex_bound,
    complex_constant,
    empirical_worst_ratio,
    real_bound,
    real_constant,
)

#: membership slack for window-average comparisons
CLASS_TOL = 1e-12


@dataclass(frozen=True)
class WindowedConfig:
    a: int
    L: int
    field: str = REAL
    s: float = 1.0
    t: float = 1.0
    local_rows: np.ndarray | None = None
    seed: int = 0

    def __post_init__(self):
        if self.a < 1:
            raise SchemeError("half-window a must be >= 1")
        if self.L < 3:
            raise SchemeError("cycle length L must be >= 3")
        if not (0.0 < self.s <= self.t):
            raise SchemeError("require 0 < s <= t")
        if self.field not in (REAL, COMPLEX):
            raise FieldError(f"unknown field {self.field!r}")

    @property
    def d(self) -> int:
        return self.a * self.L


@dataclass(frozen=True)
class WindowMembership:
    window_averages: np.ndarray
    in_class: bool
    s: float
    t: float


@dataclass(frozen=True)
class AdversarialPair:
    f: np.ndarray
    g: np.ndarray
    measured_ratio: float
    statement_bound: float
    proof_bound: float

    @property
    def certified_ratio(self) -> float:
        return min(self.statement_bound, self.proof_bound)


def default_local_rows(cfg: WindowedConfig) -> np.ndarray:
    """Seeded Gaussian local frame on the 2a window coordinates.

    Real frames use 4a+2 rows (enough for the complement property with
    margin).  Complex retrievability on 2a coordinates generically needs
    4*(2a)-4 rows, so the complex default takes max(4a+2, 8a-4).
    """
    n_local = 2 * cfg.a
    rng = np.random.default_rng(cfg.seed)
    if cfg.field == COMPLEX:
        m = max(4 * cfg.a + 2, 8 * cfg.a - 4)
        return rng.standard_normal((m, n_local)) + 1j * rng.standard_normal((m, n_local))
    return rng.standard_normal((4 * cfg.a + 2, n_local))


def window_support(cfg: WindowedConfig, ell: int) -> list[int]:
    return sorted(((ell * cfg.a + j) % cfg.d) for j in range(2 * cfg.a))


def build_windowed_scheme(cfg: WindowedConfig) -> LsccScheme:
    """Assemble the cyclic scheme and certify/estimate its constants.

    Real local frames get a certified stability constant from the
    strong-split constant sigma; complex ones get an adversarially sampled
    estimate inflated by a fixed margin (no closed form exists).
    """
    local = cfg.local_rows
    local = default_local_rows(cfg) if local is None else as_field_array(local, cfg.field)
    n_local = 2 * cfg.a
    if local.ndim != 2 or local.shape[1] != n_local:
        raise SchemeError(f"local frame must have {n_local} columns")

    svals = np.linalg.svd(local, compute_uv=False)
    lower = float(svals[-1]) if local.shape[0] >= n_local else 0.0
    upper = float(svals[0])
    if lower <= 0.0:
        raise SchemeError("local frame is rank deficient")

    if cfg.field == REAL:
        if local.shape[0] <= SIGMA_BUDGET:
            if not complement_property_holds(local):
                raise SchemeError("local frame fails the complement property")
            c0 = real_local_stability(local, sigma_strong(local))
        else:
            est = estimate_local_stability(
                local, cfg.field, 2.0, 4000, np.random.default_rng(cfg.seed + 1)
            )
            c0 = COMPLEX_C0_MARGIN * est
    else:
        if local.shape[0] < 4 * n_local - 4:
            raise SchemeError(
                f"complex local frame needs at least {4 * n_local - 4} rows for retrievability"
            )
        est = estimate_local_stability(
            local, cfg.field, 2.0, 4000, np.random.default_rng(cfg.seed + 1)
        )
        c0 = COMPLEX_C0_MARGIN * est

    d = cfg.d
    graph = cycle_graph(cfg.L)
    frames = []
    projections = []
    for ell in range(cfg.L):
        rows = np.zeros((local.shape[0], d), dtype=local.dtype)
        for j in range(n_local):
            rows[:, (ell * cfg.a + j) % d] = local[:, j]
        proj = np.zeros((d, d))
        for k in window_support(cfg, ell):
            proj[k, k] = 1.0
        frames.append(Frame(rows, p=2.0, field=cfg.field, lower=lower, upper=upper))
        projections.append(proj)

    functionals = {}
    for u, v in graph.edges:
        overlap = sorted(set(window_support(cfg, u)) & set(window_support(cfg, v)))
        if len(overlap) != cfg.a:
            raise SchemeError(f"edge ({u},{v}) overlap has {len(overlap)} coordinates")
        mat = np.zeros((len(overlap), d), dtype=local.dtype)
        for r, k in enumerate(overlap):
            mat[r, k] = 1.0
        functionals[(u, v)] = mat

    return LsccScheme(
        name=f"windowed(a={cfg.a},L={cfg.L},{cfg.field})",
        field=cfg.field,
        p=2.0,
        ambient_dim=d,
        graph=graph,
        vertex_frames=tuple(frames),
        vertex_projections=tuple(projections),
        edge_functionals=functionals,
        local_stability=c0,
        edge_domination=1.0 / lower,
        frame_lower=lower,
        frame_upper=upper,
        exhaustion_lower=math.sqrt(2.0),
        exhaustion_upper=math.sqrt(2.0),
    )


def window_membership(cfg: WindowedConfig, f) -> WindowMembership:
    """Test every cyclic a-window average of |f|^2 against [s^2, t^2]."""
    vec = as_field_array(f, cfg.field)
    if vec.size != cfg.d:
        raise ClassError(f"signal length {vec.size} != ambient dimension {cfg.d}")
    sq = np.abs(vec) ** 2
    averages = np.array(
        [np.mean(sq[[(j + i) % cfg.d for i in range(cfg.a)]]) for j in range(cfg.d)]
    )
    slack = CLASS_TOL * max(cfg.t**2, 1.0)
    in_class = bool(
        np.all(averages >= cfg.s**2 - slack) and np.all(averages <= cfg.t**2 + slack)
    )
    return WindowMembership(averages, in_class, cfg.s, cfg.t)


def sample_class_signal(cfg: WindowedConfig, rng: np.random.Generator) -> np.ndarray:
    """Draw a member of the window class: moduli uniform in [s, t], random phases."""
    moduli = rng.uniform(cfg.s, cfg.t, cfg.d)
    if cfg.field == COMPLEX:
        return moduli * np.exp(2j * math.pi * rng.random(cfg.d))
    return moduli * np.where(rng.random(cfg.d) < 0.5, 1.0, -1.0)


def adversarial_pair(cfg: WindowedConfig, scheme: LsccScheme | None = None) -> AdversarialPair:
    """The all-ones / single-frequency pair with its closed-form ratio floors.

    The statement-form floor uses cos(4*pi*a/L), the proof-form floor
    cos(4*pi*a/d); the measured ratio is computed directly from the scheme's
    measurements and reported alongside both.
    """
    if cfg.field != COMPLEX:
        raise FieldError("the adversarial construction is complex-field only")
    if not (cfg.s <= 1.0 <= cfg.t):
        raise ClassError("the all-ones signal requires s <= 1 <= t")
    scheme = build_windowed_scheme(cfg) if scheme is None else scheme
    d = cfg.d
    f = np.ones(d, dtype=np.complex128)
    g = np.exp(2j * math.pi * np.arange(d) / d)
    x = scheme.measure(f)
    y = scheme.measure(g)
    _, num = align_phase(x, y, COMPLEX, 2.0)
    den = float(np.linalg.norm(np.abs(x) - np.abs(y)))
    measured = num / den if den > 0.0 else math.inf
    ratio_ab = scheme.frame_lower / scheme.frame_upper

    def closed_form(angle: float) -> float:
        gap = 1.0 - math.cos(angle)
        return ratio_ab / math.sqrt(gap) if gap > 0.0 else math.inf

    return AdversarialPair(
        f=f,
        g=g,
        measured_ratio=measured,
        statement_bound=closed_form(4.0 * math.pi * cfg.a / cfg.L),
        proof_bound=closed_form(4.0 * math.pi * cfg.a / d),
    )


@dataclass(frozen=True)
class LowerBoundCheck:
    cheeger_floor: float
    lambda_floor: float
    cheeger_value: float
    lambda_value: float

    @property
    def ok(self) -> bool:
        tol = 1e-9
        return (
            self.cheeger_value >= self.cheeger_floor * (1.0 - tol)
            and self.lambda_value >= self.lambda_floor * (1.0 - tol)
        )


def unweighted_cycle_cheeger(L: int) -> float:
    return 2.0 / float(L // 2)


def unweighted_cycle_lambda(L: int) -> float:
    return 2.0 * (1.0 - math.cos(2.0 * math.pi / L))


def lower_bound_constants(cfg: WindowedConfig, f, scheme: LsccScheme | None = None) -> LowerBoundCheck:
    """Connectivity floors s^2/(2 B^2 t^2) x (cycle closed forms) for class members.

    Raises ClassError outside the window class; the returned record carries
    both the floors and the actually computed connectivity values.
    """
    if not window_membership(cfg, f).in_class:
        raise ClassError("signal is outside the window class")
    scheme = build_windowed_scheme(cfg) if scheme is None else scheme
    factor = cfg.s**2 / (2.0 * scheme.frame_upper**2 * cfg.t**2)
    graph = induce_graph(scheme, f)
    che = cheeger_interval(graph, "cycle" if cfg.L > 2 else "path")
    spec = algebraic_connectivity(graph)
    return LowerBoundCheck(
        cheeger_floor=factor * unweighted_cycle_cheeger(cfg.L),
        lambda_floor=factor * unweighted_cycle_lambda(cfg.L),
        cheeger_value=che.value,
        lambda_value=spec.lam,
    )


def scaling_sweep(
    a: int,
    L_values: list[int],
    field: str,
    trials: int = 200,
    seed: int = 0,
) -> list[dict]:
    """Per-L rows of bound / sampled ratio / adversarial ratio / connectivity.

    The local frame is generated once per (a, field, seed) and reused across
    L, so the bound prefactor is constant and growth comes only from the
    connectivity terms.
    """
    if not L_values:
        raise SchemeError("empty L range")
    if sorted(L_values) != list(L_values):
        raise SchemeError("L values must be ascending")
    base_cfg = WindowedConfig(a=a, L=L_values[0], field=field, seed=seed)
    local = default_local_rows(base_cfg)
    rows = []
    for idx, L in enumerate(L_values):
        cfg = WindowedConfig(a=a, L=L, field=field, seed=seed, local_rows=local)
        scheme = build_windowed_scheme(cfg)
        f = np.ones(cfg.d, dtype=np.complex128 if field == COMPLEX else np.float64)
        graph = induce_graph(scheme, f)
        che = cheeger_interval(graph, "cycle")
        spec = algebraic_connectivity(graph)
        rng = np.random.default_rng(
            np.random.SeedSequence(entropy=seed, spawn_key=(idx,)).generate_state(1)[0]
        )
        ratio, _ = empirical_worst_ratio(scheme, f, trials=trials, rng=rng)
        if field == COMPLEX:
            bound = complex_bound(scheme, f, spectral=spec)
            adv = adversarial_pair(cfg, scheme).measured_ratio
            prefactor = complex_constant(scheme)
        else:
            bound = real_bound(scheme, f, cheeger_result=che)
            adv = math.nan  # the explicit adversarial pair is complex-only
            prefactor = real_constant(scheme)
        rows.append(
            {
                "L": L,
                "d": cfg.d,
                "bound": bound,
                "empirical_ratio": ratio,
                "adversarial_ratio": adv,
                "cheeger": che.value,
                "lambda": spec.lam,
                "C2_or_C3": prefactor,
            }
        )
    return rows


def fit_loglog_slope(xs, ys) -> float:
    """Least-squares slope of log(y) against log(x)."""
    lx = np.log(np.asarray(xs, dtype=np.float64))
    ly = np.log(np.asarray(ys, dtype=np.float64))
    return float(np.polyfit(lx, ly, 1)[0])
