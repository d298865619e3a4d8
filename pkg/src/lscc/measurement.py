"""Vectors, frames, phaseless measurement and optimal global-phase alignment.

All arithmetic is double precision.  Signals and measurement vectors over the
real field are float64 arrays, complex ones are complex128.  A measurement row
phi acts on a signal f as <f, phi> = sum_j f_j * conj(phi_j), so measuring is
conjugate-linear in the row and plain matrix multiplication in the real case.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field as dc_field

import numpy as np

from .errors import DimensionError, FieldError

logger = logging.getLogger(__name__)

REAL = "real"
COMPLEX = "complex"

#: number of coarse grid points used for unimodular alignment when p != 2
PHASE_GRID = 4096
#: relative tolerance of the golden-section refinement for p != 2 alignment
PHASE_REFINE_RTOL = 1e-10


def _check_field(field: str) -> str:
    if field not in (REAL, COMPLEX):
        raise FieldError(f"unknown field {field!r}")
    return field


def as_field_array(values, field: str) -> np.ndarray:
    """Coerce to a 1-D or 2-D array of the dtype matching `field`.

    Real-field input with a nonzero imaginary part is rejected rather than
    silently truncated.
    """
    _check_field(field)
    arr = np.asarray(values)
    if field == REAL:
        if np.iscomplexobj(arr):
            if np.any(arr.imag != 0.0):
                raise FieldError("real-field values must have zero imaginary part")
            arr = arr.real
        return np.asarray(arr, dtype=np.float64)
    return np.asarray(arr, dtype=np.complex128)


@dataclass(frozen=True)
class Signal:
    """A finite coordinate vector over the real or complex field."""

    values: np.ndarray
    field: str

    def __post_init__(self):
        object.__setattr__(self, "values", as_field_array(self.values, self.field))
        if self.values.ndim != 1 or self.values.size < 1:
            raise DimensionError("signal must be a nonempty 1-D vector")
        self.values.setflags(write=False)

    def __len__(self) -> int:
        return self.values.size

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.values))


@dataclass(frozen=True)
class Frame:
    """A finite measurement family: one functional per matrix row.

    `lower` and `upper` are the declared p-frame constants (A <= B); they are
    validated against probe signals by the scheme validators, never assumed.
    """

    rows: np.ndarray
    p: float = 2.0
    field: str = REAL
    lower: float = dc_field(default=0.0)
    upper: float = dc_field(default=np.inf)

    def __post_init__(self):
        object.__setattr__(self, "rows", as_field_array(self.rows, self.field))
        if self.rows.ndim != 2 or self.rows.shape[0] < 1 or self.rows.shape[1] < 1:
            raise DimensionError("frame rows must form a nonempty matrix")
        if not (1.0 <= self.p < math.inf):
            raise FieldError(f"p must lie in [1, inf), got {self.p}")
        if self.lower > self.upper:
            raise FieldError("frame constants must satisfy lower <= upper")
        self.rows.setflags(write=False)

    @property
    def num_rows(self) -> int:
        return self.rows.shape[0]

    @property
    def dim(self) -> int:
        return self.rows.shape[1]


def measure(frame: Frame, f) -> np.ndarray:
    """Apply every functional of the frame: out[i] = <f, row_i>."""
    vec = f.values if isinstance(f, Signal) else np.asarray(f)
    if vec.ndim != 1 or vec.size != frame.dim:
        raise DimensionError(
            f"signal length {vec.size if vec.ndim == 1 else vec.shape} "
            f"!= frame dimension {frame.dim}"
        )
    if np.iscomplexobj(vec) and frame.field == REAL:
        raise FieldError("real frame cannot measure a complex signal")
    return np.conj(frame.rows) @ vec


def phaseless_measure(frame: Frame, f) -> np.ndarray:
    """Componentwise modulus of measure(frame, f); entries are >= 0."""
    return np.abs(measure(frame, f))


def p_norm(v, p: float) -> float:
    """(sum |v_i|^p)^(1/p) for p in [1, inf)."""
    if not (1.0 <= p < math.inf):
        raise FieldError(f"p must lie in [1, inf), got {p}")
    return float(np.linalg.norm(np.asarray(v).ravel(), ord=p))


def align_phase(x, y, field: str, p: float = 2.0) -> tuple[complex, float]:
    """Unimodular xi minimizing ||x - xi*y||_p, with the achieved residual.

    Real field: both signs are evaluated exactly (ties prefer +1).  Complex
    field with p = 2: closed form, xi is the phase of <x, y> (xi = 1 when the
    inner product vanishes).  Complex field with p != 2 has no closed form; a
    4096-point phase grid followed by golden-section refinement is used, and
    the result is accurate to ~1e-10 relative in the phase angle.
    """
    _check_field(field)
    xv = np.asarray(x).ravel()
    yv = np.asarray(y).ravel()
    if xv.size != yv.size:
        raise DimensionError(f"length mismatch {xv.size} != {yv.size}")
    if field == REAL:
        r_plus = p_norm(xv - yv, p)
        r_minus = p_norm(xv + yv, p)
        if r_plus <= r_minus:
            return 1.0, r_plus
        return -1.0, r_minus
    if p == 2.0:
        inner = np.vdot(yv, xv)  # <x, y> = sum x_j conj(y_j)
        mag = abs(inner)
        xi = inner / mag if mag > 0.0 else 1.0 + 0.0j
        return complex(xi), p_norm(xv - xi * yv, p)
    return _align_phase_grid(xv, yv, p)


def _align_phase_grid(xv: np.ndarray, yv: np.ndarray, p: float) -> tuple[complex, float]:
    thetas = np.linspace(0.0, 2.0 * math.pi, PHASE_GRID, endpoint=False)
    diffs = xv[None, :] - np.exp(1j * thetas)[:, None] * yv[None, :]
    vals = np.sum(np.abs(diffs) ** p, axis=1)
    k = int(np.argmin(vals))
    lo = thetas[k] - 2.0 * math.pi / PHASE_GRID
    hi = thetas[k] + 2.0 * math.pi / PHASE_GRID

    def objective(theta: float) -> float:
        return float(np.sum(np.abs(xv - np.exp(1j * theta) * yv) ** p))

    inv_phi = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c = b - inv_phi * (b - a)
    d = a + inv_phi * (b - a)
    fc, fd = objective(c), objective(d)
    while (b - a) > PHASE_REFINE_RTOL * 2.0 * math.pi:
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - inv_phi * (b - a)
            fc = objective(c)
        else:
            a, c, fc = c, d, fd
            d = a + inv_phi * (b - a)
            fd = objective(d)
    theta = 0.5 * (a + b)
    xi = complex(np.exp(1j * theta))
    return xi, p_norm(xv - xi * yv, p)


def align_phase_batch(x: np.ndarray, y: np.ndarray, field: str) -> np.ndarray:
    """Column-wise aligned residuals ||x_j - xi_j y_j||_2 for p = 2.

    Vectorized companion of align_phase for fuzzing loops; x and y are
    (m, T) arrays of measurement columns.
    """
    _check_field(field)
    if x.shape != y.shape:
        raise DimensionError(f"shape mismatch {x.shape} != {y.shape}")
    if field == REAL:
        r_plus = np.linalg.norm(x - y, axis=0)
        r_minus = np.linalg.norm(x + y, axis=0)
        return np.minimum(r_plus, r_minus)
    inner = np.sum(x * np.conj(y), axis=0)
    mag = np.abs(inner)
    xi = np.where(mag > 0.0, inner / np.where(mag > 0.0, mag, 1.0), 1.0)
    return np.linalg.norm(x - xi[None, :] * y, axis=0)


def linear_align(x, y) -> tuple[complex, float]:
    """Scalar c minimizing ||x - c*y||_2 (least squares) and the residual."""
    xv = np.asarray(x).ravel()
    yv = np.asarray(y).ravel()
    if xv.size != yv.size:
        raise DimensionError(f"length mismatch {xv.size} != {yv.size}")
    ynorm2 = float(np.vdot(yv, yv).real)
    if ynorm2 == 0.0:
        return 0.0 + 0.0j, float(np.linalg.norm(xv))
    c = np.vdot(yv, xv) / ynorm2
    return complex(c), float(np.linalg.norm(xv - c * yv))


def check_phase_vs_linear_alignment(x, y, tol: float = 1e-9) -> bool:
    """Check min_{|xi|=1} ||x - xi y||_2 <= sqrt(2) min_c ||x - c y||_2 + || |x|-|y| ||_2.

    Complex field, p = 2.  Returns whether the inequality holds within an
    additive tolerance; violations return False rather than raising.
    """
    xv = np.asarray(x, dtype=np.complex128).ravel()
    yv = np.asarray(y, dtype=np.complex128).ravel()
    _, lhs = align_phase(xv, yv, COMPLEX, 2.0)
    _, linear_res = linear_align(xv, yv)
    modulus_gap = float(np.linalg.norm(np.abs(xv) - np.abs(yv)))
    holds = lhs <= math.sqrt(2.0) * linear_res + modulus_gap + tol
    if not holds:
        logger.warning(
            "alignment inequality violated: lhs=%.17g linear=%.17g gap=%.17g x=%r y=%r",
            lhs,
            linear_res,
            modulus_gap,
            xv.tolist(),
            yv.tolist(),
        )
    return holds
