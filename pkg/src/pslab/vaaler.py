"""Trigonometric approximation of the sawtooth and its Fejer majorant.

For each degree H the kernel realizes two polynomials:

  psi_star(x) = -sum_{h=1..H} W(h/(H+1)) sin(2 pi h x) / (pi h)
  delta(x)    = b(0) + 2 sum_{h=1..H} b(h) cos(2 pi h x),
  b(h)        = (1/(2H+2)) (1 - h/(H+1))

with the weight W(t) = pi t (1-|t|) cot(pi t) + |t|. delta is the Fejer
kernel scaled by 1/(2H+2), hence nonnegative, and majorizes the
approximation error: |psi_star(x) - psi(x)| <= delta(x) for every x. The
tight spots are the jumps of psi, where both sides approach 1/2.

The leading minus is forced by the target function: the sawtooth's Fourier
coefficients are -(2 pi i h)^-1, so psi_star's h-th coefficient must be
-(2 pi i h)^-1 W(h/(H+1)) for the majorant inequality to hold. Writing the
sum without the minus flips psi_star to approximate -psi and the
inequality fails by nearly 1 at the jumps (measured, not hypothetical).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError

__all__ = [
    "VaalerKernel",
    "weight_W",
    "build_kernel",
    "eval_psi_star",
    "eval_delta",
    "eval_psi_star_grid",
    "eval_delta_grid",
]

# below this |t| the cot product is evaluated by series to avoid overflow
# and cancellation in cot(pi t); pi t cot(pi t) = 1 - (pi t)^2/3 - O(t^4)
_SERIES_CUTOFF = 1e-8


def weight_W(t: float) -> float:
    """W(t) = pi t (1-|t|) cot(pi t) + |t| on (-1, 1); even in t.

    At |t| < 1e-8 the removable singularity is taken by series, so the
    limit value W(0) = 1 is returned for t = 0.
    """
    if abs(t) >= 1.0:
        raise DomainError(f"weight_W needs |t| < 1, got {t}")
    a = abs(t)
    if a < _SERIES_CUTOFF:
        pt2 = (math.pi * t) ** 2
        return (1.0 - a) * (1.0 - pt2 / 3.0) + a
    pt = math.pi * t
    return pt * (1.0 - a) / math.tan(pt) + a


@dataclass(frozen=True)
class VaalerKernel:
    """Degree-H kernel; immutable after build, safe to share.

    a_coeffs[h] = W(h/(H+1)) / (2 pi i h) for h in [1, H] (entry 0 unused);
    b_coeffs[h] = (1/(2H+2)) (1 - h/(H+1)) for h in [0, H];
    sin_coeffs[h] = W(h/(H+1)) / (pi h), the real pairing of +-h terms.
    """

    H: int
    a_coeffs: np.ndarray
    b_coeffs: np.ndarray
    sin_coeffs: np.ndarray


def build_kernel(H: int) -> VaalerKernel:
    if H < 1:
        raise ValueError("H must be >= 1")
    h = np.arange(0, H + 1, dtype=np.float64)
    weights = np.zeros(H + 1)
    weights[1:] = [weight_W(v / (H + 1)) for v in range(1, H + 1)]
    a = np.zeros(H + 1, dtype=np.complex128)
    a[1:] = -weights[1:] / (2j * np.pi * h[1:])
    b = (1.0 - h / (H + 1)) / (2.0 * H + 2.0)
    s = np.zeros(H + 1)
    s[1:] = -weights[1:] / (np.pi * h[1:])
    return VaalerKernel(H=H, a_coeffs=a, b_coeffs=b, sin_coeffs=s)


def eval_psi_star(kern: VaalerKernel, x: float) -> float:
    """psi_star(x), compensated summation over h."""
    H = kern.H
    s = kern.sin_coeffs
    return math.fsum(
        s[h] * math.sin(2.0 * math.pi * h * x) for h in range(1, H + 1)
    )


def eval_delta(kern: VaalerKernel, x: float) -> float:
    """delta(x) = b(0) + 2 sum b(h) cos(2 pi h x); nonnegative up to rounding."""
    H = kern.H
    b = kern.b_coeffs
    return math.fsum(
        [b[0]] + [2.0 * b[h] * math.cos(2.0 * math.pi * h * x) for h in range(1, H + 1)]
    )


_CHUNK = 4096


def eval_psi_star_grid(kern: VaalerKernel, xs: np.ndarray) -> np.ndarray:
    """Vectorized psi_star over an array of points; matches eval_psi_star."""
    xs = np.asarray(xs, dtype=np.float64)
    out = np.empty(xs.size)
    h = np.arange(1, kern.H + 1, dtype=np.float64)
    coeffs = kern.sin_coeffs[1:]
    for start in range(0, xs.size, _CHUNK):
        block = xs[start : start + _CHUNK, None]
        out[start : start + _CHUNK] = np.sin(2.0 * np.pi * block * h) @ coeffs
    return out.reshape(xs.shape)


def eval_delta_grid(kern: VaalerKernel, xs: np.ndarray) -> np.ndarray:
    """Vectorized delta over an array of points; matches eval_delta."""
    xs = np.asarray(xs, dtype=np.float64)
    out = np.empty(xs.size)
    h = np.arange(1, kern.H + 1, dtype=np.float64)
    coeffs = 2.0 * kern.b_coeffs[1:]
    b0 = kern.b_coeffs[0]
    for start in range(0, xs.size, _CHUNK):
        block = xs[start : start + _CHUNK, None]
        out[start : start + _CHUNK] = b0 + np.cos(2.0 * np.pi * block * h) @ coeffs
    return out.reshape(xs.shape)
