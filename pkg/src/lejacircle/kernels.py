"""Potential kernels on the circle and their exact integration helpers.

Angles live in [0, 1) (fractions of a full turn). Two kernels are supported,
both written as potentials to be minimized and both with zero mean over one
period:

* LogSin: G(d) = -log(2 sin(pi d)), the logarithmic kernel. Its Fourier
  cosine series is sum_m cos(2 pi m d)/m.
* Bernoulli: G(d) = (1/4)(d^2 - d + 1/6), a quarter of the second Bernoulli
  polynomial. Fourier coefficients 1/(2 pi m)^2.

The Clausen function Cl2 supplies the exact antiderivative of the LogSin
kernel, which is what makes segment integrals of log-potentials exact.
"""

from __future__ import annotations

import enum
import math

import numpy as np

__all__ = [
    "KernelKind",
    "SingularityError",
    "wrapped_distance",
    "kernel_value",
    "clausen_cl2",
    "kernel_antiderivative",
    "fourier_coefficient",
]

TWO_PI = 2.0 * math.pi

# Kernel arguments below this count as sitting on a point mass.
SINGULARITY_CUTOFF = 1e-300


class SingularityError(ValueError):
    """Raised when the LogSin kernel is evaluated on top of a point."""


class KernelKind(enum.Enum):
    LOG_SIN = "logsin"
    BERNOULLI = "bernoulli"


def wrapped_distance(a: float, b: float) -> float:
    """Circle distance between two angles, in [0, 1/2].

    Both arguments must lie in [0, 1).
    """
    if not (0.0 <= a < 1.0 and 0.0 <= b < 1.0):
        raise ValueError(f"angles must lie in [0, 1): got {a!r}, {b!r}")
    d = abs(a - b)
    return min(d, 1.0 - d)


def kernel_value(kind: KernelKind, d: float) -> float:
    """Evaluate the kernel at a wrapped distance d in [0, 1/2].

    LogSin is singular at d = 0 and raises SingularityError there (callers
    must treat existing points as infinite potential, never average over
    them). Bernoulli is finite on the closed interval.
    """
    if d < 0.0 or d > 0.5:
        raise ValueError(f"distance must lie in [0, 1/2]: got {d!r}")
    if kind is KernelKind.LOG_SIN:
        if d < SINGULARITY_CUTOFF:
            raise SingularityError(f"LogSin kernel is singular at d={d!r}")
        return -math.log(2.0 * math.sin(math.pi * d))
    return 0.25 * (d * d - d + 1.0 / 6.0)


# Coefficients of Cl2(t) = t - t log|t| + sum_n c_n t^(2n+1) for |t| <= pi,
# c_n = |B_2n| / (2n (2n+1) (2n)!). Generated with mpmath at dps=40 and
# truncated at n=23: the dropped tail is ~1.2e-17 at t=pi, below double
# rounding of the O(1) leading terms.
_CL2_COEFFS = (
    0.013888888888888888,
    6.944444444444444e-05,
    7.873519778281683e-07,
    1.1482216343327455e-08,
    1.8978869988971e-10,
    3.387301370953521e-12,
    6.372636443183181e-14,
    1.2462059912950672e-15,
    2.5105444608999545e-17,
    5.178258806090623e-19,
    1.0887357368300849e-20,
    2.325744114302087e-22,
    5.03519521314739e-24,
    1.1026499294381215e-25,
    2.4386585509007344e-27,
    5.440142678856253e-29,
    1.2228340131217352e-30,
    2.767263468967951e-32,
    6.3000905918320136e-34,
    1.4420868388418476e-35,
    3.3170939991595428e-37,
    7.663913557920658e-39,
    1.7778714733830659e-40,
)


def clausen_cl2(theta):
    """Clausen function Cl2(theta) = sum_{k>=1} sin(k theta)/k^2.

    Odd, 2 pi periodic; the argument is reduced to [-pi, pi) internally.
    Accepts scalars or arrays. Absolute accuracy ~1e-15 on the principal
    range (the series is all-positive there, no cancellation).
    """
    theta_arr = np.asarray(theta, dtype=float)
    scalar = theta_arr.ndim == 0
    t = np.atleast_1d(theta_arr)
    t = t - TWO_PI * np.floor((t + math.pi) / TWO_PI)
    t2 = t * t
    # in-place Horner; this runs on large matrices, so every temporary counts
    acc = np.full_like(t, _CL2_COEFFS[-1])
    for c in _CL2_COEFFS[-2::-1]:
        acc *= t2
        acc += c
    acc *= t2
    acc *= t
    acc += t
    # t = 0 maps to log(1), making the result an exact 0 with no masking
    safe = np.where(t == 0.0, 1.0, np.abs(t))
    np.log(safe, out=safe)
    safe *= t
    acc -= safe
    return float(acc[0]) if scalar else acc


def kernel_antiderivative(kind: KernelKind, x):
    """Periodic antiderivative A with A'(x) = G({x}) a.e. and A(0) = 0.

    LogSin: A(x) = Cl2(2 pi x)/(2 pi). Bernoulli: A(x) = B3({x})/12. Both
    vanish at integers because the kernels have zero mean. Accepts scalars
    or arrays.
    """
    x_arr = np.asarray(x, dtype=float)
    scalar = x_arr.ndim == 0
    xs = np.atleast_1d(x_arr)
    if kind is KernelKind.LOG_SIN:
        out = clausen_cl2(TWO_PI * xs) / TWO_PI
        out = np.atleast_1d(out)
    else:
        f = xs - np.floor(xs)
        out = f * (f * (f - 1.5) + 0.5) / 12.0
    return float(out[0]) if scalar else out


def fourier_coefficient(kind: KernelKind, m: int) -> float:
    """Cosine coefficient c_m with G(d) = sum_{m>=1} c_m cos(2 pi m d)."""
    if m < 1:
        raise ValueError(f"frequency must be a positive integer: got {m!r}")
    if kind is KernelKind.LOG_SIN:
        return 1.0 / m
    return 1.0 / (TWO_PI * m) ** 2
