"""Exact squared Bessel (BESQ) process utilities.

Used as an independent oracle for the one-dimensional radial behavior of
the interacting systems: exact transition sampling, the closed-form
probability of hitting zero, and the dimension of the zero set.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import gammaincc


@dataclass(frozen=True)
class BesqSpec:
    """BESQ(delta) started at x0 >= 0: dX = delta dt + 2 sqrt(X) dB."""

    delta: float
    x0: float

    def __post_init__(self):
        if self.delta < 0:
            raise ValueError("delta must be non-negative")
        if self.x0 < 0:
            raise ValueError("x0 must be non-negative")

    @property
    def index(self) -> float:
        """The Bessel index eta = (delta - 1) / 2 of the square root."""
        return (self.delta - 1.0) / 2.0


def besq_exact_transition(spec: BesqSpec, t: float, size: int = 1,
                          seed=None) -> np.ndarray:
    """Exact samples of X_t for BESQ(delta) from x0.

    Uses the Poisson mixture representation: X_t ~ Gamma(delta/2 + K, 2t)
    with K ~ Poisson(x0 / (2t)).  Exact in distribution; no time stepping.
    ``seed`` may be anything np.random.default_rng accepts, or a Generator.
    """
    if t <= 0:
        raise ValueError("t must be positive")
    if size <= 0:
        raise ValueError("size must be positive")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    k = rng.poisson(spec.x0 / (2.0 * t), size=size)
    shape = spec.delta / 2.0 + k
    out = np.zeros(size)
    pos = shape > 0
    # shape 0 (delta = 0 and no Poisson jump) is an exact atom at zero
    out[pos] = rng.gamma(shape=shape[pos], scale=2.0 * t)
    return out


def besq_hit_probability(spec: BesqSpec, t: float) -> float:
    """P(inf_{s<=t} X_s = 0) for BESQ(delta) with delta < 2.

    The first passage time to zero is distributed as x0 / (2 G) with
    G ~ Gamma(1 - delta/2), giving P(T0 <= t) = Q(1 - delta/2, x0/(2t))
    where Q is the regularized upper incomplete gamma function.  For
    delta >= 2 the origin is polar and the probability is zero, but that
    regime is rejected here to avoid silently mixing conventions.
    """
    if spec.delta >= 2:
        raise ValueError("origin is not attainable for delta >= 2")
    if t <= 0:
        raise ValueError("t must be positive")
    if spec.x0 == 0:
        return 1.0
    return float(gammaincc(1.0 - spec.delta / 2.0, spec.x0 / (2.0 * t)))


def besq_zero_dimension(delta: float) -> float:
    """Hausdorff dimension of the zero set of BESQ(delta).

    Equals max(0, 1 - delta/2), which in terms of the Bessel index
    eta = (delta - 1)/2 is max(0, 1/2 - eta).
    """
    if delta < 0:
        raise ValueError("delta must be non-negative")
    return max(0.0, 1.0 - delta / 2.0)
