"""Asymmetric sigmoid output activation with a learnable decision threshold.

The activation maps a preactivation x to (0, 1) with a slope parameter b >= 1
controlling asymmetry.  At b = 1 it reduces to the standard logistic.  The
output value at x = 0 defines the decision threshold tau(b) <= 0.5.  A
monotone output remapping (the z-transform) moves the crossing point of the
target-0 / target-1 cross-entropy curves from 0.5 to tau, which is required
for BCE and any confusion-matrix-derived loss when b > 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

# Hard floor / soft ceiling for the slope.  b = 60 corresponds to a threshold
# of roughly 0.05, the lowest value that is numerically workable.
B_MIN = 1.0
B_MAX = 60.0

# Outputs are clamped away from {0, 1} before any logarithm downstream.
EPS = 1e-7

# Above this value of b*x the exact log1p(b*exp(b*x)) is replaced by its
# asymptote log(b) + b*x; the difference is below double precision.
_LOG_SWITCH = 35.0


def _check_slope(b: float) -> None:
    if not np.isfinite(b) or b < B_MIN:
        raise ValueError(f"slope must be a finite value >= 1, got {b}")


def _log1p_bexp(x, b: float):
    """log(1 + b*exp(b*x)), evaluated without overflow."""
    bx = b * np.asarray(x, dtype=float)
    out = np.where(
        bx > _LOG_SWITCH,
        math.log(b) + bx,
        np.log1p(b * np.exp(np.minimum(bx, _LOG_SWITCH))),
    )
    return out


def astra_forward(x, b: float):
    """Evaluate 1 - (1 + b*exp(b*x))**(-1/b).

    Strictly increasing in x, stable for b*x up to +/-700 (saturates smoothly
    to 0 or 1).  Scalar or ndarray x; scalar b.
    """
    _check_slope(b)
    xa = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(xa)):
        raise ValueError("preactivation must be finite")
    u = _log1p_bexp(xa, b)
    y = -np.expm1(-u / b)
    if np.isscalar(x) or xa.ndim == 0:
        return float(y)
    return y


def astra_threshold(b: float) -> float:
    """Decision threshold tau(b) = 1 - (1 + b)**(-1/b).

    Equals astra_forward(0, b); strictly decreasing in b, in (0, 0.5].
    """
    _check_slope(b)
    return -math.expm1(-math.log1p(b) / b)


def slope_from_beta(beta: float) -> float:
    """Map the unconstrained parameter beta to a slope b > 1.

    Linear branch 2 + beta for beta > 0, exponential branch 1 + exp(beta)
    otherwise; continuous at beta = 0 (both give 2).
    """
    if not np.isfinite(beta):
        raise ValueError("beta must be finite")
    if beta > 0:
        return 2.0 + beta
    return 1.0 + math.exp(beta)


def slope_grad_beta(beta: float) -> float:
    """db/dbeta for slope_from_beta."""
    if beta > 0:
        return 1.0
    return math.exp(beta)


def beta_from_slope(b: float) -> float:
    """Inverse of slope_from_beta (b > 1)."""
    if b <= 1.0:
        raise ValueError(f"slope must be > 1, got {b}")
    if b > 2.0:
        return b - 2.0
    return math.log(b - 1.0)


def slope_from_tau(tau: float) -> float:
    """Solve astra_threshold(b) == tau for b by bisection.

    tau must lie in (astra_threshold(B_MAX), 0.5].
    """
    if not 0.0 < tau <= 0.5:
        raise ValueError(f"threshold must be in (0, 0.5], got {tau}")
    lo, hi = B_MIN, B_MAX
    if tau >= astra_threshold(lo):
        return lo
    if tau <= astra_threshold(hi):
        raise ValueError(f"threshold {tau} below the stable range (~0.05)")
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if astra_threshold(mid) > tau:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def astra_backward(x, b: float):
    """Partial derivatives (dy/dx, dy/db) of astra_forward.

    dy/dx = s/(1+s) * (1+s)**(-1/b) with s = b*exp(b*x); it is positive
    everywhere and maximal at x = 0, the threshold point.
    """
    _check_slope(b)
    xa = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(xa)):
        raise ValueError("preactivation must be finite")
    bx = b * xa
    u = _log1p_bexp(xa, b)
    log_s = math.log(b) + bx
    r = np.exp(log_s - u)          # s / (1 + s)
    one_my = np.exp(-u / b)        # 1 - y
    dy_dx = r * one_my
    dy_db = one_my / (b * b) * (r * (1.0 + bx) - u)
    if np.isscalar(x) or xa.ndim == 0:
        return float(dy_dx), float(dy_db)
    return dy_dx, dy_db


def threshold_grad_b(b: float) -> float:
    """d tau / d b for astra_threshold."""
    _check_slope(b)
    g = math.exp(-math.log1p(b) / b)   # (1+b)**(-1/b)
    return g * (1.0 / (b * (1.0 + b)) - math.log1p(b) / (b * b))


def clamp_unit(y):
    """Clamp activation outputs into [EPS, 1 - EPS] before logarithms."""
    return np.clip(y, EPS, 1.0 - EPS)


def z_transform(y_hat, tau: float):
    """Remap outputs so the loss crossing point moves from 0.5 to tau.

    z = y*(1-tau) / (y*(1-tau) + (1-y)*tau); strictly increasing in y and
    maps tau -> 0.5.
    """
    if not 0.0 < tau < 1.0:
        raise ValueError(f"tau must be in (0, 1), got {tau}")
    y = clamp_unit(np.asarray(y_hat, dtype=float))
    num = y * (1.0 - tau)
    z = num / (num + (1.0 - y) * tau)
    if np.isscalar(y_hat) or y.ndim == 0:
        return float(z)
    return z


def z_transform_backward(y_hat, tau: float):
    """Partial derivatives (dz/dy_hat, dz/dtau) of z_transform."""
    if not 0.0 < tau < 1.0:
        raise ValueError(f"tau must be in (0, 1), got {tau}")
    y = clamp_unit(np.asarray(y_hat, dtype=float))
    den = y * (1.0 - tau) + (1.0 - y) * tau
    dz_dy = tau * (1.0 - tau) / (den * den)
    dz_dtau = -y * (1.0 - y) / (den * den)
    if np.isscalar(y_hat) or y.ndim == 0:
        return float(dz_dy), float(dz_dtau)
    return dz_dy, dz_dtau


def misorder_band_upper(b: float) -> float:
    """Upper end of the preactivation band on which raw BCE mis-orders targets.

    For b > 1 the untransformed cross-entropy contributions of targets 0 and 1
    are wrongly ordered on (0, x_max) with x_max = log((2**b - 1)/b) / b.
    Tends to 0 as b -> 1.
    """
    if not np.isfinite(b) or b <= 1.0:
        raise ValueError(f"slope must be > 1, got {b}")
    log2 = math.log(2.0)
    # log(2**b - 1) = b*log(2) + log1p(-2**-b)
    return (b * log2 + math.log1p(-math.exp(-b * log2)) - math.log(b)) / b


@dataclass
class AstraParams:
    """Learnable slope state: beta, the derived slope b and threshold tau,
    and the current slope learning rate eta_b.

    When ``trainable`` is False the slope is frozen at b = 1 (standard
    logistic) and beta is ignored.
    """

    beta: float
    b: float
    tau: float
    eta_b: float
    trainable: bool = True

    @classmethod
    def from_tau_init(cls, tau_init: float, eta_b: float, trainable: bool = True) -> "AstraParams":
        b = slope_from_tau(tau_init)
        return cls(beta=beta_from_slope(b), b=b, tau=astra_threshold(b),
                   eta_b=eta_b, trainable=trainable)

    @classmethod
    def frozen(cls) -> "AstraParams":
        """Slope fixed at 1: plain logistic output, threshold 0.5."""
        return cls(beta=0.0, b=1.0, tau=0.5, eta_b=0.0, trainable=False)

    def step_beta(self, grad_beta: float, eta_b: float) -> None:
        """One gradient step on beta, clamping b into [B_MIN, B_MAX]."""
        if not self.trainable:
            return
        self.beta -= eta_b * grad_beta
        b = slope_from_beta(self.beta)
        if b > B_MAX:
            b = B_MAX
            self.beta = beta_from_slope(B_MAX)
        self.b = b
        self.tau = astra_threshold(b)
