"""Training losses: mean-reduced BCE and the set-level approximated-G-Mean
loss, with gradients with respect to the network outputs.

Both losses consume the z-transformed outputs when the asymmetric activation
is active (the z-transform is required for any loss that pivots around 0.5,
which includes everything derived from the confusion matrix); at b = 1 the
z-transform is the identity and they see the raw outputs.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .activation import clamp_unit
from .metrics import approx_cm


@dataclass(frozen=True)
class LossKind:
    """One of the four training candidates: {BCE, GMN} x {ASTra on/off}."""

    variant: str          # "bce" or "gmn"
    use_astra: bool

    def __post_init__(self):
        if self.variant not in ("bce", "gmn"):
            raise ValueError(f"unknown loss variant {self.variant!r}")

    @property
    def name(self) -> str:
        return self.variant + ("-astra" if self.use_astra else "")

    @classmethod
    def parse(cls, name: str) -> "LossKind":
        base = name.lower()
        astra = base.endswith("-astra")
        if astra:
            base = base[: -len("-astra")]
        return cls(variant=base, use_astra=astra)


ALL_KINDS = (
    LossKind("bce", False),
    LossKind("gmn", False),
    LossKind("bce", True),
    LossKind("gmn", True),
)


def _check(z, y):
    if len(z) != len(y):
        raise ValueError(f"length mismatch: {len(z)} vs {len(y)}")
    if len(z) == 0:
        raise ValueError("empty input")


def bce_loss(z, y) -> float:
    """Mean binary cross-entropy -y*log z - (1-y)*log(1-z)."""
    _check(z, y)
    zc = clamp_unit(np.asarray(z, dtype=float))
    t = np.asarray(y, dtype=float)
    return float(np.mean(-t * np.log(zc) - (1.0 - t) * np.log1p(-zc)))


def bce_grad(z, y) -> np.ndarray:
    """Per-example d(mean BCE)/dz."""
    _check(z, y)
    zc = clamp_unit(np.asarray(z, dtype=float))
    t = np.asarray(y, dtype=float)
    n = len(zc)
    return (-t / zc + (1.0 - t) / (1.0 - zc)) / n


def gmn_loss(y_hat, y, m0: int, m1: int) -> float:
    """1 - sqrt(TN_apx * TP_apx / (m0 * m1)), the approximated-G-Mean loss.

    Set-level (not averaged); the product form aggressively penalizes false
    negatives.
    """
    _check(y_hat, y)
    if m0 < 1 or m1 < 1:
        raise ValueError("GMN needs at least one example of each class")
    # No clamp here: the loss has no logs, and unclamped inputs make the
    # reduction to the counting G-Mean exact on binary predictions.
    cm = approx_cm(np.asarray(y_hat, dtype=float), y)
    return 1.0 - np.sqrt(cm.tn_apx * cm.tp_apx / (m0 * m1))


def gmn_grad(y_hat, y, m0: int, m1: int) -> np.ndarray:
    """dJ_GMN/dy_hat_i = -(G_apx/2) * (y_i/TP_apx - (1-y_i)/TN_apx).

    Negative on positive-class examples, positive on negative-class ones;
    examples couple only through the set-level sums TP_apx and TN_apx.
    """
    _check(y_hat, y)
    if m0 < 1 or m1 < 1:
        raise ValueError("GMN needs at least one example of each class")
    yh = np.asarray(y_hat, dtype=float)
    t = np.asarray(y, dtype=float)
    cm = approx_cm(yh, t)
    g_apx = np.sqrt(cm.tn_apx * cm.tp_apx / (m0 * m1))
    # Network outputs are clamped to (0, 1) upstream, so the approximated
    # cells stay positive there; the floor only guards raw binary input.
    tp = max(cm.tp_apx, 1e-12)
    tn = max(cm.tn_apx, 1e-12)
    return -0.5 * g_apx * (t / tp - (1.0 - t) / tn)


def loss_and_grad(kind: LossKind, z, y, m0: int, m1: int):
    """Loss value and gradient with respect to the (z-transformed) outputs."""
    if kind.variant == "bce":
        return bce_loss(z, y), bce_grad(z, y)
    return gmn_loss(z, y, m0, m1), gmn_grad(z, y, m0, m1)
