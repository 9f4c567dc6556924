"""One-hidden-layer MLP with Leaky ReLU hidden units and the asymmetric
sigmoid output, trained full-batch with Adam on the weights and plain
gradient descent on the slope parameter beta.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .activation import (
    AstraParams,
    astra_backward,
    astra_forward,
    clamp_unit,
    slope_grad_beta,
    threshold_grad_b,
    z_transform,
    z_transform_backward,
)
from .losses import LossKind, loss_and_grad

LEAKY_SLOPE = 0.3

ADAM_BETA1 = 0.9
ADAM_BETA2 = 0.999
ADAM_EPS = 1e-8


def hidden_width(n_x: int, n_y: int = 1) -> int:
    """Architecture rule: n_h = ceil((n_x + n_y) / 2)."""
    return math.ceil((n_x + n_y) / 2)


@dataclass
class AdamState:
    """First/second moment accumulators and a shared step counter."""

    m: dict
    v: dict
    t: int = 0

    @classmethod
    def for_shapes(cls, params: dict) -> "AdamState":
        return cls(
            m={k: np.zeros_like(p) for k, p in params.items()},
            v={k: np.zeros_like(p) for k, p in params.items()},
            t=0,
        )


@dataclass
class ForwardTrace:
    inputs: np.ndarray
    hidden_pre: np.ndarray
    hidden_act: np.ndarray
    out_pre: np.ndarray
    y_hat: np.ndarray
    z: np.ndarray


@dataclass
class Mlp:
    w1: np.ndarray          # (n_h, n_x)
    b1: np.ndarray          # (n_h,)
    w2: np.ndarray          # (n_h,)
    b2: float
    astra: AstraParams
    adam: AdamState
    seed: int

    @property
    def n_x(self) -> int:
        return self.w1.shape[1]

    @property
    def n_h(self) -> int:
        return self.w1.shape[0]

    def params(self) -> dict:
        return {"w1": self.w1, "b1": self.b1, "w2": self.w2,
                "b2": np.array([self.b2])}

    def copy(self) -> "Mlp":
        return Mlp(
            w1=self.w1.copy(), b1=self.b1.copy(), w2=self.w2.copy(),
            b2=self.b2,
            astra=AstraParams(**vars(self.astra)),
            adam=AdamState(
                m={k: v.copy() for k, v in self.adam.m.items()},
                v={k: v.copy() for k, v in self.adam.v.items()},
                t=self.adam.t,
            ),
            seed=self.seed,
        )


def init_mlp(n_x: int, n_h: int, seed: int,
             astra: AstraParams | None = None) -> Mlp:
    """He-normal hidden weights, Glorot-uniform output weights, zero biases.

    Deterministic for a given seed.
    """
    if n_x < 1 or n_h < 1:
        raise ValueError("layer sizes must be >= 1")
    rng = np.random.default_rng(seed)
    w1 = rng.normal(0.0, math.sqrt(2.0 / n_x), size=(n_h, n_x))
    limit = math.sqrt(6.0 / (n_h + 1))
    w2 = rng.uniform(-limit, limit, size=n_h)
    model = Mlp(
        w1=w1,
        b1=np.zeros(n_h),
        w2=w2,
        b2=0.0,
        astra=astra if astra is not None else AstraParams.frozen(),
        adam=AdamState(m={}, v={}, t=0),
        seed=int(seed) if np.isscalar(seed) else list(seed),
    )
    model.adam = AdamState.for_shapes(model.params())
    return model


def forward(model: Mlp, X: np.ndarray) -> ForwardTrace:
    """Full-batch forward pass through hidden layer, activation and z-transform."""
    X = np.asarray(X, dtype=float)
    if X.ndim != 2 or X.shape[1] != model.n_x:
        raise ValueError(f"expected shape (*, {model.n_x}), got {X.shape}")
    hidden_pre = X @ model.w1.T + model.b1
    hidden_act = np.where(hidden_pre > 0, hidden_pre, LEAKY_SLOPE * hidden_pre)
    out_pre = hidden_act @ model.w2 + model.b2
    y_hat = clamp_unit(astra_forward(out_pre, model.astra.b))
    z = clamp_unit(z_transform(y_hat, model.astra.tau))
    return ForwardTrace(inputs=X, hidden_pre=hidden_pre, hidden_act=hidden_act,
                        out_pre=out_pre, y_hat=y_hat, z=z)


class NonFiniteGradientError(RuntimeError):
    pass


def _adam_step(model: Mlp, grads: dict, eta: float) -> None:
    st = model.adam
    st.t += 1
    params = model.params()
    for k, g in grads.items():
        st.m[k] = ADAM_BETA1 * st.m[k] + (1 - ADAM_BETA1) * g
        st.v[k] = ADAM_BETA2 * st.v[k] + (1 - ADAM_BETA2) * g * g
        m_hat = st.m[k] / (1 - ADAM_BETA1 ** st.t)
        v_hat = st.v[k] / (1 - ADAM_BETA2 ** st.t)
        params[k] -= eta * m_hat / (np.sqrt(v_hat) + ADAM_EPS)
    model.b2 = float(params["b2"][0])


def backward_and_step(model: Mlp, trace: ForwardTrace, y, kind: LossKind,
                      eta: float, eta_b: float, m0: int | None = None,
                      m1: int | None = None):
    """One full-batch training step.

    Backpropagates the chosen loss through the z-transform and the output
    activation, applies an Adam step to the weights and (when the slope is
    trainable) a plain gradient step to beta, then re-derives b and tau.
    Returns (pre-step loss value, grad wrt beta).
    """
    t = np.asarray(y, dtype=float)
    if m0 is None:
        m0 = int(np.sum(t == 0))
    if m1 is None:
        m1 = int(np.sum(t == 1))
    ap = model.astra

    loss_value, dj_dz = loss_and_grad(kind, trace.z, t, m0, m1)
    dz_dy, dz_dtau = z_transform_backward(trace.y_hat, ap.tau)
    dy_dx, dy_db = astra_backward(trace.out_pre, ap.b)

    dj_dx = dj_dz * dz_dy * dy_dx                     # (n,)
    gw2 = trace.hidden_act.T @ dj_dx                  # (n_h,)
    gb2 = float(np.sum(dj_dx))
    dhidden = np.outer(dj_dx, model.w2)
    dhidden *= np.where(trace.hidden_pre > 0, 1.0, LEAKY_SLOPE)
    gw1 = dhidden.T @ trace.inputs                    # (n_h, n_x)
    gb1 = dhidden.sum(axis=0)

    if ap.trainable:
        dtau_db = threshold_grad_b(ap.b)
        dj_db = float(np.sum(dj_dz * (dz_dy * dy_db + dz_dtau * dtau_db)))
        grad_beta = dj_db * slope_grad_beta(ap.beta)
    else:
        grad_beta = 0.0

    grads = {"w1": gw1, "b1": gb1, "w2": gw2, "b2": np.array([gb2])}
    for k, g in grads.items():
        if not np.all(np.isfinite(g)):
            raise NonFiniteGradientError(f"non-finite gradient in {k}")
    if not np.isfinite(grad_beta):
        raise NonFiniteGradientError("non-finite gradient in beta")

    _adam_step(model, grads, eta)
    ap.step_beta(grad_beta, eta_b)
    for k, p in model.params().items():
        if not np.all(np.isfinite(p)):
            raise NonFiniteGradientError(f"non-finite parameter {k} after update")
    return float(loss_value), grad_beta


def predict_labels(model: Mlp, X: np.ndarray) -> np.ndarray:
    """Binary labels: 1 iff the preactivation is >= 0.

    Equivalent to y_hat >= tau(b) and to z >= 0.5 (boundary maps to class 1).
    """
    trace = forward(model, X)
    return (trace.out_pre >= 0.0).astype(int)


def to_checkpoint(model: Mlp) -> dict:
    """Self-describing, bit-exact checkpoint payload."""
    ap = model.astra
    return {
        "n_x": model.n_x,
        "n_h": model.n_h,
        "seed": model.seed,
        "w1": model.w1.tolist(),
        "b1": model.b1.tolist(),
        "w2": model.w2.tolist(),
        "b2": model.b2,
        "astra": {"beta": ap.beta, "b": ap.b, "tau": ap.tau,
                  "eta_b": ap.eta_b, "trainable": ap.trainable},
        "adam": {
            "t": model.adam.t,
            "m": {k: v.tolist() for k, v in model.adam.m.items()},
            "v": {k: v.tolist() for k, v in model.adam.v.items()},
        },
    }


def from_checkpoint(payload: dict) -> Mlp:
    ap = AstraParams(**payload["astra"])
    return Mlp(
        w1=np.array(payload["w1"], dtype=float),
        b1=np.array(payload["b1"], dtype=float),
        w2=np.array(payload["w2"], dtype=float),
        b2=float(payload["b2"]),
        astra=ap,
        adam=AdamState(
            m={k: np.array(v, dtype=float) for k, v in payload["adam"]["m"].items()},
            v={k: np.array(v, dtype=float) for k, v in payload["adam"]["v"].items()},
            t=payload["adam"]["t"],
        ),
        seed=payload["seed"],
    )


def save_checkpoint(model: Mlp, path) -> None:
    with open(path, "w") as fh:
        json.dump(to_checkpoint(model), fh)


def load_checkpoint(path) -> Mlp:
    with open(path) as fh:
        return from_checkpoint(json.load(fh))
