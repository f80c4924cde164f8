"""Adam optimizer with bias-corrected moment estimates."""

from __future__ import annotations

import dataclasses
from typing import TYPE_CHECKING

import numpy as np

from hearloop._errors import InvalidConfig, NumericalError, ShapeMismatch

if TYPE_CHECKING:
    from collections.abc import Mapping

    from hearloop._types import FloatArray
    from hearloop.adcore._array import Array


@dataclasses.dataclass
class AdamState:
    """Mutable optimizer state.

    :param lr: Learning rate.
    :param beta1: Decay of the first-moment estimate.
    :param beta2: Decay of the second-moment estimate.
    :param eps: Denominator floor.
    :param step: Number of updates applied so far.
    """

    lr: float = 1e-4
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    step: int = 0
    m: dict[str, FloatArray] = dataclasses.field(default_factory=dict, repr=False)
    v: dict[str, FloatArray] = dataclasses.field(default_factory=dict, repr=False)

    def validate(self) -> None:
        """:raises InvalidConfig: If a hyper-parameter is out of range."""
        if not self.lr > 0:
            raise InvalidConfig(f"learning rate must be > 0, got {self.lr}", op="adam", target="lr")
        for name in ("beta1", "beta2"):
            value = getattr(self, name)
            if not 0.0 <= value < 1.0:
                raise InvalidConfig(f"{name} must be in [0, 1), got {value}", op="adam", target=name)
        if not self.eps > 0:
            raise InvalidConfig(f"eps must be > 0, got {self.eps}", op="adam", target="eps")


def adam_step(
    params: Mapping[str, Array],
    state: AdamState,
    grads: Mapping[str, FloatArray] | None = None,
) -> Mapping[str, Array]:
    """Apply one Adam update to *params* in place and return them.

    Gradients are read from each parameter's ``grad`` buffer unless *grads*
    is given. All gradients are checked before any parameter changes.

    :raises NumericalError: If a gradient contains NaN or inf, naming the parameter.
    :raises ShapeMismatch: If a gradient's shape differs from its parameter's.
    """
    resolved: dict[str, FloatArray] = {}
    for name, param in params.items():
        g = grads[name] if grads is not None else param.grad
        if g is None:
            g = np.zeros_like(param.values)
        if g.shape != param.values.shape:
            raise ShapeMismatch(
                "gradient shape differs from parameter",
                op="adam_step",
                target=name,
                expected=param.shape,
                actual=g.shape,
            )
        if not np.all(np.isfinite(g)):
            raise NumericalError("non-finite gradient", op="adam_step", target=name)
        resolved[name] = g

    state.step += 1
    t = state.step
    correction1 = 1.0 - state.beta1**t
    correction2 = 1.0 - state.beta2**t
    for name, param in params.items():
        g = resolved[name]
        m = state.m.get(name)
        v = state.v.get(name)
        if m is None or v is None:
            m = state.m[name] = np.zeros_like(param.values)
            v = state.v[name] = np.zeros_like(param.values)
        m *= state.beta1
        m += (1.0 - state.beta1) * g
        v *= state.beta2
        v += (1.0 - state.beta2) * g * g
        m_hat = m / correction1
        v_hat = v / correction2
        param.values -= state.lr * m_hat / (np.sqrt(v_hat) + state.eps)
    return params
