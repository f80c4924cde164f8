"""Tests for the Adam optimizer."""

from __future__ import annotations

import numpy as np
import pytest

from hearloop import adcore as ad
from hearloop._errors import InvalidConfig, NumericalError, ShapeMismatch


class TestAdamStep:
    """Bias-corrected updates applied in place."""

    def test_zero_gradient_leaves_params_unchanged(self) -> None:
        w = ad.Array([1.0, -2.0], requires_grad=True)
        ad.adam_step({"w": w}, ad.AdamState(lr=1e-2))
        np.testing.assert_array_equal(w.values, [1.0, -2.0])

    def test_first_step_moves_by_learning_rate(self) -> None:
        w = ad.Array([0.0, 0.0], requires_grad=True)
        ad.adam_step({"w": w}, ad.AdamState(lr=1e-3), grads={"w": np.array([0.5, -4.0])})
        np.testing.assert_allclose(w.values, [-1e-3, 1e-3], rtol=1e-6)

    def test_step_counter(self) -> None:
        state = ad.AdamState()
        w = ad.Array([1.0], requires_grad=True)
        ad.adam_step({"w": w}, state)
        ad.adam_step({"w": w}, state)
        assert state.step == 2
        assert set(state.m) == {"w"}

    def test_reads_grad_buffers(self) -> None:
        w = ad.Array([3.0], requires_grad=True)
        with ad.Tape():
            loss = ad.sum(ad.square(w))
        ad.backward(loss)
        ad.adam_step({"w": w}, ad.AdamState(lr=0.1))
        assert w.values[0] == pytest.approx(2.9)

    def test_nan_gradient_names_parameter(self) -> None:
        w = ad.Array([1.0], requires_grad=True)
        state = ad.AdamState()
        with pytest.raises(NumericalError) as exc_info:
            ad.adam_step({"enc0.w": w}, state, grads={"enc0.w": np.array([np.nan])})
        assert exc_info.value.target == "enc0.w"
        assert state.step == 0
        assert w.values[0] == 1.0

    def test_gradient_shape_checked(self) -> None:
        w = ad.Array([1.0, 2.0], requires_grad=True)
        with pytest.raises(ShapeMismatch):
            ad.adam_step({"w": w}, ad.AdamState(), grads={"w": np.zeros(3)})

    def test_descends_quadratic(self) -> None:
        w = ad.Array([5.0, -3.0], requires_grad=True)
        state = ad.AdamState(lr=0.1)
        for _ in range(300):
            ad.zero_grad([w])
            with ad.Tape():
                loss = ad.sum(ad.square(w))
            ad.backward(loss)
            ad.adam_step({"w": w}, state)
        assert np.max(np.abs(w.values)) < 0.5


class TestAdamState:
    @pytest.mark.parametrize(
        "kwargs", [{"lr": 0.0}, {"beta1": 1.0}, {"beta2": -0.1}, {"eps": 0.0}], ids=["lr", "beta1", "beta2", "eps"]
    )
    def test_validate_rejects(self, kwargs: dict[str, float]) -> None:
        with pytest.raises(InvalidConfig):
            ad.AdamState(**kwargs).validate()  # type: ignore[arg-type]

    def test_defaults_validate(self) -> None:
        ad.AdamState().validate()
