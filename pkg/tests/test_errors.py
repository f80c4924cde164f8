"""Tests for the error hierarchy."""

from __future__ import annotations

import pytest

from hearloop._errors import (
    ArchitectureMismatch,
    DataError,
    HearloopError,
    InvalidConfig,
    InvalidPath,
    NumericalError,
    ShapeMismatch,
    UnknownPreset,
)


class TestBaseError:
    """HearloopError carries optional op and target context."""

    def test_default_attributes(self) -> None:
        e = HearloopError("boom")
        assert e.op is None
        assert e.target is None
        assert str(e) == "boom"

    def test_context_in_str(self) -> None:
        e = HearloopError("boom", op="train", target="enc1.kernel")
        assert str(e) == "boom | op='train' | target='enc1.kernel'"

    def test_repr(self) -> None:
        assert repr(HearloopError("boom", op="x")) == "HearloopError('boom', op='x')"

    @pytest.mark.parametrize(
        "cls",
        [ShapeMismatch, InvalidConfig, UnknownPreset, ArchitectureMismatch, DataError, NumericalError, InvalidPath],
    )
    def test_subclasses(self, cls: type[HearloopError]) -> None:
        assert issubclass(cls, HearloopError)
        with pytest.raises(HearloopError):
            raise cls("x")


class TestShapeMismatch:
    def test_expected_and_actual(self) -> None:
        e = ShapeMismatch("bad length", op="forward", target="time", expected="multiple of 256", actual=1000)
        assert e.expected == "multiple of 256"
        assert e.actual == 1000
        assert "expected='multiple of 256'" in str(e)
        assert "actual=1000" in str(e)


class TestUnknownPreset:
    def test_available_names(self) -> None:
        e = UnknownPreset("nope", target="L_q", available=["L_r", "L_rR"])
        assert e.available == ("L_r", "L_rR")
        assert e.target == "L_q"


class TestNumericalError:
    """Non-finite losses report the item and the term values."""

    def test_item_and_breakdown(self) -> None:
        e = NumericalError("non-finite loss", op="train", item=3, breakdown={"l_r": float("nan"), "l_X": 0.5})
        assert e.item == 3
        assert e.breakdown["l_X"] == 0.5
        text = str(e)
        assert "item=3" in text
        assert "l_r=nan" in text

    def test_empty_breakdown(self) -> None:
        e = NumericalError("bad gradient", target="w")
        assert e.breakdown == {}
        assert "breakdown" not in str(e)
