"""Normalized error hierarchy for hearloop."""

from __future__ import annotations

from typing import TYPE_CHECKING

if TYPE_CHECKING:
    from collections.abc import Mapping, Sequence


class HearloopError(Exception):
    """Base class for all hearloop errors.

    :param message: Human-readable error description.
    :param op: The operation or component that failed, if known.
    :param target: The offending object (dimension, parameter, preset, file), if any.
    """

    def __init__(self, message: str = "", *, op: str | None = None, target: str | None = None) -> None:
        self.op = op
        self.target = target
        super().__init__(message)

    def _context(self) -> list[str]:
        parts: list[str] = []
        if self.op is not None:
            parts.append(f"op={self.op!r}")
        if self.target is not None:
            parts.append(f"target={self.target!r}")
        return parts

    def __str__(self) -> str:
        parts = [super().__str__(), *self._context()]
        return " | ".join(parts) if len(parts) > 1 else parts[0]

    def __repr__(self) -> str:
        cls = type(self).__name__
        args = [repr(self.args[0] if self.args else ""), *self._context()]
        return f"{cls}({', '.join(args)})"


class ShapeMismatch(HearloopError):
    """Raised when an array shape or signal length violates an operation's contract.

    ``target`` names the offending dimension.

    :param expected: Description of the expected size (e.g. ``"multiple of 256"``).
    :param actual: The size that was received.
    """

    def __init__(
        self,
        message: str = "",
        *,
        op: str | None = None,
        target: str | None = None,
        expected: object = None,
        actual: object = None,
    ) -> None:
        self.expected = expected
        self.actual = actual
        super().__init__(message, op=op, target=target)

    def _context(self) -> list[str]:
        parts = super()._context()
        if self.expected is not None:
            parts.append(f"expected={self.expected!r}")
        if self.actual is not None:
            parts.append(f"actual={self.actual!r}")
        return parts


class InvalidConfig(HearloopError):
    """Raised for configuration values that fail validation or unknown config keys."""


class UnknownPreset(HearloopError):
    """Raised when a named profile or loss preset is not registered.

    :param available: Names that are registered.
    """

    def __init__(
        self,
        message: str = "",
        *,
        op: str | None = None,
        target: str | None = None,
        available: Sequence[str] = (),
    ) -> None:
        self.available = tuple(available)
        super().__init__(message, op=op, target=target)


class ArchitectureMismatch(HearloopError):
    """Raised when a checkpoint does not match the requested architecture."""


class DataError(HearloopError):
    """Raised for unreadable, empty or malformed input data and files."""


class NumericalError(HearloopError):
    """Raised when a loss or gradient becomes NaN or infinite.

    :param item: Dataset item index being processed, if any.
    :param breakdown: Per-term loss values at the time of failure.
    """

    def __init__(
        self,
        message: str = "",
        *,
        op: str | None = None,
        target: str | None = None,
        item: int | None = None,
        breakdown: Mapping[str, float] | None = None,
    ) -> None:
        self.item = item
        self.breakdown = dict(breakdown) if breakdown is not None else {}
        super().__init__(message, op=op, target=target)

    def _context(self) -> list[str]:
        parts = super()._context()
        if self.item is not None:
            parts.append(f"item={self.item}")
        if self.breakdown:
            terms = ", ".join(f"{k}={v:.6g}" for k, v in self.breakdown.items())
            parts.append(f"breakdown={{{terms}}}")
        return parts


class InvalidPath(HearloopError):
    """Raised for malformed output paths or paths escaping the run directory."""
