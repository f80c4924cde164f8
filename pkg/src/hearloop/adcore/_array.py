"""Array and Tape: the recording half of the reverse-mode engine."""

from __future__ import annotations

import dataclasses
import threading
from typing import TYPE_CHECKING

import numpy as np

from hearloop._errors import HearloopError, ShapeMismatch

if TYPE_CHECKING:
    from collections.abc import Callable, Iterable, Iterator, Sequence
    from types import TracebackType

    import numpy.typing as npt

    from hearloop._types import FloatArray

    BackwardRule = Callable[[FloatArray], Sequence["FloatArray | None"]]

_local = threading.local()


def _tape_stack() -> list[Tape]:
    stack: list[Tape] | None = getattr(_local, "stack", None)
    if stack is None:
        stack = []
        _local.stack = stack
    return stack


def active_tape() -> Tape | None:
    """Return the innermost tape active on this thread, or ``None``."""
    stack = _tape_stack()
    return stack[-1] if stack else None


class Array:
    """A float64 array that can take part in reverse-mode differentiation.

    Leaves created with ``requires_grad=True`` own a gradient buffer of the
    same shape, initialised to zeros. Arrays produced by recorded operations
    are intermediates: they carry no buffer and receive gradients only
    transiently during :meth:`Tape.backward`.

    :param values: Anything :func:`numpy.asarray` accepts.
    :param requires_grad: Whether gradients should flow to this leaf.
    :param name: Optional label, used in diagnostics.
    """

    __slots__ = ("values", "requires_grad", "grad", "name", "_tape")
    __array_priority__ = 1000

    def __init__(self, values: npt.ArrayLike, *, requires_grad: bool = False, name: str | None = None) -> None:
        self.values: FloatArray = np.array(values, dtype=np.float64)
        self.requires_grad = requires_grad
        self.grad: FloatArray | None = np.zeros_like(self.values) if requires_grad else None
        self.name = name
        self._tape: Tape | None = None

    @classmethod
    def _constant(cls, values: FloatArray) -> Array:
        out = cls.__new__(cls)
        out.values = values
        out.requires_grad = False
        out.grad = None
        out.name = None
        out._tape = None
        return out

    @classmethod
    def _intermediate(cls, values: FloatArray, tape: Tape) -> Array:
        out = cls.__new__(cls)
        out.values = values
        out.requires_grad = True
        out.grad = None
        out.name = None
        out._tape = tape
        return out

    # region: introspection
    @property
    def shape(self) -> tuple[int, ...]:
        return tuple(self.values.shape)

    @property
    def ndim(self) -> int:
        return int(self.values.ndim)

    @property
    def size(self) -> int:
        return int(self.values.size)

    @property
    def is_leaf(self) -> bool:
        return self._tape is None

    def numpy(self) -> FloatArray:
        """Return the underlying values (not a copy)."""
        return self.values

    def item(self) -> float:
        if self.values.size != 1:
            raise ShapeMismatch("item() needs a single-element array", op="item", expected=1, actual=self.size)
        return float(self.values.reshape(()))

    def __len__(self) -> int:
        return int(self.values.shape[0])

    def __repr__(self) -> str:
        label = f", name={self.name!r}" if self.name else ""
        return f"Array(shape={self.shape}, requires_grad={self.requires_grad}{label})"

    # endregion

    # region: operators
    def __add__(self, other: Array | float) -> Array:
        return _ops.add(self, other)

    def __radd__(self, other: float) -> Array:
        return _ops.add(other, self)

    def __sub__(self, other: Array | float) -> Array:
        return _ops.sub(self, other)

    def __rsub__(self, other: float) -> Array:
        return _ops.sub(other, self)

    def __mul__(self, other: Array | float) -> Array:
        return _ops.mul(self, other)

    def __rmul__(self, other: float) -> Array:
        return _ops.mul(other, self)

    def __truediv__(self, other: Array | float) -> Array:
        return _ops.div(self, other)

    def __neg__(self) -> Array:
        return _ops.scale(self, -1.0)

    def __getitem__(self, index: object) -> Array:
        return _ops.getitem(self, index)

    def backward(self) -> None:
        """Shorthand for :func:`backward` on this array."""
        backward(self)

    # endregion


@dataclasses.dataclass(frozen=True)
class TapeRecord:
    """One recorded operation.

    :param op: Operation name, for diagnostics.
    :param inputs: The operation's array inputs, in argument order.
    :param output: The array the operation produced.
    :param rule: Maps the output gradient to one gradient per input (``None`` to skip).
    """

    op: str
    inputs: tuple[Array, ...]
    output: Array
    rule: BackwardRule


class Tape:
    """Ordered record of differentiable operations.

    Use as a context manager; operations executed inside the ``with`` block
    whose inputs require gradients are appended in execution order, so the
    record list is always topologically sorted. Tapes are per-thread and may
    be nested (the innermost one records).

    Gradients accumulate into leaf buffers across :meth:`backward` calls until
    :func:`zero_grad` resets them.
    """

    def __init__(self) -> None:
        self._records: list[TapeRecord] = []

    def __enter__(self) -> Tape:
        _tape_stack().append(self)
        return self

    def __exit__(
        self,
        exc_type: type[BaseException] | None,
        exc_val: BaseException | None,
        exc_tb: TracebackType | None,
    ) -> None:
        stack = _tape_stack()
        if stack and stack[-1] is self:
            stack.pop()

    def __len__(self) -> int:
        return len(self._records)

    def __iter__(self) -> Iterator[TapeRecord]:
        return iter(self._records)

    @property
    def records(self) -> tuple[TapeRecord, ...]:
        return tuple(self._records)

    def record(self, op: str, inputs: Sequence[Array], values: FloatArray, rule: BackwardRule) -> Array:
        """Append an operation and return its (intermediate) output array."""
        out = Array._intermediate(values, self)
        self._records.append(TapeRecord(op=op, inputs=tuple(inputs), output=out, rule=rule))
        return out

    def leaves(self) -> list[Array]:
        """Distinct gradient-requiring leaves that feed any recorded operation."""
        seen: dict[int, Array] = {}
        for rec in self._records:
            for inp in rec.inputs:
                if inp.requires_grad and inp.is_leaf:
                    seen.setdefault(id(inp), inp)
        return list(seen.values())

    def backward(self, output: Array) -> None:
        """Accumulate d(output)/d(leaf) into every reachable leaf's ``grad``.

        :raises ShapeMismatch: If *output* is not a single-element array.
        """
        if output.size != 1:
            raise ShapeMismatch(
                "backward needs a scalar output", op="backward", target="output", expected=1, actual=output.shape
            )
        if output.is_leaf:
            if output.grad is not None:
                output.grad += 1.0
            return
        pending: dict[int, FloatArray] = {id(output): np.ones_like(output.values)}
        for rec in reversed(self._records):
            g_out = pending.pop(id(rec.output), None)
            if g_out is None:
                continue
            for inp, g_in in zip(rec.inputs, rec.rule(g_out)):
                if g_in is None or not inp.requires_grad:
                    continue
                if inp.is_leaf:
                    assert inp.grad is not None
                    inp.grad += g_in
                elif id(inp) in pending:
                    pending[id(inp)] = pending[id(inp)] + g_in
                else:
                    pending[id(inp)] = np.array(g_in, dtype=np.float64)


def backward(output: Array) -> None:
    """Back-propagate from a scalar *output* through the tape that produced it.

    Repeated calls accumulate into leaf gradients.

    :raises ShapeMismatch: If *output* is not scalar.
    :raises HearloopError: If *output* was not produced under a tape.
    """
    if output._tape is not None:
        output._tape.backward(output)
    elif output.requires_grad:
        Tape().backward(output)
    else:
        raise HearloopError("output was not recorded on a tape", op="backward")


def zero_grad(arrays: Iterable[Array]) -> None:
    """Reset the gradient buffers of *arrays* to zero."""
    for arr in arrays:
        if arr.grad is not None:
            arr.grad.fill(0.0)


def as_array(value: Array | npt.ArrayLike) -> Array:
    """Wrap constants; pass :class:`Array` instances through unchanged."""
    return value if isinstance(value, Array) else Array(value)


from hearloop.adcore import _ops  # noqa: E402
