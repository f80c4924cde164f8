"""DNN-HA: strided convolutional encoder-decoder that processes waveforms end to end."""

from __future__ import annotations

import dataclasses
import math
from typing import TYPE_CHECKING, Literal

import numpy as np

from hearloop import adcore as ad
from hearloop._errors import InvalidConfig, ShapeMismatch

if TYPE_CHECKING:
    from collections.abc import Iterator, Mapping

    import numpy.typing as npt

    from hearloop._types import FloatArray

FinalActivation = Literal["identity", "tanh"]

PRELU_INIT = 0.25

ARCHITECTURE_PRESETS: dict[str, tuple[int, ...]] = {
    "16-layer": (16, 32, 32, 64, 64, 128, 128, 256),
    "12-layer": (16, 32, 32, 64, 64, 128),
    "10-layer": (16, 32, 32, 64, 64),
}


@dataclasses.dataclass(frozen=True)
class ArchSpec:
    """Encoder-decoder layout.

    Encoder layer ``i`` maps ``C[i-1] -> C[i]`` channels (``C[0] = 1``) and
    halves time. Decoder layer ``i`` mirrors it: the deepest takes the
    encoder output alone, the others take their predecessor's output
    concatenated with encoder layer ``i``'s output, and each doubles time.
    Every layer but the last is followed by a per-channel PReLU.

    :param encoder_filters: Output channels of each encoder layer.
    :param kernel_len: Kernel length of every layer.
    :param stride: Down/upsampling factor of every layer.
    :param skip: Skip-connection style; only ``"concat"`` is supported.
    :param final_activation: ``"identity"`` or ``"tanh"`` on the output layer.
    :param residual: Add the input to the network output; the output layer then
        starts at zero so an untrained model is the identity.
    """

    encoder_filters: tuple[int, ...] = ARCHITECTURE_PRESETS["16-layer"]
    kernel_len: int = 32
    stride: int = 2
    skip: str = "concat"
    final_activation: FinalActivation = "identity"
    residual: bool = False

    def __post_init__(self) -> None:
        object.__setattr__(self, "encoder_filters", tuple(int(c) for c in self.encoder_filters))

    @property
    def depth(self) -> int:
        return len(self.encoder_filters)

    @property
    def granularity(self) -> int:
        """Input lengths must be a multiple of this."""
        return int(self.stride**self.depth)

    @property
    def channels(self) -> tuple[int, ...]:
        return (1, *self.encoder_filters)

    def validate(self) -> None:
        """:raises InvalidConfig: If the layout is not buildable."""
        if self.depth < 2:
            raise InvalidConfig(f"need at least 2 encoder layers, got {self.depth}", op="ArchSpec", target="depth")
        if any(c < 1 for c in self.encoder_filters):
            raise InvalidConfig("filter counts must be >= 1", op="ArchSpec", target="encoder_filters")
        if self.stride < 1:
            raise InvalidConfig("stride must be >= 1", op="ArchSpec", target="stride")
        if self.kernel_len < self.stride:
            raise InvalidConfig(
                f"kernel_len ({self.kernel_len}) must be >= stride ({self.stride})", op="ArchSpec", target="kernel_len"
            )
        if self.skip != "concat":
            raise InvalidConfig(f"unsupported skip connection {self.skip!r}", op="ArchSpec", target="skip")
        if self.final_activation not in ("identity", "tanh"):
            raise InvalidConfig(
                f"unsupported final activation {self.final_activation!r}", op="ArchSpec", target="final_activation"
            )

    def layer_shapes(self) -> dict[str, tuple[int, ...]]:
        """Parameter name -> shape, in canonical order."""
        c, k = self.channels, self.kernel_len
        shapes: dict[str, tuple[int, ...]] = {}
        for i in range(1, self.depth + 1):
            shapes[f"enc{i}.kernel"] = (c[i], c[i - 1], k)
            shapes[f"enc{i}.bias"] = (c[i],)
            shapes[f"enc{i}.alpha"] = (c[i], 1)
        for i in range(self.depth, 0, -1):
            c_in = c[i] if i == self.depth else 2 * c[i]
            shapes[f"dec{i}.kernel"] = (c_in, c[i - 1], k)
            shapes[f"dec{i}.bias"] = (c[i - 1],)
            if i > 1:
                shapes[f"dec{i}.alpha"] = (c[i - 1], 1)
        return shapes

    def to_dict(self) -> dict[str, object]:
        data = dataclasses.asdict(self)
        data["encoder_filters"] = list(self.encoder_filters)
        return data

    @classmethod
    def from_dict(cls, data: Mapping[str, object]) -> ArchSpec:
        """:raises InvalidConfig: On unknown keys or an invalid layout."""
        allowed = {f.name for f in dataclasses.fields(cls)}
        unknown = sorted(set(data) - allowed)
        if unknown:
            raise InvalidConfig(
                f"Unknown keys {unknown} in arch. Allowed keys: {sorted(allowed)}", op="from_dict", target="arch"
            )
        kwargs = dict(data)
        filters = kwargs.get("encoder_filters")
        if isinstance(filters, str):
            if filters not in ARCHITECTURE_PRESETS:
                raise InvalidConfig(
                    f"Unknown architecture preset {filters!r}. Available: {sorted(ARCHITECTURE_PRESETS)}",
                    op="from_dict",
                    target="encoder_filters",
                )
            kwargs["encoder_filters"] = ARCHITECTURE_PRESETS[filters]
        elif filters is not None:
            kwargs["encoder_filters"] = tuple(filters)  # type: ignore[call-overload]
        try:
            spec = cls(**kwargs)  # type: ignore[arg-type]
        except (TypeError, ValueError) as exc:
            raise InvalidConfig(f"invalid arch: {exc}", op="from_dict", target="arch") from None
        spec.validate()
        return spec


class ModelParams:
    """Named trainable arrays of one DNN-HA, in canonical layer order.

    :param spec: The architecture the arrays belong to.
    :param arrays: Mapping of parameter name to array; names and shapes must
        match :meth:`ArchSpec.layer_shapes`.
    :raises ShapeMismatch: If a name is missing or a shape differs.
    """

    def __init__(self, spec: ArchSpec, arrays: Mapping[str, ad.Array]) -> None:
        expected = spec.layer_shapes()
        if set(arrays) != set(expected):
            missing = sorted(set(expected) - set(arrays))
            extra = sorted(set(arrays) - set(expected))
            raise ShapeMismatch(
                f"parameter names do not match the architecture (missing={missing}, unexpected={extra})",
                op="ModelParams",
                target="parameters",
            )
        for name, shape in expected.items():
            if arrays[name].shape != shape:
                raise ShapeMismatch(
                    "parameter shape does not match the architecture",
                    op="ModelParams",
                    target=name,
                    expected=shape,
                    actual=arrays[name].shape,
                )
        self.spec = spec
        self.arrays: dict[str, ad.Array] = {name: arrays[name] for name in expected}

    def __getitem__(self, name: str) -> ad.Array:
        return self.arrays[name]

    def __iter__(self) -> Iterator[str]:
        return iter(self.arrays)

    def __len__(self) -> int:
        return len(self.arrays)

    def items(self) -> Iterator[tuple[str, ad.Array]]:
        return iter(self.arrays.items())

    def count(self) -> int:
        """Total number of scalar parameters."""
        return sum(arr.size for arr in self.arrays.values())

    def all_finite(self) -> bool:
        return all(bool(np.all(np.isfinite(arr.values))) for arr in self.arrays.values())

    def snapshot(self) -> dict[str, FloatArray]:
        """Copies of the current values."""
        return {name: arr.values.copy() for name, arr in self.arrays.items()}

    def __repr__(self) -> str:
        return f"ModelParams(layers={2 * self.spec.depth}, count={self.count()})"


def build(spec: ArchSpec, seed: int = 0) -> ModelParams:
    """Initialise parameters for *spec*.

    Kernels are drawn uniformly from ``+-1/sqrt(fan_in)`` (``fan_in`` = input
    channels x kernel length) in canonical order from one seeded generator;
    biases start at 0 and PReLU slopes at 0.25. With ``spec.residual`` the
    output layer's kernel starts at 0.

    :raises InvalidConfig: If *spec* is invalid.
    """
    spec.validate()
    rng = np.random.default_rng(seed)
    arrays: dict[str, ad.Array] = {}
    for name, shape in spec.layer_shapes().items():
        kind = name.rsplit(".", 1)[1]
        if kind == "kernel":
            bound = 1.0 / math.sqrt(shape[0 if name.startswith("dec") else 1] * shape[2])
            values = rng.uniform(-bound, bound, size=shape)
            if spec.residual and name == "dec1.kernel":
                values = np.zeros(shape)
        elif kind == "bias":
            values = np.zeros(shape)
        else:
            values = np.full(shape, PRELU_INIT)
        arrays[name] = ad.Array(values, requires_grad=True, name=name)
    return ModelParams(spec, arrays)


def param_count(spec: ArchSpec) -> int:
    """Kernels + biases + one PReLU slope per channel of every non-output layer."""
    return sum(math.prod(shape) for shape in spec.layer_shapes().values())


def _check_multiple(op: str, n: int, multiple: int) -> None:
    if n % multiple:
        raise ShapeMismatch(
            f"input length must be a multiple of {multiple}",
            op=op,
            target="time",
            expected=f"multiple of {multiple}",
            actual=n,
        )


def forward(params: ModelParams, x: ad.Array | npt.ArrayLike) -> ad.Array:
    """Process a 1-D signal; the output has the same length.

    :raises ShapeMismatch: If ``len(x)`` is not a multiple of ``stride ** depth``.
    """
    spec = params.spec
    signal = ad.as_array(x)
    if signal.ndim != 1:
        raise ShapeMismatch("input must be 1-D", op="forward", target="rank", expected=1, actual=signal.ndim)
    n = signal.shape[0]
    _check_multiple("forward", n, spec.granularity)

    h = ad.reshape(signal, (1, n))
    skips: list[ad.Array] = []
    for i in range(1, spec.depth + 1):
        h = ad.conv1d(h, params[f"enc{i}.kernel"], params[f"enc{i}.bias"], stride=spec.stride)
        h = ad.prelu(h, params[f"enc{i}.alpha"])
        skips.append(h)
    for i in range(spec.depth, 0, -1):
        if i < spec.depth:
            h = ad.concat([h, skips[i - 1]], axis=0)
        h = ad.conv1d_transposed(h, params[f"dec{i}.kernel"], params[f"dec{i}.bias"], stride=spec.stride)
        if i > 1:
            h = ad.prelu(h, params[f"dec{i}.alpha"])
        elif spec.final_activation == "tanh":
            h = ad.tanh(h)
    out = ad.reshape(h, (n,))
    return ad.add(signal, out) if spec.residual else out


def forward_windowed(params: ModelParams, x: ad.Array | npt.ArrayLike, window: int = 2048) -> ad.Array:
    """Apply :func:`forward` to consecutive non-overlapping windows and concatenate.

    :raises ShapeMismatch: If ``len(x)`` is not a multiple of *window* or
        *window* is not a multiple of the architecture's granularity.
    """
    signal = ad.as_array(x)
    if signal.ndim != 1:
        raise ShapeMismatch("input must be 1-D", op="forward_windowed", target="rank", expected=1, actual=signal.ndim)
    _check_multiple("forward_windowed", window, params.spec.granularity)
    n = signal.shape[0]
    _check_multiple("forward_windowed", n, window)
    if n == window:
        return forward(params, signal)
    pieces = [forward(params, ad.getitem(signal, slice(s, s + window))) for s in range(0, n, window)]
    return ad.concat(pieces, axis=0)
