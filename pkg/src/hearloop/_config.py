"""Configuration model: immutable containers describing training, evaluation and runs."""

from __future__ import annotations

import dataclasses
import json
import math
from pathlib import Path
from typing import TYPE_CHECKING, Any, TypeVar

from hearloop._dnnha import ArchSpec
from hearloop._errors import DataError, InvalidConfig
from hearloop.periphery import PeripheryConfig, cf_subset_indices
from hearloop.periphery._config import _reject_unknown

if TYPE_CHECKING:
    from collections.abc import Callable, Mapping

    from hearloop._types import PathLike

_T = TypeVar("_T")


def _build(
    cls: type[_T],
    data: Mapping[str, object],
    where: str,
    converters: Mapping[str, Callable[[Any], object]] | None = None,
) -> _T:
    """Instantiate a config dataclass from parsed JSON, rejecting unknown keys."""
    _reject_unknown(data, {f.name for f in dataclasses.fields(cls)}, where)  # type: ignore[arg-type]
    kwargs: dict[str, object] = dict(data)
    for key, convert in (converters or {}).items():
        if kwargs.get(key) is not None:
            try:
                kwargs[key] = convert(kwargs[key])
            except (TypeError, ValueError) as exc:
                raise InvalidConfig(f"invalid value for {where}.{key}: {exc}", op="from_dict", target=key) from None
    try:
        return cls(**kwargs)
    except TypeError as exc:
        raise InvalidConfig(f"invalid {where} config: {exc}", op="from_dict", target=where) from None


def _float_tuple(values: Any) -> tuple[float, ...]:
    return tuple(float(v) for v in values)


def _arch(value: Any) -> ArchSpec:
    if isinstance(value, ArchSpec):
        return value
    if not isinstance(value, dict):
        raise TypeError("arch must be an object")
    return ArchSpec.from_dict(value)


@dataclasses.dataclass(frozen=True)
class TrainConfig:
    """Closed-loop training settings.

    Lengths follow the stimulus layout ``[context_left | cropped | context_right...]``
    of ``total_length`` samples; only the cropped part is processed by the
    DNN-HA, in windows of ``window`` samples.

    :param loss: Loss preset name or path to a loss JSON file.
    :param hi_profile: Impaired profile name, composite (``A+B``) or JSON path.
    :param nh_profile: Reference profile.
    :param epochs: Passes over the dataset.
    :param batch_size: Items per update; only 1 is supported.
    :param learning_rate: Adam step size.
    :param seed: Seeds initialisation, shuffling and noise.
    :param n_channels: Channels of the full CF map.
    :param cf_step: Use every ``cf_step``-th channel in the loss.
    :param level_db: Calibration level of the training sentences (dB SPL).
    :param window: DNN-HA processing window.
    :param context_left: Leading context in samples.
    :param context_right: Minimum trailing context in samples.
    :param total_length: Padded stimulus length.
    :param block_size: Periphery input block; ``total_length`` must be a multiple of it.
    :param max_items: Use at most this many corpus files.
    :param noise_snr_range: Mix white noise at a uniform random SNR from this
        ``(low, high)`` dB range into every item; ``None`` trains on clean speech.
    :param shuffle: Shuffle item order each epoch with the run seed.
    :param arch: DNN-HA architecture.
    """

    loss: str = "L_r"
    hi_profile: str = "Slope35+CS-7-0-0"
    nh_profile: str = "NH"
    epochs: int = 60
    batch_size: int = 1
    learning_rate: float = 1e-4
    seed: int = 0
    n_channels: int = 201
    cf_step: int = 10
    level_db: float = 70.0
    window: int = 2048
    context_left: int = 7936
    context_right: int = 256
    total_length: int = 81_920
    block_size: int = 16_384
    max_items: int | None = None
    noise_snr_range: tuple[float, float] | None = None
    shuffle: bool = True
    arch: ArchSpec = dataclasses.field(default_factory=ArchSpec)

    @classmethod
    def desk(cls, **overrides: Any) -> TrainConfig:
        """Small settings that finish in minutes on a desktop CPU: 21 CFs, 5 epochs, 20 sentences."""
        values: dict[str, Any] = {"epochs": 5, "max_items": 20, "n_channels": 201, "cf_step": 10}
        values.update(overrides)
        return cls(**values)

    @property
    def cropped_length(self) -> int:
        return self.total_length - self.context_left - self.context_right

    @property
    def cf_subset(self) -> tuple[int, ...]:
        return cf_subset_indices(self.n_channels, self.cf_step)

    def periphery_config(self) -> PeripheryConfig:
        return PeripheryConfig(
            context_left=self.context_left, context_right=self.context_right, block_size=self.block_size
        )

    def validate(self) -> None:
        """Check ranges and length consistency.

        :raises InvalidConfig: On the first violated constraint.
        """
        if self.epochs < 1:
            raise InvalidConfig(f"epochs must be >= 1, got {self.epochs}", op="validate", target="epochs")
        if self.batch_size != 1:
            raise InvalidConfig(
                f"only batch_size 1 is supported, got {self.batch_size}", op="validate", target="batch_size"
            )
        if not (math.isfinite(self.learning_rate) and self.learning_rate > 0):
            raise InvalidConfig("learning_rate must be > 0", op="validate", target="learning_rate")
        if self.n_channels < 2 or self.cf_step < 1:
            raise InvalidConfig("need n_channels >= 2 and cf_step >= 1", op="validate", target="cf_subset")
        if not math.isfinite(self.level_db):
            raise InvalidConfig("level_db must be finite", op="validate", target="level_db")
        if self.max_items is not None and self.max_items < 1:
            raise InvalidConfig("max_items must be >= 1", op="validate", target="max_items")
        if self.noise_snr_range is not None:
            lo, hi = self.noise_snr_range
            if not lo <= hi:
                raise InvalidConfig(f"invalid SNR range {self.noise_snr_range}", op="validate", target="noise")
        self.arch.validate()
        _check_layout(
            self.window, self.context_left, self.context_right, self.total_length, self.arch, self.block_size
        )

    def to_dict(self) -> dict[str, object]:
        data = dataclasses.asdict(self)
        data["arch"] = self.arch.to_dict()
        data["noise_snr_range"] = list(self.noise_snr_range) if self.noise_snr_range else None
        return data

    @classmethod
    def from_dict(cls, data: Mapping[str, object]) -> TrainConfig:
        """:raises InvalidConfig: On unknown keys or invalid values."""
        config = _build(cls, data, "train", {"arch": _arch, "noise_snr_range": _float_tuple})
        if config.noise_snr_range is not None and len(config.noise_snr_range) != 2:
            raise InvalidConfig("noise_snr_range must be [low, high]", op="from_dict", target="noise_snr_range")
        config.validate()
        return config


def _check_layout(window: int, left: int, right: int, total: int, arch: ArchSpec, block: int) -> None:
    if block < 1:
        raise InvalidConfig(f"block_size must be >= 1, got {block}", op="validate", target="block_size")
    if left < 0 or right < 0:
        raise InvalidConfig("context lengths must be >= 0", op="validate", target="context")
    if total % block:
        raise InvalidConfig(
            f"total_length {total} must be a multiple of the periphery block size {block}",
            op="validate",
            target="total_length",
        )
    if window < 1 or window % arch.granularity:
        raise InvalidConfig(
            f"window {window} must be a positive multiple of {arch.granularity}", op="validate", target="window"
        )
    cropped = total - left - right
    if cropped <= 0 or cropped % window:
        raise InvalidConfig(
            f"cropped length {cropped} must be a positive multiple of the window {window}",
            op="validate",
            target="context",
        )


@dataclasses.dataclass(frozen=True)
class EvalConfig:
    """Evaluation conditions.

    :param hi_profile: Impaired profile evaluated.
    :param nh_profile: Reference profile.
    :param levels: Presentation levels of the quiet level sweep (dB SPL).
    :param snrs: Speech-shaped-noise conditions (dB SNR) at ``snr_level_db``.
    :param snr_level_db: Speech level of the noise conditions.
    :param efr: Whether to compute EFR_sum from SAM tones.
    :param efr_level_db: Level of the SAM tone.
    :param n_channels: Channels of the full CF map.
    :param cf_step: Use every ``cf_step``-th channel.
    :param seed: Seeds the noise realisation.
    :param workers: Threads used across sentences.
    :param window: DNN-HA processing window.
    :param context_left: Leading context in samples.
    :param context_right: Minimum trailing context in samples.
    :param total_length: Padded stimulus length.
    :param block_size: Periphery input block; ``total_length`` must be a multiple of it.
    :param max_items: Evaluate at most this many corpus files.
    """

    hi_profile: str = "Slope35+CS-7-0-0"
    nh_profile: str = "NH"
    levels: tuple[float, ...] = (30.0, 40.0, 50.0, 60.0, 70.0)
    snrs: tuple[float, ...] = ()
    snr_level_db: float = 70.0
    efr: bool = True
    efr_level_db: float = 70.0
    n_channels: int = 201
    cf_step: int = 1
    seed: int = 0
    workers: int = 4
    window: int = 2048
    context_left: int = 7936
    context_right: int = 256
    total_length: int = 81_920
    block_size: int = 16_384
    max_items: int | None = None

    @property
    def cf_subset(self) -> tuple[int, ...]:
        return cf_subset_indices(self.n_channels, self.cf_step)

    def periphery_config(self) -> PeripheryConfig:
        return PeripheryConfig(
            context_left=self.context_left, context_right=self.context_right, block_size=self.block_size
        )

    def validate(self, arch: ArchSpec | None = None) -> None:
        """:raises InvalidConfig: On the first violated constraint."""
        if not self.levels:
            raise InvalidConfig("at least one level is required", op="validate", target="levels")
        if not all(math.isfinite(v) for v in (*self.levels, *self.snrs, self.snr_level_db, self.efr_level_db)):
            raise InvalidConfig("levels and SNRs must be finite", op="validate", target="levels")
        if self.n_channels < 2 or self.cf_step < 1:
            raise InvalidConfig("need n_channels >= 2 and cf_step >= 1", op="validate", target="cf_subset")
        if self.workers < 1:
            raise InvalidConfig("workers must be >= 1", op="validate", target="workers")
        if self.max_items is not None and self.max_items < 1:
            raise InvalidConfig("max_items must be >= 1", op="validate", target="max_items")
        _check_layout(
            self.window, self.context_left, self.context_right, self.total_length, arch or ArchSpec(), self.block_size
        )

    def to_dict(self) -> dict[str, object]:
        data = dataclasses.asdict(self)
        data["levels"] = list(self.levels)
        data["snrs"] = list(self.snrs)
        return data

    @classmethod
    def from_dict(cls, data: Mapping[str, object]) -> EvalConfig:
        """:raises InvalidConfig: On unknown keys or invalid values."""
        config = _build(cls, data, "eval", {"levels": _float_tuple, "snrs": _float_tuple})
        config.validate()
        return config


@dataclasses.dataclass(frozen=True)
class RunConfig:
    """Everything a command needs, as read from a ``--config`` JSON file.

    :param corpus: Directory of training or evaluation WAV files.
    :param out: Output directory; commands write nowhere else.
    :param checkpoint: Checkpoint file or run directory to evaluate or apply.
    :param unprocessed: Evaluate without a DNN-HA.
    :param train: Training settings.
    :param eval: Evaluation settings.
    """

    corpus: str | None = None
    out: str | None = None
    checkpoint: str | None = None
    unprocessed: bool = False
    train: TrainConfig = dataclasses.field(default_factory=TrainConfig)
    eval: EvalConfig = dataclasses.field(default_factory=EvalConfig)

    def to_dict(self) -> dict[str, object]:
        return {
            "corpus": self.corpus,
            "out": self.out,
            "checkpoint": self.checkpoint,
            "unprocessed": self.unprocessed,
            "train": self.train.to_dict(),
            "eval": self.eval.to_dict(),
        }

    @classmethod
    def from_dict(cls, data: Mapping[str, object]) -> RunConfig:
        """Construct from parsed JSON; nested sections override defaults key by key.

        :raises InvalidConfig: On unknown keys or invalid values.
        """

        def section(klass: type[TrainConfig] | type[EvalConfig], name: str) -> Callable[[Any], object]:
            def convert(value: Any) -> object:
                if not isinstance(value, dict):
                    raise InvalidConfig(f"'{name}' must be an object", op="from_dict", target=name)
                return klass.from_dict(value)

            return convert

        for key in ("corpus", "out", "checkpoint"):
            value = data.get(key)
            if value is not None and not isinstance(value, str):
                raise InvalidConfig(f"'{key}' must be a string", op="from_dict", target=key)
        return _build(
            cls, data, "run", {"train": section(TrainConfig, "train"), "eval": section(EvalConfig, "eval")}
        )

    @classmethod
    def load(cls, path: PathLike) -> RunConfig:
        """Read a run configuration JSON file.

        :raises DataError: If the file cannot be read or parsed.
        :raises InvalidConfig: If the content is not a valid configuration.
        """
        p = Path(path)
        try:
            data = json.loads(p.read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise DataError(f"cannot read config: {exc}", op="load_config", target=str(p)) from None
        if not isinstance(data, dict):
            raise InvalidConfig("config document must be a JSON object", op="load_config", target=str(p))
        return cls.from_dict(data)

    def replace(self, **changes: Any) -> RunConfig:
        """Copy with explicit overrides; ``train``/``eval`` accept dicts of field overrides."""
        for key in ("train", "eval"):
            value = changes.get(key)
            if isinstance(value, dict):
                current = getattr(self, key)
                updated = dataclasses.replace(current, **value)
                updated.validate()
                changes[key] = updated
        return dataclasses.replace(self, **changes)
