"""Type aliases used throughout hearloop."""

from __future__ import annotations

import os  # noqa: TC003
from typing import Union

import numpy as np
import numpy.typing as npt

PathLike = Union[str, "os.PathLike[str]"]  # noqa: UP007
FloatArray = npt.NDArray[np.float64]
BoolArray = npt.NDArray[np.bool_]
