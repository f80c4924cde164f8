"""Tests for Greenwood CF maps and channel subsets."""

from __future__ import annotations

import numpy as np
import pytest

from hearloop._errors import InvalidConfig
from hearloop.periphery import (
    MAX_CF_HZ,
    MIN_CF_HZ,
    CFMap,
    cf_subset_indices,
    greenwood_cf,
    greenwood_frequency,
    greenwood_position,
)


class TestGreenwood:
    def test_position_inverts_frequency(self) -> None:
        positions = np.linspace(0.1, 0.9, 9)
        np.testing.assert_allclose(greenwood_position(greenwood_frequency(positions)), positions, rtol=1e-12)

    def test_default_map(self) -> None:
        cf = greenwood_cf()
        assert cf.n_channels == len(cf) == 201
        assert cf.cf_hz[0] == MIN_CF_HZ
        assert cf.cf_hz[-1] == MAX_CF_HZ
        assert np.all(np.diff(cf.frequencies) > 0)

    def test_uniform_in_position(self) -> None:
        steps = np.diff(greenwood_position(greenwood_cf(11).frequencies))
        np.testing.assert_allclose(steps, steps[0], rtol=1e-9)

    @pytest.mark.parametrize(("n", "lo", "hi"), [(1, 112.0, 12_000.0), (10, 500.0, 400.0), (10, 0.0, 1000.0)])
    def test_invalid_arguments(self, n: int, lo: float, hi: float) -> None:
        with pytest.raises(InvalidConfig):
            greenwood_cf(n, lo, hi)


class TestCFMap:
    """Validation and sub-selection of CF maps."""

    def test_out_of_range(self) -> None:
        with pytest.raises(InvalidConfig):
            CFMap((100.0, 1000.0))
        with pytest.raises(InvalidConfig):
            CFMap((1000.0, 13_000.0))

    def test_must_ascend(self) -> None:
        with pytest.raises(InvalidConfig):
            CFMap((1000.0, 1000.0))

    def test_empty(self) -> None:
        with pytest.raises(InvalidConfig):
            CFMap(())

    def test_subset(self) -> None:
        cf = greenwood_cf()
        sub = cf.subset([0, 100, 200])
        assert sub.cf_hz == (cf.cf_hz[0], cf.cf_hz[100], cf.cf_hz[200])

    @pytest.mark.parametrize(
        "indices", [[], [5, 3], [1, 1], [-1], [201]], ids=["empty", "unsorted", "repeat", "negative", "too-high"]
    )
    def test_invalid_subset(self, indices: list[int]) -> None:
        with pytest.raises(InvalidConfig):
            greenwood_cf().subset(indices)

    def test_training_subset_indices(self) -> None:
        idx = cf_subset_indices(201, 10)
        assert len(idx) == 21
        assert idx[0] == 0
        assert idx[-1] == 200

    def test_subset_step_must_be_positive(self) -> None:
        with pytest.raises(InvalidConfig):
            cf_subset_indices(201, 0)
