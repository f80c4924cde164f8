from __future__ import annotations

import pytest

from hearloop.periphery import PeripheryConfig


@pytest.fixture
def small_config() -> PeripheryConfig:
    """Short blocks and context so simulations stay fast."""
    return PeripheryConfig(context_left=512, context_right=256, block_size=2048)
