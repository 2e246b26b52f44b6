import numpy as np
import pytest

from parkmap.environment import (
    RoadConfig,
    SlotLayout,
    TrafficDensity,
    World,
    generate_layout,
    generate_traffic,
)


@pytest.fixture
def cfg_small() -> RoadConfig:
    # 1 km road, 4 traffic segments; cheap enough for loop-heavy tests
    return RoadConfig(length_m=1000.0, segment_length_m=250.0)


@pytest.fixture
def world_small(cfg_small) -> World:
    rng = np.random.default_rng(42)
    return World(cfg_small, generate_layout(rng, cfg_small), generate_traffic(rng, cfg_small))


@pytest.fixture
def cfg_default() -> RoadConfig:
    return RoadConfig()


def make_world(cfg: RoadConfig, seed: int = 42) -> World:
    rng = np.random.default_rng(seed)
    return World(cfg, generate_layout(rng, cfg), generate_traffic(rng, cfg))


def uniform_traffic(cfg: RoadConfig, value: float, version: int = 0) -> TrafficDensity:
    return TrafficDensity(
        segment_values=np.full(cfg.n_segments, value),
        segment_length_m=cfg.segment_length_m,
        version=version,
    )


def full_layout(cfg: RoadConfig, present: bool = True) -> SlotLayout:
    return SlotLayout(present=np.full(cfg.n_cells, present, dtype=bool))
