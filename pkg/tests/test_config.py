"""Run-spec parsing, validation, and manifest hashing."""

import pytest
from pydantic import ValidationError

from parkmap.config import (
    RunSpec,
    SpecError,
    apply_overrides,
    load_spec_file,
    parse_spec_text,
    spec_to_text,
)


class TestDefaults:
    def test_default_values(self):
        spec = RunSpec()
        assert spec.road_length_m == 10_000.0
        assert spec.slot_length_m == 5.0
        assert spec.window_m == 100.0
        assert spec.sample_period_s == 10.0
        assert spec.p_change == 0.2
        assert spec.noise_sigma == 3e-2
        assert spec.max_sources == 10
        assert spec.n_tests == 10
        assert spec.grid_step_m == 10.0
        assert spec.strategies == ("uncertainty", "random", "platform_only", "take_all")

    def test_converters(self):
        spec = RunSpec()
        cfg = spec.to_road_config()
        assert cfg.n_cells == 2000 and cfg.n_segments == 10
        noise = spec.to_noise_config()
        assert noise.sigma == 3e-2 and noise.mode == "gaussian"


class TestParsing:
    def test_parses_overrides_and_comments(self):
        spec = parse_spec_text(
            """
            # experiment setup
            road_length_m = 2000
            segment_length_m = 500
            n_tests = 3
            strategies = uncertainty,random
            time_varying = true
            base_seed = 9
            """
        )
        assert spec.road_length_m == 2000.0
        assert spec.n_tests == 3
        assert spec.strategies == ("uncertainty", "random")
        assert spec.time_varying is True
        assert spec.base_seed == 9

    def test_unknown_key_named_in_error(self):
        with pytest.raises(SpecError, match="speed_limit"):
            parse_spec_text("speed_limit = 130")

    def test_duplicate_key_rejected(self):
        with pytest.raises(SpecError, match="duplicate"):
            parse_spec_text("n_tests = 1\nn_tests = 2")

    def test_garbage_line_rejected(self):
        with pytest.raises(SpecError, match="line 1"):
            parse_spec_text("this is not a key value pair")

    def test_bad_value_names_the_field(self):
        with pytest.raises(ValidationError) as err:
            parse_spec_text("n_tests = 0")
        assert "n_tests" in str(err.value)

    def test_unknown_strategy_rejected(self):
        with pytest.raises(ValidationError, match="strategies"):
            parse_spec_text("strategies = uncertainty,greedy")

    def test_geometry_checked_through_road_config(self):
        with pytest.raises(ValidationError, match="whole segments"):
            parse_spec_text("segment_length_m = 333")

    def test_missing_file(self, tmp_path):
        with pytest.raises(SpecError, match="not found"):
            load_spec_file(tmp_path / "nope.cfg")

    def test_text_round_trip(self):
        spec = RunSpec(n_tests=4, time_varying=True, strategies=("random",))
        assert parse_spec_text(spec_to_text(spec)) == spec


class TestOverrides:
    def test_none_means_keep(self):
        spec = RunSpec(n_tests=5)
        assert apply_overrides(spec, n_tests=None, base_seed=None) == spec

    def test_override_revalidates(self):
        with pytest.raises(ValidationError, match="n_tests"):
            apply_overrides(RunSpec(), n_tests=0)

    def test_strategies_string_accepted(self):
        spec = apply_overrides(RunSpec(), strategies="take_all , uncertainty")
        assert spec.strategies == ("take_all", "uncertainty")


class TestConfigHash:
    def test_stable_for_equal_specs(self):
        assert RunSpec().config_hash() == RunSpec().config_hash()

    def test_changes_when_any_field_changes(self):
        base = RunSpec()
        variants = [
            RunSpec(road_length_m=20_000.0, segment_length_m=2000.0),
            RunSpec(slot_length_m=4.0),
            RunSpec(window_m=200.0),
            RunSpec(sample_period_s=5.0),
            RunSpec(segment_length_m=500.0),
            RunSpec(p_change=0.3),
            RunSpec(noise_sigma=0.05),
            RunSpec(noise_mode="indicator"),
            RunSpec(max_sources=4),
            RunSpec(n_tests=2),
            RunSpec(strategies=("uncertainty",)),
            RunSpec(time_varying=True),
            RunSpec(grid_step_m=20.0),
        ]
        hashes = {base.config_hash()} | {v.config_hash() for v in variants}
        assert len(hashes) == len(variants) + 1

    def test_seed_excluded_so_reruns_can_pool(self):
        # the manifest carries the seed on its own; only true config changes
        # should split runs apart
        assert RunSpec(base_seed=0).config_hash() == RunSpec(base_seed=99).config_hash()
