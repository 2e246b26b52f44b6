"""Command-line client: exit codes, artifact determinism, overrides."""

import csv
import json

import pytest

from parkmap.cli import main

TINY_SPEC = """
road_length_m = 1000
segment_length_m = 250
n_tests = 2
strategies = uncertainty,random
max_sources = 3
grid_step_m = 20
"""


@pytest.fixture
def spec_file(tmp_path):
    path = tmp_path / "tiny.cfg"
    path.write_text(TINY_SPEC)
    return path


def read_csv_lines(path, drop_column=None):
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if drop_column is not None:
        idx = rows[0].index(drop_column)
        rows = [r[:idx] + r[idx + 1 :] for r in rows]
    return rows


class TestRun:
    def test_writes_expected_artifacts(self, spec_file, tmp_path, capsys):
        out = tmp_path / "run"
        assert main(["run", "--spec", str(spec_file), "--out", str(out)]) == 0
        for name in (
            "metrics.csv",
            "learning_curve.csv",
            "summary.json",
            "manifest.json",
            "spec_resolved.cfg",
        ):
            assert (out / name).is_file()
        stdout = capsys.readouterr().out
        assert "win rate uncertainty_vs_random" in stdout

    def test_seeded_reruns_match_except_timing(self, spec_file, tmp_path):
        out1, out2 = tmp_path / "a", tmp_path / "b"
        assert main(["run", "--spec", str(spec_file), "--seed", "7", "--out", str(out1)]) == 0
        assert main(["run", "--spec", str(spec_file), "--seed", "7", "--out", str(out2)]) == 0
        a = read_csv_lines(out1 / "metrics.csv", drop_column="fit_predict_seconds")
        b = read_csv_lines(out2 / "metrics.csv", drop_column="fit_predict_seconds")
        assert a == b
        assert (out1 / "learning_curve.csv").read_bytes() == (out2 / "learning_curve.csv").read_bytes()
        assert (out1 / "spec_resolved.cfg").read_bytes() == (out2 / "spec_resolved.cfg").read_bytes()
        assert (out1 / "manifest.json").read_bytes() == (out2 / "manifest.json").read_bytes()

    def test_invalid_n_tests_exits_2_and_names_field(self, spec_file, tmp_path, capsys):
        code = main(
            ["run", "--spec", str(spec_file), "--n-tests", "0", "--out", str(tmp_path / "x")]
        )
        assert code == 2
        assert "n_tests" in capsys.readouterr().err

    def test_strategy_override_lands_in_csv(self, spec_file, tmp_path):
        out = tmp_path / "run"
        assert (
            main(
                [
                    "run",
                    "--spec",
                    str(spec_file),
                    "--strategies",
                    "platform_only",
                    "--out",
                    str(out),
                ]
            )
            == 0
        )
        rows = read_csv_lines(out / "metrics.csv")
        strategies = {r[1] for r in rows[1:]}
        assert strategies == {"platform_only"}

    def test_missing_spec_file_exits_2(self, tmp_path, capsys):
        assert main(["run", "--spec", str(tmp_path / "none.cfg"), "--out", str(tmp_path)]) == 2
        assert "not found" in capsys.readouterr().err

    def test_manifest_carries_seed_and_hash(self, spec_file, tmp_path):
        out = tmp_path / "run"
        main(["run", "--spec", str(spec_file), "--seed", "3", "--out", str(out)])
        manifest = json.loads((out / "manifest.json").read_text())
        assert manifest["base_seed"] == 3
        assert manifest["spec"]["base_seed"] == 3
        assert len(manifest["config_hash"]) == 64


class TestCompare:
    def test_self_comparison_ties(self, spec_file, tmp_path, capsys):
        out = tmp_path / "run"
        main(["run", "--spec", str(spec_file), "--out", str(out)])
        cmp_dir = tmp_path / "cmp"
        assert main(["compare", str(out), str(out), "--out", str(cmp_dir)]) == 0
        report = json.loads((cmp_dir / "compare.json").read_text())
        assert all(v == 0.5 for v in report["cross_run_win_rates"].values())
        assert (cmp_dir / "merged.csv").is_file()
        assert "cross-run win rate" in capsys.readouterr().out

    def test_config_mismatch_exits_2(self, spec_file, tmp_path, capsys):
        out1, out2 = tmp_path / "a", tmp_path / "b"
        main(["run", "--spec", str(spec_file), "--out", str(out1)])
        main(
            [
                "run",
                "--spec",
                str(spec_file),
                "--grid-step",
                "10",
                "--out",
                str(out2),
            ]
        )
        assert main(["compare", str(out1), str(out2), "--out", str(tmp_path / "c")]) == 2
        assert "mismatch" in capsys.readouterr().err

    def test_missing_manifest_exits_2(self, tmp_path, capsys):
        empty = tmp_path / "empty"
        empty.mkdir()
        assert main(["compare", str(empty), "--out", str(tmp_path / "c")]) == 2
        assert "manifest" in capsys.readouterr().err


class TestSnapshot:
    def test_prior_profile_at_zero(self, spec_file, tmp_path):
        out = tmp_path / "snap"
        assert main(["snapshot", "--spec", str(spec_file), "--at", "0", "--out", str(out)]) == 0
        with open(out / "snapshot_uncertainty.csv", newline="") as fh:
            rows = list(csv.DictReader(fh))
        assert rows[0].keys() == {"x", "pi", "f_true", "f_hat", "std"}
        assert all(float(r["f_hat"]) == 0.0 for r in rows)
        assert all(float(r["std"]) == 0.5 for r in rows)

    def test_profile_after_first_crossing(self, spec_file, tmp_path, capsys):
        out = tmp_path / "snap"
        assert main(["snapshot", "--spec", str(spec_file), "--at", "750", "--out", str(out)]) == 0
        assert (out / "world.json").is_file()
        assert "reached" in capsys.readouterr().out
        with open(out / "snapshot_random.csv", newline="") as fh:
            rows = list(csv.DictReader(fh))
        assert all(float(r["std"]) >= 0.0 for r in rows)
        assert all(0.0 <= float(r["pi"]) <= 1.0 for r in rows)

    def test_position_off_road_exits_2(self, spec_file, tmp_path, capsys):
        code = main(["snapshot", "--spec", str(spec_file), "--at", "99999", "--out", str(tmp_path)])
        assert code == 2
        assert "at_position" in capsys.readouterr().err


class TestRemoteDispatch:
    @pytest.fixture
    def fake_server(self, monkeypatch):
        from fastapi.testclient import TestClient

        from parkmap.service.app import create_app

        client = TestClient(create_app())

        def fake_post(url, json=None, timeout=None):
            assert url.startswith("http://svc/")
            return client.post(url.removeprefix("http://svc"), json=json)

        monkeypatch.setattr("httpx.post", fake_post)

    def test_run_round_trips_through_the_service(self, spec_file, tmp_path, fake_server):
        out = tmp_path / "remote"
        code = main(
            ["run", "--spec", str(spec_file), "--server", "http://svc", "--out", str(out)]
        )
        assert code == 0
        assert (out / "metrics.csv").is_file()

    def test_remote_client_error_exits_2(self, tmp_path, fake_server, capsys):
        empty = tmp_path / "empty"
        empty.mkdir()
        code = main(
            ["compare", str(empty), "--server", "http://svc", "--out", str(tmp_path / "c")]
        )
        assert code == 2
        assert "manifest" in capsys.readouterr().err


class TestParser:
    def test_version_flag(self, capsys):
        with pytest.raises(SystemExit) as exc:
            main(["--version"])
        assert exc.value.code == 0
        assert "parkmap" in capsys.readouterr().out

    def test_unknown_command_rejected(self):
        with pytest.raises(SystemExit):
            main(["explode"])
