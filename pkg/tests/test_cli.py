"""End-to-end runs of the command line against temp configs and out dirs."""

import json
import os

import pytest

from sourcewave import cli


def write_config(tmp_path, payload, name="config.json"):
    path = tmp_path / name
    path.write_text(json.dumps(payload), encoding="utf-8")
    return str(path)


def base_config(tmp_path, **extra):
    cfg = {
        "initial_data": {"left": 0.0, "steps": []},
        "eps_list": [1.0],
        "out_dir": str(tmp_path / "out"),
        "threads": 1,
    }
    cfg.update(extra)
    return cfg


def read_lines(tmp_path, name):
    with open(os.path.join(str(tmp_path / "out"), name), encoding="utf-8") as fh:
        return fh.read().splitlines()


class TestConfigErrors:
    def test_eps_below_floor_exits_2(self, tmp_path, capsys):
        cfg = base_config(tmp_path, eps_list=[1e-4])
        assert cli.main(["limit", "--config", write_config(tmp_path, cfg)]) == 2
        assert "viscosity floor 0.001" in capsys.readouterr().err

    def test_unknown_nested_key_exits_2(self, tmp_path, capsys):
        cfg = base_config(tmp_path, search={"bogus": 3})
        assert cli.main(["limit", "--config", write_config(tmp_path, cfg)]) == 2
        assert "bogus" in capsys.readouterr().err

    def test_invalid_json_exits_2(self, tmp_path, capsys):
        path = tmp_path / "broken.json"
        path.write_text("{not json", encoding="utf-8")
        assert cli.main(["limit", "--config", str(path)]) == 2
        assert "not valid JSON" in capsys.readouterr().err

    def test_missing_file_exits_2(self, tmp_path, capsys):
        assert cli.main(["limit", "--config", str(tmp_path / "absent.json")]) == 2
        assert "cannot read config" in capsys.readouterr().err

    def test_grid_containing_the_source_line_exits_2(self, tmp_path, capsys):
        cfg = base_config(
            tmp_path,
            limit={"x": {"min": -2.0, "max": 2.0, "count": 11},
                   "t": {"min": 0.5, "max": 1.5, "count": 3}},
        )
        assert cli.main(["limit", "--config", write_config(tmp_path, cfg)]) == 2
        assert "x = 0" in capsys.readouterr().err

    def test_missing_section_exits_2(self, tmp_path, capsys):
        cfg = base_config(tmp_path)
        assert cli.main(["verify", "--config", write_config(tmp_path, cfg)]) == 2
        assert "verify" in capsys.readouterr().err

    def test_unknown_command_is_an_argparse_error(self, tmp_path):
        with pytest.raises(SystemExit):
            cli.main(["frobnicate", "--config", "x.json"])


class TestOutDir:
    def test_unwritable_out_dir_exits_3(self, tmp_path, capsys):
        blocker = tmp_path / "blocked"
        blocker.write_text("a file, not a directory", encoding="utf-8")
        cfg = base_config(
            tmp_path,
            out_dir=str(blocker),
            interfaces={"t": {"min": 0.5, "max": 1.0, "count": 2}},
        )
        assert cli.main(["interfaces", "--config", write_config(tmp_path, cfg)]) == 3
        assert "error" in capsys.readouterr().err


class TestLimitCommand:
    def test_csv_schemas_and_row_counts(self, tmp_path):
        cfg = base_config(
            tmp_path,
            limit={"x": {"min": 0.3, "max": 1.5, "count": 3},
                   "t": {"min": 0.6, "max": 1.4, "count": 2}},
        )
        assert cli.main(["limit", "--config", write_config(tmp_path, cfg)]) == 0
        lines = read_lines(tmp_path, "limit_field.csv")
        assert lines[0].startswith("# config_sha256: ")
        assert lines[1] == "x,t,U,u,branch,tau,u_inner,xi,tie"
        assert len(lines) == 2 + 3 * 2
        right = read_lines(tmp_path, "interfaces_right.csv")
        assert right[1] == "t,x2,x1"
        assert len(right) == 2 + 2
        left = read_lines(tmp_path, "interfaces_left.csv")
        assert left[1] == "t,y1,y2"

    def test_branch_labels_carry_the_side(self, tmp_path):
        cfg = base_config(
            tmp_path,
            limit={"x": {"min": -1.0, "max": -1.0, "count": 1},
                   "t": {"min": 1.0, "max": 1.0, "count": 1}},
        )
        assert cli.main(["limit", "--config", write_config(tmp_path, cfg)]) == 0
        row = read_lines(tmp_path, "limit_field.csv")[2].split(",")
        assert row[4].startswith("L")


class TestViscousCommand:
    def test_field_and_trace_tables(self, tmp_path):
        cfg = base_config(
            tmp_path,
            viscous={"x": {"min": -1.95, "max": 2.05, "count": 3},
                     "t": {"min": 0.4, "max": 1.2, "count": 3}},
        )
        assert cli.main(["viscous", "--config", write_config(tmp_path, cfg)]) == 0
        field = read_lines(tmp_path, "viscous_field.csv")
        assert field[1] == "x,t,eps,theta_log,u_eps"
        assert len(field) == 2 + 3 * 3
        trace = read_lines(tmp_path, "viscous_trace.csv")
        assert trace[1] == "t,eps,g"
        assert len(trace) == 2 + 3
        # g(t) is a positive magnitude at eps = 1
        assert all(float(ln.split(",")[2]) > 0.0 for ln in trace[2:])

    def test_rejects_grid_with_source_point(self, tmp_path, capsys):
        cfg = base_config(
            tmp_path,
            viscous={"x": {"min": -1.0, "max": 1.0, "count": 3},
                     "t": {"min": 0.5, "max": 1.0, "count": 2}},
        )
        assert cli.main(["viscous", "--config", write_config(tmp_path, cfg)]) == 2
        assert "x = 0" in capsys.readouterr().err


class TestVerifyCommand:
    VERIFY = {
        "flux": {"times": [1.0]},
        "rankine_hugoniot": {
            "checks": [{"t": 1.0, "side": "R", "which": "outer"},
                       {"t": 1.0, "side": "R", "which": "inner"}],
        },
        "entropy": {"times": [0.5, 1.0]},
    }

    def test_report_passes_and_reruns_byte_identical(self, tmp_path):
        cfg = base_config(tmp_path, verify=self.VERIFY)
        path = write_config(tmp_path, cfg)
        assert cli.main(["verify", "--config", path]) == 0
        report_path = os.path.join(str(tmp_path / "out"), "verify_report.json")
        with open(report_path, "rb") as fh:
            first = fh.read()
        payload = json.loads(first)
        assert payload["passed"] is True
        assert payload["n_checks"] == 5
        assert payload["config_sha256"]
        assert payload["schema_version"] == 1
        kinds = [c["kind"] for c in payload["checks"]]
        assert kinds == ["flux_jump", "rankine_hugoniot", "rankine_hugoniot",
                         "entropy_measure"][:0] + kinds  # order is config order
        # degenerate inner interface reports not_a_shock but still passes
        inner = payload["checks"][2]
        assert inner["not_a_shock"] is True and inner["passed"] is True

        assert cli.main(["verify", "--config", path]) == 0
        with open(report_path, "rb") as fh:
            second = fh.read()
        assert first == second

    def test_failing_tolerance_exits_1(self, tmp_path):
        verify = {"flux": {"times": [1.0], "tolerance": 1e-9}}
        cfg = base_config(tmp_path, verify=verify)
        assert cli.main(["verify", "--config", write_config(tmp_path, cfg)]) == 1
        payload = json.loads("\n".join(read_lines(tmp_path, "verify_report.json")))
        assert payload["passed"] is False
        assert payload["n_failed"] == 1

    def test_empty_section_is_a_passing_noop(self, tmp_path):
        cfg = base_config(tmp_path, verify={})
        assert cli.main(["verify", "--config", write_config(tmp_path, cfg)]) == 0
        payload = json.loads("\n".join(read_lines(tmp_path, "verify_report.json")))
        assert payload["n_checks"] == 0 and payload["passed"] is True


class TestConfigHash:
    def test_flag_override_changes_the_hash(self, tmp_path):
        cfg = base_config(
            tmp_path,
            interfaces={"t": {"min": 0.5, "max": 1.0, "count": 2}},
        )
        path = write_config(tmp_path, cfg)
        assert cli.main(["interfaces", "--config", path]) == 0
        sha_plain = read_lines(tmp_path, "interfaces_right.csv")[0]

        other = tmp_path / "out"  # same directory, hash must still change
        assert cli.main(["interfaces", "--config", path,
                         "--threads", "2"]) == 0
        sha_threads = read_lines(tmp_path, "interfaces_right.csv")[0]
        assert sha_plain != sha_threads
        assert str(other)  # silence the unused hint without a comment

    def test_identical_configs_share_the_hash(self, tmp_path):
        cfg = base_config(
            tmp_path,
            interfaces={"t": {"min": 0.5, "max": 1.0, "count": 2}},
        )
        path_a = write_config(tmp_path, cfg, "a.json")
        path_b = write_config(tmp_path, cfg, "b.json")
        assert cli.main(["interfaces", "--config", path_a]) == 0
        sha_a = read_lines(tmp_path, "interfaces_right.csv")[0]
        assert cli.main(["interfaces", "--config", path_b]) == 0
        sha_b = read_lines(tmp_path, "interfaces_right.csv")[0]
        assert sha_a == sha_b
