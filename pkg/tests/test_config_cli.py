import json
import math
import os
import shutil
import subprocess
import sys
from pathlib import Path

import pytest

from chtransit import cli, report
from chtransit.config import eval_number, parse_config
from chtransit.errors import ConfigError

ROOT = Path(__file__).resolve().parents[1]
CONFIGS = ROOT / "configs"
FIXTURES = Path(__file__).resolve().parent / "fixtures"

MINIMAL = """
[run]
subcommand = classify
[domain]
kind = rectangular
lengths = pi
[params]
gamma2 = 3
gamma3 = 3
"""


def run_cli(tmp_path, sub, text, name="cfg.ini", *extra):
    cfg = tmp_path / name
    cfg.write_text(text)
    out = tmp_path / "out"
    code = cli.main([sub, "--config", str(cfg), "--out", str(out), *extra])
    return code, out


class TestConfig:
    def test_minimal(self):
        cfg = parse_config(MINIMAL)
        assert cfg.subcommand == "classify"
        assert cfg.params.gamma3 == 3.0 and not cfg.lambda_given
        assert cfg.domain.lengths == (math.pi,)

    def test_negative_gamma3_rejected_with_line(self):
        text = MINIMAL.replace("gamma3 = 3", "gamma3 = -1")
        with pytest.raises(ConfigError) as exc:
            parse_config(text)
        assert exc.value.line == text.splitlines().index("gamma3 = -1") + 1

    def test_duplicate_key_names_line(self):
        text = MINIMAL + "gamma3 = 4\n"
        with pytest.raises(ConfigError, match="duplicate key 'gamma3'") as exc:
            parse_config(text)
        assert exc.value.line == len(text.splitlines())

    def test_unknown_key_and_section(self):
        text = MINIMAL + "gama2 = 1\n"
        with pytest.raises(ConfigError, match="unknown key 'gama2'") as exc:
            parse_config(text)
        assert exc.value.line == len(text.splitlines())
        with pytest.raises(ConfigError, match="unknown section"):
            parse_config(MINIMAL + "[extras]\nx = 1\n")

    def test_missing_block(self):
        with pytest.raises(ConfigError, match=r"needs a \[domain\]"):
            parse_config("[run]\nsubcommand = classify\n[params]\ngamma2 = 1\ngamma3 = 1\n")

    def test_subcommand_mismatch(self):
        with pytest.raises(ConfigError, match="not 'sweep'"):
            parse_config(MINIMAL, "sweep")

    def test_number_expressions(self):
        assert eval_number("2*pi") == pytest.approx(2 * math.pi)
        assert eval_number("sqrt(2)/2 + 1e-3") == pytest.approx(math.sqrt(2) / 2 + 1e-3)
        for bad in ("__import__('os')", "pi()", "x + 1", "[1]"):
            with pytest.raises(ValueError):
                eval_number(bad)

    @pytest.mark.parametrize("path", sorted(CONFIGS.glob("*.ini")), ids=lambda p: p.stem)
    def test_shipped_configs_parse(self, path):
        assert parse_config(path.read_text()).subcommand in path.stem


class TestExitCodes:
    def test_ok(self, tmp_path):
        code, out = run_cli(tmp_path, "classify", MINIMAL)
        assert code == 0
        doc = json.loads((out / "classify_report.json").read_text())
        assert doc["status"] == "ok"
        assert doc["results"]["transition"]["transition_type"] == "TypeI"

    def test_config_error(self, tmp_path, capsys):
        code, out = run_cli(tmp_path, "classify", MINIMAL.replace("gamma3 = 3", "gamma3 = 0"))
        assert code == 1
        assert "gamma3" in capsys.readouterr().err
        assert not (out / "classify_report.json").exists()

    def test_numerical_failure_still_writes_report(self, tmp_path):
        text = """
[run]
subcommand = simulate
[domain]
kind = rectangular
lengths = pi
grid = 32
[params]
lambda = 3
gamma2 = 5
gamma3 = 1
[solver]
dt = 50
stabilization = 0
init_amplitude = 1
"""
        with pytest.warns(RuntimeWarning):
            code, out = run_cli(tmp_path, "simulate", text)
        assert code == 2
        doc = json.loads((out / "simulate_report.json").read_text())
        assert doc["status"] == "numerical_failure" and "blew up" in doc["error"]

    def test_failed_sweep_row_exits_zero(self, tmp_path):
        text = """
[run]
subcommand = sweep
[domain]
kind = rectangular
lengths = pi
grid = 32
[params]
gamma2 = 3
gamma3 = 1
[solver]
dt = 50
stabilization = 0
init_amplitude = 0.5
max_time = 50000
[sweep]
lambdas = 0.5, 3.0
continuation = false
"""
        import warnings

        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            code, out = run_cli(tmp_path, "sweep", text)
        assert code == 0
        header, rows = report.parse_csv((out / "sweep_branch.csv").read_text())
        assert [r[-1] for r in rows].count("failed") >= 1
        doc = json.loads((out / "sweep_report.json").read_text())
        assert doc["status"] == "ok"

    def test_bad_jobs(self, tmp_path):
        code, _ = run_cli(tmp_path, "classify", MINIMAL, "cfg.ini", "--jobs", "0")
        assert code == 1

    def test_console_script(self, tmp_path):
        exe = shutil.which("chtransit")
        cmd = [exe] if exe else [sys.executable, "-m", "chtransit.cli"]
        p = subprocess.run(cmd + ["--version"], capture_output=True, text=True)
        assert p.returncode == 0 and "chtransit" in p.stdout


class TestOutputs:
    def test_json_round_trip(self):
        doc = {"b": [1.0, 0.1, 1e-300, float("inf")], "a": {"z": True, "y": None}, "n": 3}
        text = report.dumps(doc)
        back = report.loads(text)
        assert back["b"][:3] == [1.0, 0.1, 1e-300] and math.isinf(back["b"][3])
        assert report.dumps(back) == text
        assert text.index('"a"') < text.index('"b"') < text.index('"n"')

    def test_csv_headers(self, tmp_path):
        cfg = (CONFIGS / "diagram.ini").read_text()
        code, out = run_cli(tmp_path, "diagram", cfg)
        assert code == 0
        assert (out / "diagram_diagram.csv").read_text().splitlines()[0] == ",".join(report.DIAGRAM_HEADER)
        assert (out / "diagram_curves.csv").read_text().splitlines()[0] == ",".join(report.CURVES_HEADER)

    def test_reduce_outputs(self, tmp_path):
        code, out = run_cli(tmp_path, "reduce", (CONFIGS / "reduce.ini").read_text())
        assert code == 0
        doc = json.loads((out / "reduce_report.json").read_text())
        assert len(doc["results"]["equilibria"]) == 8
        header, rows = report.parse_csv((out / "reduce_trajectory.csv").read_text())
        assert header == ["t", "y1", "y2"] and rows

    def test_simulate_snapshot(self, tmp_path):
        code, out = run_cli(tmp_path, "simulate", (CONFIGS / "simulate.ini").read_text())
        assert code == 0
        header, u = report.parse_snapshot((out / "simulate_snapshot.txt").read_text())
        assert u.shape == (64,) and header.startswith("# domain=")
        h, rows = report.parse_csv((out / "simulate_timeseries.csv").read_text())
        assert h[0] == "t_or_lambda" and h[-1] == "status"

    def test_determinism(self, tmp_path):
        text = (CONFIGS / "simulate.ini").read_text()
        a = tmp_path / "a"
        b = tmp_path / "b"
        a.mkdir()
        b.mkdir()
        (a / "c.ini").write_text(text)
        (b / "c.ini").write_text(text)
        assert cli.main(["simulate", "--config", str(a / "c.ini"), "--out", str(a / "o")]) == 0
        assert cli.main(["simulate", "--config", str(b / "c.ini"), "--out", str(b / "o")]) == 0
        for name in os.listdir(a / "o"):
            assert (a / "o" / name).read_bytes() == (b / "o" / name).read_bytes()


@pytest.mark.parametrize("name", ["classify", "diagram"])
def test_golden_reports(tmp_path, name):
    code, out = run_cli(tmp_path, name, (CONFIGS / f"{name}.ini").read_text())
    assert code == 0
    for path in sorted(FIXTURES.glob(f"{name}_*")):
        assert (out / path.name).read_text() == path.read_text(), path.name
