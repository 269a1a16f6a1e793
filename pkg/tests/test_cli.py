import json
import subprocess
import sys

import numpy as np
import pytest

from qumodeprep.cli import main, parse_target
from qumodeprep.wigner import read_grid

RUN = ["run", "--target", "local-gaussian", "--optimizer", "powell", "--layers", "1",
       "--mode", "ideal", "--trials", "2", "--seed", "7"]


def call(argv, capsys):
    try:
        code = main(argv)
    except SystemExit as exc:
        code = exc.code
    out = capsys.readouterr()
    return code, out.out, out.err


@pytest.fixture(autouse=True)
def isolated(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    monkeypatch.delenv("QUMODEPREP_OUTPUT_DIR", raising=False)


SWEEP_YAML = """name: tiny
targets: [local_gaussian]
optimizers: [powell, nelder_mead]
layers: [1]
modes: [ideal]
trials: 2
base_seed: 3
"""


class TestRun:
    def test_happy_path(self, capsys, tmp_path):
        code, out, _ = call(RUN, capsys)
        assert code == 0
        rows = [ln for ln in out.splitlines() if ln.startswith("|")]
        assert len(rows) == 3 and "powell" in rows[2]
        assert list(tmp_path.iterdir()) == []

    def test_deterministic(self, capsys):
        assert call(RUN, capsys)[1] == call(RUN, capsys)[1]

    def test_bogus_optimizer(self, capsys):
        code, _, err = call(["run", "--optimizer", "bogus"], capsys)
        assert code == 2 and "bogus" in err

    def test_unknown_flag(self, capsys):
        assert call(["run", "--frobnicate"], capsys)[0] == 2

    def test_bad_target(self, capsys):
        assert call(["run", "--target", "squeezed"], capsys)[0] == 2

    def test_runtime_failure(self, capsys):
        code, _, err = call(["run", "--target", "non-gaussian", "--cutoff", "12", "--trials", "1"], capsys)
        assert code == 1 and err.startswith("error:")

    def test_output_dir(self, capsys, tmp_path):
        code, _, _ = call(RUN + ["--output-dir", "out"], capsys)
        assert code == 0
        names = {p.name for p in (tmp_path / "out").iterdir()}
        assert {"aggregate.csv", "trials.jsonl", "config.resolved.yaml", "tables"} <= names

    def test_env_output_dir(self, capsys, tmp_path, monkeypatch):
        monkeypatch.setenv("QUMODEPREP_OUTPUT_DIR", str(tmp_path / "env"))
        assert call(RUN, capsys)[0] == 0
        assert (tmp_path / "env" / "aggregate.csv").is_file()

    def test_set_override(self, capsys):
        code, out, _ = call(RUN + ["--set", "layers=2"], capsys)
        assert code == 0
        assert "|      2 |" in out or " 2 | powell" in out

    def test_bad_override(self, capsys):
        assert call(RUN + ["--set", "layers"], capsys)[0] == 2

    def test_flags_beat_config(self, capsys, tmp_path):
        (tmp_path / "c.yaml").write_text("optimizers: [cobyla]\ntrials: 1\n")
        code, out, _ = call(["run", "--config", "c.yaml", "--optimizer", "powell", "--trials", "1"], capsys)
        assert code == 0 and "powell" in out and "cobyla" not in out


class TestSweep:
    def test_two_cells(self, capsys, tmp_path):
        (tmp_path / "s.yaml").write_text(SWEEP_YAML)
        code, out, _ = call(["sweep", "s.yaml", "--output-dir", "res"], capsys)
        assert code == 0
        lines = (tmp_path / "res" / "tiny" / "aggregate.csv").read_text().splitlines()
        assert len(lines) == 3
        assert (tmp_path / "res" / "tiny" / "config.resolved.yaml").is_file()

    def test_resume_identical(self, capsys, tmp_path):
        (tmp_path / "s.yaml").write_text(SWEEP_YAML)
        call(["sweep", "s.yaml", "--output-dir", "a"], capsys)
        first = (tmp_path / "a" / "tiny" / "aggregate.csv").read_bytes()
        archive = tmp_path / "a" / "tiny" / "trials.jsonl"
        archive.write_text("".join(archive.read_text().splitlines(keepends=True)[:1]))
        assert call(["sweep", "s.yaml", "--output-dir", "a", "--resume"], capsys)[0] == 0
        assert (tmp_path / "a" / "tiny" / "aggregate.csv").read_bytes() == first

    def test_missing_config(self, capsys):
        assert call(["sweep", "nope.yaml"], capsys)[0] == 2

    def test_bad_grid(self, capsys, tmp_path):
        (tmp_path / "s.yaml").write_text("optimizers: [powell]\ntrials: 0\n")
        assert call(["sweep", "s.yaml"], capsys)[0] == 1


class TestWigner:
    def test_vacuum(self, capsys, tmp_path):
        code, _, _ = call(["wigner", "--target", "vacuum", "--range", "5", "--points", "201", "--output", "w.csv"], capsys)
        assert code == 0
        g = read_grid(tmp_path / "w.csv")
        assert g.at(0, 0) == pytest.approx(1 / np.pi, abs=1e-8)

    def test_zero_params_match_vacuum(self, capsys, tmp_path):
        (tmp_path / "t.json").write_text(json.dumps({"final_params": [0.0] * 10}))
        call(["wigner", "--params", "t.json", "--points", "41", "--output", "a.csv"], capsys)
        call(["wigner", "--target", "vacuum", "--points", "41", "--output", "b.csv"], capsys)
        np.testing.assert_allclose(read_grid(tmp_path / "a.csv").values, read_grid(tmp_path / "b.csv").values, atol=1e-12)

    def test_non_gaussian_negativity(self, capsys, tmp_path):
        call(["wigner", "--target", "non-gaussian", "--points", "101", "--output", "w.csv"], capsys)
        assert read_grid(tmp_path / "w.csv").values.min() < -0.05

    @pytest.mark.parametrize("argv", [
        ["wigner"],
        ["wigner", "--target", "vacuum", "--params", "x.json"],
        ["wigner", "--params", "missing.json"],
        ["wigner", "--target", "vacuum", "--points", "1"],
    ])
    def test_usage(self, capsys, argv):
        assert call(argv, capsys)[0] == 2


class TestReport:
    def test_idempotent(self, capsys, tmp_path):
        (tmp_path / "s.yaml").write_text(SWEEP_YAML)
        call(["sweep", "s.yaml", "--output-dir", "r"], capsys)
        d = tmp_path / "r" / "tiny"
        before = {p: p.read_bytes() for p in (d / "tables").iterdir()}
        assert call(["report", str(d)], capsys)[0] == 0
        assert {p: p.read_bytes() for p in (d / "tables").iterdir()} == before

    def test_missing(self, capsys):
        code, _, err = call(["report", "nowhere"], capsys)
        assert code == 1 and "not found" in err

    def test_empty(self, capsys, tmp_path):
        (tmp_path / "aggregate.csv").write_text("cell_id,target\n")
        code, _, err = call(["report", str(tmp_path)], capsys)
        assert code == 1 and "no rows" in err

    def test_no_args(self, capsys):
        assert call(["report"], capsys)[0] == 2


@pytest.mark.parametrize("sub", ["run", "sweep", "wigner", "report"])
def test_help_lists_defaults(sub, capsys):
    code, out, _ = call([sub, "--help"], capsys)
    assert code == 0
    if sub in ("run", "sweep", "wigner"):
        assert "--parallelism" in out or "--points" in out
        assert "default" in out


def test_unknown_subcommand(capsys):
    assert call(["frobnicate"], capsys)[0] == 2


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "qumodeprep", "--help"], capture_output=True, text=True)
    assert res.returncode == 0 and "sweep" in res.stdout


def test_parse_target():
    assert parse_target("gaussian:mean=3,std=0.5").mean == 3.0
    assert parse_target("vacuum", cutoff=6).cutoff == 6
