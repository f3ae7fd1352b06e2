from pathlib import Path

import pytest

from koopman_mpc.errors import ConfigError
from koopman_mpc.main import build_parser, main
from koopman_mpc.run_config import load_run_config, parse_override

QUICK = """
seed = 4

[mpc]
n_p = 2

[[scenarios]]
name = "quick"
duration = 0.04
reference_schedule = [[0.001, -169.0, 169.0]]
controller = "whitebox-mpc"
"""


def test_parser_collects_common_options():
    args = build_parser().parse_args(
        ["run", "--scenario", "nominal", "--controller", "foc"]
        + ["--set", "mpc.n_p=2", "--set", "seed=3"]
    )
    assert args.command == "run"
    assert args.controller == "foc"
    assert args.set == ["mpc.n_p=2", "seed=3"]
    assert args.stage == "run"


def test_parser_rejects_unknown_controller():
    with pytest.raises(SystemExit):
        build_parser().parse_args(["run", "--controller", "pid"])


def test_defaults_match_the_test_bench():
    cfg = load_run_config()
    assert cfg.mpc.n_p == 3
    assert cfg.timing.t_s == 50e-6
    assert cfg.koopman.dictionary.k == 4
    assert cfg.foc.carrier_freq == pytest.approx(3333.333, rel=1e-6)
    assert [s.name for s in cfg.scenarios][:2] == ["small_signal", "nominal"]


def test_overrides():
    cfg = load_run_config(
        overrides=["mpc.n_p=2", "koopman.method=normal", "foc.decoupling=false"], seed=9
    )
    assert cfg.mpc.n_p == 2
    assert cfg.koopman.method == "normal"
    assert cfg.foc.decoupling is False
    assert cfg.training_config().seed == 9
    assert parse_override("output.dir=results") == (["output", "dir"], "results")


@pytest.mark.parametrize(
    "override", ["mpc.bogus=1", "nonsense", "mpc.n_p=0", "koopman.method=qr"]
)
def test_bad_overrides(override):
    with pytest.raises(ConfigError):
        load_run_config(overrides=[override])


def test_config_file(tmp_path):
    path = tmp_path / "run.toml"
    path.write_text(QUICK)
    cfg = load_run_config(path, out=str(tmp_path / "out"))
    assert cfg.seed == 4
    assert cfg.mpc.n_p == 2
    assert cfg.scenario("quick").reference_schedule == [(0.001, -169.0, 169.0)]
    assert cfg.output_dir == tmp_path / "out"
    with pytest.raises(ConfigError):
        cfg.scenario("nominal")
    with pytest.raises(ConfigError):
        load_run_config(tmp_path / "missing.toml")


def test_shipped_config_files_load():
    root = Path(__file__).resolve().parents[1]
    example = load_run_config(root / "config.example.toml").model_dump(exclude={"output"})
    assert example == load_run_config().model_dump(exclude={"output"})
    acceptance = load_run_config(root / "acceptance.toml")
    assert acceptance.koopman.dictionary.include_constant is True
    assert acceptance.koopman.dictionary.k == 5
    assert acceptance.foc.reference_prefilter is True


def test_foc_per_scenario():
    cfg = load_run_config()
    small = cfg.foc_for(cfg.scenario("small_signal"))
    nominal = cfg.foc_for(cfg.scenario("nominal"))
    assert (small.a, small.oversampling) == (3.0, 6)
    assert (nominal.a, nominal.oversampling) == (4.0, 5)


def test_koopman_run_without_bank_fails(tmp_path, capsys):
    code = main(["run", "--controller", "koopman-mpc", "--out", str(tmp_path)])
    assert code == 1
    assert "error [run]" in capsys.readouterr().err


def test_unknown_scenario_fails_at_config(tmp_path, capsys):
    code = main(["run", "--scenario", "nowhere", "--out", str(tmp_path)])
    assert code == 1
    assert "error [config]" in capsys.readouterr().err


def test_report_without_logs_fails(tmp_path, capsys):
    assert main(["report", "--out", str(tmp_path)]) == 1
    assert "error [report]" in capsys.readouterr().err


@pytest.mark.slow
def test_run_then_report(tmp_path, capsys):
    path = tmp_path / "run.toml"
    path.write_text(QUICK)
    out = tmp_path / "out"
    assert main(["run", "--config", str(path), "--scenario", "quick", "--out", str(out)]) == 0
    assert (out / "logs" / "quick-whitebox-mpc_periods.csv").exists()
    assert (out / "quick-whitebox-mpc_metrics.csv").exists()
    assert "whitebox-mpc" in capsys.readouterr().out

    assert main(["report", "--config", str(path), "--out", str(out)]) == 0
    assert (out / "report.csv").read_text().startswith("controller,speed_rpm")


@pytest.mark.slow
def test_foc_run_reports_carrier(tmp_path, capsys):
    path = tmp_path / "run.toml"
    path.write_text(QUICK)
    argv = ["run", "--config", str(path), "--scenario", "quick", "--controller", "foc"]
    assert main(argv + ["--out", str(tmp_path / "out"), "--set", "foc.a=3"]) == 0
    assert "3333.3 Hz" in capsys.readouterr().out


@pytest.mark.slow
def test_train_is_reproducible_and_feeds_compare(tmp_path):
    first, second = tmp_path / "a", tmp_path / "b"
    assert main(["train", "--out", str(first)]) == 0
    assert main(["train", "--out", str(second)]) == 0
    bank = (first / "koopman_bank.txt").read_bytes()
    assert bank == (second / "koopman_bank.txt").read_bytes()
    assert bank.count(b"[K") == 7
    assert b"k: 4" in bank

    path = tmp_path / "run.toml"
    path.write_text(QUICK.replace("n_p = 2", "n_p = 3"))
    assert main(["compare", "--config", str(path), "--out", str(first)]) == 0
    rows = (first / "report.csv").read_text().splitlines()
    assert len(rows) == 4
    assert {row.split(",")[0] for row in rows[1:]} == {"foc", "koopman-mpc", "whitebox-mpc"}


@pytest.mark.slow
def test_train_surfaces_rank_deficiency(tmp_path, caplog):
    assert main(["train", "--out", str(tmp_path), "--set", "koopman.tol=0.5"]) == 0
    assert "RankDeficient" in caplog.text
