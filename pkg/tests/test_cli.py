import csv
import json
import math

import numpy as np
import pytest

from kprabhakar import ConfigError, Grid1D, SampledFunction
from kprabhakar.cli import main, parse_config, read_sampled_csv, write_csv


def _write(tmp_path, name, text):
    path = tmp_path / name
    path.write_text(text, encoding="utf-8")
    return str(path)


def test_parse_config_minimal():
    cfg = parse_config(
        "command=eval\nk=1\nalpha=1\nmu=1\ngamma=1\nomega=-1\nz=1\n"
    )
    assert cfg["command"] == "eval"
    assert cfg["z"] == "1"


def test_parse_config_comments_and_blanks():
    cfg = parse_config("# job\ncommand=verify\n\nids=Reduce_nu1  # subset\n")
    assert cfg["ids"] == "Reduce_nu1"


def test_parse_config_unknown_key_names_line():
    with pytest.raises(ConfigError, match="line 3"):
        parse_config("command=eval\nk=1\nalpa=1\n")


def test_parse_config_duplicate_key():
    with pytest.raises(ConfigError, match="duplicate"):
        parse_config("command=eval\nk=1\nk=2\n")


def test_parse_config_missing_command():
    with pytest.raises(ConfigError, match="command"):
        parse_config("k=1\n")


def test_parse_config_malformed_line():
    with pytest.raises(ConfigError, match="line 2"):
        parse_config("command=eval\nnot a pair\n")


def test_eval_writes_csv(tmp_path):
    cfg = _write(
        tmp_path, "job.cfg", "command=eval\nk=1\nalpha=1\nmu=1\ngamma=1\nomega=0\nz=0,1\n"
    )
    assert main(["eval", "--config", cfg, "--out", str(tmp_path)]) == 0
    rows = list(csv.reader(open(tmp_path / "eval.csv", newline="")))
    assert rows[0] == ["x", "value"]
    assert float(rows[1][1]) == pytest.approx(1.0)
    assert float(rows[2][1]) == pytest.approx(math.e, rel=1e-12)


def test_domain_error_exit_code(tmp_path):
    cfg = _write(
        tmp_path, "job.cfg", "command=eval\nk=1\nalpha=1\nmu=-1\ngamma=1\nomega=0\nz=1\n"
    )
    assert main(["eval", "--config", cfg, "--out", str(tmp_path)]) == 1


def test_hilfer_nu_out_of_range_exit_code(tmp_path):
    cfg = _write(
        tmp_path,
        "job.cfg",
        "command=apply\noperator=hilfer\nk=1\nalpha=1\nmu=0.5\ngamma=0\nomega=0\n"
        "nu=1.5\nfunction=one\ngrid_n=64\n",
    )
    assert main(["apply", "--config", cfg, "--out", str(tmp_path)]) == 1


def test_transform_convergence_violation_exit_code(tmp_path, capsys):
    cfg = _write(
        tmp_path,
        "job.cfg",
        "command=transform\nkind=laplace\noperator=kernel\n"
        "k=1\nalpha=1\nmu=1\ngamma=1\nomega=-5\nu=0.1\n",
    )
    assert main(["transform", "--config", cfg, "--out", str(tmp_path)]) == 1
    assert "geometric-series bound" in capsys.readouterr().err


def test_csv_round_trip(tmp_path):
    grid = Grid1D.from_span(0.0, 1.0, 17)
    values = np.sin(grid.nodes) * math.pi
    path = str(tmp_path / "f.csv")
    write_csv(path, ("x", "value"), list(zip(grid.nodes, values)))
    back = read_sampled_csv(path)
    assert np.array_equal(back.values, values)
    assert back.grid.count == 17


def test_apply_from_input_csv(tmp_path):
    grid = Grid1D.from_span(0.0, 2.0, 257)
    path = str(tmp_path / "f.csv")
    write_csv(path, ("x", "value"), [(x, 1.0) for x in grid.nodes])
    cfg = _write(
        tmp_path,
        "job.cfg",
        "command=apply\noperator=integral\nk=1\nalpha=1\nmu=1\ngamma=0\nomega=0\n"
        f"input={path}\n",
    )
    assert main(["apply", "--config", cfg, "--out", str(tmp_path)]) == 0
    out = read_sampled_csv(str(tmp_path / "apply.csv"))
    assert np.max(np.abs(out.values - grid.nodes)) <= 1e-10


def test_deterministic_outputs(tmp_path):
    cfg = _write(
        tmp_path,
        "job.cfg",
        "command=solve-relaxation\nk=1.3\nalpha=1\nmu=0.6\ngamma=0.2\nomega=-0.5\n"
        "nu=0.4\ndelta=0.1\nlam=-0.5\ninitial=1\nt_max=2\ngrid_n=128\n",
    )
    out1, out2 = tmp_path / "a", tmp_path / "b"
    assert main(["solve-relaxation", "--config", cfg, "--out", str(out1)]) == 0
    assert main(["solve-relaxation", "--config", cfg, "--out", str(out2)]) == 0
    assert (out1 / "relaxation.csv").read_bytes() == (out2 / "relaxation.csv").read_bytes()
    assert b"\r" not in (out1 / "relaxation.csv").read_bytes()


def test_solve_diffusion_writes_per_time_files(tmp_path):
    x = np.linspace(-12.0, 12.0, 241)
    path = str(tmp_path / "g.csv")
    write_csv(path, ("x", "value"), list(zip(x, np.exp(-(x**2) / 4.0))))
    cfg = _write(
        tmp_path,
        "job.cfg",
        "command=solve-diffusion\nk=2\nalpha=1.5\nmu=1.2\ngamma=0.3\nomega=-0.2\n"
        f"nu=0.5\ndiffusivity=1\ninput={path}\ntimes=0.1,0.25\n",
    )
    assert main(["solve-diffusion", "--config", cfg, "--out", str(tmp_path)]) == 0
    for name in ("u_t0.1.csv", "u_t0.25.csv"):
        rows = list(csv.reader(open(tmp_path / name, newline="")))
        assert rows[0] == ["x", "u"]
        assert len(rows) == 242


def test_verify_subset_exit_zero_and_report(tmp_path):
    cfg = _write(
        tmp_path,
        "job.cfg",
        "command=verify\nids=Duality_Sumudu_Laplace,Reduce_k1_classical\n",
    )
    assert main(["verify", "--config", cfg, "--out", str(tmp_path)]) == 0
    payload = json.loads((tmp_path / "report.json").read_text())
    assert len(payload) == 2
    assert all(r["passed"] for r in payload)


def test_verify_unknown_id_rejected(tmp_path):
    cfg = _write(tmp_path, "job.cfg", "command=verify\nids=NoSuchIdentity\n")
    assert main(["verify", "--config", cfg, "--out", str(tmp_path)]) == 1


def test_command_mismatch_rejected(tmp_path):
    cfg = _write(
        tmp_path, "job.cfg", "command=eval\nk=1\nalpha=1\nmu=1\ngamma=1\nomega=0\nz=1\n"
    )
    assert main(["verify", "--config", cfg, "--out", str(tmp_path)]) == 1


def test_threads_flag_validation(tmp_path):
    cfg = _write(
        tmp_path,
        "job.cfg",
        "command=verify\nids=Duality_Sumudu_Laplace\n",
    )
    assert (
        main(["verify", "--config", cfg, "--out", str(tmp_path), "--threads", "zero"])
        == 1
    )
    assert (
        main(["verify", "--config", cfg, "--out", str(tmp_path), "--threads", "2"])
        == 0
    )
