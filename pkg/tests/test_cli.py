import json
import shutil
import subprocess

import numpy as np
import pytest

from resilient_recovery.cli import main

SKEWED = "1\n1\n3\n"


def run_cli(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def write(tmp_path, name, text):
    path = tmp_path / name
    path.write_text(text)
    return str(path)


def test_certify_command(tmp_path, capsys):
    matrix = write(tmp_path, "h.csv", SKEWED)
    code, out, _ = run_cli(capsys, "certify", "--matrix", matrix, "--order", "1",
                           "--rip", "1", "--uniqueness", "1", "1")
    assert code == 0
    lines = out.splitlines()
    assert lines[0] == "csp order=1 beta=1.5 exact=true witness=3"
    assert lines[1] == "rip order=1 delta=8 mode=effective exact=true witness=3"
    assert lines[2] == ("uniqueness k=1 horizon=1 deletion=2 unique=true "
                        "exhaustive=true witness=-")


def test_decode_command(tmp_path, capsys):
    matrix = write(tmp_path, "h.csv", SKEWED)
    y = write(tmp_path, "y.csv", "0\n0\n1.5\n")
    code, out, _ = run_cli(capsys, "decode", "--matrix", matrix, "--y", y)
    assert code == 0
    assert out.splitlines() == [
        "objective=1",
        f"residual_l2={np.sqrt(0.5):.12g}",
        "x_hat=0.5",
    ]


def test_decode_command_with_prior(tmp_path, capsys):
    matrix = write(tmp_path, "h.csv", SKEWED)
    y = write(tmp_path, "y.csv", "0\n0\n1.5\n")
    prior = write(tmp_path, "prior.csv", "3\n")
    code, out, _ = run_cli(capsys, "decode", "--matrix", matrix, "--y", y,
                           "--prior", prior)
    assert code == 0
    assert out.splitlines() == [
        "objective=0.015",
        "residual_l2=1.5",
        "x_hat=0",
    ]


def test_attack_command(tmp_path, capsys):
    matrix = write(tmp_path, "h.csv", SKEWED)
    code, out, _ = run_cli(capsys, "attack", "--matrix", matrix,
                           "--support", "3", "--eps", "1.0")
    assert code == 0
    assert out.splitlines() == [
        "sigma1=1.5",
        f"alpha_max={0.3153009687409354:.12g}",
        "x_e=0.5",
        "e=0,0,1.5",
    ]


def test_bounds_command(tmp_path, capsys):
    code, out, _ = run_cli(capsys, "bounds", "--kind", "csp", "--beta", "0.5",
                           "--sigma-min", str(np.sqrt(3.0)), "--eps", "1")
    assert code == 0
    lines = out.splitlines()
    assert lines[0] == "kind=csp"
    assert lines[1] == f"value={3.464101615137755:.12g}"
    assert lines[2] == "condition_ok=true"


def test_bounds_command_missing_parameter(tmp_path, capsys):
    code, _, err = run_cli(capsys, "bounds", "--kind", "rip", "--eps", "1")
    assert code == 2
    assert "needs --" in err


def test_surface_command(tmp_path, capsys):
    out_path = tmp_path / "surface.csv"
    code, out, _ = run_cli(capsys, "surface", "--out", str(out_path))
    assert code == 0
    assert out.strip() == f"wrote 110 cells to {out_path}"
    lines = out_path.read_text().splitlines()
    assert lines[0].startswith("# version=")
    assert lines[1] == "omega,ppv,kappa,mu2,bound,delta_upper"
    assert len(lines) == 2 + 110


def test_missing_input_file_is_config_error(tmp_path, capsys):
    code, _, err = run_cli(capsys, "decode", "--matrix",
                           str(tmp_path / "nope.csv"), "--y",
                           str(tmp_path / "nope2.csv"))
    assert code == 2
    assert err.startswith("error:")


def test_unknown_subcommand_exits_two():
    with pytest.raises(SystemExit) as exc:
        main(["frobnicate"])
    assert exc.value.code == 2


def test_version_flag():
    with pytest.raises(SystemExit) as exc:
        main(["--version"])
    assert exc.value.code == 0


def _sweep_config(tmp_path, **overrides):
    cfg = dict(m_range=[8, 8], n_range=[4, 4], p_attack=0.4, trials=5, seed=3)
    cfg.update(overrides)
    return write(tmp_path, "cfg.json", json.dumps(cfg))


def test_sweep_command_deterministic_across_runs_and_jobs(tmp_path, capsys):
    cfg = _sweep_config(tmp_path)
    outputs = []
    for name, jobs in (("a.csv", "1"), ("b.csv", "1"), ("c.csv", "2")):
        out_path = tmp_path / name
        code, _, _ = run_cli(capsys, "sweep", "--config", cfg,
                             "--out", str(out_path), "--jobs", jobs)
        assert code == 0
        outputs.append(out_path.read_bytes())
    assert outputs[0] == outputs[1] == outputs[2]
    text = outputs[0].decode()
    assert text.startswith("# seed=3 version=")
    assert "m,n,p_attack,agreement,omega,trials,successes,ratio" in text


def test_sweep_command_bad_config(tmp_path, capsys):
    cfg = write(tmp_path, "bad.json", "{broken")
    code, _, err = run_cli(capsys, "sweep", "--config", cfg,
                           "--out", str(tmp_path / "x.csv"))
    assert code == 2
    assert "error:" in err


def test_scurve_command_deterministic(tmp_path, capsys):
    cfg = _sweep_config(tmp_path, p_attack=[0.0, 1.0], agreement=[0.8], trials=4)
    first = tmp_path / "c1.csv"
    second = tmp_path / "c2.csv"
    for out_path in (first, second):
        code, _, _ = run_cli(capsys, "scurve", "--config", cfg,
                             "--out", str(out_path))
        assert code == 0
    assert first.read_bytes() == second.read_bytes()
    lines = first.read_text().splitlines()
    assert lines[1] == "p_attack,setting,ratio,stderr"
    assert len(lines) == 2 + 4


def test_console_script_installed():
    exe = shutil.which("rr")
    assert exe is not None
    proc = subprocess.run([exe, "--version"], capture_output=True, text=True)
    assert proc.returncode == 0
    assert proc.stdout.startswith("rr ")
