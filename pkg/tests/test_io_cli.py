import json
import math
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest

from qba import cli
from qba.channels import CqChannel, KrausChannel, amplitude_damping, random_cq
from qba.errors import ValidationError
from qba.io import channel_document, parse_channel_file, parse_gibbs, write_channel_file

CHANNELS = Path(__file__).resolve().parent.parent / "channels"


def write_json(path, doc):
    path.write_text(json.dumps(doc))
    return str(path)


def run_cli(args, capsys):
    code = cli.main(args)
    out = capsys.readouterr().out.strip()
    return code, (json.loads(out) if out else None)


def test_parse_amplitude_damping_file():
    ch = parse_channel_file(CHANNELS / "amplitude_damping_0.3.json")
    assert isinstance(ch, KrausChannel)
    assert ch.kraus_rank == 2
    assert np.allclose(ch.kraus_ops, amplitude_damping(0.3).kraus_ops, atol=1e-15)


def test_parse_sample_files():
    assert isinstance(parse_channel_file(CHANNELS / "orthogonal_cq4.json"), CqChannel)
    q = parse_channel_file(CHANNELS / "bsc_0.1.json")
    assert np.allclose(q, [[0.9, 0.1], [0.1, 0.9]])


def test_incomplete_kraus_rejected(tmp_path):
    path = write_json(tmp_path / "bad.json", {"kraus": [(math.sqrt(0.9) * np.eye(2)).tolist()]})
    with pytest.raises(ValidationError, match=r"completeness residual 0\.1 ") as info:
        parse_channel_file(path)
    assert info.value.invariant == "completeness"
    assert abs(info.value.residual - 0.1) <= 1e-12


def test_cq_trace_rejected(tmp_path):
    path = write_json(tmp_path / "bad.json", {"cq": [[[0.49, 0], [0, 0.49]], [[1, 0], [0, 0]]]})
    with pytest.raises(ValidationError, match="trace") as info:
        parse_channel_file(path)
    assert info.value.invariant == "trace"
    assert abs(info.value.residual - 0.02) <= 1e-12


def test_cq_negative_rejected(tmp_path):
    path = write_json(tmp_path / "bad.json", {"cq": [[[1.1, 0], [0, -0.1]]]})
    with pytest.raises(ValidationError) as info:
        parse_channel_file(path)
    assert info.value.invariant == "psd"


def test_stochastic_rejected(tmp_path):
    path = write_json(tmp_path / "bad.json", {"stochastic": [[0.5, 0.5], [0.4, 0.5]]})
    with pytest.raises(ValidationError) as info:
        parse_channel_file(path)
    assert info.value.invariant == "stochastic"


def test_malformed_json_reports_line(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text('{\n "kraus": [\n  [[1, 0], [0 1]]\n ]\n}\n')
    with pytest.raises(ValidationError, match="line 3"):
        parse_channel_file(path)


def test_field_context_in_errors(tmp_path):
    path = write_json(tmp_path / "bad.json", {"kraus": [[[1, 0], [0, "x"]]]})
    with pytest.raises(ValidationError, match=r"kraus\[0\]\[1\]\[1\]"):
        parse_channel_file(path)


def test_exactly_one_channel_key(tmp_path):
    with pytest.raises(ValidationError):
        parse_channel_file(write_json(tmp_path / "a.json", {"dims": {"in": 2}}))
    with pytest.raises(ValidationError):
        parse_channel_file(write_json(tmp_path / "b.json", {"kraus": [[[1]]], "cq": [[[1]]]}))


def test_dims_mismatch(tmp_path):
    doc = {"dims": {"in": 3, "out": 2}, "kraus": [np.eye(2).tolist()]}
    with pytest.raises(ValidationError, match="dims.in"):
        parse_channel_file(write_json(tmp_path / "d.json", doc))


def test_complex_entries_round_trip(tmp_path):
    ch = random_cq(3, 2, seed=4)
    path = tmp_path / "cq.json"
    write_channel_file(ch, path)
    back = parse_channel_file(path)
    assert np.allclose(back.outputs, ch.outputs, atol=1e-15)
    assert channel_document(back)["dims"] == {"in": 3, "out": 2}


def test_parse_gibbs_hamiltonians():
    doc = {"gibbs": {"H_A": [[0, 0], [0, 1]], "H_B": [[0, 0], [0, 1]], "beta": 2.0}}
    spec = parse_gibbs(doc, 2, 2)
    assert np.allclose(spec.gamma_A, np.diag([1.0, math.exp(-0.5)]))
    assert parse_gibbs({}, 2, 2) is None
    with pytest.raises(ValidationError):
        parse_gibbs(doc, 3, 2)


def test_cli_mutual_ad(capsys):
    code, rec = run_cli(["mutual", str(CHANNELS / "amplitude_damping_0.3.json")], capsys)
    assert code == 0
    assert rec["terminated_by"] == "PosteriorGap"
    assert 6 <= rec["iterations"] <= 24
    assert rec["posterior_gap"] <= 1e-6


def test_cli_holevo_orthogonal_bits(capsys):
    path = str(CHANNELS / "orthogonal_cq4.json")
    code, nats = run_cli(["holevo", path], capsys)
    assert code == 0 and nats["iterations"] == 1
    assert abs(nats["capacity"] - math.log(4)) <= 1e-9
    code, bits = run_cli(["holevo", path, "--log-base", "bits"], capsys)
    assert bits["capacity"] == 2.0
    assert bits["unit"] == "bits"


def test_cli_bits_is_nats_over_ln2(capsys):
    path = str(CHANNELS / "amplitude_damping_0.3.json")
    _, nats = run_cli(["thermo", path, "--no-timing"], capsys)
    _, bits = run_cli(["thermo", path, "--no-timing", "--log-base", "bits"], capsys)
    # both values carry 12 significant digits
    assert abs(bits["capacity"] - nats["capacity"] / math.log(2)) <= 1e-11 * abs(bits["capacity"])
    assert bits["iterations"] == nats["iterations"]


def test_cli_classical_matches_holevo(capsys):
    path = str(CHANNELS / "nonconcave_stochastic.json")
    _, a = run_cli(["classical", path, "--epsilon", "1e-10"], capsys)
    _, b = run_cli(["holevo", path, "--epsilon", "1e-10"], capsys)
    assert abs(a["capacity"] - b["capacity"]) <= 1e-8
    _, c = run_cli(["holevo", str(CHANNELS / "nonconcave_cq.json"), "--epsilon", "1e-10"], capsys)
    assert abs(a["capacity"] - c["capacity"]) <= 1e-8


def test_cli_budget_exit(capsys):
    code, rec = run_cli(["mutual", str(CHANNELS / "amplitude_damping_0.3.json"), "--max-iters", "3"], capsys)
    assert code == 2
    assert rec["terminated_by"] == "IterationBudget"


def test_cli_input_errors(tmp_path, capsys):
    bad = write_json(tmp_path / "bad.json", {"kraus": [(math.sqrt(0.9) * np.eye(2)).tolist()]})
    assert cli.main(["mutual", bad]) == 1
    assert "completeness residual 0.1 " in capsys.readouterr().err
    # Kraus subcommand on a cq file
    assert cli.main(["mutual", str(CHANNELS / "orthogonal_cq4.json")]) == 1
    assert cli.main(["mutual", str(tmp_path / "missing.json")]) == 1
    assert cli.main(["mutual", str(CHANNELS / "amplitude_damping_0.3.json"), "--mode", "fixed-gamma=-1"]) == 1
    assert cli.main(["classical", str(CHANNELS / "bsc_0.1.json"), "--mode", "adaptive"]) == 1


def test_cli_coherent_not_certified(tmp_path, capsys):
    path = tmp_path / "ad07.json"
    write_channel_file(amplitude_damping(0.7), path)
    code, rec = run_cli(["coherent", str(path), "--max-iters", "200"], capsys)
    assert code in (0, 2)
    assert rec["flag"] == "NotCertified"
    assert rec["less_noisy"] is False


def test_cli_coherent_certified(capsys):
    code, rec = run_cli(["coherent", str(CHANNELS / "amplitude_damping_0.3.json")], capsys)
    assert code == 0
    assert rec["less_noisy"] is True and "flag" not in rec


def test_cli_entropy_gain_and_cb_min(capsys):
    path = str(CHANNELS / "amplitude_damping_0.3.json")
    _, rec = run_cli(["entropy-gain", path], capsys)
    assert rec["entropy_gain"] == -rec["capacity"]
    _, rec = run_cli(["cb-min", path], capsys)
    assert "cb_min_conditional_entropy" in rec


def test_cli_adaptive_and_fixed(capsys):
    path = str(CHANNELS / "amplitude_damping_0.3.json")
    _, std = run_cli(["mutual", path], capsys)
    _, ada = run_cli(["mutual", path, "--mode", "adaptive"], capsys)
    _, fix = run_cli(["mutual", path, "--mode", "fixed-gamma=2"], capsys)
    assert ada["iterations"] < std["iterations"]
    assert fix["iterations"] == std["iterations"]
    assert abs(ada["capacity"] - std["capacity"]) <= 1e-6


def test_trace_csv_deterministic(tmp_path, capsys):
    path = str(CHANNELS / "amplitude_damping_0.3.json")
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    for out in (a, b):
        assert cli.main(["thermo", path, "--mode", "adaptive", "--trace", str(out), "--no-timing"]) == 0
    capsys.readouterr()
    assert a.read_bytes() == b.read_bytes()
    lines = a.read_text().splitlines()
    assert lines[0] == "t,capacity_estimate,posterior_gap,gamma,log_Z,elapsed_ms"
    assert len(lines) > 2


def test_trace_csv_columns(tmp_path, capsys):
    out = tmp_path / "t.csv"
    cli.main(["mutual", str(CHANNELS / "amplitude_damping_0.3.json"), "--trace", str(out)])
    rec = json.loads(capsys.readouterr().out)
    rows = [line.split(",") for line in out.read_text().splitlines()[1:]]
    assert len(rows) == rec["iterations"]
    assert [int(r[0]) for r in rows] == list(range(1, len(rows) + 1))
    assert all(float(r[3]) == 2.0 for r in rows)


def test_eig_tol_env(monkeypatch, capsys):
    monkeypatch.setenv("QBA_EIG_TOL", "1e-14")
    code, _ = run_cli(["mutual", str(CHANNELS / "amplitude_damping_0.3.json")], capsys)
    assert code == 0


def test_module_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "qba", "holevo", str(CHANNELS / "orthogonal_cq4.json"), "--log-base", "bits"],
        capture_output=True,
        text=True,
        check=False,
    )
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["capacity"] == 2.0
