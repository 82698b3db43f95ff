"""End-to-end tests for the command-line interface and its exit-code contract."""

import csv
import json

import pytest

from bcs_tc_lab.cli import main

FAST = ["--grid-nodes", "14"]


def run(argv):
    return main([str(a) for a in argv])


# ---------------------------------------------------------------------------
# tc
# ---------------------------------------------------------------------------


def test_tc_writes_json_and_orders_tl_tu(tmp_path):
    tu = tmp_path / "tu.json"
    tl = tmp_path / "tl.json"
    rc1 = run(["tc", "--target", "tu", "--interaction", "gaussian",
               "--mu", "1", "--lambda", "0.5", "--out", tu] + FAST)
    rc2 = run(["tc", "--target", "tl", "--interaction", "gaussian",
               "--mu", "1", "--lambda", "0.5", "--out", tl] + FAST)
    assert rc1 == 0 and rc2 == 0
    d_tu = json.loads(tu.read_text())
    d_tl = json.loads(tl.read_text())
    assert d_tu["version"] == "bcs-tc-lab/1"
    assert d_tu["config_digest"].startswith("sha256:")
    assert d_tu["package_version"]
    assert d_tu["T"] > 0.0
    assert d_tl["T"] <= d_tu["T"] * (1.0 + 1e-9)
    for key in ("target", "T", "q_star", "residual", "grid"):
        assert key in d_tu
    assert d_tu["grid"]["base_nodes"] == 14


def test_tc_flag_overrides_config_file(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"mu": 1.0, "lambda": 0.5, "target": "tc0"}))
    out = tmp_path / "tc.json"
    rc = run(["tc", "--config", cfg, "--mu", "2.0", "--out", out] + FAST)
    assert rc == 0
    assert json.loads(out.read_text())["grid"]["mu"] == 2.0


def test_tc_numeric_failure_exit_1_no_file(tmp_path, capsys):
    out = tmp_path / "never.json"
    rc = run(["tc", "--lambda", "0.001", "--out", out] + FAST)
    assert rc == 1
    assert not out.exists()
    captured = capsys.readouterr().out
    payload = json.loads(captured[captured.index("{"):])
    assert payload["error"]["type"] == "NoBracketError"
    assert payload["version"] == "bcs-tc-lab/1"


# ---------------------------------------------------------------------------
# config validation (exit 2, no output)
# ---------------------------------------------------------------------------


@pytest.mark.parametrize(
    "content",
    [
        '{"mu": 1.0, "bogus_key": 3}',
        "{not json",
        '{"target": "nope"}',
        '{"interaction": "unknown_kind"}',
        '{"interaction": {"kind": "gaussian", "radius": 2.0}}',
        '{"tol": 0.5}',
        '{"dim": 7}',
        "[1, 2, 3]",
    ],
)
def test_malformed_config_exit_2_no_output(tmp_path, content):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(content)
    out = tmp_path / "out.json"
    rc = run(["tc", "--config", cfg, "--out", out])
    assert rc == 2
    assert not out.exists()


def test_sweep_empty_lambda_list_exit_2(tmp_path):
    assert run(["sweep", "--lambdas", "", "--out", tmp_path / "s.csv"]) == 2
    cfg = tmp_path / "cfg.json"
    cfg.write_text('{"lambdas": []}')
    assert run(["sweep", "--config", cfg, "--out", tmp_path / "s.csv"]) == 2


def test_plot_requires_out():
    assert run(["kernel-eval", "--plot"]) == 2


# ---------------------------------------------------------------------------
# sweep
# ---------------------------------------------------------------------------


def test_sweep_csv_header_and_fit_json(tmp_path):
    out = tmp_path / "sweep.csv"
    rc = run(["sweep", "--interaction", "gaussian", "--mu", "1",
              "--lambdas", "0.6,0.5,0.42,0.36", "--target", "tc0",
              "--out", out] + FAST)
    assert rc == 0
    lines = out.read_bytes().decode("utf-8").split("\r\n")
    assert lines[0].startswith("# bcs-tc-lab/1 config_digest=sha256:")
    assert lines[1] == "lambda,temp,ln_mu_over_T,q_star"
    rows = list(csv.DictReader(lines[1:-1] if lines[-1] == "" else lines[1:]))
    assert len(rows) == 4
    temps = [float(r["temp"]) for r in rows]
    assert all(b < a for a, b in zip(temps[:-1], temps[1:]))

    fit = json.loads((tmp_path / "sweep.fit.json").read_text())
    assert fit["version"] == "bcs-tc-lab/1"
    assert fit["fit"]["n_used"] == 4
    assert fit["sphere_spectrum"]["e_s"] == pytest.approx(0.45293, rel=1e-3)
    assert fit["fit"]["predicted_slope"] == pytest.approx(
        fit["sphere_spectrum"]["predicted_slopes"]["Tc0"])
    assert fit["config_digest"] == lines[0].split("config_digest=")[1].split()[0]


def test_sweep_stdout_mode(capsys):
    rc = run(["sweep", "--lambdas", "0.6,0.5,0.42,0.36", "--target", "tc0"] + FAST)
    assert rc == 0
    out = capsys.readouterr().out
    assert "lambda,temp,ln_mu_over_T,q_star" in out
    assert '"version": "bcs-tc-lab/1"' in out


# ---------------------------------------------------------------------------
# verify
# ---------------------------------------------------------------------------


def test_verify_single_suite_writes_report(tmp_path):
    out = tmp_path / "lemma41.json"
    rc = run(["verify", "--suite", "lemma41", "--mu", "1", "--out", out])
    assert rc == 0
    payload = json.loads(out.read_text())
    assert payload["suite"] == "lemma41"
    assert payload["report"]["passed"] is True
    assert payload["report"]["lemma"] == "lemma41"


def test_verify_regions_dim1_exit_2(tmp_path):
    out = tmp_path / "nope.json"
    rc = run(["verify", "--suite", "regions", "--dim", "1", "--out", out])
    assert rc == 2
    assert not out.exists()


def test_verify_bad_suite_name_exit_2():
    assert run(["verify", "--suite", "lemma99"]) == 2


# ---------------------------------------------------------------------------
# kernel-eval
# ---------------------------------------------------------------------------


def test_kernel_eval_table_contract(tmp_path):
    out = tmp_path / "kern.csv"
    rc = run(["kernel-eval", "--mu", "1", "--out", out])
    assert rc == 0
    lines = out.read_bytes().decode("utf-8").split("\r\n")
    assert lines[1] == "p,q,T,K,B,N,M"
    rows = list(csv.DictReader([l for l in lines[1:] if l]))
    assert rows
    for r in rows:
        b, n = float(r["B"]), float(r["N"])
        assert b <= n * (1.0 + 1e-12) + 1e-15
    sentinels = [r for r in rows if r["M"] == "inf"]
    assert sentinels
    # the pole set of the majorant is exactly {(sqrt(mu), 0), (0, sqrt(mu))}
    assert all(
        (float(r["p"]), float(r["q"])) in ((1.0, 0.0), (0.0, 1.0)) for r in sentinels
    )
    finite_m = [r for r in rows if r["M"] != "inf"]
    assert all(float(r["N"]) <= float(r["M"]) * (1.0 + 1e-12) + 1e-15 for r in finite_m)


def test_kernel_eval_single_column_and_bad_name(tmp_path):
    out = tmp_path / "b.csv"
    assert run(["kernel-eval", "--kernel", "B", "--out", out]) == 0
    assert out.read_bytes().decode("utf-8").split("\r\n")[1] == "p,q,T,B"
    assert run(["kernel-eval", "--kernel", "Z", "--out", tmp_path / "z.csv"]) == 2
    assert not (tmp_path / "z.csv").exists()


# ---------------------------------------------------------------------------
# determinism and plotting
# ---------------------------------------------------------------------------


def test_byte_identical_outputs(tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    for pth in (a, b):
        assert run(["tc", "--lambda", "0.5", "--out", pth] + FAST) == 0
    assert a.read_bytes() == b.read_bytes()

    ca, cb = tmp_path / "a.csv", tmp_path / "b.csv"
    for pth in (ca, cb):
        assert run(["kernel-eval", "--out", pth]) == 0
    assert ca.read_bytes() == cb.read_bytes()


def test_plot_renders_figure(tmp_path):
    out = tmp_path / "sweep.csv"
    rc = run(["sweep", "--lambdas", "0.6,0.5,0.42,0.36", "--target", "tc0",
              "--out", out, "--plot"] + FAST)
    assert rc == 0
    png = tmp_path / "sweep.png"
    assert png.exists() and png.stat().st_size > 1000
