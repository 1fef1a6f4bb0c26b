import json
import xml.etree.ElementTree as ET

import pytest

from sociorepr.cli import main
from sociorepr.config import dump_config, parse_config, resolve_config
from sociorepr.experiments import ConfigError, ExperimentConfig, SweepRow
from sociorepr.output import read_csv, render_svg, write_csv


def test_empty_config_gives_defaults(tmp_path):
    p = tmp_path / "c.json"
    p.write_text("{}")
    assert parse_config(p) == ExperimentConfig()


def test_config_errors(tmp_path):
    p = tmp_path / "c.json"
    p.write_text('{"lambda_grid": [0, 1.5]}')
    with pytest.raises(ConfigError, match=r"lambda_grid.*\[0, 1\]"):
        parse_config(p)
    p.write_text('{"bogus": 1}')
    with pytest.raises(ConfigError, match="bogus"):
        parse_config(p)
    p.write_text("{not json")
    with pytest.raises(ConfigError, match="malformed"):
        parse_config(p)
    with pytest.raises(ConfigError, match="not found"):
        parse_config(tmp_path / "missing.json")
    with pytest.raises(ConfigError, match="trials"):
        resolve_config({"trials": 0})


def test_config_roundtrip(tmp_path):
    p = tmp_path / "c.json"
    p.write_text('{"length_scale": 2, "rho_grid": [1, 3], "patch_sizes": [1, [2, 4]]}')
    first = parse_config(p)
    q = tmp_path / "d.json"
    q.write_text(dump_config(first))
    assert parse_config(q) == first
    assert dump_config(parse_config(q)) == dump_config(first)


def test_override_precedence(tmp_path):
    p = tmp_path / "c.json"
    p.write_text('{"trials": 5, "master_seed": 3}')
    cfg = parse_config(p, ["trials=9", "individual_cost_cov=gp"], seed=11)
    assert (cfg.trials, cfg.master_seed, cfg.individual_cost_cov) == (9, 11, "gp")


def sample_rows():
    return [SweepRow("exp2", mean_return=0.1 * i, stderr=0.01, strategy="group", rho=rho, lam=lam,
                     cost_bits=12.5, return_norm=0.5, cost_norm=0.25,
                     u_prime=(1 - lam) * 0.5 - lam * 0.25)
            for i, (rho, lam) in enumerate([(r, l) for r in (0.1, 1.0) for l in (0.0, 0.3, 1.0)])]


def test_write_csv(tmp_path):
    write_csv([], tmp_path / "e.csv", "exp1")
    assert (tmp_path / "e.csv").read_text() == \
        "patch_w,patch_h,strategy,lambda,mean_return,stderr,cost_bits,return_norm,cost_norm,u_prime\n"
    rows = sample_rows()
    write_csv(rows, tmp_path / "a.csv")
    write_csv(rows, tmp_path / "b.csv")
    assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()
    assert b"\r" not in (tmp_path / "a.csv").read_bytes()
    for rec in read_csv(tmp_path / "a.csv"):
        lam = float(rec["lambda"])
        expected = (1 - lam) * float(rec["return_norm"]) - lam * float(rec["cost_norm"])
        assert float(rec["u_prime"]) == pytest.approx(expected, abs=1e-7)


def test_render_svg(tmp_path):
    one = sample_rows()[:1]
    render_svg(one, "line", tmp_path / "one.svg")
    ET.parse(tmp_path / "one.svg")
    rows = sample_rows()
    render_svg(rows, "heatmap", tmp_path / "h1.svg")
    render_svg(rows, "heatmap", tmp_path / "h2.svg")
    assert (tmp_path / "h1.svg").read_bytes() == (tmp_path / "h2.svg").read_bytes()
    root = ET.parse(tmp_path / "h1.svg").getroot()
    cells = [e for e in root.iter() if e.get("class") == "cell"]
    assert len(cells) == len({r.rho for r in rows}) * len({r.lam for r in rows})
    with pytest.raises(ValueError):
        render_svg([], "line", tmp_path / "x.svg")


SMALL = ["--set", "grid_width=4", "--set", "grid_height=4", "--set", "trials=5", "--set", "repetitions=2",
         "--set", "patch_sizes=[1,2,4]", "--set", "fig1_agents=10", "--set", "rho_grid=[0.5,2]"]


def test_cli_exit_codes(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text('{"lambda_grid": [2]}')
    assert main(["exp1", "--config", str(bad), "--out", str(tmp_path / "o")]) == 2
    assert "lambda_grid" in capsys.readouterr().err
    assert main(["exp1", "--set", "length_scale=6", "--set", "jitter=0", "--out", str(tmp_path / "o")]) == 3
    blocker = tmp_path / "file"
    blocker.write_text("")
    assert main(["exp1", *SMALL, "--out", str(blocker / "sub")]) == 4


def test_cli_run_and_manifest(tmp_path, capsys):
    out = tmp_path / "run"
    assert main(["exp2", *SMALL, "--seed", "3", "--plot", "--out", str(out)]) == 0
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["master_seed"] == 3 and manifest["config"]["trials"] == 5
    assert set(manifest["outputs"]) == {"exp2.csv", "exp2_line.svg", "exp2_heatmap_group.svg",
                                        "exp2_heatmap_individual.svg"}
    import hashlib
    for name, digest in manifest["outputs"].items():
        assert hashlib.sha256((out / name).read_bytes()).hexdigest() == digest
    assert set(manifest["normalization"]["exp2"]) == {"return_min", "return_max", "cost_min", "cost_max"}


def test_cli_entropy(capsys):
    assert main(["entropy", "--set", "n_groups=2", "--set", "m_per_group=4"]) == 0
    report = json.loads(capsys.readouterr().out)
    assert report["group"]["assignment_bits_per_agent"] == 1.0
    assert report["group"]["n_agents"] == 8
    costs = [a["cost_bits"] for a in report["aggregated"]]
    assert costs == sorted(costs, reverse=True)
