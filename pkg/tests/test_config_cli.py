import json
from pathlib import Path

import pytest
import yaml

from seap.cli import main, report_tables
from seap.config import config_from_dict, config_to_dict, load_config
from seap.errors import ConfigError
from seap.perf import bandwidth_model
from seap.report import build_report, report_schema, validate_report
from seap.simnet.runner import run_scenario
from seap.simnet.scenarios import EXTRA, GALLERY, gallery_config

SCENARIOS = Path(__file__).resolve().parent.parent / "scenarios"


@pytest.mark.parametrize("name", sorted(GALLERY) + sorted(EXTRA))
def test_yaml_matches_named_scenario(name):
    assert load_config(SCENARIOS / f"{name}.yaml") == gallery_config(name)


def test_config_roundtrip_and_overrides():
    cfg = gallery_config("channel-hop")
    assert config_from_dict(config_to_dict(cfg)) == cfg
    assert config_from_dict(config_to_dict(cfg), seed=9).seed == 9


@pytest.mark.parametrize(
    "data",
    [
        {"n_gs": "ten"},
        {"unknown_key": 1},
        {"window_ms": 0},
        {"t_percent": 150},
        {"schedule": {"template": "meo"}},
        {"adversary": {"strategy": "teleport"}},
        {"failed_elements": ["closed-anchor", "open-anchor"]},
        {"expected_hours": [1.0]},
    ],
)
def test_invalid_configs(data):
    with pytest.raises(ConfigError):
        config_from_dict(data)


def test_malformed_file_exit_2(tmp_path, capsys):
    bad = tmp_path / "bad.yaml"
    bad.write_text("n_gs: [unclosed\n")
    assert main(["run", "--config", str(bad)]) == 2
    assert "invalid YAML" in capsys.readouterr().err
    assert main(["run", "--config", str(tmp_path / "missing.yaml")]) == 2
    wrong = tmp_path / "wrong.yaml"
    wrong.write_text(yaml.safe_dump({"t_ch": -1}))
    assert main(["run", "--config", str(wrong)]) == 2


def test_run_honest_leo_report(tmp_path, capsys):
    out, trace = tmp_path / "r.json", tmp_path / "t.ndjson"
    code = main(["run", "--config", str(SCENARIOS / "honest-leo.yaml"), "--report-out", str(out), "--trace-out", str(trace)])
    assert code == 0
    report = json.loads(out.read_text())
    validate_report(report)
    assert report["outcome"] == "certified" and 6 <= report["hours_to_cert"] <= 11
    assert report["bytes_per_exchange"]["all"]["min"] == 1850
    assert len(trace.read_text().splitlines()) == report["trace_events"]


def test_run_channel_hop_json(capsys):
    assert main(["run", "--config", str(SCENARIOS / "channel-hop.yaml"), "--json"]) == 0
    report = json.loads(capsys.readouterr().out)
    assert report["outcome"] == "attack-failed" and report["threshold"] == 3
    assert report["max_corrupted_channel_yield"] == 2


def test_unexpected_outcome_exit_1(capsys):
    # A deadline too short to certify contradicts the honest expectation.
    assert main(["run", "--scenario", "honest-leo", "--deadline-ms", "60000"]) == 1


def test_cli_matches_library(capsys):
    assert main(["run", "--scenario", "relay-off", "--seed", "3", "--json"]) == 0
    via_cli = json.loads(capsys.readouterr().out)
    from dataclasses import replace

    via_lib = build_report(run_scenario(replace(gallery_config("relay-off"), seed=3)))
    assert via_cli == json.loads(json.dumps(via_lib))


@pytest.mark.parametrize("name", sorted(GALLERY))
def test_every_gallery_report_validates(name):
    validate_report(json.loads(json.dumps(build_report(run_scenario(gallery_config(name))))))


def test_schema_version_matches():
    assert report_schema()["properties"]["schema_version"]["const"] == "1.0"


def test_gallery_command(capsys):
    assert main(["gallery"]) == 0
    assert "9/9 scenarios as expected" in capsys.readouterr().out
    assert main(["gallery", "--scenario", "block-all", "--json"]) == 0
    rows = json.loads(capsys.readouterr().out)
    assert [r["scenario"] for r in rows] == ["block-all"]


def test_gallery_sweep_deterministic(capsys):
    args = ["gallery", "--seed", "5", "--sweep", "3", "--json"]
    assert main(args) == 0
    first = capsys.readouterr().out
    assert main(args + ["--workers", "3"]) == 0
    assert capsys.readouterr().out == first


def test_report_command(capsys):
    assert main(["report", "bandwidth", "--json"]) == 0
    table = json.loads(capsys.readouterr().out)
    assert table["per_message"] == bandwidth_model("ecc-p256-class").per_message
    assert main(["report", "latency", "--suite", "hybrid-ecc-falcon", "--json"]) == 0
    total = json.loads(capsys.readouterr().out)["leo"]["total_sequential_ms"]
    assert 400 <= total[0] and total[1] <= 1200
    assert main(["report", "cert-time"]) == 0
    assert "orbits_to_completion" in capsys.readouterr().out
    with pytest.raises(SystemExit) as exc:
        main(["report", "throughput"])
    assert exc.value.code == 2
    assert report_tables("cert-time", "ecc-p256-class", t_gs=3, t_ch=3, contacts=(2, 3))["orbits_to_completion"] == [4, 5]
