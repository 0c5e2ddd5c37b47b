"""Config parsing, validation messages, round-trips, artifacts, exit codes."""

import csv
import json
import xml.etree.ElementTree as ET

import pytest
import yaml

from orbitcount.cli import (
    ConfigValidationError,
    emit_config,
    main,
    parse_config,
    run,
)


def base_doc(**kw):
    doc = {
        "mode": "experiment",
        "map": "doubling",
        "rate": {"family": "power", "c": "1/2", "p": "1"},
        "n_max": 100,
        "samples": 4,
        "seed": 7,
    }
    doc.update(kw)
    return doc


def test_happy_path_parse():
    cfg = parse_config(base_doc())
    assert cfg.mode == "experiment"
    assert cfg.map.dimension == 1
    assert cfg.checkpoints[-1] == 100
    assert cfg.canonical["rate"][0] == {"family": "power", "c": "1/2", "p": "1"}


def test_invalid_branch_reports_key():
    doc = base_doc(
        map={
            "axes": [
                [
                    {"left": "0", "right": "1/2", "slope": "3/2", "offset": "0"},
                    {"left": "1/2", "right": "1", "slope": "2", "offset": "1"},
                ]
            ]
        }
    )
    with pytest.raises(ConfigValidationError) as err:
        parse_config(doc)
    assert any("map:" in p and "image" in p for p in err.value.problems)


def test_negative_rate_reports_key():
    doc = base_doc(rate={"family": "power", "c": "-1/2", "p": "1"})
    with pytest.raises(ConfigValidationError) as err:
        parse_config(doc)
    assert any("rate" in p and ">= 0" in p for p in err.value.problems)


def test_zero_samples_invalid():
    with pytest.raises(ConfigValidationError) as err:
        parse_config(base_doc(samples=0))
    assert any(p.startswith("samples") for p in err.value.problems)


def test_multiple_problems_collected():
    with pytest.raises(ConfigValidationError) as err:
        parse_config(base_doc(samples=0, metric="euclidean", n_max=-3))
    keys = {p.split(":")[0] for p in err.value.problems}
    assert {"samples", "metric", "n_max"} <= keys


def test_roundtrip_canonical():
    cfg = parse_config(base_doc())
    text = emit_config(cfg)
    cfg2 = parse_config(yaml.safe_load(text))
    assert cfg2.canonical == cfg.canonical
    assert cfg2.config_hash() == cfg.config_hash()


def test_hash_changes_on_meaningful_fields_only():
    cfg = parse_config(base_doc())
    assert parse_config(base_doc(seed=8)).config_hash() != cfg.config_hash()
    assert (
        parse_config(base_doc(rate={"family": "power", "c": "1/3", "p": "1"})).config_hash()
        != cfg.config_hash()
    )
    # out/threads/format are execution details, absent from the canonical form
    assert parse_config(base_doc(out="elsewhere/")).config_hash() == cfg.config_hash()
    assert "out" not in cfg.canonical


def test_measure_mode_artifacts(tmp_path):
    doc = base_doc(
        mode="measure",
        rate={"family": "constant", "c": "1/4"},
        measure={"kind": "recurrence", "ns": [1]},
    )
    cfg = parse_config(doc)
    code = run(cfg, tmp_path, fmt="csv")
    assert code == 0
    rows = list(csv.reader(open(tmp_path / "measure.csv")))
    assert rows[0] == ["kind", "n", "measure_exact", "measure_float"]
    assert rows[1] == ["recurrence", "1", "1/2", "0.5"]
    manifest = json.loads((tmp_path / "manifest.json").read_text())
    assert manifest["config_hash"] == cfg.config_hash()


def test_mixing_mode_artifacts(tmp_path):
    doc = base_doc(
        mode="mixing",
        mixing={"e": [["0", "1/3"]], "f": [[["0", "1/2"]]], "ns": [1]},
    )
    cfg = parse_config(doc)
    assert run(cfg, tmp_path) == 0
    rows = list(csv.reader(open(tmp_path / "mixing.csv")))
    assert rows[1][2] == "1/12"


def test_intersect_mode(tmp_path):
    doc = base_doc(
        mode="intersect",
        rate={"family": "table", "values": ["1/4", "1/8"]},
        n_max=2,
        intersect={"pairs": [[1, 2]]},
    )
    cfg = parse_config(doc)
    assert run(cfg, tmp_path) == 0
    rows = list(csv.reader(open(tmp_path / "intersect.csv")))
    assert rows[1] == ["intersection", "1", "2", "1/12", str(1 / 12)]


def test_experiment_mode_artifacts_and_charts(tmp_path):
    doc = base_doc(
        n_max=2000,
        samples=12,
        # log factors dominate at this tiny scale; keep thresholds loose
        experiment={"kind": "recurrence", "thresholds": {"rel_err": 0.5, "slope_band_max": 3.0}},
        rate={"family": "power", "c": "1/2", "p": "1/2"},
    )
    cfg = parse_config(doc)
    code = run(cfg, tmp_path)
    assert code == 0
    report = json.loads((tmp_path / "report.json").read_text())
    assert report["schema_version"] == 1
    assert len(report["checkpoints"]) == len(cfg.checkpoints)
    assert (tmp_path / "counts.csv").exists()
    for chart in ("deviation.svg", "envelope.svg"):
        tree = ET.parse(tmp_path / chart)  # well-formed XML
        assert tree.getroot().tag.endswith("svg")


def test_count_mode_csv(tmp_path):
    doc = base_doc(mode="count", n_max=50, samples=3)
    cfg = parse_config(doc)
    assert run(cfg, tmp_path) == 0
    rows = list(csv.reader(open(tmp_path / "counts.csv")))
    assert rows[0][0] == "seed"
    assert len(rows) == 1 + 3 * len(cfg.checkpoints)


def test_target_mode_requires_center():
    with pytest.raises(ConfigValidationError):
        parse_config(base_doc(mode="target"))
    cfg = parse_config(base_doc(mode="target", target={"center": ["1/2"]}))
    assert cfg.target.center == (pytest.approx(0.5),)


def test_dichotomy_mode_exit_codes(tmp_path):
    doc = base_doc(
        mode="dichotomy",
        rate={"family": "power", "c": "1/2", "p": "2"},
        n_max=500,
        samples=6,
    )
    cfg = parse_config(doc)
    assert run(cfg, tmp_path) == 0
    report = json.loads((tmp_path / "dichotomy.json").read_text())
    assert report["passed"] is True
    # an impossible bound forces exit code 2
    doc["dichotomy"] = {"max_final": -1}
    cfg2 = parse_config(doc)
    assert run(cfg2, tmp_path / "fail") == 2


def test_fit_mode_from_report(tmp_path):
    doc = base_doc(
        n_max=50000,
        samples=10,
        rate={"family": "power", "c": "1/2", "p": "1/2"},
        experiment={"kind": "recurrence"},
    )
    cfg = parse_config(doc)
    run(cfg, tmp_path)
    fit_doc = base_doc(mode="fit", fit={"report": str(tmp_path / "report.json")})
    fit_cfg = parse_config(fit_doc)
    assert run(fit_cfg, tmp_path / "fit") == 0
    fit = json.loads((tmp_path / "fit" / "fit.json").read_text())
    assert "slope" in fit


def test_main_entrypoint(tmp_path):
    cfg_path = tmp_path / "cfg.yaml"
    cfg_path.write_text(
        yaml.safe_dump(
            base_doc(
                mode="measure",
                rate={"family": "constant", "c": "1/4"},
                measure={"kind": "recurrence", "ns": [1, 2]},
            )
        )
    )
    code = main(["measure", "--config", str(cfg_path), "--out", str(tmp_path / "out")])
    assert code == 0
    assert (tmp_path / "out" / "measure.csv").exists()
    # mismatched subcommand is a validation error
    assert main(["mixing", "--config", str(cfg_path)]) == 1


def test_main_bad_config_returns_1(tmp_path):
    cfg_path = tmp_path / "bad.yaml"
    cfg_path.write_text(yaml.safe_dump(base_doc(samples=0)))
    assert main(["experiment", "--config", str(cfg_path), "--out", str(tmp_path / "o")]) == 1


def test_inequality_key_fixed_to_strict():
    cfg = parse_config(base_doc(inequality="strict"))
    assert cfg.mode == "experiment"
    with pytest.raises(ConfigValidationError) as err:
        parse_config(base_doc(inequality="non-strict"))
    assert any(p.startswith("inequality") for p in err.value.problems)


def test_oracle_modes_reject_torus_metric():
    doc = base_doc(
        mode="measure",
        metric="torus",
        rate={"family": "constant", "c": "1/4"},
        measure={"kind": "recurrence", "ns": [1]},
    )
    with pytest.raises(ConfigValidationError) as err:
        parse_config(doc)
    assert any("oracle" in p for p in err.value.problems)


def test_experiment_threshold_failure_exit_2(tmp_path):
    doc = base_doc(
        n_max=500,
        samples=4,
        rate={"family": "power", "c": "1/2", "p": "1/2"},
        experiment={"kind": "recurrence", "thresholds": {"rel_err": 0.0}},
    )
    cfg = parse_config(doc)
    assert run(cfg, tmp_path) == 2


def test_threads_env_default(monkeypatch):
    from orbitcount.harness import default_threads

    monkeypatch.setenv("ORBITCOUNT_THREADS", "3")
    assert default_threads() == 3
    monkeypatch.delenv("ORBITCOUNT_THREADS")
    assert default_threads() >= 1


def test_json_format(tmp_path):
    doc = base_doc(
        mode="measure",
        rate={"family": "constant", "c": "1/4"},
        measure={"kind": "recurrence", "ns": [1]},
    )
    cfg = parse_config(doc)
    run(cfg, tmp_path, fmt="json")
    payload = json.loads((tmp_path / "measure.json").read_text())
    assert payload[0]["measure_exact"] == "1/2"
