import json
import os

import numpy as np
import pytest

from mqecho.cli import main
from mqecho.config import (
    ConfigError,
    TOLERANCE_PROFILES,
    load_config_file,
    validate_config,
)


def minimal_tree(**experiment):
    return {
        "seed": 7,
        "system": {"n_spins": 4, "basis": "x"},
        "hamiltonian": {"preset": "dipolar-secular",
                        "couplings": {"variant": "chain", "strength": 1.0}},
        "experiment": experiment or {"kind": "loschmidt", "delta": 0.3,
                                     "tau": 1.0},
        "numerics": {},
        "output": {"out_dir": "out", "figures": False},
    }


class TestValidation:
    def test_minimal_config_resolves(self):
        cfg = validate_config(minimal_tree())
        assert cfg.system["n_spins"] == 4
        assert cfg.numerics["tolerance_profile"] == "default"
        assert cfg.digest() == validate_config(minimal_tree()).digest()

    def test_unknown_keys_rejected_everywhere(self):
        tree = minimal_tree()
        tree["bogus"] = 1
        with pytest.raises(ConfigError, match="unknown keys"):
            validate_config(tree)
        tree = minimal_tree()
        tree["hamiltonian"]["couplings"]["typo"] = 2
        with pytest.raises(ConfigError, match="unknown keys"):
            validate_config(tree)
        tree = minimal_tree()
        tree["experiment"]["not_a_key"] = 3
        with pytest.raises(ConfigError, match="unknown keys"):
            validate_config(tree)

    def test_overrides_apply(self):
        cfg = validate_config(minimal_tree(), seed_override=99,
                              out_dir_override="elsewhere",
                              format_override="json",
                              profile_override="strict")
        assert cfg.seed == 99
        assert cfg.output["out_dir"] == "elsewhere"
        assert cfg.output["format"] == "json"
        assert cfg.numerics["tolerance_profile"] == "strict"

    def test_digest_ignores_output_paths(self):
        a = validate_config(minimal_tree())
        b = validate_config(minimal_tree(), out_dir_override="elsewhere")
        assert a.digest() == b.digest()

    def test_strict_profile_tighter(self):
        for key, value in TOLERANCE_PROFILES["strict"].items():
            assert value <= TOLERANCE_PROFILES["default"][key]

    def test_bad_kind(self):
        tree = minimal_tree()
        tree["experiment"] = {"kind": "nonsense"}
        with pytest.raises(ConfigError, match="experiment.kind"):
            validate_config(tree)

    def test_json_config_accepted(self, tmp_path):
        path = tmp_path / "run.json"
        path.write_text(json.dumps(minimal_tree()))
        raw = load_config_file(path)
        assert validate_config(raw).system["n_spins"] == 4


def run_cli(*argv):
    return main(list(argv))


def bundled(name):
    from importlib import resources
    return str(resources.files("mqecho") / "configs" / name)


class TestCli:
    def test_verify_bundled_passes(self, tmp_path, capsys):
        out = tmp_path / "v"
        code = run_cli("verify", "--out-dir", str(out))
        assert code == 0
        summary = json.loads((out / "verify_summary.json").read_text())
        assert summary["verdict"] == "PASS"
        assert all(c["passed"] for c in summary["checks"].values())

    def test_nn_chain_bundled_verify(self, tmp_path):
        code = run_cli("verify", "--config", bundled("nn_chain.yaml"),
                       "--out-dir", str(tmp_path / "nn"))
        assert code == 0
        summary = json.loads(
            (tmp_path / "nn" / "nn_chain_summary.json").read_text())
        assert summary["verdict"] == "PASS"

    def test_determinism_byte_identical(self, tmp_path):
        out = tmp_path / "det"
        assert run_cli("verify", "--out-dir", str(out)) == 0
        first = {f: (out / f).read_bytes() for f in os.listdir(out)}
        assert run_cli("verify", "--out-dir", str(out)) == 0
        second = {f: (out / f).read_bytes() for f in os.listdir(out)}
        assert first == second

    def test_loschmidt_run_and_outputs(self, tmp_path):
        out = tmp_path / "lo"
        code = run_cli("loschmidt", "--config", bundled("loschmidt.yaml"),
                       "--out-dir", str(out))
        assert code == 0
        csv = (out / "loschmidt_echo.csv").read_text()
        assert csv.startswith("# tool: mqecho")
        assert "config_hash" in csv
        summary = json.loads((out / "loschmidt_summary.json").read_text())
        assert summary["checks"]["echo_fourier_identity"]["passed"]
        assert summary["effective_config"]["system"]["n_spins"] == 6

    def test_spin_diffusion_with_figures(self, tmp_path):
        out = tmp_path / "sd"
        code = run_cli("spin-diffusion", "--config",
                       bundled("spin_diffusion_n6.yaml"),
                       "--out-dir", str(out))
        assert code == 0
        assert (out / "diffusion_profile.png").exists()
        code = run_cli("emit-plots", "--in-dir", str(out))
        assert code == 0

    def test_config_error_exit_code(self, tmp_path, capsys):
        bad = tmp_path / "bad.yaml"
        bad.write_text("system: {n_spins: 40}\n"
                       "hamiltonian: {preset: zz, couplings: {variant: chain}}\n"
                       "experiment: {kind: loschmidt}\n")
        assert run_cli("loschmidt", "--config", str(bad)) == 1
        assert run_cli("loschmidt", "--config", str(tmp_path / "nope.yaml")) == 1

    def test_kind_mismatch_rejected(self):
        assert run_cli("loschmidt", "--config", bundled("verify.yaml")) == 1

    def test_invariant_failure_exit_code(self, tmp_path, monkeypatch):
        # force an unreachable tolerance so a check must fail
        from mqecho.config import TOLERANCE_PROFILES as profiles
        tight = dict(profiles["default"])
        tight["sum_rule"] = 0.0
        monkeypatch.setitem(profiles, "default", tight)
        out = tmp_path / "fail"
        code = run_cli("verify", "--out-dir", str(out))
        assert code == 2

    def test_json_series_format(self, tmp_path):
        out = tmp_path / "jsonfmt"
        code = run_cli("loschmidt", "--config", bundled("loschmidt.yaml"),
                       "--out-dir", str(out), "--format", "json")
        assert code == 0
        doc = json.loads((out / "loschmidt_echo.json").read_text())
        assert "amplitude" in doc["columns"]

    def test_spectrum_serialization(self, tmp_path, rng):
        from mqecho import SpinSystem, mq_spectrum, v_spectrum, total_operator
        from mqecho.reporting import write_spectrum_csv, write_spectrum_json
        from mqecho.spinops import random_deviation

        sys = SpinSystem(3, "x")
        rho = random_deviation(sys, rng)
        spec = mq_spectrum(rho, sys, time=1.5)
        csv_path = write_spectrum_csv(tmp_path / "mq.csv", spec)
        text = open(csv_path).read()
        assert text.splitlines()[-2].startswith("order,intensity") or \
            "order,intensity" in text
        doc = json.loads(open(write_spectrum_json(tmp_path / "mq.json",
                                                  spec)).read())
        assert doc["time"] == 1.5
        assert len(doc["order"]) == len(doc["intensity"]) == 7

        vspec = v_spectrum(rho, total_operator(sys, "x"))
        vdoc = json.loads(open(write_spectrum_json(tmp_path / "v.json",
                                                   vspec)).read())
        assert "frequency" in vdoc and "binning_tol" in vdoc

    def test_csv_full_precision_round_trip(self, tmp_path):
        out = tmp_path / "prec"
        run_cli("loschmidt", "--config", bundled("loschmidt.yaml"),
                "--out-dir", str(out))
        rows = [l for l in (out / "loschmidt_echo.csv").read_text().splitlines()
                if not l.startswith("#")]
        header = rows[0].split(",")
        values = dict(zip(header, rows[1].split(",")))
        amplitude = float(values["amplitude"])
        summary = json.loads((out / "loschmidt_summary.json").read_text())
        assert amplitude == summary["amplitude"]
