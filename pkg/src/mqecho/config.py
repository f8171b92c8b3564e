"""Run-configuration schema: parsing, strict validation, resolution.

A run config is a small key-value tree (YAML, or JSON as an alternative
encoding of the same schema) with blocks `system`, `hamiltonian`,
`experiment`, `numerics`, `output`.  Unknown keys are rejected so typos
fail loudly; every run echoes its fully-resolved effective config (and a
hash of it) into all outputs.

Times may be given directly in coupling units, or as `*_in_local_units`
multiples of the inverse local-field rate 1/omega_loc, which is the
natural spin-dynamics time of the built Hamiltonian.
"""

from __future__ import annotations

import copy
import hashlib
import json
from dataclasses import dataclass

import numpy as np
import yaml

from .hamiltonians import (
    CouplingModel,
    HamiltonianSpec,
    PRESETS,
    from_preset,
    load_couplings,
    load_positions,
)
from .spinops import DENSE_CAP, SpinSystem

EXPERIMENT_KINDS = ("mq-spectrum", "loschmidt", "echo-sweep", "weak-irrev",
                    "partial-echo", "spin-diffusion", "verify")

TOLERANCE_PROFILES = {
    "default": {
        "sum_rule": 1e-10,
        "symmetry": 1e-10,
        "purity": 1e-10,
        "echo_identity": 1e-9,
        "support": 1e-10,
        "m2_bound_slack": 1e-9,
        "cross_path": 1e-10,
        "flip_identity": 1e-10,
    },
    "strict": {
        "sum_rule": 1e-11,
        "symmetry": 1e-11,
        "purity": 1e-11,
        "echo_identity": 1e-10,
        "support": 1e-11,
        "m2_bound_slack": 1e-10,
        "cross_path": 1e-11,
        "flip_identity": 1e-11,
    },
}


class ConfigError(ValueError):
    """Invalid or inconsistent run configuration."""


def _require_keys(block: dict, allowed: set, path: str):
    unknown = set(block) - allowed
    if unknown:
        raise ConfigError(f"unknown keys in {path}: {sorted(unknown)}; "
                          f"allowed: {sorted(allowed)}")


def _as_block(raw, path: str) -> dict:
    if raw is None:
        return {}
    if not isinstance(raw, dict):
        raise ConfigError(f"{path} must be a mapping")
    return dict(raw)


def load_config_file(path) -> dict:
    """Read YAML (or JSON, a YAML subset) into a raw config tree."""
    try:
        with open(path) as fh:
            raw = yaml.safe_load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except yaml.YAMLError as exc:
        raise ConfigError(f"cannot parse config {path}: {exc}") from exc
    if raw is None:
        raw = {}
    if not isinstance(raw, dict):
        raise ConfigError(f"config root must be a mapping, got {type(raw)!r}")
    return raw


@dataclass(frozen=True, eq=False)
class RunConfig:
    """Validated, fully-resolved configuration tree."""

    system: dict
    hamiltonian: dict
    experiment: dict
    numerics: dict
    output: dict
    seed: int

    def effective(self) -> dict:
        return {
            "seed": self.seed,
            "system": copy.deepcopy(self.system),
            "hamiltonian": copy.deepcopy(self.hamiltonian),
            "experiment": copy.deepcopy(self.experiment),
            "numerics": copy.deepcopy(self.numerics),
            "output": copy.deepcopy(self.output),
        }

    def digest(self) -> str:
        """Hash of the physics-relevant config (output paths excluded)."""
        effective = self.effective()
        effective.pop("output")
        payload = json.dumps(effective, sort_keys=True, default=float)
        return hashlib.sha256(payload.encode()).hexdigest()[:16]


_SYSTEM_KEYS = {"n_spins", "basis", "cap"}
_HAMILTONIAN_KEYS = {"preset", "a", "b", "c", "couplings", "offsets"}
_COUPLING_KEYS = {"variant", "strength", "scale", "seed", "geometry", "spacing",
                  "field_axis", "positions_file", "table_file", "table"}
_OFFSET_KEYS = {"axis", "values", "pattern", "scale", "ratio_to_hamiltonian"}
_NUMERICS_KEYS = {"tolerance_profile", "echo_delta_grid",
                  "correlation_points", "correlation_horizon_in_local_units"}
_OUTPUT_KEYS = {"out_dir", "format", "figures", "prefix"}

_EXPERIMENT_KEYS = {
    "mq-spectrum": {"kind", "times", "times_in_local_units", "n_times",
                    "max_time", "max_time_in_local_units"},
    "loschmidt": {"kind", "delta", "tau", "tau_in_local_units"},
    "echo-sweep": {"kind", "delta_grid", "taus", "taus_in_local_units"},
    "weak-irrev": {"kind", "delta", "fit_window_in_local_units", "n_taus"},
    "partial-echo": {"kind", "tau", "tau_in_t2star", "ratio", "window",
                     "n_samples"},
    "spin-diffusion": {"kind", "source", "horizon_in_local_units", "horizon",
                       "n_samples"},
    "verify": {"kind", "checks", "n_spins_small", "n_spins_chain"},
}


def validate_config(raw: dict, seed_override: int | None = None,
                    out_dir_override=None, format_override=None,
                    profile_override=None) -> RunConfig:
    """Validate a raw tree, fill defaults, and apply CLI overrides."""
    _require_keys(raw, {"seed", "system", "hamiltonian", "experiment",
                        "numerics", "output"}, "config")

    seed = raw.get("seed", 0)
    if seed_override is not None:
        seed = seed_override
    if not isinstance(seed, int):
        raise ConfigError("seed must be an integer")

    system = _as_block(raw.get("system"), "system")
    _require_keys(system, _SYSTEM_KEYS, "system")
    if "n_spins" not in system:
        raise ConfigError("system.n_spins is required")
    n_spins = system["n_spins"]
    cap = system.get("cap", DENSE_CAP)
    if not isinstance(n_spins, int) or not 1 <= n_spins <= cap:
        raise ConfigError(
            f"system.n_spins must be an integer in 1..{cap} "
            "(raise system.cap only if you accept the dense cost)")
    system = {"n_spins": n_spins, "basis": system.get("basis", "x"),
              "cap": cap}
    if system["basis"] not in ("x", "z"):
        raise ConfigError("system.basis must be 'x' or 'z'")

    ham = _as_block(raw.get("hamiltonian"), "hamiltonian")
    _require_keys(ham, _HAMILTONIAN_KEYS, "hamiltonian")
    preset = ham.get("preset")
    if preset is not None and preset not in PRESETS:
        raise ConfigError(f"unknown preset {preset!r}; "
                          f"choose from {sorted(PRESETS)}")
    if preset is None and not all(k in ham for k in ("a", "b", "c")):
        raise ConfigError("hamiltonian needs `preset` or explicit a, b, c")
    couplings = _as_block(ham.get("couplings"), "hamiltonian.couplings")
    _require_keys(couplings, _COUPLING_KEYS, "hamiltonian.couplings")
    if "variant" not in couplings:
        raise ConfigError("hamiltonian.couplings.variant is required")
    offsets = ham.get("offsets")
    if offsets is not None:
        offsets = _as_block(offsets, "hamiltonian.offsets")
        _require_keys(offsets, _OFFSET_KEYS, "hamiltonian.offsets")
    ham = {
        "preset": preset,
        "a": ham.get("a"), "b": ham.get("b"), "c": ham.get("c"),
        "couplings": couplings,
        "offsets": offsets,
    }

    experiment = _as_block(raw.get("experiment"), "experiment")
    kind = experiment.get("kind")
    if kind not in EXPERIMENT_KINDS:
        raise ConfigError(f"experiment.kind must be one of {EXPERIMENT_KINDS}, "
                          f"got {kind!r}")
    _require_keys(experiment, _EXPERIMENT_KEYS[kind], f"experiment[{kind}]")

    numerics = _as_block(raw.get("numerics"), "numerics")
    _require_keys(numerics, _NUMERICS_KEYS, "numerics")
    profile = numerics.get("tolerance_profile", "default")
    if profile_override is not None:
        profile = profile_override
    if profile not in TOLERANCE_PROFILES:
        raise ConfigError(f"unknown tolerance profile {profile!r}")
    numerics = {
        "tolerance_profile": profile,
        "echo_delta_grid": list(numerics.get("echo_delta_grid",
                                             [0.1, 0.05, 0.02, 0.01])),
        "correlation_points": int(numerics.get("correlation_points", 2400)),
        "correlation_horizon_in_local_units":
            float(numerics.get("correlation_horizon_in_local_units", 40.0)),
    }

    output = _as_block(raw.get("output"), "output")
    _require_keys(output, _OUTPUT_KEYS, "output")
    fmt = output.get("format", "csv")
    if format_override is not None:
        fmt = format_override
    if fmt not in ("csv", "json"):
        raise ConfigError("output.format must be 'csv' or 'json'")
    out_dir = output.get("out_dir", "out")
    if out_dir_override is not None:
        out_dir = str(out_dir_override)
    output = {
        "out_dir": out_dir,
        "format": fmt,
        "figures": bool(output.get("figures", True)),
        "prefix": output.get("prefix", kind),
    }

    return RunConfig(system=system, hamiltonian=ham, experiment=dict(experiment),
                     numerics=numerics, output=output, seed=seed)


# ---------------------------------------------------------------------------
# resolution to concrete objects
# ---------------------------------------------------------------------------

def build_system(cfg: RunConfig) -> SpinSystem:
    return SpinSystem(cfg.system["n_spins"], cfg.system["basis"],
                      cap=cfg.system["cap"])


def build_coupling_table(cfg: RunConfig, rng: np.random.Generator) -> np.ndarray:
    n = cfg.system["n_spins"]
    block = cfg.hamiltonian["couplings"]
    positions = None
    if block.get("positions_file"):
        positions = load_positions(block["positions_file"])
    table = None
    if block.get("table_file"):
        table = load_couplings(block["table_file"], n)
    elif block.get("table") is not None:
        table = np.asarray(block["table"], dtype=float)
    model = CouplingModel(
        variant=block["variant"],
        strength=float(block.get("strength", 1.0)),
        scale=float(block.get("scale", 1.0)),
        seed=block.get("seed"),
        geometry=block.get("geometry", "line"),
        spacing=float(block.get("spacing", 1.0)),
        field_axis=tuple(block.get("field_axis", (0.0, 0.0, 1.0))),
        positions=positions,
        table=table,
    )
    try:
        return model.build(n, rng=rng)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def build_offsets(cfg: RunConfig, rng: np.random.Generator,
                  n: int) -> tuple | None:
    """Resolve the offsets block to (values, axis), or None.

    `ratio_to_hamiltonian` rescaling happens later, once the bilinear part
    exists; here the raw pattern is produced.
    """
    block = cfg.hamiltonian["offsets"]
    if block is None:
        return None
    axis = block.get("axis", "z")
    scale = float(block.get("scale", 1.0))
    if "values" in block and block["values"] is not None:
        values = np.asarray(block["values"], dtype=float) * scale
    else:
        pattern = block.get("pattern", "linear")
        if pattern == "linear":
            values = (np.arange(n) - (n - 1) / 2.0) * scale
        elif pattern == "alternating":
            values = scale * np.array([1.0 if i % 2 == 0 else -1.0
                                       for i in range(n)])
        elif pattern == "random":
            values = scale * rng.standard_normal(n)
        else:
            raise ConfigError(f"unknown offsets pattern {pattern!r}")
    if values.shape != (n,):
        raise ConfigError("offsets values must have one entry per site")
    return values, axis


def build_hamiltonian_spec(cfg: RunConfig, rng: np.random.Generator,
                           include_offsets: bool = True) -> HamiltonianSpec:
    n = cfg.system["n_spins"]
    table = build_coupling_table(cfg, rng)
    offsets = build_offsets(cfg, rng, n) if include_offsets else None
    values, axis = offsets if offsets is not None else (None, None)
    preset = cfg.hamiltonian["preset"]
    try:
        if preset is not None:
            c = cfg.hamiltonian.get("c") if preset == "zz" else None
            return from_preset(preset, table, c=c, offsets=values,
                               offset_axis=axis)
        return HamiltonianSpec(float(cfg.hamiltonian["a"]),
                               float(cfg.hamiltonian["b"]),
                               float(cfg.hamiltonian["c"]),
                               table, offsets=values, offset_axis=axis)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
