"""Run configuration files (JSON).

A config may be just a Hamiltonian (``partition`` + ``entries`` at top
level) or a full run description::

    {
      "mode": "flag",
      "seed": 7,
      "hamiltonian": {"partition": [1, 1, 1], "entries": [...]}
                     | {"random": {"partition": [1, 1, 1], "terms_per_entry": 2,
                                   "freq_range": [0, 5], "amp_scale": 1.0}},
      "initial": {"coordinates": [M, ...]} | {"unitary": M} | {"random_scale": 0.5},
      "integrator": {"step": 0.001, "t_end": 1.0, "reunitarize_every": 10},
      "output": {"path": "traj.csv", "format": "csv", "sample_every": 1},
      "ensemble": {"initial": [[M, ...], ...]} | {"members": 5, "scale": 0.7},
      "candidates": ["cross_ratio_x", ...],
      "verify": {"partitions": [[2, 3], [1, 1, 1]], "draws": 20}
    }

Matrices ``M`` are lists of rows; an entry is a real number or ``[re, im]``.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np

from .dynamics import IntegratorConfig
from .errors import ConfigError
from .frames import FlagCoordinates
from .hamiltonians import BlockHamiltonian, from_dict, random_hamiltonian

MODES = ("full", "grassmann", "flag")


def parse_matrix(rows) -> np.ndarray:
    try:
        out = []
        for row in rows:
            out.append([complex(e[0], e[1]) if isinstance(e, (list, tuple)) else complex(e)
                        for e in row])
        M = np.array(out, dtype=complex)
    except (TypeError, ValueError, IndexError) as exc:
        raise ConfigError(f"invalid matrix {rows!r}: {exc}") from exc
    if M.ndim != 2 or not np.all(np.isfinite(M)):
        raise ConfigError(f"matrix must be a finite list of equal-length rows: {rows!r}")
    return M


def matrix_to_json(M) -> list:
    return [[[float(v.real), float(v.imag)] for v in row] for row in np.asarray(M, dtype=complex)]


def parse_coordinates(blocks, partition) -> FlagCoordinates:
    try:
        return FlagCoordinates(partition, tuple(parse_matrix(b) for b in blocks))
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


@dataclass
class RunConfig:
    hamiltonian: BlockHamiltonian
    seed: int = 0
    mode: str | None = None
    initial: dict = field(default_factory=dict)
    integrator: IntegratorConfig = field(default_factory=IntegratorConfig)
    output: dict = field(default_factory=dict)
    ensemble: dict = field(default_factory=dict)
    candidates: list | None = None
    verify: dict = field(default_factory=dict)

    @property
    def partition(self):
        return self.hamiltonian.partition

    @property
    def rng(self) -> np.random.Generator:
        # distinct stream from the Hamiltonian generator for the same seed
        return np.random.default_rng([self.seed, 1])

    def initial_coordinates(self) -> FlagCoordinates:
        init = self.initial
        if "coordinates" in init:
            return parse_coordinates(init["coordinates"], self.partition)
        if "random_scale" in init:
            return FlagCoordinates.random(self.partition, self.rng, float(init["random_scale"]))
        return FlagCoordinates.zeros(self.partition)

    def initial_unitary(self) -> np.ndarray | None:
        if "unitary" in self.initial:
            return parse_matrix(self.initial["unitary"])
        return None

    def ensemble_initials(self) -> list[FlagCoordinates]:
        ens = self.ensemble
        if "initial" in ens:
            return [parse_coordinates(m, self.partition) for m in ens["initial"]]
        members = int(ens.get("members", 5))
        scale = float(ens.get("scale", 0.7))
        rng = self.rng
        return [FlagCoordinates.random(self.partition, rng, scale) for _ in range(members)]


def parse_config(d: dict[str, Any], seed: int | None = None) -> RunConfig:
    if not isinstance(d, dict):
        raise ConfigError("config must be a JSON object")
    seed = int(d.get("seed", 0)) if seed is None else int(seed)
    if "hamiltonian" in d:
        hd = d["hamiltonian"]
    elif "partition" in d:
        hd = {"partition": d["partition"], "entries": d.get("entries", [])}
    else:
        raise ConfigError("config has no hamiltonian")
    if "random" in hd:
        r = hd["random"]
        try:
            h = random_hamiltonian(tuple(r["partition"]), seed, int(r.get("terms_per_entry", 2)),
                                   tuple(r.get("freq_range", (0.0, 5.0))),
                                   float(r.get("amp_scale", 1.0)))
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"invalid random hamiltonian: {exc}") from exc
    else:
        h = from_dict(hd)
    mode = d.get("mode")
    if mode is not None and mode not in MODES:
        raise ConfigError(f"mode must be one of {MODES}, got {mode!r}")
    try:
        integ = IntegratorConfig(**d.get("integrator", {}))
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"invalid integrator settings: {exc}") from exc
    output = dict(d.get("output", {}))
    fmt = output.get("format", "csv")
    if fmt not in ("csv", "json"):
        raise ConfigError(f"output format must be csv or json, got {fmt!r}")
    if int(output.get("sample_every", 1)) < 1:
        raise ConfigError("sample_every must be >= 1")
    return RunConfig(h, seed, mode, dict(d.get("initial", {})), integ, output,
                     dict(d.get("ensemble", {})), d.get("candidates"), dict(d.get("verify", {})))


def load_config(path: str | Path, seed: int | None = None) -> RunConfig:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    try:
        d = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
    return parse_config(d, seed)
