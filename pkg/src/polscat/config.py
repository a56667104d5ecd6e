"""TOML scenario files.

Layout::

    [[sector]]                 # one table per frequency sector, ascending
    frequency = 1.0
    model = "attenuator"       # or: transmission = [[...]]  /  entries = [[...]]
    eta_e = 0.5                # dilation split for `transmission`
    [sector.params]            # toy model parameters
    t = 0.6

    [input]
    preset = "single_mode"     # single_mode | single | product_pair | entangled_pair | random | amplitudes
    mode = 0

    [tolerances]               # unitary, state, rank
    [caps]                     # n_max, permanent
    [sweep]                    # parameter = "loss" | "eta_e", values = [...]

Complex numbers are written either as plain reals or as ``[re, im]`` pairs.
Preset vectors are indexed by s-mode position; ``amplitudes`` records use
global mode indices.
"""
from __future__ import annotations

import copy
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from . import fock
from .errors import ConfigError, NonUnitaryError
from .fock import FockState, PolaritonTuple
from .modespace import FrequencySector, ModeSpace
from .permanent import PERMANENT_MAX
from .reduce import RANK_TOL
from .scatmat import TAU_UNITARY, BlockScatteringMatrix, dilate_transmission, toy_model, validate
from .scatter import TAU_STATE, ScatteringScenario

PRESETS = ("single_mode", "single", "product_pair", "entangled_pair", "random", "amplitudes")
SWEEP_PARAMETERS = ("loss", "eta_e")


def _complex(value, where: str) -> complex:
    if isinstance(value, (int, float)):
        return complex(value)
    if isinstance(value, list) and len(value) == 2 and all(isinstance(v, (int, float)) for v in value):
        return complex(value[0], value[1])
    raise ConfigError(f"expected a number or [re, im], got {value!r}", where)


def complex_vector(value, where: str) -> np.ndarray:
    if not isinstance(value, list):
        raise ConfigError("expected an array", where)
    return np.array([_complex(x, f"{where}[{i}]") for i, x in enumerate(value)], dtype=np.complex128)


def complex_matrix(value, where: str) -> np.ndarray:
    if not isinstance(value, list) or not all(isinstance(row, list) for row in value):
        raise ConfigError("expected an array of rows", where)
    rows = [complex_vector(row, f"{where}[{i}]") for i, row in enumerate(value)]
    if len({len(r) for r in rows}) > 1:
        raise ConfigError("ragged matrix", where)
    return np.array(rows, dtype=np.complex128).reshape(len(rows), -1)


@dataclass
class ScenarioConfig:
    sectors: list[dict]
    input: dict
    tolerances: dict = field(default_factory=dict)
    caps: dict = field(default_factory=dict)
    sweep: dict = field(default_factory=dict)
    source: str = "<config>"

    @property
    def tau_unitary(self) -> float:
        return float(self.tolerances.get("unitary", TAU_UNITARY))

    @property
    def tau_state(self) -> float:
        return float(self.tolerances.get("state", TAU_STATE))

    @property
    def rank_tol(self) -> float:
        return float(self.tolerances.get("rank", RANK_TOL))

    def with_tolerance(self, tol: float | None) -> "ScenarioConfig":
        out = copy.deepcopy(self)
        if tol is not None:
            out.tolerances["unitary"] = tol
            out.tolerances["state"] = tol
        return out

    def varied(self, parameter: str, value: float) -> "ScenarioConfig":
        """Copy with ``parameter`` set to ``value`` in every sector."""
        out = copy.deepcopy(self)
        for k, sec in enumerate(out.sectors):
            where = f"sector[{k}]"
            params = sec.setdefault("params", {})
            if parameter == "eta_e":
                if "model" in sec and sec["model"] not in ("identity", "random_unitary"):
                    params["eta_e"] = value
                elif "transmission" in sec:
                    sec["eta_e"] = value
                else:
                    raise ConfigError("sector has no eta_e to sweep", where)
            elif parameter == "loss":
                model = sec.get("model")
                if model == "attenuator":
                    params["t"] = float(np.sqrt(1.0 - value))
                elif model == "lossy_beamsplitter":
                    params["loss"] = value
                elif model == "random_lossy":
                    params["loss_scale"] = value
                elif "transmission" in sec:
                    sec["loss"] = value
                else:
                    raise ConfigError("sector has no loss parameter to sweep", where)
            else:
                raise ConfigError(f"unknown sweep parameter {parameter!r}", "sweep.parameter")
        return out

    def matrices(self, seed: int = 0, check: bool = True) -> list[BlockScatteringMatrix]:
        mats = []
        for k, sec in enumerate(self.sectors):
            where = f"sector[{k}]"
            kinds = [key for key in ("model", "transmission", "entries") if key in sec]
            if len(kinds) != 1:
                raise ConfigError("give exactly one of model, transmission, entries", where)
            try:
                if "model" in sec:
                    params = dict(sec.get("params", {}))
                    if sec["model"].startswith("random"):
                        params.setdefault("seed", seed)
                    Z = toy_model(sec["model"], sector=k, **params)
                elif "transmission" in sec:
                    T = complex_matrix(sec["transmission"], f"{where}.transmission")
                    T = np.sqrt(1.0 - float(sec.get("loss", 0.0))) * np.atleast_2d(T)
                    Z = dilate_transmission(T, float(sec.get("eta_e", 0.5)), self.tau_unitary, sector=k)
                else:
                    E = complex_matrix(sec["entries"], f"{where}.entries")
                    dims = tuple(int(d) for d in sec.get("dims", (E.shape[0], 0, 0)))
                    Z = BlockScatteringMatrix(E, dims, k)
            except (TypeError, KeyError, ValueError) as exc:
                if isinstance(exc, ConfigError):
                    raise
                raise ConfigError(f"bad sector specification ({exc})", where) from exc
            report = validate(Z, self.tau_unitary)
            if check and not report.is_unitary:
                raise NonUnitaryError(f"{where}: unitarity residual {report.max_residual:.3e}")
            mats.append(Z)
        return mats

    def mode_space(self, matrices) -> ModeSpace:
        freqs = [float(sec.get("frequency", k + 1)) for k, sec in enumerate(self.sectors)]
        return ModeSpace(FrequencySector(f, *Z.dims) for f, Z in zip(freqs, matrices))

    def state(self, space: ModeSpace, seed: int = 0) -> FockState:
        inp = self.input
        preset = inp.get("preset", "amplitudes")
        where = "input"
        if preset not in PRESETS:
            raise ConfigError(f"unknown preset {preset!r}; expected one of {PRESETS}", f"{where}.preset")
        try:
            if preset == "single_mode":
                return fock.single_mode(space, int(inp.get("mode", 0)))
            if preset == "single":
                return fock.single_polariton(space, complex_vector(inp["phi"], f"{where}.phi"))
            if preset == "product_pair":
                return fock.product_pair(space, complex_vector(inp["phi"], f"{where}.phi"))
            if preset == "entangled_pair":
                return fock.entangled_pair(space, complex_vector(inp["phi1"], f"{where}.phi1"),
                                           complex_vector(inp["phi2"], f"{where}.phi2"))
            if preset == "random":
                sizes = inp.get("n", [2])
                sizes = sizes if isinstance(sizes, list) else [sizes]
                rng = np.random.default_rng(int(inp.get("seed", seed)))
                return fock.random_state(space, [int(n) for n in sizes], rng)
        except KeyError as exc:
            raise ConfigError(f"missing key {exc}", where) from exc
        entries = []
        for i, rec in enumerate(inp.get("amplitudes", [])):
            loc = f"{where}.amplitudes[{i}]"
            t = PolaritonTuple.from_dict(rec)
            entries.append((t, complex(float(rec.get("re", 0.0)), float(rec.get("im", 0.0)))))
            if not t.N:
                raise ConfigError("empty tuple", loc)
        if not entries:
            raise ConfigError("no amplitudes given", where)
        state, _ = FockState.ingest(space, entries)
        return state

    def scenario(self, seed: int = 0, threads: int = 1) -> ScatteringScenario:
        mats = self.matrices(seed)
        space = self.mode_space(mats)
        psi = self.state(space, seed)
        return ScatteringScenario(
            space, mats, psi,
            n_max=int(self.caps.get("n_max", fock.N_MAX)),
            permanent_max=int(self.caps.get("permanent", PERMANENT_MAX)),
            tau_state=self.tau_state,
            threads=threads,
        )


def parse_config(text: str, source: str = "<config>") -> ScenarioConfig:
    try:
        data: dict[str, Any] = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(str(exc), source) from exc
    sectors = data.get("sector")
    if not isinstance(sectors, list) or not sectors:
        raise ConfigError("at least one [[sector]] table is required", source)
    if "input" not in data:
        raise ConfigError("missing [input] table", source)
    sweep = data.get("sweep", {})
    if sweep and sweep.get("parameter") not in SWEEP_PARAMETERS:
        raise ConfigError(f"parameter must be one of {SWEEP_PARAMETERS}", "sweep.parameter")
    return ScenarioConfig(sectors, data["input"], data.get("tolerances", {}),
                          data.get("caps", {}), sweep, source)


def load_config(path) -> ScenarioConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config ({exc.strerror})", str(path)) from exc
    return parse_config(text, str(path))
