"""Run configuration: a YAML file with dotted keys and strict validation.

The file holds nested sections (``track:``, ``section:``, ``qc:``,
``analysis:``, ``sim:``) or, equivalently, flat dotted keys such as
``track.straight_length``.  Unknown keys are rejected by name; missing
keys fall back to the defaults below.

===========================  =========  ==================================
key                          default    meaning
===========================  =========  ==================================
track.straight_length        6.0        meters, each straight
track.radius                 1.5        meters, each semicircular end
track.corridor_width         0.8        meters
section.x_en                 2.0        meters, section entrance arc length
section.x_ex                 4.0        meters, section exit arc length
qc.margin                    0.5        meters beyond corridor half-width
qc.v_max                     10.0       m/s speed sanity limit
qc.oob_threshold             0.2        rejection: out-of-bounds fraction
qc.overspeed_threshold       0.05       rejection: overspeed fraction
analysis.bin_width           0.1        1/m, diagram bin width
analysis.include_degraded    false      pool flagged crossings into diagram
analysis.exclude_self        false      drop self-count from densities
sim.n_pedestrians            10
sim.loops_per_pedestrian     2
sim.v0_mean                  1.33       m/s
sim.v0_std                   0.13       m/s
sim.d0                       0.4        meters
sim.tau                      0.5        seconds
sim.mean_rate                4.74       Hz
sim.min_interval             0.05       seconds
sim.max_interval             1.0        seconds
sim.noise_sigma              0.1        meters per axis
sim.erratic_tags             0
seed                         1          64-bit RNG seed
===========================  =========  ==================================
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping

import yaml

from .geometry import MeasurementSection, TrackGeometry, make_section, make_stadium_track
from .ingest import QcParams
from .simulate import ScenarioConfig


class ConfigError(ValueError):
    """Unreadable, unknown or ill-typed configuration content."""


DEFAULTS: dict[str, object] = {
    "track.straight_length": 6.0,
    "track.radius": 1.5,
    "track.corridor_width": 0.8,
    "section.x_en": 2.0,
    "section.x_ex": 4.0,
    "qc.margin": 0.5,
    "qc.v_max": 10.0,
    "qc.oob_threshold": 0.2,
    "qc.overspeed_threshold": 0.05,
    "analysis.bin_width": 0.1,
    "analysis.include_degraded": False,
    "analysis.exclude_self": False,
    "sim.n_pedestrians": 10,
    "sim.loops_per_pedestrian": 2,
    "sim.v0_mean": 1.33,
    "sim.v0_std": 0.13,
    "sim.d0": 0.4,
    "sim.tau": 0.5,
    "sim.mean_rate": 4.74,
    "sim.min_interval": 0.05,
    "sim.max_interval": 1.0,
    "sim.noise_sigma": 0.1,
    "sim.erratic_tags": 0,
    "seed": 1,
}


@dataclass(frozen=True)
class RunConfig:
    geometry: TrackGeometry
    section: MeasurementSection
    qc: QcParams
    bin_width: float
    include_degraded: bool
    exclude_self: bool
    n_pedestrians: int
    loops_per_pedestrian: int
    v0_mean: float
    v0_std: float
    d0: float
    tau: float
    mean_rate: float
    min_interval: float
    max_interval: float
    noise_sigma: float
    erratic_tags: int
    seed: int

    def scenario(self, seed: int | None = None) -> ScenarioConfig:
        """Scenario parameters for the simulator; ``seed`` overrides the file's."""
        return ScenarioConfig(
            geometry=self.geometry,
            section=self.section,
            n_pedestrians=self.n_pedestrians,
            loops_per_pedestrian=self.loops_per_pedestrian,
            v0_mean=self.v0_mean,
            v0_std=self.v0_std,
            d0=self.d0,
            tau=self.tau,
            mean_rate=self.mean_rate,
            min_interval=self.min_interval,
            max_interval=self.max_interval,
            noise_sigma=self.noise_sigma,
            erratic_tags=self.erratic_tags,
            seed=self.seed if seed is None else seed,
        )


def _flatten(node, prefix: str = "") -> dict[str, object]:
    flat: dict[str, object] = {}
    if not isinstance(node, Mapping):
        raise ConfigError(f"configuration must be a mapping, got {type(node).__name__}")
    for key, value in node.items():
        if not isinstance(key, str):
            raise ConfigError(f"configuration keys must be strings, got {key!r}")
        dotted = f"{prefix}{key}"
        if isinstance(value, Mapping):
            flat.update(_flatten(value, prefix=dotted + "."))
        else:
            flat[dotted] = value
    return flat


def _coerce(key: str, value: object) -> object:
    default = DEFAULTS[key]
    if isinstance(default, bool):
        if not isinstance(value, bool):
            raise ConfigError(f"{key} must be a boolean, got {value!r}")
        return value
    if isinstance(default, int):
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(f"{key} must be an integer, got {value!r}")
        return value
    if isinstance(default, float):
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"{key} must be a number, got {value!r}")
        return float(value)
    return value


def run_config_from_mapping(raw: Mapping) -> RunConfig:
    """Validate a parsed mapping against the known keys and defaults."""
    flat = _flatten(raw)
    values = dict(DEFAULTS)
    for key, value in flat.items():
        if key not in DEFAULTS:
            raise ConfigError(f"unknown configuration key: {key}")
        values[key] = _coerce(key, value)
    if not 0 <= values["seed"] < 2 ** 64:
        raise ConfigError(f"seed must be a non-negative 64-bit integer, got {values['seed']!r}")

    geometry = make_stadium_track(
        values["track.straight_length"], values["track.radius"],
        values["track.corridor_width"])
    section = make_section(values["section.x_en"], values["section.x_ex"], geometry)
    qc = QcParams(
        margin=values["qc.margin"],
        v_max=values["qc.v_max"],
        oob_threshold=values["qc.oob_threshold"],
        overspeed_threshold=values["qc.overspeed_threshold"],
    )
    return RunConfig(
        geometry=geometry,
        section=section,
        qc=qc,
        bin_width=values["analysis.bin_width"],
        include_degraded=values["analysis.include_degraded"],
        exclude_self=values["analysis.exclude_self"],
        n_pedestrians=values["sim.n_pedestrians"],
        loops_per_pedestrian=values["sim.loops_per_pedestrian"],
        v0_mean=values["sim.v0_mean"],
        v0_std=values["sim.v0_std"],
        d0=values["sim.d0"],
        tau=values["sim.tau"],
        mean_rate=values["sim.mean_rate"],
        min_interval=values["sim.min_interval"],
        max_interval=values["sim.max_interval"],
        noise_sigma=values["sim.noise_sigma"],
        erratic_tags=values["sim.erratic_tags"],
        seed=values["seed"],
    )


def load_run_config(path: str | None = None) -> RunConfig:
    """Load a YAML run configuration, or the pure defaults when ``path`` is None."""
    if path is None:
        return run_config_from_mapping({})
    try:
        with open(path, "r", encoding="utf-8") as fh:
            raw = yaml.safe_load(fh)
    except FileNotFoundError:
        raise ConfigError(f"configuration file not found: {path}") from None
    except yaml.YAMLError as exc:
        raise ConfigError(f"invalid YAML in {path}: {exc}") from None
    if raw is None:
        raw = {}
    return run_config_from_mapping(raw)
