"""
config.py - Sweep configuration: defaults, JSON file + flag merging, validation

A config file is a JSON object whose keys are the long flag names with
underscores (e.g. "n_majoranas", "gamma_ratio"). Flags given on the command
line override the file. Anything invalid is reported in one ConfigError that
lists every offending field.
"""

import json
from dataclasses import asdict, dataclass, field, fields, replace

import numpy as np

from ..core.errors import ConfigError

MODES = (
    "growth", "egr", "dynamics", "phase-entanglement",
    "phase-purification", "rate-fit", "trace", "decoupling",
)
OBSERVABLES = ("entanglement", "purification", "both")
# fields that never change a result
EXECUTION_FIELDS = ("workers", "out", "log_level")

# mode -> defaults applied to fields left unset
_MODE_DEFAULTS = {
    "growth": {"t_max": 40.0, "record_interval": 0.05},
    "egr": {"j": [0.5, 1.0, 2.0, 3.0], "n_majoranas": [12, 16],
            "t_max": 40.0, "record_interval": 0.05},
    "dynamics": {"gamma_ratio": [0.05, 0.5, 1.0, 5.0], "p_m": [0.3],
                 "t_max": 200.0, "record_interval": 0.5},
    "phase-entanglement": {"gamma_ratio": "log:0.05:20:10", "p_m": "lin:0.1:1.0:10",
                           "t_max": 200.0, "record_interval": 0.5, "t_inf": 200.0},
    "phase-purification": {"gamma_ratio": "log:0.05:20:10", "p_m": "lin:0.1:1.0:10",
                           "t_max": 1000.0, "record_interval": 1.0, "t_inf": 1000.0},
    "rate-fit": {"gamma_ratio": [0.5, 1.0, 2.0, 5.0], "p_m": "lin:0.1:1.0:10",
                 "t_max": 1000.0, "record_interval": 1.0},
    "trace": {"gamma_ratio": [0.25], "p_m": [1.0], "runs": 2, "batches": 1,
              "t_max": 200.0, "record_interval": 0.1},
    "decoupling": {},
}


def parse_axis(value):
    """
    Parse an axis given as a list, a comma list or a range spec

    Accepted strings: "0.25,1,5", "lin:START:STOP:NUM", "log:START:STOP:NUM".

    Returns:
        list: Floats
    """
    if isinstance(value, (int, float)):
        return [float(value)]
    if isinstance(value, (list, tuple)):
        return [float(v) for v in value]
    text = str(value).strip()
    if text.startswith(("lin:", "log:")):
        kind, start, stop, num = text.split(":")
        start, stop, num = float(start), float(stop), int(num)
        if kind == "lin":
            points = np.linspace(start, stop, num)
        else:
            points = np.geomspace(start, stop, num)
        return [float(f"{p:.12g}") for p in points]
    return [float(part) for part in text.split(",") if part.strip()]


def _int_list(value):
    return [int(round(v)) for v in parse_axis(value)]


@dataclass
class SweepConfig:
    """Every setting of a sweep run (None means "use the mode default")"""

    mode: str = "growth"
    n_majoranas: object = None
    j: object = None
    gamma_ratio: object = None
    p_m: object = None
    dt: float = 0.05
    t_max: float = None
    record_interval: float = None
    t_inf: float = None
    runs: int = None
    batches: int = None
    seed: int = 0
    workers: int = 1
    out: str = "results"
    observable: str = "both"
    gamma_egr: float = None
    calibration_runs: int = None
    calibration_t_max: float = 40.0
    calibration_record_interval: float = 0.05
    n_system: list = field(default_factory=lambda: [4, 6, 8])
    gamma_frac: list = field(default_factory=lambda: [0.25])
    p_meas: list = field(default_factory=lambda: [0.25, 0.5, 0.75])
    haar_samples: int = 100
    rounds: int = 1
    log_level: str = "INFO"

    @classmethod
    def from_sources(cls, file_document=None, overrides=None):
        """
        Merge a config-file document with flag overrides

        Args:
            file_document (dict): Parsed JSON config file (may be None)
            overrides (dict): Flag values; None entries are ignored

        Returns:
            SweepConfig: Validated and resolved configuration
        """
        merged = dict(file_document or {})
        merged.update({k: v for k, v in (overrides or {}).items() if v is not None})

        known = {f.name for f in fields(cls)}
        unknown = sorted(set(merged) - known)
        if unknown:
            raise ConfigError([(name, "unknown setting") for name in unknown])
        return cls(**merged).resolved()

    @classmethod
    def from_file(cls, path, overrides=None):
        with open(path, "r") as f:
            try:
                document = json.load(f)
            except json.JSONDecodeError as e:
                raise ConfigError([("config", f"not valid JSON: {e}")]) from e
        if not isinstance(document, dict):
            raise ConfigError([("config", "top level must be a JSON object")])
        return cls.from_sources(document, overrides)

    def resolved(self):
        """Fill mode defaults, normalize types and validate"""
        if self.mode not in MODES:
            raise ConfigError([("mode", f"must be one of {', '.join(MODES)}")])
        values = asdict(self)
        defaults = dict(_MODE_DEFAULTS[self.mode])
        default_t_inf = defaults.pop("t_inf", None)
        for name, default in defaults.items():
            if values.get(name) is None:
                values[name] = default
        values["n_majoranas"] = values["n_majoranas"] or [16]
        values["j"] = values["j"] or [1.0]

        problems = []

        def convert(name, func):
            try:
                values[name] = func(values[name]) if values[name] is not None else None
            except (TypeError, ValueError) as e:
                problems.append((name, f"cannot parse {values[name]!r}: {e}"))

        for name in ("gamma_ratio", "p_m", "j", "gamma_frac", "p_meas"):
            convert(name, parse_axis)
        for name in ("n_majoranas", "n_system"):
            convert(name, _int_list)
        for name in ("dt", "t_max", "record_interval", "t_inf", "gamma_egr",
                     "calibration_t_max", "calibration_record_interval"):
            convert(name, float)
        for name in ("runs", "batches", "seed", "workers", "calibration_runs",
                     "haar_samples", "rounds"):
            convert(name, int)

        if values["runs"] is None:
            values["runs"] = 50
        if values["batches"] is None:
            values["batches"] = 10 if values["runs"] % 10 == 0 else 1
        if values["calibration_runs"] is None:
            values["calibration_runs"] = values["runs"]
        # an unset t_inf follows a shortened t_max
        if values["t_inf"] is None and values["t_max"] is not None and not problems:
            values["t_inf"] = min(default_t_inf or values["t_max"], values["t_max"])

        if not problems:
            problems.extend(_validate(values))
        if problems:
            raise ConfigError(problems)
        return replace(self, **values)

    def to_document(self):
        """Plain JSON-serializable dict of every setting"""
        return asdict(self)

    def run_document(self):
        """Settings that determine the results (execution-only fields removed)"""
        document = self.to_document()
        for name in EXECUTION_FIELDS:
            document.pop(name)
        return document


def _increasing(axis):
    return all(b > a for a, b in zip(axis, axis[1:]))


def _validate(v):
    problems = []
    mode = v["mode"]
    if v["observable"] not in OBSERVABLES:
        problems.append(("observable", f"must be one of {', '.join(OBSERVABLES)}"))
    if v["log_level"].upper() not in ("DEBUG", "INFO", "WARNING", "ERROR"):
        problems.append(("log_level", f"unknown level {v['log_level']!r}"))
    if v["seed"] < 0 or v["seed"] >= 2 ** 64:
        problems.append(("seed", "must be an unsigned 64-bit integer"))
    if v["workers"] < 1:
        problems.append(("workers", "must be at least 1"))
    if v["runs"] < 1:
        problems.append(("runs", "must be at least 1"))
    elif v["batches"] < 1 or v["runs"] % v["batches"]:
        problems.append(("batches", f"must divide runs ({v['runs']})"))

    if mode == "decoupling":
        for name in ("n_system", "gamma_frac", "p_meas"):
            if not v[name] or not _increasing(v[name]):
                problems.append((name, "must be a non-empty strictly increasing list"))
        if v["haar_samples"] < 50:
            problems.append(("haar_samples", "must be at least 50"))
        if v["rounds"] < 1:
            problems.append(("rounds", "must be at least 1"))
        return problems

    if not v["dt"] > 0:
        problems.append(("dt", "must be positive"))
    if not (v["t_max"] or 0) > 0:
        problems.append(("t_max", "must be positive"))
    if (v["record_interval"] or 0) < v["dt"]:
        problems.append(("record_interval", "must be >= dt"))
    for n in v["n_majoranas"]:
        if n % 4 or not 8 <= n <= 24:
            problems.append(("n_majoranas", f"{n} must be a multiple of 4 in [8, 24]"))
    if any(j < 0 for j in v["j"]) or not v["j"]:
        problems.append(("j", "must be a non-empty list of non-negative couplings"))
    if mode not in ("growth", "egr") and (len(v["n_majoranas"]) != 1 or len(v["j"]) != 1):
        problems.append(("n_majoranas", f"mode {mode} takes a single N and a single J"))
    if mode not in ("growth", "egr"):
        for name in ("gamma_ratio", "p_m"):
            if not v[name] or not _increasing(v[name]):
                problems.append((name, "must be a non-empty strictly increasing axis"))
        if v["gamma_ratio"] and v["gamma_ratio"][0] < 0:
            problems.append(("gamma_ratio", "values must be non-negative"))
        if mode == "rate-fit" and v["gamma_ratio"] and v["gamma_ratio"][0] <= 0:
            problems.append(("gamma_ratio", "rate fits need positive measurement rates"))
        if mode == "trace" and (len(v["gamma_ratio"] or ()) != 1 or len(v["p_m"] or ()) != 1):
            problems.append(("gamma_ratio", "trace mode takes a single gamma_ratio and p_m"))
        if v["p_m"] and not 0 <= v["p_m"][0] <= v["p_m"][-1] <= 1:
            problems.append(("p_m", "values must lie in [0, 1]"))
        if v["gamma_egr"] is not None and v["gamma_egr"] <= 0:
            problems.append(("gamma_egr", "must be positive"))
    if mode.startswith("phase") and v["t_inf"] > v["t_max"]:
        problems.append(("t_inf", f"must not exceed t_max ({v['t_max']})"))
    return problems


@dataclass(frozen=True)
class SweepGrid:
    """
    Axes of a (Gamma_m/Gamma_egr, p_m) sweep

    Attributes:
        gamma_ratio_axis (tuple): Gamma_m / Gamma_egr values
        p_m_axis (tuple): Measurement probabilities
        runs_per_cell (int): Trajectories per cell
        mode (str): "entanglement" or "purification"
    """

    gamma_ratio_axis: tuple
    p_m_axis: tuple
    runs_per_cell: int
    mode: str

    def __post_init__(self):
        problems = []
        for name in ("gamma_ratio_axis", "p_m_axis"):
            axis = tuple(getattr(self, name))
            object.__setattr__(self, name, axis)
            if not axis or not _increasing(axis):
                problems.append((name, "must be non-empty and strictly increasing"))
        if self.runs_per_cell < 1:
            problems.append(("runs_per_cell", "must be positive"))
        if self.mode not in ("entanglement", "purification"):
            problems.append(("mode", f"unknown sweep mode {self.mode!r}"))
        if problems:
            raise ConfigError(problems)

    def cells(self):
        """(i, j, gamma_ratio, p_m) for every cell, gamma_ratio major"""
        for i, ratio in enumerate(self.gamma_ratio_axis):
            for j, p_m in enumerate(self.p_m_axis):
                yield i, j, ratio, p_m
