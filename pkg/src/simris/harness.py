"""Monte-Carlo comparison of D-RIS and tree-connected SIMs.

An experiment sweeps layer size (``N = nx * ny``), number of layers and
architecture over seeded channel realizations. Trials are paired: for a
given ``(ny, trial)`` every architecture and every layer count sees the same
receiver channel.

Config files are INI documents::

    [experiment]
    schema_version = 1
    frequency_hz = 28e9
    nx = 4
    ny_values = 1, 2, 4, 8, 16
    l_values = 1, 2, 3, 4
    architectures = dris, tree
    trials = 100
    master_seed = 0
    output_path = results.csv
    workers = 1

    [geometry]
    layer_spacing_wavelengths = 1.0
    element_spacing_wavelengths = 0.5
    first_layer_offset_wavelengths = 1.0

    [optimizer]
    max_iterations = 200
    rel_tolerance = 1e-8
    init = uniform_random
    sweep_order = ascending
    restarts = 1

Every key is optional; missing keys take the defaults above.
"""

from __future__ import annotations

import configparser
import csv
import io
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, fields, replace
from itertools import groupby
from pathlib import Path

import numpy as np

from .errors import ConfigError, EmptyInput, UnsupportedCombination
from .model import Architecture, channel_gain, simplified_channel
from .optimize import (
    ASCENDING,
    DESCENDING,
    DRisOptimizerConfig,
    OptimizationTrace,
    UniformRandomPhase,
    ZeroPhase,
    bdris_optimal,
    circuit_complexity,
    dris_optimize,
    dris_upper_bound,
)
from .network import spectral_norm
from .propagation import SimGeometry, build_stack, trial_seed

log = logging.getLogger(__name__)

SCHEMA_VERSION = 1
CSV_COLUMNS = ("architecture", "n", "l", "trial", "gain", "normalized_gain", "iterations", "complexity", "seed")
SUPPORTED_ARCHITECTURES = (Architecture.DRIS, Architecture.TREE)
INIT_CHOICES = ("uniform_random", "zero")

# spawn-key tags separating the channel and initialization substreams
_CHANNEL_STREAM = 0
_INIT_STREAM = 1


@dataclass(frozen=True)
class ExperimentConfig:
    frequency_hz: float = 28e9
    nx: int = 4
    ny_values: tuple = (1, 2, 4, 8, 16)
    l_values: tuple = (1, 2, 3, 4)
    architectures: tuple = ("dris", "tree")
    trials: int = 100
    master_seed: int = 0
    output_path: str | None = "results.csv"
    workers: int = 1
    layer_spacing: float = 1.0
    element_spacing: float = 0.5
    first_layer_offset: float = 1.0
    max_iterations: int = 200
    rel_tolerance: float = 1e-8
    init: str = "uniform_random"
    sweep_order: str = ASCENDING
    restarts: int = 1

    def __post_init__(self):
        for name in ("ny_values", "l_values", "architectures"):
            value = tuple(getattr(self, name))
            if not value:
                raise ConfigError(f"{name} must not be empty")
            object.__setattr__(self, name, value)
        try:
            archs = tuple(Architecture(a).value for a in self.architectures)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        unsupported = [a for a in archs if Architecture(a) not in SUPPORTED_ARCHITECTURES]
        if unsupported:
            raise ConfigError(f"architectures {unsupported} not supported; use dris and/or tree")
        object.__setattr__(self, "architectures", archs)
        if self.trials < 1:
            raise ConfigError("trials must be at least 1")
        if self.restarts < 1:
            raise ConfigError("restarts must be at least 1")
        if self.workers < 1:
            raise ConfigError("workers must be at least 1")
        if any(v < 1 for v in self.ny_values) or any(v < 1 for v in self.l_values) or self.nx < 1:
            raise ConfigError("nx, ny_values and l_values must be positive")
        if not 0 <= self.master_seed < 2**64:
            raise ConfigError("master_seed must be an unsigned 64-bit integer")
        if self.init not in INIT_CHOICES:
            raise ConfigError(f"init must be one of {INIT_CHOICES}")
        if self.sweep_order not in (ASCENDING, DESCENDING):
            raise ConfigError(f"sweep_order must be {ASCENDING} or {DESCENDING}")
        if self.max_iterations < 1 or not self.rel_tolerance > 0:
            raise ConfigError("max_iterations must be >= 1 and rel_tolerance > 0")
        for name in ("frequency_hz", "layer_spacing", "element_spacing", "first_layer_offset"):
            if not getattr(self, name) > 0:
                raise ConfigError(f"{name} must be positive")

    def geometry(self, ny: int) -> SimGeometry:
        return SimGeometry.from_frequency(self.frequency_hz, self.nx, ny, self.layer_spacing,
                                          self.element_spacing, self.first_layer_offset)

    def optimizer(self) -> DRisOptimizerConfig:
        return DRisOptimizerConfig(self.max_iterations, self.rel_tolerance, None, self.sweep_order)


# (section, key, attribute, parser)
_INT_LIST = lambda s: tuple(int(x) for x in s.split(",") if x.strip())  # noqa: E731
_STR_LIST = lambda s: tuple(x.strip() for x in s.split(",") if x.strip())  # noqa: E731
_KEYS = [
    ("experiment", "frequency_hz", "frequency_hz", float),
    ("experiment", "nx", "nx", int),
    ("experiment", "ny_values", "ny_values", _INT_LIST),
    ("experiment", "l_values", "l_values", _INT_LIST),
    ("experiment", "architectures", "architectures", _STR_LIST),
    ("experiment", "trials", "trials", int),
    ("experiment", "master_seed", "master_seed", int),
    ("experiment", "output_path", "output_path", str),
    ("experiment", "workers", "workers", int),
    ("geometry", "layer_spacing_wavelengths", "layer_spacing", float),
    ("geometry", "element_spacing_wavelengths", "element_spacing", float),
    ("geometry", "first_layer_offset_wavelengths", "first_layer_offset", float),
    ("optimizer", "max_iterations", "max_iterations", int),
    ("optimizer", "rel_tolerance", "rel_tolerance", float),
    ("optimizer", "init", "init", str),
    ("optimizer", "sweep_order", "sweep_order", str),
    ("optimizer", "restarts", "restarts", int),
]


def config_from_string(text: str) -> ExperimentConfig:
    parser = configparser.ConfigParser()
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"unparsable config: {exc}") from None
    version = parser.get("experiment", "schema_version", fallback=str(SCHEMA_VERSION))
    if version.strip() != str(SCHEMA_VERSION):
        raise ConfigError(f"unsupported schema_version {version!r}")
    known = {(sec, key) for sec, key, _, _ in _KEYS} | {("experiment", "schema_version")}
    for sec in parser.sections():
        if sec not in ("experiment", "geometry", "optimizer"):
            raise ConfigError(f"unknown section [{sec}]")
        for key in parser[sec]:
            if (sec, key) not in known:
                raise ConfigError(f"unknown key {key!r} in [{sec}]")
    kwargs = {}
    for sec, key, attr, conv in _KEYS:
        if parser.has_option(sec, key):
            raw = parser.get(sec, key)
            try:
                kwargs[attr] = conv(raw)
            except ValueError:
                raise ConfigError(f"bad value for {sec}.{key}: {raw!r}") from None
    return ExperimentConfig(**kwargs)


def load_config(path) -> ExperimentConfig:
    return config_from_string(Path(path).read_text())


def config_to_string(cfg: ExperimentConfig) -> str:
    sections = {"experiment": {"schema_version": str(SCHEMA_VERSION)}, "geometry": {}, "optimizer": {}}
    for sec, key, attr, _ in _KEYS:
        value = getattr(cfg, attr)
        if value is None:
            continue
        if isinstance(value, tuple):
            value = ", ".join(str(v) for v in value)
        elif isinstance(value, float):
            value = repr(value)
        sections[sec][key] = str(value)
    parser = configparser.ConfigParser()
    parser.read_dict(sections)
    buf = io.StringIO()
    parser.write(buf)
    return buf.getvalue()


@dataclass(frozen=True)
class TrialRecord:
    architecture: str
    n: int
    l: int
    trial: int
    gain: float
    normalized_gain: float
    iterations: int
    complexity: int
    seed: int

    def violations(self, tol: float = 1e-9) -> list[str]:
        out = []
        if not (0.0 <= self.normalized_gain <= 1.0 + tol):
            out.append(f"normalized gain {self.normalized_gain!r} outside [0, 1]")
        try:
            expected = circuit_complexity(self.architecture, self.n, self.l)
        except UnsupportedCombination as exc:
            out.append(str(exc))
        else:
            if expected != self.complexity:
                out.append(f"complexity {self.complexity} != {expected}")
        return out


@dataclass
class TrialOutcome:
    """A record plus the diagnostics not written to CSV."""

    record: TrialRecord
    trace: OptimizationTrace | None
    upper_bound: float
    stage_norms: list


def _sort_key(cfg: ExperimentConfig):
    arch_rank = {a: i for i, a in enumerate(cfg.architectures)}
    return lambda r: (arch_rank[r.architecture], r.n, r.l, r.trial)


def _run_unit(cfg: ExperimentConfig, ny: int, trial: int) -> list[TrialOutcome]:
    g = cfg.geometry(ny)
    n = g.n
    seed = trial_seed(cfg.master_seed, _CHANNEL_STREAM, ny, trial)
    out = []

    if Architecture.TREE.value in cfg.architectures:
        stack = build_stack(g, 1, 1, Architecture.TREE, seed)
        h_1 = stack.stages[0].h21[:, 0]
        h_r = stack.receiver_stage.h21[0]
        stack = stack.with_layers([bdris_optimal(h_r, h_1, Architecture.TREE)])
        gain = channel_gain(simplified_channel(stack))
        norm = np.linalg.norm(h_r) ** 2 * np.linalg.norm(h_1) ** 2
        rec = TrialRecord("tree", n, 1, trial, gain, gain / norm, 0,
                          circuit_complexity(Architecture.TREE, n, 1), seed)
        out.append(TrialOutcome(rec, None, float(norm), [spectral_norm(s.h21) for s in stack.stages]))

    if Architecture.DRIS.value in cfg.architectures:
        opt = cfg.optimizer()
        for l in cfg.l_values:
            stack = build_stack(g, l, 1, Architecture.DRIS, seed)
            best = None
            for restart in range(cfg.restarts):
                if cfg.init == "zero":
                    init = ZeroPhase()
                else:
                    init = UniformRandomPhase(trial_seed(cfg.master_seed, _INIT_STREAM, ny, l, trial, restart))
                result, trace = dris_optimize(stack, replace(opt, init_policy=init))
                if best is None or trace.final_gain > best[1].final_gain:
                    best = (result, trace)
            result, trace = best
            gain = channel_gain(simplified_channel(result))
            h_1 = stack.stages[0].h21[:, 0]
            h_r = stack.receiver_stage.h21[0]
            norm = np.linalg.norm(h_r) ** 2 * np.linalg.norm(h_1) ** 2
            rec = TrialRecord("dris", n, l, trial, gain, gain / norm, trace.iterations_used,
                              circuit_complexity(Architecture.DRIS, n, l), seed)
            out.append(TrialOutcome(rec, trace, dris_upper_bound(stack),
                                    [spectral_norm(s.h21) for s in stack.stages]))
    return out


def _run_unit_star(args):
    return _run_unit(*args)


def run_trials(cfg: ExperimentConfig) -> list[TrialOutcome]:
    """Run the whole sweep and return outcomes in deterministic record order."""
    units = [(cfg, ny, t) for ny in cfg.ny_values for t in range(cfg.trials)]
    if cfg.workers > 1:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            chunks = list(pool.map(_run_unit_star, units, chunksize=max(1, len(units) // (4 * cfg.workers))))
    else:
        chunks = [_run_unit(*u) for u in units]
    outcomes = [o for chunk in chunks for o in chunk]
    key = _sort_key(cfg)
    outcomes.sort(key=lambda o: key(o.record))
    return outcomes


def run_experiment(cfg: ExperimentConfig, output_path=None) -> list[TrialRecord]:
    """Run the sweep; write the CSV to ``output_path`` (default ``cfg.output_path``)."""
    path = output_path if output_path is not None else cfg.output_path
    records = [o.record for o in run_trials(cfg)]
    for rec in records:
        bad = rec.violations()
        if bad:
            log.warning("record %s violates invariants: %s", rec, "; ".join(bad))
    if path is not None:
        write_csv(records, path)
    return records


def _fmt(value):
    if isinstance(value, float):
        return format(value, ".17g")
    return str(value)


def write_csv(records, path_or_file):
    """Write records with fixed columns; floats keep 17 significant digits."""
    if hasattr(path_or_file, "write"):
        _write_rows(records, path_or_file)
        return
    with open(path_or_file, "w", newline="") as f:
        _write_rows(records, f)


def _write_rows(records, f):
    w = csv.writer(f, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for r in records:
        w.writerow([_fmt(getattr(r, c)) for c in CSV_COLUMNS])


def read_csv(path_or_file) -> list[TrialRecord]:
    if hasattr(path_or_file, "read"):
        return _read_rows(path_or_file)
    with open(path_or_file, newline="") as f:
        return _read_rows(f)


def _read_rows(f):
    reader = csv.DictReader(f)
    if tuple(reader.fieldnames or ()) != CSV_COLUMNS:
        raise ValueError(f"unexpected CSV header {reader.fieldnames}")
    types = {fl.name: fl.type for fl in fields(TrialRecord)}
    conv = {"str": str, "int": int, "float": float}
    return [TrialRecord(**{k: conv[types[k]](v) for k, v in row.items()}) for row in reader]


@dataclass(frozen=True)
class SummaryRow:
    architecture: str
    n: int
    l: int
    count: int
    mean_g: float
    stderr_g: float
    mean_iterations: float
    complexity: int


def summarize(records) -> list[SummaryRow]:
    """Per (architecture, N, L): mean normalized gain, its standard error, mean iterations, complexity."""
    records = list(records)
    if not records:
        raise EmptyInput("no records to summarize")
    key = lambda r: (r.architecture, r.n, r.l)  # noqa: E731
    rows = []
    for (arch, n, l), grp in groupby(sorted(records, key=key), key=key):
        grp = list(grp)
        g = np.array([r.normalized_gain for r in grp])
        se = float(g.std(ddof=1) / math.sqrt(g.size)) if g.size > 1 else 0.0
        rows.append(SummaryRow(arch, n, l, g.size, float(g.mean()), se,
                               float(np.mean([r.iterations for r in grp])), grp[0].complexity))
    return rows


def format_summary(rows) -> str:
    head = f"{'arch':<6}{'N':>5}{'L':>4}{'trials':>8}{'mean G':>12}{'stderr':>12}{'iters':>9}{'impedances':>12}"
    lines = [head, "-" * len(head)]
    for r in rows:
        lines.append(f"{r.architecture:<6}{r.n:>5}{r.l:>4}{r.count:>8}{r.mean_g:>12.6f}{r.stderr_g:>12.2e}"
                     f"{r.mean_iterations:>9.1f}{r.complexity:>12d}")
    return "\n".join(lines)
