"""Experiment configuration: a hand-editable YAML tree.

Required keys: ``dimension``, ``matrices`` (row-major), ``probs``, ``seed``.
Analysis sections (``walk``, ``semigroup``, ``recurrence``, ``harmonic``)
are optional; missing values fall back to the defaults below. Structural
problems (unreadable file, missing key, wrong type) raise ``ConfigError``;
domain violations (zero column, bad probabilities) surface as the usual
semantic exceptions when the ensemble is built.
"""

from __future__ import annotations

from dataclasses import dataclass, field, asdict
from pathlib import Path

import yaml

from .ensemble import MatrixEnsemble
from .errors import ConfigError


@dataclass(frozen=True)
class WalkParams:
    n_steps: int = 100_000
    n_paths: int = 1
    burn_in: int | None = None  # None -> n_steps // 10
    start: tuple[float, ...] | None = None  # None -> barycenter
    t0: float = 0.0


@dataclass(frozen=True)
class SemigroupParams:
    max_len: int = 6
    n_lambda_words: int = 64
    q_max: int = 10**6
    tol: float = 1e-9


@dataclass(frozen=True)
class RecurrenceParams:
    epsilon: float = 0.1
    delta: float = 0.1
    n_trials: int = 10_000
    max_word_len: int = 8


@dataclass(frozen=True)
class HarmonicParams:
    grid_nodes: int = 721  # angular grid, d = 2
    refinement: int = 40  # simplex grid, d >= 3
    window_T: float = 30.0
    ds: float = 0.05
    n_iter: int = 200
    tol: float = 0.0
    kernel_half_width: float = 0.5
    initial: str = "random"  # "random" | "cos"
    initial_period: float | None = None  # required for initial == "cos"
    snapshot: bool = False


@dataclass(frozen=True)
class ExperimentConfig:
    dimension: int
    matrices: tuple
    probs: tuple
    seed: int
    output_dir: str = "out"
    walk: WalkParams = field(default_factory=WalkParams)
    semigroup: SemigroupParams = field(default_factory=SemigroupParams)
    recurrence: RecurrenceParams = field(default_factory=RecurrenceParams)
    harmonic: HarmonicParams = field(default_factory=HarmonicParams)

    def ensemble(self) -> MatrixEnsemble:
        return MatrixEnsemble.of(self.matrices, self.probs)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["matrices"] = [[list(row) for row in m] for m in self.matrices]
        d["probs"] = list(self.probs)
        return d


def _require(mapping: dict, key: str, kinds, context: str):
    if key not in mapping:
        raise ConfigError(f"missing required key '{key}' in {context}")
    value = mapping[key]
    if not isinstance(value, kinds):
        raise ConfigError(f"key '{key}' in {context} has wrong type {type(value).__name__}")
    return value


def _section(raw: dict, name: str, params_cls):
    section = raw.get(name, {})
    if section is None:
        section = {}
    if not isinstance(section, dict):
        raise ConfigError(f"section '{name}' must be a mapping")
    defaults = params_cls()
    unknown = set(section) - set(defaults.__dataclass_fields__)
    if unknown:
        raise ConfigError(f"unknown keys in section '{name}': {sorted(unknown)}")
    kwargs = {}
    for key, value in section.items():
        if key in ("start",) and value is not None:
            value = tuple(float(v) for v in value)
        kwargs[key] = value
    try:
        return params_cls(**kwargs)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"section '{name}': {exc}") from exc


def parse_config(raw: dict) -> ExperimentConfig:
    """Build a validated configuration from a parsed YAML tree."""
    if not isinstance(raw, dict):
        raise ConfigError("configuration root must be a mapping")
    dim = _require(raw, "dimension", int, "config")
    if isinstance(dim, bool) or dim < 2:
        raise ConfigError(f"dimension must be an integer >= 2, got {dim!r}")
    matrices = _require(raw, "matrices", list, "config")
    if not matrices:
        raise ConfigError("matrices list must not be empty")
    clean_mats = []
    for k, m in enumerate(matrices):
        if not isinstance(m, list) or len(m) != dim or any(
            not isinstance(row, list) or len(row) != dim for row in m
        ):
            raise ConfigError(f"matrix {k} is not a {dim} x {dim} row-major list")
        try:
            clean_mats.append(tuple(tuple(float(v) for v in row) for row in m))
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"matrix {k} has a non-numeric entry") from exc
    probs = _require(raw, "probs", list, "config")
    try:
        clean_probs = tuple(float(p) for p in probs)
    except (TypeError, ValueError) as exc:
        raise ConfigError("probs must be a list of numbers") from exc
    seed = _require(raw, "seed", int, "config")
    if isinstance(seed, bool) or not 0 <= seed < 2**64:
        raise ConfigError(f"seed must be an unsigned 64-bit integer, got {seed!r}")
    output_dir = raw.get("output_dir", "out")
    if not isinstance(output_dir, str):
        raise ConfigError("output_dir must be a string")
    known = {
        "dimension", "matrices", "probs", "seed", "output_dir",
        "walk", "semigroup", "recurrence", "harmonic",
    }
    unknown = set(raw) - known
    if unknown:
        raise ConfigError(f"unknown top-level keys: {sorted(unknown)}")
    cfg = ExperimentConfig(
        dimension=dim,
        matrices=tuple(clean_mats),
        probs=clean_probs,
        seed=seed,
        output_dir=output_dir,
        walk=_section(raw, "walk", WalkParams),
        semigroup=_section(raw, "semigroup", SemigroupParams),
        recurrence=_section(raw, "recurrence", RecurrenceParams),
        harmonic=_section(raw, "harmonic", HarmonicParams),
    )
    _validate_params(cfg)
    return cfg


def _validate_params(cfg: ExperimentConfig) -> None:
    w, h, r, sg = cfg.walk, cfg.harmonic, cfg.recurrence, cfg.semigroup
    checks = [
        (w.n_steps >= 1, "walk.n_steps must be >= 1"),
        (w.n_paths >= 1, "walk.n_paths must be >= 1"),
        (w.burn_in is None or w.burn_in >= 0, "walk.burn_in must be >= 0"),
        (w.start is None or len(w.start) == cfg.dimension, "walk.start has wrong dimension"),
        (sg.max_len >= 1, "semigroup.max_len must be >= 1"),
        (sg.q_max >= 1, "semigroup.q_max must be >= 1"),
        (sg.tol > 0, "semigroup.tol must be > 0"),
        (r.epsilon > 0, "recurrence.epsilon must be > 0"),
        (r.delta > 0, "recurrence.delta must be > 0"),
        (r.n_trials >= 1, "recurrence.n_trials must be >= 1"),
        (h.grid_nodes >= 2, "harmonic.grid_nodes must be >= 2"),
        (h.refinement >= 1, "harmonic.refinement must be >= 1"),
        (h.window_T > 0, "harmonic.window_T must be > 0"),
        (h.ds > 0, "harmonic.ds must be > 0"),
        (h.n_iter >= 1, "harmonic.n_iter must be >= 1"),
        (h.tol >= 0, "harmonic.tol must be >= 0"),
        (h.kernel_half_width > 0, "harmonic.kernel_half_width must be > 0"),
        (h.initial in ("random", "cos"), "harmonic.initial must be 'random' or 'cos'"),
        (
            h.initial != "cos" or (h.initial_period is not None and h.initial_period > 0),
            "harmonic.initial_period must be > 0 when initial is 'cos'",
        ),
    ]
    for ok, message in checks:
        if not ok:
            raise ConfigError(message)
    half = h.window_T / h.ds
    if abs(half - round(half)) > 1e-9 * max(1.0, half):
        raise ConfigError(f"harmonic.window_T / ds = {half!r} is not an integer")


def load_config(path) -> ExperimentConfig:
    """Read and validate a YAML configuration file."""
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    try:
        raw = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError(f"config file {path} is not valid YAML: {exc}") from exc
    return parse_config(raw)
