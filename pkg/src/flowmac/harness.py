"""Experiment driver: arrival-rate sweeps for the adaptive, oracle and CSMA modes.

Every random stream is derived from the master seed through
``numpy.random.SeedSequence`` spawn keys, so a configuration and seed fix
every output byte. Adaptive and oracle runs at the same (rate, replication)
see the same arrival trace.
"""
from __future__ import annotations

import configparser
import csv
import io
import json
import logging
import math
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path

import numpy as np

from . import adaptation as ad
from .csma_baseline import CsmaParams, run_csma
from .flows import ConfigError, FrameConfig, LoadModel, generate_arrivals
from .metrics import RunMetrics, energy_per_success, format_metric, throughput
from .reservation_mac import new_state, run_flush_frames, run_frame

log = logging.getLogger(__name__)

MODES = ("adaptive", "oracle", "csma")
DEFAULT_ARMS = ((20, 6), (15, 7), (10, 8), (5, 9))
SCENARIOS = {
    "det": ("deterministic", 3),
    "geo": ("geometric", 1.25),
}
CSV_HEADER = ["mode", "lambda", "replication", "throughput", "energy_per_success",
              "accepted", "completed", "failed", "final_p_by_arm", "arm_play_counts"]
SUMMARY_HEADER = ["mode", "lambda", "n", "throughput_mean", "throughput_se",
                  "energy_mean", "energy_se", "accepted_mean", "completed_mean", "failed_mean"]

# spawn-key tags for the independent random streams of one sweep
_TRAFFIC, _CALIBRATION = 10, 11
_STREAM = {mode: i for i, mode in enumerate(MODES)}

GRID_POINTS = 12
GRID_LOW = 0.05    # first grid point, as a fraction of the capacity bound
GRID_HIGH = 10.0   # last grid point, as a multiple of the capacity bound


@dataclass
class ExperimentConfig:
    modes: tuple = MODES
    scenario: str = "det"
    c: int = 3
    T: int = 50
    k: int = 5
    arms: tuple = DEFAULT_ARMS
    r: int = 50
    load: str | None = None          # "deterministic:3" / "geometric:1.25"; None follows scenario
    slack: tuple = (2, 20)
    lambdas: tuple | None = None     # None -> default_lambda_grid
    frames: int = 1000
    replications: int = 10
    seed: int = 1
    delta: float = 0.05
    p_init: float = 1.0
    retry: bool = False
    calibration_frames: int = 200
    cw_min: int = 2
    cw_max: int = 16
    max_collisions: int = 3
    freeze: bool = True
    out: str | None = None

    def __post_init__(self):
        self.validate()

    def validate(self):
        if isinstance(self.modes, str):
            self.modes = (self.modes,)
        self.modes = tuple(self.modes)
        for mode in self.modes:
            if mode not in MODES:
                raise ConfigError(f"unknown mode {mode!r}; expected one of {MODES}")
        if self.scenario not in SCENARIOS:
            raise ConfigError(f"unknown scenario {self.scenario!r}; expected det or geo")
        self.arms = tuple(tuple(int(v) for v in arm) for arm in self.arms)
        if not self.arms:
            raise ConfigError("at least one (N_C, N_T) arm is required")
        for arm in self.arms:
            FrameConfig.from_arm(arm, c=self.c, k=self.k, T=self.T)
        for name in ("r", "frames", "replications", "calibration_frames"):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name} must be >= 1")
        if not self.delta > 0:
            raise ConfigError("delta must be positive")
        if not 0.0 <= self.p_init <= 1.0:
            raise ConfigError("p_init must lie in [0, 1]")
        self.slack = tuple(int(s) for s in self.slack)
        self.load_model()
        self.csma_params()
        if self.lambdas is not None:
            lams = tuple(float(x) for x in self.lambdas)
            if not lams or lams[0] <= 0 or any(b <= a for a, b in zip(lams, lams[1:])):
                raise ConfigError("lambda grid must be strictly positive and increasing")
            self.lambdas = lams

    def load_model(self) -> LoadModel:
        if self.load is None:
            kind, value = SCENARIOS[self.scenario]
        else:
            try:
                kind, value = self.load.split(":")
                value = float(value)
            except ValueError:
                raise ConfigError(f"load must look like 'deterministic:3' or 'geometric:1.25', got {self.load!r}")
        if kind == "deterministic":
            value = int(value)
        if len(self.slack) != 2:
            raise ConfigError("slack needs exactly two bounds")
        return LoadModel(kind, value, *self.slack)

    def csma_params(self) -> CsmaParams:
        return CsmaParams(self.cw_min, self.cw_max, self.max_collisions, self.k, self.freeze)

    def frame_configs(self) -> list[FrameConfig]:
        return [FrameConfig.from_arm(arm, c=self.c, k=self.k, T=self.T) for arm in self.arms]

    def capacity_bound(self) -> float:
        """Flows per time unit that the best arm's transmission blocks can carry."""
        best = max(n_t for _, n_t in self.arms)
        return self.c * best / (self.T * self.load_model().mean)

    def lambda_grid(self) -> tuple:
        return self.lambdas if self.lambdas is not None else default_lambda_grid(self)


def default_lambda_grid(config: ExperimentConfig) -> tuple:
    bound = config.capacity_bound()
    grid = np.geomspace(GRID_LOW * bound, GRID_HIGH * bound, GRID_POINTS)
    return tuple(float(x) for x in np.round(grid, 6))


def _arm_label(arm) -> str:
    return f"{arm[0]}x{arm[1]}"


@dataclass
class RepResult:
    metrics: RunMetrics
    accepted: int = 0
    completed: int = 0
    failed: int = 0
    final_p: dict = field(default_factory=dict)
    play_counts: dict = field(default_factory=dict)
    throughput_scale: float = 1.0

    @property
    def throughput(self) -> float:
        return self.throughput_scale * throughput(self.metrics)

    @property
    def energy(self) -> float:
        return energy_per_success(self.metrics)


def _rng(config, *key) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(config.seed, spawn_key=key))


def _traffic(config, rate, horizon, key):
    return generate_arrivals(rate, horizon, config.load_model(), _rng(config, _TRAFFIC, *key), k=config.k)


def _finish(state, horizon) -> RunMetrics:
    m = state.metrics
    return RunMetrics(m.successes, m.failures, m.tx_time, float(horizon))


def run_adaptive(config: ExperimentConfig, rate, arrivals, rng) -> RepResult:
    """UCB over the arms, per-arm p adaptation, flush frames between plays.

    The run lasts ``config.frames`` frames, flush frames included; a play cut
    short by the horizon earns no reward.
    """
    cfgs = config.frame_configs()
    ucb = ad.UcbState.fresh(config.arms, config.r, config.p_init, config.delta)
    state = new_state(arrivals, retry=config.retry)
    frames = 0
    while frames < config.frames:
        arm = ad.ucb_select(ucb)
        cfg = cfgs[arm]
        ctrl = ucb.controllers[arm]
        accepted = 0
        played = 0
        while played < config.r and frames < config.frames:
            report = run_frame(state, cfg, ctrl.p, rng)
            ctrl = ad.update_p(ctrl, report.stats, cfg)
            accepted += report.accepted
            played += 1
            frames += 1
        ucb.controllers[arm] = ctrl
        if played < config.r:
            break
        ad.ucb_update(ucb, arm, ad.play_reward(accepted, cfg, config.r))
        flush = run_flush_frames(state, cfg, max_frames=config.frames - frames)
        frames += flush.frames
    return RepResult(
        _finish(state, config.frames * config.T),
        accepted=state.accepted, completed=state.completed, failed=state.metrics.failures,
        final_p={_arm_label(a): c.p for a, c in zip(config.arms, ucb.controllers)},
        play_counts={_arm_label(a): int(n) for a, n in zip(config.arms, ucb.counts)},
    )


def run_fixed_arm(config: ExperimentConfig, rate, arm, frames, arrivals, rng) -> RepResult:
    """One arm with the contention probability pinned at its optimum."""
    cfg = FrameConfig.from_arm(config.arms[arm], c=config.c, k=config.k, T=config.T)
    p = ad.optimal_p(rate, cfg)
    state = new_state(arrivals, retry=config.retry)
    for _ in range(frames):
        run_frame(state, cfg, p, rng)
    label = _arm_label(config.arms[arm])
    return RepResult(_finish(state, frames * config.T),
                     accepted=state.accepted, completed=state.completed,
                     failed=state.metrics.failures,
                     final_p={label: p}, play_counts={label: 1})


def calibrate_oracle(config: ExperimentConfig, rate, lam_idx) -> int:
    """Index of the arm with the best throughput over calibration runs."""
    horizon = config.calibration_frames * config.T
    arrivals = _traffic(config, rate, horizon, (lam_idx, 0, 2))
    scores = []
    for arm in range(len(config.arms)):
        rng = _rng(config, _CALIBRATION, lam_idx, arm)
        res = run_fixed_arm(config, rate, arm, config.calibration_frames, arrivals, rng)
        scores.append(res.throughput)
    return int(np.argmax(scores))


def run_csma_mode(config: ExperimentConfig, rate, key) -> RepResult:
    """Single channel at rate / c; throughput scaled back up by c."""
    horizon = config.frames * config.T
    arrivals = _traffic(config, rate / config.c, horizon, (*key, 1))
    m = run_csma(arrivals, config.csma_params(), horizon, _rng(config, _STREAM["csma"], *key))
    return RepResult(m, completed=m.successes, failed=m.failures,
                     throughput_scale=float(config.c))


@dataclass
class ExperimentResult:
    config: ExperimentConfig
    lambdas: tuple
    rows: list
    summary: list
    oracle_arms: dict = field(default_factory=dict)

    def select(self, mode, table="summary"):
        rows = self.summary if table == "summary" else self.rows
        return [row for row in rows if row["mode"] == mode]

    def column(self, mode, name):
        return np.array([row[name] for row in self.select(mode)], dtype=float)


def _row(mode, rate, rep, res: RepResult) -> dict:
    return {
        "mode": mode, "lambda": rate, "replication": rep,
        "throughput": res.throughput, "energy_per_success": res.energy,
        "accepted": res.accepted if mode != "csma" else "",
        "completed": res.completed, "failed": res.failed,
        "final_p_by_arm": ";".join(f"{a}:{p!r}" for a, p in res.final_p.items()),
        "arm_play_counts": ";".join(f"{a}:{n}" for a, n in res.play_counts.items()),
    }


def _mean_se(values):
    x = np.asarray(values, dtype=float)
    mean = float(np.mean(x))
    if len(x) < 2 or not np.all(np.isfinite(x)):
        return mean, math.nan
    return mean, float(np.std(x, ddof=1) / math.sqrt(len(x)))


def summarize(rows) -> list:
    groups = {}
    for row in rows:
        groups.setdefault((row["mode"], row["lambda"]), []).append(row)
    out = []
    for (mode, rate), grp in groups.items():
        tp, tp_se = _mean_se([g["throughput"] for g in grp])
        en, en_se = _mean_se([g["energy_per_success"] for g in grp])
        acc = [g["accepted"] for g in grp if g["accepted"] != ""]
        out.append({
            "mode": mode, "lambda": rate, "n": len(grp),
            "throughput_mean": tp, "throughput_se": tp_se,
            "energy_mean": en, "energy_se": en_se,
            "accepted_mean": float(np.mean(acc)) if acc else "",
            "completed_mean": float(np.mean([g["completed"] for g in grp])),
            "failed_mean": float(np.mean([g["failed"] for g in grp])),
        })
    return out


def run_experiment(config: ExperimentConfig, progress=None) -> ExperimentResult:
    lambdas = config.lambda_grid()
    horizon = config.frames * config.T
    rows = []
    oracle_arms = {}
    for mode in MODES:
        if mode not in config.modes:
            continue
        for li, rate in enumerate(lambdas):
            if mode == "oracle":
                oracle_arms[rate] = calibrate_oracle(config, rate, li)
            for rep in range(config.replications):
                key = (li, rep)
                if mode == "csma":
                    res = run_csma_mode(config, rate, key)
                else:
                    arrivals = _traffic(config, rate, horizon, (*key, 0))
                    rng = _rng(config, _STREAM[mode], *key)
                    if mode == "adaptive":
                        res = run_adaptive(config, rate, arrivals, rng)
                    else:
                        res = run_fixed_arm(config, rate, oracle_arms[rate], config.frames, arrivals, rng)
                rows.append(_row(mode, rate, rep, res))
                if progress is not None:
                    progress(mode, rate, rep)
    return ExperimentResult(config, lambdas, rows, summarize(rows), oracle_arms)


# --- serialisation -----------------------------------------------------------

def _cell(value):
    if isinstance(value, float):
        return "nan" if math.isnan(value) else format_metric(value)
    return str(value)


def to_csv(rows, header) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_cell(row[h]) for h in header])
    return buf.getvalue()


def provenance(result: ExperimentResult) -> dict:
    cfg = asdict(result.config)
    cfg["out"] = None
    return {
        "config": cfg,
        "lambda_grid": list(result.lambdas),
        "capacity_bound": result.config.capacity_bound(),
        "collision_policy": "retry_until_expiry" if result.config.retry else "drop",
        "oracle_arms": {repr(k): _arm_label(result.config.arms[v]) for k, v in result.oracle_arms.items()},
    }


def output_paths(out) -> tuple[Path, Path, Path]:
    out = Path(out)
    stem = out.with_suffix("")
    return out, Path(f"{stem}.summary.csv"), Path(f"{stem}.json")


def write_outputs(result: ExperimentResult, out) -> tuple[Path, Path, Path]:
    rows_path, summary_path, json_path = output_paths(out)
    try:
        rows_path.parent.mkdir(parents=True, exist_ok=True)
        rows_path.write_text(to_csv(result.rows, CSV_HEADER))
        summary_path.write_text(to_csv(result.summary, SUMMARY_HEADER))
        json_path.write_text(json.dumps(provenance(result), indent=2, sort_keys=True) + "\n")
    except OSError as exc:
        raise ConfigError(f"cannot write results to {out}: {exc}") from exc
    return rows_path, summary_path, json_path


# --- config files ------------------------------------------------------------

def _bool(text):
    low = text.strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _list(text):
    return [t.strip() for t in text.split(",") if t.strip()]


def _arms(text):
    arms = []
    for item in _list(text):
        n_c, sep, n_t = item.lower().partition("x")
        if not sep:
            raise ValueError(f"arm {item!r} should look like 20x6")
        arms.append((int(n_c), int(n_t)))
    return tuple(arms)


_PARSERS = {
    "mode": ("modes", lambda s: tuple(_list(s))),
    "modes": ("modes", lambda s: tuple(_list(s))),
    "scenario": ("scenario", str.strip),
    "c": ("c", int),
    "t": ("T", int),
    "k": ("k", int),
    "arms": ("arms", _arms),
    "r": ("r", int),
    "load": ("load", str.strip),
    "slack": ("slack", lambda s: tuple(int(v) for v in _list(s))),
    "lambdas": ("lambdas", lambda s: tuple(float(v) for v in _list(s))),
    "frames": ("frames", int),
    "replications": ("replications", int),
    "seed": ("seed", int),
    "delta": ("delta", float),
    "p_init": ("p_init", float),
    "retry": ("retry", _bool),
    "calibration_frames": ("calibration_frames", int),
    "cw_min": ("cw_min", int),
    "cw_max": ("cw_max", int),
    "max_collisions": ("max_collisions", int),
    "freeze": ("freeze", _bool),
    "out": ("out", str.strip),
}


def parse_config_text(text, **overrides) -> ExperimentConfig:
    """Parse flat ``key = value`` lines (``#`` comments allowed)."""
    parser = configparser.ConfigParser(interpolation=None, comment_prefixes=("#", ";"),
                                       inline_comment_prefixes=("#",))
    try:
        parser.read_string("[experiment]\n" + text)
    except configparser.Error as exc:
        raise ConfigError(f"malformed config: {exc}") from exc
    values = {}
    for key, raw in parser["experiment"].items():
        if key not in _PARSERS:
            raise ConfigError(f"unknown config key {key!r}")
        field_name, conv = _PARSERS[key]
        try:
            values[field_name] = conv(raw)
        except ValueError as exc:
            raise ConfigError(f"bad value for {key!r}: {exc}") from exc
    values.update({k: v for k, v in overrides.items() if v is not None})
    try:
        return ExperimentConfig(**values)
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc


def parse_config(path, **overrides) -> ExperimentConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return parse_config_text(text, **overrides)


def with_scenario(config: ExperimentConfig, scenario) -> ExperimentConfig:
    return replace(config, scenario=scenario, load=None)
