"""Monte Carlo simulation of frame-by-frame RACH contention.

One frame is one controller period. The per-frame sequence is:

1. the controller picks this frame's subframe count from what it saw up
   to the previous frame (frame 0 runs at n_s_min for the adaptive
   controller, constants elsewhere);
2. Poisson arrivals are drawn from the load profile and merged with
   retriers whose backoff expires this frame (arrivals contend in the
   frame they arrive);
3. an access-class-barring controller gates the pool, everyone else
   admits it whole;
4. each admitted device picks one (subframe, preamble) pair uniformly;
   singleton pairs succeed, shared pairs collide;
5. collided devices draw a uniform backoff of 1..backoff_window frames,
   or drop once they have failed retry_limit times;
6. the outcome is recorded, and the adaptive controller turns it into a
   load estimate that becomes the forecast for the next frame.

Each run owns two independent random streams spawned from the seed: one
consumed only by arrival draws (exactly one per frame), one by contention,
backoff, and barring. Running different controllers at the same seed
therefore sees identical arrival sequences (common random numbers).
Runs are deterministic: same scenario and seed, bit-identical output.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from enum import Enum
from typing import Sequence

import numpy as np

from .estimator import (
    EstimatorState,
    InconsistentObservationError,
    RachObservation,
    classify_load_branch,
    estimate_load,
    smooth_estimate,
)
from .model import RachConfig, utility
from .optimizer import DEFAULT_TABLE_MAX_LOAD, decide_subframes

__all__ = [
    "ProfileSegment",
    "LoadProfile",
    "DeviceStatus",
    "DeviceState",
    "ControllerKind",
    "ControllerSpec",
    "Controller",
    "FixedController",
    "AdaptiveController",
    "AcbController",
    "make_controller",
    "Scenario",
    "ContentionResult",
    "FrameOutcome",
    "TimeSeries",
    "ReplicationSet",
    "AGGREGATE_COLUMNS",
    "generate_arrivals",
    "contend",
    "resolve_backoff",
    "acb_gate",
    "run_scenario",
    "run_replications",
    "aggregate_runs",
]


# ---------------------------------------------------------------------------
# Load profile


@dataclass(frozen=True)
class ProfileSegment:
    """Linear mean-arrival-rate ramp over [start_frame, end_frame)."""

    start_frame: int
    end_frame: int
    rate_start: float
    rate_end: float


@dataclass(frozen=True)
class LoadProfile:
    """Piecewise-linear mean arrival rate, devices per frame."""

    segments: tuple[ProfileSegment, ...]

    def __post_init__(self) -> None:
        if not self.segments:
            raise ValueError("profile needs at least one segment")
        for seg in self.segments:
            if seg.end_frame <= seg.start_frame:
                raise ValueError(f"segment {seg} has end <= start")
            if seg.rate_start < 0 or seg.rate_end < 0:
                raise ValueError(f"segment {seg} has a negative rate")
        for a, b in zip(self.segments, self.segments[1:]):
            if b.start_frame != a.end_frame:
                raise ValueError(
                    f"segments must be contiguous: {a.end_frame} then {b.start_frame}"
                )

    @property
    def start_frame(self) -> int:
        return self.segments[0].start_frame

    @property
    def end_frame(self) -> int:
        return self.segments[-1].end_frame

    def rate_at(self, frame: int) -> float:
        if not self.start_frame <= frame < self.end_frame:
            raise ValueError(
                f"frame {frame} outside profile span "
                f"[{self.start_frame}, {self.end_frame})"
            )
        for seg in self.segments:
            if seg.start_frame <= frame < seg.end_frame:
                frac = (frame - seg.start_frame) / (seg.end_frame - seg.start_frame)
                return seg.rate_start + (seg.rate_end - seg.rate_start) * frac
        raise AssertionError("unreachable: contiguous segments cover the span")


def generate_arrivals(profile: LoadProfile, frame: int, rng: np.random.Generator) -> int:
    """Poisson draw at the profile's interpolated rate for this frame."""
    return int(rng.poisson(profile.rate_at(frame)))


# ---------------------------------------------------------------------------
# Devices and contention


class DeviceStatus(Enum):
    CONTENDING = "contending"
    BACKED_OFF = "backed_off"
    BARRED = "barred"
    SUCCEEDED = "succeeded"
    DROPPED = "dropped"


@dataclass(slots=True)
class DeviceState:
    id: int
    status: DeviceStatus = DeviceStatus.CONTENDING
    backoff_until: int = 0
    attempts: int = 0


@dataclass(frozen=True)
class ContentionResult:
    """Counts and per-device outcome of one frame's preamble selection."""

    successes: int
    collisions: int  # pairs picked by >= 2 devices
    collided_devices: int
    idle: int
    winners: list[DeviceState]
    losers: list[DeviceState]


def contend(
    contenders: Sequence[DeviceState],
    n_s: int,
    n_preambles: int,
    rng: np.random.Generator,
) -> ContentionResult:
    """Uniform (subframe, preamble) selection; singleton pairs win."""
    if n_s < 1 or n_preambles < 1:
        raise ValueError("n_s and n_preambles must be >= 1")
    n_pairs = n_s * n_preambles
    devices = list(contenders)
    if not devices:
        return ContentionResult(0, 0, 0, n_pairs, [], [])
    picks = rng.integers(0, n_pairs, size=len(devices))
    counts = np.bincount(picks, minlength=n_pairs)
    single = counts == 1
    winners: list[DeviceState] = []
    losers: list[DeviceState] = []
    for dev, pick in zip(devices, picks):
        if single[pick]:
            dev.status = DeviceStatus.SUCCEEDED
            winners.append(dev)
        else:
            losers.append(dev)
    return ContentionResult(
        successes=len(winners),
        collisions=int(np.count_nonzero(counts >= 2)),
        collided_devices=len(losers),
        idle=int(np.count_nonzero(counts == 0)),
        winners=winners,
        losers=losers,
    )


def resolve_backoff(
    collided: Sequence[DeviceState],
    frame: int,
    backoff_window: int,
    retry_limit: int,
    rng: np.random.Generator,
) -> None:
    """Back off collided devices by uniform 1..backoff_window frames.

    A device that has already failed retry_limit times is dropped instead.
    """
    if backoff_window < 1:
        raise ValueError(f"backoff_window must be >= 1, got {backoff_window}")
    if retry_limit < 0:
        raise ValueError(f"retry_limit must be >= 0, got {retry_limit}")
    retriers: list[DeviceState] = []
    for dev in collided:
        if dev.attempts >= retry_limit:
            dev.status = DeviceStatus.DROPPED
        else:
            retriers.append(dev)
    if retriers:
        delays = rng.integers(1, backoff_window + 1, size=len(retriers))
        for dev, delay in zip(retriers, delays):
            dev.attempts += 1
            dev.status = DeviceStatus.BACKED_OFF
            dev.backoff_until = frame + int(delay)


def acb_gate(
    contenders: Sequence[DeviceState],
    p_barring: float,
    barring_window: int,
    frame: int,
    rng: np.random.Generator,
) -> tuple[list[DeviceState], list[DeviceState]]:
    """Admit each contender with probability p_barring; bar the rest."""
    if not 0.0 < p_barring <= 1.0:
        raise ValueError(f"p_barring must be in (0, 1], got {p_barring}")
    if barring_window < 1:
        raise ValueError(f"barring_window must be >= 1, got {barring_window}")
    devices = list(contenders)
    if not devices:
        return [], []
    passed = rng.random(len(devices)) < p_barring
    admitted = [d for d, ok in zip(devices, passed) if ok]
    barred = [d for d, ok in zip(devices, passed) if not ok]
    if barred:
        delays = rng.integers(1, barring_window + 1, size=len(barred))
        for dev, delay in zip(barred, delays):
            dev.status = DeviceStatus.BARRED
            dev.backoff_until = frame + int(delay)
    return admitted, barred


# ---------------------------------------------------------------------------
# Controllers


class ControllerKind(Enum):
    FIXED_DEFAULT = "fixed"  # constant n_s_min, the 3GPP default of 2
    FIXED_MAX = "max"  # constant n_s_max
    ADAPTIVE = "adaptive"
    ACB = "acb"  # access class barring on top of the default allocation


@dataclass(frozen=True)
class ControllerSpec:
    """Controller kind plus the knobs the kinds understand."""

    kind: ControllerKind = ControllerKind.ADAPTIVE
    window: int = 1
    table_max_load: float = DEFAULT_TABLE_MAX_LOAD
    acb_p: float = 0.5
    acb_window: int = 4

    def __post_init__(self) -> None:
        if self.window < 1:
            raise ValueError(f"window must be >= 1, got {self.window}")
        if self.table_max_load <= 0:
            raise ValueError(f"table_max_load must be > 0, got {self.table_max_load}")
        if not 0.0 < self.acb_p <= 1.0:
            raise ValueError(f"acb_p must be in (0, 1], got {self.acb_p}")
        if self.acb_window < 1:
            raise ValueError(f"acb_window must be >= 1, got {self.acb_window}")


class Controller:
    """Policy mapping observed history to the next frame's subframe count."""

    name = "base"
    provides_estimates = False
    fallback = False

    def next_n_s(self) -> int:
        raise NotImplementedError

    def admit(
        self, pool: list[DeviceState], frame: int, rng: np.random.Generator
    ) -> tuple[list[DeviceState], list[DeviceState]]:
        return pool, []

    def observe(self, obs: RachObservation) -> float | None:
        return None


class FixedController(Controller):
    def __init__(self, name: str, n_s: int):
        self.name = name
        self._n_s = n_s

    def next_n_s(self) -> int:
        return self._n_s


class AdaptiveController(Controller):
    """Estimate the load from the last frame, re-optimize the allocation.

    The estimate from frame t is used unchanged as the forecast for frame
    t+1 (persistence). A frame whose observation is inconsistent with the
    model yields no estimate and pins the next frame at n_s_max.
    """

    name = "adaptive"
    provides_estimates = True

    def __init__(
        self,
        config: RachConfig,
        window: int = 1,
        table_max_load: float = DEFAULT_TABLE_MAX_LOAD,
        load_cap: float | None = None,
    ):
        self._config = config
        self._state = EstimatorState(window=window)
        self._table_max_load = table_max_load
        self._load_cap = load_cap
        self._next = config.n_s_min
        self.fallback = False

    def next_n_s(self) -> int:
        return self._next

    def observe(self, obs: RachObservation) -> float | None:
        try:
            branch = classify_load_branch(obs)
            raw = estimate_load(
                obs.successes, obs.n_s_used, obs.n_preambles, branch, self._load_cap
            )
        except InconsistentObservationError:
            self.fallback = True
            self._next = self._config.n_s_max
            return None
        self.fallback = False
        smoothed = smooth_estimate(self._state, raw)
        self._next = decide_subframes(smoothed, self._config, self._table_max_load).n_s
        return smoothed


class AcbController(Controller):
    """Probabilistic barring in front of the default fixed allocation."""

    name = "acb"

    def __init__(self, config: RachConfig, p_barring: float = 0.5, barring_window: int = 4):
        self._n_s = config.n_s_min
        self._p = p_barring
        self._window = barring_window

    def next_n_s(self) -> int:
        return self._n_s

    def admit(self, pool, frame, rng):
        return acb_gate(pool, self._p, self._window, frame, rng)


def make_controller(spec: ControllerSpec, config: RachConfig) -> Controller:
    if spec.kind is ControllerKind.FIXED_DEFAULT:
        return FixedController("fixed", config.n_s_min)
    if spec.kind is ControllerKind.FIXED_MAX:
        return FixedController("max", config.n_s_max)
    if spec.kind is ControllerKind.ADAPTIVE:
        return AdaptiveController(config, spec.window, spec.table_max_load)
    if spec.kind is ControllerKind.ACB:
        return AcbController(config, spec.acb_p, spec.acb_window)
    raise ValueError(f"unknown controller kind {spec.kind!r}")


# ---------------------------------------------------------------------------
# Scenario and per-frame records


@dataclass(frozen=True)
class Scenario:
    """Everything one simulation run needs besides the seed."""

    config: RachConfig
    profile: LoadProfile
    controller: ControllerSpec = ControllerSpec()
    frames: int | None = None  # None: cover the whole profile
    backoff_window: int = 4
    retry_limit: int = 10

    def __post_init__(self) -> None:
        if self.frames is None:
            object.__setattr__(self, "frames", self.profile.end_frame)
        if not 1 <= self.frames <= self.profile.end_frame:
            raise ValueError(
                f"frames must be in [1, {self.profile.end_frame}], got {self.frames}"
            )
        if self.backoff_window < 1:
            raise ValueError(f"backoff_window must be >= 1, got {self.backoff_window}")
        if self.retry_limit < 0:
            raise ValueError(f"retry_limit must be >= 0, got {self.retry_limit}")

    def with_controller(self, kind: ControllerKind) -> "Scenario":
        return replace(self, controller=replace(self.controller, kind=kind))


@dataclass
class FrameOutcome:
    """One frame's record: realized contention plus the controller's view.

    true_load counts every device that wanted to contend this frame;
    contenders counts those actually admitted (they differ only under
    barring). est_load is the adaptive controller's estimate derived from
    this frame's observation, i.e. its forecast for the next frame; None
    for controllers that do not estimate or when estimation failed (the
    row is then flagged estimator_fallback).
    """

    frame: int
    n_s_used: int
    arrivals: int
    contenders: int
    successes: int
    collisions: int
    collided_devices: int
    idle: int
    true_load: int
    est_load: float | None
    throughput: float
    utility: float
    estimator_fallback: bool = False

    def validate(self, config: RachConfig) -> None:
        pairs = self.n_s_used * config.n_preambles
        if self.successes + self.collisions + self.idle != pairs:
            raise ValueError(
                f"frame {self.frame}: successes + collisions + idle != {pairs}"
            )
        if self.successes + self.collided_devices != self.contenders:
            raise ValueError(
                f"frame {self.frame}: successes + collided_devices != contenders"
            )
        if self.collided_devices < 2 * self.collisions:
            raise ValueError(f"frame {self.frame}: collided_devices < 2 * collisions")
        if self.collisions == 0 and self.collided_devices != 0:
            raise ValueError(f"frame {self.frame}: collided devices without collisions")
        if min(
            self.arrivals, self.contenders, self.successes, self.collisions,
            self.collided_devices, self.idle, self.true_load,
        ) < 0:
            raise ValueError(f"frame {self.frame}: negative count")
        if self.throughput != self.successes:
            raise ValueError(f"frame {self.frame}: throughput != successes")
        expected_u = utility(self.successes, config.alpha, self.n_s_used)
        if self.utility != expected_u:
            raise ValueError(f"frame {self.frame}: utility mismatch")


@dataclass
class TimeSeries:
    """Frame-ordered outcome records of one replication."""

    rows: list[FrameOutcome]
    replication_id: int
    seed: int


# ---------------------------------------------------------------------------
# Run loop


def run_scenario(scenario: Scenario, seed: int, replication_id: int = 0) -> TimeSeries:
    """Simulate one replication; deterministic for a fixed (scenario, seed)."""
    cfg = scenario.config
    controller = make_controller(scenario.controller, cfg)
    arrival_seq, event_seq = np.random.SeedSequence(seed).spawn(2)
    arrival_rng = np.random.default_rng(arrival_seq)
    event_rng = np.random.default_rng(event_seq)

    waiting: dict[int, list[DeviceState]] = {}  # due frame -> devices
    rows: list[FrameOutcome] = []
    next_id = 0

    for frame in range(scenario.frames):
        n_s = controller.next_n_s()

        arrivals = generate_arrivals(scenario.profile, frame, arrival_rng)
        fresh = [DeviceState(id=next_id + k) for k in range(arrivals)]
        next_id += arrivals
        due = waiting.pop(frame, [])
        for dev in due:
            dev.status = DeviceStatus.CONTENDING
        pool = due + fresh

        admitted, barred = controller.admit(pool, frame, event_rng)
        for dev in barred:
            waiting.setdefault(dev.backoff_until, []).append(dev)

        result = contend(admitted, n_s, cfg.n_preambles, event_rng)
        resolve_backoff(
            result.losers, frame, scenario.backoff_window, scenario.retry_limit,
            event_rng,
        )
        for dev in result.losers:
            if dev.status is DeviceStatus.BACKED_OFF:
                waiting.setdefault(dev.backoff_until, []).append(dev)

        est = controller.observe(
            RachObservation(
                successes=result.successes,
                collisions=result.collisions,
                idle=result.idle,
                n_s_used=n_s,
                n_preambles=cfg.n_preambles,
            )
        )
        row = FrameOutcome(
            frame=frame,
            n_s_used=n_s,
            arrivals=arrivals,
            contenders=len(admitted),
            successes=result.successes,
            collisions=result.collisions,
            collided_devices=result.collided_devices,
            idle=result.idle,
            true_load=len(pool),
            est_load=est,
            throughput=float(result.successes),
            utility=utility(result.successes, cfg.alpha, n_s),
            estimator_fallback=controller.fallback,
        )
        row.validate(cfg)
        rows.append(row)

    return TimeSeries(rows=rows, replication_id=replication_id, seed=seed)


# ---------------------------------------------------------------------------
# Replications and aggregation

AGGREGATE_COLUMNS = (
    "n_s_used",
    "arrivals",
    "contenders",
    "successes",
    "collisions",
    "collided_devices",
    "idle",
    "true_load",
    "est_load",
    "throughput",
    "utility",
)


@dataclass
class ReplicationSet:
    """Replication runs plus per-frame means and 95% confidence halfwidths."""

    runs: list[TimeSeries]
    means: dict[str, np.ndarray]
    ci95: dict[str, np.ndarray]

    @property
    def n_reps(self) -> int:
        return len(self.runs)

    @property
    def n_frames(self) -> int:
        return len(self.runs[0].rows)


def aggregate_runs(runs: list[TimeSeries]) -> ReplicationSet:
    """Per-frame mean and normal-approximation 95% CI over replications.

    est_load rows without an estimate are skipped; a frame with no valid
    estimate at all aggregates to NaN. Results depend only on the set of
    runs (keyed by replication order), not on completion order.
    """
    if not runs:
        raise ValueError("need at least one run")
    n_frames = len(runs[0].rows)
    if any(len(r.rows) != n_frames for r in runs):
        raise ValueError("all runs must cover the same number of frames")
    runs = sorted(runs, key=lambda r: r.replication_id)
    means: dict[str, np.ndarray] = {}
    ci95: dict[str, np.ndarray] = {}
    for col in AGGREGATE_COLUMNS:
        data = np.array(
            [
                [
                    np.nan if getattr(row, col) is None else float(getattr(row, col))
                    for row in run.rows
                ]
                for run in runs
            ]
        )
        valid = ~np.isnan(data)
        n = valid.sum(axis=0)
        filled = np.where(valid, data, 0.0)
        mean = np.divide(filled.sum(axis=0), n, out=np.full(n_frames, np.nan), where=n > 0)
        dev2 = np.where(valid, (data - np.where(np.isnan(mean), 0.0, mean)) ** 2, 0.0)
        var = np.divide(
            dev2.sum(axis=0), n - 1, out=np.zeros(n_frames), where=n > 1
        )
        ci = np.where(n > 1, 1.96 * np.sqrt(var) / np.sqrt(np.maximum(n, 1)), 0.0)
        means[col] = mean
        ci95[col] = ci
    return ReplicationSet(runs=runs, means=means, ci95=ci95)


def run_replications(
    scenario: Scenario, n_reps: int, base_seed: int = 1
) -> ReplicationSet:
    """Run seeds base_seed..base_seed + n_reps - 1 and aggregate."""
    if n_reps < 1:
        raise ValueError(f"n_reps must be >= 1, got {n_reps}")
    runs = [
        run_scenario(scenario, base_seed + i, replication_id=i) for i in range(n_reps)
    ]
    return aggregate_runs(runs)
