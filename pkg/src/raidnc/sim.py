"""Episode loop, parameter sweeps and result files."""

from __future__ import annotations

import csv
import dataclasses
import logging
import math
import statistics
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from raidnc.channel import ChannelParams, ErasureModel, erasure_probability, place_users, sample_snapshot
from raidnc.model import RATE_BOOTSTRAPS, NetworkState, Outcome, apply_transmission
from raidnc.schedulers import SCHEDULERS, get_scheduler

log = logging.getLogger(__name__)

AXES = {
    "users": "users",
    "messages": "messages",
    "msg_size": "msg_size_bits",
    "shadowing_std": "shadowing_std_db",
}

CSV_COLUMNS = (
    "scheme",
    "seed",
    "users",
    "messages",
    "msg_size_bits",
    "shadowing_std_db",
    "completion_s",
    "mean_delay_s",
    "max_delay_s",
    "transmissions",
    "completed",
)

DEFAULT_SCHEMES = ("ra_idnc", "classical_idnc", "broadcast", "unicast", "ra_idnc_multilayer")


@dataclass(frozen=True)
class EpisodeConfig:
    users: int = 10
    messages: int = 20
    msg_size_bits: float = 1e6
    channel: ChannelParams = ChannelParams()
    erasure: ErasureModel = ErasureModel()
    scheduler: str = "ra_idnc"
    seed: int = 0
    max_transmissions: int | None = None  # default 50 U F
    exact_threshold: int = 64
    rate_bootstrap: str = "capacity"

    def __post_init__(self):
        if self.users < 1 or self.messages < 1:
            raise ValueError("need at least one user and one message")
        if not self.msg_size_bits >= 1:
            raise ValueError("msg_size_bits must be >= 1")
        if self.max_transmissions is not None and self.max_transmissions <= 0:
            raise ValueError("max_transmissions must be positive")
        get_scheduler(self.scheduler)
        if self.rate_bootstrap not in RATE_BOOTSTRAPS:
            raise ValueError(f"rate_bootstrap must be one of {RATE_BOOTSTRAPS}")

    @property
    def guard(self) -> int:
        return self.max_transmissions or 50 * self.users * self.messages

    def with_axis(self, axis: str, value) -> "EpisodeConfig":
        if axis not in AXES:
            raise ValueError(f"unknown sweep axis {axis!r}; choose from {', '.join(AXES)}")
        if axis == "shadowing_std":
            return dataclasses.replace(self, channel=dataclasses.replace(self.channel, shadowing_std_db=float(value)))
        if axis == "msg_size":
            return dataclasses.replace(self, msg_size_bits=float(value))
        return dataclasses.replace(self, **{AXES[axis]: int(value)})


@dataclass(frozen=True)
class TxRecord:
    index: int
    combo: tuple[int, ...]
    rate: float
    targets: tuple[int, ...]
    received: tuple[bool, ...]
    outcomes: tuple[str, ...]


@dataclass
class EpisodeResult:
    config: EpisodeConfig
    completion_s: float
    user_completion_s: list[float | None]
    user_delay_s: list[float]
    user_erased_s: list[float]
    harmonic_rates: list[float | None]
    transmissions: int
    completed: bool
    log: list[TxRecord] = field(default_factory=list, repr=False)

    @property
    def mean_delay_s(self) -> float:
        return statistics.fmean(self.user_delay_s)

    @property
    def max_delay_s(self) -> float:
        return max(self.user_delay_s)


def _streams(seed: int):
    pos, chan, eras = np.random.SeedSequence(seed).spawn(3)
    return np.random.default_rng(pos), np.random.default_rng(chan), np.random.default_rng(eras)


def run_episode(config: EpisodeConfig, keep_log: bool = True) -> EpisodeResult:
    """Simulate one delivery of all messages to all users.

    Positions, channel draws and erasure draws come from three independent
    streams of ``config.seed``, so every scheme sees the same channel
    realisations at a given seed. Running out of ``config.guard``
    transmissions yields ``completed=False`` rather than an exception.
    """
    U, F, N = config.users, config.messages, config.msg_size_bits
    pos_rng, chan_rng, eras_rng = _streams(config.seed)
    positions = place_users(config.channel, U, pos_rng)
    select = get_scheduler(config.scheduler)
    state = NetworkState.fresh(U, F, N, config.rate_bootstrap)
    records: list[TxRecord] = []
    count = 0
    while not state.side_info.is_complete() and count < config.guard:
        caps = sample_snapshot(config.channel, positions, chan_rng)
        decision = select(state, caps, erasure=config.erasure, exact_threshold=config.exact_threshold)
        tx = decision.transmission
        draws = eras_rng.random(U)
        received = [bool(draws[u] < 1.0 - erasure_probability(config.erasure, tx.rate, caps[u])) for u in range(U)]
        outcomes = apply_transmission(state, tx, received, caps)
        count += 1
        if keep_log:
            records.append(
                TxRecord(
                    count,
                    tuple(sorted(tx.combo)),
                    tx.rate,
                    tuple(sorted(decision.targets)),
                    tuple(received),
                    tuple(o.value for o in outcomes),
                )
            )
    completed = state.side_info.is_complete()
    done = [c for c in state.completion_s if c is not None]
    return EpisodeResult(
        config=config,
        completion_s=max(done) if completed else state.clock,
        user_completion_s=list(state.completion_s),
        user_delay_s=[st.delay_s for st in state.stats],
        user_erased_s=list(state.erased_s),
        harmonic_rates=[st.harmonic_rate for st in state.stats],
        transmissions=count,
        completed=completed,
        log=records,
    )


def completion_identity(result: EpisodeResult) -> list[dict]:
    """Per-user check of ``C_u = N F / R~_u + T_u + E_u`` against the transmission log.

    Returns one dict per user with the log-derived airtime split, the
    tracker-derived right-hand side and the relative residual.
    """
    if not result.log:
        raise ValueError("identity check needs an episode run with keep_log=True")
    N, F = result.config.msg_size_bits, result.config.messages
    out = []
    for u in range(result.config.users):
        decoded = delayed = erased = 0.0
        n_decoded = 0
        for rec in result.log:
            t = N / rec.rate
            o = rec.outcomes[u]
            if o == Outcome.DECODED.value:
                decoded += t
                n_decoded += 1
            elif o == Outcome.DELAYED.value:
                delayed += t
            elif o == Outcome.ERASED.value:
                erased += t
        c_u = result.user_completion_s[u]
        hr = result.harmonic_rates[u]
        rhs = (N * F / hr if hr else math.inf) + result.user_delay_s[u] + result.user_erased_s[u]
        ref = c_u if c_u is not None else math.nan
        out.append(
            {
                "user": u,
                "completion_s": ref,
                "decoded_count": n_decoded,
                "decoded_s": decoded,
                "delay_s": delayed,
                "erased_s": erased,
                "rhs_s": rhs,
                "rel_residual": abs(ref - rhs) / ref if ref else abs(rhs),
                "log_residual": abs(ref - (decoded + delayed + erased)) / ref if ref else 0.0,
            }
        )
    return out


# ---------------------------------------------------------------------------
# sweeps


@dataclass(frozen=True)
class SweepSpec:
    axis: str
    values: Sequence
    seeds: int | Sequence[int] = 20
    base: EpisodeConfig = EpisodeConfig()
    schedulers: Sequence[str] = DEFAULT_SCHEMES

    def __post_init__(self):
        if self.axis not in AXES:
            raise ValueError(f"unknown sweep axis {self.axis!r}; choose from {', '.join(AXES)}")
        if not list(self.values):
            raise ValueError("sweep needs at least one value")
        if isinstance(self.seeds, int) and self.seeds < 1 or not isinstance(self.seeds, int) and not list(self.seeds):
            raise ValueError("sweep needs at least one seed")
        for s in self.schedulers:
            if s not in SCHEDULERS:
                raise ValueError(f"unknown scheduler {s!r}")

    @property
    def seed_list(self) -> list[int]:
        if isinstance(self.seeds, int):
            return list(range(self.base.seed, self.base.seed + self.seeds))
        return list(self.seeds)

    def configs(self) -> list[tuple[object, EpisodeConfig]]:
        out = []
        for value in self.values:
            point = self.base.with_axis(self.axis, value)
            for scheme in self.schedulers:
                for seed in self.seed_list:
                    out.append((value, dataclasses.replace(point, scheduler=scheme, seed=seed)))
        return out


@dataclass(frozen=True)
class SweepRow:
    axis_value: object
    scheme: str
    seed: int
    users: int
    messages: int
    msg_size_bits: float
    shadowing_std_db: float
    completion_s: float
    mean_delay_s: float
    max_delay_s: float
    transmissions: int
    completed: bool
    error: str = ""

    def csv_fields(self) -> list[str]:
        return [
            self.scheme,
            str(self.seed),
            str(self.users),
            str(self.messages),
            _g9(self.msg_size_bits),
            _g9(self.shadowing_std_db),
            _g9(self.completion_s),
            _g9(self.mean_delay_s),
            _g9(self.max_delay_s),
            str(self.transmissions),
            "true" if self.completed else "false",
        ]


def _g9(x: float) -> str:
    return format(float(x), ".9g")


def episode_row(axis_value, config: EpisodeConfig) -> SweepRow:
    """Run one episode and flatten it; failures become a non-completed row."""
    base = dict(
        axis_value=axis_value,
        scheme=config.scheduler,
        seed=config.seed,
        users=config.users,
        messages=config.messages,
        msg_size_bits=config.msg_size_bits,
        shadowing_std_db=config.channel.shadowing_std_db,
    )
    try:
        res = run_episode(config, keep_log=False)
    except Exception as exc:  # one bad episode must not sink the sweep
        log.warning("episode %s seed=%d failed: %s", config.scheduler, config.seed, exc)
        nan = math.nan
        return SweepRow(**base, completion_s=nan, mean_delay_s=nan, max_delay_s=nan,
                        transmissions=0, completed=False, error=f"{type(exc).__name__}: {exc}")
    return SweepRow(**base, completion_s=res.completion_s, mean_delay_s=res.mean_delay_s,
                    max_delay_s=res.max_delay_s, transmissions=res.transmissions, completed=res.completed)


def _row_job(job):
    return episode_row(*job)


@dataclass
class SweepTable:
    axis: str
    rows: list[SweepRow]

    def aggregate(self) -> list[dict]:
        """Mean and sample std of completion time per (axis value, scheme), completed rows only."""
        groups: dict[tuple, list[float]] = {}
        order = []
        for r in self.rows:
            key = (r.axis_value, r.scheme)
            if key not in groups:
                groups[key] = []
                order.append(key)
            if r.completed:
                groups[key].append(r.completion_s)
        out = []
        for value, scheme in order:
            xs = groups[value, scheme]
            out.append(
                {
                    "value": value,
                    "scheme": scheme,
                    "n": len(xs),
                    "mean": statistics.fmean(xs) if xs else math.nan,
                    "std": statistics.stdev(xs) if len(xs) > 1 else 0.0,
                }
            )
        return out

    def means(self, scheme: str) -> dict:
        return {a["value"]: a["mean"] for a in self.aggregate() if a["scheme"] == scheme}


def run_sweep(spec: SweepSpec, workers: int = 1) -> SweepTable:
    """Every (value, scheme, seed) episode, in that nesting order.

    With ``workers > 1`` episodes run in a process pool; results come back
    in submission order, so the table is identical to a serial run.
    """
    jobs = spec.configs()
    if workers > 1:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_row_job, jobs, chunksize=max(1, len(jobs) // (4 * workers))))
    else:
        rows = [episode_row(v, c) for v, c in jobs]
    return SweepTable(spec.axis, rows)


def emit_csv(table: SweepTable | Sequence[SweepRow], path) -> Path:
    rows = table.rows if isinstance(table, SweepTable) else list(table)
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with path.open("w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(CSV_COLUMNS)
            for r in rows:
                w.writerow(r.csv_fields())
    except OSError as exc:
        raise OSError(f"cannot write CSV to {path}: {exc}") from exc
    return path


_PLOT_TEMPLATE = '''\
#!/usr/bin/env python3
"""Mean completion time versus {axis} per scheme, read from {csv_name}."""
import csv
import statistics
import sys
from collections import defaultdict
from pathlib import Path

CSV = Path(__file__).with_name({csv_name!r})
COLUMN = {column!r}
SCHEMES = {schemes!r}


def main():
    if not SCHEMES:
        print("no results to plot")
        return 0
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    series = defaultdict(lambda: defaultdict(list))
    with CSV.open() as fh:
        for row in csv.DictReader(fh):
            if row["completed"] == "true":
                series[row["scheme"]][float(row[COLUMN])].append(float(row["completion_s"]))
    fig, ax = plt.subplots(figsize=(6, 4))
    for scheme in SCHEMES:
        pts = sorted(series[scheme].items())
        ax.plot([x for x, _ in pts], [statistics.fmean(v) for _, v in pts], marker="o", label=scheme)
    ax.set_xlabel({xlabel!r})
    ax.set_ylabel("completion time (s)")
    ax.grid(True, alpha=0.3)
    ax.legend()
    out = CSV.with_suffix(".png")
    fig.savefig(out, dpi=150, bbox_inches="tight")
    print(f"wrote {{out}}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
'''

_XLABELS = {
    "users": "number of users U",
    "messages": "number of messages F",
    "msg_size": "message size N (bits)",
    "shadowing_std": "shadowing std (dB)",
}


def emit_plot_script(table: SweepTable, path, csv_path) -> Path:
    """Write a standalone matplotlib script that plots the CSV at ``csv_path``.

    The script expects the CSV to sit next to it.
    """
    schemes = []
    for r in table.rows:
        if r.scheme not in schemes:
            schemes.append(r.scheme)
    text = _PLOT_TEMPLATE.format(
        axis=table.axis,
        csv_name=Path(csv_path).name,
        column=AXES[table.axis],
        schemes=schemes,
        xlabel=_XLABELS[table.axis],
    )
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text)
    except OSError as exc:
        raise OSError(f"cannot write plot script to {path}: {exc}") from exc
    return path
