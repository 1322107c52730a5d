"""Per-user running statistics, anticipated completion times and decisive users."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence


class DivergentCompletionError(ValueError):
    """Raised when a user's average erasure rate is 1, so its completion time is unbounded."""


@dataclass
class UserStats:
    """Running statistics of one receiver.

    ``harmonic_rate`` is the harmonic mean of the rates of every instantly
    decodable reception so far (None before the first one). The reciprocal
    sum behind it is kept with Neumaier compensation so the tracker stays
    within a few ulps of the batch value over very long runs.
    """

    n_decodable: int = 0
    harmonic_rate: float | None = None
    delay_s: float = 0.0
    erasure_avg: float = 0.0
    erasure_samples: int = 0
    _inv_sum: float = 0.0
    _inv_comp: float = 0.0

    def record_decoded(self, rate: float) -> None:
        if not rate > 0:
            raise ValueError(f"rate must be positive, got {rate}")
        x = 1.0 / rate
        t = self._inv_sum + x
        if abs(self._inv_sum) >= abs(x):
            self._inv_comp += (self._inv_sum - t) + x
        else:
            self._inv_comp += (x - t) + self._inv_sum
        self._inv_sum = t
        self.n_decodable += 1
        self.harmonic_rate = self.n_decodable / (self._inv_sum + self._inv_comp)

    def record_erasure(self, erased: bool) -> None:
        self.erasure_samples += 1
        self.erasure_avg += (float(erased) - self.erasure_avg) / self.erasure_samples


def update_harmonic(stats: UserStats, new_rate: float) -> UserStats:
    """Fold one more instantly decodable reception into ``stats`` (in place)."""
    stats.record_decoded(new_rate)
    return stats


def update_erasure_avg(stats: UserStats, erased: bool) -> UserStats:
    stats.record_erasure(erased)
    return stats


def anticipated_completion(
    stats: UserStats,
    msg_size: float,
    num_messages: int,
    fallback_rate: float | None = None,
) -> float:
    """Projected completion time if the user suffers no further delay.

    ``(N F / R~ + T) / (1 - e~)``. Before any decodable reception ``R~`` is
    taken from ``fallback_rate`` (the user's current capacity in the
    schedulers).
    """
    rate = stats.harmonic_rate if stats.harmonic_rate is not None else fallback_rate
    if rate is None or not rate > 0:
        raise ValueError("no harmonic rate yet and no positive fallback rate given")
    if stats.erasure_avg >= 1.0:
        raise DivergentCompletionError("average erasure probability is 1")
    return (msg_size * num_messages / rate + stats.delay_s) / (1.0 - stats.erasure_avg)


def _layer_thresholds(completions: Sequence[float], active: Sequence[bool]) -> float | None:
    live = [c for c, a in zip(completions, active) if a]
    return max(live) if live else None


def user_layers(
    completions: Sequence[float],
    active: Sequence[bool],
    rate: float,
    msg_size: float,
) -> list[int | None]:
    """For every user, the smallest k >= 1 with ``C_u + k N / R >= C*`` (None if inactive).

    ``C*`` is the largest anticipated completion time among users that still
    want something.
    """
    if not rate > 0:
        raise ValueError("rate must be positive")
    cstar = _layer_thresholds(completions, active)
    if cstar is None:
        return [None] * len(completions)
    step = msg_size / rate
    slack = 1e-12 * max(1.0, abs(cstar))
    out: list[int | None] = []
    for c, a in zip(completions, active):
        if not a:
            out.append(None)
            continue
        gap = cstar - c
        if gap <= step + slack:
            out.append(1)
            continue
        k = math.ceil((gap - slack) / step)
        # guard against rounding in the division
        while c + k * step < cstar - slack:
            k += 1
        while k > 1 and c + (k - 1) * step >= cstar - slack:
            k -= 1
        out.append(k)
    return out


def decisive_set(
    completions: Sequence[float],
    active: Sequence[bool],
    rate: float,
    msg_size: float,
    layer: int = 1,
) -> frozenset[int]:
    """Users that become the completion-time bottleneck after exactly ``layer``
    consecutive useless transmissions at ``rate``.

    ``layer=1`` gives the decisive users; higher layers exclude every user
    already in a lower layer.
    """
    if layer < 1:
        raise ValueError("layer must be >= 1")
    layers = user_layers(completions, active, rate, msg_size)
    return frozenset(u for u, k in enumerate(layers) if k == layer)
