"""Data model for single-cell XOR broadcast: side information, transmissions
and the per-transmission state update.

Messages are labelled ``1..F``; users are positional indices ``0..U-1``.
A coded combination is the set of message labels XOR-ed together.
"""

from __future__ import annotations

import copy
import enum
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from raidnc.metrics import UserStats

MessageSet = frozenset


def message_set(messages: Iterable[int], num_messages: int) -> frozenset[int]:
    """Validate and freeze a collection of message labels."""
    out = frozenset(int(m) for m in messages)
    bad = [m for m in out if not 1 <= m <= num_messages]
    if bad:
        raise ValueError(f"message labels {sorted(bad)} outside 1..{num_messages}")
    return out


class SideInfo:
    """Has/Wants sets of every user.

    Only the Wants sets are stored; Has is the complement within ``1..F``.
    """

    def __init__(self, num_messages: int, wants: Sequence[Iterable[int]]):
        if num_messages < 1:
            raise ValueError("num_messages must be >= 1")
        self.num_messages = num_messages
        self.wants = [set(message_set(w, num_messages)) for w in wants]

    @classmethod
    def fresh(cls, num_users: int, num_messages: int) -> "SideInfo":
        everything = range(1, num_messages + 1)
        return cls(num_messages, [everything] * num_users)

    @classmethod
    def from_has(cls, num_messages: int, has: Sequence[Iterable[int]]) -> "SideInfo":
        full = set(range(1, num_messages + 1))
        return cls(num_messages, [full - set(message_set(h, num_messages)) for h in has])

    @property
    def num_users(self) -> int:
        return len(self.wants)

    @property
    def all_messages(self) -> frozenset[int]:
        return frozenset(range(1, self.num_messages + 1))

    def has(self, user: int) -> frozenset[int]:
        return self.all_messages - self.wants[user]

    def active_users(self) -> list[int]:
        return [u for u, w in enumerate(self.wants) if w]

    def is_complete(self) -> bool:
        return not any(self.wants)

    def matrix(self):
        """Binary user x message matrix, 1 where the message is still wanted."""
        import numpy as np

        s = np.zeros((self.num_users, self.num_messages), dtype=np.int8)
        for u, w in enumerate(self.wants):
            for f in w:
                s[u, f - 1] = 1
        return s

    def copy(self) -> "SideInfo":
        return SideInfo(self.num_messages, [set(w) for w in self.wants])

    def __repr__(self) -> str:
        ws = ", ".join(str(sorted(w)) for w in self.wants)
        return f"SideInfo(F={self.num_messages}, wants=[{ws}])"


@dataclass(frozen=True)
class Transmission:
    combo: frozenset[int]
    rate: float

    def __post_init__(self):
        if not self.combo:
            raise ValueError("a transmission needs at least one message")
        if not self.rate > 0:
            raise ValueError(f"rate must be positive, got {self.rate}")
        object.__setattr__(self, "combo", frozenset(self.combo))


def is_instantly_decodable(wants: Iterable[int], combo: Iterable[int], rate: float, capacity: float) -> bool:
    """True when ``combo`` carries exactly one wanted message and ``rate`` fits the channel."""
    if rate > capacity:
        return False
    return len(set(combo) & set(wants)) == 1


def decoded_message(wants: Iterable[int], has: Iterable[int], combo: Iterable[int]) -> int | None:
    """The message a user extracts from ``combo``, or None if it must discard it."""
    combo = set(combo)
    unknown = combo & set(wants)
    if len(unknown) != 1 or not (combo - unknown) <= set(has):
        return None
    return next(iter(unknown))


RATE_BOOTSTRAPS = ("capacity", "mean_candidate")


class Outcome(enum.Enum):
    DECODED = "decoded"  # received and instantly decodable
    DELAYED = "delayed"  # time spent without progress while still wanting
    ERASED = "erased"  # lost although rate <= capacity
    IDLE = "idle"  # user already complete


@dataclass
class NetworkState:
    side_info: SideInfo
    msg_size_bits: float
    stats: list[UserStats] = field(default_factory=list)
    clock: float = 0.0
    transmission_index: int = 1
    completion_s: list[float | None] = field(default_factory=list)
    erased_s: list[float] = field(default_factory=list)
    rate_bootstrap: str = "capacity"  # harmonic rate before any decodable reception

    def __post_init__(self):
        if self.msg_size_bits <= 0:
            raise ValueError("msg_size_bits must be positive")
        if self.rate_bootstrap not in RATE_BOOTSTRAPS:
            raise ValueError(f"rate_bootstrap must be one of {RATE_BOOTSTRAPS}, got {self.rate_bootstrap!r}")
        n = self.side_info.num_users
        if not self.stats:
            self.stats = [UserStats() for _ in range(n)]
        if not self.completion_s:
            self.completion_s = [0.0 if not w else None for w in self.side_info.wants]
        if not self.erased_s:
            self.erased_s = [0.0] * n

    @classmethod
    def fresh(
        cls, num_users: int, num_messages: int, msg_size_bits: float, rate_bootstrap: str = "capacity"
    ) -> "NetworkState":
        return cls(SideInfo.fresh(num_users, num_messages), msg_size_bits, rate_bootstrap=rate_bootstrap)

    @property
    def num_users(self) -> int:
        return self.side_info.num_users

    @property
    def num_messages(self) -> int:
        return self.side_info.num_messages

    def copy(self) -> "NetworkState":
        return copy.deepcopy(self)


def apply_transmission(
    state: NetworkState,
    tx: Transmission,
    received: Sequence[bool],
    capacities: Sequence[float],
) -> list[Outcome]:
    """Advance ``state`` in place by one transmission and return each user's outcome.

    While a user still wants messages, the airtime ``N/R`` of every
    transmission lands in exactly one bucket: decoded (harmonic-rate tracker),
    erased at ``R <= R_u`` (erased time), or delay. Delay covers both a
    received-but-useless combination and a rate above the user's capacity,
    which is what makes ``C_u = N F / R~_u + T_u + E_u`` hold exactly.
    """
    n = state.num_users
    if len(received) != n or len(capacities) != n:
        raise ValueError(f"expected {n} reception flags and capacities, got {len(received)} and {len(capacities)}")

    si = state.side_info
    airtime = state.msg_size_bits / tx.rate
    state.clock += airtime
    outcomes = []
    for u in range(n):
        wants = si.wants[u]
        if not wants:
            outcomes.append(Outcome.IDLE)
            continue
        st = state.stats[u]
        within = tx.rate <= capacities[u]
        if within:
            st.record_erasure(not received[u])
        if received[u] and within:
            f = decoded_message(wants, si.all_messages - wants, tx.combo)
            if f is not None:
                wants.discard(f)
                st.record_decoded(tx.rate)
                if not wants:
                    state.completion_s[u] = state.clock
                outcomes.append(Outcome.DECODED)
                continue
        if within and not received[u]:
            state.erased_s[u] += airtime
            outcomes.append(Outcome.ERASED)
        else:
            st.delay_s += airtime
            outcomes.append(Outcome.DELAYED)
    state.transmission_index += 1
    return outcomes
