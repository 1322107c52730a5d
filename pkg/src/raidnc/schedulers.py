"""Transmission selection policies.

Every policy first sends each message once uncoded (its own rate rule for
that round), then switches to its steady-state rule. All of them are pure
functions of ``(state, capacities)``.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

from raidnc.channel import ErasureModel, erasure_probability
from raidnc.clique import (
    DEFAULT_EXACT_THRESHOLD,
    Clique,
    WeightedGraph,
    max_clique_equal_weights,
    max_weight_clique,
    optimal_cliques,
    weights_tie,
)
from raidnc.graph import (
    build_graph,
    build_layer_graph,
    candidate_rates,
    common_neighbors,
    Vertex,
    idnc_adjacency,
    vertex_weight,
)
from raidnc.metrics import anticipated_completion, decisive_set, user_layers
from raidnc.model import NetworkState, Transmission, decoded_message

ORACLE_MAX_MESSAGES = 12


class CompletedError(RuntimeError):
    """Raised when asked to schedule for a network where nobody wants anything."""


@dataclass(frozen=True)
class Decision:
    transmission: Transmission
    targets: frozenset[int]
    diagnostics: dict = field(default_factory=dict, compare=False)


def _check_active(state: NetworkState) -> list[bool]:
    active = [bool(w) for w in state.side_info.wants]
    if not any(active):
        raise CompletedError("all users are complete")
    return active


def anticipated_completions(state: NetworkState, capacities: Sequence[float]) -> list[float]:
    """Anticipated completion time of every user.

    Users with no decodable reception yet stand in their current capacity
    for the harmonic rate, or the mean candidate rate when the state says so.
    """
    N, F = state.msg_size_bits, state.num_messages
    if state.rate_bootstrap == "mean_candidate":
        pool = candidate_rates(capacities)
        fallback = [sum(pool) / len(pool)] * len(capacities)
    else:
        fallback = list(capacities)
    return [anticipated_completion(st, N, F, fallback_rate=fallback[u]) for u, st in enumerate(state.stats)]


def decoders(state: NetworkState, combo, rate: float, capacities: Sequence[float]) -> frozenset[int]:
    """Users that can instantly decode ``combo`` at ``rate``, from first principles."""
    si = state.side_info
    out = set()
    for u, w in enumerate(si.wants):
        if rate <= capacities[u] and decoded_message(w, si.all_messages - w, combo) is not None:
            out.add(u)
    return frozenset(out)


def _in_initial_round(state: NetworkState) -> bool:
    return state.transmission_index <= state.num_messages


def _initial_message(state: NetworkState) -> int:
    return state.transmission_index


def _wanting(state: NetworkState, message: int) -> list[int]:
    return [u for u, w in enumerate(state.side_info.wants) if message in w]


def _uncoded(state: NetworkState, message: int, rate: float, capacities, rule: str) -> Decision:
    targets = frozenset(u for u in _wanting(state, message) if rate <= capacities[u])
    return Decision(Transmission(frozenset({message}), rate), targets, {"rule": rule})


def _coverage_rate(capacities: Sequence[float], users: Sequence[int]) -> float:
    """Rate maximising rate x (number of users able to receive it)."""
    caps = [capacities[u] for u in users]
    return max(candidate_rates(caps), key=lambda r: (r * sum(c >= r for c in caps), r))


def _initial_decision(state: NetworkState, capacities, rate_rule: str) -> Decision | None:
    """The uncoded first round; None once it is over (or the message is already everywhere)."""
    if not _in_initial_round(state):
        return None
    f = _initial_message(state)
    users = _wanting(state, f)
    if not users:
        return None
    caps = [capacities[u] for u in users]
    if rate_rule == "min":
        rate = min(caps)
    elif rate_rule == "max":
        rate = max(caps)
    else:
        rate = _coverage_rate(capacities, users)
    return _uncoded(state, f, rate, capacities, "initial")


# ---------------------------------------------------------------------------
# rate-aware IDNC


def _weight_fn(state, capacities, completions, active, erasure: ErasureModel):
    N = state.msg_size_bits
    decisive = {r: decisive_set(completions, active, r, N) for r in candidate_rates(capacities)}
    cache: dict[tuple[int, float], float] = {}

    # the weight depends on (user, rate) only
    def fn(u: int, f: int, r: float) -> float:
        w = cache.get((u, r))
        if w is None:
            w = cache[u, r] = vertex_weight(Vertex(u, f, r), decisive, erasure, N, capacities[u])
        return w

    return fn, decisive


def _decision_from_clique(graph, clique: Clique, **diag) -> Decision:
    combo, rate, users = graph.transmission_of(clique.vertices)
    return Decision(
        Transmission(combo, rate),
        users,
        {"weight": clique.weight, "exact": clique.exact, "vertices": clique.vertices, **diag},
    )


def select_ra_idnc(
    state: NetworkState,
    capacities: Sequence[float],
    erasure: ErasureModel = ErasureModel(),
    exact_threshold: int = DEFAULT_EXACT_THRESHOLD,
    initial_round: bool = True,
) -> Decision:
    """Heaviest maximal clique of the rate-aware IDNC graph."""
    active = _check_active(state)
    if initial_round:
        d = _initial_decision(state, capacities, "coverage")
        if d is not None:
            return d
    completions = anticipated_completions(state, capacities)
    fn, _ = _weight_fn(state, capacities, completions, active, erasure)
    graph = build_graph(state.side_info, capacities, fn)
    clique = max_weight_clique(graph, exact_threshold)
    return _decision_from_clique(graph, clique, layers=1)


def select_multilayer(
    state: NetworkState,
    capacities: Sequence[float],
    erasure: ErasureModel = ErasureModel(),
    exact_threshold: int = DEFAULT_EXACT_THRESHOLD,
    initial_round: bool = True,
    tie_limit: int = 64,
) -> Decision:
    """Heaviest clique among first-layer users, widened layer by layer.

    The graph restricted to users decisive at some rate yields the optimal
    first-layer cliques (all of them when ties occur, up to ``tie_limit``).
    Each is widened with a maximum clique of the next-most-critical users at
    its rate until no vertex of the full graph stays adjacent to every
    chosen vertex. Among the widened candidates the one serving the most
    users of layer 1 at its rate, then of layer 2, and so on, wins.
    """
    active = _check_active(state)
    if initial_round:
        d = _initial_decision(state, capacities, "coverage")
        if d is not None:
            return d
    N = state.msg_size_bits
    completions = anticipated_completions(state, capacities)
    fn, decisive = _weight_fn(state, capacities, completions, active, erasure)
    first_layer = frozenset().union(*decisive.values())

    graph = build_graph(state.side_info, capacities, fn)
    g1 = build_graph(state.side_info, capacities, fn, users=first_layer)
    index = {v: i for i, v in enumerate(graph.vertices)}
    layer_cache: dict[float, list] = {}
    best = None
    for m1 in optimal_cliques(g1, exact_threshold, tie_limit):
        rate = m1.rate
        if rate not in layer_cache:
            layer_cache[rate] = user_layers(completions, active, rate, N)
        layers = layer_cache[rate]
        chosen, used, exact = _widen(graph, [index[g1.vertices[i]] for i in m1.vertices], layers, rate, N, exact_threshold)
        counts = [0] * (max(k for k in layers if k is not None) + 1)
        for i in chosen:
            counts[layers[graph.vertices[i].user]] += 1
        key = tuple(counts[1:])
        if best is None or key > best[0]:
            best = (key, chosen, used, exact and m1.exact, m1)
    _, chosen, used, exact, m1 = best
    weight = sum(graph.weights[i] for i in chosen)
    clique = Clique(tuple(chosen), weight, exact, m1.rate)
    return _decision_from_clique(graph, clique, layers=used, first_layer_weight=m1.weight)


def _widen(graph, chosen: list[int], layers, rate: float, msg_size: float, exact_threshold: int):
    used, exact = [1], True
    while True:
        cand = common_neighbors(graph, chosen)
        if not cand:
            return chosen, used, exact
        k = min(layers[graph.vertices[i].user] for i in cand)
        members = [u for u, lk in enumerate(layers) if lk == k]
        sub = build_layer_graph(graph, chosen, members, math.log(rate / msg_size))
        mk = max_clique_equal_weights(sub, exact_threshold)
        exact &= mk.exact
        chosen = sorted(chosen + list(mk.vertices))
        used.append(k)


# ---------------------------------------------------------------------------
# baselines


def select_broadcast(state: NetworkState, capacities: Sequence[float], **_) -> Decision:
    """Lowest-index undelivered message, uncoded, at the slowest wanting user's capacity."""
    _check_active(state)
    f = min(set().union(*state.side_info.wants))
    rate = min(capacities[u] for u in _wanting(state, f))
    return _uncoded(state, f, rate, capacities, "broadcast")


def select_unicast(state: NetworkState, capacities: Sequence[float], initial_round: bool = True, **_) -> Decision:
    """Fastest user that still wants something gets its lowest-index missing message."""
    active = _check_active(state)
    if initial_round:
        d = _initial_decision(state, capacities, "max")
        if d is not None:
            return d
    u = max((u for u, a in enumerate(active) if a), key=lambda u: (capacities[u], -u))
    f = min(state.side_info.wants[u])
    return _uncoded(state, f, capacities[u], capacities, "unicast")


def select_classical_idnc(
    state: NetworkState,
    capacities: Sequence[float],
    exact_threshold: int = DEFAULT_EXACT_THRESHOLD,
    initial_round: bool = True,
    **_,
) -> Decision:
    """Rate-blind IDNC: unit weight for decisive users (judged at the slowest
    active user's rate), then send at the slowest targeted user's capacity."""
    active = _check_active(state)
    if initial_round:
        d = _initial_decision(state, capacities, "min")
        if d is not None:
            return d
    si = state.side_info
    nominal = min(capacities[u] for u, a in enumerate(active) if a)
    completions = anticipated_completions(state, capacities)
    decisive = decisive_set(completions, active, nominal, state.msg_size_bits)
    pairs = [(u, f) for u in range(si.num_users) for f in sorted(si.wants[u])]
    adj = idnc_adjacency(si, pairs)
    per_user: dict[int, int] = {}
    for p, (u, _f) in enumerate(pairs):
        per_user[u] = per_user.get(u, 0) | 1 << p
    g = WeightedGraph([1.0 if u in decisive else 0.0 for u, _f in pairs], adj, partition=list(per_user.values()))
    clique = max_weight_clique(g, exact_threshold)
    chosen = [pairs[i] for i in clique.vertices]
    targets = frozenset(u for u, _f in chosen)
    rate = min(capacities[u] for u in targets)
    return Decision(
        Transmission(frozenset(f for _u, f in chosen), rate),
        targets,
        {"weight": clique.weight, "exact": clique.exact},
    )


# ---------------------------------------------------------------------------
# exhaustive reference


def transmission_objective(
    state: NetworkState,
    capacities: Sequence[float],
    combo,
    rate: float,
    completions: Sequence[float],
    erasure: ErasureModel = ErasureModel(),
) -> tuple[float, frozenset[int]]:
    """Per-transmission objective: sum over decisive decoders of ``ln(R / (eps N))``."""
    N = state.msg_size_bits
    active = [bool(w) for w in state.side_info.wants]
    targets = decoders(state, combo, rate, capacities)
    decisive = decisive_set(completions, active, rate, N)
    total = 0.0
    for u in sorted(targets & decisive):
        if erasure.is_perfect:
            total += math.log(rate / N)
        else:
            total += math.log(rate / (erasure_probability(erasure, rate, capacities[u]) * N))
    return total, targets


def brute_force_best(
    state: NetworkState,
    capacities: Sequence[float],
    erasure: ErasureModel = ErasureModel(),
    initial_round: bool = False,
    **_,
) -> Decision:
    """Enumerate every (combination, candidate rate) pair and keep the best.

    Ties go, in order, to the higher rate, more decoders, and the
    lexicographically smaller (user, message) list, mirroring the clique
    solver. Combinations decodable by nobody are skipped.
    """
    active = _check_active(state)
    F = state.num_messages
    if F > ORACLE_MAX_MESSAGES:
        raise ValueError(f"exhaustive search limited to {ORACLE_MAX_MESSAGES} messages, got {F}")
    if initial_round:
        d = _initial_decision(state, capacities, "coverage")
        if d is not None:
            return d
    completions = anticipated_completions(state, capacities)
    si = state.side_info
    best = None
    best_key = None
    msgs = list(range(1, F + 1))
    for size in range(1, F + 1):
        for combo in itertools.combinations(msgs, size):
            combo = frozenset(combo)
            for rate in candidate_rates(capacities):
                obj, targets = transmission_objective(state, capacities, combo, rate, completions, erasure)
                if not targets:
                    continue
                served = tuple(sorted((u, next(iter(combo & si.wants[u]))) for u in targets))
                if best is None or _oracle_better(obj, rate, served, best_key):
                    best_key = (obj, rate, served)
                    best = Decision(Transmission(combo, rate), targets, {"weight": obj})
    assert best is not None, "an active user can always decode one of its messages"
    return best


def _oracle_better(obj, rate, served, incumbent) -> bool:
    b_obj, b_rate, b_served = incumbent
    if not weights_tie(obj, b_obj):
        return obj > b_obj
    if rate != b_rate:
        return rate > b_rate
    if len(served) != len(b_served):
        return len(served) > len(b_served)
    return served < b_served


# ---------------------------------------------------------------------------
# registry


SCHEDULERS: dict[str, Callable[..., Decision]] = {
    "ra_idnc": select_ra_idnc,
    "ra_idnc_multilayer": select_multilayer,
    "classical_idnc": select_classical_idnc,
    "broadcast": select_broadcast,
    "unicast": select_unicast,
    "oracle": lambda state, capacities, **kw: brute_force_best(state, capacities, initial_round=True, **kw),
}


def get_scheduler(name: str) -> Callable[..., Decision]:
    try:
        return SCHEDULERS[name]
    except KeyError:
        raise ValueError(f"unknown scheduler {name!r}; choose from {', '.join(SCHEDULERS)}") from None
