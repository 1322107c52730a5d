"""Self-checks on small random instances.

``check_oracle_equivalence`` compares the clique-based selector with the
exhaustive search over all (combination, rate) pairs. ``check_bijection``
checks that the maximal cliques of the graph are exactly the feasible
transmissions that serve an inclusion-maximal set of (user, message) pairs.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import networkx as nx
import numpy as np

from raidnc.channel import ErasureModel
from raidnc.graph import build_graph, candidate_rates
from raidnc.model import NetworkState, SideInfo, decoded_message
from raidnc.schedulers import (
    anticipated_completions,
    brute_force_best,
    decoders,
    transmission_objective,
    select_ra_idnc,
)

TOLERANCE = 1e-9


@dataclass
class Report:
    name: str
    trials: int = 0
    violations: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def summary(self) -> str:
        status = "PASS" if self.ok else "FAIL"
        return f"{status} {self.name}: {self.trials} instances, {len(self.violations)} violations"


def random_instance(rng: np.random.Generator, max_users: int = 4, max_messages: int = 4, max_rates: int = 3):
    """A small network past its uncoded round: integer capacities >= 1, N = 1,
    random side information and random running statistics."""
    U = int(rng.integers(1, max_users + 1))
    F = int(rng.integers(1, max_messages + 1))
    pool = rng.choice(np.arange(1, 7), size=int(rng.integers(1, max_rates + 1)), replace=False)
    caps = [float(rng.choice(pool)) for _ in range(U)]
    wants = [frozenset(f for f in range(1, F + 1) if rng.random() < 0.5) for _ in range(U)]
    if not any(wants):
        wants[int(rng.integers(U))] = frozenset({int(rng.integers(1, F + 1))})
    state = NetworkState(SideInfo(F, wants), 1.0)
    state.transmission_index = F + 1
    for st in state.stats:
        for _ in range(int(rng.integers(0, 4))):
            st.record_decoded(float(rng.integers(1, 7)))
        st.delay_s = 0.5 * int(rng.integers(0, 5))
    return state, caps


def check_oracle_equivalence(trials: int = 1000, seed: int = 0) -> Report:
    rng = np.random.default_rng(seed)
    report = Report("oracle equivalence")
    erasure = ErasureModel("perfect")
    for t in range(trials):
        state, caps = random_instance(rng)
        completions = anticipated_completions(state, caps)
        got = select_ra_idnc(state, caps, erasure, initial_round=False)
        ref = brute_force_best(state, caps, erasure)
        got_obj, got_targets = transmission_objective(state, caps, got.transmission.combo, got.transmission.rate, completions)
        ref_obj, _ = transmission_objective(state, caps, ref.transmission.combo, ref.transmission.rate, completions)
        report.trials += 1
        if abs(got_obj - ref_obj) > TOLERANCE:
            report.violations.append(f"trial {t}: selector objective {got_obj!r} vs exhaustive {ref_obj!r}")
        if got_targets != got.targets:
            report.violations.append(f"trial {t}: reported targets {sorted(got.targets)} vs decoders {sorted(got_targets)}")
        if abs(got.diagnostics["weight"] - got_obj) > TOLERANCE:
            report.violations.append(f"trial {t}: clique weight {got.diagnostics['weight']!r} vs objective {got_obj!r}")
    return report


def _served_pairs(state: NetworkState, combo, users) -> frozenset:
    si = state.side_info
    return frozenset((u, decoded_message(si.wants[u], si.has(u), combo)) for u in users)


def feasible_transmissions(state: NetworkState, caps) -> dict:
    """Every (combination, rate) some user can decode, mapped to its decoders."""
    F = state.num_messages
    out = {}
    for size in range(1, F + 1):
        for combo in itertools.combinations(range(1, F + 1), size):
            combo = frozenset(combo)
            for rate in candidate_rates(caps):
                users = decoders(state, combo, rate, caps)
                if users:
                    out[combo, rate] = users
    return out


def check_bijection(trials: int = 200, seed: int = 1) -> Report:
    rng = np.random.default_rng(seed)
    report = Report("graph/transmission bijection")
    for t in range(trials):
        state, caps = random_instance(rng)
        graph = build_graph(state.side_info, caps)
        g = nx.Graph()
        g.add_nodes_from(graph.vertex_ids())
        g.add_edges_from(graph.edges())
        seen = {}
        for clique in nx.find_cliques(g):
            combo, rate, users = graph.transmission_of(clique)
            if len(users) != len(clique):
                report.violations.append(f"trial {t}: clique {sorted(clique)} has two vertices of one user")
                continue
            alpha = decoders(state, combo, rate, caps)
            if alpha != users:
                report.violations.append(
                    f"trial {t}: clique {sorted(clique)} users {sorted(users)} but decoders {sorted(alpha)}"
                )
            pairs = frozenset((graph.vertices[i].user, graph.vertices[i].message) for i in clique)
            key = (pairs, rate)
            if key in seen:
                report.violations.append(f"trial {t}: transmission {sorted(combo)}@{rate} from two cliques")
            seen[key] = clique

        # graph-free side: feasible transmissions whose served pairs no other
        # feasible transmission at the same rate strictly contains
        served = {}
        for (combo, rate), users in feasible_transmissions(state, caps).items():
            served.setdefault(rate, set()).add(_served_pairs(state, combo, users))
        expected = set()
        for rate, sets in served.items():
            for s in sets:
                if not any(s < other for other in sets):
                    expected.add((s, rate))
        if expected != set(seen):
            missing = len(expected - set(seen))
            extra = len(set(seen) - expected)
            report.violations.append(f"trial {t}: {missing} maximal transmissions without a clique, {extra} cliques unmatched")
        report.trials += 1
    return report


def run_all(trials: int = 1000, bijection_trials: int = 200, seed: int = 0) -> list[Report]:
    return [check_oracle_equivalence(trials, seed), check_bijection(bijection_trials, seed + 1)]
