"""The rate-aware IDNC graph.

One vertex per (user, wanted message, achievable rate). Two vertices are
adjacent when they share the rate and either carry the same message or each
user already holds the other's message. Every maximal clique is then one
transmission (XOR of its messages at its rate) that exactly its users can
instantly decode.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

import numpy as np

from raidnc.channel import ErasureModel, erasure_probability
from raidnc.clique import Clique, WeightedGraph, is_clique
from raidnc.model import SideInfo

WeightFn = Callable[[int, int, float], float]


@dataclass(frozen=True, order=True)
class Vertex:
    user: int
    message: int
    rate: float


def candidate_rates(capacities: Sequence[float]) -> list[float]:
    """Distinct user capacities, highest first."""
    if len(capacities) == 0:
        raise ValueError("empty capacity snapshot")
    return sorted({float(c) for c in capacities}, reverse=True)


def achievable_rates(capacities: Sequence[float], user: int) -> list[float]:
    return [r for r in candidate_rates(capacities) if r <= capacities[user]]


def _bitset_rows(mat: np.ndarray) -> list[int]:
    if mat.shape[0] == 0:
        return []
    packed = np.packbits(mat, axis=1, bitorder="little")
    return [int.from_bytes(row.tobytes(), "little") for row in packed]


def idnc_adjacency(side_info: SideInfo, pairs: Sequence[tuple[int, int]]) -> list[int]:
    """Rate-free adjacency between (user, message) pairs as bitsets over pair positions."""
    if not pairs:
        return []
    U, F = side_info.num_users, side_info.num_messages
    has = np.ones((U, F + 1), dtype=bool)
    for u, w in enumerate(side_info.wants):
        for f in w:
            has[u, f] = False
    pu = np.fromiter((p[0] for p in pairs), dtype=np.intp, count=len(pairs))
    pf = np.fromiter((p[1] for p in pairs), dtype=np.intp, count=len(pairs))
    same_msg = pf[:, None] == pf[None, :]
    # (i, j) adjacent if f_i in Has(u_j) and f_j in Has(u_i)
    cross = has[pu[None, :], pf[:, None]] & has[pu[:, None], pf[None, :]]
    adj = (same_msg | cross) & (pu[:, None] != pu[None, :])
    return _bitset_rows(adj)


class RaIdncGraph:
    """Vertices are numbered by (user, message, rate descending).

    Internally the graph is stored as the rate-free pair graph plus, for
    each candidate rate, the mask of pairs whose user can sustain it; the
    vertex set of one rate is exactly such a masked copy of the pair graph.
    """

    def __init__(
        self,
        side_info: SideInfo,
        capacities: Sequence[float],
        weight_fn: WeightFn | None = None,
        users: Iterable[int] | None = None,
    ):
        self.side_info = side_info
        self.capacities = [float(c) for c in capacities]
        if len(self.capacities) != side_info.num_users:
            raise ValueError("one capacity per user required")
        self.rates = candidate_rates(self.capacities)
        keep = range(side_info.num_users) if users is None else sorted(set(users))
        self.pairs = [(u, f) for u in keep for f in sorted(side_info.wants[u])]
        self._pair_adj = idnc_adjacency(side_info, self.pairs)

        self.vertices: list[Vertex] = []
        self._vid: dict[tuple[int, int], int] = {}  # (pair index, rate index) -> vertex id
        self._pair_of: list[int] = []
        self._rate_of: list[int] = []
        self._group_mask = [0] * len(self.rates)
        for p, (u, f) in enumerate(self.pairs):
            cap = self.capacities[u]
            for k, r in enumerate(self.rates):
                if r <= cap:
                    self._vid[p, k] = len(self.vertices)
                    self.vertices.append(Vertex(u, f, r))
                    self._pair_of.append(p)
                    self._rate_of.append(k)
                    self._group_mask[k] |= 1 << p
        fn = weight_fn or (lambda u, f, r: 0.0)
        self.weights = [float(fn(v.user, v.message, v.rate)) for v in self.vertices]

    @property
    def n(self) -> int:
        return len(self.vertices)

    def vertex_ids(self) -> list[int]:
        return list(range(self.n))

    def adjacent(self, i: int, j: int) -> bool:
        if self._rate_of[i] != self._rate_of[j]:
            return False
        return bool(self._pair_adj[self._pair_of[i]] >> self._pair_of[j] & 1)

    def neighbors(self, i: int) -> list[int]:
        k = self._rate_of[i]
        row = self._pair_adj[self._pair_of[i]] & self._group_mask[k]
        out = []
        while row:
            low = row & -row
            out.append(self._vid[low.bit_length() - 1, k])
            row ^= low
        return out

    def edges(self) -> list[tuple[int, int]]:
        return [(i, j) for i in range(self.n) for j in self.neighbors(i) if i < j]

    def rate_groups(self) -> list[tuple[float, WeightedGraph]]:
        """One weighted subgraph per candidate rate that has vertices.

        Subgraph positions are pair indices, labels are global vertex ids
        (increasing in position, which keeps lexicographic tie-breaks intact).
        """
        groups = []
        npairs = len(self.pairs)
        for k, r in enumerate(self.rates):
            mask = self._group_mask[k]
            if not mask:
                continue
            weights = [0.0] * npairs
            labels = [-1] * npairs
            adj = [0] * npairs
            per_user: dict[int, int] = {}
            for p in range(npairs):
                if mask >> p & 1:
                    vid = self._vid[p, k]
                    weights[p] = self.weights[vid]
                    labels[p] = vid
                    adj[p] = self._pair_adj[p] & mask
                    per_user[self.pairs[p][0]] = per_user.get(self.pairs[p][0], 0) | 1 << p
            groups.append((r, WeightedGraph(weights, adj, mask, labels, list(per_user.values()))))
        return groups

    def transmission_of(self, clique: Iterable[int]):
        """(messages, rate, users) induced by a clique of vertex ids."""
        vs = [self.vertices[i] for i in clique]
        if not vs:
            return frozenset(), None, frozenset()
        rates = {v.rate for v in vs}
        if len(rates) != 1:
            raise ValueError("clique mixes rates")
        return frozenset(v.message for v in vs), rates.pop(), frozenset(v.user for v in vs)

    def to_text(self) -> str:
        lines = ["# raidnc graph v1", f"vertices {self.n}"]
        lines += [f"v {i} {v.user} {v.message} {v.rate!r} {self.weights[i]!r}" for i, v in enumerate(self.vertices)]
        es = self.edges()
        lines.append(f"edges {len(es)}")
        lines += [f"e {i} {j}" for i, j in es]
        return "\n".join(lines) + "\n"


def build_graph(
    side_info: SideInfo,
    capacities: Sequence[float],
    weight_fn: WeightFn | None = None,
    users: Iterable[int] | None = None,
) -> RaIdncGraph:
    """Rate-aware IDNC graph; ``users`` optionally restricts which users get vertices."""
    return RaIdncGraph(side_info, capacities, weight_fn, users)


def read_graph_text(text: str) -> tuple[list[Vertex], list[float], list[tuple[int, int]]]:
    """Parse the debug export back into (vertices, weights, edges)."""
    vertices, weights, edges = [], [], []
    for line in text.splitlines():
        parts = line.split()
        if not parts or parts[0].startswith("#"):
            continue
        if parts[0] == "v":
            vertices.append(Vertex(int(parts[2]), int(parts[3]), float(parts[4])))
            weights.append(float(parts[5]))
        elif parts[0] == "e":
            edges.append((int(parts[1]), int(parts[2])))
    return vertices, weights, edges


def vertex_weight(
    vertex: Vertex,
    decisive_by_rate: dict[float, frozenset[int]],
    erasure: ErasureModel,
    msg_size: float,
    capacity: float | None = None,
) -> float:
    """``ln(r / (eps N))`` for a decisive user at rate r, else 0.

    Under perfect estimation the erasure factor is dropped: ``ln(r / N)``.
    """
    if not msg_size > 0:
        raise ValueError("msg_size must be positive")
    if vertex.user not in decisive_by_rate.get(vertex.rate, ()):
        return 0.0
    if erasure.is_perfect:
        return math.log(vertex.rate / msg_size)
    eps = erasure_probability(erasure, vertex.rate, vertex.rate if capacity is None else capacity)
    if eps <= 0.0:
        raise ValueError("erasure probability 0 with the imperfect-estimation weight")
    return math.log(vertex.rate / (eps * msg_size))


def build_layer_graph(
    graph: RaIdncGraph,
    chosen: Sequence[int],
    layer_users: Iterable[int],
    weight: float = 1.0,
) -> WeightedGraph:
    """Vertices of ``layer_users`` at the chosen clique's rate that are adjacent
    to every chosen vertex; all carry the same ``weight``. Labels are global ids."""
    chosen = list(chosen)
    if not chosen or not is_clique(graph, chosen):
        raise ValueError("chosen vertices do not form a non-empty clique")
    k = graph._rate_of[chosen[0]]
    if any(graph._rate_of[i] != k for i in chosen):
        raise ValueError("chosen clique mixes rates")
    layer_users = set(layer_users)
    common = graph._group_mask[k]
    for i in chosen:
        common &= graph._pair_adj[graph._pair_of[i]]
    for p in range(len(graph.pairs)):
        if common >> p & 1 and graph.pairs[p][0] not in layer_users:
            common &= ~(1 << p)
    npairs = len(graph.pairs)
    weights = [weight] * npairs
    labels = [graph._vid.get((p, k), -1) for p in range(npairs)]
    adj = [graph._pair_adj[p] & common if common >> p & 1 else 0 for p in range(npairs)]
    per_user: dict[int, int] = {}
    for p in range(npairs):
        if common >> p & 1:
            u = graph.pairs[p][0]
            per_user[u] = per_user.get(u, 0) | 1 << p
    return WeightedGraph(weights, adj, common, labels, list(per_user.values()))


def common_neighbors(graph: RaIdncGraph, chosen: Sequence[int]) -> list[int]:
    """Vertices outside ``chosen`` adjacent to all of it."""
    chosen = list(chosen)
    if not chosen:
        return graph.vertex_ids()
    k = graph._rate_of[chosen[0]]
    common = graph._group_mask[k]
    for i in chosen:
        common &= graph._pair_adj[graph._pair_of[i]]
    out = []
    while common:
        low = common & -common
        out.append(graph._vid[low.bit_length() - 1, k])
        common ^= low
    return out
