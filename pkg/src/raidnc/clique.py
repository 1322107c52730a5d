"""Maximum-weight clique search over small weighted graphs.

Vertex sets are Python ints used as bitsets; bit ``i`` is vertex ``i``.
The answer is always a *maximal* clique: among maximal cliques the solver
maximises weight, then prefers more vertices, then the lexicographically
smallest sorted id tuple. Graphs that expose ``rate_groups()`` (the rate-aware
IDNC graph) are split into independent per-rate subproblems; between groups a
weight tie goes to the higher rate.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

DEFAULT_EXACT_THRESHOLD = 64
GREEDY_STARTS = 24


def _bits(mask: int):
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


def weights_tie(a: float, b: float) -> bool:
    return abs(a - b) <= 1e-9 * max(1.0, abs(a), abs(b))


@dataclass
class WeightedGraph:
    """Undirected vertex-weighted graph on bit positions ``0..len(weights)-1``.

    ``universe`` restricts the live vertices (default: all). ``labels``
    maps positions to caller-side ids and must be increasing in position.
    ``partition`` optionally lists disjoint independent sets covering the
    universe (e.g. one per user); it tightens the pruning bound.
    """

    weights: list[float]
    adj: list[int]
    universe: int | None = None
    labels: Sequence[int] | None = None
    partition: Sequence[int] | None = None

    def __post_init__(self):
        if len(self.weights) != len(self.adj):
            raise ValueError("weights and adjacency differ in length")
        if self.universe is None:
            self.universe = (1 << len(self.weights)) - 1

    @classmethod
    def from_edges(cls, weights: Sequence[float], edges: Iterable[tuple[int, int]], **kw) -> "WeightedGraph":
        adj = [0] * len(weights)
        for i, j in edges:
            if i == j:
                raise ValueError("self-loops are not allowed")
            adj[i] |= 1 << j
            adj[j] |= 1 << i
        return cls(list(map(float, weights)), adj, **kw)

    @property
    def n(self) -> int:
        return self.universe.bit_count()

    def vertex_ids(self) -> list[int]:
        return list(_bits(self.universe))

    def adjacent(self, i: int, j: int) -> bool:
        return bool(self.adj[i] >> j & 1)

    def label(self, i: int) -> int:
        return i if self.labels is None else self.labels[i]


@dataclass(frozen=True)
class Clique:
    vertices: tuple[int, ...] = ()
    weight: float = 0.0
    exact: bool = True
    rate: float | None = None

    def __len__(self) -> int:
        return len(self.vertices)


def is_clique(graph, vertices: Iterable[int]) -> bool:
    vs = list(vertices)
    return all(graph.adjacent(a, b) for i, a in enumerate(vs) for b in vs[i + 1 :])


def is_maximal_clique(graph, vertices: Iterable[int]) -> bool:
    vs = set(vertices)
    if not is_clique(graph, vs):
        return False
    others = (v for v in graph.vertex_ids() if v not in vs)
    return not any(all(graph.adjacent(v, m) for m in vs) for v in others)


# ---------------------------------------------------------------------------
# single-graph solvers


class _Best:
    __slots__ = ("weight", "size", "verts")

    def __init__(self, floor: float | None):
        # a floor means "only report cliques strictly heavier than this"
        self.weight = floor
        self.size = -1
        self.verts: tuple[int, ...] | None = None

    def beats(self, weight: float, size: int) -> bool:
        """Could a clique with (weight, size) upper bounds still win?"""
        if self.weight is None:
            return True
        if weights_tie(weight, self.weight):
            return self.verts is not None and size > self.size
        return weight > self.weight

    def offer(self, weight: float, verts: tuple[int, ...]) -> None:
        tie = (
            self.verts is not None
            and weights_tie(weight, self.weight)
            and len(verts) == self.size
            and verts < self.verts
        )
        if tie or self.beats(weight, len(verts)):
            self.weight, self.size, self.verts = weight, len(verts), verts


def _color_bound(P: int, adj: Sequence[int], pos_w: Sequence[float]) -> tuple[float, int]:
    """Greedy colouring of P: (sum over classes of the heaviest positive weight, class count)."""
    wsum, ncls = 0.0, 0
    while P:
        avail, heaviest = P, 0.0
        while avail:
            low = avail & -avail
            v = low.bit_length() - 1
            if pos_w[v] > heaviest:
                heaviest = pos_w[v]
            P ^= low
            avail &= ~adj[v] & ~low
        wsum += heaviest
        ncls += 1
    return wsum, ncls


def _partition_bound(P: int, partition: Sequence[int], pos_w: Sequence[float]) -> tuple[float, int]:
    wsum, ncls = 0.0, 0
    for part in partition:
        live = P & part
        if live:
            ncls += 1
            wsum += max(pos_w[v] for v in _bits(live))
    return wsum, ncls


def _solve_exact(g: WeightedGraph, floor: float | None) -> _Best:
    """Bron-Kerbosch enumeration of maximal cliques in ascending-id order with
    branch-and-bound pruning. Enumeration order equals the lexicographic
    order of the sorted vertex tuples, so ties can be pruned on sight."""
    adj, w = g.adj, g.weights
    pos_w = [x if x > 0 else 0.0 for x in w]
    partition = g.partition
    best = _Best(floor)

    def expand(R: list[int], wR: float, P: int, X: int) -> None:
        if not P:
            if not X:
                best.offer(wR, tuple(R))
            return
        for x in _bits(X):
            if P & ~adj[x] == 0:
                return  # every extension is dominated by x, none is maximal
        cw, cn = _color_bound(P, adj, pos_w)
        if partition is not None:
            pw, pn = _partition_bound(P, partition, pos_w)
            cw, cn = min(cw, pw), min(cn, pn)
        if not best.beats(wR + cw, len(R) + cn):
            return
        rest_w = sum(pos_w[v] for v in _bits(P))
        rest_n = P.bit_count()
        while P:
            low = P & -P
            v = low.bit_length() - 1
            if not best.beats(wR + min(cw, rest_w), len(R) + min(cn, rest_n)):
                return
            R.append(v)
            expand(R, wR + w[v], P & adj[v], X & adj[v])
            R.pop()
            P ^= low
            X |= low
            rest_w -= pos_w[v]
            rest_n -= 1

    expand([], 0.0, g.universe, 0)
    return best


def _solve_exact_ties(g: WeightedGraph, floor: float | None, limit: int) -> tuple[float | None, list, bool]:
    """Every maximal clique of maximum weight (at least ``floor``), up to ``limit``.

    Returns (weight, cliques in lexicographic order, complete flag).
    """
    adj, w = g.adj, g.weights
    pos_w = [x if x > 0 else 0.0 for x in w]
    best_w = floor
    ties: list[tuple[int, ...]] = []
    complete = True

    def hopeless(ub: float) -> bool:
        return best_w is not None and ub < best_w and not weights_tie(ub, best_w)

    def expand(R: list[int], wR: float, P: int, X: int) -> None:
        nonlocal best_w, ties, complete
        if not P:
            if X:
                return
            if best_w is None or (wR > best_w and not weights_tie(wR, best_w)):
                best_w, ties = wR, [tuple(R)]
            elif weights_tie(wR, best_w):
                if len(ties) < limit:
                    ties.append(tuple(R))
                else:
                    complete = False
            return
        for x in _bits(X):
            if P & ~adj[x] == 0:
                return
        cw, _ = _color_bound(P, adj, pos_w)
        if g.partition is not None:
            cw = min(cw, _partition_bound(P, g.partition, pos_w)[0])
        if hopeless(wR + cw):
            return
        while P:
            low = P & -P
            v = low.bit_length() - 1
            R.append(v)
            expand(R, wR + w[v], P & adj[v], X & adj[v])
            R.pop()
            P ^= low
            X |= low

    expand([], 0.0, g.universe, 0)
    return best_w, ties, complete


def _solve_greedy(g: WeightedGraph, floor: float | None, starts: int = GREEDY_STARTS) -> _Best:
    best = _Best(floor)
    for wR, verts in _solve_greedy_all(g, starts):
        best.offer(wR, verts)
    return best


def _solve(g: WeightedGraph, exact_threshold: int, floor: float | None = None) -> tuple[_Best, bool]:
    if g.n <= exact_threshold:
        return _solve_exact(g, floor), True
    return _solve_greedy(g, floor), False


def _to_clique(g: WeightedGraph, best: _Best, exact: bool, rate=None) -> Clique:
    if best.verts is None:
        return Clique((), 0.0, exact, rate)
    return Clique(tuple(g.label(v) for v in best.verts), best.weight, exact, rate)


# ---------------------------------------------------------------------------
# public entry points


def max_weight_clique(graph, exact_threshold: int = DEFAULT_EXACT_THRESHOLD) -> Clique:
    """Heaviest maximal clique of ``graph``.

    Subproblems up to ``exact_threshold`` vertices are solved exactly;
    larger ones fall back to the greedy heuristic and the result is
    flagged ``exact=False``. An empty graph yields the empty clique.
    """
    if not hasattr(graph, "rate_groups"):
        if graph.n == 0:
            return Clique()
        best, exact = _solve(graph, exact_threshold)
        return _to_clique(graph, best, exact)

    groups = graph.rate_groups()
    if not groups:
        return Clique()
    # a lower-rate group must be strictly heavier to win, so visit high rates
    # first and skip groups whose bound cannot exceed the incumbent
    result: Clique | None = None
    all_exact = True
    for rate, sub in sorted(groups, key=lambda rg: -rg[0]):
        if result is not None:
            pos_w = [x if x > 0 else 0.0 for x in sub.weights]
            if sub.partition is not None:
                ub, _ = _partition_bound(sub.universe, sub.partition, pos_w)
            else:
                ub = sum(pos_w[v] for v in _bits(sub.universe))
            if ub < result.weight or weights_tie(ub, result.weight):
                continue
        floor = None if result is None else result.weight
        best, exact = _solve(sub, exact_threshold, floor)
        all_exact &= exact
        if best.verts is not None:
            result = _to_clique(sub, best, exact, rate)
    return Clique(result.vertices, result.weight, all_exact, result.rate)


def optimal_cliques(graph, exact_threshold: int = DEFAULT_EXACT_THRESHOLD, limit: int = 64) -> list[Clique]:
    """All maximal cliques tied at the maximum weight, best tie-break first.

    At most ``limit`` cliques are returned. Subproblems above
    ``exact_threshold`` contribute their greedy candidates only, and the
    results are flagged ``exact=False``.
    """
    groups = graph.rate_groups() if hasattr(graph, "rate_groups") else [(None, graph)]
    best_w: float | None = None
    found: list[Clique] = []
    for rate, sub in sorted(groups, key=lambda rg: -(rg[0] or 0.0)):
        if sub.n == 0:
            continue
        if sub.n <= exact_threshold:
            w, ties, complete = _solve_exact_ties(sub, best_w, limit)
            exact = complete
            cands = [(w, t) for t in ties]
        else:
            greedy = _solve_greedy_all(sub)
            exact = False
            cands = greedy
        for w, verts in cands:
            if best_w is None or (w > best_w and not weights_tie(w, best_w)):
                best_w, found = w, []
            if weights_tie(w, best_w):
                found.append(Clique(tuple(sub.label(v) for v in verts), w, exact, rate))
    # weight ties: higher rate, more vertices, smaller ids
    found.sort(key=lambda c: (-(c.rate or 0.0), -len(c.vertices), c.vertices))
    return found[:limit]


def _solve_greedy_all(g: WeightedGraph, starts: int = GREEDY_STARTS) -> list[tuple[float, tuple[int, ...]]]:
    """Multi-start greedy construction: seed with each of the most promising
    vertices, then repeatedly add the common neighbour with the largest
    (weight, remaining degree). Each run ends on a maximal clique."""
    adj, w = g.adj, g.weights
    U = g.universe
    ranked = sorted(_bits(U), key=lambda v: (-w[v], -(adj[v] & U).bit_count(), v))
    out = {}
    for s in ranked[:starts]:
        R, wR, P = [s], w[s], adj[s] & U
        while P:
            v = max(_bits(P), key=lambda x: (w[x], (adj[x] & P).bit_count(), -x))
            R.append(v)
            wR += w[v]
            P &= adj[v]
        out[tuple(sorted(R))] = wR
    return [(wR, verts) for verts, wR in out.items()]


def max_clique_equal_weights(graph, exact_threshold: int = DEFAULT_EXACT_THRESHOLD) -> Clique:
    """Maximum-cardinality clique (same tie-breaking as the weighted solver).

    Meant for graphs whose vertices all carry one common weight; the
    returned weight is reported in that common unit.
    """
    if graph.n == 0:
        return Clique()
    unit = WeightedGraph([1.0] * len(graph.weights), graph.adj, graph.universe, graph.labels, graph.partition)
    best, exact = _solve(unit, exact_threshold)
    c = _to_clique(unit, best, exact)
    common = graph.weights[next(_bits(graph.universe))]
    return Clique(c.vertices, common * len(c.vertices), exact)
