"""Combinatorial ground sets, feasible sets and nominal minimization oracles.

Two instance kinds are supported: s-t path systems on a directed graph
(items are arcs, feasible solutions are simple source-target paths) and
cardinality selection (choose exactly p of n items).  Both expose the
same nominal oracle `nominal_solve`, which every reduction in the solver
module is built on.

All ties are broken towards the lexicographically smallest chosen
item-index set, which makes every downstream method deterministic.
"""

from __future__ import annotations

import heapq
import itertools
from collections import deque
from dataclasses import dataclass, field

import numpy as np

from .errors import InfeasibleError, ParseError
from .uncertainty import ScenarioMatrix


@dataclass(frozen=True)
class Graph:
    """Directed graph whose arc list order defines the item universe.

    Arc index i is the item index of cost component i; the arc list
    order is canonical and must match the column order of any scenario
    data used with the graph.
    """

    num_nodes: int
    arcs: tuple[tuple[int, int], ...]

    def __post_init__(self):
        for i, (tail, head) in enumerate(self.arcs):
            if not (0 <= tail < self.num_nodes and 0 <= head < self.num_nodes):
                raise ValueError(f"arc {i} endpoint out of range")

    @property
    def n(self) -> int:
        return len(self.arcs)

    def out_arcs(self) -> list[list[tuple[int, int]]]:
        """Adjacency as (arc index, head) lists per tail node."""
        out: list[list[tuple[int, int]]] = [[] for _ in range(self.num_nodes)]
        for i, (tail, head) in enumerate(self.arcs):
            out[tail].append((i, head))
        return out

    def hop_distances(self, source: int) -> list[float]:
        """Unweighted BFS distance from `source` to every node."""
        dist = [float("inf")] * self.num_nodes
        dist[source] = 0
        queue = deque([source])
        out = self.out_arcs()
        while queue:
            v = queue.popleft()
            for _, head in out[v]:
                if dist[head] == float("inf"):
                    dist[head] = dist[v] + 1
                    queue.append(head)
        return dist


def parse_graph(text: str) -> Graph:
    """Parse the graph file format.

    Line 1 is `nodes <N>`, line 2 `arcs <M>`, followed by M lines
    `arc <index> <tail> <head>` with indices 0..M-1 in order.
    """
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if len(lines) < 2:
        raise ParseError("graph file needs at least a nodes and an arcs line")

    def _header(lineno: int, keyword: str) -> int:
        parts = lines[lineno].split()
        if len(parts) != 2 or parts[0] != keyword or not parts[1].isdigit():
            raise ParseError(f"line {lineno + 1}: expected '{keyword} <count>'")
        return int(parts[1])

    num_nodes = _header(0, "nodes")
    num_arcs = _header(1, "arcs")
    if len(lines) != 2 + num_arcs:
        raise ParseError(f"expected {num_arcs} arc lines, found {len(lines) - 2}")

    arcs = []
    for i, line in enumerate(lines[2:]):
        lineno = i + 3
        parts = line.split()
        if len(parts) != 4 or parts[0] != "arc":
            raise ParseError(f"line {lineno}: expected 'arc <index> <tail> <head>'")
        try:
            idx, tail, head = int(parts[1]), int(parts[2]), int(parts[3])
        except ValueError:
            raise ParseError(f"line {lineno}: non-integer field") from None
        if idx != i:
            raise ParseError(f"line {lineno}: arc index {idx}, expected {i}")
        for endpoint in (tail, head):
            if not (0 <= endpoint < num_nodes):
                raise ParseError(f"line {lineno}: endpoint {endpoint} out of range")
        arcs.append((tail, head))
    return Graph(num_nodes, tuple(arcs))


def graph_to_text(g: Graph) -> str:
    """Serialize a graph in the file format `parse_graph` reads."""
    lines = [f"nodes {g.num_nodes}", f"arcs {g.n}"]
    for i, (tail, head) in enumerate(g.arcs):
        lines.append(f"arc {i} {tail} {head}")
    return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class Instance:
    """A feasible set over binary item vectors of length n."""

    kind: str  # "spath" | "selection"
    n: int
    graph: Graph | None = None
    source: int = -1
    target: int = -1
    p: int = 0

    @staticmethod
    def spath(graph: Graph, source: int, target: int) -> "Instance":
        if source == target:
            raise ValueError("source and target must differ")
        for node in (source, target):
            if not (0 <= node < graph.num_nodes):
                raise ValueError(f"node {node} out of range")
        return Instance("spath", graph.n, graph=graph, source=source, target=target)

    @staticmethod
    def selection(n: int, p: int) -> "Instance":
        if not (0 < p <= n):
            raise ValueError("selection requires 0 < p <= n")
        return Instance("selection", n, p=p)


@dataclass(frozen=True)
class Solution:
    """A member of the feasible set with its objective value."""

    x: tuple[int, ...]
    value: float

    @property
    def items(self) -> tuple[int, ...]:
        return tuple(i for i, xi in enumerate(self.x) if xi)

    def as_array(self) -> np.ndarray:
        return np.asarray(self.x, dtype=float)


def _lexkey(arcs) -> tuple[int, ...]:
    return tuple(sorted(arcs))


def _dijkstra(graph: Graph, costs, source: int, target: int, banned: frozenset):
    """Label-setting shortest path; ties towards the lexicographically
    smallest arc-index set.  Returns (cost, arcs) or None."""
    out = graph.out_arcs()
    done = set()
    heap = [(0.0, (), source, ())]
    while heap:
        dist, key, v, arcs = heapq.heappop(heap)
        if v in done:
            continue
        done.add(v)
        if v == target:
            return dist, arcs
        for arc_idx, head in out[v]:
            if arc_idx in banned or head in done:
                continue
            new_arcs = arcs + (arc_idx,)
            heapq.heappush(
                heap, (dist + costs[arc_idx], _lexkey(new_arcs), head, new_arcs)
            )
    return None


def _spath_branching(graph, costs, source, target, forced_in, forced_out):
    """Exhaustive simple-path search honoring forced arcs.

    Only used when forced_in is nonempty; prunes on cost, keeps equal
    cost paths alive so lexicographic tie-breaking stays exact.
    """
    out = graph.out_arcs()
    best: list = [None]  # (cost, lexkey, arcs)

    def dfs(v, used_nodes, arcs, cost, fin_left):
        if best[0] is not None and cost > best[0][0]:
            return
        if v == target:
            if not fin_left:
                cand = (cost, _lexkey(arcs), arcs)
                if best[0] is None or cand[:2] < best[0][:2]:
                    best[0] = cand
            return
        for arc_idx, head in out[v]:
            if arc_idx in forced_out or head in used_nodes:
                continue
            dfs(
                head,
                used_nodes | {head},
                arcs + (arc_idx,),
                cost + costs[arc_idx],
                fin_left - {arc_idx},
            )

    dfs(source, {source}, (), 0.0, set(forced_in))
    if best[0] is None:
        return None
    return best[0][0], best[0][2]


def nominal_solve(
    inst: Instance,
    costs,
    forced_in=(),
    forced_out=(),
) -> Solution:
    """Minimize costs . x over the feasible set with forcing constraints.

    forced_in items must appear in the solution, forced_out must not.
    Raises InfeasibleError when no feasible solution remains.
    """
    costs = np.asarray(costs, dtype=float)
    if costs.shape != (inst.n,):
        raise ValueError(f"costs length {costs.shape} does not match n={inst.n}")
    if not np.all(np.isfinite(costs)):
        raise ValueError("costs must be finite")
    fin = frozenset(forced_in)
    fout = frozenset(forced_out)
    if fin & fout:
        raise ValueError("forced_in and forced_out overlap")

    if inst.kind == "selection":
        if len(fin) > inst.p:
            raise InfeasibleError("forced_in exceeds cardinality p")
        allowed = [i for i in range(inst.n) if i not in fin and i not in fout]
        need = inst.p - len(fin)
        if need > len(allowed):
            raise InfeasibleError("not enough allowed items")
        order = sorted(allowed, key=lambda i: (costs[i], i))
        chosen = sorted(fin | set(order[:need]))
        x = tuple(1 if i in set(chosen) else 0 for i in range(inst.n))
        return Solution(x, float(sum(costs[i] for i in chosen)))

    if np.any(costs < 0):
        raise ValueError("spath oracle requires nonnegative costs")
    if fin:
        res = _spath_branching(
            inst.graph, costs, inst.source, inst.target, fin, fout
        )
    else:
        res = _dijkstra(inst.graph, costs, inst.source, inst.target, fout)
    if res is None:
        raise InfeasibleError(
            f"no path from {inst.source} to {inst.target} under restrictions"
        )
    _, arcs = res
    x = [0] * inst.n
    for a in arcs:
        x[a] = 1
    value = float(sum(costs[a] for a in arcs))
    return Solution(tuple(x), value)


def enumerate_feasible(inst: Instance, cap: int | None = None):
    """Yield every feasible incidence vector (tuples of 0/1).

    SPath enumerates simple source-target paths by DFS; Selection yields
    all p-subsets.  Order is deterministic.
    """
    count = 0
    if inst.kind == "selection":
        for combo in itertools.combinations(range(inst.n), inst.p):
            x = [0] * inst.n
            for i in combo:
                x[i] = 1
            count += 1
            if cap is not None and count > cap:
                raise InfeasibleError(f"enumeration exceeds cap {cap}")
            yield tuple(x)
        return

    out = inst.graph.out_arcs()
    stack = [(inst.source, {inst.source}, ())]
    while stack:
        v, used, arcs = stack.pop()
        if v == inst.target:
            x = [0] * inst.n
            for a in arcs:
                x[a] = 1
            count += 1
            if cap is not None and count > cap:
                raise InfeasibleError(f"enumeration exceeds cap {cap}")
            yield tuple(x)
            continue
        for arc_idx, head in reversed(out[v]):
            if head not in used:
                stack.append((head, used | {head}, arcs + (arc_idx,)))


def sample_st_pairs(
    g: Graph, count: int, min_hops: int = 0, seed: int = 0
) -> list[tuple[int, int]]:
    """Sample distinct (source, target) pairs with BFS hop distance >= min_hops."""
    if count < 0:
        raise ValueError("count must be nonnegative")
    if count == 0:
        return []
    qualifying = []
    for u in range(g.num_nodes):
        dist = g.hop_distances(u)
        for v in range(g.num_nodes):
            if u != v and dist[v] != float("inf") and dist[v] >= min_hops:
                qualifying.append((u, v))
    if len(qualifying) < count:
        raise ValueError(
            f"only {len(qualifying)} pairs satisfy min_hops={min_hops}"
        )
    rng = np.random.default_rng(seed)
    idx = rng.choice(len(qualifying), size=count, replace=False)
    return [qualifying[i] for i in idx]


def gen_synthetic(
    width: int,
    height: int,
    num_scenarios: int,
    noise: str = "mult",
    seed: int = 0,
) -> tuple[Graph, ScenarioMatrix]:
    """Generate a grid digraph with right/down arcs and scenario costs.

    Noise models: "mult" draws a per-scenario global factor times
    per-entry jitter; "two_block" splits arcs into a left and a right
    block by tail column and inflates one block in the first half of the
    scenarios and the other block in the second half.  All costs are
    strictly positive and deterministic per seed.
    """
    if width < 2 or height < 2:
        raise ValueError("width and height must be >= 2")
    if num_scenarios < 2:
        raise ValueError("need at least 2 scenarios")
    if noise not in ("mult", "two_block"):
        raise ValueError(f"unknown noise model {noise!r}")

    arcs = []
    for r in range(height):
        for c in range(width):
            v = r * width + c
            if c + 1 < width:
                arcs.append((v, v + 1))
            if r + 1 < height:
                arcs.append((v, v + width))
    graph = Graph(width * height, tuple(arcs))
    n = graph.n

    rng = np.random.default_rng(seed)
    base = rng.uniform(1.0, 10.0, size=n)
    K = num_scenarios
    if noise == "mult":
        factors = rng.uniform(0.8, 1.2, size=K)
        jitter = rng.uniform(0.9, 1.1, size=(K, n))
        costs = base[None, :] * factors[:, None] * jitter
    else:
        in_left = np.array(
            [1.0 if (tail % width) < width / 2 else 0.0 for tail, _ in arcs]
        )
        # Per-arc inflation magnitudes are fixed across scenarios; only a
        # scenario-level scalar and a small per-entry jitter vary, so the
        # two cost regimes are stable between scenario subsets.
        hot_a = 1.0 + rng.uniform(1.0, 2.0, size=n) * in_left
        hot_b = 1.0 + rng.uniform(1.0, 2.0, size=n) * (1.0 - in_left)
        costs = np.empty((K, n))
        for k in range(K):
            hot = hot_a if k < K // 2 else hot_b
            scale = rng.uniform(0.95, 1.05)
            jitter = rng.uniform(0.99, 1.01, size=n)
            costs[k] = base * hot * scale * jitter
    return graph, ScenarioMatrix(costs)
