"""Embedding of induced interaction graphs into hardware layouts.

The induced graph collects every qubit pair that must interact: supports of
the weight-2 dressed logicals, of all their pairwise products, and of the
nearest-neighbor gauge generators.  A placement maps induced vertices
injectively onto hardware vertices; its quality is the total Manhattan
(shortest-path) distance summed over induced edges.  Optimal placements
come from branch-and-bound; simulated annealing covers larger instances,
and the equivalent mixed-integer program can be exported in LP format.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from importlib import resources

import numpy as np

from .codes import SubsystemCode
from .logicals import DressedLogicalSet, dressed_logical_set, dressed_pair

__all__ = [
    "InducedGraph",
    "build_induced_graph",
    "HardwareGraph",
    "hardware_graph",
    "HARDWARE_NAMES",
    "manhattan",
    "MappingScore",
    "score",
    "brute_force_map",
    "anneal_map",
    "export_mip_lp",
    "SearchCapError",
]

HARDWARE_NAMES = (
    "union_jack",
    "square",
    "triangular",
    "heavy_hex",
    "hexagonal",
    "kagome",
    "rigetti_aspen",
)


class SearchCapError(ValueError):
    """Raised when an exact search would exceed the configured size cap."""


def _norm_edge(u: int, v: int) -> tuple[int, int]:
    if u == v:
        raise ValueError("self-loops are not allowed")
    return (u, v) if u < v else (v, u)


@dataclass
class InducedGraph:
    """Interaction graph on physical qubits 1..n with labeled edges."""

    n: int
    edges: list[tuple[int, int]] = field(default_factory=list)
    labels: dict[tuple[int, int], set[str]] = field(default_factory=dict)

    def add(self, u: int, v: int, label: str) -> None:
        e = _norm_edge(u, v)
        if e not in self.labels:
            self.edges.append(e)
            self.labels[e] = set()
        self.labels[e].add(label)

    @property
    def vertices(self) -> range:
        return range(1, self.n + 1)

    def degree(self, v: int) -> int:
        return sum(1 for e in self.edges if v in e)

    def to_json(self) -> dict:
        return {
            "vertices": list(self.vertices),
            "edges": [list(e) for e in sorted(self.edges)],
            "labels": {f"{u}-{v}": sorted(self.labels[(u, v)]) for u, v in sorted(self.edges)},
        }

    def to_dot(self) -> str:
        lines = ["graph induced {"]
        for v in self.vertices:
            lines.append(f"  {v};")
        for u, v in sorted(self.edges):
            tag = ",".join(sorted(self.labels[(u, v)]))
            lines.append(f'  {u} -- {v} [label="{tag}"];')
        lines.append("}")
        return "\n".join(lines)

    @classmethod
    def from_json(cls, doc: dict) -> "InducedGraph":
        g = cls(max(doc["vertices"]))
        labels = doc.get("labels", {})
        for u, v in doc["edges"]:
            for tag in labels.get(f"{min(u, v)}-{max(u, v)}", ["edge"]):
                g.add(u, v, tag)
        return g


def build_induced_graph(
    code: SubsystemCode,
    logicals: DressedLogicalSet | None = None,
    close_gauge_cycles: bool = False,
) -> InducedGraph:
    """Union of the support pairs of all dressed singles, all pairwise
    products, and the nearest-neighbor gauge generators.

    With ``close_gauge_cycles`` the open chains along the long first column
    and last row are closed into cycles (the presentation used when the
    gauge connectivity is drawn as two cyclic components); the placement
    tables are reproduced by the open-chain default.
    """
    logicals = logicals or dressed_logical_set(code)
    g = InducedGraph(code.n)
    for p in logicals.xhat:
        g.add(*p.support(), label="X")
    for p in logicals.zhat:
        g.add(*p.support(), label="Z")
    k = logicals.k
    for i in range(1, k + 1):
        for j in range(i + 1, k + 1):
            g.add(*dressed_pair(code, i, j, "X").support(), label="XX")
            g.add(*dressed_pair(code, i, j, "Z").support(), label="ZZ")
    for p in code.xgauges + code.zgauges:
        g.add(*p.support(), label="gauge")
    if close_gauge_cycles and code.trapezoid is not None:
        first = code.layout.col_qubits(1)
        last = code.layout.row_qubits(code.matrix.shape[0])
        if len(first) > 2:
            g.add(first[0], first[-1], "gauge")
        if len(last) > 2:
            g.add(last[0], last[-1], "gauge")
    g.edges.sort()
    return g


@dataclass
class HardwareGraph:
    """Hardware connectivity graph with integer vertex labels 0..N-1."""

    name: str
    vertices: list[int]
    edges: list[tuple[int, int]]
    positions: dict[int, tuple[float, float]] = field(default_factory=dict)

    def __post_init__(self):
        self.edges = sorted(_norm_edge(u, v) for u, v in self.edges)
        self._dist: np.ndarray | None = None

    @property
    def n(self) -> int:
        return len(self.vertices)

    def neighbors(self, v: int) -> list[int]:
        return [b if a == v else a for a, b in self.edges if v in (a, b)]

    def distance_table(self) -> np.ndarray:
        """All-pairs shortest-path lengths by BFS; -1 marks unreachable."""
        if self._dist is None:
            index = {v: i for i, v in enumerate(self.vertices)}
            adj: list[list[int]] = [[] for _ in self.vertices]
            for u, v in self.edges:
                adj[index[u]].append(index[v])
                adj[index[v]].append(index[u])
            N = self.n
            D = np.full((N, N), -1, dtype=np.int64)
            for s in range(N):
                D[s, s] = 0
                frontier = [s]
                d = 0
                while frontier:
                    d += 1
                    nxt = []
                    for u in frontier:
                        for w in adj[u]:
                            if D[s, w] < 0:
                                D[s, w] = d
                                nxt.append(w)
                    frontier = nxt
            self._dist = D
        return self._dist

    def is_connected(self) -> bool:
        return bool((self.distance_table() >= 0).all())

    def distance_csv(self) -> str:
        D = self.distance_table()
        head = "," + ",".join(str(v) for v in self.vertices)
        rows = [head]
        for i, v in enumerate(self.vertices):
            rows.append(str(v) + "," + ",".join(str(int(x)) for x in D[i]))
        return "\n".join(rows) + "\n"

    def to_json(self) -> dict:
        return {
            "name": self.name,
            "vertices": list(self.vertices),
            "edges": [list(e) for e in self.edges],
            "positions": {str(v): list(p) for v, p in self.positions.items()},
        }

    @classmethod
    def from_json(cls, doc: dict) -> "HardwareGraph":
        return cls(
            name=doc.get("name", "custom"),
            vertices=list(doc["vertices"]),
            edges=[tuple(e) for e in doc["edges"]],
            positions={int(v): tuple(p) for v, p in doc.get("positions", {}).items()},
        )

    def to_dot(self) -> str:
        lines = [f"graph {self.name} {{"]
        for v in self.vertices:
            lines.append(f"  {v};")
        for u, v in self.edges:
            lines.append(f"  {u} -- {v};")
        lines.append("}")
        return "\n".join(lines)


def _load_fixture(name: str) -> HardwareGraph:
    ref = resources.files("trapcodes.data.hardware").joinpath(f"{name}.json")
    with ref.open() as fh:
        return HardwareGraph.from_json(json.load(fh))


def _grid_graph(rows: int, cols: int, diagonals: bool) -> tuple[dict, list]:
    pos = {r * cols + c: (float(c), float(-r)) for r in range(rows) for c in range(cols)}
    edges = []
    for r in range(rows):
        for c in range(cols):
            v = r * cols + c
            if c + 1 < cols:
                edges.append((v, v + 1))
            if r + 1 < rows:
                edges.append((v, v + cols))
                if diagonals and c + 1 < cols:
                    edges.append((v, v + cols + 1))
                    edges.append((v + 1, v + cols))
    return pos, edges


def _triangular_graph(rows: int, cols: int) -> tuple[dict, list]:
    pos = {r * cols + c: (float(c) - 0.5 * r, float(-r)) for r in range(rows) for c in range(cols)}
    edges = []
    for r in range(rows):
        for c in range(cols):
            v = r * cols + c
            if c + 1 < cols:
                edges.append((v, v + 1))
            if r + 1 < rows:
                edges.append((v, v + cols))
                if c + 1 < cols:
                    edges.append((v, v + cols + 1))
    return pos, edges


def hardware_graph(name: str, extent: tuple[int, int] | None = None) -> HardwareGraph:
    """One of the seven supported layouts.

    Without an extent this returns the fixed small instance whose vertex
    labels the published placement vectors refer to.  ``union_jack``,
    ``square``, and ``triangular`` also accept an (rows, cols) extent for
    larger periodic patches; the 4x4 Union Jack reproduces the 16-vertex
    instance used in the worked mapping example.
    """
    if name not in HARDWARE_NAMES:
        raise ValueError(f"unknown layout {name!r}; choose one of {', '.join(HARDWARE_NAMES)}")
    if extent is None:
        return _load_fixture(name)
    rows, cols = extent
    if rows < 2 or cols < 2:
        raise ValueError("extent must be at least 2x2")
    if name == "union_jack":
        pos, edges = _grid_graph(rows, cols, diagonals=True)
    elif name == "square":
        pos, edges = _grid_graph(rows, cols, diagonals=False)
    elif name == "triangular":
        pos, edges = _triangular_graph(rows, cols)
    else:
        raise ValueError(f"{name} does not support custom extents")
    return HardwareGraph(name=name, vertices=sorted(pos), edges=edges, positions=pos)


def manhattan(hardware: HardwareGraph, u: int, v: int) -> int | float:
    """Shortest-path edge count between two hardware vertices (inf if
    disconnected)."""
    index = {w: i for i, w in enumerate(hardware.vertices)}
    d = int(hardware.distance_table()[index[u], index[v]])
    return math.inf if d < 0 else d


@dataclass(frozen=True)
class MappingScore:
    total: int
    average: Fraction

    def to_json(self) -> dict:
        return {"total": self.total, "average_num": self.average.numerator,
                "average_den": self.average.denominator, "average": float(self.average)}


def score(placement, induced: InducedGraph, hardware: HardwareGraph) -> MappingScore:
    """Total and average Manhattan distance of a placement vector.

    ``placement[i]`` is the hardware vertex hosting physical qubit i+1.  The
    map must be injective and cover every induced vertex.
    """
    placement = list(placement)
    if not induced.edges:
        raise ValueError("induced graph has no edges to score")
    if len(placement) != induced.n:
        raise ValueError(f"placement covers {len(placement)} of {induced.n} vertices")
    if len(set(placement)) != len(placement):
        raise ValueError("placement is not injective")
    index = {v: i for i, v in enumerate(hardware.vertices)}
    try:
        slot = [index[p] for p in placement]
    except KeyError as exc:
        raise ValueError(f"unknown hardware vertex {exc.args[0]}") from None
    D = hardware.distance_table()
    total = 0
    for u, v in induced.edges:
        d = int(D[slot[u - 1], slot[v - 1]])
        if d < 0:
            raise ValueError(f"hardware vertices {placement[u-1]}, {placement[v-1]} are disconnected")
        total += d
    return MappingScore(total, Fraction(total, len(induced.edges)))


def _greedy_placement(induced: InducedGraph, hardware: HardwareGraph) -> list[int]:
    """Place vertices in descending-degree BFS order, each at the free node
    minimizing its cost against already placed neighbors."""
    D = hardware.distance_table()
    index = {v: i for i, v in enumerate(hardware.vertices)}
    order = sorted(induced.vertices, key=lambda v: (-induced.degree(v), v))
    adj: dict[int, list[int]] = {v: [] for v in induced.vertices}
    for u, v in induced.edges:
        adj[u].append(v)
        adj[v].append(u)
    placed: dict[int, int] = {}
    free = set(hardware.vertices)
    for v in order:
        best, best_cost = None, None
        for f in sorted(free):
            cost = sum(D[index[f], index[placed[w]]] for w in adj[v] if w in placed)
            if best_cost is None or cost < best_cost:
                best, best_cost = f, cost
        placed[v] = best
        free.discard(best)
    return [placed[v] for v in induced.vertices]


def anneal_map(
    induced: InducedGraph,
    hardware: HardwareGraph,
    seed: int = 0,
    schedule: tuple[float, float, int] = (2.0, 0.95, 60),
) -> tuple[list[int], MappingScore]:
    """Simulated annealing over injective placements.

    ``schedule`` is (initial temperature, geometric cooling factor, sweeps
    per temperature); each sweep proposes n moves (relocate to a free node
    or swap two vertices).  Deterministic for a fixed seed, and never worse
    than the greedy initial placement.
    """
    if induced.n > hardware.n:
        raise ValueError("more induced vertices than hardware vertices")
    if not hardware.is_connected():
        raise ValueError("hardware graph must be connected")
    rng = np.random.default_rng(seed)
    D = hardware.distance_table()
    index = {v: i for i, v in enumerate(hardware.vertices)}
    place = [index[p] for p in _greedy_placement(induced, hardware)]
    edges = [(u - 1, v - 1) for u, v in induced.edges]

    def total(pl) -> int:
        return int(sum(D[pl[u], pl[v]] for u, v in edges))

    cur = total(place)
    best, best_pl = cur, list(place)
    free = [index[v] for v in hardware.vertices if index[v] not in set(place)]
    T, alpha, sweeps = schedule
    while T > 0.02:
        for _ in range(sweeps * induced.n):
            if free and rng.random() < 0.5:
                i = int(rng.integers(induced.n))
                j = int(rng.integers(len(free)))
                old, new = place[i], free[j]
                place[i] = new
                cand = total(place)
                if cand <= cur or rng.random() < math.exp((cur - cand) / T):
                    cur = cand
                    free[j] = old
                else:
                    place[i] = old
            else:
                i, j = rng.integers(induced.n, size=2)
                if i == j:
                    continue
                place[int(i)], place[int(j)] = place[int(j)], place[int(i)]
                cand = total(place)
                if cand <= cur or rng.random() < math.exp((cur - cand) / T):
                    cur = cand
                else:
                    place[int(i)], place[int(j)] = place[int(j)], place[int(i)]
            if cur < best:
                best, best_pl = cur, list(place)
        T *= alpha
    placement = [hardware.vertices[s] for s in best_pl]
    return placement, score(placement, induced, hardware)


def brute_force_map(
    induced: InducedGraph,
    hardware: HardwareGraph,
    max_vertices: int = 10,
    initial_bound: int | None = None,
) -> tuple[list[int], MappingScore]:
    """Globally optimal placement by depth-first branch-and-bound.

    Qubits are assigned in index order to hardware vertices in ascending
    label order, pruning on an admissible bound (placed cost, plus each
    frontier vertex's best joint completion over free nodes, plus one per
    fully unplaced edge).  Among equal-cost optima the lexicographically
    smallest placement vector is returned.
    """
    nV, nH = induced.n, hardware.n
    if nV > max_vertices:
        raise SearchCapError(f"{nV} vertices exceeds the exact-search cap {max_vertices}")
    if nV > nH:
        raise ValueError("more induced vertices than hardware vertices")
    if not hardware.is_connected():
        raise ValueError("hardware graph must be connected")
    D = hardware.distance_table()
    labels = list(hardware.vertices)
    edges = [(u - 1, v - 1) for u, v in induced.edges]
    adj: list[list[int]] = [[] for _ in range(nV)]
    for u, v in edges:
        adj[u].append(v)
        adj[v].append(u)

    if initial_bound is None:
        _, s = anneal_map(induced, hardware, seed=0)
        incumbent = s.total
    else:
        incumbent = initial_bound
    best_vec: list[int] | None = None

    place = [-1] * nV
    used = [False] * nH

    # future[q] = number of edges with both endpoints still unplaced once
    # qubits 0..q-1 are down; each such edge costs at least 1.
    fully_unplaced_at = [0] * (nV + 1)
    for u, v in edges:
        fully_unplaced_at[min(u, v)] += 1
    future = [0] * (nV + 2)
    for q in range(nV - 1, -1, -1):
        future[q] = future[q + 1] + fully_unplaced_at[q]

    def bound(q: int, cost: int) -> int:
        # edges from future vertices back into the placed prefix
        extra = 0
        freelist = [h for h in range(nH) if not used[h]]
        for w in range(q, nV):
            back = [place[p] for p in adj[w] if p < q]
            if back:
                extra += min(sum(D[h, b] for b in back) for h in freelist)
        return cost + extra + future[q]

    def dfs(q: int, cost: int) -> None:
        nonlocal incumbent, best_vec
        if q == nV:
            if cost < incumbent or (cost == incumbent and best_vec is None):
                incumbent, best_vec = cost, [labels[h] for h in place]
            return
        if bound(q, cost) > incumbent:
            return
        for h in range(nH):
            if used[h]:
                continue
            step = sum(int(D[h, place[p]]) for p in adj[q] if p < q)
            if cost + step > incumbent:
                continue
            used[h] = True
            place[q] = h
            dfs(q + 1, cost + step)
            used[h] = False
            place[q] = -1

    dfs(0, 0)
    if best_vec is None:
        raise RuntimeError("branch and bound failed to find any placement")
    return best_vec, score(best_vec, induced, hardware)


def export_mip_lp(induced: InducedGraph, hardware: HardwareGraph, meta: dict | None = None) -> str:
    """The placement problem as a CPLEX-LP-format mixed integer program.

    Binary w_q_i places qubit q at node i; binary y_q1_q2_i_j linearizes
    the products w_q1_i * w_q2_j via the McCormick inequalities.  Each
    qubit occupies exactly one node, each node hosts at most one qubit
    (exactly one when counts match), and each induced edge is implemented
    exactly once; the objective sums Manhattan distances over implemented
    edges.
    """
    D = hardware.distance_table()
    index = {v: i for i, v in enumerate(hardware.vertices)}
    V = list(induced.vertices)
    H = list(hardware.vertices)
    lines = ["\\ trapcodes placement MIP"]
    for key, val in (meta or {}).items():
        lines.append(f"\\ {key}={val}")
    obj_terms = []
    for u, v in induced.edges:
        for i in H:
            for j in H:
                if i == j:
                    continue
                d = int(D[index[i], index[j]])
                if d > 0:
                    obj_terms.append(f"{d} y_{u}_{v}_{i}_{j}")
    lines.append("Minimize")
    lines.append(" obj: " + (" + ".join(obj_terms) if obj_terms else "0 dummy"))
    lines.append("Subject To")
    for q in V:
        lines.append(f" assign_{q}: " + " + ".join(f"w_{q}_{i}" for i in H) + " = 1")
    node_rhs = "= 1" if len(V) == len(H) else "<= 1"
    for i in H:
        lines.append(f" node_{i}: " + " + ".join(f"w_{q}_{i}" for q in V) + f" {node_rhs}")
    for u, v in induced.edges:
        ys = [f"y_{u}_{v}_{i}_{j}" for i in H for j in H if i != j]
        lines.append(f" edge_{u}_{v}: " + " + ".join(ys) + " = 1")
    for u, v in induced.edges:
        for i in H:
            for j in H:
                if i == j:
                    continue
                y = f"y_{u}_{v}_{i}_{j}"
                lines.append(f" mca_{y}: {y} - w_{u}_{i} <= 0")
                lines.append(f" mcb_{y}: {y} - w_{v}_{j} <= 0")
                lines.append(f" mcc_{y}: {y} - w_{u}_{i} - w_{v}_{j} >= -1")
    lines.append("Binary")
    for q in V:
        for i in H:
            lines.append(f" w_{q}_{i}")
    for u, v in induced.edges:
        for i in H:
            for j in H:
                if i != j:
                    lines.append(f" y_{u}_{v}_{i}_{j}")
    if not obj_terms:
        lines.append(" dummy")
    lines.append("End")
    return "\n".join(lines) + "\n"
