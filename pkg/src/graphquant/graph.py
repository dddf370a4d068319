"""Two-group undirected graphs: synthetic generation, file ingestion and
preprocessing, and exact whole-graph measures by full enumeration."""

from __future__ import annotations

from dataclasses import dataclass
from enum import IntEnum

import numpy as np

from .quantify import EdgeVector, PropVector, coleman_homophily, ingroup_share

MISSING_LABEL = "NA"


class Group(IntEnum):
    """Node group; by convention group B is the minority."""

    A = 0
    B = 1


def parse_group(token: str) -> int | None:
    """Map a label-file token to a group int, or None for the missing marker."""
    if token == "A":
        return int(Group.A)
    if token == "B":
        return int(Group.B)
    if token == MISSING_LABEL:
        return None
    raise ValueError(f"unknown group token {token!r}")


def group_token(value: int) -> str:
    return "B" if value == 1 else "A"


@dataclass
class UndirectedGraph:
    """Simple connected graph over dense node ids 0..N-1 with group labels.

    Construction enforces the structural invariants: no self loops or
    duplicate edges, every node incident to at least one edge, and (when
    checked) a single connected component. Instances are treated as
    immutable after construction and are safe to share across workers.
    """

    labels: np.ndarray  # int8 group per node
    edges: np.ndarray  # (E, 2) int64, each undirected edge once with src < dst
    adjacency: list[np.ndarray]  # sorted neighbor ids per node
    degrees: np.ndarray
    id_map: np.ndarray | None = None  # dense id -> original id, when remapped

    @property
    def node_count(self) -> int:
        return len(self.adjacency)

    @property
    def edge_count(self) -> int:
        return self.edges.shape[0]

    @property
    def total_degree(self) -> int:
        return int(self.degrees.sum())

    @property
    def mean_degree(self) -> float:
        return self.total_degree / self.node_count

    def neighbors(self, node: int) -> np.ndarray:
        return self.adjacency[node]

    def has_edge(self, u: int, v: int) -> bool:
        nbrs = self.adjacency[u]
        k = int(np.searchsorted(nbrs, v))
        return k < nbrs.shape[0] and nbrs[k] == v

    @classmethod
    def from_edges(
        cls,
        node_count: int,
        edges,
        labels,
        id_map: np.ndarray | None = None,
        check_connected: bool = True,
    ) -> "UndirectedGraph":
        if node_count < 2:
            raise ValueError("graph needs at least two nodes")
        edge_arr = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
        if edge_arr.shape[0] == 0:
            raise ValueError("graph has no edges")
        if edge_arr.min() < 0 or edge_arr.max() >= node_count:
            raise ValueError("edge endpoint outside 0..N-1")
        label_arr = np.asarray(labels, dtype=np.int8)
        if label_arr.shape != (node_count,):
            raise ValueError("labels must give one group per node")
        if label_arr.min() < 0 or label_arr.max() > 1:
            raise ValueError("labels must be 0 or 1")

        lo = edge_arr.min(axis=1)
        hi = edge_arr.max(axis=1)
        if (lo == hi).any():
            raise ValueError("self loops are not allowed")
        canon = np.column_stack([lo, hi])
        order = np.lexsort((canon[:, 1], canon[:, 0]))
        canon = canon[order]
        dup = (np.diff(canon[:, 0]) == 0) & (np.diff(canon[:, 1]) == 0)
        if dup.any():
            raise ValueError("duplicate edges are not allowed")

        src = np.concatenate([canon[:, 0], canon[:, 1]])
        dst = np.concatenate([canon[:, 1], canon[:, 0]])
        half_order = np.lexsort((dst, src))
        src_sorted = src[half_order]
        dst_sorted = dst[half_order]
        offsets = np.searchsorted(src_sorted, np.arange(node_count + 1))
        adjacency = [dst_sorted[offsets[i] : offsets[i + 1]] for i in range(node_count)]
        degrees = np.diff(offsets).astype(np.int64)
        if (degrees == 0).any():
            raise ValueError("every node must be incident to at least one edge")
        if check_connected and not _connected(adjacency, node_count):
            raise ValueError("graph must be a single connected component")
        return cls(
            labels=label_arr,
            edges=canon,
            adjacency=adjacency,
            degrees=degrees,
            id_map=id_map,
        )


def _connected(adjacency, node_count: int) -> bool:
    seen = np.zeros(node_count, dtype=bool)
    seen[0] = True
    stack = [0]
    found = 1
    while stack:
        u = stack.pop()
        nbrs = adjacency[u]
        fresh = nbrs[~seen[nbrs]]
        if fresh.size:
            seen[fresh] = True
            found += fresh.size
            stack.extend(fresh.tolist())
    return found == node_count


def graphs_equal(g1: UndirectedGraph, g2: UndirectedGraph) -> bool:
    return (
        g1.node_count == g2.node_count
        and np.array_equal(g1.labels, g2.labels)
        and np.array_equal(g1.edges, g2.edges)
    )


def generate_homophilous_graph(
    n: int, m: int, minority_frac: float, ingroup_pref: float, rng_seed=None
) -> UndirectedGraph:
    """Grow a two-group power-law graph with tunable group mixing.

    Growth starts from an m-clique of alternating groups. Each new node
    draws its group with probability ``minority_frac``, then attaches to
    m distinct existing nodes chosen with probability proportional to
    degree times a mixing weight: ``ingroup_pref`` for a same-group
    target, ``1 - ingroup_pref`` otherwise. Targets within one step are
    sampled without replacement (by rejection); if every candidate has
    zero weight, or the weighted pool cannot supply m distinct targets,
    the remaining slots are filled uniformly so growth stays total at the
    preference extremes. The result is connected by construction.
    """
    if m < 1 or n <= m:
        raise ValueError(f"need n > m >= 1, got n={n}, m={m}")
    if not 0.0 <= minority_frac <= 1.0:
        raise ValueError(f"minority_frac must lie in [0, 1], got {minority_frac}")
    if not 0.0 <= ingroup_pref <= 1.0:
        raise ValueError(f"ingroup_pref must lie in [0, 1], got {ingroup_pref}")

    rng = np.random.default_rng(rng_seed)
    labels = np.empty(n, dtype=np.int8)
    labels[:m] = np.arange(m) % 2
    labels[m:] = (rng.random(n - m) < minority_frac).astype(np.int8)
    label_of = labels.tolist()

    # Node id repeated once per unit of degree, split by group; list length
    # doubles as the group's total degree mass.
    rep: tuple[list[int], list[int]] = ([], [])
    src: list[int] = []
    dst: list[int] = []
    for i in range(m):
        for j in range(i + 1, m):
            src.append(i)
            dst.append(j)
            rep[label_of[i]].append(i)
            rep[label_of[j]].append(j)

    draw = rng.random
    buf = draw(16384).tolist()
    buf_at = 0
    rep_a, rep_b = rep
    w_same = ingroup_pref
    w_cross = 1.0 - ingroup_pref
    for v in range(m, n):
        gv = label_of[v]
        wa = (w_same if gv == 0 else w_cross) * len(rep_a)
        wb = (w_same if gv == 1 else w_cross) * len(rep_b)
        total = wa + wb
        targets: set[int] = set()
        tries = 60 * m + 60  # rejection cap before the uniform fallback
        while len(targets) < m and total > 0.0 and tries:
            if buf_at + 2 > 16384:
                buf = draw(16384).tolist()
                buf_at = 0
            pool = rep_a if buf[buf_at] * total < wa else rep_b
            u = pool[int(buf[buf_at + 1] * len(pool))]
            buf_at += 2
            if u not in targets:
                targets.add(u)
            tries -= 1
        if len(targets) < m:
            rest = [u for u in range(v) if u not in targets]
            picked = rng.choice(len(rest), size=m - len(targets), replace=False)
            targets.update(rest[int(i)] for i in picked)
        for u in sorted(targets):
            src.append(v)
            dst.append(u)
            rep[label_of[u]].append(u)
        rep[gv].extend([v] * m)

    edges = np.column_stack([np.asarray(src, dtype=np.int64), np.asarray(dst, dtype=np.int64)])
    # Growth attaches every new node to existing ones, so connectivity holds
    # by construction and the BFS check is skipped.
    return UndirectedGraph.from_edges(n, edges, labels, check_connected=False)


def _normalize_label(raw) -> int | None:
    if raw is None:
        return None
    if isinstance(raw, (int, np.integer)):
        value = int(raw)
        if value not in (0, 1):
            raise ValueError(f"integer labels must be 0 or 1, got {value}")
        return value
    return parse_group(str(raw))


def load_and_preprocess(
    edge_records, label_records, directed_input: bool = False
) -> UndirectedGraph:
    """Build a clean undirected graph from raw edge and label records.

    Directed inputs keep only reciprocated pairs. Self loops, duplicate
    edges, and edges touching unlabeled nodes are dropped; the largest
    connected component survives; node ids are remapped to a dense
    0..N-1 range in ascending original-id order, with the originals kept
    in ``id_map``. Preprocessing its own output is a no-op.
    """
    labels: dict[int, int] = {}
    for node, raw in label_records.items():
        value = _normalize_label(raw)
        if value is not None:
            labels[int(node)] = value

    raw_pairs: set[tuple[int, int]] = set()
    for record in edge_records:
        try:
            u, v = record
            u = int(u)
            v = int(v)
        except (TypeError, ValueError) as exc:
            raise ValueError(f"malformed edge record {record!r}") from exc
        if directed_input:
            raw_pairs.add((u, v))
        elif u != v:
            raw_pairs.add((min(u, v), max(u, v)))
    if directed_input:
        raw_pairs = {
            (min(u, v), max(u, v))
            for (u, v) in raw_pairs
            if u != v and (v, u) in raw_pairs
        }

    kept = [(u, v) for (u, v) in raw_pairs if u in labels and v in labels]
    if not kept:
        raise ValueError("empty graph after preprocessing")

    neighbors: dict[int, list[int]] = {}
    for u, v in kept:
        neighbors.setdefault(u, []).append(v)
        neighbors.setdefault(v, []).append(u)

    best: set[int] = set()
    unvisited = set(neighbors)
    while unvisited:
        start = min(unvisited)
        component = {start}
        frontier = [start]
        while frontier:
            node = frontier.pop()
            for w in neighbors[node]:
                if w not in component:
                    component.add(w)
                    frontier.append(w)
        unvisited -= component
        if len(component) > len(best):
            best = component

    ordered = sorted(best)
    remap = {orig: i for i, orig in enumerate(ordered)}
    edge_arr = np.array(
        sorted(
            (remap[u], remap[v]) if remap[u] < remap[v] else (remap[v], remap[u])
            for (u, v) in kept
            if u in best
        ),
        dtype=np.int64,
    )
    label_arr = np.array([labels[orig] for orig in ordered], dtype=np.int8)
    id_map = np.array(ordered, dtype=np.int64)
    return UndirectedGraph.from_edges(
        len(ordered), edge_arr, label_arr, id_map=id_map, check_connected=False
    )


def top_quantile_indices(degrees, quantile: float, node_ids=None, minimum: int = 0) -> np.ndarray:
    """Indices of the top-quantile records by degree.

    The cutoff keeps floor(count * quantile) records, at least
    ``minimum``; everything strictly above the cutoff degree enters
    first, and ties at the cutoff fill the remaining slots in ascending
    node-id order so the selection is deterministic.
    """
    deg = np.asarray(degrees, dtype=np.int64)
    count = max(int(minimum), int(deg.shape[0] * quantile))
    if count < 1:
        raise ValueError("quantile selects no records")
    ids = np.arange(deg.shape[0]) if node_ids is None else np.asarray(node_ids)
    order = np.lexsort((ids, -deg))
    return order[:count]


@dataclass(frozen=True)
class GroundTruth:
    """Exact population measures of a labeled graph."""

    p: PropVector
    s: EdgeVector
    visibility_b: float
    homophily_a: float | None
    homophily_b: float | None

    def as_dict(self) -> dict:
        return {
            "p_a": self.p.a,
            "p_b": self.p.b,
            "s_aa": self.s.aa,
            "s_ab": self.s.ab,
            "s_bb": self.s.bb,
            "visibility_b": self.visibility_b,
            "homophily_a": self.homophily_a,
            "homophily_b": self.homophily_b,
        }


def ground_truth(g: UndirectedGraph, top_quantile: float = 0.2) -> GroundTruth:
    """Population measures by full enumeration of nodes and edges.

    Homophily for a group is None when that group is empty or is the
    whole population, where the index is undefined.
    """
    p_b = float(np.count_nonzero(g.labels)) / g.node_count
    p = PropVector(1.0 - p_b, p_b, role="true_p")

    pair = g.labels[g.edges[:, 0]].astype(np.int64) + g.labels[g.edges[:, 1]]
    e = g.edge_count
    s = EdgeVector(
        float(np.count_nonzero(pair == 0)) / e,
        float(np.count_nonzero(pair == 1)) / e,
        float(np.count_nonzero(pair == 2)) / e,
        role="true_s",
    )

    # Population visibility always exists: on very small graphs the top
    # quantile clamps to the single highest-degree node.
    top = top_quantile_indices(g.degrees, top_quantile, minimum=1)
    visibility_b = float(np.count_nonzero(g.labels[top])) / top.shape[0]

    def h_for(p_g: float, group: int) -> float | None:
        if p_g <= 0.0 or p_g >= 1.0:
            return None
        return coleman_homophily(ingroup_share(s, group), p_g, group).value

    return GroundTruth(
        p=p,
        s=s,
        visibility_b=visibility_b,
        homophily_a=h_for(p.a, 0),
        homophily_b=h_for(p.b, 1),
    )


def read_edge_list(path) -> list[tuple[int, int]]:
    """Edge file: two whitespace-separated integer ids per line, '#' comments."""
    out: list[tuple[int, int]] = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            text = line.strip()
            if not text or text.startswith("#"):
                continue
            parts = text.split()
            if len(parts) != 2:
                raise ValueError(f"{path}:{lineno}: expected two node ids")
            try:
                out.append((int(parts[0]), int(parts[1])))
            except ValueError as exc:
                raise ValueError(f"{path}:{lineno}: non-integer node id") from exc
    return out


def read_label_file(path) -> dict[int, str]:
    """Label file: ``node_id<TAB>group`` per line, group A, B, or NA."""
    out: dict[int, str] = {}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            text = line.strip()
            if not text or text.startswith("#"):
                continue
            parts = text.split()
            if len(parts) != 2:
                raise ValueError(f"{path}:{lineno}: expected node id and group")
            token = parts[1]
            if token not in ("A", "B", MISSING_LABEL):
                raise ValueError(f"{path}:{lineno}: unknown group token {token!r}")
            try:
                out[int(parts[0])] = token
            except ValueError as exc:
                raise ValueError(f"{path}:{lineno}: non-integer node id") from exc
    return out


def load_graph_files(edge_path, label_path, directed: bool = False) -> UndirectedGraph:
    return load_and_preprocess(
        read_edge_list(edge_path), read_label_file(label_path), directed_input=directed
    )


def write_edge_list(g: UndirectedGraph, path) -> None:
    """Write dense-id edges, one per line, compatible with read_edge_list."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("# src dst\n")
        for u, v in g.edges:
            fh.write(f"{int(u)} {int(v)}\n")


def write_label_file(g: UndirectedGraph, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for node in range(g.node_count):
            fh.write(f"{node}\t{group_token(int(g.labels[node]))}\n")
