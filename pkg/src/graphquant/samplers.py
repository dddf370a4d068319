"""Graph sampling strategies and the estimators built on their output.

Four samplers observe a graph through different windows: a degree-biased
random walk (single chain, uniform transitions over neighbors), uniform
node sampling, uniform edge sampling, and breadth-first snowball
expansion. Each sampler returns a self-contained record set (node id,
degree, true label, optional noisy label) plus the edges it legitimately
observed, so every estimator below works from sample data alone.

Walk estimates are reweighted by inverse degree; importance resampling
with the same weights recovers an approximately uniform node sample from
a walk, which is what the degree-quantile visibility estimate needs.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass

import numpy as np

from .graph import UndirectedGraph, group_token, top_quantile_indices
from .quantify import PropVector, EdgeVector

SEED_DEGREE = "degree_proportional"
SEED_UNIFORM = "uniform_with_burnin"


class NoObservedEdgesError(ValueError):
    """The sample contains no usable edge observations."""


@dataclass(frozen=True)
class WalkSample:
    """Single-chain random walk: one record per step, revisits included."""

    nodes: np.ndarray
    degrees: np.ndarray
    true_labels: np.ndarray
    noisy_labels: np.ndarray | None
    walk_edges: np.ndarray  # consecutive recorded pairs, shape (n-1, 2)
    seed_mode: str
    burn_in: int

    def __len__(self) -> int:
        return self.nodes.shape[0]


@dataclass(frozen=True)
class NodeSample:
    """Uniform without-replacement node records plus induced-subgraph edges.

    ``edge_positions`` indexes each induced edge's endpoints into the
    record arrays, so edge-level estimates stay vectorized.
    """

    nodes: np.ndarray
    degrees: np.ndarray
    true_labels: np.ndarray
    noisy_labels: np.ndarray | None
    induced_edges: np.ndarray
    edge_positions: np.ndarray

    def __len__(self) -> int:
        return self.nodes.shape[0]


@dataclass(frozen=True)
class EdgeSample:
    """Uniform without-replacement edges; records cover both endpoints.

    Endpoint records are flattened in edge order, so ``nodes`` has two
    entries per sampled edge and repeats nodes shared between edges.
    """

    edges: np.ndarray
    nodes: np.ndarray
    degrees: np.ndarray
    true_labels: np.ndarray
    noisy_labels: np.ndarray | None

    def __len__(self) -> int:
        return self.nodes.shape[0]


@dataclass(frozen=True)
class SnowballSample:
    """Breadth-first expansion from uniform seeds, whole waves at a time."""

    nodes: np.ndarray
    degrees: np.ndarray
    true_labels: np.ndarray
    noisy_labels: np.ndarray | None
    waves: np.ndarray  # wave index per record, seeds are wave 0
    traversed_edges: np.ndarray  # discovery edges into retained nodes
    edge_positions: np.ndarray  # traversed-edge endpoints as record indices

    def __len__(self) -> int:
        return self.nodes.shape[0]


@dataclass(frozen=True)
class ResampledSet:
    """With-replacement redraw of walk records under normalized weights."""

    nodes: np.ndarray
    degrees: np.ndarray
    true_labels: np.ndarray
    noisy_labels: np.ndarray | None
    weights: np.ndarray  # normalized weight per source record

    def __len__(self) -> int:
        return self.nodes.shape[0]


def with_noisy_labels(sample, noisy_by_node):
    """Copy of a sample with noisy labels looked up per visited node.

    The lookup is a per-node array for the whole graph, so a node keeps
    one noisy label no matter how often the sample saw it.
    """
    arr = np.asarray(noisy_by_node, dtype=np.int8)[sample.nodes]
    return dataclasses.replace(sample, noisy_labels=arr)


def rwrw_walk(
    g: UndirectedGraph,
    n_steps: int,
    seed_mode: str = SEED_DEGREE,
    burn_in: int = 0,
    rng_seed=None,
) -> WalkSample:
    """Random-walk the graph and record one node per step.

    The seed node is drawn proportional to degree (the walk's stationary
    distribution) or uniformly; with a uniform seed, ``burn_in`` leading
    steps are discarded before recording starts. Transitions are uniform
    over the current node's neighbors.
    """
    if n_steps < 1:
        raise ValueError("walk needs at least one step")
    if burn_in < 0:
        raise ValueError("burn_in must be nonnegative")
    if seed_mode not in (SEED_DEGREE, SEED_UNIFORM):
        raise ValueError(f"unknown seed_mode {seed_mode!r}")
    rng = np.random.default_rng(rng_seed)
    if seed_mode == SEED_DEGREE:
        cur = int(rng.choice(g.node_count, p=g.degrees / g.total_degree))
    else:
        cur = int(rng.integers(g.node_count))

    total = n_steps + burn_in
    nodes = np.empty(total, dtype=np.int64)
    adjacency = g.adjacency
    pos = 0
    while pos < total:
        block = rng.random(min(65536, total - pos)).tolist()
        for u in block:
            nodes[pos] = cur
            nbrs = adjacency[cur]
            cur = int(nbrs[int(u * nbrs.shape[0])])
            pos += 1
    recorded = nodes[burn_in:]
    return WalkSample(
        nodes=recorded,
        degrees=g.degrees[recorded],
        true_labels=g.labels[recorded],
        noisy_labels=None,
        walk_edges=np.column_stack([recorded[:-1], recorded[1:]]),
        seed_mode=seed_mode,
        burn_in=burn_in,
    )


def rwrw_estimate(sample: WalkSample, g_of_node) -> float:
    """Inverse-degree weighted walk mean of a node function.

    Computes sum(g(X_j)/d_j) / sum(1/d_j) over the recorded steps, which
    removes the walk's degree bias; with an indicator function this
    estimates that group's population share.
    """
    if len(sample) == 0:
        raise ValueError("empty sample")
    inv_d = 1.0 / sample.degrees
    values = np.fromiter(
        (g_of_node(int(v)) for v in sample.nodes), dtype=float, count=len(sample)
    )
    return float((values * inv_d).sum() / inv_d.sum())


def node_sample(g: UndirectedGraph, n: int, rng_seed=None) -> NodeSample:
    """Uniform sample of n distinct nodes, with their induced edges."""
    if not 1 <= n <= g.node_count:
        raise ValueError(f"need 1 <= n <= {g.node_count}, got {n}")
    rng = np.random.default_rng(rng_seed)
    ids = np.sort(rng.choice(g.node_count, size=n, replace=False))
    mask = np.zeros(g.node_count, dtype=bool)
    mask[ids] = True
    keep = mask[g.edges[:, 0]] & mask[g.edges[:, 1]]
    induced = g.edges[keep]
    return NodeSample(
        nodes=ids,
        degrees=g.degrees[ids],
        true_labels=g.labels[ids],
        noisy_labels=None,
        induced_edges=induced,
        edge_positions=np.searchsorted(ids, induced),
    )


def edge_sample(g: UndirectedGraph, n_edges: int, rng_seed=None) -> EdgeSample:
    """Uniform sample of n distinct undirected edges with endpoint records."""
    if not 1 <= n_edges <= g.edge_count:
        raise ValueError(f"need 1 <= n_edges <= {g.edge_count}, got {n_edges}")
    rng = np.random.default_rng(rng_seed)
    idx = np.sort(rng.choice(g.edge_count, size=n_edges, replace=False))
    edges = g.edges[idx]
    flat = edges.reshape(-1)
    return EdgeSample(
        edges=edges,
        nodes=flat,
        degrees=g.degrees[flat],
        true_labels=g.labels[flat],
        noisy_labels=None,
    )


def snowball_sample(
    g: UndirectedGraph, n_target: int, n_seeds: int = 10, rng_seed=None
) -> SnowballSample:
    """Breadth-first crawl from uniform seeds up to exactly n_target nodes.

    Whole waves are added while they fit; the wave that would overshoot is
    truncated by a uniform draw. Traversed edges are the discovery edges
    into nodes that were kept.
    """
    if not 1 <= n_target <= g.node_count:
        raise ValueError(f"need 1 <= n_target <= {g.node_count}, got {n_target}")
    if n_seeds < 1:
        raise ValueError("need at least one seed")
    rng = np.random.default_rng(rng_seed)
    seeds = np.sort(rng.choice(g.node_count, size=min(n_seeds, g.node_count), replace=False))
    if seeds.shape[0] > n_target:
        seeds = np.sort(rng.choice(seeds, size=n_target, replace=False))

    visited = np.zeros(g.node_count, dtype=bool)
    visited[seeds] = True
    accepted = seeds.tolist()
    waves = [0] * len(accepted)
    tree: list[tuple[int, int]] = []
    frontier = accepted[:]
    wave = 0
    while len(accepted) < n_target:
        wave += 1
        discovered: list[int] = []
        disc_edges: list[tuple[int, int]] = []
        for u in frontier:
            for w in g.adjacency[u].tolist():
                if not visited[w]:
                    visited[w] = True
                    discovered.append(w)
                    disc_edges.append((u, w))
        if not discovered:
            raise ValueError("ran out of reachable nodes before n_target")
        room = n_target - len(accepted)
        if len(discovered) > room:
            keep = np.sort(rng.choice(len(discovered), size=room, replace=False))
            discovered = [discovered[i] for i in keep]
            disc_edges = [disc_edges[i] for i in keep]
        accepted.extend(discovered)
        waves.extend([wave] * len(discovered))
        tree.extend(disc_edges)
        frontier = discovered

    nodes = np.array(accepted, dtype=np.int64)
    traversed = (
        np.array(tree, dtype=np.int64).reshape(-1, 2)
        if tree
        else np.empty((0, 2), dtype=np.int64)
    )
    position = {node: i for i, node in enumerate(accepted)}
    edge_positions = (
        np.array([(position[u], position[v]) for u, v in tree], dtype=np.int64).reshape(-1, 2)
        if tree
        else np.empty((0, 2), dtype=np.int64)
    )
    return SnowballSample(
        nodes=nodes,
        degrees=g.degrees[nodes],
        true_labels=g.labels[nodes],
        noisy_labels=None,
        waves=np.array(waves, dtype=np.int64),
        traversed_edges=traversed,
        edge_positions=edge_positions,
    )


def importance_resample(sample: WalkSample, out_size: int, rng_seed=None) -> ResampledSet:
    """Redraw walk records with replacement, weighted by inverse degree.

    Normalized 1/d weights undo the walk's degree bias, so the resampled
    multiset approximates a uniform-node sample.
    """
    if len(sample) == 0:
        raise ValueError("empty sample")
    if out_size < 1:
        raise ValueError("out_size must be positive")
    rng = np.random.default_rng(rng_seed)
    weights = 1.0 / sample.degrees
    weights = weights / weights.sum()
    idx = rng.choice(len(sample), size=out_size, replace=True, p=weights)
    noisy = None if sample.noisy_labels is None else sample.noisy_labels[idx]
    return ResampledSet(
        nodes=sample.nodes[idx],
        degrees=sample.degrees[idx],
        true_labels=sample.true_labels[idx],
        noisy_labels=noisy,
        weights=weights,
    )


def _label_array(sample, label_field: str) -> np.ndarray:
    if label_field == "true":
        return sample.true_labels
    if label_field == "noisy":
        if sample.noisy_labels is None:
            raise ValueError("sample carries no noisy labels")
        return sample.noisy_labels
    raise ValueError(f"label_field must be 'true' or 'noisy', got {label_field!r}")


def _prop_role(label_field: str) -> str:
    return "true_p" if label_field == "true" else "measured_m"


def estimate_proportions(sample, label_field: str = "true") -> PropVector:
    """Group-share estimate appropriate to the sample type.

    Walks are reweighted by inverse degree; node, snowball and resampled
    records use the plain share; edge samples use the endpoint share,
    which is degree-biased by design and documents what edge sampling can
    actually see.
    """
    labels = _label_array(sample, label_field)
    if labels.shape[0] == 0:
        raise ValueError("empty sample")
    if isinstance(sample, WalkSample):
        inv_d = 1.0 / sample.degrees
        share_b = float((inv_d * (labels == 1)).sum() / inv_d.sum())
    else:
        share_b = float(np.count_nonzero(labels == 1)) / labels.shape[0]
    return PropVector(1.0 - share_b, share_b, role=_prop_role(label_field))


def observed_edges(sample) -> np.ndarray:
    """Edge observations a sampler is entitled to: walk pairs, sampled
    edges, traversed snowball edges, or the node sample's induced edges."""
    if isinstance(sample, WalkSample):
        return sample.walk_edges
    if isinstance(sample, EdgeSample):
        return sample.edges
    if isinstance(sample, SnowballSample):
        return sample.traversed_edges
    if isinstance(sample, NodeSample):
        return sample.induced_edges
    raise TypeError(f"no edge observations for {type(sample).__name__}")


def estimate_edge_vector(sample, label_field: str = "true") -> EdgeVector:
    """Edge-type shares (aa, ab, bb) over the sample's observed edges."""
    labels = _label_array(sample, label_field)
    if isinstance(sample, WalkSample):
        pair = labels[:-1].astype(np.int64) + labels[1:]
    elif isinstance(sample, EdgeSample):
        pair = labels.reshape(-1, 2).astype(np.int64).sum(axis=1)
    elif isinstance(sample, (NodeSample, SnowballSample)):
        pos = sample.edge_positions
        pair = labels[pos[:, 0]].astype(np.int64) + labels[pos[:, 1]]
    else:
        raise TypeError(f"no edge observations for {type(sample).__name__}")
    if pair.shape[0] == 0:
        raise NoObservedEdgesError("sample observed no edges")
    n = pair.shape[0]
    role = "true_s" if label_field == "true" else "measured_t"
    return EdgeVector(
        float(np.count_nonzero(pair == 0)) / n,
        float(np.count_nonzero(pair == 1)) / n,
        float(np.count_nonzero(pair == 2)) / n,
        role=role,
    )


def shares_in_top_quantile(sample, top_quantile: float, label_field: str = "true") -> PropVector:
    """Group shares among the top degree quantile of the sample records."""
    labels = _label_array(sample, label_field)
    top = top_quantile_indices(sample.degrees, top_quantile, node_ids=sample.nodes)
    share_b = float(np.count_nonzero(labels[top] == 1)) / top.shape[0]
    return PropVector(1.0 - share_b, share_b, role=_prop_role(label_field))


def estimate_visibility(
    sample: WalkSample,
    top_quantile: float = 0.2,
    out_size: int | None = None,
    label_field: str = "true",
    rng_seed=None,
) -> PropVector:
    """Group shares in the top degree quantile, from a walk.

    Importance-resamples the walk to approximate a uniform node sample
    (default resample size 10x the walk length), sorts by degree and
    reads the group shares in the top quantile.
    """
    if out_size is None:
        out_size = 10 * len(sample)
    if int(out_size * top_quantile) < 1:
        raise ValueError("resample too small for the requested quantile")
    resampled = importance_resample(sample, out_size, rng_seed)
    return shares_in_top_quantile(resampled, top_quantile, label_field)


def write_sample_records(sample, path) -> None:
    """Audit format: one record per line as
    ``node_id degree true_label noisy_label step_index``."""
    labels = sample.true_labels
    noisy = sample.noisy_labels
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("# node_id degree true_label noisy_label step_index\n")
        for i in range(len(sample)):
            noisy_tok = "NA" if noisy is None else group_token(int(noisy[i]))
            fh.write(
                f"{int(sample.nodes[i])} {int(sample.degrees[i])} "
                f"{group_token(int(labels[i]))} {noisy_tok} {i}\n"
            )
