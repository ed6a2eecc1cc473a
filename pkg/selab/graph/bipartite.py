"""
Weighted bipartite user-post graph.

Users occupy vertex indices ``0..m-1`` and posts ``m..m+n-1`` in the order
they were supplied. Graph values are immutable; every modification returns a
new graph.
"""

from dataclasses import dataclass, field
from functools import cached_property
from typing import Dict, FrozenSet, Iterable, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np

from selab.core.exceptions import (
    DanglingEndpointError,
    DuplicateEdgeError,
    GraphError,
    UndefinedCosineError,
    UnknownVertexError,
)
from selab.core.logger_manager import get_logger

logger = get_logger(__name__)

FAKE = 1
REAL = 0

EdgeSpec = Union[Tuple[str, str], Tuple[str, str, float]]
FeatureSpec = Union[Mapping[str, Sequence[float]], np.ndarray]


def edge_weight(h_u: Sequence[float], h_p: Sequence[float]) -> float:
    """Edge weight ``(cos(h_u, h_p) + 1) / 2`` in [0, 1]."""
    u = np.asarray(h_u, dtype=float)
    p = np.asarray(h_p, dtype=float)
    if u.shape != p.shape:
        raise GraphError(f"feature dimensions differ: {u.shape} vs {p.shape}")
    nu = np.linalg.norm(u)
    npost = np.linalg.norm(p)
    if nu == 0.0 or npost == 0.0:
        raise UndefinedCosineError()
    cos = float(np.dot(u, p) / (nu * npost))
    return float(np.clip((cos + 1.0) / 2.0, 0.0, 1.0))


def _pair_weights(user_vectors: np.ndarray, post_vectors: np.ndarray) -> np.ndarray:
    """Row-wise edge weights for aligned user/post feature rows."""
    nu = np.linalg.norm(user_vectors, axis=1)
    npost = np.linalg.norm(post_vectors, axis=1)
    if np.any(nu == 0.0) or np.any(npost == 0.0):
        raise UndefinedCosineError()
    cos = np.einsum("ij,ij->i", user_vectors, post_vectors) / (nu * npost)
    return np.clip((cos + 1.0) / 2.0, 0.0, 1.0)


@dataclass(frozen=True, eq=False)
class BipartiteGraph:
    """Users, posts, weighted engagement edges, features and post labels."""

    user_ids: Tuple[str, ...]
    post_ids: Tuple[str, ...]
    edge_users: np.ndarray
    edge_posts: np.ndarray
    weights: np.ndarray
    user_features: np.ndarray
    post_features: np.ndarray
    labels: np.ndarray

    @property
    def num_users(self) -> int:
        return len(self.user_ids)

    @property
    def num_posts(self) -> int:
        return len(self.post_ids)

    @property
    def num_vertices(self) -> int:
        return self.num_users + self.num_posts

    @property
    def num_edges(self) -> int:
        return int(self.edge_users.shape[0])

    @property
    def feature_dim(self) -> int:
        return int(self.user_features.shape[1])

    @cached_property
    def vertex_ids(self) -> Tuple[str, ...]:
        return self.user_ids + self.post_ids

    @cached_property
    def _index(self) -> Dict[str, int]:
        return {vid: i for i, vid in enumerate(self.vertex_ids)}

    @cached_property
    def degrees(self) -> np.ndarray:
        """Weighted degree of every vertex (users first, then posts)."""
        user_deg = np.bincount(self.edge_users, weights=self.weights, minlength=self.num_users)
        post_deg = np.bincount(self.edge_posts, weights=self.weights, minlength=self.num_posts)
        return np.concatenate([user_deg, post_deg]).astype(float)

    @cached_property
    def total_volume(self) -> float:
        return float(self.degrees.sum())

    @cached_property
    def edge_keys(self) -> FrozenSet[Tuple[int, int]]:
        return frozenset(zip(self.edge_users.tolist(), self.edge_posts.tolist()))

    @cached_property
    def user_posts(self) -> Tuple[FrozenSet[int], ...]:
        """Post indices each user already engages with."""
        buckets: List[set] = [set() for _ in range(self.num_users)]
        for u, p in zip(self.edge_users.tolist(), self.edge_posts.tolist()):
            buckets[u].add(p)
        return tuple(frozenset(b) for b in buckets)

    def vertex_index(self, vertex_id: str) -> int:
        try:
            return self._index[vertex_id]
        except KeyError:
            raise UnknownVertexError(vertex_id) from None

    def vertex_id(self, index: int) -> str:
        return self.vertex_ids[index]

    def user_index(self, user_id: str) -> int:
        idx = self.vertex_index(user_id)
        if idx >= self.num_users:
            raise UnknownVertexError(user_id)
        return idx

    def post_index(self, post_id: str) -> int:
        """Index of a post within ``post_ids`` (not the vertex index)."""
        idx = self.vertex_index(post_id)
        if idx < self.num_users:
            raise UnknownVertexError(post_id)
        return idx - self.num_users

    def is_post(self, vertex_index: int) -> bool:
        return vertex_index >= self.num_users

    def label_of(self, post_id: str) -> int:
        return int(self.labels[self.post_index(post_id)])

    def has_edge(self, user_id: str, post_id: str) -> bool:
        return (self.user_index(user_id), self.post_index(post_id)) in self.edge_keys

    def degree(self, vertex_id: str) -> float:
        return float(self.degrees[self.vertex_index(vertex_id)])

    def post_degree(self, post_id: str) -> int:
        """Unweighted engagement count of a post."""
        return int(np.count_nonzero(self.edge_posts == self.post_index(post_id)))

    def edges(self) -> List[Tuple[str, str, float]]:
        return [
            (self.user_ids[u], self.post_ids[p], float(w))
            for u, p, w in zip(self.edge_users.tolist(), self.edge_posts.tolist(), self.weights.tolist())
        ]

    def vertex_mask(self, vertex_set: Iterable[str]) -> np.ndarray:
        mask = np.zeros(self.num_vertices, dtype=bool)
        for vid in vertex_set:
            mask[self.vertex_index(vid)] = True
        return mask


@dataclass(frozen=True, eq=False)
class Subgraph:
    """Associated subgraph of a target post: all users plus one community's posts."""

    parent: BipartiteGraph
    users: Tuple[str, ...]
    posts: Tuple[str, ...]
    edges: Tuple[Tuple[str, str, float], ...]
    fake_posts: Tuple[str, ...]
    real_posts: Tuple[str, ...]
    target: Optional[str] = None
    community: Optional[int] = field(default=None, compare=False)

    @property
    def l_f(self) -> int:
        return len(self.fake_posts)

    @property
    def l_r(self) -> int:
        return len(self.real_posts)

    @property
    def target_label(self) -> int:
        if self.target is None:
            raise GraphError("subgraph was not built for a target")
        return self.parent.label_of(self.target)

    @property
    def peers(self) -> Tuple[str, ...]:
        """Posts sharing the target's label, target first."""
        return self.fake_posts if self.target_label == FAKE else self.real_posts

    @property
    def contrast(self) -> Tuple[str, ...]:
        """Posts with the opposite label of the target."""
        return self.real_posts if self.target_label == FAKE else self.fake_posts

    @property
    def action_posts(self) -> Tuple[str, ...]:
        """Post order used for action indices: peers (target at 0), then contrast posts."""
        return self.peers + self.contrast


def _feature_matrix(ids: Sequence[str], features: FeatureSpec, kind: str) -> np.ndarray:
    if isinstance(features, np.ndarray):
        matrix = np.asarray(features, dtype=float)
        if matrix.ndim != 2 or matrix.shape[0] != len(ids):
            raise GraphError(f"{kind} feature matrix must have shape ({len(ids)}, d), got {matrix.shape}")
        return matrix
    rows = []
    for vid in ids:
        if vid not in features:
            raise GraphError(f"missing {kind} features for {vid}", {"vertex_id": vid})
        rows.append(np.asarray(features[vid], dtype=float))
    dims = {r.shape for r in rows}
    if len(dims) > 1:
        raise GraphError(f"{kind} feature vectors differ in dimension: {sorted(dims)}")
    return np.vstack(rows) if rows else np.zeros((0, 0))


def build_graph(
    users: Sequence[str],
    posts: Sequence[str],
    edges: Iterable[EdgeSpec],
    user_features: FeatureSpec,
    post_features: FeatureSpec,
    labels: Union[Mapping[str, int], Sequence[int]],
) -> BipartiteGraph:
    """Validate inputs and assemble a :class:`BipartiteGraph`.

    Edges are ``(user, post)`` or ``(user, post, weight)``; missing weights are
    computed from the features with :func:`edge_weight`.
    """
    user_ids = tuple(str(u) for u in users)
    post_ids = tuple(str(p) for p in posts)
    if not user_ids or not post_ids:
        raise GraphError("a graph needs at least one user and one post")
    if len(set(user_ids)) != len(user_ids) or len(set(post_ids)) != len(post_ids):
        raise GraphError("user and post ids must be unique")
    shared = set(user_ids) & set(post_ids)
    if shared:
        raise GraphError(f"user and post ids overlap: {sorted(shared)[:5]}", {"overlap": sorted(shared)})

    u_feat = _feature_matrix(user_ids, user_features, "user")
    p_feat = _feature_matrix(post_ids, post_features, "post")
    if u_feat.shape[1] != p_feat.shape[1]:
        raise GraphError(f"user features have dimension {u_feat.shape[1]}, posts {p_feat.shape[1]}")

    if isinstance(labels, Mapping):
        missing = [p for p in post_ids if p not in labels]
        if missing:
            raise GraphError(f"missing label for post {missing[0]}", {"missing": missing})
        label_arr = np.array([int(labels[p]) for p in post_ids], dtype=np.int64)
    else:
        label_arr = np.asarray(labels, dtype=np.int64)
        if label_arr.shape != (len(post_ids),):
            raise GraphError(f"expected {len(post_ids)} labels, got {label_arr.shape}")
    if not np.isin(label_arr, (REAL, FAKE)).all():
        raise GraphError("labels must be 0 (real) or 1 (fake)")

    user_pos = {u: i for i, u in enumerate(user_ids)}
    post_pos = {p: i for i, p in enumerate(post_ids)}
    e_users: List[int] = []
    e_posts: List[int] = []
    explicit: List[float] = []
    seen: set = set()
    for edge in edges:
        u, p = str(edge[0]), str(edge[1])
        if u not in user_pos:
            raise DanglingEndpointError(u)
        if p not in post_pos:
            raise DanglingEndpointError(p)
        key = (user_pos[u], post_pos[p])
        if key in seen:
            raise DuplicateEdgeError(u, p)
        seen.add(key)
        e_users.append(key[0])
        e_posts.append(key[1])
        explicit.append(float(edge[2]) if len(edge) > 2 and edge[2] is not None else np.nan)  # type: ignore[misc]

    eu = np.asarray(e_users, dtype=np.int64)
    ep = np.asarray(e_posts, dtype=np.int64)
    weights = np.asarray(explicit, dtype=float)
    pending = np.isnan(weights)
    if pending.any():
        weights[pending] = _pair_weights(u_feat[eu[pending]], p_feat[ep[pending]])
    if weights.size and (weights.min() < 0.0 or weights.max() > 1.0):
        raise GraphError("edge weights must lie in [0, 1]")

    graph = BipartiteGraph(
        user_ids=user_ids,
        post_ids=post_ids,
        edge_users=eu,
        edge_posts=ep,
        weights=weights,
        user_features=u_feat,
        post_features=p_feat,
        labels=label_arr,
    )
    logger.debug(
        f"Built graph with {graph.num_users} users, {graph.num_posts} posts, {graph.num_edges} edges"
    )
    return graph


def volume(g: BipartiteGraph, vertex_set: Iterable[str]) -> float:
    """Sum of weighted degrees over ``vertex_set``."""
    mask = g.vertex_mask(vertex_set)
    return float(g.degrees[mask].sum())


def cut(g: BipartiteGraph, vertex_set: Iterable[str]) -> float:
    """Total weight of edges with exactly one endpoint in ``vertex_set``."""
    mask = g.vertex_mask(vertex_set)
    return cut_mask(g, mask)


def cut_mask(g: BipartiteGraph, mask: np.ndarray) -> float:
    inside_u = mask[g.edge_users]
    inside_p = mask[g.num_users + g.edge_posts]
    return float(g.weights[inside_u != inside_p].sum())


def unweighted(g: BipartiteGraph) -> BipartiteGraph:
    """Copy of ``g`` with every edge weight set to 1."""
    return BipartiteGraph(
        user_ids=g.user_ids,
        post_ids=g.post_ids,
        edge_users=g.edge_users.copy(),
        edge_posts=g.edge_posts.copy(),
        weights=np.ones_like(g.weights),
        user_features=g.user_features,
        post_features=g.post_features,
        labels=g.labels,
    )


def with_added_edges(g: BipartiteGraph, pairs: Iterable[Tuple[str, str]]) -> BipartiteGraph:
    """New graph with extra (user, post) engagements weighted from features."""
    new_u: List[int] = []
    new_p: List[int] = []
    keys = set(g.edge_keys)
    for user_id, post_id in pairs:
        key = (g.user_index(user_id), g.post_index(post_id))
        if key in keys:
            raise DuplicateEdgeError(user_id, post_id)
        keys.add(key)
        new_u.append(key[0])
        new_p.append(key[1])
    if not new_u:
        return g
    eu = np.asarray(new_u, dtype=np.int64)
    ep = np.asarray(new_p, dtype=np.int64)
    w = _pair_weights(g.user_features[eu], g.post_features[ep])
    return BipartiteGraph(
        user_ids=g.user_ids,
        post_ids=g.post_ids,
        edge_users=np.concatenate([g.edge_users, eu]),
        edge_posts=np.concatenate([g.edge_posts, ep]),
        weights=np.concatenate([g.weights, w]),
        user_features=g.user_features,
        post_features=g.post_features,
        labels=g.labels,
    )


def relabel_users(g: BipartiteGraph, mapping: Mapping[str, str]) -> BipartiteGraph:
    """Rename users; structure, features and order are untouched."""
    renamed = tuple(mapping.get(u, u) for u in g.user_ids)
    if len(set(renamed)) != len(renamed) or set(renamed) & set(g.post_ids):
        raise GraphError("user relabeling must stay injective and disjoint from post ids")
    return BipartiteGraph(
        user_ids=renamed,
        post_ids=g.post_ids,
        edge_users=g.edge_users,
        edge_posts=g.edge_posts,
        weights=g.weights,
        user_features=g.user_features,
        post_features=g.post_features,
        labels=g.labels,
    )
