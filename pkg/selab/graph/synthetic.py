"""
Planted-community synthetic user-post graphs.

Each community has a feature centroid; a shared "fake axis" is added to the
features of fake posts and fake-leaning users (and subtracted for real ones),
so edge weights correlate with both community membership and label.
"""

import numpy as np

from selab.core.config_service import SyntheticSpec
from selab.core.exceptions import SyntheticSpecError
from selab.core.logger_manager import get_logger, log_execution_time

from .bipartite import BipartiteGraph, build_graph

logger = get_logger(__name__)


def _check_spec(spec: SyntheticSpec) -> None:
    for name in ("p_intra", "p_inter", "fake_fraction", "homophily", "fake_user_fraction"):
        value = getattr(spec, name)
        if not 0.0 <= value <= 1.0:
            raise SyntheticSpecError(f"{name} must lie in [0, 1], got {value}", {name: value})


def _unit(v: np.ndarray) -> np.ndarray:
    return v / np.linalg.norm(v)


@log_execution_time()
def generate_synthetic(spec: SyntheticSpec, seed: int) -> BipartiteGraph:
    """Generate a deterministic planted-community graph for ``seed``."""
    _check_spec(spec)
    rng = np.random.default_rng(seed)
    d = spec.feature_dim
    n_comm = spec.communities

    centroids = np.vstack([_unit(rng.normal(size=d)) for _ in range(n_comm)])
    fake_axis = _unit(rng.normal(size=d))

    user_comm = np.repeat(np.arange(n_comm), spec.users_per_community)
    post_comm = np.repeat(np.arange(n_comm), spec.posts_per_community)

    n_fake_users = int(round(spec.fake_user_fraction * spec.users_per_community))
    n_fake_posts = int(round(spec.fake_fraction * spec.posts_per_community))
    leaning = np.zeros(user_comm.size, dtype=np.int64)
    labels = np.zeros(post_comm.size, dtype=np.int64)
    for k in range(n_comm):
        users_k = np.flatnonzero(user_comm == k)
        posts_k = np.flatnonzero(post_comm == k)
        leaning[rng.permutation(users_k)[:n_fake_users]] = 1
        labels[rng.permutation(posts_k)[:n_fake_posts]] = 1

    user_sign = (2 * leaning - 1)[:, None]
    post_sign = (2 * labels - 1)[:, None]
    user_x = (
        centroids[user_comm]
        + spec.label_signal * user_sign * fake_axis
        + spec.noise * rng.normal(size=(user_comm.size, d))
    )
    post_x = (
        centroids[post_comm]
        + spec.post_signal * post_sign * fake_axis
        + spec.noise * rng.normal(size=(post_comm.size, d))
    )

    same = user_comm[:, None] == post_comm[None, :]
    base = np.where(same, spec.p_intra, spec.p_inter)
    match = leaning[:, None] == labels[None, :]
    factor = np.where(match, 1.0 + spec.homophily, 1.0 - spec.homophily)
    prob = np.clip(base * factor, 0.0, 1.0)
    draws = rng.random(prob.shape)
    eu, ep = np.nonzero(draws < prob)

    users = [f"u{i}" for i in range(user_comm.size)]
    posts = [f"p{j}" for j in range(post_comm.size)]
    g = build_graph(
        users=users,
        posts=posts,
        edges=[(users[u], posts[p]) for u, p in zip(eu.tolist(), ep.tolist())],
        user_features=user_x,
        post_features=post_x,
        labels=labels.tolist(),
    )
    logger.info(
        f"Synthetic graph: {g.num_users} users, {g.num_posts} posts, {g.num_edges} edges, "
        f"{int(labels.sum())} fake posts (seed={seed})"
    )
    return g


def planted_communities(spec: SyntheticSpec) -> dict:
    """Vertex id -> planted community index for a graph generated from ``spec``."""
    membership = {f"u{i}": i // spec.users_per_community for i in range(spec.user_count)}
    membership.update({f"p{j}": j // spec.posts_per_community for j in range(spec.post_count)})
    return membership
