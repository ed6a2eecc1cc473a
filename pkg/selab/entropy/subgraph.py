"""
Associated subgraph of a target post.
"""

from typing import Optional

import numpy as np

from selab.core.exceptions import EntropyError
from selab.core.logger_manager import get_logger
from selab.graph.bipartite import FAKE, BipartiteGraph, Subgraph

from .encoding_tree import EncodingTree

logger = get_logger(__name__)


def extract_subgraph(g: BipartiteGraph, t: EncodingTree, target_post: str, k: Optional[int] = None) -> Subgraph:
    """All users plus the posts of the target's level-``k`` community (default ``K - 1``).

    Posts sharing the target's label come first in their list with the target
    at index 0.
    """
    level = max(t.height - 1, 1) if k is None else k
    if not 1 <= level < max(t.height, 2):
        raise EntropyError(f"community level must satisfy 1 <= k < K, got k={level}, K={t.height}")
    post_idx = g.post_index(target_post)
    vertex = g.num_users + post_idx
    community = t.community_at(vertex, level)

    members = [v for v in t.node(community).vertices if g.is_post(v)]
    post_ids = [g.vertex_id(v) for v in members]
    target_is_fake = g.labels[post_idx] == FAKE

    fake = [p for p in post_ids if g.label_of(p) == FAKE]
    real = [p for p in post_ids if g.label_of(p) != FAKE]
    same = fake if target_is_fake else real
    same.remove(target_post)
    same.insert(0, target_post)

    in_community = np.zeros(g.num_posts, dtype=bool)
    in_community[[v - g.num_users for v in members]] = True
    keep = np.flatnonzero(in_community[g.edge_posts])
    edges = tuple(
        (g.user_ids[int(g.edge_users[e])], g.post_ids[int(g.edge_posts[e])], float(g.weights[e])) for e in keep
    )

    sub = Subgraph(
        parent=g,
        users=g.user_ids,
        posts=tuple(post_ids),
        edges=edges,
        fake_posts=tuple(fake),
        real_posts=tuple(real),
        target=target_post,
        community=community,
    )
    if len(post_ids) == 1:
        logger.debug(f"Target {target_post} is alone in its community")
    return sub
