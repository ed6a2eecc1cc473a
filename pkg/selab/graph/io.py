"""
Graph ingestion and serialization.

CSV contract:
    edges:    user_id,post_id[,weight]
    labels:   post_id,label
    features: id,f0,f1,...,f{d-1}   (users and posts in one file)

JSON document: {users, posts, edges: [[user, post, weight]], features: {id: [...]}, labels: {post: 0|1}}
"""

import json
from pathlib import Path
from typing import Any, Dict, Union

import pandas as pd

from selab.core.exceptions import GraphError
from selab.core.logger_manager import get_logger

from .bipartite import BipartiteGraph, build_graph

logger = get_logger(__name__)

PathLike = Union[str, Path]


def graph_to_dict(g: BipartiteGraph) -> Dict[str, Any]:
    features: Dict[str, Any] = {}
    for i, uid in enumerate(g.user_ids):
        features[uid] = g.user_features[i].tolist()
    for i, pid in enumerate(g.post_ids):
        features[pid] = g.post_features[i].tolist()
    return {
        "users": list(g.user_ids),
        "posts": list(g.post_ids),
        "edges": [[u, p, w] for u, p, w in g.edges()],
        "features": features,
        "labels": {pid: int(label) for pid, label in zip(g.post_ids, g.labels.tolist())},
    }


def graph_from_dict(doc: Dict[str, Any]) -> BipartiteGraph:
    try:
        users = doc["users"]
        posts = doc["posts"]
        features = doc["features"]
        return build_graph(
            users=users,
            posts=posts,
            edges=[tuple(e) for e in doc["edges"]],
            user_features={u: features[u] for u in users},
            post_features={p: features[p] for p in posts},
            labels=doc["labels"],
        )
    except KeyError as e:
        raise GraphError(f"graph document is missing {e}") from e


def save_graph(g: BipartiteGraph, path: PathLike) -> Path:
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    target.write_text(json.dumps(graph_to_dict(g), indent=1), encoding="utf-8")
    logger.info(f"Graph written to {target}")
    return target


def load_graph(path: PathLike) -> BipartiteGraph:
    source = Path(path)
    try:
        doc = json.loads(source.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as e:
        raise GraphError(f"cannot read graph {source}: {e}") from e
    return graph_from_dict(doc)


def load_graph_csv(edges_csv: PathLike, labels_csv: PathLike, features_csv: PathLike) -> BipartiteGraph:
    """Ingest the edge-list / label / feature CSV triple."""
    edges = pd.read_csv(edges_csv, dtype={"user_id": str, "post_id": str})
    labels = pd.read_csv(labels_csv, dtype={"post_id": str})
    feats = pd.read_csv(features_csv, dtype={"id": str})

    for frame, needed, name in (
        (edges, ["user_id", "post_id"], "edges"),
        (labels, ["post_id", "label"], "labels"),
        (feats, ["id"], "features"),
    ):
        missing = [c for c in needed if c not in frame.columns]
        if missing:
            raise GraphError(f"{name} CSV is missing columns {missing}")

    users = list(dict.fromkeys(edges["user_id"]))
    posts = list(dict.fromkeys(list(edges["post_id"]) + list(labels["post_id"])))
    feature_cols = [c for c in feats.columns if c != "id"]
    vectors = {row_id: row for row_id, row in zip(feats["id"], feats[feature_cols].to_numpy(dtype=float))}

    if "weight" in edges.columns:
        edge_rows = list(zip(edges["user_id"], edges["post_id"], edges["weight"].astype(float)))
    else:
        edge_rows = list(zip(edges["user_id"], edges["post_id"]))

    g = build_graph(
        users=users,
        posts=posts,
        edges=edge_rows,
        user_features=vectors,
        post_features=vectors,
        labels=dict(zip(labels["post_id"], labels["label"].astype(int))),
    )
    logger.info(f"Ingested {g.num_edges} edges from {edges_csv}")
    return g
