"""
Encoding tree arena.

Nodes live in a list indexed by node id; node 0 is the root. Removed nodes
leave ``None`` holes until :meth:`EncodingTree.compact` renumbers the arena
breadth-first with children ordered by their smallest vertex. Leaves are
never removed, so leaf ids stay stable between compactions.
"""

from collections import deque
from dataclasses import dataclass, field
from typing import Any, Dict, Iterator, List, Optional, Sequence, Tuple, Union

import numpy as np

from selab.core.exceptions import TreeInvariantError, UnknownVertexError
from selab.graph.bipartite import BipartiteGraph, cut_mask

ROOT = 0
_REL_TOL = 1e-9

Vertex = Union[int, str]


@dataclass
class TreeNode:
    """One community of the hierarchy: its vertex set plus cached volume and cut."""

    id: int
    parent: Optional[int]
    vertices: Tuple[int, ...]
    volume: float
    cut: float
    children: List[int] = field(default_factory=list)

    @property
    def is_leaf(self) -> bool:
        return not self.children

    @property
    def key(self) -> int:
        """Smallest vertex index; orders siblings and breaks ties."""
        return self.vertices[0]


class EncodingTree:
    def __init__(self, vertex_ids: Sequence[str], nodes: List[Optional[TreeNode]], height: int):
        self.vertex_ids = tuple(vertex_ids)
        self.nodes = nodes
        self.height = height
        self._leaf_by_vertex: Optional[Dict[int, int]] = None
        self._index = {vid: i for i, vid in enumerate(self.vertex_ids)}

    # ------------------------------------------------------------------
    # construction
    # ------------------------------------------------------------------
    @classmethod
    def single_layer(cls, g: BipartiteGraph) -> "EncodingTree":
        """Root plus one singleton leaf per vertex."""
        degrees = g.degrees
        root = TreeNode(
            id=ROOT,
            parent=None,
            vertices=tuple(range(g.num_vertices)),
            volume=float(degrees.sum()),
            cut=0.0,
        )
        nodes: List[Optional[TreeNode]] = [root]
        for v in range(g.num_vertices):
            # a singleton's cut is its degree: the graph has no self-loops
            leaf = TreeNode(id=v + 1, parent=ROOT, vertices=(v,), volume=float(degrees[v]), cut=float(degrees[v]))
            nodes.append(leaf)
            root.children.append(leaf.id)
        return cls(g.vertex_ids, nodes, height=1)

    def add_node(self, parent: int, children: Sequence[int]) -> int:
        """Insert a node under ``parent`` that adopts ``children`` (all current children of ``parent``).

        Volume and cut must be set by the caller through :meth:`set_cached`.
        """
        parent_node = self.node(parent)
        adopted = [self.node(c) for c in children]
        for child in adopted:
            if child.parent != parent:
                raise TreeInvariantError(f"node {child.id} is not a child of {parent}")
        vertices = tuple(sorted(v for child in adopted for v in child.vertices))
        node_id = len(self.nodes)
        node = TreeNode(id=node_id, parent=parent, vertices=vertices, volume=0.0, cut=0.0)
        self.nodes.append(node)
        moved = set(children)
        parent_node.children = [c for c in parent_node.children if c not in moved]
        parent_node.children.append(node_id)
        for child in adopted:
            child.parent = node_id
            node.children.append(child.id)
        return node_id

    def set_cached(self, node_id: int, volume: float, cut: float) -> None:
        node = self.node(node_id)
        node.volume = volume
        node.cut = cut

    def remove_node(self, node_id: int) -> None:
        """Delete an intermediate node, promoting its children to its parent."""
        node = self.node(node_id)
        if node.parent is None:
            raise TreeInvariantError("the root cannot be removed")
        if node.is_leaf:
            raise TreeInvariantError(f"leaf {node_id} cannot be removed")
        parent = self.node(node.parent)
        parent.children = [c for c in parent.children if c != node_id]
        for child_id in node.children:
            self.node(child_id).parent = parent.id
            parent.children.append(child_id)
        self.nodes[node_id] = None

    def merge_nodes(self, keep: int, absorb: int, cut: float) -> None:
        """Fuse sibling ``absorb`` into ``keep``; the union's children are both child lists."""
        a = self.node(keep)
        b = self.node(absorb)
        if a.parent != b.parent or a.parent is None:
            raise TreeInvariantError(f"nodes {keep} and {absorb} are not siblings")
        parent = self.node(a.parent)
        parent.children = [c for c in parent.children if c != absorb]
        for child_id in b.children:
            self.node(child_id).parent = keep
            a.children.append(child_id)
        a.vertices = tuple(sorted(a.vertices + b.vertices))
        a.volume = a.volume + b.volume
        a.cut = cut
        self.nodes[absorb] = None

    def compact(self) -> None:
        """Renumber live nodes breadth-first, children sorted by smallest vertex."""
        order: List[TreeNode] = []
        queue = deque([self.node(ROOT)])
        while queue:
            node = queue.popleft()
            order.append(node)
            kids = sorted((self.node(c) for c in node.children), key=lambda n: n.key)
            queue.extend(kids)
        remap = {node.id: new_id for new_id, node in enumerate(order)}
        compacted: List[Optional[TreeNode]] = []
        for node in order:
            kids = sorted((self.node(c) for c in node.children), key=lambda n: n.key)
            compacted.append(
                TreeNode(
                    id=remap[node.id],
                    parent=None if node.parent is None else remap[node.parent],
                    vertices=node.vertices,
                    volume=node.volume,
                    cut=node.cut,
                    children=[remap[k.id] for k in kids],
                )
            )
        self.nodes = compacted
        self._leaf_by_vertex = None

    # ------------------------------------------------------------------
    # navigation
    # ------------------------------------------------------------------
    def node(self, node_id: int) -> TreeNode:
        node = self.nodes[node_id] if 0 <= node_id < len(self.nodes) else None
        if node is None:
            raise TreeInvariantError(f"no node with id {node_id}")
        return node

    @property
    def root(self) -> TreeNode:
        return self.node(ROOT)

    @property
    def total_volume(self) -> float:
        return self.root.volume

    @property
    def num_vertices(self) -> int:
        return len(self.vertex_ids)

    def live_nodes(self) -> Iterator[TreeNode]:
        return (n for n in self.nodes if n is not None)

    def non_root_nodes(self) -> Iterator[TreeNode]:
        return (n for n in self.live_nodes() if n.parent is not None)

    def __len__(self) -> int:
        return sum(1 for _ in self.live_nodes())

    def _vertex_index(self, vertex: Vertex) -> int:
        if isinstance(vertex, str):
            try:
                return self._index[vertex]
            except KeyError:
                raise UnknownVertexError(vertex) from None
        if not 0 <= vertex < self.num_vertices:
            raise UnknownVertexError(str(vertex))
        return int(vertex)

    def leaf_of(self, vertex: Vertex) -> int:
        if self._leaf_by_vertex is None:
            self._leaf_by_vertex = {n.vertices[0]: n.id for n in self.live_nodes() if n.is_leaf}
        return self._leaf_by_vertex[self._vertex_index(vertex)]

    def path_to_root(self, node_id: int) -> List[int]:
        """``[node_id, parent, ..., ROOT]``"""
        path = [node_id]
        current = self.node(node_id)
        while current.parent is not None:
            path.append(current.parent)
            current = self.node(current.parent)
        return path

    def ancestors(self, node_id: int) -> List[int]:
        """Strict ancestors, parent first, root last."""
        return self.path_to_root(node_id)[1:]

    def depth(self, node_id: int) -> int:
        return len(self.path_to_root(node_id)) - 1

    @property
    def max_depth(self) -> int:
        return max(self.depth(n.id) for n in self.live_nodes() if n.is_leaf)

    def community_at(self, vertex: Vertex, k: int) -> int:
        """Ancestor of the vertex's leaf at depth ``min(k, depth(leaf) - 1)``.

        A leaf hanging directly under the root is its own community.
        """
        leaf = self.leaf_of(vertex)
        top_down = list(reversed(self.path_to_root(leaf)))
        leaf_depth = len(top_down) - 1
        if leaf_depth <= 1:
            return leaf
        return top_down[max(1, min(k, leaf_depth - 1))]

    def leaves_under(self, node_id: int) -> Tuple[int, ...]:
        """Vertex indices covered by a node."""
        return self.node(node_id).vertices

    # ------------------------------------------------------------------
    # checks and serialization
    # ------------------------------------------------------------------
    def validate(self, g: BipartiteGraph) -> None:
        """Raise :class:`TreeInvariantError` on the first violated invariant."""
        if self.num_vertices != g.num_vertices:
            raise TreeInvariantError(f"tree covers {self.num_vertices} vertices, graph has {g.num_vertices}")
        root = self.root
        if root.parent is not None:
            raise TreeInvariantError("root has a parent")
        if root.vertices != tuple(range(g.num_vertices)):
            raise TreeInvariantError("root does not cover every vertex")

        seen_leaves: Dict[int, int] = {}
        scale = max(1.0, g.total_volume)
        for node in self.live_nodes():
            if node.is_leaf:
                if len(node.vertices) != 1:
                    raise TreeInvariantError(f"leaf {node.id} is not a singleton")
                v = node.vertices[0]
                if v in seen_leaves:
                    raise TreeInvariantError(f"vertex {self.vertex_ids[v]} appears in two leaves")
                seen_leaves[v] = node.id
                if self.depth(node.id) > self.height:
                    raise TreeInvariantError(f"leaf {node.id} is deeper than height {self.height}")
            else:
                union: List[int] = []
                for child_id in node.children:
                    child = self.node(child_id)
                    if child.parent != node.id:
                        raise TreeInvariantError(f"node {child_id} does not point back to {node.id}")
                    union.extend(child.vertices)
                if len(union) != len(set(union)) or tuple(sorted(union)) != node.vertices:
                    raise TreeInvariantError(f"children of node {node.id} do not partition its vertices")

            mask = np.zeros(g.num_vertices, dtype=bool)
            mask[list(node.vertices)] = True
            volume = float(g.degrees[mask].sum())
            cut = cut_mask(g, mask)
            if abs(volume - node.volume) > _REL_TOL * scale or abs(cut - node.cut) > _REL_TOL * scale:
                raise TreeInvariantError(
                    f"cached volume/cut of node {node.id} are stale",
                    {"node": node.id, "volume": [node.volume, volume], "cut": [node.cut, cut]},
                )
        if len(seen_leaves) != g.num_vertices:
            raise TreeInvariantError("not every vertex has a leaf")

    def to_dict(self) -> Dict[str, Any]:
        return {
            "height": self.height,
            "nodes": [
                {
                    "id": n.id,
                    "parent": n.parent,
                    "vertices": [self.vertex_ids[v] for v in n.vertices],
                    "volume": n.volume,
                    "cut": n.cut,
                }
                for n in self.live_nodes()
            ],
        }

    @classmethod
    def from_dict(cls, doc: Dict[str, Any], g: BipartiteGraph) -> "EncodingTree":
        try:
            raw_nodes = sorted(doc["nodes"], key=lambda n: n["id"])
            height = int(doc["height"])
        except (KeyError, TypeError) as e:
            raise TreeInvariantError(f"malformed tree document: {e}") from e
        if [n["id"] for n in raw_nodes] != list(range(len(raw_nodes))):
            raise TreeInvariantError("tree node ids must be 0..n-1")
        nodes: List[Optional[TreeNode]] = [
            TreeNode(
                id=n["id"],
                parent=n["parent"],
                vertices=tuple(sorted(g.vertex_index(v) for v in n["vertices"])),
                volume=float(n["volume"]),
                cut=float(n["cut"]),
            )
            for n in raw_nodes
        ]
        for node in nodes:
            if node is not None and node.parent is not None:
                nodes[node.parent].children.append(node.id)  # type: ignore[union-attr]
        tree = cls(g.vertex_ids, nodes, height=height)
        tree.validate(g)
        return tree
