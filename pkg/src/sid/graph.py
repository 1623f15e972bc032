"""Directed acyclic graphs with a designated selection node.

Nodes are named by identifier strings and interned to dense integer
indices in declaration order. All graphs are immutable; surgery returns a
new graph.
"""

from __future__ import annotations

import heapq
import re
import warnings
from collections import deque
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

NAME_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*\Z")

# traversal directions for the reachability search
_UP = 0  # arrived from a child, moving against edge direction
_DOWN = 1  # arrived from a parent, moving along edge direction


class GraphError(ValueError):
    """Malformed graph, unknown node, or invalid set arguments."""


class Dag:
    """Immutable DAG over named nodes.

    Parameters
    ----------
    nodes : iterable of str
        Node names; edge endpoints not listed here are appended in order of
        first appearance.
    edges : iterable of (str, str)
        Directed edges ``(parent, child)``. Duplicates are collapsed with a
        ``UserWarning``; self-loops and cycles raise :class:`GraphError`.
    """

    def __init__(self, nodes: Iterable[str] = (), edges: Iterable[tuple[str, str]] = ()):
        names: list[str] = []
        index: dict[str, int] = {}

        def intern(name: str) -> int:
            if name not in index:
                if not isinstance(name, str) or not NAME_RE.match(name):
                    raise GraphError(f"invalid node name {name!r}")
                index[name] = len(names)
                names.append(name)
            return index[name]

        for name in nodes:
            intern(name)
        seen: set[tuple[int, int]] = set()
        edge_list: list[tuple[int, int]] = []
        for u, v in edges:
            iu, iv = intern(u), intern(v)
            if iu == iv:
                raise GraphError(f"self-loop on {u}")
            if (iu, iv) in seen:
                warnings.warn(f"duplicate edge {u} -> {v} collapsed", stacklevel=2)
                continue
            seen.add((iu, iv))
            edge_list.append((iu, iv))

        n = len(names)
        parents: list[list[int]] = [[] for _ in range(n)]
        children: list[list[int]] = [[] for _ in range(n)]
        for iu, iv in edge_list:
            parents[iv].append(iu)
            children[iu].append(iv)
        self._names = tuple(names)
        self._index = index
        self._parents = tuple(tuple(sorted(p)) for p in parents)
        self._children = tuple(tuple(sorted(c)) for c in children)
        self._edges = frozenset(edge_list)
        self._topo = self._toposort()

    def _toposort(self) -> tuple[int, ...]:
        # Kahn's algorithm; ties broken by declaration index for determinism
        indeg = [len(p) for p in self._parents]
        ready = [i for i, d in enumerate(indeg) if d == 0]
        heapq.heapify(ready)
        order = []
        while ready:
            i = heapq.heappop(ready)
            order.append(i)
            for c in self._children[i]:
                indeg[c] -= 1
                if indeg[c] == 0:
                    heapq.heappush(ready, c)
        if len(order) != len(self._names):
            stuck = sorted(self._names[i] for i, d in enumerate(indeg) if d > 0)
            raise GraphError(f"graph has a cycle through {', '.join(stuck)}")
        return tuple(order)

    # -- basic accessors -------------------------------------------------

    @property
    def nodes(self) -> tuple[str, ...]:
        return self._names

    @property
    def edges(self) -> frozenset[tuple[str, str]]:
        return frozenset((self._names[u], self._names[v]) for u, v in self._edges)

    def __len__(self) -> int:
        return len(self._names)

    def __contains__(self, name: object) -> bool:
        return name in self._index

    def __repr__(self) -> str:
        edges = ", ".join(f"{u}->{v}" for u, v in sorted(self.edges, key=self._edge_key))
        return f"{type(self).__name__}(nodes={list(self._names)}, edges=[{edges}])"

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Dag):
            return NotImplemented
        return set(self._names) == set(other._names) and self.edges == other.edges

    def __hash__(self) -> int:
        return hash((frozenset(self._names), self.edges))

    def _edge_key(self, e: tuple[str, str]) -> tuple[int, int]:
        return self._index[e[0]], self._index[e[1]]

    @property
    def num_edges(self) -> int:
        return len(self._edges)

    def index(self, name: str) -> int:
        try:
            return self._index[name]
        except KeyError:
            raise GraphError(f"unknown node {name!r}") from None

    def indices(self, names: Iterable[str]) -> list[int]:
        if isinstance(names, str):
            names = [names]
        return [self.index(n) for n in names]

    def parents(self, name: str) -> tuple[str, ...]:
        return tuple(self._names[i] for i in self._parents[self.index(name)])

    def children(self, name: str) -> tuple[str, ...]:
        return tuple(self._names[i] for i in self._children[self.index(name)])

    def has_edge(self, u: str, v: str) -> bool:
        return (self.index(u), self.index(v)) in self._edges

    def topological_order(self) -> tuple[str, ...]:
        return tuple(self._names[i] for i in self._topo)

    def sort_nodes(self, names: Iterable[str], *, topological: bool = False) -> tuple[str, ...]:
        """Order `names` by declaration index, or topologically."""
        if topological:
            rank = {v: r for r, v in enumerate(self._topo)}
            key = lambda n: rank[self.index(n)]  # noqa: E731
        else:
            key = self.index
        return tuple(sorted(set(names), key=key))

    def with_edges(self, edges: Iterable[tuple[str, str]]) -> "Dag":
        """Same node set, different edges."""
        return Dag(self._names, edges)


class AugmentedDag(Dag):
    """A DAG with a designated childless selection node.

    The observed variables are every node except the selection node.
    """

    def __init__(
        self,
        nodes: Iterable[str] = (),
        edges: Iterable[tuple[str, str]] = (),
        selection: str = "S",
    ):
        super().__init__(nodes, edges)
        if selection not in self._index:
            raise GraphError(f"selection node {selection!r} is not in the graph")
        kids = self.children(selection)
        if kids:
            raise GraphError(
                f"selection node {selection} must be childless, has children {', '.join(kids)}"
            )
        self.selection = selection

    @classmethod
    def from_dag(cls, dag: Dag, selection: str = "S") -> "AugmentedDag":
        return cls(dag.nodes, dag.edges, selection=selection)

    @property
    def observed(self) -> tuple[str, ...]:
        return tuple(n for n in self._names if n != self.selection)

    def with_edges(self, edges: Iterable[tuple[str, str]]) -> "AugmentedDag":
        return AugmentedDag(self._names, edges, selection=self.selection)

    def __eq__(self, other: object) -> bool:
        eq = super().__eq__(other)
        if eq is NotImplemented or not eq:
            return eq
        return getattr(other, "selection", None) == self.selection

    __hash__ = Dag.__hash__


# -- parsing ---------------------------------------------------------------


def parse_graph(text: str) -> Dag:
    """Parse the line-oriented graph format.

    ``#`` starts a comment, ``node NAME`` declares a node and ``A -> B``
    declares an edge (auto-declaring both endpoints).
    """
    nodes: list[str] = []
    edges: list[tuple[str, str]] = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "->" in line:
            parts = [p.strip() for p in line.split("->")]
            if len(parts) != 2 or not all(NAME_RE.match(p) for p in parts):
                raise GraphError(f"line {lineno}: malformed edge {raw.strip()!r}")
            edges.append((parts[0], parts[1]))
            continue
        tokens = line.split()
        if len(tokens) == 2 and tokens[0] == "node" and NAME_RE.match(tokens[1]):
            nodes.append(tokens[1])
            continue
        raise GraphError(f"line {lineno}: cannot parse {raw.strip()!r}")
    for u, v in edges:
        for name in (u, v):
            if name not in nodes:
                nodes.append(name)
    return Dag(nodes, edges)


def load_graph(source: str | Path, selection: str = "S") -> AugmentedDag:
    """Read a graph file and designate `selection` as the selection node."""
    text = Path(source).read_text(encoding="utf-8")
    return AugmentedDag.from_dag(parse_graph(text), selection=selection)


def format_graph(g: Dag) -> str:
    lines = [f"node {n}" for n in g.nodes]
    lines += [f"{u} -> {v}" for u, v in sorted(g.edges, key=g._edge_key)]
    return "\n".join(lines) + "\n"


# -- ancestors and surgery ---------------------------------------------------


def _ancestor_flags(g: Dag, seed: Iterable[int], stats: dict | None = None) -> list[bool]:
    flags = [False] * len(g)
    stack = list(seed)
    for i in stack:
        flags[i] = True
    visits = 0
    while stack:
        v = stack.pop()
        visits += 1
        for p in g._parents[v]:
            visits += 1
            if not flags[p]:
                flags[p] = True
                stack.append(p)
    if stats is not None:
        stats["visits"] = stats.get("visits", 0) + visits
    return flags


def ancestors(g: Dag, seed: Iterable[str]) -> frozenset[str]:
    """Inclusive ancestor closure of `seed`."""
    flags = _ancestor_flags(g, g.indices(seed))
    return frozenset(g._names[i] for i, f in enumerate(flags) if f)


def descendants(g: Dag, seed: Iterable[str]) -> frozenset[str]:
    flags = [False] * len(g)
    stack = g.indices(seed)
    for i in stack:
        flags[i] = True
    while stack:
        v = stack.pop()
        for c in g._children[v]:
            if not flags[c]:
                flags[c] = True
                stack.append(c)
    return frozenset(g._names[i] for i, f in enumerate(flags) if f)


def edge_surgery(g: Dag, remove_incoming: Iterable[str] = (), remove_outgoing: Iterable[str] = ()) -> Dag:
    """Delete edges into `remove_incoming` and out of `remove_outgoing`.

    The node set is unchanged. The result has the same type as `g`, so an
    augmented graph keeps its selection node.
    """
    inc = set(g.indices(remove_incoming))
    out = set(g.indices(remove_outgoing))
    kept = [
        (g._names[u], g._names[v])
        for u, v in sorted(g._edges)
        if v not in inc and u not in out
    ]
    return g.with_edges(kept)


# -- d-separation --------------------------------------------------------------


def _check_disjoint(g: Dag, *sets: Iterable[str]) -> list[list[int]]:
    idx = [sorted(set(g.indices(s))) for s in sets]
    for a in range(len(idx)):
        for b in range(a + 1, len(idx)):
            common = set(idx[a]) & set(idx[b])
            if common:
                names = ", ".join(g._names[i] for i in sorted(common))
                raise GraphError(f"node sets overlap on {names}")
    return idx


def _reach(g: Dag, sources: Sequence[int], given: Sequence[int], stats: dict | None = None):
    """Breadth-first search over (node, direction) states.

    Returns the predecessor map of visited states. A state ``(v, UP)`` means
    the trail entered `v` from one of its children; ``(v, DOWN)`` from one of
    its parents. Colliders pass only when they are ancestors of `given`,
    non-colliders only when they are outside `given`.
    """
    in_given = [False] * len(g)
    for i in given:
        in_given[i] = True
    anc = _ancestor_flags(g, given, stats)
    pred: dict[tuple[int, int], tuple[int, int] | None] = {}
    queue: deque[tuple[int, int]] = deque()
    for s in sources:
        pred[(s, _UP)] = None
        queue.append((s, _UP))
    visits = 0
    while queue:
        state = queue.popleft()
        v, d = state
        visits += 1
        nxt: list[tuple[int, int]] = []
        if d == _UP:
            if not in_given[v]:
                nxt += [(p, _UP) for p in g._parents[v]]
                nxt += [(c, _DOWN) for c in g._children[v]]
        else:
            if not in_given[v]:
                nxt += [(c, _DOWN) for c in g._children[v]]
            if anc[v]:
                nxt += [(p, _UP) for p in g._parents[v]]
        visits += len(nxt)
        for s2 in nxt:
            if s2 not in pred:
                pred[s2] = state
                queue.append(s2)
    if stats is not None:
        stats["visits"] = stats.get("visits", 0) + visits
    return pred


def d_separated(
    g: Dag,
    x: Iterable[str],
    y: Iterable[str],
    given: Iterable[str] = (),
    *,
    stats: dict | None = None,
) -> bool:
    """True iff `given` blocks every path between `x` and `y` in `g`.

    Linear-time reachability over (node, direction) states. Pass a dict as
    `stats` to collect the number of node/edge visits under ``"visits"``.
    """
    xs, ys, zs = _check_disjoint(g, x, y, given)
    if not xs or not ys:
        return True
    pred = _reach(g, xs, zs, stats)
    return not any((t, d) in pred for t in ys for d in (_UP, _DOWN))


def _trail(pred, end) -> list[int]:
    out = []
    state = end
    while state is not None:
        out.append(state[0])
        state = pred[state]
    return out[::-1]


def find_active_path(g: Dag, x: Iterable[str], y: Iterable[str], given: Iterable[str] = ()) -> tuple[str, ...] | None:
    """A shortest active path from some node of `x` to some node of `y`.

    Returns None when `x` and `y` are d-separated by `given`.
    """
    xs, ys, zs = _check_disjoint(g, x, y, given)
    if not xs or not ys:
        return None
    pred = _reach(g, xs, zs)
    targets = set(ys)
    hits = [s for s in pred if s[0] in targets]
    if not hits:
        return None
    best = min((_trail(pred, s) for s in hits), key=len)
    if len(set(best)) == len(best):
        return tuple(g._names[i] for i in best)
    # the BFS trail revisited a node; fall back to an explicit simple-path search
    return _shortest_simple_active_path(g, xs, targets, zs)


def _shortest_simple_active_path(g: Dag, xs, targets, zs) -> tuple[str, ...] | None:
    in_given = set(zs)
    anc = _ancestor_flags(g, zs)
    nbrs = [set(g._parents[v]) | set(g._children[v]) for v in range(len(g))]
    queue = deque([(s,) for s in xs])
    while queue:
        path = queue.popleft()
        v = path[-1]
        for w in sorted(nbrs[v]):
            if w in path:
                continue
            if len(path) >= 2:
                u = path[-2]
                collider = (u, v) in g._edges and (w, v) in g._edges
                if collider and not anc[v]:
                    continue
                if not collider and v in in_given:
                    continue
            new = path + (w,)
            if w in targets:
                return tuple(g._names[i] for i in new)
            queue.append(new)
    return None


def is_blocked(g: Dag, path: Sequence[str], given: Iterable[str]) -> bool:
    """Apply the blocking definition to one path, literally.

    The path is blocked if some interior node is a collider outside
    Anc(given), or a non-collider inside `given`.
    """
    given = set(given)
    anc_given = ancestors(g, given) if given else frozenset()
    for i in range(1, len(path) - 1):
        prev, node, nxt = path[i - 1], path[i], path[i + 1]
        collider = g.has_edge(prev, node) and g.has_edge(nxt, node)
        if collider and node not in anc_given:
            return True
        if not collider and node in given:
            return True
    return False


def simple_paths(g: Dag, source: str, target: str):
    """All simple paths between two nodes in the skeleton of `g`."""
    nbrs = {v: set(g.parents(v)) | set(g.children(v)) for v in g.nodes}
    stack = [(source, (source,))]
    while stack:
        v, path = stack.pop()
        if v == target:
            yield path
            continue
        for w in sorted(nbrs[v]):
            if w not in path:
                stack.append((w, path + (w,)))


def d_separated_bruteforce(g: Dag, x: Iterable[str], y: Iterable[str], given: Iterable[str] = ()) -> bool:
    """Path-enumeration d-separation; exponential, for small graphs only."""
    xs, ys, zs = _check_disjoint(g, x, y, given)
    names = g._names
    given_names = [names[i] for i in zs]
    for a in xs:
        for b in ys:
            for path in simple_paths(g, names[a], names[b]):
                if not is_blocked(g, path, given_names):
                    return False
    return True


def render_path(g: Dag, path: Sequence[str]) -> str:
    """Render a path with edge directions, e.g. ``X <- Z -> W <- Y``."""
    if not path:
        return ""
    out = [path[0]]
    for u, v in zip(path, path[1:]):
        out.append("->" if g.has_edge(u, v) else "<-")
        out.append(v)
    return " ".join(out)


# -- random graphs -----------------------------------------------------------


def random_augmented_dag(
    rng: np.random.Generator,
    n_observed: int,
    edge_prob: float = 0.3,
    selection: str = "S",
    prefix: str = "V",
) -> AugmentedDag:
    """Erdős–Rényi DAG on a random topological order plus a selection node.

    The selection node gets a non-empty random subset of the observed nodes
    as parents.
    """
    names = [f"{prefix}{i}" for i in range(n_observed)]
    order = rng.permutation(n_observed)
    edges = []
    for a in range(n_observed):
        for b in range(a + 1, n_observed):
            if rng.random() < edge_prob:
                edges.append((names[order[a]], names[order[b]]))
    if n_observed:
        k = int(rng.integers(1, n_observed + 1))
        for i in rng.choice(n_observed, size=k, replace=False):
            edges.append((names[i], selection))
    return AugmentedDag(names + [selection], edges, selection=selection)
