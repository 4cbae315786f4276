"""Gain graphs: quotients of symmetric graphs.

A gain graph is a directed multigraph whose edges carry group elements
(gains, stored as generator exponents) and whose vertices are split into
*fixed* vertices (stabilized by the whole symmetry group) and *free* vertices
(trivial stabilizer).  It is the quotient of a symmetric *covering* graph;
``lift`` reconstructs the covering, ``quotient`` goes the other way.

Everything here is immutable: operations return new graphs.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Hashable, Iterable, Sequence

from .groups import CyclicGroup


class GainGraphError(ValueError):
    """Structural misuse: unknown vertices, duplicate ids, bad arguments."""


class ValidationError(ValueError):
    """A gain graph violating the quotient-graph conditions."""

    def __init__(self, report: "ValidationReport"):
        super().__init__(str(report))
        self.report = report


@dataclass(frozen=True)
class ValidationReport:
    """First violated quotient-graph condition, with the offenders."""

    clause: str
    vertices: tuple = ()
    edges: tuple = ()

    def __str__(self) -> str:
        parts = [self.clause]
        if self.vertices:
            parts.append("vertices: " + ", ".join(map(str, self.vertices)))
        if self.edges:
            parts.append("edges: " + ", ".join(map(str, self.edges)))
        return "; ".join(parts)


@dataclass(frozen=True)
class Edge:
    """A directed edge with a gain exponent.

    Reversing the direction and inverting the gain describes the same
    underlying undirected object; loops with gains g and -g likewise coincide.
    """

    id: str
    tail: Hashable
    head: Hashable
    gain: int

    @property
    def is_loop(self) -> bool:
        return self.tail == self.head

    def other(self, v) -> Hashable:
        return self.head if v == self.tail else self.tail

    def gain_from(self, v, k: int) -> int:
        """Gain when traversed starting at endpoint v (for loops: as stored)."""
        if v == self.tail:
            return self.gain % k
        return (-self.gain) % k


class GainGraph:
    """Immutable gain graph over a cyclic group.

    Vertices keep insertion order (this is the deterministic order used for
    matrices, canonical forms and reports).  Edge ids are stable and unique.
    """

    def __init__(
        self,
        group: CyclicGroup,
        vertices: Sequence[tuple[Hashable, bool]],
        edges: Sequence[tuple] = (),
    ):
        self.group = group
        seen = set()
        verts = []
        fixed = set()
        for v, is_fixed in vertices:
            if v in seen:
                raise GainGraphError(f"duplicate vertex id {v!r}")
            seen.add(v)
            verts.append(v)
            if is_fixed:
                fixed.add(v)
        self._vertices: tuple = tuple(verts)
        self._fixed: frozenset = frozenset(fixed)
        self._index = {v: i for i, v in enumerate(verts)}

        k = group.order
        edge_list = []
        eids = set()
        for spec in edges:
            if isinstance(spec, Edge):
                e = Edge(spec.id, spec.tail, spec.head, spec.gain % k)
            elif len(spec) == 4:
                eid, tail, head, gain = spec
                e = Edge(str(eid), tail, head, gain % k)
            else:
                tail, head, gain = spec
                e = Edge(f"e{len(edge_list)}", tail, head, gain % k)
            if e.tail not in seen or e.head not in seen:
                raise GainGraphError(f"edge {e.id} references unknown vertex")
            if e.id in eids:
                raise GainGraphError(f"duplicate edge id {e.id!r}")
            eids.add(e.id)
            edge_list.append(e)
        self._edges: tuple[Edge, ...] = tuple(edge_list)
        self._adj: dict = {v: [] for v in verts}
        for e in self._edges:
            self._adj[e.tail].append(e)
            if not e.is_loop:
                self._adj[e.head].append(e)

    # -- basic accessors ---------------------------------------------------

    @property
    def vertices(self) -> tuple:
        return self._vertices

    @property
    def edges(self) -> tuple[Edge, ...]:
        return self._edges

    @property
    def fixed_vertices(self) -> frozenset:
        return self._fixed

    @property
    def free_vertices(self) -> tuple:
        return tuple(v for v in self._vertices if v not in self._fixed)

    def is_fixed(self, v) -> bool:
        return v in self._fixed

    def vertex_index(self, v) -> int:
        return self._index[v]

    def edges_at(self, v) -> list[Edge]:
        return self._adj[v]

    def degree(self, v) -> int:
        """Degree with loops counted twice."""
        d = 0
        for e in self._adj[v]:
            d += 2 if e.is_loop else 1
        return d

    def neighbours(self, v) -> set:
        out = set()
        for e in self._adj[v]:
            if e.is_loop:
                out.add(v)
            else:
                out.add(e.other(v))
        return out

    def edge_by_id(self, eid: str) -> Edge:
        for e in self._edges:
            if e.id == eid:
                return e
        raise GainGraphError(f"no edge with id {eid!r}")

    def __repr__(self) -> str:
        return (
            f"GainGraph(k={self.group.order} {self.group.geometry}, "
            f"|V|={len(self._vertices)} (fixed {len(self._fixed)}), "
            f"|E|={len(self._edges)})"
        )

    def key(self) -> tuple:
        """Exact identity (not up to equivalence): hashable snapshot."""
        return (
            self.group.order,
            self.group.geometry,
            self._vertices,
            self._fixed,
            tuple((e.tail, e.head, e.gain) for e in self._edges),
        )

    # -- derived edge sets ---------------------------------------------------

    def free_edges(self) -> tuple[Edge, ...]:
        """Edges whose covering orbit has trivial stabilizer.

        Excluded: edges between two fixed vertices, and (for even k) loops
        with the half-turn gain k/2, whose covering edges are stabilized by
        the half turn.
        """
        half = self.group.half_turn
        out = []
        for e in self._edges:
            if e.tail in self._fixed and e.head in self._fixed:
                continue
            if e.is_loop and half is not None and e.gain == half:
                continue
            out.append(e)
        return tuple(out)

    def non_free_edges(self) -> tuple[Edge, ...]:
        free = set(e.id for e in self.free_edges())
        return tuple(e for e in self._edges if e.id not in free)

    # -- validation ----------------------------------------------------------

    def validate(self) -> ValidationReport | None:
        """First violated quotient-graph condition, or None if valid.

        Conditions: no loop at a fixed vertex; no parallel edges meeting a
        fixed vertex; fixed-fixed edges carry gain id; parallel edges are
        distinguishable (same direction: distinct gains; opposite directions:
        gains not inverse to each other); loops carry non-identity gains.
        """
        k = self.group.order
        for e in self._edges:
            if e.is_loop:
                if e.tail in self._fixed:
                    return ValidationReport("loop at fixed vertex", (e.tail,), (e.id,))
                if e.gain % k == 0:
                    return ValidationReport("loop with identity gain", (e.tail,), (e.id,))
            elif e.tail in self._fixed and e.head in self._fixed and e.gain % k != 0:
                return ValidationReport(
                    "edge between fixed vertices with non-identity gain",
                    (e.tail, e.head),
                    (e.id,),
                )
        by_pair: dict = {}
        for e in self._edges:
            pair = frozenset((e.tail, e.head))
            by_pair.setdefault(pair, []).append(e)
        for pair, group_edges in by_pair.items():
            if len(group_edges) < 2:
                continue
            if pair & self._fixed:
                ids = tuple(e.id for e in group_edges)
                return ValidationReport("parallel edges at fixed vertex", tuple(pair), ids)
            anchor = group_edges[0].tail
            if len(pair) == 1:
                # parallel loops: gains must differ and not be mutually inverse
                for i, e in enumerate(group_edges):
                    for f in group_edges[i + 1 :]:
                        if e.gain % k == f.gain % k or (e.gain + f.gain) % k == 0:
                            return ValidationReport(
                                "indistinguishable parallel loops", tuple(pair), (e.id, f.id)
                            )
            else:
                seen_gains = set()
                for e in group_edges:
                    g = e.gain_from(anchor, k)
                    if g in seen_gains:
                        return ValidationReport(
                            "indistinguishable parallel edges",
                            tuple(pair),
                            tuple(x.id for x in group_edges),
                        )
                    seen_gains.add(g)
        return None

    def check(self) -> "GainGraph":
        report = self.validate()
        if report is not None:
            raise ValidationError(report)
        return self

    # -- functional updates ---------------------------------------------------

    def _vertex_spec(self) -> list[tuple]:
        return [(v, v in self._fixed) for v in self._vertices]

    def _edge_spec(self) -> list[tuple]:
        return [(e.id, e.tail, e.head, e.gain) for e in self._edges]

    def with_edges(self, edges: Iterable[tuple]) -> "GainGraph":
        return GainGraph(self.group, self._vertex_spec(), list(edges))

    def add_vertex(self, v, fixed: bool = False) -> "GainGraph":
        return GainGraph(self.group, self._vertex_spec() + [(v, fixed)], self._edge_spec())

    def add_edges(self, new_edges: Iterable[tuple]) -> "GainGraph":
        return GainGraph(self.group, self._vertex_spec(), self._edge_spec() + list(new_edges))

    def remove_edges(self, edge_ids: Iterable[str]) -> "GainGraph":
        drop = set(edge_ids)
        keep = [s for s in self._edge_spec() if s[0] not in drop]
        return GainGraph(self.group, self._vertex_spec(), keep)

    def remove_vertex(self, v) -> "GainGraph":
        """Remove a vertex together with all incident edges."""
        verts = [(u, u in self._fixed) for u in self._vertices if u != v]
        keep = [s for s in self._edge_spec() if s[1] != v and s[2] != v]
        return GainGraph(self.group, verts, keep)

    def fresh_edge_id(self, base: str = "e") -> str:
        used = {e.id for e in self._edges}
        i = len(self._edges)
        while f"{base}{i}" in used:
            i += 1
        return f"{base}{i}"

    def fresh_vertex_id(self, base: str = "w"):
        used = set(self._vertices)
        i = len(self._vertices)
        while f"{base}{i}" in used:
            i += 1
        return f"{base}{i}"

    # -- switching and equivalence ---------------------------------------------

    def switch(self, v, gamma: int) -> "GainGraph":
        """Re-choose the orbit representative of free vertex v by gamma.

        Edges directed out of v gain a left factor gamma, edges into v a right
        factor gamma^{-1}; loops at v are unchanged (conjugation is trivial in
        an abelian group).
        """
        if v in self._fixed:
            raise GainGraphError(f"cannot switch at fixed vertex {v!r}")
        if v not in self._index:
            raise GainGraphError(f"unknown vertex {v!r}")
        k = self.group.order
        out = []
        for e in self._edges:
            g = e.gain
            if not e.is_loop:
                if e.tail == v:
                    g = (gamma + g) % k
                elif e.head == v:
                    g = (g - gamma) % k
            out.append((e.id, e.tail, e.head, g))
        return GainGraph(self.group, self._vertex_spec(), out)

    def with_gain(self, edge_id: str, gain: int) -> "GainGraph":
        out = [
            (e.id, e.tail, e.head, gain % self.group.order if e.id == edge_id else e.gain)
            for e in self._edges
        ]
        return GainGraph(self.group, self._vertex_spec(), out)

    def normalize_forest_identity(self, forest_edge_ids: Iterable[str]) -> "GainGraph":
        """Equivalent graph whose gains vanish on the given forest.

        Tree edges between free vertices are cleared by switchings; edges
        meeting a fixed vertex are re-gained directly (their gain is a
        bookkeeping artefact of representative choice).  Rejects edge sets
        containing a cycle.
        """
        ids = set(forest_edge_ids)
        chosen = [e for e in self._edges if e.id in ids]
        if len(chosen) < len(ids):
            missing = ids - {e.id for e in chosen}
            raise GainGraphError(f"unknown forest edges: {sorted(missing)}")
        parent: dict = {v: v for v in self._vertices}

        def find(x):
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        for e in chosen:
            if e.is_loop:
                raise GainGraphError("forest contains a loop")
            a, b = find(e.tail), find(e.head)
            if a == b:
                raise GainGraphError("forest edge set contains a cycle")
            parent[a] = b

        g = self
        # Clear the free-free tree edges by switching outward from each root;
        # fixed-incident forest edges are re-gained directly afterwards (their
        # gain is a representative-choice artefact), so switches cannot undo it.
        tree_ids = {
            e.id for e in chosen if e.tail not in self._fixed and e.head not in self._fixed
        }
        k = self.group.order
        adj: dict = {}
        for e in g.edges:
            if e.id in tree_ids:
                adj.setdefault(e.tail, []).append(e)
                adj.setdefault(e.head, []).append(e)
        visited = set()
        for root in self._vertices:
            if root not in adj or root in visited:
                continue
            visited.add(root)
            stack = [root]
            order = []
            tree_parent_edge: dict = {}
            while stack:
                u = stack.pop()
                for e in adj[u]:
                    w = e.other(u)
                    if w in visited:
                        continue
                    visited.add(w)
                    tree_parent_edge[w] = (u, e.id)
                    order.append(w)
                    stack.append(w)
            # Walk from the root outward; each switch clears one tree edge and
            # does not touch the already-cleared ones closer to the root.
            for w in order:
                u, eid = tree_parent_edge[w]
                e = g.edge_by_id(eid)
                delta = e.gain_from(u, k)  # gain seen travelling u -> w
                if delta:
                    g = g.switch(w, delta)
        for e in chosen:
            if (e.tail in self._fixed) or (e.head in self._fixed):
                g = g.with_gain(e.id, 0)
        return g

    # -- connectivity -----------------------------------------------------------

    def resolve_edges(self, edge_subset) -> tuple[Edge, ...]:
        """Accept Edge objects or edge ids; None means every edge."""
        if edge_subset is None:
            return self._edges
        out = []
        for e in edge_subset:
            out.append(e if isinstance(e, Edge) else self.edge_by_id(e))
        return tuple(out)

    def components(self, edge_subset=None) -> list[tuple[set, list[Edge]]]:
        """Connected components of the subgraph spanned by an edge subset.

        Returns (vertex set, edge list) pairs; only vertices meeting the edge
        subset appear.  With the default (all edges), isolated vertices of the
        whole graph are likewise not reported.
        """
        edges = list(self.resolve_edges(edge_subset))
        adj: dict = {}
        for e in edges:
            adj.setdefault(e.tail, []).append(e)
            adj.setdefault(e.head, []).append(e)
        seen: set = set()
        out = []
        for start in adj:
            if start in seen:
                continue
            comp_v = set()
            stack = [start]
            seen.add(start)
            while stack:
                u = stack.pop()
                comp_v.add(u)
                for e in adj[u]:
                    w = e.other(u)
                    if w not in seen:
                        seen.add(w)
                        stack.append(w)
            comp_e = [e for e in edges if e.tail in comp_v]
            out.append((comp_v, comp_e))
        return out

    def is_connected(self) -> bool:
        """One component covering every vertex (isolated vertices disconnect)."""
        if len(self._vertices) <= 1:
            return True
        comps = self.components()
        if len(comps) != 1:
            return False
        return comps[0][0] == set(self._vertices)

    def induced_edges(self, vertex_subset) -> tuple[Edge, ...]:
        s = set(vertex_subset)
        return tuple(e for e in self._edges if e.tail in s and e.head in s)

    # -- balance and subgroups ----------------------------------------------------

    def _free_part(self, edges: Iterable[Edge]) -> list[Edge]:
        """Edges left after deleting fixed vertices and their incident edges."""
        return [
            e for e in edges if e.tail not in self._fixed and e.head not in self._fixed
        ]

    def balance_violation(self, edge_subset=None):
        """A cycle with non-identity gain in the fixed-vertex-free part, or None.

        Implemented with a union-find carrying potentials: an edge closing a
        cycle is unbalanced exactly when the potential difference disagrees
        with its gain.  Returns (edge, offending gain) for the first such edge.
        """
        edges = self.resolve_edges(edge_subset)
        k = self.group.order
        parent: dict = {}
        pot: dict = {}  # gain of the path from the vertex up to its root

        def find(x):
            if parent.setdefault(x, x) == x:
                pot.setdefault(x, 0)
                return x, 0
            root, acc = x, 0
            while parent[root] != root:
                acc = (acc + pot[root]) % k
                root = parent[root]
            # path compression with potential update
            node = x
            run = acc
            while parent[node] != node:
                nxt, g = parent[node], pot[node]
                parent[node], pot[node] = root, run
                run = (run - g) % k
                node = nxt
            return root, acc

        for e in self._free_part(edges):
            if e.is_loop:
                if e.gain % k != 0:
                    return e, e.gain % k
                continue
            ru, du = find(e.tail)
            rv, dv = find(e.head)
            if ru != rv:
                # potential(tail) - potential(head) must equal gain
                parent[rv] = ru
                pot[rv] = (du - e.gain - dv) % k
            else:
                closing = (du - dv - e.gain) % k
                if closing:
                    return e, (-closing) % k
        return None

    def is_balanced(self, edge_subset=None) -> bool:
        return self.balance_violation(edge_subset) is None

    def cycle_space_gains(self, edge_subset=None) -> set[int]:
        """Gains of the fundamental cycles of the fixed-vertex-free part.

        Together these generate every closed-walk gain avoiding fixed
        vertices, across all components of the free part (their union feeds
        the subgroup computation).
        """
        edges = self.resolve_edges(edge_subset)
        k = self.group.order
        parent: dict = {}
        pot: dict = {}
        gains: set[int] = set()

        def find(x):
            if parent.setdefault(x, x) == x:
                pot.setdefault(x, 0)
                return x, 0
            root, acc = x, 0
            while parent[root] != root:
                acc = (acc + pot[root]) % k
                root = parent[root]
            return root, acc

        for e in self._free_part(edges):
            if e.is_loop:
                gains.add(e.gain % k)
                continue
            ru, du = find(e.tail)
            rv, dv = find(e.head)
            if ru != rv:
                parent[rv] = ru
                pot[rv] = (du - e.gain - dv) % k
            else:
                g = (e.gain + dv - du) % k
                if g:
                    gains.add(g)
        return gains

    def subgroup_order(self, edge_subset=None) -> int:
        """Order of the subgroup generated by fixed-vertex-avoiding closed walks."""
        return self.group.subgroup_order(self.cycle_space_gains(edge_subset))

    def walk_gains_at(self, v, edge_subset=None) -> set[int]:
        """Gains of all closed walks based at v that avoid v internally.

        Computed as the fixed point of state propagation over (vertex, gain)
        pairs — the exact gain set of the (unbounded) walk family, reached in
        finitely many steps because there are at most |V|·k states.
        """
        edges = self.resolve_edges(edge_subset)
        k = self.group.order
        gains: set[int] = set()
        departures = []  # (other endpoint, gain leaving v)
        arrivals: dict = {}  # endpoint -> list of gains for the hop back to v
        inner: dict = {}  # adjacency among non-v vertices
        for e in edges:
            if e.is_loop:
                if e.tail == v:
                    gains.add(e.gain % k)
                    gains.add((-e.gain) % k)
                else:
                    inner.setdefault(e.tail, []).append((e.tail, e.gain % k))
                    inner.setdefault(e.tail, []).append((e.tail, (-e.gain) % k))
            elif v in (e.tail, e.head):
                w = e.other(v)
                if w == v:
                    continue
                g = e.gain_from(v, k)
                departures.append((w, g))
                arrivals.setdefault(w, []).append((-g) % k)
            else:
                inner.setdefault(e.tail, []).append((e.head, e.gain % k))
                inner.setdefault(e.head, []).append((e.tail, (-e.gain) % k))
        frontier = set(departures)
        seen = set(frontier)
        while frontier:
            for (u, g) in frontier:
                for back in arrivals.get(u, ()):
                    gains.add((g + back) % k)
            nxt = set()
            for (u, g) in frontier:
                for (w, d) in inner.get(u, ()):
                    state = (w, (g + d) % k)
                    if state not in seen:
                        seen.add(state)
                        nxt.add(state)
            frontier = nxt
        return gains

    def near_balance_witness(self, edge_subset=None):
        """(base vertex, gamma) certifying near-balance, or None.

        Near-balance asks for a base vertex at which every fixed-vertex-free
        closed walk (not passing through the base internally) has gain in
        {id, gamma, gamma^{-1}}.  Only defined for connected subgraphs without
        fixed vertices that are unbalanced; structural misuse raises.
        """
        edges = self.resolve_edges(edge_subset)
        verts = set()
        for e in edges:
            verts.add(e.tail)
            verts.add(e.head)
        if verts & self._fixed:
            raise GainGraphError("near-balance is undefined with fixed vertices present")
        comps = self.components(edges)
        if len(comps) != 1:
            raise GainGraphError("near-balance needs a connected subgraph")
        if self.is_balanced(edges):
            return None
        k = self.group.order
        for v in sorted(verts, key=self._index.get):
            gains = self.walk_gains_at(v, edges)
            gains.discard(0)
            if not gains:
                continue
            g = min(gains)
            if gains <= {g, (-g) % k}:
                return v, g
        return None

    def is_near_balanced(self, edge_subset=None) -> bool:
        return self.near_balance_witness(edge_subset) is not None


# ---------------------------------------------------------------------------
# Covering construction
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CoveringGraph:
    """The symmetric graph covering a gain graph.

    Vertices are (orbit id, shift) pairs; fixed orbits only use shift 0.
    ``edge_orbits`` maps each quotient edge id to its covering edges, and
    ``stabilizer_order`` records the size of each covering edge's stabilizer
    (1 for free edges; k for fixed-fixed edges; 2 for half-turn loop lifts).
    """

    group: CyclicGroup
    vertices: tuple  # ((orbit, shift), ...)
    edges: tuple  # (frozenset({cv, cw}), ...) sorted canonically
    fixed_orbits: frozenset
    edge_orbits: dict
    stabilizer_order: dict

    def act(self, s: int, cv):
        orbit, t = cv
        if orbit in self.fixed_orbits:
            return cv
        return (orbit, (t + s) % self.group.order)

    @property
    def vertex_count(self) -> int:
        return len(self.vertices)

    @property
    def edge_count(self) -> int:
        return len(self.edges)


def lift(g: GainGraph) -> CoveringGraph:
    """Expand a gain graph into its covering symmetric graph.

    Free vertices blow up into k copies, fixed vertices stay single; an edge
    with gain d lifts to the orbit of {(tail, 0), (head, d)}.  The covering is
    simple: coincident lifts (half-turn loops) are deduplicated.
    """
    report = g.validate()
    if report is not None:
        raise ValidationError(report)
    k = g.group.order
    verts: list = []
    for v in g.vertices:
        if g.is_fixed(v):
            verts.append((v, 0))
        else:
            verts.extend((v, t) for t in range(k))

    def cover_vertex(v, t):
        return (v, 0) if g.is_fixed(v) else (v, t % k)

    edge_set: dict = {}
    edge_orbits: dict = {}
    stab: dict = {}
    for e in g.edges:
        orbit = set()
        for t in range(k):
            cu = cover_vertex(e.tail, t)
            cw = cover_vertex(e.head, t + e.gain)
            if cu == cw:
                raise GainGraphError(
                    f"edge {e.id} lifts to a degenerate edge; graph is not a valid quotient"
                )
            orbit.add(frozenset((cu, cw)))
        orbit_list = sorted(orbit, key=lambda fs: sorted(map(_cover_key, fs)))
        edge_orbits[e.id] = tuple(orbit_list)
        stab[e.id] = k // len(orbit)
        for ce in orbit:
            edge_set.setdefault(ce, e.id)
    edges = tuple(sorted(edge_set, key=lambda fs: sorted(map(_cover_key, fs))))
    return CoveringGraph(
        group=g.group,
        vertices=tuple(verts),
        edges=edges,
        fixed_orbits=g.fixed_vertices,
        edge_orbits=edge_orbits,
        stabilizer_order=stab,
    )


def _cover_key(cv) -> tuple:
    return (str(cv[0]), cv[1])


def quotient(cover: CoveringGraph, representatives: dict | None = None) -> GainGraph:
    """Rebuild a gain graph from a covering (inverse of ``lift`` up to equivalence).

    ``representatives`` optionally picks the shift representing each free
    orbit (default 0); different choices give switching-equivalent outputs.
    """
    k = cover.group.order
    orbits: list = []
    seen = set()
    for (orbit, _t) in cover.vertices:
        if orbit not in seen:
            seen.add(orbit)
            orbits.append(orbit)
    for orbit in orbits:
        shifts = {t for (o, t) in cover.vertices if o == orbit}
        expected = {0} if orbit in cover.fixed_orbits else set(range(k))
        if shifts != expected:
            raise GainGraphError(
                f"orbit {orbit!r} has shifts {sorted(shifts)}; a vertex fixed by one "
                "non-trivial symmetry must be fixed by all"
            )
    reps = {o: 0 for o in orbits}
    if representatives:
        for o, t in representatives.items():
            if o in cover.fixed_orbits and t % k != 0:
                raise GainGraphError(f"fixed orbit {o!r} has only shift 0")
            reps[o] = t % k

    def rep_shift(o):
        return reps[o]

    # Partition covering edges into orbits under the action.
    remaining = set(cover.edges)
    quotient_edges = []
    counter = 0
    for ce in sorted(remaining, key=lambda fs: sorted(map(_cover_key, fs))):
        if ce not in remaining:
            continue
        orbit_edges = {frozenset(cover.act(s, cv) for cv in ce) for s in range(k)}
        remaining -= orbit_edges
        a, b = sorted(ce, key=_cover_key)
        (ou, tu), (ov, tv) = a, b
        # Shift so the tail representative is at its chosen shift.
        if ou in cover.fixed_orbits:
            gain = (tv - rep_shift(ov)) % k if ov not in cover.fixed_orbits else 0
        else:
            s = (rep_shift(ou) - tu) % k
            tv2 = (tv + s) % k if ov not in cover.fixed_orbits else 0
            gain = (tv2 - rep_shift(ov)) % k if ov not in cover.fixed_orbits else 0
        quotient_edges.append((f"q{counter}", ou, ov, gain))
        counter += 1
    verts = [(o, o in cover.fixed_orbits) for o in orbits]
    return GainGraph(cover.group, verts, quotient_edges).check()


# ---------------------------------------------------------------------------
# Canonical forms / equivalence
# ---------------------------------------------------------------------------


def _edge_tuple(g: GainGraph, order: dict, delta: dict) -> tuple:
    """Edge multiset after relabelling by ``order`` and switching by ``delta``.

    Fixed-incident gains are forced to id (they are representative-choice
    artefacts), directions normalized to small->large index, loop gains to
    min(gain, inverse).
    """
    k = g.group.order
    fixed = g.fixed_vertices
    out = []
    for e in g.edges:
        i, j = order[e.tail], order[e.head]
        if e.is_loop:
            gain = e.gain % k
            out.append((i, i, min(gain, (k - gain) % k)))
            continue
        if (e.tail in fixed) or (e.head in fixed):
            gain = 0
        else:
            gain = (e.gain + delta[e.tail] - delta[e.head]) % k
        if i <= j:
            out.append((i, j, gain))
        else:
            out.append((j, i, (-gain) % k))
    return tuple(sorted(out))


def canonical_form(g: GainGraph, up_to_relabelling: bool = True) -> tuple:
    """Canonical key identifying g up to switching, re-gaining of
    fixed-incident edges and (optionally) vertex relabelling.

    Relabellings preserve the fixed/free split.  Minimization brute-forces
    permutations and switching vectors, so this is for desk-scale graphs
    (a handful of free vertices); the cost is |perms| * k^|free|.
    """
    from itertools import permutations, product

    k = g.group.order
    fixed = sorted(g.fixed_vertices, key=g.vertex_index)
    free = [v for v in g.vertices if v not in g.fixed_vertices]

    if up_to_relabelling:
        perm_iter = (
            pf + pp for pf in permutations(fixed) for pp in permutations(free)
        )
    else:
        perm_iter = iter([tuple(fixed) + tuple(free)])

    best = None
    for perm in perm_iter:
        order = {v: i for i, v in enumerate(perm)}
        for deltas in product(range(k), repeat=len(free)):
            delta = dict(zip(free, deltas))
            key = _edge_tuple(g, order, delta)
            if best is None or key < best:
                best = key
    return (g.group.order, g.group.geometry, len(fixed), len(g.vertices), best or ())


def equivalent(g1: GainGraph, g2: GainGraph, up_to_relabelling: bool = True) -> bool:
    """Equality up to switching, fixed-incident re-gaining and relabelling."""
    if (g1.group.order, g1.group.geometry) != (g2.group.order, g2.group.geometry):
        return False
    return canonical_form(g1, up_to_relabelling) == canonical_form(g2, up_to_relabelling)
