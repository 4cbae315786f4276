"""Vertex moves, reduction search, and certification of gain-tight graphs.

Six local moves grow a gain graph while keeping a count tight: adding a
fixed vertex of degree one ("fix0", with a degenerate no-edge form for
counts that give fixed vertices no weight), adding a free vertex of degree
two ("zero"), splitting an edge through a new fixed vertex ("fix1"), adding
a free vertex carrying a loop plus one edge ("loop1"), splitting an edge
through a new free vertex of degree three ("one"), and joining an antipodal
pair of free vertices to the fixed vertex of an even-order rotation
("twovertex").  Each move has an inverse reduction.

``find_admissible_reduction`` searches a tight graph for a reduction whose
result is again tight, in a fixed documented order, so that
``certify_tight`` can walk any in-scope tight graph down to a small
recognized base graph and record the trail as a :class:`Certificate`.
Replaying the trail with ``apply_extension`` reconstructs the input graph
exactly; replaying it with ``extension_preserves_isostatic`` additionally
carries an isostatic placement up the chain, turning the combinatorial
certificate into a rank certificate for the matching representation blocks.

The reduction scheme is proved complete only for the reflection and for
rotations of order two and three, and only for the count pairs listed in
``reduction_scope``; a tight non-base graph that exhausts every candidate
under one of those specs indicates a bug and raises
:class:`TheoremContradiction` rather than failing quietly.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, replace
from itertools import combinations
from math import gcd

from .gains import GainGraph, lift
from .groups import CyclicGroup
from .orbit import (
    Configuration,
    ConfigurationError,
    _all_collinear,
    _pairwise_distinct,
    dropped_vertices,
    random_symmetric_config,
    rho_j_isostatic,
)
from .sparsity import CountSpec, ZjkSpec, _s_sets, gain_sparse, spanning_tight_subgraph

MOVE_KINDS = ("fix0", "zero", "fix1", "loop1", "one", "twovertex")


class HennebergError(ValueError):
    """A move precondition or a placement side condition failed."""


class TheoremContradiction(RuntimeError):
    """A tight in-scope graph admits no reduction and is not a base graph.

    The reduction scheme is backed by a completeness guarantee, so this
    exception is a bug detector: it should never fire on a graph that the
    sparsity oracle accepted as tight for an in-scope spec.
    """

    def __init__(self, report: "ExhaustionReport", spec: CountSpec):
        self.report = report
        self.spec = spec
        super().__init__(
            f"no reduction applies to a non-base {spec.describe()}-tight graph; "
            f"exceptional shapes seen: {list(report.exceptional) or 'none'}; "
            f"graph: {report.graph_key}"
        )


# ---------------------------------------------------------------------------
# moves
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Move:
    """One construction move, recorded in its extension direction.

    ``added_vertices`` holds ``(id, fixed)`` pairs the extension introduces,
    ``added_edges`` holds ``(id, tail, head, gain)`` specs it adds, and
    ``removed_edges`` holds the specs it deletes first (a reduction re-adds
    them).  ``direction`` only records how the move was found; the
    structural fields always describe the extension, so inverting a move is
    a matter of reading the same fields the other way.

    For a "one" move the added edges are ordered so that the first two
    reattach the endpoints of the removed edge and the third goes to the
    remaining anchor.
    """

    kind: str
    added_vertices: tuple = ()
    added_edges: tuple = ()
    removed_edges: tuple = ()
    direction: str = "extension"

    def as_reduction(self) -> "Move":
        return replace(self, direction="reduction")

    def as_extension(self) -> "Move":
        return replace(self, direction="extension")


def _spec_of(e) -> tuple:
    return (e.id, e.tail, e.head, e.gain)


def _spec_gain_from(spec: tuple, v, k: int) -> int:
    """Gain of an edge spec read with ``v`` as the tail."""
    _eid, tail, _head, gain = spec
    return gain % k if tail == v else (-gain) % k


def _spec_other(spec: tuple, v):
    _eid, tail, head, _gain = spec
    return head if tail == v else tail


def _fail(kind: str, clause: str):
    raise HennebergError(f"{kind}: {clause}")


def _check_preconditions(g: GainGraph, move: Move) -> None:
    kind = move.kind
    if kind not in MOVE_KINDS:
        raise HennebergError(f"unknown move kind {kind!r}")
    k = g.group.order
    present = set(g.vertices)
    for v, _fixed in move.added_vertices:
        if v in present:
            _fail(kind, f"new vertex {v!r} is already in the graph")
    new_ids = {v for v, _ in move.added_vertices}
    for eid, tail, head, _gain in move.added_edges:
        for w in (tail, head):
            if w not in present and w not in new_ids:
                _fail(kind, f"edge {eid!r} mentions unknown vertex {w!r}")
    for spec in move.removed_edges:
        eid, tail, head, gain = spec
        e = g.edge_by_id(eid)
        if (e.tail, e.head) != (tail, head) or e.gain % k != gain % k:
            _fail(kind, f"removed edge {eid!r} does not match the graph")

    fixedness = dict(move.added_vertices)

    def is_fixed(w) -> bool:
        return fixedness[w] if w in fixedness else g.is_fixed(w)

    if kind == "fix0":
        if len(move.added_vertices) != 1 or not move.added_vertices[0][1]:
            _fail(kind, "adds exactly one fixed vertex")
        if move.removed_edges:
            _fail(kind, "removes no edges")
        if len(move.added_edges) > 1:
            _fail(kind, "adds at most one edge")
        if move.added_edges:
            v = move.added_vertices[0][0]
            spec = move.added_edges[0]
            if v not in (spec[1], spec[2]) or spec[1] == spec[2]:
                _fail(kind, "the edge must join the new vertex to an old one")
            u = _spec_other(spec, v)
            if is_fixed(u) and spec[3] % k != 0:
                _fail(kind, "an edge between fixed vertices must carry the identity gain")

    elif kind == "zero":
        if len(move.added_vertices) != 1 or move.added_vertices[0][1]:
            _fail(kind, "adds exactly one free vertex")
        if move.removed_edges or len(move.added_edges) != 2:
            _fail(kind, "adds exactly two edges and removes none")
        v = move.added_vertices[0][0]
        anchors = []
        for spec in move.added_edges:
            if v not in (spec[1], spec[2]) or spec[1] == spec[2]:
                _fail(kind, "both edges must join the new vertex to old ones")
            anchors.append(_spec_other(spec, v))
        if anchors[0] == anchors[1]:
            if is_fixed(anchors[0]):
                _fail(kind, "coincident anchors must be free")
            d1, d2 = (_spec_gain_from(s, v, k) for s in move.added_edges)
            if d1 == d2:
                _fail(kind, "coincident anchors need distinct gains")

    elif kind == "fix1":
        if len(move.added_vertices) != 1 or not move.added_vertices[0][1]:
            _fail(kind, "adds exactly one fixed vertex")
        if len(move.added_edges) != 2 or len(move.removed_edges) != 1:
            _fail(kind, "adds two edges and removes one")
        v = move.added_vertices[0][0]
        anchors = []
        for spec in move.added_edges:
            if v not in (spec[1], spec[2]) or spec[1] == spec[2]:
                _fail(kind, "both new edges must join the new vertex to old ones")
            anchors.append(_spec_other(spec, v))
        u1, u2 = anchors
        if u1 == u2:
            _fail(kind, "the two anchors must be distinct")
        rspec = move.removed_edges[0]
        _eid, rtail, rhead, _rg = rspec
        if rtail == rhead:
            if rtail not in (u1, u2) or is_fixed(rtail):
                _fail(kind, "a removed loop must sit at a free anchor")
        elif {rtail, rhead} != {u1, u2}:
            _fail(kind, "the removed edge must join the two anchors")

    elif kind == "loop1":
        if len(move.added_vertices) != 1 or move.added_vertices[0][1]:
            _fail(kind, "adds exactly one free vertex")
        if move.removed_edges or len(move.added_edges) != 2:
            _fail(kind, "adds a loop and one edge, removing nothing")
        v = move.added_vertices[0][0]
        loops = [s for s in move.added_edges if s[1] == s[2]]
        plain = [s for s in move.added_edges if s[1] != s[2]]
        if len(loops) != 1 or len(plain) != 1:
            _fail(kind, "adds exactly one loop and one plain edge")
        if loops[0][1] != v:
            _fail(kind, "the loop must sit at the new vertex")
        if loops[0][3] % k == 0:
            _fail(kind, "the loop gain must not be the identity")
        if v not in (plain[0][1], plain[0][2]):
            _fail(kind, "the plain edge must join the new vertex to an old one")

    elif kind == "one":
        if len(move.added_vertices) != 1 or move.added_vertices[0][1]:
            _fail(kind, "adds exactly one free vertex")
        if len(move.added_edges) != 3 or len(move.removed_edges) != 1:
            _fail(kind, "adds three edges and removes one")
        v = move.added_vertices[0][0]
        anchors = []
        deltas = []
        for spec in move.added_edges:
            if v not in (spec[1], spec[2]) or spec[1] == spec[2]:
                _fail(kind, "all three edges must join the new vertex to old ones")
            anchors.append(_spec_other(spec, v))
            deltas.append(_spec_gain_from(spec, v, k))
        rspec = move.removed_edges[0]
        _eid, rtail, rhead, rgain = rspec
        v1, v2 = anchors[0], anchors[1]
        if rtail == rhead:
            if not (v1 == v2 == rtail):
                _fail(kind, "a removed loop must be reattached through its own vertex")
        elif {rtail, rhead} != {v1, v2}:
            _fail(kind, "the first two edges must reattach the removed edge's endpoints")
        # coincidences among the anchors are only allowed at free vertices
        for a, b in combinations(range(3), 2):
            if anchors[a] == anchors[b]:
                if is_fixed(anchors[a]):
                    _fail(kind, "only free anchors may coincide")
                if deltas[a] == deltas[b]:
                    _fail(kind, "edges to a coincident anchor need distinct gains")
        if anchors[0] == anchors[1] == anchors[2] and k < 3:
            _fail(kind, "three coincident anchors need group order at least three")
        if not is_fixed(v1) and not is_fixed(v2):
            want = (deltas[1] - deltas[0]) % k
            if rtail == rhead:
                if want not in (rgain % k, (-rgain) % k):
                    _fail(kind, "the reattached pair must compose to the removed gain")
            else:
                got = rgain % k if (rtail, rhead) == (v1, v2) else (-rgain) % k
                if want != got:
                    _fail(kind, "the reattached pair must compose to the removed gain")

    elif kind == "twovertex":
        if k % 2 != 0:
            _fail(kind, "needs even group order")
        if len(g.fixed_vertices) != 1:
            _fail(kind, "needs exactly one fixed vertex in the graph")
        if len(move.added_vertices) != 2 or any(f for _v, f in move.added_vertices):
            _fail(kind, "adds exactly two free vertices")
        if move.removed_edges or len(move.added_edges) != 4:
            _fail(kind, "adds four edges and removes none")
        (v0,) = g.fixed_vertices
        v1, v2 = (v for v, _f in move.added_vertices)
        pair = [s for s in move.added_edges if {s[1], s[2]} == {v1, v2}]
        spokes = [s for s in move.added_edges if s not in pair]
        if len(pair) != 2:
            _fail(kind, "two of the edges must join the new pair")
        gains = sorted(_spec_gain_from(s, v1, k) for s in pair)
        if gains != [0, k // 2]:
            _fail(kind, "the parallel pair must carry the identity and half-turn gains")
        hit = set()
        for spec in spokes:
            ends = {spec[1], spec[2]}
            if v0 not in ends or not (ends & {v1, v2}):
                _fail(kind, "each new vertex must be joined to the fixed vertex")
            hit |= ends & {v1, v2}
        if hit != {v1, v2}:
            _fail(kind, "each new vertex must be joined to the fixed vertex")


def apply_extension(g: GainGraph, move: Move) -> GainGraph:
    """Apply ``move`` as an extension and return the extended graph.

    Checks the move's structural preconditions (each failure names the
    clause) and validates the result.
    """
    _check_preconditions(g, move)
    out = g
    if move.removed_edges:
        out = out.remove_edges([s[0] for s in move.removed_edges])
    for v, fixed in move.added_vertices:
        out = out.add_vertex(v, fixed)
    if move.added_edges:
        out = out.add_edges(move.added_edges)
    report = out.validate()
    if report is not None:
        raise HennebergError(f"{move.kind}: the extension is not a valid gain graph: {report}")
    return out


def apply_reduction(g: GainGraph, move: Move) -> GainGraph:
    """Undo ``move``: delete what the extension added, restore what it removed."""
    kind = move.kind
    k = g.group.order
    by_id = {e.id: e for e in g.edges}
    for eid, tail, head, gain in move.added_edges:
        e = by_id.get(eid)
        if e is None or (e.tail, e.head) != (tail, head) or e.gain % k != gain % k:
            _fail(kind, f"edge {eid!r} does not match the move")
    added_ids = {s[0] for s in move.added_edges}
    present = set(g.vertices)
    for v, fixed in move.added_vertices:
        if v not in present or g.is_fixed(v) != fixed:
            _fail(kind, f"vertex {v!r} does not match the move")
        for e in g.edges_at(v):
            if e.id not in added_ids:
                _fail(kind, f"vertex {v!r} carries an edge {e.id!r} outside the move")
    out = g.remove_edges(added_ids)
    for v, _fixed in move.added_vertices:
        out = out.remove_vertex(v)
    if move.removed_edges:
        out = out.add_edges(move.removed_edges)
    report = out.validate()
    if report is not None:
        raise HennebergError(f"{kind}: the reduction is not a valid gain graph: {report}")
    return out


# ---------------------------------------------------------------------------
# carrying a placement across an extension
# ---------------------------------------------------------------------------


def _inv(f, x):
    if f.kind == "prime":
        return pow(x % f.p, f.p - 2, f.p)
    return 1.0 / x


def _is_zero(f, x) -> bool:
    if f.kind == "prime":
        return x % f.p == 0
    return abs(x) <= 1e-9


def _eq(f, a, b) -> bool:
    return _is_zero(f, f.sub(a, b))


def _points_eq(f, p, q) -> bool:
    return _eq(f, p[0], q[0]) and _eq(f, p[1], q[1])


def _midpoint(f, p, q):
    half = _inv(f, f.add(f.one, f.one))
    return (f.mul(half, f.add(p[0], q[0])), f.mul(half, f.add(p[1], q[1])))


def _cross(f, p, q):
    return f.sub(f.mul(p[0], q[1]), f.mul(p[1], q[0]))


def _draw(rng: random.Random, f):
    if f.kind == "prime":
        return rng.randrange(f.p)
    return rng.uniform(-1.0, 1.0)


def extension_preserves_isostatic(
    g: GainGraph,
    move: Move,
    j: int,
    config: Configuration,
    seed: int = 0,
    max_attempts: int = 100,
) -> Configuration:
    """Extend an isostatic placement across ``move``, verified by rank.

    ``config`` must place ``g`` so that block ``j`` is isostatic.  The side
    conditions under which the move preserves that property are checked, not
    assumed, and each failure names the condition.  New vertices are placed
    by the move's own construction where it dictates a point (the mirror
    intersection for "fix1", the midpoint of the reattachment images for
    "one", the origin for an isolated fixed vertex) and generically
    otherwise, resampling until the covering placement is injective and the
    extended block passes the rank check.

    Returns the extended configuration; the extended graph is
    ``apply_extension(g, move)``.
    """
    group = g.group
    k = group.order
    f = config.field
    jj = j % k
    base = rho_j_isostatic(g, j, config)
    if not base.ok:
        raise HennebergError(
            f"{move.kind}: the starting placement is not isostatic in block {j}"
        )
    g2 = apply_extension(g, move)
    kind = move.kind
    rng = random.Random(seed)
    zero = f.zero

    forced: list[dict] = []  # placements dictated by the move, tried once each
    generic = None  # callable drawing a fresh candidate, or None

    if kind == "fix0":
        v = move.added_vertices[0][0]
        if not move.added_edges:
            if v not in dropped_vertices(g2, j):
                _fail(kind, "an isolated fixed vertex must contribute no columns to this block")
            forced.append({v: (zero, zero)})
        else:
            if not group.is_reflection:
                _fail(kind, "a fixed vertex of degree one preserves ranks only under a reflection")
            u = _spec_other(move.added_edges[0], v)
            if jj % 2 == 1 and g.is_fixed(u):
                _fail(kind, "for the anti-symmetric block the anchor must be free")
            y_u = config.point(u)[1]

            def generic():
                while True:
                    y = _draw(rng, f)
                    if not _eq(f, y, y_u):
                        return {v: (zero, y)}

    elif kind == "zero":
        v = move.added_vertices[0][0]
        images = [
            config.apply(_spec_gain_from(s, v, k), config.point(_spec_other(s, v)))
            for s in move.added_edges
        ]

        def generic():
            while True:
                cand = (_draw(rng, f), _draw(rng, f))
                if _points_eq(f, images[0], images[1]):
                    if not _points_eq(f, cand, images[0]):
                        return {v: cand}
                elif not _all_collinear([cand, images[0], images[1]], f):
                    return {v: cand}

    elif kind == "fix1":
        if not group.is_reflection:
            _fail(kind, "splitting an edge through a fixed vertex needs a reflection")
        v = move.added_vertices[0][0]
        u1 = _spec_other(move.added_edges[0], v)
        u2 = _spec_other(move.added_edges[1], v)
        _eid, rtail, rhead, rgain = move.removed_edges[0]
        if rtail == rhead:
            if jj % 2 == 1:
                _fail(kind, "a split loop only preserves the fully-symmetric block")
            w, other = rtail, (u2 if rtail == u1 else u1)
            if _eq(f, config.point(w)[1], config.point(other)[1]):
                _fail(kind, "the two anchors must differ in height")
            forced.append({v: (zero, config.point(w)[1])})
        else:
            x1, y1 = config.point(u1)
            x2, y2 = config.point(u2)
            if _is_zero(f, x1) and _is_zero(f, x2):
                # both anchors sit on the mirror: any distinct mirror point works
                def generic():
                    while True:
                        y = _draw(rng, f)
                        if not _eq(f, y, y1) and not _eq(f, y, y2):
                            return {v: (zero, y)}

            else:
                # the bar and its mirror image meet where the replaced
                # constraint line crosses x = 0
                t = 0 if rgain % k == 1 else 1
                d = f.add(x1, x2) if t == 0 else f.sub(x1, x2)
                if _is_zero(f, d):
                    _fail(kind, "the replaced constraint and its mirror image are parallel")
                slope = f.mul(f.neg(f.mul(f.sub(y1, y2), _inv(f, d))), x1)
                forced.append({v: (zero, f.add(slope, y1))})

    elif kind == "loop1":
        v = move.added_vertices[0][0]
        loop = next(s for s in move.added_edges if s[1] == s[2])
        plain = next(s for s in move.added_edges if s[1] != s[2])
        gl = loop[3] % k
        u = _spec_other(plain, v)
        if k == 2 and jj == 1:
            _fail(kind, "for groups of order two only the fully-symmetric block is preserved")
        if k % 2 == 0 and jj % 2 == 1 and gl == k // 2:
            _fail(kind, "a half-turn loop never preserves an anti-symmetric block")
        if not group.is_reflection and jj == 0 and g.is_fixed(u):
            _fail(kind, "in the fully-symmetric block of a rotation the companion edge needs a free anchor")
        if k >= 4 and 2 <= jj <= k - 2 and g.is_fixed(u):
            if k // gcd(k, gl) in _s_sets(k, jj)[0]:
                _fail(kind, "the loop gain's subgroup is degenerate for this block")

        def generic():
            return {v: (_draw(rng, f), _draw(rng, f))}

    elif kind == "one":
        v = move.added_vertices[0][0]
        images = [
            config.apply(_spec_gain_from(s, v, k), config.point(_spec_other(s, v)))
            for s in move.added_edges
        ]
        if _all_collinear(images, f):
            _fail(kind, "the three reattachment images are collinear; perturb the base placement")
        forced.append({v: _midpoint(f, images[0], images[1])})

        def generic():
            return {v: (_draw(rng, f), _draw(rng, f))}

    elif kind == "twovertex":
        if group.is_reflection:
            _fail(kind, "the antipodal pair move needs a rotation")
        v1, v2 = (v for v, _f in move.added_vertices)

        def generic():
            while True:
                p1 = (_draw(rng, f), _draw(rng, f))
                p2 = (_draw(rng, f), _draw(rng, f))
                if not _is_zero(f, _cross(f, p1, p2)):
                    return {v1: p1, v2: p2}

    cover2 = lift(g2)

    def attempt(new_points: dict):
        cand = Configuration(group, f, {**config.points, **new_points})
        placed = list(cand.covering_points(cover2).values())
        if not _pairwise_distinct(placed, f):
            return None
        if not rho_j_isostatic(g2, j, cand).ok:
            return None
        return cand

    for new_points in forced:
        got = attempt(new_points)
        if got is not None:
            return got
    if generic is None:
        raise HennebergError(
            f"{move.kind}: the placement dictated by the move fails rank verification"
        )
    for _ in range(max_attempts):
        got = attempt(generic())
        if got is not None:
            return got
    raise ConfigurationError(
        f"no placement found for {move.kind} in block {j} after {max_attempts} attempts"
    )


# ---------------------------------------------------------------------------
# count specs covered by the reduction scheme
# ---------------------------------------------------------------------------

_SCOPE = {
    ("reflection", 2, 1, 1),
    ("reflection", 2, 1, 2),
    ("rotation", 2, 0, 1),
    ("rotation", 2, 2, 2),
    ("rotation", 3, 0, 1),
    ("rotation", 3, 1, 1),
}


def reduction_scope(group: CyclicGroup, spec: CountSpec) -> None:
    """Raise unless ``spec`` under ``group`` has a complete reduction scheme."""
    key = (group.geometry, group.order, spec.m, spec.l)
    if key not in _SCOPE:
        raise HennebergError(
            f"no reduction scheme for {spec.describe()} under {group.geometry} of "
            f"order {group.order}: certification covers the reflection and "
            "rotations of order two and three"
        )


def theorem_counts(group: CyclicGroup) -> tuple | None:
    """The pair of counts whose spanning tight subgraphs characterize rigidity.

    Returns ``None`` for rotation orders where no count characterization is
    available (k >= 4).
    """
    if group.is_reflection:
        return (CountSpec(1, 1, True), CountSpec(1, 2, True))
    if group.order == 2:
        return (CountSpec(0, 1, True), CountSpec(2, 2, True))
    if group.order == 3:
        return (CountSpec(0, 1, True), CountSpec(1, 1, True))
    return None


def count_for_block(group: CyclicGroup, j: int):
    """The sparsity count governing block ``j`` of the orbit matrix."""
    k = group.order
    jj = j % k
    if group.is_reflection:
        return CountSpec(1, 1, True) if jj == 0 else CountSpec(1, 2, True)
    if jj == 0:
        return CountSpec(0, 1, True)
    if k == 2:
        return CountSpec(2, 2, True)
    if jj in (1, k - 1):
        return CountSpec(1, 1, True)
    return ZjkSpec(k, jj)


def certified_blocks(group: CyclicGroup, spec: CountSpec) -> tuple:
    """The block indices whose isostaticity a certificate for ``spec`` carries."""
    reduction_scope(group, spec)
    if group.is_reflection:
        return (0,) if spec.l == 1 else (1,)
    if spec.m == 0:
        return (0,)
    if group.order == 2:
        return (1,)
    return (1, group.order - 1)


# ---------------------------------------------------------------------------
# base graphs
# ---------------------------------------------------------------------------


def is_base_graph(g: GainGraph, spec: CountSpec) -> str | None:
    """Recognize the terminal graphs of the reduction scheme.

    Returns a short label naming the base shape, or None.
    """
    key = (g.group.geometry, spec.m, spec.l)
    n_fixed = len(g.fixed_vertices)
    n_free = len(g.vertices) - n_fixed
    edges = g.edges
    if key == ("reflection", 1, 1):
        if n_fixed == 1 and n_free == 0 and not edges:
            return "single fixed vertex"
        if n_fixed == 0 and n_free == 1 and len(edges) == 1 and edges[0].is_loop:
            return "free vertex with a loop"
    elif key == ("reflection", 1, 2):
        if n_fixed == 0 and n_free == 1 and not edges:
            return "single free vertex"
        if n_fixed == 2 and n_free == 0 and not edges:
            return "two fixed vertices"
    elif key == ("rotation", 0, 1):
        if n_fixed == 0 and n_free == 1 and len(edges) == 1 and edges[0].is_loop:
            return "free vertex with a loop"
        if n_fixed == 1 and n_free == 1 and len(edges) == 1 and not edges[0].is_loop:
            return "free vertex joined to the fixed vertex"
    elif key == ("rotation", 2, 2):
        if n_fixed == 0 and n_free == 1 and not edges:
            return "single free vertex"
        if n_fixed == 1 and n_free == 0 and not edges:
            return "single fixed vertex"
    elif key == ("rotation", 1, 1):
        if n_fixed == 0 and n_free == 1 and len(edges) == 1 and edges[0].is_loop:
            return "free vertex with a loop"
        if n_fixed == 1 and n_free == 0 and not edges:
            return "single fixed vertex"
    return None


# ---------------------------------------------------------------------------
# reduction search
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ReductionStep:
    """An admissible reduction: the move (reduction direction) and its result."""

    move: Move
    reduced: GainGraph


@dataclass(frozen=True)
class ExhaustionReport:
    """Outcome of a reduction search that found no admissible move.

    ``base_label`` names the base graph if the graph is one; ``exceptional``
    lists ``(vertex, shape)`` pairs for degree-3 free vertices matching the
    two shapes known to block every 1-reduction.  Exhaustion on anything
    else contradicts the completeness guarantee.
    """

    base_label: str | None
    exceptional: tuple
    graph_key: tuple


def _graph_key(g: GainGraph) -> tuple:
    verts = tuple(sorted((str(v), g.is_fixed(v)) for v in g.vertices))
    edges = tuple(
        sorted((str(e.id), str(e.tail), str(e.head), e.gain % g.group.order) for e in g.edges)
    )
    return (g.group.geometry, g.group.order, verts, edges)


def _sorted_vertices(g: GainGraph) -> list:
    return sorted(g.vertices, key=str)


def _one_reduction_candidates(g: GainGraph, v):
    """Moves removing loop-free degree-3 free ``v``, reconnecting two neighbours.

    For each pair of incident edges the reconnecting gain composes their
    gains through ``v``; coincident neighbours yield a loop candidate
    instead, and a pair of fixed neighbours is reconnected with the identity
    (gains on fixed-incident edges never matter).  Invalid candidates
    (identity loops, parallels at a fixed vertex, indistinguishable
    parallels) are skipped.
    """
    k = g.group.order
    es = sorted(g.edges_at(v), key=lambda e: e.id)
    deltas = [e.gain_from(v, k) for e in es]
    others = [e.other(v) for e in es]
    stripped = g.remove_vertex(v)
    for a, b in combinations(range(3), 2):
        wa, wb = others[a], others[b]
        if wa == wb:
            if g.is_fixed(wa):
                continue
            h = (deltas[b] - deltas[a]) % k
            if h == 0:
                continue
            tail = head = wa
        elif g.is_fixed(wa) and g.is_fixed(wb):
            h = 0
            tail, head = wa, wb
        else:
            h = (deltas[b] - deltas[a]) % k
            tail, head = wa, wb
        eid = stripped.fresh_edge_id()
        reduced = stripped.add_edges([(eid, tail, head, h)])
        if reduced.validate() is not None:
            continue
        third = ({0, 1, 2} - {a, b}).pop()
        move = Move(
            "one",
            added_vertices=((v, False),),
            added_edges=(_spec_of(es[a]), _spec_of(es[b]), _spec_of(es[third])),
            removed_edges=((eid, tail, head, h),),
        )
        yield move, reduced


def _fix1_candidates(g: GainGraph, v):
    """Moves removing fixed degree-2 ``v``, reconnecting its two anchors.

    Reflection only.  Candidates: the direct edge with either gain, and a
    loop with the non-trivial gain at whichever anchor is free.
    """
    es = sorted(g.edges_at(v), key=lambda e: e.id)
    u1, u2 = es[0].other(v), es[1].other(v)
    stripped = g.remove_vertex(v)
    candidates = [(u1, u2, 0), (u1, u2, 1)]
    if not g.is_fixed(u1):
        candidates.append((u1, u1, 1))
    if not g.is_fixed(u2):
        candidates.append((u2, u2, 1))
    for tail, head, h in candidates:
        eid = stripped.fresh_edge_id()
        reduced = stripped.add_edges([(eid, tail, head, h)])
        if reduced.validate() is not None:
            continue
        move = Move(
            "fix1",
            added_vertices=((v, True),),
            added_edges=(_spec_of(es[0]), _spec_of(es[1])),
            removed_edges=((eid, tail, head, h),),
        )
        yield move, reduced


def _twovertex_candidates(g: GainGraph):
    """Moves removing an antipodal pair of degree-3 free vertices.

    The pair must be joined by parallel edges with the identity and
    half-turn gains and each joined to the unique fixed vertex.
    """
    k = g.group.order
    if len(g.fixed_vertices) != 1:
        return
    (v0,) = g.fixed_vertices
    free = [v for v in _sorted_vertices(g) if not g.is_fixed(v)]
    for i, v1 in enumerate(free):
        if g.degree(v1) != 3:
            continue
        for v2 in free[i + 1 :]:
            if g.degree(v2) != 3:
                continue
            pair = [e for e in g.edges_at(v1) if not e.is_loop and e.other(v1) == v2]
            if len(pair) != 2:
                continue
            if sorted(e.gain_from(v1, k) for e in pair) != [0, k // 2]:
                continue
            spoke1 = [e for e in g.edges_at(v1) if e.other(v1) == v0]
            spoke2 = [e for e in g.edges_at(v2) if e.other(v2) == v0]
            if len(spoke1) != 1 or len(spoke2) != 1:
                continue
            pair = sorted(pair, key=lambda e: e.id)
            move = Move(
                "twovertex",
                added_vertices=((v1, False), (v2, False)),
                added_edges=(
                    _spec_of(spoke1[0]),
                    _spec_of(spoke2[0]),
                    _spec_of(pair[0]),
                    _spec_of(pair[1]),
                ),
            )
            yield move, g.remove_vertex(v1).remove_vertex(v2)


def _reduction_candidates(g: GainGraph, spec: CountSpec):
    """All reduction candidates in the documented search order.

    Cheap moves first: fixed vertices of low degree, then degree-2 free
    vertices, then the degree-3 moves, then the two repair moves.  Vertices
    are visited in sorted order and incident edges in id order, so the
    first admissible candidate is deterministic.

    The degree-one fixed-vertex removal is offered only under a reflection
    (it does not preserve ranks for rotations, whose tight graphs shed
    their fixed vertices through the other moves); the degree-zero form is
    offered only when fixed vertices carry no count weight.
    """
    k = g.group.order
    fixed = [v for v in _sorted_vertices(g) if g.is_fixed(v)]
    free = [v for v in _sorted_vertices(g) if not g.is_fixed(v)]

    for v in fixed:
        d = g.degree(v)
        if d == 0 and spec.m == 0:
            yield Move("fix0", added_vertices=((v, True),)), g.remove_vertex(v)
        elif d == 1 and g.group.is_reflection:
            e = g.edges_at(v)[0]
            move = Move("fix0", added_vertices=((v, True),), added_edges=(_spec_of(e),))
            yield move, g.remove_vertex(v)

    for v in free:
        if g.degree(v) != 2:
            continue
        es = sorted(g.edges_at(v), key=lambda e: e.id)
        if any(e.is_loop for e in es):
            continue
        move = Move(
            "zero",
            added_vertices=((v, False),),
            added_edges=tuple(_spec_of(e) for e in es),
        )
        yield move, g.remove_vertex(v)

    for v in free:
        if g.degree(v) != 3:
            continue
        es = sorted(g.edges_at(v), key=lambda e: e.id)
        loops = [e for e in es if e.is_loop]
        if len(loops) != 1:
            continue
        plain = [e for e in es if not e.is_loop]
        move = Move(
            "loop1",
            added_vertices=((v, False),),
            added_edges=(_spec_of(loops[0]), _spec_of(plain[0])),
        )
        yield move, g.remove_vertex(v)

    for v in free:
        if g.degree(v) == 3 and not any(e.is_loop for e in g.edges_at(v)):
            yield from _one_reduction_candidates(g, v)

    if g.group.is_reflection:
        for v in fixed:
            if g.degree(v) == 2:
                yield from _fix1_candidates(g, v)

    if not g.group.is_reflection and k % 2 == 0 and (spec.m, spec.l) == (2, 2):
        yield from _twovertex_candidates(g)


def find_admissible_reduction(g: GainGraph, spec: CountSpec):
    """First admissible reduction of a tight graph, or an exhaustion report.

    A candidate is admissible when the reduced graph is again gain-tight
    for ``spec``.  Candidates are generated in the fixed order documented
    on ``_reduction_candidates``, so the returned move is reproducible.

    Exhaustion is legal only on base graphs and on graphs whose degree-3
    free vertices all match one of the two known blocking shapes; the
    returned report carries what was recognized so the caller can decide
    whether exhaustion was legitimate.
    """
    reduction_scope(g.group, spec)
    if not gain_sparse(g, spec).tight:
        raise HennebergError(f"reduction search expects a {spec.describe()}-tight graph")
    for move, reduced in _reduction_candidates(g, spec):
        if gain_sparse(reduced, spec).tight:
            return ReductionStep(move=move.as_reduction(), reduced=reduced)
    exceptional = []
    for v in _sorted_vertices(g):
        shape = exceptional_shape(g, spec, v)
        if shape is not None:
            exceptional.append((v, shape))
    return ExhaustionReport(
        base_label=is_base_graph(g, spec),
        exceptional=tuple(exceptional),
        graph_key=_graph_key(g),
    )


def one_reductions_at(g: GainGraph, spec: CountSpec, v) -> list:
    """All admissible 1-reductions at ``v`` (may be empty)."""
    steps = []
    for move, reduced in _one_reduction_candidates(g, v):
        if gain_sparse(reduced, spec).tight:
            steps.append(ReductionStep(move=move.as_reduction(), reduced=reduced))
    return steps


def exceptional_shape(g: GainGraph, spec: CountSpec, v) -> str | None:
    """Match ``v`` against the two local shapes that block every 1-reduction.

    Under the (2,2) count the shape is a degree-3 free vertex with a
    parallel pair to one free neighbour and one edge to a fixed neighbour;
    under the (1,2) count it is a degree-3 free vertex with three distinct
    all-fixed neighbours.  Anywhere else 1-reductions cannot all be blocked.
    """
    if g.is_fixed(v) or g.degree(v) != 3:
        return None
    es = g.edges_at(v)
    if any(e.is_loop for e in es):
        return None
    nb = [e.other(v) for e in es]
    distinct = set(nb)
    if (spec.m, spec.l) == (2, 2) and len(distinct) == 2:
        fixed_nb = [w for w in distinct if g.is_fixed(w)]
        free_nb = [w for w in distinct if not g.is_fixed(w)]
        if len(fixed_nb) == 1 and nb.count(free_nb[0]) == 2:
            return "one-free-one-fixed"
    if (spec.m, spec.l) == (1, 2) and len(distinct) == 3 and all(g.is_fixed(w) for w in nb):
        return "three-fixed"
    return None


# ---------------------------------------------------------------------------
# blockers
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class BlockerWitness:
    """A subgraph certifying why adding one edge breaks the counts.

    ``kind`` is "general-count" (the subgraph is tight for the governing
    count and stays connected with the edge) or "balanced" (the subgraph
    meets the plain 2n-3 count and stays balanced with the edge).
    """

    kind: str
    vertices: tuple
    edge_ids: tuple
    added_edge: str


def _connected_with(vertices, edges) -> bool:
    todo = {v for e in edges for v in (e.tail, e.head)} | set(vertices)
    if not todo:
        return True
    adj = {v: set() for v in todo}
    for e in edges:
        adj[e.tail].add(e.head)
        adj[e.head].add(e.tail)
    seen = set()
    stack = [next(iter(todo))]
    while stack:
        v = stack.pop()
        if v in seen:
            continue
        seen.add(v)
        stack.extend(adj[v] - seen)
    return seen == todo


def blocker_of(g_reduced: GainGraph, added_edge: str, spec: CountSpec) -> BlockerWitness:
    """Extract a minimal witness for why ``added_edge`` breaks sparsity.

    ``g_reduced`` must violate gain-sparsity for ``spec`` and satisfy it
    with the edge removed, so the violation is pinned on that edge.  The
    witness subgraph is minimal by vertex-set inclusion among violators
    (smallest vertex set first, general-count before balanced at equal
    size).  Exponential in the edge count; meant for desk-scale diagnosis.
    """
    e = g_reduced.edge_by_id(added_edge)
    rest = g_reduced.remove_edges([e.id])
    if not gain_sparse(rest, spec).ok:
        raise HennebergError("the graph violates the counts even without the added edge")
    if gain_sparse(g_reduced, spec).ok:
        raise HennebergError(f"adding edge {added_edge!r} keeps the graph within the counts")
    pool = sorted(rest.edges, key=lambda x: x.id)
    targets = {e.tail, e.head}
    best = None
    for size in range(1, len(pool) + 1):
        for subset in combinations(pool, size):
            verts = {v for x in subset for v in (x.tail, x.head)}
            if not targets <= verts:
                continue
            n_fixed = sum(1 for v in verts if rest.is_fixed(v))
            n_free = len(verts) - n_fixed
            key = (len(verts), tuple(sorted(verts, key=str)))
            if best is not None and key >= best[0]:
                continue
            if len(subset) == spec.rhs(n_free, n_fixed) and _connected_with(
                verts, list(subset) + [e]
            ):
                best = (key, BlockerWitness(
                    "general-count",
                    tuple(sorted(verts, key=str)),
                    tuple(x.id for x in subset),
                    e.id,
                ))
                continue
            if len(subset) == 2 * len(verts) - 3 and g_reduced.is_balanced(
                [x.id for x in subset] + [e.id]
            ):
                best = (key, BlockerWitness(
                    "balanced",
                    tuple(sorted(verts, key=str)),
                    tuple(x.id for x in subset),
                    e.id,
                ))
    if best is None:
        raise HennebergError(
            f"edge {added_edge!r} breaks the counts but neither witness clause matches"
        )
    return best[1]


# ---------------------------------------------------------------------------
# certificates
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Certificate:
    """A reduction trail from a tight graph down to a recognized base graph.

    ``steps`` lists the reduction moves in the order applied; ``evidence``
    carries the sparsity verdict of each reduced graph (all tight);
    ``base`` is the terminal graph and ``base_label`` names its shape.
    Replaying ``steps`` reversed as extensions rebuilds the input exactly.
    """

    spec: CountSpec
    steps: tuple
    evidence: tuple
    base: GainGraph
    base_label: str

    def __len__(self) -> int:
        return len(self.steps)


def certify_tight(g: GainGraph, spec: CountSpec) -> Certificate:
    """Reduce a gain-tight graph to a base graph, recording the trail.

    Raises :class:`TheoremContradiction` if a non-base graph exhausts all
    reduction candidates — the completeness guarantee for in-scope specs
    says that must never happen, so it indicates a bug rather than a
    property of the input.
    """
    reduction_scope(g.group, spec)
    verdict = gain_sparse(g, spec)
    if not verdict.tight:
        raise HennebergError(
            f"certification expects a {spec.describe()}-tight graph; got {verdict.status}"
        )
    steps = []
    evidence = []
    cur = g
    while True:
        label = is_base_graph(cur, spec)
        if label is not None:
            return Certificate(
                spec=spec,
                steps=tuple(steps),
                evidence=tuple(evidence),
                base=cur,
                base_label=label,
            )
        res = find_admissible_reduction(cur, spec)
        if isinstance(res, ExhaustionReport):
            raise TheoremContradiction(res, spec)
        steps.append(res.move)
        evidence.append(gain_sparse(res.reduced, spec))
        cur = res.reduced


def _same_graph(a: GainGraph, b: GainGraph) -> bool:
    if a.group != b.group:
        return False
    if set(a.vertices) != set(b.vertices) or a.fixed_vertices != b.fixed_vertices:
        return False
    k = a.group.order
    spec_set = lambda g: {(e.id, e.tail, e.head, e.gain % k) for e in g.edges}
    return spec_set(a) == spec_set(b)


def replay_certificate(cert: Certificate, g: GainGraph) -> GainGraph:
    """Rebuild ``g`` from the certificate's base by applying the extensions.

    Raises if the reconstruction does not match ``g`` exactly (same
    vertices, same edge ids, same gains).
    """
    cur = cert.base
    for move in reversed(cert.steps):
        cur = apply_extension(cur, move)
    if not _same_graph(cur, g):
        raise HennebergError("certificate replay does not reconstruct the input graph")
    return cur


def certificate_realization(
    cert: Certificate,
    j: int,
    field: str = "prime",
    seed: int = 0,
) -> tuple:
    """Replay a certificate carrying an isostatic placement for block ``j``.

    Starts from a random symmetric placement of the base graph and extends
    it across each step with ``extension_preserves_isostatic``, so the
    returned ``(graph, configuration)`` pair is rank-certified isostatic in
    block ``j``.  ``j`` must be one of ``certified_blocks`` for the
    certificate's spec.
    """
    cur = cert.base
    config = random_symmetric_config(cur, seed=seed, field=field)
    check = rho_j_isostatic(cur, j, config)
    if not check.ok:
        raise HennebergError(f"base graph is not isostatic in block {j}")
    for offset, move in enumerate(reversed(cert.steps)):
        config = extension_preserves_isostatic(cur, move, j, config, seed=seed + offset + 1)
        cur = apply_extension(cur, move)
    return cur, config


# ---------------------------------------------------------------------------
# the rigidity decision
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CombinatorialVerdict:
    """Outcome of the counting characterization of rigidity.

    ``rigid`` is True/False when the counts decide, None when no
    characterization is available for the group.  ``counts`` lists the
    specs consulted and ``witnesses`` the spanning tight edge sets found
    (aligned with ``counts``; None where none exists).
    """

    rigid: bool | None
    counts: tuple
    witnesses: tuple
    note: str = ""


def combinatorially_rigid(g: GainGraph) -> CombinatorialVerdict:
    """Decide rigidity of the covering framework from the quotient counts.

    The covering framework of ``g`` (under a generic symmetric placement)
    is rigid iff the quotient contains spanning tight subgraphs for both of
    the group's governing counts.  This characterization covers the
    reflection and rotations of order two and three; rotations with more
    than one fixed vertex are rejected (only the origin is fixed by a
    rotation), and for order four and up the verdict is None.

    One boundary case is decided directly: a single fixed vertex with no
    edges covers a one-point framework, which is rigid even though the
    counts have no room for it.
    """
    group = g.group
    if not group.is_reflection and len(g.fixed_vertices) > 1:
        raise HennebergError(
            "a rotation fixes only the origin, so at most one vertex may be fixed"
        )
    counts = theorem_counts(group)
    if counts is None:
        return CombinatorialVerdict(
            rigid=None,
            counts=(),
            witnesses=(),
            note=f"no counting characterization for rotation order {group.order}",
        )
    if len(g.vertices) == 1 and len(g.fixed_vertices) == 1 and not g.edges:
        return CombinatorialVerdict(
            rigid=True,
            counts=counts,
            witnesses=((), ()),
            note="single fixed vertex: the covering is one point",
        )
    if not g.is_connected():
        return CombinatorialVerdict(
            rigid=False,
            counts=counts,
            witnesses=(None, None),
            note="disconnected quotient: the covering framework is disconnected",
        )
    witnesses = tuple(spanning_tight_subgraph(g, spec) for spec in counts)
    return CombinatorialVerdict(
        rigid=all(w is not None for w in witnesses),
        counts=counts,
        witnesses=witnesses,
    )
