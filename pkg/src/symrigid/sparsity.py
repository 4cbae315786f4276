"""Counting oracles for gain-graph sparsity.

Everything here is exponential-time subset enumeration, deliberately: the
counts quantify over all subgraphs with balance side conditions, and the
enumeration IS the specification.  A soft size limit (see ``size_limits``)
keeps accidental big inputs from hanging; raise it via the
``SYMRIGID_MAX_SIZE`` environment variable when you know what you are doing.
"""

from __future__ import annotations

import os
from dataclasses import dataclass

from .gains import Edge, GainGraph, GainGraphError

DEFAULT_LIMITS = (10, 16, 12)  # |V|, |E|, group order


class SparsityError(ValueError):
    pass


class SizeLimitError(SparsityError):
    pass


def size_limits() -> tuple[int, int, int]:
    """Soft enumeration limits as (max vertices, max edges, max group order).

    ``SYMRIGID_MAX_SIZE`` overrides them: either a single integer N
    (giving N vertices and 2N edges) or a full ``V,E,K`` triple.
    """
    raw = os.environ.get("SYMRIGID_MAX_SIZE", "").strip()
    if not raw:
        return DEFAULT_LIMITS
    parts = [int(x) for x in raw.split(",")]
    if len(parts) == 1:
        return (parts[0], 2 * parts[0], DEFAULT_LIMITS[2])
    if len(parts) == 3:
        return (parts[0], parts[1], parts[2])
    raise SparsityError("SYMRIGID_MAX_SIZE must be an integer or a V,E,K triple")


def _guard(g: GainGraph) -> None:
    max_v, max_e, max_k = size_limits()
    if len(g.vertices) > max_v or len(g.edges) > max_e or g.group.order > max_k:
        raise SizeLimitError(
            f"graph with {len(g.vertices)} vertices, {len(g.edges)} edges, group "
            f"order {g.group.order} exceeds the enumeration limit "
            f"{max_v} vertices / {max_e} edges / order {max_k}; "
            "set SYMRIGID_MAX_SIZE to override"
        )


# ---------------------------------------------------------------------------
# Count specifications and verdicts
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CountSpec:
    """A (2, m, l) count, optionally paired with the (2,3) bound on
    balanced subgraphs (set ``balanced_bound`` for the gain-sparsity form)."""

    m: int
    l: int
    balanced_bound: bool = False

    def __post_init__(self) -> None:
        if not (0 <= self.m <= 2):
            raise SparsityError(f"m must be in [0, 2], got {self.m}")
        if not (0 <= self.l <= 3):
            raise SparsityError(f"l must be in [0, 3], got {self.l}")

    def rhs(self, n_free: int, n_fixed: int) -> int:
        return 2 * n_free + self.m * n_fixed - self.l

    def describe(self) -> str:
        if self.balanced_bound:
            return f"(2,{self.m},3,{self.l})-gain"
        return f"(2,{self.m},{self.l})"


@dataclass(frozen=True)
class ZjkSpec:
    """Parameters of the refined count for rotation groups of order >= 4."""

    k: int
    j: int

    def __post_init__(self) -> None:
        if self.k < 4:
            raise SparsityError(f"refined counts need group order >= 4, got {self.k}")
        if not (2 <= self.j <= self.k - 2):
            raise SparsityError(
                f"j must lie in [2, {self.k - 2}] for group order {self.k}, got {self.j}"
            )


@dataclass(frozen=True)
class SparsityVerdict:
    """Outcome of a sparsity check.

    For ``violated`` the witness fields name a subgraph breaking the bound
    (re-checkable: ``count`` edges against an allowance of ``bound``).  For
    ``sparse``/``tight`` they record the global count instead.
    """

    status: str  # "sparse" | "tight" | "violated"
    vertices: tuple = ()
    edges: tuple = ()
    count: int | None = None
    bound: int | None = None
    clause: str = ""

    @property
    def ok(self) -> bool:
        return self.status != "violated"

    @property
    def tight(self) -> bool:
        return self.status == "tight"


def _best_violation(violations):
    """Deterministic witness selection: lexicographically smallest vertex set."""
    return min(violations, key=lambda w: (w[0], w[1]))


# ---------------------------------------------------------------------------
# Plain counts
# ---------------------------------------------------------------------------


def _plain_violations(g: GainGraph, spec: CountSpec):
    """All vertex subsets whose induced subgraph breaks 2|Vfree|+m|Vfixed|-l.

    Induced subgraphs maximize the edge count for a fixed vertex set, so
    checking them covers all subgraphs.  Empty-edge subgraphs are exempt:
    with l >= 1 an isolated vertex would otherwise break every count, yet
    tight graphs may legitimately contain isolated vertices.
    """
    verts = list(g.vertices)
    n = len(verts)
    fixed = g.fixed_vertices
    vbit = {v: 1 << i for i, v in enumerate(verts)}
    edge_masks = [(e, vbit[e.tail] | vbit[e.head]) for e in g.edges]
    out = []
    for s in range(1, 1 << n):
        members = [v for v in verts if vbit[v] & s]
        induced = [e for (e, mask) in edge_masks if mask & s == mask]
        if not induced:
            continue
        n_fixed = sum(1 for v in members if v in fixed)
        allowed = spec.rhs(len(members) - n_fixed, n_fixed)
        if len(induced) > allowed:
            key = tuple(sorted(str(v) for v in members))
            out.append((key, tuple(e.id for e in induced), len(induced), allowed))
    return out


def plain_count_ok(g: GainGraph, spec: CountSpec) -> SparsityVerdict:
    """Check the plain (2, m, l) count over all induced subgraphs."""
    _guard(g)
    violations = _plain_violations(g, spec)
    n_fixed = len(g.fixed_vertices)
    total_allowed = spec.rhs(len(g.vertices) - n_fixed, n_fixed)
    if violations:
        key, eids, count, bound = _best_violation(violations)
        return SparsityVerdict("violated", key, eids, count, bound, clause="count")
    status = "tight" if len(g.edges) == total_allowed else "sparse"
    return SparsityVerdict(status, count=len(g.edges), bound=total_allowed)


# ---------------------------------------------------------------------------
# Balanced-subgraph bound
# ---------------------------------------------------------------------------


def _balanced_violations(g: GainGraph):
    """Balanced subgraphs breaking |E(H)| <= 2|V(H)| - 3.

    Depth-first over edge subsets, keeping a rollback union-find with
    potentials so each inclusion is checked in near-constant time; branches
    that cannot reach a violation are cut (every further edge adds at most
    +1 to the count but never lowers the vertex bound).  Loops never appear
    in balanced subgraphs (their gain is non-identity by construction), and
    only free-free edges constrain the potentials.
    """
    k = g.group.order
    fixed = g.fixed_vertices
    edges = [e for e in g.edges if not e.is_loop]
    parent: dict = {}
    pot: dict = {}
    rank: dict = {}

    def find(x):
        d = 0
        while parent[x] != x:
            d = (d + pot[x]) % k
            x = parent[x]
        return x, d

    violations = []
    support: dict = {}  # vertex -> incidence count in current subset
    chosen: list = []  # edge ids of the current subset
    trail: list = []

    def include(e: Edge) -> bool:
        """Add e to the union-find if balance allows; record undo info."""
        if e.tail in fixed or e.head in fixed:
            trail.append(None)
            return True
        for v in (e.tail, e.head):
            if v not in parent:
                parent[v] = v
                pot[v] = 0
                rank[v] = 0
        ru, du = find(e.tail)
        rv, dv = find(e.head)
        if ru == rv:
            if (e.gain + dv - du) % k:
                return False
            trail.append(None)
            return True
        if rank[ru] < rank[rv]:
            ru, rv = rv, ru
            du, dv = dv, du
            gain = (-e.gain) % k
        else:
            gain = e.gain % k
        parent[rv] = ru
        pot[rv] = (du - gain - dv) % k
        trail.append((rv, rank[ru]))
        if rank[ru] == rank[rv]:
            rank[ru] += 1
        return True

    def undo():
        op = trail.pop()
        if op is not None:
            rv, old_rank = op
            ru = parent[rv]
            parent[rv] = rv
            pot[rv] = 0
            rank[ru] = old_rank

    def touch(e: Edge, delta: int):
        for v in {e.tail, e.head}:
            support[v] = support.get(v, 0) + delta
            if support[v] == 0:
                del support[v]

    def walk(idx: int, size: int):
        if size >= 1:
            bound = 2 * len(support) - 3
            if size > bound:
                key = tuple(sorted(str(v) for v in support))
                violations.append((key, tuple(chosen), size, bound))
        if idx == len(edges):
            return
        remaining = len(edges) - idx
        if size >= 1 and size + remaining <= 2 * len(support) - 3:
            # Even including everything cannot beat the bound: each edge adds
            # one to the left side and never shrinks the right side.
            return
        e = edges[idx]
        if include(e):
            touch(e, +1)
            chosen.append(e.id)
            walk(idx + 1, size + 1)
            chosen.pop()
            touch(e, -1)
            undo()
        walk(idx + 1, size)

    walk(0, 0)
    return violations


def max_balanced_edges(g: GainGraph, subset=None) -> tuple[int, tuple]:
    """Largest balanced edge set inside the subgraph induced on ``subset``.

    Edges meeting a fixed vertex never upset balance, so they are always
    included; on the free part the best potential-consistent subset is found
    by exhaustive search over edge subsets with pruning.
    """
    verts = set(g.vertices if subset is None else subset)
    induced = [e for e in g.edges if e.tail in verts and e.head in verts]
    fixed = g.fixed_vertices
    always = [e for e in induced if e.tail in fixed or e.head in fixed]
    candidates = [
        e
        for e in induced
        if not e.is_loop and e.tail not in fixed and e.head not in fixed
    ]
    k = g.group.order

    best_count = 0
    best_set: tuple = ()

    def walk(idx: int, chosen: list):
        nonlocal best_count, best_set
        if len(chosen) > best_count:
            best_count = len(chosen)
            best_set = tuple(e.id for e in chosen)
        if idx == len(candidates):
            return
        if len(chosen) + (len(candidates) - idx) <= best_count:
            return
        e = candidates[idx]
        if g.is_balanced(chosen + [e]):
            walk(idx + 1, chosen + [e])
        walk(idx + 1, chosen)

    walk(0, [])
    ids = tuple(e.id for e in always) + best_set
    return len(ids), ids


def gain_sparse(g: GainGraph, spec: CountSpec) -> SparsityVerdict:
    """Check both gain-sparsity clauses: the (2, m, l) count on every
    non-empty subgraph, and the (2,3) bound on every balanced one."""
    _guard(g)
    if spec.m > spec.l:
        raise SparsityError(f"gain sparsity needs m <= l, got m={spec.m}, l={spec.l}")
    violations = [v + ("count",) for v in _plain_violations(g, spec)]
    violations += [v + ("balanced",) for v in _balanced_violations(g)]
    if violations:
        key, eids, count, bound, clause = min(violations, key=lambda w: (w[0], w[4]))
        return SparsityVerdict("violated", key, eids, count, bound, clause=clause)
    n_fixed = len(g.fixed_vertices)
    total_allowed = spec.rhs(len(g.vertices) - n_fixed, n_fixed)
    status = "tight" if len(g.edges) == total_allowed else "sparse"
    return SparsityVerdict(status, count=len(g.edges), bound=total_allowed)


# ---------------------------------------------------------------------------
# Refined counts for rotation groups of order >= 4
# ---------------------------------------------------------------------------


def _s_sets(k: int, j: int) -> tuple[frozenset, frozenset]:
    """Subgroup orders classed by the residue of j: (S_0, S_{-1} union S_1).

    Orders are divisors n of k with n >= 2 (n > 2 when j is odd) and
    j = 0 (resp. +-1) mod n.
    """
    lo = 3 if j % 2 else 2
    s0, s1 = set(), set()
    for n in range(lo, k + 1):
        if k % n:
            continue
        r = j % n
        if r == 0:
            s0.add(n)
        if r == 1 or r == n - 1:
            s1.add(n)
    return frozenset(s0), frozenset(s1)


def alpha(g: GainGraph, j: int, X) -> int:
    """Count correction for one connected edge set under the j-th rotation block.

    The five cases depend on balance, the subgroup generated by the cycle
    gains, the count of fixed vertices, and (for fixed-vertex-free sets)
    proper near-balance.
    """
    edges = g.resolve_edges(X)
    k = g.group.order
    comps = g.components(edges)
    if len(comps) != 1:
        raise SparsityError("alpha needs a connected edge set")
    verts = comps[0][0]
    n_fixed = len(verts & g.fixed_vertices)
    if g.is_balanced(edges):
        return 0
    order = g.subgroup_order(edges)
    if j % 2 == 1 and order == 2:
        return 1
    s0, s1 = _s_sets(k, j)
    if order in s1:
        return 2 - n_fixed
    if order in s0:
        return 2 - 2 * n_fixed
    if n_fixed == 0 and order not in (2, 3):
        if g.near_balance_witness(edges) is not None:
            return 2
    return 3 - 2 * n_fixed


def f_count(g: GainGraph, j: int, F) -> int:
    """Edge allowance for an edge set: sum of 2|V(X)|-3+alpha over components."""
    edges = g.resolve_edges(F)
    total = 0
    for verts, comp_edges in g.components(edges):
        total += 2 * len(verts) - 3 + alpha(g, j, comp_edges)
    return total


def zjk_sparse(g: GainGraph, spec: ZjkSpec) -> SparsityVerdict:
    """Check |F| <= f(F) over every non-empty edge subset.

    Both sides of the bound are additive over connected components, so any
    violating subset contains a violating connected one; the enumeration
    therefore only inspects connected subsets, and witnesses are connected.
    """
    _guard(g)
    if g.group.order != spec.k:
        raise SparsityError(
            f"spec is for group order {spec.k}, graph has order {g.group.order}"
        )
    edges = list(g.edges)
    n = len(edges)
    alpha_cache: dict = {}

    def cached_alpha(comp_edges) -> int:
        key = frozenset(e.id for e in comp_edges)
        a = alpha_cache.get(key)
        if a is None:
            a = alpha(g, spec.j, comp_edges)
            alpha_cache[key] = a
        return a

    def f_of(subset) -> int:
        return sum(
            2 * len(verts) - 3 + cached_alpha(comp_edges)
            for verts, comp_edges in g.components(subset)
        )

    violations = []
    for mask in range(1, 1 << n):
        subset = [edges[i] for i in range(n) if mask >> i & 1]
        comps = g.components(subset)
        if len(comps) != 1:
            continue
        verts, comp_edges = comps[0]
        allowed = 2 * len(verts) - 3 + cached_alpha(comp_edges)
        if len(subset) > allowed:
            key = tuple(sorted(str(v) for v in verts))
            violations.append((key, tuple(e.id for e in subset), len(subset), allowed))
    if violations:
        key, eids, count, bound = _best_violation(violations)
        return SparsityVerdict("violated", key, eids, count, bound, clause="f-count")
    total_allowed = f_of(edges)
    status = "tight" if len(edges) == total_allowed else "sparse"
    return SparsityVerdict(status, count=len(edges), bound=total_allowed)


# ---------------------------------------------------------------------------
# Tight-subgraph extraction
# ---------------------------------------------------------------------------


def spanning_tight_subgraph(g: GainGraph, spec: CountSpec):
    """Greedily grow an independent edge set; succeed iff it reaches the
    full count 2|Vfree| + m|Vfixed| - l.

    Returns the chosen edge ids (possibly the empty tuple, when the target
    is zero) or None when no spanning tight subgraph exists.  Greedy growth
    is exchange-safe here because the counts are monotone and
    subgraph-closed; the insertion-order invariance is covered by tests
    rather than assumed silently.
    """
    _guard(g)
    n_fixed = len(g.fixed_vertices)
    target = spec.rhs(len(g.vertices) - n_fixed, n_fixed)
    if target < 0:
        return None
    chosen: list = []
    for e in g.edges:
        trial = chosen + [e]
        if gain_sparse(g.with_edges(trial), spec).ok:
            chosen = trial
    if len(chosen) != target:
        return None
    return tuple(e.id for e in chosen)


def connected_tight_components(g: GainGraph, spec: CountSpec):
    """Split a tight graph into its single edge-carrying component plus
    isolated vertices.

    A tight graph with edges has exactly one component carrying them (two
    components would each pay the -l deficit); anything else is rejected.
    Returns ((component vertices, component edge ids), isolated vertices).
    """
    if spec.l < 1 or spec.m > spec.l:
        raise SparsityError("component splitting needs 1 <= l and m <= l")
    verdict = plain_count_ok(g, spec)
    if verdict.status != "tight":
        raise SparsityError(f"input graph is not {spec.describe()}-tight: {verdict}")
    if not g.edges:
        raise SparsityError("component splitting needs a non-empty edge set")
    comps = g.components()
    if len(comps) != 1:
        raise SparsityError(
            "tight graph with several edge-carrying components; "
            "the count bookkeeping has gone wrong"
        )
    verts, comp_edges = comps[0]
    isolated = tuple(v for v in g.vertices if v not in verts)
    return (tuple(sorted(verts, key=g.vertex_index)), tuple(e.id for e in comp_edges)), isolated
