"""Shared helpers for the test suite.

Everything here is deliberately independent of the library internals it is
used to test: the canonical form, the enumerators and the reference sparsity
checker work on a plain tuple encoding of gain graphs and only convert to
``GainGraph`` objects at the edges.

Light encoding: a graph is ``(n, f, edges)`` where vertices are ``0..n-1``,
vertices ``0..f-1`` are fixed, and ``edges`` is a sequence of ``(a, b, g)``
with ``a <= b`` and the gain ``g`` read in the direction ``a -> b``.
"""

from __future__ import annotations

import itertools
import random
from collections import Counter

from symrigid.gains import GainGraph
from symrigid.groups import CyclicGroup, reflection_group, rotation_group
from symrigid.henneberg import Move
from symrigid.sparsity import CountSpec

# Primes around 2**30 with p = 1 (mod lcm(4, k)), small enough for the
# vectorized elimination path; the library default stays at 61 bits.
FAST_PRIMES = {2: 1073741833, 3: 1073741833, 4: 1073741833, 5: 1073742361}


def _lcm(a: int, b: int) -> int:
    from math import gcd

    return a * b // gcd(a, b)


def _is_prime(n: int) -> bool:
    if n < 2:
        return False
    d = 2
    while d * d <= n:
        if n % d == 0:
            return False
        d += 1
    return True


for _k, _p in FAST_PRIMES.items():
    assert _is_prime(_p), _p
    assert (_p - 1) % _lcm(4, _k) == 0, (_k, _p)


def group_named(name: str) -> CyclicGroup:
    """Groups used across the suite: "cs" and "c2".."c5"."""
    if name == "cs":
        return reflection_group()
    return rotation_group(int(name[1:]))


def fast_prime(group: CyclicGroup) -> int:
    return FAST_PRIMES[group.order]


# ---------------------------------------------------------------------------
# light encoding <-> GainGraph
# ---------------------------------------------------------------------------


def light_to_graph(group: CyclicGroup, n: int, f: int, edges) -> GainGraph:
    verts = [(i, i < f) for i in range(n)]
    especs = [(f"e{t}", a, b, g) for t, (a, b, g) in enumerate(edges)]
    return GainGraph(group, verts, especs)


def graph_to_light(g: GainGraph):
    """Relabel a GainGraph to the light encoding (fixed vertices first)."""
    fixed = sorted(g.fixed_vertices, key=str)
    free = sorted(g.free_vertices, key=str)
    pos = {v: i for i, v in enumerate(fixed + free)}
    edges = []
    for e in g.edges:
        a, b, gain = pos[e.tail], pos[e.head], e.gain % g.group.order
        if a > b:
            a, b, gain = b, a, (-gain) % g.group.order
        edges.append((a, b, gain))
    return len(pos), len(fixed), tuple(sorted(edges))


# ---------------------------------------------------------------------------
# canonical form under relabelling, switching and fixed-edge re-gaining
# ---------------------------------------------------------------------------


def shift_min(bundle, k: int):
    """Lexicographically least translate of a sorted gain tuple."""
    best = None
    for c in range(k):
        cand = tuple(sorted((g - c) % k for g in bundle))
        if best is None or cand < best:
            best = cand
    return best


def _dir_invariant(bundle, k: int):
    rev = tuple((-g) % k for g in bundle)
    return min(shift_min(bundle, k), shift_min(rev, k))


def _vertex_classes(k: int, n: int, f: int, edges):
    """Partition vertices by label-invariant structure, fixed classes first."""
    loops = [[] for _ in range(n)]
    slot_gains: dict = {}
    for a, b, g in edges:
        if a == b:
            gg = g % k
            loops[a].append(min(gg, k - gg))
        else:
            slot_gains.setdefault((a, b), []).append(g % k)
    profile = [[] for _ in range(n)]
    nbrs = [Counter() for _ in range(n)]
    for (a, b), gains in slot_gains.items():
        nbrs[a][b] += len(gains)
        nbrs[b][a] += len(gains)
        if a >= f and b >= f:
            inv = _dir_invariant(tuple(sorted(gains)), k)
            profile[a].append((len(gains), inv))
            profile[b].append((len(gains), inv))
    sig = [
        (
            0 if v < f else 1,
            tuple(sorted(loops[v])),
            tuple(sorted(nbrs[v].values())),
            tuple(sorted(profile[v])),
        )
        for v in range(n)
    ]
    ids = _ranks(sig)
    for _ in range(3):
        sig2 = [
            (ids[v], tuple(sorted((c, ids[u]) for u, c in nbrs[v].items())))
            for v in range(n)
        ]
        new = _ranks(sig2)
        if new == ids:
            break
        ids = new
    classes: dict = {}
    for v in range(n):
        classes.setdefault(ids[v], []).append(v)
    return [classes[i] for i in sorted(classes)]


def _ranks(values):
    order = {v: i for i, v in enumerate(sorted(set(values)))}
    return [order[v] for v in values]


def _find(parent, pot, x):
    p = 0
    while parent[x] != x:
        p += pot[x]
        x = parent[x]
    return x, p


def _key_for_order(k: int, f: int, edges, order):
    """Edge key for one vertex order, minimized over switching choices."""
    pos = {v: i for i, v in enumerate(order)}
    n = len(order)
    fixed_part = []
    slots: dict = {}
    for a, b, g in edges:
        i, j = pos[a], pos[b]
        if a == b:
            gg = g % k
            fixed_part.append((i, i, min(gg, k - gg)))
        elif i < f or j < f:
            fixed_part.append((min(i, j), max(i, j), 0))
        else:
            if i <= j:
                slots.setdefault((i, j), []).append(g % k)
            else:
                slots.setdefault((j, i), []).append((-g) % k)
    items = sorted(slots.items())
    best = None

    def rec(idx, parent, pot, acc):
        nonlocal best
        if idx == len(items):
            key = tuple(sorted(acc + fixed_part))
            if best is None or key < best:
                best = key
            return
        (i, j), gains = items[idx]
        ri, pi = _find(parent, pot, i)
        rj, pj = _find(parent, pot, j)
        base = [(g + pi - pj) % k for g in gains]
        if ri == rj:
            norm = sorted(base)
            rec(idx + 1, parent, pot, acc + [(i, j, g) for g in norm])
            return
        # a new tree slot: every shift of the far component is still free,
        # so try each shift achieving the least bundle
        options: dict = {}
        for c in range(k):
            t = tuple(sorted((g - c) % k for g in base))
            options.setdefault(t, []).append(c)
        tmin = min(options)
        for c in options[tmin]:
            par2, pot2 = parent[:], pot[:]
            par2[rj] = ri
            pot2[rj] = c
            rec(idx + 1, par2, pot2, acc + [(i, j, g) for g in tmin])

    rec(0, list(range(n)), [0] * n, [])
    return best if best is not None else tuple(sorted(fixed_part))


def canon_key(k: int, n: int, f: int, edges):
    """Canonical key of a light graph.

    Two light graphs get the same key exactly when one maps to the other by
    a fixed-preserving relabelling combined with switching at free vertices,
    edge reversal, and re-gaining of fixed-incident edges.
    """
    classes = _vertex_classes(k, n, f, edges)
    best = None
    for perm_parts in itertools.product(
        *(itertools.permutations(cls) for cls in classes)
    ):
        order = [v for part in perm_parts for v in part]
        key = _key_for_order(k, f, edges, order)
        if best is None or key < best:
            best = key
    return (n, f, best)


def canon_key_graph(g: GainGraph):
    n, f, edges = graph_to_light(g)
    return canon_key(g.group.order, n, f, edges)


# ---------------------------------------------------------------------------
# gain bundles per slot kind
# ---------------------------------------------------------------------------


def _all_bundles(k: int):
    out = []
    for size in range(1, k + 1):
        out.extend(itertools.combinations(range(k), size))
    return out


def _tree_bundles(k: int):
    return [b for b in _all_bundles(k) if b == shift_min(b, k)]


def _loop_bundles(k: int):
    """Valid loop gain sets, one normalized gain per inverse pair."""
    reps = range(1, k // 2 + 1)
    out = []
    for size in range(0, len(reps) + 1):
        out.extend(itertools.combinations(reps, size))
    return out


# ---------------------------------------------------------------------------
# exhaustive enumeration up to equivalence
# ---------------------------------------------------------------------------


class _Rollback:
    """Union-find with explicit undo, no path compression."""

    def __init__(self, n: int):
        self.parent = list(range(n))
        self.size = [1] * n
        self.trail = []

    def find(self, x: int) -> int:
        while self.parent[x] != x:
            x = self.parent[x]
        return x

    def union(self, a: int, b: int) -> bool:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            self.trail.append(None)
            return False
        if self.size[ra] < self.size[rb]:
            ra, rb = rb, ra
        self.parent[rb] = ra
        self.size[ra] += self.size[rb]
        self.trail.append((ra, rb))
        return True

    def undo(self) -> None:
        last = self.trail.pop()
        if last is not None:
            ra, rb = last
            self.parent[rb] = rb
            self.size[ra] -= self.size[rb]


def enumerate_gain_graphs(
    group: CyclicGroup,
    max_v: int,
    max_e: int,
    connected: bool = True,
    max_fixed: int | None = None,
):
    """All gain graphs up to equivalence, as light tuples ``(n, f, edges)``.

    For rotations the fixed-vertex count is capped at one unless
    ``max_fixed`` says otherwise (only the origin is fixed by a rotation).
    """
    k = group.order
    all_b = _all_bundles(k)
    tree_b = _tree_bundles(k)
    loop_b = [b for b in _loop_bundles(k) if b]
    for n in range(1, max_v + 1):
        f_cap = n if group.is_reflection else min(1, n)
        if max_fixed is not None:
            f_cap = min(f_cap, max_fixed)
        for f in range(0, f_cap + 1):
            yield from _enumerate_nf(
                k, n, f, max_e, connected, all_b, tree_b, loop_b
            )


def _enumerate_nf(k, n, f, max_e, connected, all_b, tree_b, loop_b):
    slots = []
    for a in range(n):
        if a >= f:
            slots.append((a, a))
        for b in range(a + 1, n):
            slots.append((a, b))
    seen = set()
    conn = _Rollback(n)
    free_conn = _Rollback(n)
    edges = []

    def options(a, b):
        if a == b:
            return loop_b
        if a < f:
            return [(0,)]  # fixed-incident gains are pure bookkeeping
        if free_conn.find(a) != free_conn.find(b):
            return tree_b
        return all_b

    def rec(idx, used):
        if idx == len(slots):
            if connected and (n > 1 and conn.size[conn.find(0)] != n):
                return
            key = canon_key(k, n, f, edges)
            if key not in seen:
                seen.add(key)
                yield (n, f, tuple(edges))
            return
        a, b = slots[idx]
        # leave the slot empty
        yield from rec(idx + 1, used)
        if used >= max_e:
            return
        is_loop = a == b
        for bundle in options(a, b):
            if used + len(bundle) > max_e:
                continue
            if not is_loop:
                conn.union(a, b)
                if a >= f:
                    free_conn.union(a, b)
            for g in bundle:
                edges.append((a, b, g))
            yield from rec(idx + 1, used + len(bundle))
            del edges[-len(bundle):]
            if not is_loop:
                conn.undo()
                if a >= f:
                    free_conn.undo()

    yield from rec(0, 0)


# ---------------------------------------------------------------------------
# exhaustive enumeration of gain-tight graphs (shape first, then gains)
# ---------------------------------------------------------------------------


def _canon_shape(n, f, mults):
    """Canonical key for a multiplicity assignment ``(a, b) -> count``."""
    loops = [0] * n
    nbrs = [Counter() for _ in range(n)]
    for (a, b), c in mults.items():
        if a == b:
            loops[a] = c
        else:
            nbrs[a][b] += c
            nbrs[b][a] += c
    sig = [
        (0 if v < f else 1, loops[v], tuple(sorted(nbrs[v].values())))
        for v in range(n)
    ]
    ids = _ranks(sig)
    for _ in range(3):
        sig2 = [
            (ids[v], tuple(sorted((c, ids[u]) for u, c in nbrs[v].items())))
            for v in range(n)
        ]
        new = _ranks(sig2)
        if new == ids:
            break
        ids = new
    classes: dict = {}
    for v in range(n):
        classes.setdefault(ids[v], []).append(v)
    parts = [classes[i] for i in sorted(classes)]
    best = None
    items = [(a, b, c) for (a, b), c in mults.items()]
    for perm_parts in itertools.product(*(itertools.permutations(p) for p in parts)):
        order = [v for part in perm_parts for v in part]
        pos = {v: i for i, v in enumerate(order)}
        key = tuple(
            sorted(
                (min(pos[a], pos[b]), max(pos[a], pos[b]), c) for a, b, c in items
            )
        )
        if best is None or key < best:
            best = key
    return best


def _shapes(k, n, f, spec: CountSpec):
    """All edge-multiplicity shapes meeting the plain count exactly.

    Fixed vertices are interchangeable, and so are free ones, so the search
    only keeps assignments whose weighted degrees are non-increasing inside
    each block; ``_canon_shape`` mops up the remaining ties.
    """
    target = spec.rhs(n - f, f)
    if target < 0:
        return
    m, l = spec.m, spec.l
    # rows[a] = slots whose smaller endpoint is a, so wdeg(a) is final once
    # row a has been filled in
    rows = []
    for a in range(n):
        row = []
        if a >= f and 2 - l >= 1:
            row.append(((a, a), min(2 - l, k // 2)))
        for b in range(a + 1, n):
            if b < f:
                cap = 1 if 2 * m - l >= 1 else 0
            elif a < f:
                cap = 1 if 2 + m - l >= 1 else 0
            else:
                cap = min(k, 4 - l)
            if cap > 0:
                row.append(((a, b), cap))
        rows.append(row)
    # vertex-subset counters: cnt[S] tracks edges inside S, bounded by rhs[S]
    full = 1 << n
    rhs = [0] * full
    for s in range(1, full):
        nf = bin(s >> f).count("1") if f < n else 0
        n0 = bin(s & ((1 << f) - 1)).count("1")
        rhs[s] = 2 * nf + m * n0 - l
    sup_lists = {}
    suffix = {}
    tail = 0
    for a in range(n - 1, -1, -1):
        suffix[(a, len(rows[a]))] = tail
        for j in range(len(rows[a]) - 1, -1, -1):
            (va, vb), cap = rows[a][j]
            tail += cap
            suffix[(a, j)] = tail
            msk = (1 << va) | (1 << vb)
            rest = [v for v in range(n) if not (msk >> v) & 1]
            lst = []
            for bits in range(1 << len(rest)):
                s = msk
                t = bits
                i = 0
                while t:
                    if t & 1:
                        s |= 1 << rest[i]
                    t >>= 1
                    i += 1
                lst.append(s)
            sup_lists[(va, vb)] = lst
    big = target + 1
    cnt = [0] * full
    inc = [0] * n
    seen = set()
    mults: dict = {}

    def fill(a, j, used, rowdeg, prev):
        row = rows[a]
        if used + suffix[(a, j)] < target:
            return
        if j == len(row):
            nxt = big if a + 1 == f else rowdeg
            yield from walk(a + 1, used, nxt)
            return
        yield from fill(a, j + 1, used, rowdeg, prev)
        (va, vb), cap = row[j]
        lst = sup_lists[(va, vb)]
        loop = va == vb
        placed = 0
        for c in range(1, cap + 1):
            if used + c > target or rowdeg + c > prev:
                break
            ok = True
            for s in lst:
                cnt[s] += 1
                if cnt[s] > rhs[s]:
                    ok = False
            if not ok:
                for s in lst:
                    cnt[s] -= 1
                break
            placed = c
            mults[(va, vb)] = c
            if not loop:
                inc[vb] += 1
            yield from fill(a, j + 1, used + c, rowdeg + c, prev)
        if placed:
            del mults[(va, vb)]
            for s in lst:
                cnt[s] -= placed
            if not loop:
                inc[vb] -= placed

    def walk(a, used, prev):
        if a == n:
            if used == target:
                key = _canon_shape(n, f, mults)
                if key not in seen:
                    seen.add(key)
                    yield dict(mults)
            return
        base = inc[a]
        if base > prev:
            return
        yield from fill(a, 0, used, base, prev)

    yield from walk(0, 0, big)


def enumerate_tight_candidates(group: CyclicGroup, spec: CountSpec, max_v: int):
    """Candidate tight graphs up to equivalence: every graph whose edge
    multiset meets the plain count exactly on the whole vertex set and
    respects it on subsets.  The balanced bound is *not* applied here, so
    callers filter with the sparsity oracle under test."""
    k = group.order
    all_b = {s: [b for b in _all_bundles(k) if len(b) == s] for s in range(1, k + 1)}
    tree_b = {s: [b for b in _tree_bundles(k) if len(b) == s] for s in range(1, k + 1)}
    loop_b = {
        s: [b for b in _loop_bundles(k) if len(b) == s] for s in range(0, k // 2 + 1)
    }
    for n in range(1, max_v + 1):
        f_cap = n if group.is_reflection else min(1, n)
        for f in range(0, f_cap + 1):
            seen = set()
            for mults in _shapes(k, n, f, spec):
                yield from _assign_gains(
                    group, k, n, f, mults, all_b, tree_b, loop_b, seen
                )


def _assign_gains(group, k, n, f, mults, all_b, tree_b, loop_b, seen):
    pair_slots = sorted((a, b) for (a, b) in mults if a != b)
    loop_slots = sorted(a for (a, b) in mults if a == b)
    # spanning forest of the free-free support: those slots only need one
    # bundle per shift class, switching supplies the rest
    uf = _Rollback(n)
    tree = set()
    for a, b in pair_slots:
        if a >= f and uf.union(a, b):
            tree.add((a, b))
    choice_sets = []
    for a, b in pair_slots:
        c = mults[(a, b)]
        if a < f:
            choice_sets.append([(0,) * c])
        elif (a, b) in tree:
            choice_sets.append(tree_b[c])
        else:
            choice_sets.append(all_b[c])
    for a in loop_slots:
        choice_sets.append(loop_b[mults[(a, a)]])
    slots = pair_slots + [(a, a) for a in loop_slots]
    for combo in itertools.product(*choice_sets):
        edges = []
        for (a, b), bundle in zip(slots, combo):
            for g in bundle:
                edges.append((a, b, g))
        edges = tuple(sorted(edges))
        key = canon_key(k, n, f, edges)
        if key in seen:
            continue
        seen.add(key)
        yield (n, f, edges)


# ---------------------------------------------------------------------------
# independent reference for the sparsity counts
# ---------------------------------------------------------------------------


def reference_verdict(k: int, n: int, f: int, edges, spec: CountSpec) -> str:
    """Brute-force sparsity status over every edge subset.

    Checks, for each nonempty edge subset: the plain (2,m,l) bound on its
    support, and -- when its free part carries no unbalanced cycle -- the
    (2,3) bound on its support.  Returns "violated", "tight" or "sparse".
    """
    edges = list(edges)
    ecount = len(edges)
    m, l = spec.m, spec.l
    endmask = [(1 << a) | (1 << b) for a, b, _g in edges]
    full = 1 << ecount
    sup = [0] * full
    state: list = [None] * full  # (parent, potential) of the free part
    state[0] = (tuple(range(n)), (0,) * n)
    low_index = {1 << i: i for i in range(ecount)}
    for mask in range(1, full):
        low = mask & -mask
        e = low_index[low]
        prev = mask ^ low
        sup[mask] = sup[prev] | endmask[e]
        st = state[prev]
        if st is None:
            continue
        a, b, g = edges[e]
        if a < f or b < f:
            if a == b:
                state[mask] = None  # a loop at a fixed vertex never validates
            else:
                state[mask] = st  # free part untouched
            continue
        parent, pot = st
        if a == b:
            state[mask] = st if g % k == 0 else None
            continue

        def find(x):
            p = 0
            while parent[x] != x:
                p += pot[x]
                x = parent[x]
            return x, p

        ra, pa = find(a)
        rb, pb = find(b)
        if ra == rb:
            state[mask] = st if (g + pa - pb) % k == 0 else None
        else:
            par2, pot2 = list(parent), list(pot)
            par2[rb] = ra
            pot2[rb] = (g + pa - pb) % k
            state[mask] = (tuple(par2), tuple(pot2))
    fixed_mask = (1 << f) - 1
    for mask in range(1, full):
        s = sup[mask]
        cnt = bin(mask).count("1")
        n0 = bin(s & fixed_mask).count("1")
        nf = bin(s >> f).count("1")
        if cnt > 2 * nf + m * n0 - l:
            return "violated"
        if state[mask] is not None and cnt > 2 * (nf + n0) - 3:
            return "violated"
    total_rhs = spec.rhs(n - f, f)
    return "tight" if ecount == total_rhs and total_rhs >= 0 else "sparse"


# ---------------------------------------------------------------------------
# random instances
# ---------------------------------------------------------------------------


def random_light(
    rng: random.Random,
    group: CyclicGroup,
    max_v: int,
    max_e: int | None = None,
    max_fixed: int | None = None,
):
    """A random valid light graph, edge count roughly uniform."""
    k = group.order
    n = rng.randint(1, max_v)
    f_cap = n if group.is_reflection else min(1, n)
    if max_fixed is not None:
        f_cap = min(f_cap, max_fixed)
    f = rng.randint(0, f_cap)
    cap = max_e if max_e is not None else 2 * n + 2
    target = rng.randint(0, cap)
    pair_sets: dict = {}
    loop_sets: dict = {}
    edges = []
    for _ in range(6 * target + 6):
        if len(edges) >= target:
            break
        a = rng.randrange(n)
        b = rng.randrange(n)
        if a > b:
            a, b = b, a
        if a == b:
            if a < f or k == 1:
                continue
            g = rng.randrange(1, k)
            have = loop_sets.setdefault(a, set())
            if g in have or (-g) % k in have:
                continue
            have.add(g)
            edges.append((a, a, g))
            continue
        have = pair_sets.setdefault((a, b), set())
        if b < f:
            g = 0
            if have:
                continue
        elif a < f:
            g = rng.randrange(k)
            if have:
                continue
        else:
            g = rng.randrange(k)
            if g in have:
                continue
        have.add(g)
        edges.append((a, b, g))
    return n, f, tuple(sorted(edges))


def random_graph(rng, group, max_v, max_e=None, max_fixed=None) -> GainGraph:
    n, f, edges = random_light(rng, group, max_v, max_e, max_fixed)
    return light_to_graph(group, n, f, edges)


# ---------------------------------------------------------------------------
# random extension moves
# ---------------------------------------------------------------------------


def _fresh(g: GainGraph, base: str):
    used = {str(v) for v in g.vertices} | {str(e.id) for e in g.edges}
    i = 0
    while f"{base}{i}" in used:
        i += 1
    return f"{base}{i}"


def synthesize_move(
    rng: random.Random, g: GainGraph, kind: str, spec: CountSpec, blocks
):
    """A random structurally valid move of the given kind, or None.

    The move is chosen to keep a ``spec``-tight graph tight and to respect
    the side conditions of the blocks in ``blocks``; geometric degeneracies
    are left for the placement machinery to resample around.
    """
    k = g.group.order
    verts = sorted(g.vertices, key=str)
    free = sorted(g.free_vertices, key=str)
    nv = _fresh(g, "w")
    ne = _fresh(g, "a")
    ne2 = ne + "b"
    ne3 = ne + "c"

    if kind == "fix0":
        if spec.m == 0:
            return Move("fix0", added_vertices=((nv, True),))
        if not free:
            return None
        u = rng.choice(free)
        return Move(
            "fix0",
            added_vertices=((nv, True),),
            added_edges=((ne, u, nv, rng.randrange(k)),),
        )

    if kind == "zero":
        if len(verts) < 2:
            u1, u2 = (verts[0], verts[0]) if verts else (None, None)
            if u1 is None or g.is_fixed(u1) or k < 2:
                return None
            g1 = rng.randrange(k)
            g2 = rng.choice([x for x in range(k) if x != g1])
            return Move(
                "zero",
                added_vertices=((nv, False),),
                added_edges=((ne, nv, u1, g1), (ne2, nv, u2, g2)),
            )
        u1, u2 = rng.sample(verts, 2)
        return Move(
            "zero",
            added_vertices=((nv, False),),
            added_edges=(
                (ne, nv, u1, rng.randrange(k)),
                (ne2, nv, u2, rng.randrange(k)),
            ),
        )

    if kind == "fix1":
        if not g.group.is_reflection or not g.edges:
            return None
        pool = list(g.edges)
        rng.shuffle(pool)
        for e in pool:
            if e.is_loop:
                if any((jj % 2) == 1 for jj in blocks):
                    continue
                others = [u for u in verts if u != e.tail]
                if not others:
                    continue
                u1, u2 = e.tail, rng.choice(others)
            else:
                u1, u2 = e.tail, e.head
            g1 = 0 if g.is_fixed(u1) else rng.randrange(k)
            g2 = 0 if g.is_fixed(u2) else rng.randrange(k)
            return Move(
                "fix1",
                added_vertices=((nv, True),),
                added_edges=((ne, nv, u1, g1), (ne2, nv, u2, g2)),
                removed_edges=((e.id, e.tail, e.head, e.gain % k),),
            )
        return None

    if kind == "loop1":
        # a free anchor keeps every block's side conditions satisfied; a
        # fixed anchor is only safe for a reflection
        if free:
            anchors = free
        elif g.group.is_reflection:
            anchors = verts
        else:
            return None
        gains = list(range(1, k))
        if k % 2 == 0 and any((jj % k) % 2 == 1 for jj in blocks):
            # a half-turn loop never preserves an odd block
            gains = [x for x in gains if x != k // 2]
        if not gains:
            return None
        u = rng.choice(anchors)
        return Move(
            "loop1",
            added_vertices=((nv, False),),
            added_edges=(
                (ne, nv, nv, rng.choice(gains)),
                (ne2, nv, u, rng.randrange(k)),
            ),
        )

    if kind == "one":
        if not g.edges:
            return None
        pool = list(g.edges)
        rng.shuffle(pool)
        for e in pool:
            rg = e.gain % k
            if e.is_loop:
                w = e.tail
                v1, v2 = w, w
                d1 = rng.randrange(k)
                d2 = (d1 + rg) % k
            else:
                v1, v2 = e.tail, e.head
                d1 = rng.randrange(k)
                if g.is_fixed(v1) or g.is_fixed(v2):
                    d2 = rng.randrange(k)
                else:
                    d2 = (d1 + rg) % k
            third = rng.choice(verts)
            d3 = rng.randrange(k)
            pairs = [(v1, d1), (v2, d2), (third, d3)]
            bad = False
            for (x, dx), (y, dy) in itertools.combinations(pairs, 2):
                if x == y and (g.is_fixed(x) or dx == dy):
                    bad = True
            if bad or (v1 == v2 == third and k < 3):
                continue
            return Move(
                "one",
                added_vertices=((nv, False),),
                added_edges=(
                    (ne, nv, v1, d1),
                    (ne2, nv, v2, d2),
                    (ne3, nv, third, d3),
                ),
                removed_edges=((e.id, e.tail, e.head, rg),),
            )
        return None

    if kind == "twovertex":
        if g.group.is_reflection or k % 2 != 0 or len(g.fixed_vertices) != 1:
            return None
        (v0,) = g.fixed_vertices
        nv2 = nv + "p"
        ne4 = ne + "d"
        return Move(
            "twovertex",
            added_vertices=((nv, False), (nv2, False)),
            added_edges=(
                (ne, nv, nv2, 0),
                (ne2, nv, nv2, k // 2),
                (ne3, nv, v0, rng.randrange(k)),
                (ne4, nv2, v0, rng.randrange(k)),
            ),
        )

    raise ValueError(f"unknown move kind {kind!r}")


# ---------------------------------------------------------------------------
# base graphs per certified scope
# ---------------------------------------------------------------------------


def base_graphs(group: CyclicGroup, spec: CountSpec) -> list:
    """Fresh copies of the reduction bases for the given scope."""
    geo = group.geometry
    out = []

    def build(verts, edges=()):
        out.append(GainGraph(group, verts, edges))

    key = (geo, spec.m, spec.l)
    if key == ("reflection", 1, 1):
        build([("v0", True)])
        build([("w", False)], [("l", "w", "w", 1)])
    elif key == ("reflection", 1, 2):
        build([("w", False)])
        build([("v0", True), ("v1", True)])
    elif key == ("rotation", 0, 1):
        build([("w", False)], [("l", "w", "w", 1)])
        build([("w", False), ("v0", True)], [("s", "w", "v0", 0)])
    elif key == ("rotation", 2, 2):
        build([("w", False)])
        build([("v0", True)])
    elif key == ("rotation", 1, 1):
        build([("w", False)], [("l", "w", "w", 1)])
        build([("v0", True)])
    else:
        raise ValueError(f"no bases for {key}")
    return out
