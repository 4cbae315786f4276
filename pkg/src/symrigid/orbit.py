"""Symmetric configurations, orbit rigidity matrices, and rank tests.

A configuration places each vertex orbit of a gain graph in the plane so that
the resulting covering framework is symmetric: fixed vertices sit where the
group keeps them (on the mirror for a reflection, at the origin for a
rotation), free vertices sit anywhere, and the group action transports the
representative point to the remaining covering copies.

For each irreducible representation index j the orbit rigidity matrix packs
the symmetric block of the covering rigidity matrix into quotient-sized data:
one row per quotient edge (per free quotient edge when j is odd) and a small
column block per vertex orbit.  Ranks are computed either exactly over a
prime field carrying k-th roots of unity and a square root of -1, or in
floating complex arithmetic; see :mod:`symrigid.groups`.
"""

from __future__ import annotations

import random
from dataclasses import dataclass

from .gains import CoveringGraph, GainGraph, lift
from .groups import CyclicGroup, matrix_rank, make_field


class ConfigurationError(ValueError):
    """Raised when no admissible symmetric placement can be produced."""


# ---------------------------------------------------------------------------
# Configurations
# ---------------------------------------------------------------------------


@dataclass(eq=False)
class Configuration:
    """A symmetric placement of a gain graph's vertex orbits.

    ``points`` maps each quotient vertex to a coordinate pair in the field.
    The placement of a covering vertex (v, t) is tau(gamma^t) applied to the
    representative point of v.
    """

    group: CyclicGroup
    field: object
    points: dict

    def point(self, v):
        return self.points[v]

    def apply(self, exponent: int, pt):
        """Apply the geometric action of gamma^exponent to a point."""
        f = self.field
        a, b, c, d = f.tau(self.group, exponent)
        x, y = pt
        return (
            f.add(f.mul(a, x), f.mul(b, y)),
            f.add(f.mul(c, x), f.mul(d, y)),
        )

    def covering_point(self, cv):
        orbit, shift = cv
        return self.apply(shift, self.points[orbit])

    def covering_points(self, cover: CoveringGraph) -> dict:
        return {cv: self.covering_point(cv) for cv in cover.vertices}


def _pairwise_distinct(points, field) -> bool:
    pts = list(points)
    if field.kind == "prime":
        return len(set(pts)) == len(pts)
    tol = 1e-9
    for a in range(len(pts)):
        for b in range(a + 1, len(pts)):
            if abs(pts[a][0] - pts[b][0]) <= tol and abs(pts[a][1] - pts[b][1]) <= tol:
                return False
    return True


def _all_collinear(points, field) -> bool:
    pts = list(points)
    if len(pts) < 3:
        return True
    ox, oy = pts[0]
    f = field
    base = None
    for x, y in pts[1:]:
        d = (f.sub(x, ox), f.sub(y, oy))
        if base is None:
            base = d
            continue
        cross = f.sub(f.mul(base[0], d[1]), f.mul(base[1], d[0]))
        if field.kind == "prime":
            if cross % field.p != 0:
                return False
        elif abs(cross) > 1e-9:
            return False
    return True


def random_symmetric_config(
    g: GainGraph,
    seed: int = 0,
    field="prime",
    p: int | None = None,
    max_attempts: int = 100,
) -> Configuration:
    """Sample a generic symmetric placement of ``g``, deterministically.

    ``field`` is "prime", "complex", or an already-constructed field context.
    Fixed vertices are pinned by the geometry: on the mirror (x = 0) for a
    reflection, at the origin for a rotation -- which is why a rotation admits
    at most one fixed vertex.  Free vertices are drawn uniformly; the sample
    is rejected and retried whenever two covering points coincide, or when
    every covering point is collinear despite a free vertex being available
    to break the line.  After ``max_attempts`` rejections the caller gets a
    ConfigurationError: that many collisions mean the graph cannot be placed
    injectively (for instance two fixed vertices under a rotation).
    """
    report = g.validate()
    if report is not None:
        raise ConfigurationError(f"invalid gain graph: {report.clause}")
    fld = field if not isinstance(field, str) else make_field(field, g.group.order, p)
    if fld.k != g.group.order:
        raise ConfigurationError(
            f"field context is for order {fld.k}, graph has order {g.group.order}"
        )
    fixed = g.fixed_vertices
    if not g.group.is_reflection and len(fixed) > 1:
        raise ConfigurationError(
            "a rotation pins every fixed vertex to the origin; "
            f"{len(fixed)} fixed vertices cannot be placed injectively"
        )
    rng = random.Random(seed)

    def draw():
        if fld.kind == "prime":
            return rng.randrange(fld.p)
        return rng.uniform(-1.0, 1.0)

    free = g.free_vertices
    k = g.group.order
    # A half-turn orbit of a single free vertex is a forced diameter through
    # the origin; only then is a collinear covering unavoidable.
    breakable = bool(free) and (g.group.is_reflection or k >= 3 or len(free) >= 2)
    for _ in range(max_attempts):
        points = {}
        for v in g.vertices:
            if v not in fixed:
                points[v] = (draw(), draw())
            elif g.group.is_reflection:
                points[v] = (fld.zero, draw())
            else:
                points[v] = (fld.zero, fld.zero)
        config = Configuration(g.group, fld, points)
        cover_pts = [
            config.apply(t, points[v])
            for v in g.vertices
            for t in (range(k) if v in free else (0,))
        ]
        if not _pairwise_distinct(cover_pts, fld):
            continue
        if breakable and len(cover_pts) >= 3 and _all_collinear(cover_pts, fld):
            continue
        return config
    raise ConfigurationError(
        f"no injective symmetric placement found in {max_attempts} attempts"
    )


# ---------------------------------------------------------------------------
# Field-generic vector helpers
# ---------------------------------------------------------------------------


def _mat_vec(f, m, pt):
    a, b, c, d = m
    x, y = pt
    return (f.add(f.mul(a, x), f.mul(b, y)), f.add(f.mul(c, x), f.mul(d, y)))


def _vec_sub(f, u, v):
    return (f.sub(u[0], v[0]), f.sub(u[1], v[1]))


def _vec_add(f, u, v):
    return (f.add(u[0], v[0]), f.add(u[1], v[1]))


def _scal_vec(f, s, v):
    return (f.mul(s, v[0]), f.mul(s, v[1]))


def _dot(f, u, v):
    return f.add(f.mul(u[0], v[0]), f.mul(u[1], v[1]))


# ---------------------------------------------------------------------------
# Covering rigidity matrix
# ---------------------------------------------------------------------------


def rigidity_matrix(cover: CoveringGraph, config: Configuration):
    """Plane rigidity matrix of the covering framework, as a row list.

    Columns come in pairs following ``cover.vertices``; rows follow
    ``cover.edges``.  Entries live in the configuration's field.
    """
    f = config.field
    col = {cv: 2 * i for i, cv in enumerate(cover.vertices)}
    pts = config.covering_points(cover)
    rows = []
    for edge in cover.edges:
        cu, cw = sorted(edge)
        d = _vec_sub(f, pts[cu], pts[cw])
        row = [f.zero] * (2 * cover.vertex_count)
        row[col[cu]], row[col[cu] + 1] = d
        row[col[cw]], row[col[cw] + 1] = f.neg(d[0]), f.neg(d[1])
        rows.append(row)
    return rows


def covering_rank(g: GainGraph, config: Configuration) -> int:
    cover = lift(g)
    return matrix_rank(rigidity_matrix(cover, config), config.field)


# ---------------------------------------------------------------------------
# Orbit rigidity matrices
# ---------------------------------------------------------------------------


def dropped_vertices(g: GainGraph, j: int) -> frozenset:
    """Vertex orbits contributing no columns to the j-th orbit matrix.

    Under a rotation, a fixed vertex is pinned to the origin and its point
    has no freedom in the representations other than j = 1 and j = k - 1;
    those columns are dropped.  Reflections never drop columns.
    """
    k = g.group.order
    if g.group.is_reflection or j % k in (1, (k - 1) % k):
        return frozenset()
    return g.fixed_vertices


def _column_block(g: GainGraph, f, j: int, v):
    """Columns of the coordinate-restriction block of vertex ``v``.

    Free vertices contribute the two standard basis columns.  A fixed vertex
    is constrained to its symmetric stratum: the mirror direction (0,1) or
    (1,0) under a reflection, the isotypic directions (1, -i) and (1, i)
    under a rotation of order >= 3, and the full plane in the anti-symmetric
    representation of the half turn.
    """
    k = g.group.order
    if v not in g.fixed_vertices:
        return ((f.one, f.zero), (f.zero, f.one))
    if g.group.is_reflection:
        if j % 2 == 0:
            return ((f.zero, f.one),)
        return ((f.one, f.zero),)
    if k >= 3 and j % k == 1:
        return ((f.one, f.neg(f.i)),)
    if k >= 3 and j % k == k - 1:
        return ((f.one, f.i),)
    return ((f.one, f.zero), (f.zero, f.one))


@dataclass(eq=False)
class OrbitMatrix:
    """The j-th orbit rigidity matrix of a placed gain graph.

    ``rows`` is a dense row list over the configuration's field;
    ``row_edges`` gives the quotient edge id of each row and ``col_blocks``
    the (vertex, width) column layout, in order.
    """

    graph: GainGraph
    j: int
    config: Configuration
    rows: list
    row_edges: tuple
    col_blocks: tuple

    @property
    def n_rows(self) -> int:
        return len(self.rows)

    @property
    def n_cols(self) -> int:
        return sum(w for _, w in self.col_blocks)

    def rank(self) -> int:
        return matrix_rank(self.rows, self.config.field)

    def column_slice(self, v) -> slice:
        start = 0
        for u, w in self.col_blocks:
            if u == v:
                return slice(start, start + w)
            start += w
        raise KeyError(f"vertex {v!r} has no columns in this matrix")


def orbit_matrix(g: GainGraph, j: int, config: Configuration) -> OrbitMatrix:
    """Build the j-th orbit rigidity matrix at the given placement.

    Rows run over all quotient edges when j is even and over the free
    quotient edges when j is odd (edges whose covering orbit is stabilized
    carry redundant rows in the odd representations).  A loop contributes a
    single row in its vertex's block; a non-loop edge contributes the usual
    two blocks.  The head block carries the character of the inverse gain:
    the covering copy of the head paired with the tail representative sits
    one gain-shift ahead, and restricting the covering rows to the
    j-symmetric subspace (velocities transported by the conjugated
    character, as in :func:`lift_kernel_vector`) pulls that shift out of the
    motion as rho_j(gain)^-1.
    """
    f = config.field
    k = g.group.order
    if not 0 <= j < k:
        raise ValueError(f"representation index {j} out of range for order {k}")
    dropped = dropped_vertices(g, j)
    col_blocks = []
    offset = {}
    pos = 0
    for v in g.vertices:
        if v in dropped:
            continue
        width = len(_column_block(g, f, j, v))
        col_blocks.append((v, width))
        offset[v] = pos
        pos += width
    n_cols = pos

    edges = g.edges if j % 2 == 0 else g.free_edges()
    rows = []
    row_edges = []
    for e in edges:
        row = [f.zero] * n_cols
        if e.is_loop:
            u = e.tail
            pu = config.point(u)
            rho = f.rho(j, -e.gain)
            vec = _vec_add(f, pu, _scal_vec(f, rho, pu))
            vec = _vec_sub(f, vec, _mat_vec(f, f.tau(g.group, e.gain), pu))
            back = _mat_vec(f, f.tau(g.group, -e.gain), pu)
            vec = _vec_sub(f, vec, _scal_vec(f, rho, back))
            if u not in dropped:
                for c, colvec in enumerate(_column_block(g, f, j, u)):
                    row[offset[u] + c] = _dot(f, vec, colvec)
        else:
            u, v = e.tail, e.head
            pu, pv = config.point(u), config.point(v)
            du = _vec_sub(f, pu, _mat_vec(f, f.tau(g.group, e.gain), pv))
            dv = _vec_sub(f, pv, _mat_vec(f, f.tau(g.group, -e.gain), pu))
            rho = f.rho(j, -e.gain)
            if u not in dropped:
                for c, colvec in enumerate(_column_block(g, f, j, u)):
                    row[offset[u] + c] = _dot(f, du, colvec)
            if v not in dropped:
                for c, colvec in enumerate(_column_block(g, f, j, v)):
                    row[offset[v] + c] = f.mul(rho, _dot(f, dv, colvec))
        rows.append(row)
        row_edges.append(e.id)
    return OrbitMatrix(g, j, config, rows, tuple(row_edges), tuple(col_blocks))


def block_columns(group: CyclicGroup, j: int, n_free: int, n_fixed: int) -> int:
    """Expected column count of the j-th orbit matrix from vertex counts."""
    k = group.order
    if group.is_reflection:
        return 2 * n_free + n_fixed
    if k >= 3 and j % k in (1, k - 1):
        return 2 * n_free + n_fixed
    if k == 2 and j % 2 == 1:
        return 2 * n_free + 2 * n_fixed
    return 2 * n_free


def trivial_motion_dims(group: CyclicGroup, j: int) -> int:
    """Dimension of the j-symmetric trivial (rigid-body) motions.

    The three plane rigid-body degrees of freedom split across the
    representations: a reflection keeps the mirror translation symmetric
    (j = 0) and the normal translation plus the rotation anti-symmetric
    (j = 1); a rotation keeps only the rotation symmetric and pushes the
    translations into the representations j = 1 and j = k - 1 (which merge
    when k = 2).
    """
    k = group.order
    j %= k
    if group.is_reflection:
        return 1 if j == 0 else 2
    if k == 2:
        return 1 if j == 0 else 2
    if j == 0:
        return 1
    return 1 if j in (1, k - 1) else 0


# ---------------------------------------------------------------------------
# Rank verdicts
# ---------------------------------------------------------------------------


@dataclass(eq=False)
class IsostaticVerdict:
    """Outcome of the j-th orbit-matrix rank test."""

    j: int
    ok: bool
    rank: int
    n_rows: int
    n_cols: int
    trivial: int

    def __str__(self) -> str:
        tag = "isostatic" if self.ok else "not isostatic"
        return (
            f"rep {self.j}: {tag} (rank {self.rank}, rows {self.n_rows}, "
            f"cols {self.n_cols}, trivial {self.trivial})"
        )


def rho_j_isostatic(g: GainGraph, j: int, config: Configuration) -> IsostaticVerdict:
    """Test whether the placement is isostatic in the j-th representation.

    Isostatic means the orbit-matrix rows are independent and the kernel is
    exactly the j-symmetric trivial motions: rank = rows and
    cols - rank = trivial dimension.
    """
    m = orbit_matrix(g, j, config)
    r = m.rank()
    t = trivial_motion_dims(g.group, j)
    ok = r == m.n_rows and m.n_cols - r == t
    return IsostaticVerdict(j, ok, r, m.n_rows, m.n_cols, t)


@dataclass(eq=False)
class RigidityVerdict:
    """Outcome of the covering rigidity test."""

    rigid: bool
    rank: int
    covering_vertices: int
    covering_edges: int
    required: int | None

    def __str__(self) -> str:
        tag = "rigid" if self.rigid else "flexible"
        if self.required is None:
            return f"{tag} (covering on {self.covering_vertices} vertices)"
        return (
            f"{tag} (covering rank {self.rank} of {self.required} needed, "
            f"{self.covering_vertices} vertices, {self.covering_edges} edges)"
        )


def infinitesimally_rigid(g: GainGraph, config: Configuration) -> RigidityVerdict:
    """Test infinitesimal rigidity of the covering framework.

    The rank criterion 2|V| - 3 applies from three vertices up; one vertex
    is rigid outright and two vertices are rigid exactly when joined by an
    edge.
    """
    cover = lift(g)
    n = cover.vertex_count
    rows = rigidity_matrix(cover, config)
    rank = matrix_rank(rows, config.field)
    if n == 1:
        return RigidityVerdict(True, rank, n, cover.edge_count, None)
    if n == 2:
        return RigidityVerdict(cover.edge_count >= 1, rank, n, cover.edge_count, None)
    required = 2 * n - 3
    return RigidityVerdict(rank == required, rank, n, cover.edge_count, required)


@dataclass(eq=False)
class RankConsistency:
    """Block decomposition bookkeeping for one placement.

    The covering rigidity matrix decomposes into the k orbit blocks, so its
    rank must equal the sum of the orbit-matrix ranks, and each block must
    have the column count its representation prescribes.  ``mismatches``
    lists human-readable discrepancies (empty when ``ok``).
    """

    ok: bool
    covering_rank: int
    block_ranks: tuple
    mismatches: tuple

    def __str__(self) -> str:
        if self.ok:
            parts = " + ".join(str(r) for r in self.block_ranks)
            return f"covering rank {self.covering_rank} = {parts}"
        return "; ".join(self.mismatches)


def block_rank_consistency(g: GainGraph, config: Configuration) -> RankConsistency:
    """Check the covering rank against the orbit-block decomposition."""
    cover = lift(g)
    rows = rigidity_matrix(cover, config)
    cov_rank = matrix_rank(rows, config.field)
    k = g.group.order
    n_free = len(g.free_vertices)
    n_fixed = len(g.fixed_vertices)
    ranks = []
    mismatches = []
    for j in range(k):
        m = orbit_matrix(g, j, config)
        expected = block_columns(g.group, j, n_free, n_fixed)
        if m.n_cols != expected:
            mismatches.append(
                f"rep {j}: {m.n_cols} columns, expected {expected}"
            )
        ranks.append(m.rank())
    total = sum(ranks)
    if total != cov_rank:
        mismatches.append(
            f"block ranks sum to {total}, covering rank is {cov_rank}"
        )
    return RankConsistency(not mismatches, cov_rank, tuple(ranks), tuple(mismatches))


# ---------------------------------------------------------------------------
# Kernel lifting
# ---------------------------------------------------------------------------


def _residual_ok(values, field) -> bool:
    if field.kind == "prime":
        return all(v % field.p == 0 for v in values)
    return all(abs(v) <= 1e-8 for v in values)


def lift_kernel_vector(g: GainGraph, j: int, config: Configuration, vec) -> dict:
    """Expand an orbit-matrix kernel vector to a covering-framework motion.

    ``vec`` is a flat coefficient list over the matrix's column layout; it
    must lie in the kernel (checked, ValueError otherwise).  Each vertex
    orbit's coefficients are pushed through its column block to a plane
    velocity at the representative, then transported to the other covering
    copies by the group action twisted with the conjugated character; dropped
    orbits move with velocity zero.  The result maps covering vertices to
    velocity pairs and is a genuine infinitesimal motion of the covering.
    """
    f = config.field
    m = orbit_matrix(g, j, config)
    if len(vec) != m.n_cols:
        raise ValueError(f"kernel vector has length {len(vec)}, expected {m.n_cols}")
    residuals = []
    for row in m.rows:
        acc = f.zero
        for a, b in zip(row, vec):
            acc = f.add(acc, f.mul(a, b))
        residuals.append(acc)
    if not _residual_ok(residuals, f):
        raise ValueError("vector is not in the kernel of the orbit matrix")

    rep_velocity = {}
    pos = 0
    for v, width in m.col_blocks:
        block = _column_block(g, f, j, v)
        vel = (f.zero, f.zero)
        for c in range(width):
            vel = _vec_add(f, vel, _scal_vec(f, vec[pos + c], block[c]))
        rep_velocity[v] = vel
        pos += width

    cover = lift(g)
    motion = {}
    for cv in cover.vertices:
        orbit, shift = cv
        base = rep_velocity.get(orbit)
        if base is None:
            motion[cv] = (f.zero, f.zero)
            continue
        twist = f.conj(f.rho(j, shift))
        moved = _mat_vec(f, f.tau(g.group, shift), base)
        motion[cv] = _scal_vec(f, twist, moved)
    return motion


def kernel_basis(m: OrbitMatrix) -> list:
    """A basis of the orbit matrix's kernel, as flat coefficient lists."""
    f = m.config.field
    if m.n_cols == 0:
        return []
    if f.kind == "prime":
        return _kernel_modp(m.rows, m.n_cols, f.p)
    import numpy as np

    a = np.asarray(m.rows, dtype=complex).reshape(m.n_rows, m.n_cols)
    if m.n_rows == 0:
        return [list(col) for col in np.eye(m.n_cols, dtype=complex)]
    _, s, vh = np.linalg.svd(a)
    tol = 1e-9 * (s[0] if s.size else 1.0)
    rank = int((s > tol).sum())
    return [list(vh[i].conj()) for i in range(rank, m.n_cols)]


def _kernel_modp(rows, n_cols: int, p: int) -> list:
    a = [[x % p for x in row] for row in rows]
    pivots = []
    rank = 0
    for col in range(n_cols):
        pivot = next((i for i in range(rank, len(a)) if a[i][col]), None)
        if pivot is None:
            continue
        a[rank], a[pivot] = a[pivot], a[rank]
        inv = pow(a[rank][col], p - 2, p)
        a[rank] = [x * inv % p for x in a[rank]]
        for i in range(len(a)):
            if i != rank and a[i][col]:
                fct = a[i][col]
                a[i] = [(x - fct * y) % p for x, y in zip(a[i], a[rank])]
        pivots.append(col)
        rank += 1
    free_cols = [c for c in range(n_cols) if c not in pivots]
    basis = []
    for fc in free_cols:
        v = [0] * n_cols
        v[fc] = 1
        for r, pc in enumerate(pivots):
            v[pc] = (-a[r][fc]) % p
        basis.append(v)
    return basis


def motion_residuals(cover: CoveringGraph, config: Configuration, motion: dict):
    """Edge-length derivatives of a covering motion (all zero on a flex)."""
    f = config.field
    pts = config.covering_points(cover)
    out = []
    for edge in cover.edges:
        cu, cw = sorted(edge)
        d = _vec_sub(f, pts[cu], pts[cw])
        dm = _vec_sub(f, motion[cu], motion[cw])
        out.append(_dot(f, d, dm))
    return out


def is_trivial_motion(cover: CoveringGraph, config: Configuration, motion: dict) -> bool:
    """Decide whether a covering motion is a rigid-body (trivial) motion.

    Fits an infinitesimal rotation speed a and a translation (t1, t2) to
    m(u) = a * (-y_u, x_u) + (t1, t2) by linear solve; trivial means the fit
    is exact (residual zero over a prime field, below 1e-8 in floating
    arithmetic).
    """
    f = config.field
    pts = config.covering_points(cover)
    rows = []
    rhs = []
    for cv in cover.vertices:
        x, y = pts[cv]
        mx, my = motion[cv]
        rows.append([f.neg(y), f.one, f.zero])
        rhs.append(mx)
        rows.append([x, f.zero, f.one])
        rhs.append(my)
    if f.kind == "prime":
        return _consistent_modp(rows, rhs, f.p)
    import numpy as np

    a = np.asarray(rows, dtype=complex)
    b = np.asarray(rhs, dtype=complex)
    sol, *_ = np.linalg.lstsq(a, b, rcond=None)
    res = a @ sol - b
    scale = max(1.0, float(np.abs(b).max(initial=0.0)))
    return bool(np.abs(res).max(initial=0.0) <= 1e-8 * scale)


def _consistent_modp(rows, rhs, p: int) -> bool:
    a = [[x % p for x in row] + [b % p] for row, b in zip(rows, rhs)]
    n = len(a[0]) - 1
    rank = 0
    for col in range(n):
        pivot = next((i for i in range(rank, len(a)) if a[i][col]), None)
        if pivot is None:
            continue
        a[rank], a[pivot] = a[pivot], a[rank]
        inv = pow(a[rank][col], p - 2, p)
        prow = [x * inv % p for x in a[rank]]
        a[rank] = prow
        for i in range(len(a)):
            if i != rank and a[i][col]:
                fct = a[i][col]
                a[i] = [(x - fct * y) % p for x, y in zip(a[i], prow)]
        rank += 1
    # Rows beyond the rank are zero in every coefficient column.
    return all(row[n] == 0 for row in a[rank:])
