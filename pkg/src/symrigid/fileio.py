"""Reading and writing gain graphs, certificates, and analysis reports.

The on-disk graph format is a small UTF-8 JSON document::

    {"group": {"geometry": "reflection" | "rotation", "order": k},
     "vertices": [{"id": "v1", "fixed": false}, ...],
     "edges": [{"id": "e1", "tail": "v1", "head": "v2", "gain": 0}, ...]}

Gains are integer exponents of the group generator, kept in ``[0, k)`` so
files stay independent of any field choice.  Schema problems (malformed
JSON, missing keys, out-of-range gains, duplicate or dangling ids) raise
:class:`FileFormatError`; a document that parses but describes an invalid
gain graph is reported by ``GainGraph.validate`` as usual.

Reports and certificates serialize to plain dictionaries so they can be
dumped as JSON; every numeric claim in a report is recomputable from the
input file plus the seed recorded in it, and serialization is deterministic
(sorted keys, no timestamps).
"""

from __future__ import annotations

import json

from .gains import CoveringGraph, GainGraph
from .groups import CyclicGroup, reflection_group, rotation_group
from .henneberg import (
    Certificate,
    HennebergError,
    Move,
    apply_extension,
    certified_blocks,
    certify_tight,
    combinatorially_rigid,
    count_for_block,
    reduction_scope,
    theorem_counts,
)
from .orbit import (
    block_rank_consistency,
    infinitesimally_rigid,
    orbit_matrix,
    random_symmetric_config,
    rho_j_isostatic,
    trivial_motion_dims,
)
from .sparsity import CountSpec, ZjkSpec, gain_sparse, spanning_tight_subgraph, zjk_sparse


class FileFormatError(ValueError):
    """The document does not match the gain-graph file schema."""


# ---------------------------------------------------------------------------
# gain-graph files
# ---------------------------------------------------------------------------


def _expect(cond: bool, message: str) -> None:
    if not cond:
        raise FileFormatError(message)


def parse_gain_graph(text: str) -> GainGraph:
    """Parse a gain-graph JSON document (schema errors raise FileFormatError)."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise FileFormatError(f"not valid JSON: {exc}") from exc
    _expect(isinstance(doc, dict), "top level must be an object")
    group_doc = doc.get("group")
    _expect(isinstance(group_doc, dict), "missing \"group\" object")
    geometry = group_doc.get("geometry")
    order = group_doc.get("order")
    _expect(geometry in ("reflection", "rotation"), "group geometry must be \"reflection\" or \"rotation\"")
    _expect(isinstance(order, int) and order >= 2, "group order must be an integer >= 2")
    if geometry == "reflection":
        _expect(order == 2, "a reflection group has order 2")
        group = reflection_group()
    else:
        group = rotation_group(order)

    vdocs = doc.get("vertices")
    _expect(isinstance(vdocs, list), "missing \"vertices\" array")
    vertices = []
    seen_v = set()
    for item in vdocs:
        _expect(isinstance(item, dict), "each vertex must be an object")
        vid = item.get("id")
        fixed = item.get("fixed", False)
        _expect(isinstance(vid, str) and vid, "vertex id must be a non-empty string")
        _expect(isinstance(fixed, bool), f"vertex {vid!r}: \"fixed\" must be a boolean")
        _expect(vid not in seen_v, f"duplicate vertex id {vid!r}")
        seen_v.add(vid)
        vertices.append((vid, fixed))

    edocs = doc.get("edges", [])
    _expect(isinstance(edocs, list), "\"edges\" must be an array")
    edges = []
    seen_e = set()
    for item in edocs:
        _expect(isinstance(item, dict), "each edge must be an object")
        eid = item.get("id")
        tail = item.get("tail")
        head = item.get("head")
        gain = item.get("gain")
        _expect(isinstance(eid, str) and eid, "edge id must be a non-empty string")
        _expect(eid not in seen_e, f"duplicate edge id {eid!r}")
        seen_e.add(eid)
        for w in (tail, head):
            _expect(isinstance(w, str) and w in seen_v, f"edge {eid!r}: unknown vertex {w!r}")
        _expect(
            isinstance(gain, int) and 0 <= gain < order,
            f"edge {eid!r}: gain must be an integer in [0, {order})",
        )
        edges.append((eid, tail, head, gain))

    return GainGraph(group, vertices, edges)


def load_gain_graph(path: str) -> GainGraph:
    with open(path, encoding="utf-8") as fh:
        return parse_gain_graph(fh.read())


def gain_graph_to_dict(g: GainGraph) -> dict:
    k = g.group.order
    return {
        "group": {"geometry": g.group.geometry, "order": k},
        "vertices": [{"id": str(v), "fixed": g.is_fixed(v)} for v in g.vertices],
        "edges": [
            {"id": str(e.id), "tail": str(e.tail), "head": str(e.head), "gain": e.gain % k}
            for e in g.edges
        ],
    }


def dump_json(doc: dict, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(to_json(doc))


def to_json(doc: dict) -> str:
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def covering_to_dict(cover: CoveringGraph) -> dict:
    """Serialize a covering as a plain graph with orbit annotations."""

    def name(cv) -> str:
        orbit, shift = cv
        return f"{orbit}|{shift}"

    vertices = [
        {
            "id": name(cv),
            "orbit": str(cv[0]),
            "shift": cv[1],
            "fixed": cv[0] in cover.fixed_orbits,
        }
        for cv in cover.vertices
    ]
    edges = []
    for orbit_id in sorted(cover.edge_orbits, key=str):
        for ce in cover.edge_orbits[orbit_id]:
            a, b = sorted(ce, key=lambda cv: (str(cv[0]), cv[1]))
            edges.append(
                {
                    "tail": name(a),
                    "head": name(b),
                    "orbit": str(orbit_id),
                    "stabilizer": cover.stabilizer_order[orbit_id],
                }
            )
    return {
        "group": {"geometry": cover.group.geometry, "order": cover.group.order},
        "vertices": vertices,
        "edges": edges,
    }


# ---------------------------------------------------------------------------
# certificates
# ---------------------------------------------------------------------------


def _move_to_dict(move: Move) -> dict:
    return {
        "kind": move.kind,
        "direction": move.direction,
        "added_vertices": [[str(v), bool(f)] for v, f in move.added_vertices],
        "added_edges": [[str(e), str(t), str(h), int(d)] for e, t, h, d in move.added_edges],
        "removed_edges": [[str(e), str(t), str(h), int(d)] for e, t, h, d in move.removed_edges],
    }


def _move_from_dict(doc: dict) -> Move:
    return Move(
        kind=doc["kind"],
        added_vertices=tuple((v, f) for v, f in doc["added_vertices"]),
        added_edges=tuple((e, t, h, d) for e, t, h, d in doc["added_edges"]),
        removed_edges=tuple((e, t, h, d) for e, t, h, d in doc["removed_edges"]),
        direction=doc.get("direction", "reduction"),
    )


def certificate_to_dict(cert: Certificate) -> dict:
    return {
        "count": {"m": cert.spec.m, "l": cert.spec.l},
        "base": gain_graph_to_dict(cert.base),
        "base_label": cert.base_label,
        "steps": [_move_to_dict(move) for move in cert.steps],
        "evidence": [
            {"status": v.status, "edges": v.count, "bound": v.bound} for v in cert.evidence
        ],
    }


def certificate_from_dict(doc: dict) -> Certificate:
    """Rebuild a certificate, re-deriving the per-step evidence."""
    base = parse_gain_graph(json.dumps(doc["base"]))
    spec = CountSpec(doc["count"]["m"], doc["count"]["l"], True)
    steps = tuple(_move_from_dict(m) for m in doc["steps"])
    graphs = [base]
    for move in reversed(steps):
        graphs.append(apply_extension(graphs[-1], move))
    evidence = tuple(gain_sparse(g, spec) for g in reversed(graphs[:-1]))
    return Certificate(
        spec=spec,
        steps=steps,
        evidence=evidence,
        base=base,
        base_label=doc["base_label"],
    )


# ---------------------------------------------------------------------------
# analysis reports
# ---------------------------------------------------------------------------


def _sparsity_to_dict(v) -> dict:
    return {
        "status": v.status,
        "vertices": [str(x) for x in v.vertices],
        "edges": [str(x) for x in v.edges],
        "count": v.count,
        "bound": v.bound,
        "clause": v.clause,
    }


def _count_name(spec) -> str:
    if isinstance(spec, ZjkSpec):
        return f"Z^{spec.j}_{spec.k}"
    return f"(2,{spec.m},3,{spec.l})"


def analysis_report(g: GainGraph, seed: int = 0, field: str = "prime") -> dict:
    """Full machine-readable analysis of one gain graph.

    Combines the per-block rank data at a random symmetric placement with
    the sparsity counts, the spanning-tight-subgraph search, and the
    covering rank, and flags whether the counting verdict and the numerical
    verdict agree.  Everything is recomputable from the input plus ``seed``.
    """
    group = g.group
    k = group.order
    config = random_symmetric_config(g, seed=seed, field=field)
    field_doc = {"kind": field}
    if field == "prime":
        field_doc["p"] = config.field.p

    blocks = []
    for j in range(k):
        iso = rho_j_isostatic(g, j, config)
        spec = count_for_block(group, j)
        if isinstance(spec, ZjkSpec):
            sv = zjk_sparse(g, spec)
        else:
            sv = gain_sparse(g, spec)
        blocks.append(
            {
                "j": j,
                "rows": iso.n_rows,
                "cols": iso.n_cols,
                "rank": iso.rank,
                "nullity": iso.n_cols - iso.rank,
                "trivial": iso.trivial,
                "isostatic": iso.ok,
                "count": _count_name(spec),
                "sparsity": _sparsity_to_dict(sv),
            }
        )

    consistency = block_rank_consistency(g, config)
    numerical = infinitesimally_rigid(g, config)

    counts = theorem_counts(group)
    count_docs = []
    combinatorial_doc: dict = {"rigid": None}
    agreement = "N/A"
    scope = "decided"
    if counts is None:
        scope = (
            f"out of scope: no sufficiency characterization for rotation order {k}; "
            "count checks are necessity-only"
        )
    else:
        verdict = combinatorially_rigid(g)
        for spec, witness in zip(verdict.counts, verdict.witnesses):
            count_docs.append(
                {
                    "count": _count_name(spec),
                    "m": spec.m,
                    "l": spec.l,
                    "spanning_tight": None if witness is None else [str(x) for x in witness],
                }
            )
        combinatorial_doc = {"rigid": verdict.rigid, "note": verdict.note}
        agreement = "AGREE" if verdict.rigid == numerical.rigid else "DISAGREE"

    certificates = []
    if counts is not None:
        for spec in counts:
            if not gain_sparse(g, spec).tight:
                continue
            try:
                reduction_scope(group, spec)
            except HennebergError:
                continue
            cert = certify_tight(g, spec)
            certificates.append(
                {
                    "count": _count_name(spec),
                    "blocks": list(certified_blocks(group, spec)),
                    "certificate": certificate_to_dict(cert),
                }
            )

    return {
        "seed": seed,
        "field": field_doc,
        "group": {"geometry": group.geometry, "order": k},
        "graph": {
            "vertices": len(g.vertices),
            "fixed_vertices": len(g.fixed_vertices),
            "edges": len(g.edges),
        },
        "blocks": blocks,
        "covering": {
            "rank": consistency.covering_rank,
            "block_rank_sum": sum(consistency.block_ranks),
            "consistent": consistency.ok,
            "mismatches": list(consistency.mismatches),
            "vertices": numerical.covering_vertices,
            "edges": numerical.covering_edges,
        },
        "counts": count_docs,
        "combinatorial": combinatorial_doc,
        "numerical": {
            "rigid": numerical.rigid,
            "rank": numerical.rank,
            "required": numerical.required,
        },
        "agreement": agreement,
        "scope": scope,
        "certificates": certificates,
    }
