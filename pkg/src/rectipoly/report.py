"""Versioned JSON analysis report for a closed mesh."""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from . import __version__
from .mesh import Mesh, topology
from .ortho import (
    RECTILINEAR_TOL,
    classify_edges,
    dihedral_histogram,
    orthogonality_certificate,
    rectangle_check,
)
from .redgraph import CollinearityViolation, bound_stats, build_red_graph, facial_walks, g01_audit

SCHEMA_VERSION = 1
HISTOGRAM_BUCKET = 1e-6


def _r(x: float) -> float:
    # 12 significant digits keeps golden files stable across platforms
    return float(f"{x:.12g}")


def _hist(h: dict[int, int]) -> dict[str, int]:
    return {str(k): v for k, v in sorted(h.items())}


@dataclass
class AnalysisReport:
    topology: dict
    rectangles: dict
    dihedrals: list[dict]
    certificate: dict
    red_graph: dict
    g01_audit: dict
    tolerances: dict
    tool: dict = field(default_factory=lambda: {"name": "rectipoly", "version": __version__})
    schema_version: int = SCHEMA_VERSION

    def as_dict(self) -> dict:
        return {
            "schema_version": self.schema_version,
            "tool": self.tool,
            "tolerances": self.tolerances,
            "topology": self.topology,
            "rectangles": self.rectangles,
            "dihedrals": self.dihedrals,
            "certificate": self.certificate,
            "red_graph": self.red_graph,
            "g01_audit": self.g01_audit,
        }

    def to_json(self) -> str:
        return json.dumps(self.as_dict(), indent=2) + "\n"


def analyze(mesh: Mesh, tol: float = RECTILINEAR_TOL) -> AnalysisReport:
    topo = topology(mesh)
    rects = rectangle_check(mesh, tol)
    cls = classify_edges(mesh, tol)
    cert = orthogonality_certificate(mesh, tol)

    rect_part = {
        "all_rectangles": rects.all_rectangles,
        "failures": rects.failures,
        "inventory": [
            {"long": _r(a), "short": _r(b), "count": n} for (a, b), n in rects.inventory.items()
        ],
    }
    dihedrals = [
        {
            "folded_rad": _r(row["folded_rad"]),
            "folded_deg": _r(row["folded_deg"]),
            "count": row["count"],
            "color": row["color"],
        }
        for row in dihedral_histogram(cls, HISTOGRAM_BUCKET)
    ]
    cert_part = {
        "status": cert.status,
        "red_edge_count": len(cert.red_edges),
        "red_edges": [list(e) for e in sorted(cert.red_edges)],
    }

    red_part: dict = {"components": [], "error": None}
    try:
        graphs = build_red_graph(mesh, cls, tol)
    except CollinearityViolation as exc:
        graphs = []
        red_part["error"] = str(exc)
    for rg in graphs:
        walks = facial_walks(rg)
        stats = bound_stats(rg, topo.chi, walks)
        lengths: dict[int, int] = {}
        for w in walks:
            lengths[len(w)] = lengths.get(len(w), 0) + 1
        red_part["components"].append(
            {
                "nodes": len(rg.nodes),
                "arcs": len(rg.arcs),
                "mesh_edges": rg.n_mesh_edges,
                "faces": stats.F_r,
                "degree_histogram": _hist(rg.degree_histogram()),
                "walk_length_histogram": _hist(lengths),
                "d": str(stats.d),
                "d_float": _r(float(stats.d)),
                "k": stats.k,
            }
        )

    if rects.all_rectangles and red_part["error"] is None:
        audit = g01_audit(mesh, tol)
        audit_part = {
            "verdict": audit.verdict.value,
            "genus": audit.genus,
            "degree_floor_ok": audit.degree_floor_ok,
            "bounds": [
                {"holds": c.bound.holds, "slack": str(c.bound.slack)} for c in audit.components
            ],
            "offending_edges": [
                {"edge": list(e), "deviation": _r(dev)} for e, dev in sorted(audit.offending_edges)
            ],
        }
    else:
        reason = "faces are not all rectangles" if not rects.all_rectangles else "red graph unavailable"
        audit_part = {"verdict": None, "reason": reason}

    return AnalysisReport(
        topology=topo.as_dict(),
        rectangles=rect_part,
        dihedrals=dihedrals,
        certificate=cert_part,
        red_graph=red_part,
        g01_audit=audit_part,
        tolerances={"rectilinear": tol, "histogram_bucket": HISTOGRAM_BUCKET},
    )


def summary_lines(report: AnalysisReport) -> list[str]:
    t = report.topology
    lines = [
        f"V={t['V']} E={t['E']} F={t['F']} chi={t['chi']} genus={t['genus']}",
        f"rectangles: {'all' if report.rectangles['all_rectangles'] else 'NOT all'}",
    ]
    for item in report.rectangles["inventory"]:
        lines.append(f"  {item['long']:g} x {item['short']:g}: {item['count']}")
    lines.append("folded dihedrals:")
    for row in report.dihedrals:
        lines.append(
            f"  {row['folded_rad']:.9f} rad ({row['folded_deg']:.4f} deg) x{row['count']} {row['color']}"
        )
    c = report.certificate
    lines.append(f"certificate: {c['status']} ({c['red_edge_count']} red edges)")
    comps = report.red_graph["components"]
    if not comps:
        lines.append("red graph: empty")
    for i, comp in enumerate(comps):
        lines.append(
            f"red component {i}: nodes={comp['nodes']} arcs={comp['arcs']} "
            f"degrees={comp['degree_histogram']} walks={comp['walk_length_histogram']} "
            f"d={comp['d']} k={comp['k']}"
        )
    verdict = report.g01_audit["verdict"]
    lines.append(f"g01 audit: {verdict if verdict else report.g01_audit['reason']}")
    return lines


def red_edges_consistent(report: AnalysisReport) -> bool:
    """Red-edge count equals the mesh edges summed over all red components."""
    if report.red_graph["error"] is not None:
        return True
    total = sum(c["mesh_edges"] for c in report.red_graph["components"])
    return total == report.certificate["red_edge_count"]
