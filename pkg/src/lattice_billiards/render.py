"""Deterministic figure output: SVG for 2D scenes, Wavefront OBJ for 3D.

Both writers are pure functions of the scene and format every coordinate
with a fixed precision, so the same scene always yields the same bytes.
"""
from __future__ import annotations

import hashlib
from collections import deque
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .domains import DomainId, DomainSpec, InvalidInput, get_domain
from .orbits import fold_trajectory

INSIDE_TOL = 1e-9
MAX_TILES = 5000
# The K tetrahedron sits inside this side-2 cube.
K_CONTAINER = ((-1.0, 0.0, 0.0), (1.0, 2.0, 2.0))


def label_color(label: Sequence[int]) -> str:
    """Stable color from the label (md5 is used only as a hash)."""
    digest = hashlib.md5(",".join(str(int(c)) for c in label).encode()).digest()
    # keep channels in a mid range so lines read on white
    r, g, b = (40 + digest[i] % 160 for i in range(3))
    return f"#{r:02x}{g:02x}{b:02x}"


@dataclass
class SceneTrajectory:
    label: tuple[int, ...]
    points: list[np.ndarray]
    color: str
    amplitude: float
    faces: list[int] = field(default_factory=list)
    unfolded: tuple[np.ndarray, np.ndarray] | None = None
    closed: bool = True


@dataclass
class Scene:
    domain: DomainId
    trajectories: list[SceneTrajectory] = field(default_factory=list)
    show_unfolded: bool = False
    layout: str = "overlay"  # or "panels": one panel per trajectory
    container: bool = False
    title: str = ""

    def validate(self) -> None:
        if not self.trajectories:
            raise InvalidInput("empty scene: add at least one trajectory")
        if self.layout not in ("overlay", "panels"):
            raise InvalidInput(f"unknown layout {self.layout!r}")
        spec = get_domain(self.domain)
        for tr in self.trajectories:
            for p in tr.points:
                if not spec.contains(p, tol=INSIDE_TOL):
                    raise InvalidInput(f"trajectory {tr.label} leaves the domain at {p.tolist()}")


def build_scene(domain, labels: Sequence[Sequence[int]], *, start=None, unfolded: bool = False,
                layout: str = "overlay", container: bool = False, title: str = "") -> Scene:
    spec = get_domain(domain)
    trajectories = []
    for label in labels:
        tr = fold_trajectory(spec, label, start)
        trajectories.append(
            SceneTrajectory(
                label=tr.label,
                points=tr.points,
                color=label_color(tr.label),
                amplitude=tr.amplitude,
                faces=tr.faces,
                unfolded=(tr.start, tr.unfolded_end),
                closed=tr.closed,
            )
        )
    scene = Scene(spec.id, trajectories, unfolded, layout, container, title)
    scene.validate()
    return scene


# --------------------------------------------------------------------------
# 2D


def _fmt(x: float) -> str:
    s = f"{x:.4f}".rstrip("0").rstrip(".")
    return "0" if s in ("-0", "") else s


def _tiles_covering(spec: DomainSpec, lo: np.ndarray, hi: np.ndarray) -> list[np.ndarray]:
    """Mirror copies of the domain meeting the box ``[lo, hi]``, by breadth-first reflection."""
    base = spec.vertex_array
    seen = set()
    out = []
    queue = deque([(np.eye(2), np.zeros(2))])
    while queue and len(out) < MAX_TILES:
        A, b = queue.popleft()
        verts = base @ A.T + b
        key = tuple(np.round(verts.mean(axis=0), 6))
        if key in seen:
            continue
        seen.add(key)
        # tiles that merely touch the box edge are left out
        if np.any(verts.max(axis=0) <= lo + 1e-9) or np.any(verts.min(axis=0) >= hi - 1e-9):
            continue
        out.append(verts)
        for face in range(len(spec.faces)):
            R, t = spec.reflection(face)
            queue.append((A @ R, A @ t + b))
    out.sort(key=lambda v: (round(float(v.mean(axis=0)[1]), 6), round(float(v.mean(axis=0)[0]), 6)))
    return out


def _polygon(points: np.ndarray, **attrs) -> str:
    pts = " ".join(f"{_fmt(x)},{_fmt(y)}" for x, y in points)
    extra = " ".join(f'{k.replace("_", "-")}="{v}"' for k, v in attrs.items())
    return f'<polygon points="{pts}" {extra}/>'


def _polyline(points: Sequence[np.ndarray], **attrs) -> str:
    pts = " ".join(f"{_fmt(p[0])},{_fmt(p[1])}" for p in points)
    extra = " ".join(f'{k.replace("_", "-")}="{v}"' for k, v in attrs.items())
    return f'<polyline points="{pts}" fill="none" {extra}/>'


def _panel(spec: DomainSpec, trajectories: list[SceneTrajectory], show_unfolded: bool):
    """Panel body in domain coordinates plus its bounding box."""
    parts = []
    verts = spec.vertex_array
    lo, hi = verts.min(axis=0), verts.max(axis=0)
    if show_unfolded:
        seg = np.array([p for tr in trajectories for p in tr.unfolded])
        lo = np.minimum(lo, seg.min(axis=0))
        hi = np.maximum(hi, seg.max(axis=0))
        for tile in _tiles_covering(spec, lo, hi):
            parts.append(_polygon(tile, fill="none", stroke="#bbbbbb", stroke_width="0.01"))
        for tr in trajectories:
            a, b = tr.unfolded
            parts.append(
                f'<line x1="{_fmt(a[0])}" y1="{_fmt(a[1])}" x2="{_fmt(b[0])}" y2="{_fmt(b[1])}" '
                f'stroke="{tr.color}" stroke-width="0.02" stroke-dasharray="0.08,0.05"/>'
            )
            for p in (a, b):
                parts.append(f'<circle cx="{_fmt(p[0])}" cy="{_fmt(p[1])}" r="0.04" fill="{tr.color}"/>')
    parts.append(_polygon(verts, fill="#f6f6f6", stroke="#000000", stroke_width="0.02"))
    for tr in trajectories:
        parts.append(_polyline(tr.points, stroke=tr.color, stroke_width="0.015"))
    return parts, lo, hi


def render_2d(scene: Scene) -> str:
    """Standalone SVG document for a 2D scene."""
    scene.validate()
    spec = get_domain(scene.domain)
    if spec.dimension != 2:
        raise InvalidInput("render_2d needs a 2D domain; use export_3d")
    groups = [scene.trajectories] if scene.layout == "overlay" else [[tr] for tr in scene.trajectories]
    panels = [_panel(spec, g, scene.show_unfolded) for g in groups]
    margin, gap, scale = 0.3, 0.5, 100.0
    width = sum(hi[0] - lo[0] for _, lo, hi in panels) + gap * (len(panels) - 1) + 2 * margin
    height = max(hi[1] - lo[1] for _, lo, hi in panels) + 2 * margin + 0.4
    body = []
    x = margin
    for (parts, lo, hi), group in zip(panels, groups):
        # flip y so the picture reads with y up
        top = height - margin - 0.4
        body.append(f'<g transform="translate({_fmt(x - lo[0])},{_fmt(top + lo[1])}) scale(1,-1)">')
        body.extend("  " + p for p in parts)
        body.append("</g>")
        caption = "; ".join(
            f"({','.join(map(str, tr.label))}) A={_fmt(tr.amplitude)} bounces={len(tr.faces)}" for tr in group
        )
        body.append(
            f'<text x="{_fmt(x)}" y="{_fmt(height - 0.15)}" font-size="0.16" font-family="sans-serif">{caption}</text>'
        )
        x += hi[0] - lo[0] + gap
    title = scene.title or spec.id.value
    head = (
        '<?xml version="1.0" encoding="UTF-8"?>\n'
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_fmt(width * scale)}" height="{_fmt(height * scale)}" '
        f'viewBox="0 0 {_fmt(width)} {_fmt(height)}">\n'
        f"<title>{title}</title>\n"
        '<rect x="0" y="0" width="100%" height="100%" fill="#ffffff"/>\n'
    )
    return head + "\n".join(body) + "\n</svg>\n"


# --------------------------------------------------------------------------
# 3D


def _outward_triangles(verts: np.ndarray, spec: DomainSpec) -> list[tuple[int, int, int]]:
    tris = []
    for face in spec.faces:
        idx = list(face.vertices)
        inward = np.asarray(face.normal)
        for k in range(1, len(idx) - 1):
            a, b, c = idx[0], idx[k], idx[k + 1]
            n = np.cross(verts[b] - verts[a], verts[c] - verts[a])
            tris.append((a, c, b) if n @ inward > 0 else (a, b, c))
    return tris


def _box(lo, hi) -> tuple[np.ndarray, list[tuple[int, int, int]]]:
    corners = np.array([[(lo, hi)[i][0], (lo, hi)[j][1], (lo, hi)[k][2]] for i in (0, 1) for j in (0, 1) for k in (0, 1)])
    quads = [(0, 1, 3, 2), (4, 6, 7, 5), (0, 4, 5, 1), (2, 3, 7, 6), (0, 2, 6, 4), (1, 5, 7, 3)]
    tris = []
    for a, b, c, d in quads:
        tris += [(a, b, c), (a, c, d)]
    return corners, tris


def export_3d(scene: Scene) -> str:
    """Wavefront OBJ: the domain as a triangle mesh and each trajectory as a closed polyline."""
    scene.validate()
    spec = get_domain(scene.domain)
    if spec.dimension != 3:
        raise InvalidInput("export_3d needs a 3D domain; use render_2d")
    lines = [f"# {scene.title or spec.id.value}", f"o {spec.id.value}"]
    verts = spec.vertex_array
    lines += [f"v {' '.join(f'{c:.9f}' for c in v)}" for v in verts]
    lines += [f"f {a + 1} {b + 1} {c + 1}" for a, b, c in _outward_triangles(verts, spec)]
    offset = len(verts)
    if scene.container:
        corners, tris = _box(*K_CONTAINER)
        lines.append("o container")
        lines += [f"v {' '.join(f'{c:.9f}' for c in v)}" for v in corners]
        lines += [f"f {a + 1 + offset} {b + 1 + offset} {c + 1 + offset}" for a, b, c in tris]
        offset += len(corners)
    for tr in scene.trajectories:
        # a closed orbit's last point repeats the launch point
        pts = tr.points[:-1] if tr.closed else tr.points
        lines.append(f"o orbit_{'_'.join(map(str, tr.label))}")
        lines.append(
            f"# amplitude {tr.amplitude:.12g} bounces {len(tr.faces)} closed {str(tr.closed).lower()} color {tr.color}"
        )
        lines += [f"v {' '.join(f'{c:.9f}' for c in p)}" for p in pts]
        idx = [str(offset + i + 1) for i in range(len(pts))]
        if tr.closed:
            idx.append(str(offset + 1))
        lines.append("l " + " ".join(idx))
        offset += len(pts)
    return "\n".join(lines) + "\n"


def polyline_length(points: Sequence[np.ndarray], closed: bool = True) -> float:
    pts = list(points) + ([points[0]] if closed else [])
    return float(sum(np.linalg.norm(np.asarray(b) - np.asarray(a)) for a, b in zip(pts, pts[1:])))


def parse_obj_polylines(text: str) -> dict[str, list[np.ndarray]]:
    """Read back the ``l`` polylines of an OBJ document, keyed by object name."""
    verts: list[np.ndarray] = []
    out: dict[str, list[np.ndarray]] = {}
    name = ""
    for line in text.splitlines():
        if line.startswith("o "):
            name = line[2:].strip()
        elif line.startswith("v "):
            verts.append(np.array([float(c) for c in line.split()[1:]]))
        elif line.startswith("l "):
            out[name] = [verts[int(i) - 1] for i in line.split()[1:]]
    return out


def render(scene: Scene) -> tuple[str, str]:
    """``(suffix, document)`` for either dimension."""
    if get_domain(scene.domain).dimension == 2:
        return ".svg", render_2d(scene)
    return ".obj", export_3d(scene)
