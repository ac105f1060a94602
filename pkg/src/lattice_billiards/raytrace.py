"""Specular billiard simulator used as a ground-truth oracle.

The tracer only knows the domain's faces.  It never looks at lattice vectors:
a ray is advanced face to face with mirror reflection until it returns to its
launch state, hits an edge or vertex, or runs out of budget.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .domains import DomainSpec, InvalidInput, get_domain

HIT_EPS = 1e-13
CLOSURE_TOL = 1e-9
VERTEX_TOL = 1e-12


class Classification(str, enum.Enum):
    PERIODIC = "periodic"
    TERMINAL = "terminal"
    BUDGET_EXHAUSTED = "budget-exhausted"


class OracleDisagreement(AssertionError):
    def __init__(self, message: str, *, expected=None, observed=None):
        super().__init__(message)
        self.expected = expected
        self.observed = observed


@dataclass
class TraceReport:
    classification: Classification
    collisions: int
    path_length: float
    closure_error: float = math.inf
    retracing: bool = False
    points: list[np.ndarray] = field(default_factory=list, repr=False)
    face_sequence: list[int] = field(default_factory=list, repr=False)
    final_direction: np.ndarray | None = field(default=None, repr=False)

    @property
    def periodic(self) -> bool:
        return self.classification is Classification.PERIODIC

    @property
    def period_collisions(self) -> int | None:
        return self.collisions if self.periodic else None

    def to_json(self) -> dict:
        return {
            "classification": self.classification.value,
            "collisions": self.collisions,
            "path_length": self.path_length,
            "closure_error": self.closure_error if math.isfinite(self.closure_error) else None,
            "retracing": self.retracing,
            "points": [[float(c) for c in p] for p in self.points],
        }


def _check_geometry(spec: DomainSpec) -> None:
    if spec.volume <= 1e-14:
        raise InvalidInput(f"degenerate domain {spec.id.value}: zero volume")


def trace(
    domain,
    start,
    direction,
    max_collisions: int = 1000,
    *,
    min_length: float = 0.0,
    tol: float = CLOSURE_TOL,
    vertex_tol: float = VERTEX_TOL,
) -> TraceReport:
    """Follow a billiard ray until it closes, dies on an edge, or runs out of bounces.

    Closure needs both position and direction to match the launch state.
    ``min_length`` suppresses closures on shorter repeats of the loop, which is
    how a multiply-traversed orbit is measured over its full length.
    """
    spec = get_domain(domain)
    _check_geometry(spec)
    normals = spec.normals
    offsets = spec.offsets

    x0 = np.asarray(start, dtype=float)
    d0 = np.asarray(direction, dtype=float)
    norm = np.linalg.norm(d0)
    if norm == 0:
        raise InvalidInput("direction must be nonzero")
    d0 = d0 / norm
    if not np.all(normals @ x0 - offsets > vertex_tol):
        raise InvalidInput(f"start {x0} is not strictly inside {spec.id.value}")

    p, d = x0.copy(), d0.copy()
    length = 0.0
    points = [x0.copy()]
    faces: list[int] = []
    retracing = False
    collisions = 0
    current_face = -1

    while True:
        speeds = normals @ d
        gaps = normals @ p - offsets
        with np.errstate(divide="ignore", invalid="ignore"):
            t = np.where(speeds < 0, -gaps / speeds, np.inf)
        if current_face >= 0:
            t[current_face] = np.inf if t[current_face] <= HIT_EPS else t[current_face]
        t[t <= HIT_EPS] = np.inf
        face = int(np.argmin(t))
        t_hit = float(t[face])
        if not math.isfinite(t_hit):
            raise InvalidInput("ray escaped the domain; faces are inconsistent")

        # Does this segment pass back through the launch state?
        if np.linalg.norm(d - d0) < tol:
            s = float((x0 - p) @ d)
            miss = float(np.linalg.norm(p + s * d - x0))
            if -tol <= s <= t_hit + tol and miss < tol and length + s > tol:
                if length + s >= min_length - tol * max(1.0, min_length):
                    length += s
                    points.append(x0.copy())
                    # chord form; acos(d @ d0) loses half the digits near 0
                    angle = 2.0 * math.asin(min(1.0, float(np.linalg.norm(d - d0)) / 2.0))
                    return TraceReport(
                        Classification.PERIODIC,
                        collisions,
                        length,
                        miss + angle,
                        retracing,
                        points,
                        faces,
                        d.copy(),
                    )

        hit = p + t_hit * d
        others = np.abs(normals @ hit - offsets)
        others[face] = np.inf
        if np.min(others) < vertex_tol * max(1.0, float(np.max(np.abs(hit)))):
            points.append(hit)
            return TraceReport(
                Classification.TERMINAL, collisions, length + t_hit, math.inf, retracing, points, faces, d.copy()
            )

        if collisions >= max_collisions:
            points.append(hit)
            return TraceReport(
                Classification.BUDGET_EXHAUSTED,
                collisions,
                length + t_hit,
                math.inf,
                retracing,
                points,
                faces,
                d.copy(),
            )

        n = normals[face]
        new_d = d - 2.0 * float(d @ n) * n
        if np.linalg.norm(new_d + d) < tol:
            retracing = True
        d = new_d
        p = hit
        length += t_hit
        collisions += 1
        current_face = face
        points.append(hit.copy())
        faces.append(face)


def verify_label(domain, label, start=None, *, tol: float = CLOSURE_TOL) -> TraceReport:
    """Check a lattice-built orbit against the tracer.

    The ray is launched along the orbit vector.  It must close after exactly
    ``|V|`` of travel with the same bounce count that folding produced.
    """
    from . import orbits

    spec = get_domain(domain)
    label = tuple(int(c) for c in label)
    x0 = spec.default_start() if start is None else np.asarray(start, dtype=float)
    folded = orbits.fold_trajectory(spec, label, x0)
    expected = folded.bounces
    V = np.asarray(orbits.orbit_vector_float(spec, label))
    length = float(np.linalg.norm(V))
    budget = 4 * (expected + 8)
    report = trace(spec, x0, V, budget, min_length=length, tol=tol)
    if not report.periodic:
        raise OracleDisagreement(
            f"{spec.id.value} {label}: tracer says {report.classification.value} "
            f"after {report.collisions} collisions, folding gave {expected} bounces "
            f"(folded closed={folded.closed})",
            expected=expected,
            observed=report.collisions,
        )
    if abs(report.path_length - length) > tol * length:
        raise OracleDisagreement(
            f"{spec.id.value} {label}: closed after length {report.path_length:.12g}, "
            f"expected |V| = {length:.12g}",
            expected=length,
            observed=report.path_length,
        )
    if report.collisions != expected:
        raise OracleDisagreement(
            f"{spec.id.value} {label}: tracer counted {report.collisions} collisions, "
            f"folding gave {expected}",
            expected=expected,
            observed=report.collisions,
        )
    if report.closure_error >= tol * length:
        raise OracleDisagreement(
            f"{spec.id.value} {label}: closure error {report.closure_error:.3g}",
            expected=0.0,
            observed=report.closure_error,
        )
    return report


def first_return(domain, label, start=None, max_collisions: int = 10_000) -> TraceReport:
    """Trace along an orbit vector and stop at the first true return, whatever its length."""
    from . import orbits

    spec = get_domain(domain)
    x0 = spec.default_start() if start is None else np.asarray(start, dtype=float)
    V = orbits.orbit_vector_float(spec, label)
    return trace(spec, x0, V, max_collisions)
