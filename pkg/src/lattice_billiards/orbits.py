"""Periodic orbits built from lattice labels.

A label ``(l, m[, n])`` picks the lattice vector ``V = l a + m b [+ n c]``.
The straight segment from a launch point to launch point + V, drawn through
the mirror tiling, folds back into the fundamental domain as a billiard
trajectory with amplitude ``|V| / 2``.
"""
from __future__ import annotations

import csv
import io
import itertools
import math
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .domains import DomainId, DomainSpec, InvalidInput, exact_norm_squared, get_domain

VERTEX_TOL = 1e-12
CLOSURE_TOL = 1e-9


class TerminalOrbit(RuntimeError):
    """The unfolded segment runs through an edge or vertex of the tiling."""

    def __init__(self, point, message: str | None = None):
        self.point = np.asarray(point, dtype=float)
        super().__init__(message or f"trajectory hits a corner at {self.point.tolist()}")


@dataclass
class Trajectory:
    domain: DomainId
    label: tuple[int, ...]
    start: np.ndarray
    points: list[np.ndarray]
    faces: list[int]
    total_length: float
    amplitude: float
    closed: bool
    closure_error: float
    unfolded_end: np.ndarray = field(repr=False, default=None)

    @property
    def bounces(self) -> int:
        return len(self.faces)

    @property
    def bounce_points(self) -> list[np.ndarray]:
        return self.points[1:-1]

    def to_json(self) -> dict:
        return {
            "domain": self.domain.value,
            "label": list(self.label),
            "start": [float(c) for c in self.start],
            "points": [[float(c) for c in p] for p in self.points],
            "bounces": self.bounces,
            "total_length": self.total_length,
            "amplitude": self.amplitude,
            "closed": self.closed,
        }


@dataclass
class DegeneracyGroup:
    amplitude_squared: int
    labels: list[tuple[int, ...]]
    accidental: bool

    def to_json(self) -> dict:
        return {
            "amplitude_squared": self.amplitude_squared,
            "labels": [list(l) for l in self.labels],
            "accidental": self.accidental,
        }


def _label(domain: DomainSpec, label: Sequence[int]) -> tuple[int, ...]:
    label = tuple(int(c) for c in label)
    domain.check_arity(label)
    return label


def orbit_vector(domain, label) -> tuple:
    """Exact lattice vector ``sum(label_i * basis_i)``."""
    spec = get_domain(domain)
    return spec.lattice_vector(_label(spec, label))


def orbit_vector_float(domain, label) -> np.ndarray:
    spec = get_domain(domain)
    return np.asarray(_label(spec, label), dtype=float) @ spec.basis_array


def amplitude_squared(domain, label) -> int:
    spec = get_domain(domain)
    return spec.quadratic_form(_label(spec, label))


def amplitude_identity_holds(domain, label) -> bool:
    """``4 * amplitude^2 == |V|^2`` in exact arithmetic."""
    spec = get_domain(domain)
    return exact_norm_squared(orbit_vector(spec, label)) == 4 * amplitude_squared(spec, label)


def amplitude_identity_batch(domain, labels) -> np.ndarray:
    """Vectorised :func:`amplitude_identity_holds` over an ``(N, d)`` label array.

    Basis coordinates ``a + b*sqrt3`` are scaled to integers so the whole
    check runs in exact int64 arithmetic; labels must stay small enough that
    the squared norms fit (components up to a few thousand are fine).
    """
    from fractions import Fraction

    from .surd import Surd

    spec = get_domain(domain)
    labels = np.asarray(labels, dtype=np.int64).reshape(-1, spec.dimension)
    coords = [[Surd.of(c) for c in b] for b in spec.lattice_basis]
    q = [[Fraction(c) for c in row] for row in spec.bilinear]
    den = math.lcm(
        *(c.rational.denominator for b in coords for c in b),
        *(c.root3.denominator for b in coords for c in b),
    )
    qden = math.lcm(*(c.denominator for row in q for c in row))
    A = np.array([[int(c.rational * den) for c in b] for b in coords], dtype=np.int64)
    B = np.array([[int(c.root3 * den) for c in b] for b in coords], dtype=np.int64)
    Q = np.array([[int(c * qden) for c in row] for row in q], dtype=np.int64)
    P, R = labels @ A, labels @ B  # den * V = P + R sqrt3, per axis
    rational = (P * P + 3 * R * R).sum(axis=1)
    irrational = (2 * P * R).sum(axis=1)
    form = np.einsum("ni,ij,nj->n", labels, Q, labels)
    # |V|^2 == 4 l.Q.l  <=>  qden * rational == 4 * den^2 * form and no sqrt3 part
    return (irrational == 0) & (qden * rational == 4 * den * den * form)


def collision_count(domain, label) -> int:
    """Bounces per traversal of the lattice vector, from a closed-form count.

    For the right-isosceles triangle the printed table formula disagrees with
    the tracer once both components exceed 1; this uses the mirror-crossing
    count ``2(2l+3m)`` instead.  :func:`table_collision_count` evaluates the
    printed formula.
    """
    spec = get_domain(domain)
    if spec.dimension != 2 or spec.collision_formula is None:
        raise InvalidInput(
            f"no closed-form collision count for {spec.id.value}; use raytrace.verify_label"
        )
    return spec.collision_formula(*_label(spec, label))


def table_collision_count(domain, label) -> int:
    spec = get_domain(domain)
    if spec.dimension != 2 or spec.table_collision_formula is None:
        raise InvalidInput(f"no tabulated collision count for {spec.id.value}")
    return spec.table_collision_formula(*_label(spec, label))


def shooting_angles(label: Sequence[int]) -> list[tuple[int, int]]:
    """Equilateral-triangle launch angles as ``(p, q)`` with ``|tan| = p / (q sqrt3)``.

    Returns the pairs for (m+2n)/m, (2m+n)/n and (n-m)/(m+n), each divided by
    its gcd.  A zero numerator is left as is, matching the (1, 1) row of the
    published table.
    """
    m, n = (int(c) for c in label)
    if m < 1 or n < 1:
        raise InvalidInput("shooting angles need positive labels")
    if m > n:
        m, n = n, m
    if math.gcd(m, n) != 1:
        raise InvalidInput(f"label {(m, n)} is not coprime; divide by {math.gcd(m, n)} first")
    raw = [(m + 2 * n, m), (2 * m + n, n), (n - m, m + n)]
    out = []
    for p, q in raw:
        g = math.gcd(p, q) if p else 1
        out.append((p // g, q // g))
    return out


def shooting_tangent(pair: tuple[int, int]) -> float:
    p, q = pair
    return p / (q * math.sqrt(3.0))


def _tile_faces(spec: DomainSpec, A: np.ndarray, b: np.ndarray):
    N = spec.normals @ A.T
    c = spec.offsets + N @ b
    return N, c


def fold_trajectory(domain, label, start=None, *, vertex_tol: float = VERTEX_TOL) -> Trajectory:
    """Fold the unfolded segment ``start -> start + V`` into the domain.

    The tile containing the moving point is tracked as an affine map ``x -> A x + b``
    from the fundamental domain; each face crossing composes one reflection.
    """
    spec = get_domain(domain)
    label = _label(spec, label)
    if any(c < 1 for c in label):
        raise InvalidInput("folded orbits need label components >= 1")
    x0 = spec.default_start() if start is None else np.asarray(start, dtype=float)
    if not np.all(spec.normals @ x0 - spec.offsets > vertex_tol):
        raise InvalidInput(f"start {x0} is not strictly inside {spec.id.value}")
    V = orbit_vector_float(spec, label)
    length = float(np.linalg.norm(V))
    dim = spec.dimension

    A = np.eye(dim)
    b = np.zeros(dim)
    s = 0.0
    points = [x0.copy()]
    faces: list[int] = []
    last = -1
    while True:
        N, c = _tile_faces(spec, A, b)
        rate = N @ V
        gap = N @ x0 - c
        with np.errstate(divide="ignore", invalid="ignore"):
            cross = np.where(rate < 0, -gap / rate, np.inf)
        if last >= 0:
            cross[last] = np.inf
        cross[cross <= s + 1e-15] = np.inf
        face = int(np.argmin(cross))
        s_hit = float(cross[face])
        if s_hit >= 1.0:
            break
        y = x0 + s_hit * V
        dist = np.abs(N @ y - c)
        dist[face] = np.inf
        if np.min(dist) < vertex_tol * max(1.0, float(np.max(np.abs(y)))):
            raise TerminalOrbit(A.T @ (y - b))
        R, t = spec.reflection(face)
        b = A @ t + b
        A = A @ R
        points.append(A.T @ (y - b))
        faces.append(face)
        s = s_hit
        last = face

    end = x0 + V
    folded_end = A.T @ (end - b)
    points.append(folded_end)
    error = float(np.linalg.norm(folded_end - x0)) + float(np.linalg.norm(A - np.eye(dim)))
    closed = error < CLOSURE_TOL * max(1.0, length)
    total = float(sum(np.linalg.norm(q - p) for p, q in zip(points, points[1:])))
    return Trajectory(
        domain=spec.id,
        label=label,
        start=x0,
        points=points,
        faces=faces,
        total_length=total,
        amplitude=length / 2.0,
        closed=closed,
        closure_error=error,
        unfolded_end=end,
    )


def component_bound(spec: DomainSpec, max_value: float) -> int:
    """Largest label component that can reach ``max_value`` (positive-definite bound)."""
    q = np.array([[float(c) for c in row] for row in spec.bilinear])
    lam = float(np.linalg.eigvalsh(q)[0])
    if lam <= 0:
        raise InvalidInput(f"form of {spec.id.value} is not positive definite")
    return int(math.ceil(math.sqrt(max(max_value, 0) / lam))) + 1


def iter_labels(spec: DomainSpec, max_value: int, minimum: int = 1) -> Iterable[tuple[tuple[int, ...], int]]:
    """All labels with components >= ``minimum`` and form value <= ``max_value``."""
    bound = component_bound(spec, max_value)
    axis = np.arange(minimum, bound + 1, dtype=np.int64)
    grid = np.stack(np.meshgrid(*[axis] * spec.dimension, indexing="ij"), axis=-1).reshape(-1, spec.dimension)
    grid = grid[grid.any(axis=1)]
    values = spec.quadratic_form_array(grid)
    keep = values <= max_value
    # lexicographic order, as itertools.product would give
    for label, value in zip(grid[keep].tolist(), values[keep].tolist()):
        yield tuple(label), value


def symmetry_class(spec: DomainSpec, label: tuple[int, ...]) -> tuple[int, ...]:
    images = [tuple(label[i] for i in perm) for perm in spec.label_symmetries or [tuple(range(len(label)))]]
    return min(images)


def group_labels(spec: DomainSpec, pairs: Iterable[tuple[tuple[int, ...], int]]) -> list[DegeneracyGroup]:
    grouped: dict[int, list] = defaultdict(list)
    for label, value in pairs:
        grouped[value].append(label)
    groups = []
    for value in sorted(grouped):
        labels = sorted(grouped[value])
        classes = {symmetry_class(spec, l) for l in labels}
        groups.append(DegeneracyGroup(value, labels, accidental=len(classes) > 1))
    return groups


def enumerate_orbits(domain, max_amp2: int) -> list[DegeneracyGroup]:
    """Orbit labels (components >= 1) grouped by amplitude squared, ascending."""
    spec = get_domain(domain)
    return group_labels(spec, iter_labels(spec, max_amp2, minimum=1))


def degeneracy_csv(groups: Sequence[DegeneracyGroup]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["amplitude_squared", "multiplicity", "accidental", "labels"])
    for g in groups:
        writer.writerow(
            [g.amplitude_squared, len(g.labels), str(g.accidental).lower(), " ".join(_fmt(l) for l in g.labels)]
        )
    return buf.getvalue()


def _fmt(label: Sequence[int]) -> str:
    return "(" + ",".join(str(c) for c in label) + ")"


def table1_rows(max_n: int = 10, max_value: int | None = None) -> list[dict]:
    """Equilateral orbit summary for coprime ``m <= n``, ordered by amplitude squared.

    ``degeneracy`` counts the label and its swap.
    """
    spec = get_domain(DomainId.EQUILATERAL)
    rows = []
    for n in range(1, max_n + 1):
        for m in range(1, n + 1):
            if math.gcd(m, n) != 1:
                continue
            value = spec.quadratic_form((m, n))
            if max_value is not None and value > max_value:
                continue
            rows.append(
                {
                    "label": (m, n),
                    "amplitude_squared": value,
                    "degeneracy": 1 if m == n else 2,
                    "collisions": collision_count(spec, (m, n)),
                    "angles": shooting_angles((m, n)),
                }
            )
    rows.sort(key=lambda r: (r["amplitude_squared"], r["label"][1]))
    return rows
