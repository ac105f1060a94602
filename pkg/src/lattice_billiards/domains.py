"""Catalog of the integrable billiard domains and the genus classifier.

All domains are given at unit scale.  2D coordinates are exact elements of
Q(sqrt 3) (see :mod:`lattice_billiards.surd`), 3D coordinates are integers.
Spectra are dimensionless: the energy unit (the constant multiplying each
bilinear form) is fixed to 1.
"""
from __future__ import annotations

import enum
import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property, lru_cache, reduce
from typing import Callable, Sequence

import numpy as np

from .surd import Surd, dot, s3

# Energy unit for every spectrum (the Lambda, Lambda', Lambda'' constants).
ENERGY_UNIT = 1


class InvalidInput(ValueError):
    pass


# --------------------------------------------------------------------------
# Genus of a rational polygon


@dataclass(frozen=True)
class RationalAngle:
    """Interior angle ``numerator/denominator * pi``, stored in lowest terms."""

    numerator: int
    denominator: int

    def __post_init__(self):
        if self.denominator <= 0 or self.numerator <= 0:
            raise InvalidInput(f"angle must be positive: {self.numerator}/{self.denominator}")
        g = math.gcd(self.numerator, self.denominator)
        object.__setattr__(self, "numerator", self.numerator // g)
        object.__setattr__(self, "denominator", self.denominator // g)
        if not 0 < Fraction(self.numerator, self.denominator) < 2:
            raise InvalidInput(f"angle {self} out of range (0, 2)pi")

    @classmethod
    def parse(cls, text: str) -> "RationalAngle":
        text = text.strip().removesuffix("pi").strip().rstrip("*")
        if "/" in text:
            num, den = text.split("/", 1)
        else:
            num, den = text, "1"
        try:
            return cls(int(num), int(den))
        except ValueError as exc:
            raise InvalidInput(f"cannot parse angle {text!r}") from exc

    @property
    def fraction(self) -> Fraction:
        return Fraction(self.numerator, self.denominator)

    def __str__(self) -> str:
        return f"{self.numerator}/{self.denominator}"


def _as_angle(a) -> RationalAngle:
    if isinstance(a, RationalAngle):
        return a
    if isinstance(a, str):
        return RationalAngle.parse(a)
    num, den = a
    return RationalAngle(int(num), int(den))


def genus(angles: Sequence) -> int:
    """Genus of the invariant surface of a rational polygon.

    ``g = 1 + N/2 * sum((m_i - 1)/n_i)`` with ``N = lcm(n_i)``.
    Angles may be :class:`RationalAngle`, ``(m, n)`` pairs or ``"m/n"`` strings.
    """
    angles = [_as_angle(a) for a in angles]
    sides = len(angles)
    if sides < 3:
        raise InvalidInput("a polygon needs at least three angles")
    total = sum((a.fraction for a in angles), Fraction(0))
    if total != sides - 2:
        raise InvalidInput(
            f"angles sum to {total}*pi, a {sides}-gon needs {sides - 2}*pi"
        )
    lcm = reduce(math.lcm, (a.denominator for a in angles), 1)
    g = 1 + Fraction(lcm, 2) * sum(
        (Fraction(a.numerator - 1, a.denominator) for a in angles), Fraction(0)
    )
    if g.denominator != 1:
        raise InvalidInput(f"non-integral genus {g}")
    return int(g)


def is_integrable(angles: Sequence) -> bool:
    return genus(angles) == 1


# --------------------------------------------------------------------------
# Domain catalog


class DomainId(str, enum.Enum):
    SQUARE = "square"
    RIGHT_ISOSCELES = "right-isosceles"
    EQUILATERAL = "equilateral"
    HEMI_EQUILATERAL = "hemi-equilateral"
    CUBE = "cube"
    K_TETRA = "k-tetra"
    K2_TETRA = "k2-tetra"
    K4_TETRA = "k4-tetra"

    @classmethod
    def parse(cls, value: "str | DomainId") -> "DomainId":
        if isinstance(value, DomainId):
            return value
        key = value.strip().lower().replace("_", "-")
        aliases = {
            "iso": "right-isosceles",
            "isosceles": "right-isosceles",
            "rightisosceles": "right-isosceles",
            "eq": "equilateral",
            "hemi": "hemi-equilateral",
            "hemiequilateral": "hemi-equilateral",
            "k": "k-tetra",
            "ktetra": "k-tetra",
            "k2": "k2-tetra",
            "k/2": "k2-tetra",
            "k2tetra": "k2-tetra",
            "k4": "k4-tetra",
            "k/4": "k4-tetra",
            "k4tetra": "k4-tetra",
        }
        key = aliases.get(key, key)
        try:
            return cls(key)
        except ValueError:
            names = ", ".join(d.value for d in cls)
            raise InvalidInput(f"unknown domain {value!r}; choose from {names}") from None


@dataclass(frozen=True)
class CollisionFormula:
    text: str
    func: Callable[..., int] = field(compare=False)

    def __call__(self, *label: int) -> int:
        return int(self.func(*label))


@dataclass(frozen=True)
class Face:
    """Boundary facet: vertex indices plus the inward unit normal and offset.

    A point ``x`` lies inside the half-space of the face when
    ``normal @ x >= offset``.
    """

    vertices: tuple[int, ...]
    normal: tuple[float, ...]
    offset: float


@dataclass(frozen=True)
class DomainSpec:
    id: DomainId
    dimension: int
    vertices: tuple[tuple, ...]
    faces: tuple[Face, ...]
    lattice_basis: tuple[tuple, ...]
    # Symmetric Gram matrix of |V|^2/4; off-diagonal entries may be halves.
    bilinear: tuple[tuple, ...]
    angles: tuple[RationalAngle, ...] = ()
    # Reciprocal basis vectors w_i; the actual vectors are w_i / sqrt(2).
    reciprocal_basis: tuple[tuple, ...] | None = None
    reciprocal_bilinear: tuple[tuple, ...] | None = None
    collision_formula: CollisionFormula | None = None
    table_collision_formula: CollisionFormula | None = None
    label_symmetries: tuple[tuple[int, ...], ...] = ()
    dirichlet_min: int = 1
    neumann_min: int = 0
    conjectured_integrable: bool = False
    # Convention factor between the stored bilinear and printed tables.
    table_factor: int = 1

    # -- label forms -------------------------------------------------------

    @cached_property
    def integer_form(self) -> tuple[np.ndarray, int]:
        """``(M, d)`` with integer ``M`` and ``bilinear == M / d``."""
        q = [[Fraction(c) for c in row] for row in self.bilinear]
        den = math.lcm(*(c.denominator for row in q for c in row))
        return np.array([[int(c * den) for c in row] for row in q], dtype=np.int64), den

    def quadratic_form(self, label: Sequence[int]) -> int:
        self.check_arity(label)
        M, den = self.integer_form
        label = [int(c) for c in label]
        scaled = sum(int(M[i, j]) * label[i] * label[j] for i in range(self.dimension) for j in range(self.dimension))
        if scaled % den:
            raise InvalidInput(f"non-integral form value {Fraction(scaled, den)} at {tuple(label)}")
        return scaled // den

    def quadratic_form_array(self, labels: np.ndarray) -> np.ndarray:
        """Exact int64 form values for an ``(N, dim)`` label array."""
        M, den = self.integer_form
        labels = np.asarray(labels, dtype=np.int64)
        scaled = np.einsum("ni,ij,nj->n", labels, M, labels)
        if np.any(scaled % den):
            raise InvalidInput(f"non-integral form value in {self.id.value}")
        return scaled // den

    def check_arity(self, label: Sequence[int]) -> None:
        if len(label) != self.dimension:
            raise InvalidInput(
                f"{self.id.value} labels have {self.dimension} components, got {tuple(label)}"
            )

    def lattice_vector(self, label: Sequence[int]) -> tuple:
        self.check_arity(label)
        out = []
        for axis in range(self.dimension):
            acc = Surd() if self.dimension == 2 else 0
            for coeff, basis in zip(label, self.lattice_basis):
                acc = acc + coeff * basis[axis]
            out.append(acc)
        return tuple(out)

    # -- float geometry ----------------------------------------------------

    @property
    def vertex_array(self) -> np.ndarray:
        return np.array([[float(c) for c in v] for v in self.vertices], dtype=float)

    @property
    def normals(self) -> np.ndarray:
        return np.array([f.normal for f in self.faces], dtype=float)

    @property
    def offsets(self) -> np.ndarray:
        return np.array([f.offset for f in self.faces], dtype=float)

    @property
    def basis_array(self) -> np.ndarray:
        return np.array([[float(c) for c in b] for b in self.lattice_basis], dtype=float)

    @property
    def centroid(self) -> np.ndarray:
        return self.vertex_array.mean(axis=0)

    @property
    def volume(self) -> float:
        """Area (2D) or volume (3D) from an exact fan decomposition."""
        verts = self.vertex_array
        if self.dimension == 2:
            x, y = verts[:, 0], verts[:, 1]
            return 0.5 * abs(np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1)))
        c = verts.mean(axis=0)
        vol = 0.0
        for face in self.faces:
            idx = face.vertices
            for k in range(1, len(idx) - 1):
                a, b, d = verts[idx[0]], verts[idx[k]], verts[idx[k + 1]]
                vol += abs(np.linalg.det(np.array([a - c, b - c, d - c]))) / 6.0
        return vol

    @property
    def inradius(self) -> float:
        c = self.centroid
        return float(np.min(self.normals @ c - self.offsets))

    def contains(self, point, tol: float = 0.0) -> bool:
        p = np.asarray(point, dtype=float)
        return bool(np.all(self.normals @ p - self.offsets >= -tol))

    def reflection(self, face_index: int) -> tuple[np.ndarray, np.ndarray]:
        """Affine reflection ``x -> R x + t`` through a boundary face."""
        n = np.asarray(self.faces[face_index].normal)
        c = self.faces[face_index].offset
        R = np.eye(self.dimension) - 2.0 * np.outer(n, n)
        t = 2.0 * c * n
        return R, t

    def default_start(self) -> np.ndarray:
        """Generic interior launch point, off every symmetry line.

        The shift direction has irrational slopes; a rational one is parallel to
        some lattice vector, whose orbit would then run through the centroid's
        lattice images and can hit a corner.
        """
        offsets = np.array([1 / 7, math.sqrt(2) / 11, math.sqrt(5) / 13][: self.dimension])
        shift = offsets / np.linalg.norm(offsets) * self.inradius * 0.5 / math.sqrt(5)
        return self.centroid + shift

    def admissible(self, label: Sequence[int], bc: str) -> bool:
        lo = self.dirichlet_min if bc == "dirichlet" else self.neumann_min
        if any(c < lo for c in label):
            return False
        if bc == "neumann" and not any(label):
            return False
        return True

    def to_json(self) -> dict:
        def coord(c):
            if isinstance(c, Surd):
                return c.to_json()
            return [str(c), "0"]

        return {
            "id": self.id.value,
            "dimension": self.dimension,
            "vertices": [[coord(c) for c in v] for v in self.vertices],
            "faces": [
                {"vertices": list(f.vertices), "inward_normal": list(f.normal), "offset": f.offset}
                for f in self.faces
            ],
            "lattice_basis": [[coord(c) for c in b] for b in self.lattice_basis],
            "reciprocal_basis": None
            if self.reciprocal_basis is None
            else [[coord(c) for c in b] for b in self.reciprocal_basis],
            "bilinear": [[str(Fraction(c)) for c in row] for row in self.bilinear],
            "collision_formula": None if self.collision_formula is None else self.collision_formula.text,
            "table_collision_formula": None
            if self.table_collision_formula is None
            else self.table_collision_formula.text,
            "angles": [str(a) for a in self.angles],
            "dirichlet_min": self.dirichlet_min,
            "neumann_min": self.neumann_min,
            "conjectured_integrable": self.conjectured_integrable,
            "table_factor": self.table_factor,
        }


CATALOG_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "title": "Integrable billiard catalog",
    "description": "Coordinates are [rational, sqrt3-coefficient] string pairs; "
    "reciprocal basis vectors carry an implicit 1/sqrt(2) factor.",
    "type": "array",
    "items": {
        "type": "object",
        "required": ["id", "dimension", "vertices", "faces", "lattice_basis", "bilinear"],
        "properties": {
            "id": {"type": "string"},
            "dimension": {"enum": [2, 3]},
            "vertices": {"type": "array"},
            "faces": {"type": "array"},
            "lattice_basis": {"type": "array"},
            "reciprocal_basis": {"type": ["array", "null"]},
            "bilinear": {"type": "array", "items": {"type": "array", "items": {"type": "string"}}},
            "collision_formula": {"type": ["string", "null"]},
            "table_collision_formula": {"type": ["string", "null"]},
            "angles": {"type": "array", "items": {"type": "string"}},
            "dirichlet_min": {"type": "integer"},
            "neumann_min": {"type": "integer"},
            "conjectured_integrable": {"type": "boolean"},
            "table_factor": {"type": "integer"},
        },
    },
}


def _faces_from(vertices: Sequence[Sequence[float]], index_sets) -> tuple[Face, ...]:
    verts = np.array([[float(c) for c in v] for v in vertices], dtype=float)
    centroid = verts.mean(axis=0)
    faces = []
    for idx in index_sets:
        pts = verts[list(idx)]
        if verts.shape[1] == 2:
            edge = pts[1] - pts[0]
            normal = np.array([-edge[1], edge[0]])
        else:
            normal = np.cross(pts[1] - pts[0], pts[2] - pts[0])
        length = np.linalg.norm(normal)
        if length == 0:
            raise InvalidInput(f"degenerate face {idx}")
        normal = normal / length
        offset = float(normal @ pts[0])
        if normal @ centroid < offset:
            normal, offset = -normal, -offset
        faces.append(Face(tuple(idx), tuple(float(c) for c in normal), offset))
    return tuple(faces)


def _polygon_faces(vertices) -> tuple[Face, ...]:
    n = len(vertices)
    return _faces_from(vertices, [(i, (i + 1) % n) for i in range(n)])


_TETRA_FACES = [(0, 1, 2), (0, 1, 3), (0, 2, 3), (1, 2, 3)]
_CUBE_FACES = [
    (0, 1, 3, 2),
    (4, 5, 7, 6),
    (0, 1, 5, 4),
    (2, 3, 7, 6),
    (0, 2, 6, 4),
    (1, 3, 7, 5),
]

_SWAP2 = ((0, 1), (1, 0))
_IDENTITY2 = ((0, 1),)
_IDENTITY3 = ((0, 1, 2),)


def _angles(*pairs) -> tuple[RationalAngle, ...]:
    return tuple(RationalAngle(m, n) for m, n in pairs)


def _build_catalog() -> dict[DomainId, DomainSpec]:
    r3 = s3(0, 1)
    specs = {}

    square_v = ((s3(0), s3(0)), (s3(1), s3(0)), (s3(1), s3(1)), (s3(0), s3(1)))
    specs[DomainId.SQUARE] = DomainSpec(
        id=DomainId.SQUARE,
        dimension=2,
        vertices=square_v,
        faces=_polygon_faces(square_v),
        lattice_basis=((s3(2), s3(0)), (s3(0), s3(2))),
        bilinear=((1, 0), (0, 1)),
        angles=_angles((1, 2), (1, 2), (1, 2), (1, 2)),
        reciprocal_basis=((s3(2), s3(0)), (s3(0), s3(2))),
        reciprocal_bilinear=((1, 0), (0, 1)),
        collision_formula=CollisionFormula("2(l+m)", lambda l, m: 2 * (l + m)),
        table_collision_formula=CollisionFormula("2(l+m)", lambda l, m: 2 * (l + m)),
        label_symmetries=_SWAP2,
    )

    iso_v = ((s3(0), s3(0)), (s3(1), s3(0)), (s3(1), s3(1)))
    specs[DomainId.RIGHT_ISOSCELES] = DomainSpec(
        id=DomainId.RIGHT_ISOSCELES,
        dimension=2,
        vertices=iso_v,
        faces=_polygon_faces(iso_v),
        lattice_basis=((s3(2), s3(0)), (s3(2), s3(2))),
        bilinear=((1, 1), (1, 2)),
        angles=_angles((1, 4), (1, 2), (1, 4)),
        reciprocal_basis=((s3(2), s3(-2)), (s3(0), s3(2))),
        reciprocal_bilinear=((2, -1), (-1, 1)),
        # The printed 3l+5m+lm+1 only agrees when l == 1 or m == 1.
        collision_formula=CollisionFormula("2(2l+3m)", lambda l, m: 2 * (2 * l + 3 * m)),
        table_collision_formula=CollisionFormula("3l+5m+lm+1", lambda l, m: 3 * l + 5 * m + l * m + 1),
        label_symmetries=_IDENTITY2,
    )

    # One side on the y-axis so that (2,0) and (1, sqrt3) translate the tiling.
    eq_v = ((s3(0), s3(0)), (s3(1), s3(0, Fraction(1, 3))), (s3(0), s3(0, Fraction(2, 3))))
    specs[DomainId.EQUILATERAL] = DomainSpec(
        id=DomainId.EQUILATERAL,
        dimension=2,
        vertices=eq_v,
        faces=_polygon_faces(eq_v),
        lattice_basis=((s3(2), s3(0)), (s3(1), r3)),
        bilinear=((1, Fraction(1, 2)), (Fraction(1, 2), 1)),
        angles=_angles((1, 3), (1, 3), (1, 3)),
        reciprocal_basis=((r3, s3(-1)), (s3(0), s3(2))),
        reciprocal_bilinear=((1, Fraction(-1, 2)), (Fraction(-1, 2), 1)),
        collision_formula=CollisionFormula(
            "2(l+2m), l<=m", lambda l, m: 2 * (min(l, m) + 2 * max(l, m))
        ),
        table_collision_formula=CollisionFormula(
            "2(l+2m), l<=m", lambda l, m: 2 * (min(l, m) + 2 * max(l, m))
        ),
        label_symmetries=_SWAP2,
    )

    hemi_v = ((s3(0), s3(0)), (s3(1), s3(0, Fraction(1, 3))), (s3(0), s3(0, Fraction(1, 3))))
    specs[DomainId.HEMI_EQUILATERAL] = DomainSpec(
        id=DomainId.HEMI_EQUILATERAL,
        dimension=2,
        vertices=hemi_v,
        faces=_polygon_faces(hemi_v),
        lattice_basis=((s3(2), s3(0)), (s3(3), r3)),
        bilinear=((1, Fraction(3, 2)), (Fraction(3, 2), 3)),
        angles=_angles((1, 3), (1, 6), (1, 2)),
        reciprocal_basis=((r3, s3(-3)), (s3(0), s3(2))),
        reciprocal_bilinear=((3, Fraction(-3, 2)), (Fraction(-3, 2), 1)),
        collision_formula=CollisionFormula("2(3l+5m)", lambda l, m: 2 * (3 * l + 5 * m)),
        table_collision_formula=CollisionFormula("2(3l+5m)", lambda l, m: 2 * (3 * l + 5 * m)),
        label_symmetries=_IDENTITY2,
    )

    cube_v = tuple(itertools.product((0, 1), repeat=3))
    specs[DomainId.CUBE] = DomainSpec(
        id=DomainId.CUBE,
        dimension=3,
        vertices=cube_v,
        faces=_faces_from(cube_v, _CUBE_FACES),
        lattice_basis=((2, 0, 0), (0, 2, 0), (0, 0, 2)),
        bilinear=((1, 0, 0), (0, 1, 0), (0, 0, 1)),
        label_symmetries=tuple(itertools.permutations(range(3))),
    )

    k_v = ((0, 0, 0), (1, 1, 1), (0, 2, 0), (-1, 1, 1))
    specs[DomainId.K_TETRA] = DomainSpec(
        id=DomainId.K_TETRA,
        dimension=3,
        vertices=k_v,
        faces=_faces_from(k_v, _TETRA_FACES),
        lattice_basis=((2, 2, 2), (0, 4, 0), (-2, 2, 2)),
        bilinear=((3, 2, 1), (2, 4, 2), (1, 2, 3)),
        label_symmetries=((0, 1, 2), (2, 1, 0)),
    )

    k2_v = ((0, 0, 0), (1, 1, 1), (-1, 1, 1), (0, 1, 0))
    specs[DomainId.K2_TETRA] = DomainSpec(
        id=DomainId.K2_TETRA,
        dimension=3,
        vertices=k2_v,
        faces=_faces_from(k2_v, _TETRA_FACES),
        lattice_basis=((4, 0, 0), (4, 4, 0), (2, 2, 2)),
        bilinear=((4, 4, 2), (4, 8, 4), (2, 4, 3)),
        label_symmetries=_IDENTITY3,
        conjectured_integrable=True,
    )

    k4_v = ((0, 0, 0), (0, 1, 0), (0, 1, 1), (1, 1, 1))
    specs[DomainId.K4_TETRA] = DomainSpec(
        id=DomainId.K4_TETRA,
        dimension=3,
        vertices=k4_v,
        faces=_faces_from(k4_v, _TETRA_FACES),
        lattice_basis=((2, 0, 0), (2, 2, 0), (2, 2, 2)),
        bilinear=((1, 1, 1), (1, 2, 2), (1, 2, 3)),
        label_symmetries=_IDENTITY3,
        conjectured_integrable=True,
        table_factor=4,
    )
    return specs


@lru_cache(maxsize=1)
def _catalog() -> dict[DomainId, DomainSpec]:
    return _build_catalog()


def catalog() -> list[DomainSpec]:
    """All eight catalog domains, 2D first."""
    return list(_catalog().values())


def get_domain(domain: "str | DomainId | DomainSpec") -> DomainSpec:
    if isinstance(domain, DomainSpec):
        return domain
    return _catalog()[DomainId.parse(domain)]


def geometry(domain) -> tuple[tuple[tuple, ...], tuple[tuple[int, ...], ...]]:
    """Exact vertex coordinates and face index tuples of a catalog domain."""
    spec = get_domain(domain)
    return spec.vertices, tuple(f.vertices for f in spec.faces)


def catalog_json() -> list[dict]:
    return [spec.to_json() for spec in catalog()]


def exact_norm_squared(vector) -> Surd | int:
    if vector and isinstance(vector[0], Surd):
        return dot(vector, vector)
    return sum(int(c) * int(c) for c in vector)


def dihedral_angles(domain) -> dict[tuple[int, int], float]:
    """Interior dihedral angle at every edge of a 3D domain, keyed by vertex pair."""
    spec = get_domain(domain)
    if spec.dimension != 3:
        raise InvalidInput("dihedral angles are defined for 3D domains")
    out = {}
    for (i, fa), (j, fb) in itertools.combinations(enumerate(spec.faces), 2):
        shared = sorted(set(fa.vertices) & set(fb.vertices))
        if len(shared) != 2:
            continue
        cosine = -float(np.dot(fa.normal, fb.normal))
        out[tuple(shared)] = math.acos(max(-1.0, min(1.0, cosine)))
    return out
