"""Finite-element Laplacian eigenvalues on the catalog domains.

Linear (P1) elements; the mass matrix is consistent, lumped or their average.  Meshes come from the
Freudenthal subdivision of a reference simplex mapped affinely onto each
triangle or tetrahedron, so every vertex, edge and face of the exact
geometry is resolved by the mesh.  The square and cube use the same
subdivision on their unit grid.
"""
from __future__ import annotations

import csv
import io
import itertools
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import ArpackNoConvergence, LinearOperator, eigsh, splu
from scipy.sparse.linalg import norm as spla_norm

from .domains import DomainId, DomainSpec, InvalidInput, get_domain
from .spectra import BoundaryCondition, level_values

MIN_DOFS = {2: 1_000, 3: 10_000}
ZERO_MODE_RTOL = 1e-8
DEFAULT_SEED = 20240607
DEFAULT_MASS = "mixed"


class ConvergenceError(RuntimeError):
    """Eigensolver ran out of iterations.

    ``eigenvalues`` holds the pairs that did converge and ``residuals`` their
    backward errors ``|Kx - lam Mx| / ((|K| + |lam| |M|) |x|)``.
    """

    def __init__(self, message: str, eigenvalues=None, residuals=None):
        super().__init__(message)
        self.eigenvalues = eigenvalues
        self.residuals = residuals


@dataclass
class Mesh:
    nodes: np.ndarray  # (n, d)
    elements: np.ndarray  # (e, d+1) node indices
    boundary: np.ndarray  # (n,) bool

    @property
    def dimension(self) -> int:
        return self.nodes.shape[1]

    def measure(self) -> float:
        return float(_element_volumes(self.nodes, self.elements).sum())

    def dump(self) -> str:
        """Plain-text mesh: header, node lines, element lines (0-based indices)."""
        out = io.StringIO()
        d = self.dimension
        out.write(f"# simplicial mesh dim={d} nodes={len(self.nodes)} elements={len(self.elements)}\n")
        out.write(f"nodes {len(self.nodes)}\n")
        for x, on_boundary in zip(self.nodes, self.boundary):
            out.write(" ".join(f"{c:.17g}" for c in x) + f" {int(on_boundary)}\n")
        out.write(f"elements {len(self.elements)}\n")
        for e in self.elements:
            out.write(" ".join(str(int(i)) for i in e) + "\n")
        return out.getvalue()


@dataclass
class DiscreteOperator:
    dimension: int
    resolution: int
    bc: BoundaryCondition
    stiffness: sp.csr_matrix
    mass: sp.csr_matrix
    mesh: Mesh
    dofs: np.ndarray

    @property
    def matrix(self) -> sp.csr_matrix:
        return self.stiffness

    @property
    def dof_count(self) -> int:
        return self.stiffness.shape[0]

    @property
    def h(self) -> float:
        return 1.0 / self.resolution


@dataclass
class ComparisonRow:
    index: int
    analytic: int
    numeric: float
    relative_error: float

    def to_json(self) -> dict:
        return {
            "index": self.index,
            "analytic": self.analytic,
            "numeric": self.numeric,
            "relative_error": self.relative_error,
        }


# --------------------------------------------------------------------------
# Meshing


def _kuhn_cells(n: int, dim: int, keep_simplex: bool):
    """Freudenthal simplices of the grid ``[0, n]^dim`` in index coordinates.

    With ``keep_simplex`` only cells inside ``n >= y1 >= ... >= y_dim >= 0`` are kept.
    """
    base = np.array(list(itertools.product(range(n), repeat=dim)), dtype=np.int64)
    cells = []
    eye = np.eye(dim, dtype=np.int64)
    for perm in itertools.permutations(range(dim)):
        steps = np.cumsum(eye[list(perm)], axis=0)
        verts = np.concatenate([base[:, None, :], base[:, None, :] + steps[None, :, :]], axis=1)
        if keep_simplex:
            c = verts.sum(axis=1)  # (dim+1) * centroid
            inside = np.all(c[:, :-1] > c[:, 1:], axis=1)
            verts = verts[inside]
        cells.append(verts)
    return np.concatenate(cells, axis=0)


def _index_nodes(verts: np.ndarray, n: int):
    dim = verts.shape[-1]
    weights = (n + 1) ** np.arange(dim)
    keys = verts.reshape(-1, dim) @ weights
    uniq, inverse = np.unique(keys, return_inverse=True)
    coords = np.stack([(uniq // (n + 1) ** k) % (n + 1) for k in range(dim)], axis=1)
    return coords.astype(float), inverse.reshape(verts.shape[:2])


def build_mesh(domain, n: int) -> Mesh:
    """Mesh of ``domain`` with ``n`` subdivisions per reference edge."""
    spec = get_domain(domain)
    if n < 1:
        raise InvalidInput("resolution must be >= 1")
    if spec.volume <= 1e-14:
        raise InvalidInput(f"degenerate domain {spec.id.value}: zero volume")
    dim = spec.dimension
    verts = spec.vertex_array
    simplex = len(verts) == dim + 1
    cells = _kuhn_cells(n, dim, keep_simplex=simplex)
    grid, elements = _index_nodes(cells, n)
    y = grid / n
    if simplex:
        # x = v0 + sum_k y_k (v_k - v_{k-1})
        edges = verts[1:] - verts[:-1]
        nodes = verts[0] + y @ edges
    else:
        lo = verts.min(axis=0)
        hi = verts.max(axis=0)
        nodes = lo + y * (hi - lo)
    scale = max(1.0, float(np.max(np.abs(nodes))))
    gaps = np.abs(nodes @ spec.normals.T - spec.offsets)
    boundary = np.any(gaps < 1e-10 * scale, axis=1)
    return Mesh(nodes, elements, boundary)


def _element_volumes(nodes: np.ndarray, elements: np.ndarray) -> np.ndarray:
    X = nodes[elements]
    E = X[:, 1:, :] - X[:, :1, :]
    return np.abs(np.linalg.det(E)) / math.factorial(nodes.shape[1])


MASS_KINDS = ("consistent", "lumped", "mixed")


def assemble(mesh: Mesh, mass: str = "consistent") -> tuple[sp.csr_matrix, sp.csr_matrix]:
    """Global P1 stiffness and mass matrices.

    ``lumped`` puts each row sum on the diagonal; ``mixed`` averages the two,
    which cancels the leading eigenvalue error on uniform meshes.
    """
    if mass not in MASS_KINDS:
        raise InvalidInput(f"mass must be one of {MASS_KINDS}")
    nodes, elements = mesh.nodes, mesh.elements
    d = nodes.shape[1]
    X = nodes[elements]  # (e, d+1, d)
    E = X[:, 1:, :] - X[:, :1, :]  # rows are edge vectors
    vol = np.abs(np.linalg.det(E)) / math.factorial(d)
    Einv = np.linalg.inv(E)  # columns are gradients of barycentrics 1..d
    G = np.empty((len(elements), d + 1, d))
    G[:, 1:, :] = np.transpose(Einv, (0, 2, 1))
    G[:, 0, :] = -G[:, 1:, :].sum(axis=1)
    Ke = np.einsum("eik,ejk->eij", G, G) * vol[:, None, None]
    local = (np.ones((d + 1, d + 1)) + np.eye(d + 1)) / ((d + 1) * (d + 2))
    Me = local[None, :, :] * vol[:, None, None]
    rows = np.repeat(elements, d + 1, axis=1).ravel()
    cols = np.tile(elements, (1, d + 1)).ravel()
    n = len(nodes)
    K = sp.coo_matrix((Ke.ravel(), (rows, cols)), shape=(n, n)).tocsr()
    M = sp.coo_matrix((Me.ravel(), (rows, cols)), shape=(n, n)).tocsr()
    if mass != "consistent":
        lumped = sp.diags(np.asarray(M.sum(axis=1)).ravel()).tocsr()
        M = lumped if mass == "lumped" else 0.5 * (M + lumped)
    return K, M


def dof_estimate(domain, bc, n: int) -> int:
    spec = get_domain(domain)
    bc = BoundaryCondition.parse(bc)
    d = spec.dimension
    simplex = len(spec.vertices) == d + 1
    if simplex:
        total = math.comb(n + d, d)
        interior = math.comb(n - 1, d) if n > d else 0
    else:
        total = (n + 1) ** d
        interior = (n - 1) ** d
    return interior if bc is BoundaryCondition.DIRICHLET else total


def resolution_for_dofs(domain, bc, target: int) -> int:
    """Smallest subdivision count whose DOF count reaches ``target``."""
    n = 2
    while dof_estimate(domain, bc, n) < target:
        n += 1
    return n


def discretize(
    domain, bc, resolution: int, *, mass: str = DEFAULT_MASS, enforce_minimum: bool = True
) -> DiscreteOperator:
    spec = get_domain(domain)
    bc = BoundaryCondition.parse(bc)
    dim = spec.dimension
    if enforce_minimum and dof_estimate(spec, bc, resolution) < MIN_DOFS[dim]:
        raise InvalidInput(
            f"resolution {resolution} gives {dof_estimate(spec, bc, resolution)} DOFs; "
            f"at least {MIN_DOFS[dim]} needed in {dim}D"
        )
    mesh = build_mesh(spec, resolution)
    K, M = assemble(mesh, mass)
    if bc is BoundaryCondition.DIRICHLET:
        dofs = np.flatnonzero(~mesh.boundary)
        K = K[dofs][:, dofs]
        M = M[dofs][:, dofs]
    else:
        dofs = np.arange(len(mesh.nodes))
    return DiscreteOperator(dim, resolution, bc, K.tocsc(), M.tocsc(), mesh, dofs)


def eigenvalues(op: DiscreteOperator, k: int, *, seed: int = DEFAULT_SEED, maxiter: int | None = None) -> np.ndarray:
    """The ``k`` smallest eigenvalues, Neumann zero mode removed."""
    if k < 1 or k > op.dof_count // 10:
        raise InvalidInput(f"k must be in 1..{op.dof_count // 10}")
    rng = np.random.default_rng(seed)
    v0 = rng.random(op.dof_count)
    neumann = op.bc is BoundaryCondition.NEUMANN
    want = k + 4 + (1 if neumann else 0)
    sigma = -1.0 if neumann else 0.0
    # SuperLU with a symmetric minimum-degree ordering; COLAMD fills in far more on 3D meshes
    shifted = (op.stiffness - sigma * op.mass).tocsc()
    lu = splu(shifted, permc_spec="MMD_AT_PLUS_A", options={"SymmetricMode": True})
    opinv = LinearOperator(shifted.shape, matvec=lu.solve, dtype=float)
    try:
        vals = eigsh(
            op.stiffness,
            want,
            op.mass,
            sigma=sigma,
            which="LM",
            v0=v0,
            maxiter=maxiter,
            OPinv=opinv,
        )[0]
    except ArpackNoConvergence as exc:
        lam, vec = np.asarray(exc.eigenvalues, dtype=float), exc.eigenvectors
        res = _residuals(op, lam, vec)
        worst = f", worst residual {res.max():.2e}" if len(res) else ""
        raise ConvergenceError(
            f"eigensolver did not converge: {len(lam)} of {want} eigenpairs{worst}",
            eigenvalues=lam,
            residuals=res,
        ) from None
    vals = np.sort(np.asarray(vals, dtype=float))
    if neumann:
        vals = vals[vals >= ZERO_MODE_RTOL * vals[1]]
    return vals[:k]


def _residuals(op: DiscreteOperator, lam: np.ndarray, vec) -> np.ndarray:
    if vec is None or len(lam) == 0:
        return np.empty(0)
    # normwise backward error, well defined for the Neumann zero mode too
    r = op.stiffness @ vec - (op.mass @ vec) * lam
    scale = (spla_norm(op.stiffness, 1) + np.abs(lam) * spla_norm(op.mass, 1)) * np.linalg.norm(vec, axis=0)
    return np.linalg.norm(r, axis=0) / scale


def analytic_values(domain, bc, k: int) -> list[int]:
    return level_values(domain, bc, k)


def compare(domain, bc, k: int, resolution: int, *, seed: int = DEFAULT_SEED) -> list[ComparisonRow]:
    """Numeric levels scaled so the mean of numeric/analytic is 1, with per-level errors."""
    spec = get_domain(domain)
    bc = BoundaryCondition.parse(bc)
    numeric = eigenvalues(discretize(spec, bc, resolution), k, seed=seed)
    analytic = analytic_values(spec, bc, k)
    return compare_values(numeric, analytic)


def compare_values(numeric: Sequence[float], analytic: Sequence[int]) -> list[ComparisonRow]:
    numeric = np.asarray(numeric, dtype=float)
    analytic_arr = np.asarray(analytic, dtype=float)
    scale = float(np.mean(numeric / analytic_arr))
    scaled = numeric / scale
    return [
        ComparisonRow(i + 1, int(a), float(v), float(abs(v / a - 1.0)))
        for i, (a, v) in enumerate(zip(analytic, scaled))
    ]


def ratio_errors(numeric: Sequence[float], analytic: Sequence[int]) -> np.ndarray:
    """``|(lambda_k/lambda_1) / (A_k/A_1) - 1|`` for each level."""
    numeric = np.asarray(numeric, dtype=float)
    analytic = np.asarray(analytic, dtype=float)
    return np.abs((numeric / numeric[0]) / (analytic / analytic[0]) - 1.0)


def comparison_csv(columns: dict[tuple[str, str], list[ComparisonRow]], factors: dict[str, int] | None = None) -> str:
    """Side-by-side AV/NV table, one column pair per (domain, bc)."""
    factors = factors or {}
    keys = list(columns)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    header = ["index"]
    for dom, bc in keys:
        header += [f"{dom}:{bc}:AV", f"{dom}:{bc}:NV"]
    writer.writerow(header)
    depth = max(len(rows) for rows in columns.values())
    for i in range(depth):
        line: list = [i + 1]
        for key in keys:
            rows = columns[key]
            f = factors.get(key[0], 1)
            if i < len(rows):
                line += [rows[i].analytic * f, f"{rows[i].numeric * f:.2f}"]
            else:
                line += ["", ""]
        writer.writerow(line)
    return buf.getvalue()
