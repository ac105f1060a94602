"""Closed-form Dirichlet and Neumann spectra and the checks built on them."""
from __future__ import annotations

import csv
import enum
import io
import itertools
from collections import Counter
from dataclasses import dataclass, field
from typing import Callable, Sequence

from .domains import DomainId, DomainSpec, InvalidInput, get_domain
from .orbits import amplitude_squared, component_bound, group_labels, iter_labels
from .surd import Surd


class IndexRuleError(InvalidInput):
    pass


class BoundaryCondition(str, enum.Enum):
    DIRICHLET = "dirichlet"
    NEUMANN = "neumann"

    @classmethod
    def parse(cls, value) -> "BoundaryCondition":
        if isinstance(value, BoundaryCondition):
            return value
        key = str(value).strip().lower()
        key = {"d": "dirichlet", "dbc": "dirichlet", "n": "neumann", "nbc": "neumann"}.get(key, key)
        try:
            return cls(key)
        except ValueError:
            raise InvalidInput(f"unknown boundary condition {value!r}") from None


@dataclass
class SpectrumEntry:
    energy: int
    multiplicity: int
    labels: list[tuple[int, ...]]

    def to_json(self) -> dict:
        return {"energy": self.energy, "multiplicity": self.multiplicity, "labels": [list(l) for l in self.labels]}


@dataclass
class CheckReport:
    name: str
    passed: bool
    checked: int = 0
    counterexamples: list = field(default_factory=list)
    detail: str = ""

    def to_json(self) -> dict:
        return {
            "name": self.name,
            "passed": self.passed,
            "checked": self.checked,
            "counterexamples": [repr(c) for c in self.counterexamples[:20]],
            "detail": self.detail,
        }

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        extra = f" ({self.detail})" if self.detail else ""
        return f"[{status}] {self.name}: {self.checked} checked{extra}"


def energy(domain, label, bc="dirichlet") -> int:
    """Energy of a label in units where each form's prefactor is 1."""
    spec = get_domain(domain)
    bc = BoundaryCondition.parse(bc)
    label = tuple(int(c) for c in label)
    spec.check_arity(label)
    if not spec.admissible(label, bc.value):
        raise IndexRuleError(f"label {label} is not admissible for {bc.value} on {spec.id.value}")
    return spec.quadratic_form(label)


def _minimum(spec: DomainSpec, bc: BoundaryCondition) -> int:
    return spec.dirichlet_min if bc is BoundaryCondition.DIRICHLET else spec.neumann_min


def levels_up_to(domain, bc, max_value: int, *, include_zero_mode: bool = False) -> list[SpectrumEntry]:
    """Every level with energy <= ``max_value``; complete by the positive-definite bound."""
    spec = get_domain(domain)
    bc = BoundaryCondition.parse(bc)
    pairs = list(iter_labels(spec, max_value, minimum=_minimum(spec, bc)))
    entries = [SpectrumEntry(g.amplitude_squared, len(g.labels), g.labels) for g in group_labels(spec, pairs)]
    if include_zero_mode and bc is BoundaryCondition.NEUMANN:
        entries.insert(0, SpectrumEntry(0, 1, [(0,) * spec.dimension]))
    return entries


def spectrum(domain, bc, count: int, *, include_zero_mode: bool = False) -> list[SpectrumEntry]:
    """Lowest levels, grouped by energy, covering at least ``count`` states.

    The final group is complete, so the multiplicities may sum past ``count``.
    """
    if count < 1:
        raise InvalidInput("count must be >= 1")
    spec = get_domain(domain)
    cutoff = max(4, int(min(float(spec.quadratic_form((1,) * spec.dimension)), 16)))
    while True:
        entries = levels_up_to(spec, bc, cutoff, include_zero_mode=include_zero_mode)
        if sum(e.multiplicity for e in entries) >= count:
            break
        cutoff *= 2
    out, total = [], 0
    for e in entries:
        out.append(e)
        total += e.multiplicity
        if total >= count:
            break
    return out


def level_values(domain, bc, count: int, *, include_zero_mode: bool = False) -> list[int]:
    """The first ``count`` energies, each repeated by its multiplicity."""
    values = [e.energy for e in spectrum(domain, bc, count, include_zero_mode=include_zero_mode) for _ in range(e.multiplicity)]
    return values[:count]


TABLE5_DOMAINS = (DomainId.K_TETRA, DomainId.K2_TETRA, DomainId.K4_TETRA)


def table5(count: int = 40) -> dict[tuple[DomainId, BoundaryCondition], list[int]]:
    """Analytic columns for the three tetrahedra in the printed convention (K/4 times 4)."""
    out = {}
    for dom in TABLE5_DOMAINS:
        spec = get_domain(dom)
        for bc in BoundaryCondition:
            out[(dom, bc)] = [spec.table_factor * v for v in level_values(spec, bc, count)]
    return out


def spectrum_csv(entries: Sequence[SpectrumEntry], factor: int = 1) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["index", "value", "multiplicity", "labels"])
    for i, e in enumerate(entries, start=1):
        labels = " ".join("(" + ",".join(map(str, l)) + ")" for l in e.labels)
        writer.writerow([i, factor * e.energy, e.multiplicity, labels])
    return buf.getvalue()


# --------------------------------------------------------------------------
# Consistency checks


def correspondence_check(domain, max_value: int) -> CheckReport:
    """Energy equals amplitude squared label by label, and Dirichlet values sit inside Neumann ones."""
    spec = get_domain(domain)
    bad = []
    checked = 0
    dirichlet = list(iter_labels(spec, max_value, minimum=1))
    for label, value in dirichlet:
        checked += 1
        if energy(spec, label, "dirichlet") != amplitude_squared(spec, label) or value != amplitude_squared(spec, label):
            bad.append(label)
    neumann_values = {v for _, v in iter_labels(spec, max_value, minimum=0)}
    missing = sorted({v for _, v in dirichlet} - neumann_values)
    bad.extend(("not-in-neumann", v) for v in missing)
    return CheckReport(
        f"correspondence {spec.id.value} <= {max_value}",
        not bad,
        checked,
        bad,
        f"{len({v for _, v in dirichlet})} Dirichlet values, all in Neumann set" if not bad else "",
    )


def dirichlet_subset_of_neumann(domain, max_value: int) -> CheckReport:
    spec = get_domain(domain)
    d_values = {v for _, v in iter_labels(spec, max_value, minimum=1)}
    n_values = {v for _, v in iter_labels(spec, max_value, minimum=0)}
    missing = sorted(d_values - n_values)
    return CheckReport(f"dirichlet subset of neumann {spec.id.value} <= {max_value}", not missing, len(d_values), missing)


@dataclass(frozen=True)
class Reduction:
    parent: DomainId
    child: DomainId
    keep: Callable[[tuple[int, ...]], bool]
    lift: Callable[[tuple[int, ...]], tuple[int, ...]]
    scale: int
    description: str


REDUCTIONS = {
    (DomainId.SQUARE, DomainId.RIGHT_ISOSCELES): Reduction(
        DomainId.SQUARE,
        DomainId.RIGHT_ISOSCELES,
        lambda p: p[1] > p[0],
        lambda c: (c[1], c[1] + c[0]),
        1,
        "square (m,n) with n>m, n=m+l",
    ),
    (DomainId.EQUILATERAL, DomainId.HEMI_EQUILATERAL): Reduction(
        DomainId.EQUILATERAL,
        DomainId.HEMI_EQUILATERAL,
        lambda p: p[1] > p[0],
        lambda c: (c[1], c[1] + c[0]),
        1,
        "equilateral (m,n) with n>m, n=m+l",
    ),
    (DomainId.K_TETRA, DomainId.K2_TETRA): Reduction(
        DomainId.K_TETRA,
        DomainId.K2_TETRA,
        lambda p: p[0] > p[2],
        lambda c: (c[1] + c[2], c[0], c[1]),
        1,
        "K (l,m,n) with l>n, l=n+p, relabelled (m,n,p)",
    ),
    (DomainId.K2_TETRA, DomainId.K4_TETRA): Reduction(
        DomainId.K2_TETRA,
        DomainId.K4_TETRA,
        lambda p: p[2] % 2 == 0,
        lambda c: (c[0], c[1], 2 * c[2]),
        4,
        "K/2 (l,m,n) with n=2p, overall factor 4 absorbed",
    ),
    (DomainId.CUBE, DomainId.K4_TETRA): Reduction(
        DomainId.CUBE,
        DomainId.K4_TETRA,
        lambda p: p[0] > p[1] > p[2],
        lambda c: (c[0] + c[1] + c[2], c[1] + c[2], c[2]),
        1,
        "cube (l,m,n) with l>m>n",
    ),
}


def subset_reduction_check(parent, child, max_value: int) -> CheckReport:
    """Child Dirichlet multiset equals the filtered, reindexed parent multiset up to ``max_value``."""
    p_spec, c_spec = get_domain(parent), get_domain(child)
    try:
        red = REDUCTIONS[(p_spec.id, c_spec.id)]
    except KeyError:
        raise InvalidInput(f"no documented reduction {p_spec.id.value} -> {c_spec.id.value}") from None
    name = f"reduction {p_spec.id.value} -> {c_spec.id.value} <= {max_value}"
    child_pairs = list(iter_labels(c_spec, max_value, minimum=1))
    parent_pairs = [
        (l, v) for l, v in iter_labels(p_spec, red.scale * max_value, minimum=1) if red.keep(l)
    ]
    bad = []
    for label, value in child_pairs:
        lifted = red.lift(label)
        if not red.keep(lifted) or p_spec.quadratic_form(lifted) != red.scale * value:
            bad.append((label, lifted))
    child_multiset = Counter(v for _, v in child_pairs)
    parent_multiset = Counter()
    for _, v in parent_pairs:
        if v % red.scale:
            bad.append(("indivisible", v))
            continue
        parent_multiset[v // red.scale] += 1
    if child_multiset != parent_multiset:
        diff = (child_multiset - parent_multiset) + (parent_multiset - child_multiset)
        bad.append(("multiset-diff", sorted(diff.items())[:10]))
    return CheckReport(name, not bad, len(child_pairs), bad, red.description)


def reciprocal_value(domain, label) -> int:
    """``|V'|^2 / 2`` for ``V' = l a' + m b'``, computed from the exact reciprocal vectors."""
    spec = get_domain(domain)
    if spec.dimension != 2 or spec.reciprocal_basis is None:
        raise InvalidInput("reciprocal lattices are defined for the 2D domains only")
    l, m = label
    a, b = spec.reciprocal_basis
    vec = [Surd.of(l) * a[i] + Surd.of(m) * b[i] for i in range(2)]
    # stored vectors are sqrt(2) times the true ones, so |V'|^2/2 = |w|^2/4
    value = (vec[0] * vec[0] + vec[1] * vec[1]) / 4
    if not value.is_rational or value.rational.denominator != 1:
        raise InvalidInput(f"non-integral reciprocal value {value} for {label}")
    return int(value.rational)


def reciprocal_isospectrality(domain, max_value: int) -> CheckReport:
    """Reciprocal square-moduli (l > m, none for the square) match the amplitude-square multiset."""
    spec = get_domain(domain)
    if spec.dimension != 2:
        raise InvalidInput("reciprocal isospectrality is only established for 2D domains")
    constrained = spec.id is not DomainId.SQUARE
    # the reciprocal forms are positive definite; bound components as for the direct form
    import numpy as np

    q = np.array([[float(c) for c in row] for row in spec.reciprocal_bilinear])
    lam = float(np.linalg.eigvalsh(q)[0])
    bound = int((max_value / lam) ** 0.5) + 2
    recip = Counter()
    checked = 0
    for l, m in itertools.product(range(1, bound + 1), repeat=2):
        if constrained and not l > m:
            continue
        v = reciprocal_value(spec, (l, m))
        if v <= max_value:
            recip[v] += 1
            checked += 1
    direct = Counter(v for _, v in iter_labels(spec, max_value, minimum=1))
    bad = []
    if recip != direct:
        diff = (recip - direct) + (direct - recip)
        bad.append(sorted(diff.items())[:10])
    return CheckReport(
        f"reciprocal isospectrality {spec.id.value} <= {max_value}",
        not bad,
        checked,
        bad,
        "l>m" if constrained else "unconstrained",
    )


def component_range(domain, max_value: int) -> int:
    return component_bound(get_domain(domain), max_value)
