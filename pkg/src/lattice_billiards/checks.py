"""Verification suites shared by the CLI and the test-suite."""
from __future__ import annotations

import numpy as np

from .domains import DomainId, catalog, get_domain
from .orbits import TerminalOrbit, collision_count, enumerate_orbits
from .raytrace import OracleDisagreement, verify_label
from .spectra import (
    REDUCTIONS,
    CheckReport,
    correspondence_check,
    dirichlet_subset_of_neumann,
    reciprocal_isospectrality,
    subset_reduction_check,
)

DOMAINS_2D = tuple(d.id for d in catalog() if d.dimension == 2)
DOMAINS_3D = tuple(d.id for d in catalog() if d.dimension == 3)
DEFAULT_SEED = 12345


def random_labels(domains, count: int, max_component: int, seed: int) -> list[tuple[DomainId, tuple[int, ...]]]:
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(count):
        dom = domains[int(rng.integers(len(domains)))]
        dim = get_domain(dom).dimension
        out.append((dom, tuple(int(c) for c in rng.integers(1, max_component + 1, size=dim))))
    return out


def _perturbed_starts(spec):
    base = spec.default_start()
    yield base
    r = spec.inradius * 0.1
    for k in range(1, 4):
        yield base + r * np.array([np.cos(k * 1.1 + j) for j in range(spec.dimension)]) / k


def check_label(domain, label) -> tuple[bool, str]:
    """Run the oracle on one label; returns ``(ok, message)``."""
    spec = get_domain(domain)
    last = ""
    for start in _perturbed_starts(spec):
        try:
            report = verify_label(spec, label, start)
        except TerminalOrbit as exc:
            last = str(exc)
            continue
        except OracleDisagreement as exc:
            return False, str(exc)
        if spec.dimension == 2:
            expected = collision_count(spec, label)
            if report.collisions != expected:
                return False, f"{spec.id.value} {label}: {report.collisions} collisions, formula gives {expected}"
        return True, ""
    return False, f"{spec.id.value} {label}: terminal from every start ({last})"


def oracle_agreement(domains, count: int, max_component: int, seed: int = DEFAULT_SEED, name: str | None = None) -> CheckReport:
    labels = random_labels(tuple(domains), count, max_component, seed)
    bad = []
    for dom, label in labels:
        ok, msg = check_label(dom, label)
        if not ok:
            bad.append(msg)
    dims = sorted({get_domain(d).dimension for d in domains})
    name = name or f"oracle agreement {'/'.join(f'{d}D' for d in dims)}"
    return CheckReport(name, not bad, len(labels), bad, f"{len(bad)} disagreements" if bad else "")


def accidental_degeneracies() -> CheckReport:
    expected = [
        (DomainId.SQUARE, 50, {(1, 7), (5, 5), (7, 1)}),
        (DomainId.SQUARE, 65, {(1, 8), (4, 7), (7, 4), (8, 1)}),
        (DomainId.EQUILATERAL, 91, {(1, 9), (5, 6), (6, 5), (9, 1)}),
    ]
    bad = []
    for dom, value, labels in expected:
        groups = {g.amplitude_squared: g for g in enumerate_orbits(dom, value)}
        g = groups.get(value)
        if g is None or set(g.labels) != labels or not g.accidental:
            bad.append((dom.value, value, g.labels if g else None))
    return CheckReport("accidental degeneracies", not bad, len(expected), bad)


SUITES = ("oracle", "correspondence", "reductions", "isospectrality", "inclusion", "degeneracies")


def run_suite(suite: str, *, seed: int = DEFAULT_SEED, max_value: int = 500, dims=(2, 3)) -> list[CheckReport]:
    if suite == "oracle":
        out = []
        if 2 in dims:
            out.append(oracle_agreement(DOMAINS_2D, 100, 8, seed))
        if 3 in dims:
            out.append(oracle_agreement(DOMAINS_3D, 50, 6, seed + 1))
        return out
    if suite == "correspondence":
        return [correspondence_check(d, min(max_value, 200)) for d in catalog()]
    if suite == "reductions":
        return [subset_reduction_check(p, c, max_value) for p, c in REDUCTIONS]
    if suite == "isospectrality":
        return [reciprocal_isospectrality(d, max_value) for d in DOMAINS_2D]
    if suite == "inclusion":
        return [dirichlet_subset_of_neumann(d, max_value) for d in catalog()]
    if suite == "degeneracies":
        return [accidental_degeneracies()]
    raise ValueError(f"unknown suite {suite!r}")
