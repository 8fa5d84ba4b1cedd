"""Laplacian spectra and egalitarian-state stability classification.

The linearization of the expected one-step map around the uniform state
has eigenvalues (1 - mu)(1 + a b) where b runs over the Laplacian
spectrum and a = (1 + F) eta / (4 |E|). The egalitarian state is stable
when the dominant value (1 - mu)(1 + a lambda1) stays below 1; the
coupling (1 + F) eta at which it reaches 1 is 4 mu |E| / (lambda1 (1 - mu)),
with large-n threshold 4 mu / (1 - mu).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._kernels import jacobi_eigenvalues
from .graphs import SiteGraph, is_connected, laplacian

MARGINAL_TOL = 1e-9
MAX_DIMENSION = 2048


class SpectralError(ValueError):
    pass


def symmetric_eigenvalues(m: np.ndarray) -> np.ndarray:
    """Full ascending spectrum of a dense symmetric matrix.

    Cyclic Jacobi rotations iterated to off-diagonal Frobenius norm
    below 1e-12; each eigenvalue is accurate to 1e-10 relative to the
    matrix norm. Input must be symmetric within 1e-12.
    """
    a = np.asarray(m, dtype=np.float64)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise SpectralError("matrix must be square")
    n = a.shape[0]
    if n == 0:
        raise SpectralError("dimension 0 matrix")
    if n > MAX_DIMENSION:
        raise SpectralError(f"dimension {n} exceeds {MAX_DIMENSION}")
    if np.max(np.abs(a - a.T)) > 1e-12:
        raise SpectralError("matrix is not symmetric within 1e-12")
    return jacobi_eigenvalues(a.copy())


def das_bound(g: SiteGraph) -> float:
    """max over edges of d_i + d_j - |N_i intersect N_j|.

    Dominates lambda1 and never exceeds n (the expression equals
    |N_i union N_j|).
    """
    if g.edge_count == 0:
        raise SpectralError("edgeless graph has no edge to maximize over")
    best = 0
    neigh = [set(a) for a in g.adjacency]
    for u, v in g.edges:
        common = len(neigh[u] & neigh[v])
        cand = g.degree(u) + g.degree(v) - common
        if cand > best:
            best = cand
    return float(best)


def _check_params(mu: float, eta: float, F: float) -> None:
    if not (0 < mu < 1):
        raise SpectralError("mu must lie in (0,1)")
    if not (eta > 0):
        raise SpectralError("eta must be > 0")
    if not (F >= 1):
        raise SpectralError("F must be >= 1")


def jacobian_eig_from_laplacian(b: float, mu: float, eta: float, F: float,
                                edge_count: int) -> float:
    """Map a Laplacian eigenvalue b to the Jacobian eigenvalue (1-mu)(1+ab)."""
    _check_params(mu, eta, F)
    if edge_count < 1:
        raise SpectralError("edge_count must be >= 1")
    # tolerate solver fuzz around the zero eigenvalue
    if b < -MARGINAL_TOL:
        raise SpectralError("Laplacian eigenvalues are nonnegative")
    a = (1.0 + F) * eta / (4.0 * edge_count)
    return (1.0 - mu) * (1.0 + a * b)


def build_jacobian(g: SiteGraph, mu: float, eta: float, F: float) -> np.ndarray:
    """Entrywise Jacobian of the expected one-step map at the uniform state.

    Diagonal (1-mu)[1 + (1+F) eta d_i / (4|E|)], off-diagonal
    -(1-mu)(1+F) eta/(4|E|) for neighbors, 0 otherwise. Equals
    (1-mu)(a L + I) and is symmetric positive definite.
    """
    _check_params(mu, eta, F)
    if g.edge_count < 1:
        raise SpectralError("graph needs at least one edge")
    m = g.edge_count
    coeff = (1.0 - mu) * (1.0 + F) * eta / (4.0 * m)
    jac = np.zeros((g.n, g.n), dtype=np.float64)
    for i in range(g.n):
        jac[i, i] = (1.0 - mu) * (1.0 + (1.0 + F) * eta * g.degree(i) / (4.0 * m))
        for j in g.adjacency[i]:
            jac[i, j] = -coeff
    return jac


@dataclass(frozen=True)
class StabilityReport:
    """Stability facts for one (graph, mu, eta, F) cell."""

    graph_id: str
    n: int
    edge_count: int
    lambda1: float
    mu: float
    eta: float
    F: float
    indicator: float
    classification: str
    critical_coupling: float
    a_coeff: float

    def csv_row(self) -> list:
        return [self.graph_id, self.n, self.edge_count, self.lambda1, self.mu,
                self.eta, self.F, self.indicator, self.classification,
                self.critical_coupling]


STABILITY_CSV_HEADER = ["graph_id", "n", "edge_count", "lambda1", "mu", "eta",
                        "F", "indicator", "classification", "critical_coupling"]


def classify(indicator: float, tol: float = MARGINAL_TOL) -> str:
    if indicator < 1.0 - tol:
        return "stable"
    if indicator > 1.0 + tol:
        return "unstable"
    return "marginal"


def stability_report(g: SiteGraph, mu: float, eta: float, F: float) -> StabilityReport:
    """Classify the egalitarian state of a connected graph.

    indicator = (1-mu)(1 + lambda1 (1+F) eta/(4|E|)); stable below
    1 - 1e-9, unstable above 1 + 1e-9, marginal in between (the lemma is
    silent at equality, so equality is reported rather than guessed).
    """
    _check_params(mu, eta, F)
    if g.edge_count < 1:
        raise SpectralError("graph needs at least one edge")
    if not is_connected(g):
        raise SpectralError("graph is disconnected; analyze components separately")
    lam1 = float(symmetric_eigenvalues(laplacian(g))[-1])
    indicator = jacobian_eig_from_laplacian(lam1, mu, eta, F, g.edge_count)
    a = (1.0 + F) * eta / (4.0 * g.edge_count)
    critical = 4.0 * mu * g.edge_count / (lam1 * (1.0 - mu))
    return StabilityReport(
        graph_id=g.graph_id, n=g.n, edge_count=g.edge_count, lambda1=lam1,
        mu=mu, eta=eta, F=F, indicator=indicator,
        classification=classify(indicator), critical_coupling=critical,
        a_coeff=a)


def theorem1_threshold(mu: float) -> float:
    """Large-n critical value of the coupling (1+F) eta: 4 mu/(1-mu)."""
    if not (0 < mu < 1):
        raise SpectralError("mu must lie in (0,1)")
    return 4.0 * mu / (1.0 - mu)


def critical_mu(g: SiteGraph, eta: float, F: float) -> float:
    """Relaxation rate at which the indicator crosses 1 for this graph.

    Solves (1-mu)(1 + A) = 1 with A = lambda1 (1+F) eta/(4|E|), giving
    mu* = A/(1+A).
    """
    if not (eta > 0) or not (F >= 1):
        raise SpectralError("need eta > 0 and F >= 1")
    if g.edge_count < 1:
        raise SpectralError("graph needs at least one edge")
    lam1 = float(symmetric_eigenvalues(laplacian(g))[-1])
    a_total = lam1 * (1.0 + F) * eta / (4.0 * g.edge_count)
    return a_total / (1.0 + a_total)


def star_critical_mu(n: int, eta: float, F: float) -> float:
    """Finite-n star threshold: A = n(1+F) eta/(4(n-1)), mu* = A/(1+A)."""
    if n < 2:
        raise SpectralError("star needs n >= 2")
    a_total = n * (1.0 + F) * eta / (4.0 * (n - 1))
    return a_total / (1.0 + a_total)


def limit_critical_mu(eta: float, F: float) -> float:
    """n -> infinity critical mu: (1+F) eta/(4 + (1+F) eta)."""
    coupling = (1.0 + F) * eta
    return coupling / (4.0 + coupling)
