"""Entropies of densities relative to the trace, SSA and additivity residuals."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from . import linalg
from .car import Subalgebra, regional_subalgebra
from .errors import OverlappingRegions, TripleNotCommutingSquare
from .states import StateDensity, Triple, restrict

SSA_SLACK = 1e-9
SUPPORT_OVERLAP_TOL = 1e-8


def _xlogx_sum(eigenvalues: np.ndarray) -> float:
    w = eigenvalues[eigenvalues > linalg.default_support_tol(eigenvalues)]
    return float(np.sum(w * np.log(w)))


def entropy_hat(phi: StateDensity) -> float:
    """``-tau(rho log rho)``, the entropy relative to the tracial state (nats)."""
    return -_xlogx_sum(phi.eigenvalues) / phi.rep.dim


def entropy_vn(phi: StateDensity) -> float:
    """Von Neumann entropy ``-Tr(D log D)`` of the state on its own factor.

    For a state on a subalgebra isomorphic to ``M_d`` this is
    ``entropy_hat + log d``.
    """
    return entropy_hat(phi) + math.log(phi.factor_dim)


def relative_entropy(rho1: StateDensity, rho2: StateDensity) -> float:
    """``tau(rho1 (log rho1 - log rho2))``, or ``inf`` if supp rho1 is not in supp rho2."""
    e2 = rho2.eig
    w2 = e2.eigenvalues
    tol = linalg.default_support_tol(w2)
    kernel = e2.eigenvectors[:, w2 <= tol]
    if kernel.size:
        overlap = np.real(np.einsum("ik,ij,jk->", kernel.conj(), rho1.rho, kernel)) / rho1.rep.dim
        if overlap > SUPPORT_OVERLAP_TOL:
            return math.inf
    log2 = linalg.spectral_apply(e2, np.log, tol)
    cross = np.real(np.einsum("ij,ji->", rho1.rho, log2)) / rho1.rep.dim
    return _xlogx_sum(rho1.eigenvalues) / rho1.rep.dim - float(cross)


@dataclass(frozen=True)
class EntropyReport:
    """Von Neumann entropies of the four restrictions and the SSA residual."""

    S_total: float
    S_AB: float
    S_BC: float
    S_B: float
    residual: float
    label: str

    @classmethod
    def from_entropies(cls, s_total, s_ab, s_bc, s_b, label) -> "EntropyReport":
        return cls(s_total, s_ab, s_bc, s_b, s_total - s_ab - s_bc + s_b, label)

    @property
    def passed(self) -> bool:
        return self.residual <= SSA_SLACK

    def as_dict(self) -> dict:
        return asdict(self)


def ssa_residual(psi: StateDensity, triple: Triple, check_square: bool = True) -> EntropyReport:
    """``S(psi) - S(psi_AB) - S(psi_BC) + S(psi_B)``; nonpositive for commuting squares."""
    if check_square and not triple.square.passed:
        raise TripleNotCommutingSquare(
            f"{triple.label}: residuals {triple.square.residuals}")
    parts = [restrict(psi, sub) for sub in (triple.total, triple.ab, triple.bc, triple.b)]
    return EntropyReport.from_entropies(*(entropy_vn(p) for p in parts), label=triple.label)


def ssa_hat_residual(psi: StateDensity, triple: Triple) -> float:
    """Same combination in terms of ``entropy_hat``; equals ``ssa_residual`` exactly
    up to rounding because the factor dimensions cancel."""
    parts = [restrict(psi, sub) for sub in (triple.total, triple.ab, triple.bc, triple.b)]
    s = [entropy_hat(p) for p in parts]
    return s[0] - s[1] - s[2] + s[3]


def additivity_residual(psi: StateDensity, a: Subalgebra, c: Subalgebra) -> float:
    """``S(psi_AC) - S(psi_A) - S(psi_C)`` for disjoint regional subalgebras."""
    if a.twist is not None or c.twist is not None:
        raise ValueError("additivity is defined for regional subalgebras")
    if not a.region.isdisjoint(c.region):
        raise OverlappingRegions(f"{a.region} and {c.region} overlap")
    ac = regional_subalgebra(psi.rep, a.region | c.region)
    return (entropy_vn(restrict(psi, ac)) - entropy_vn(restrict(psi, a))
            - entropy_vn(restrict(psi, c)))
