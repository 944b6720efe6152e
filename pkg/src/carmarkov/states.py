"""Densities with respect to the tracial state, restrictions and commuting squares."""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from . import linalg
from .car import (
    FockRep,
    Region,
    Subalgebra,
    as_region,
    build_fock,
    even_odd_split,
    gauge_average,
    regional_subalgebra,
    twisted_subalgebra,
)
from .errors import (
    BothMarginalsNoneven,
    DimensionMismatch,
    InvalidDensity,
    NotNested,
    OverlappingRegions,
)

PSD_TOL = 1e-10
NORM_TOL = 1e-10
EVEN_TOL = 1e-10
SQUARE_TOL = 1e-10
NEST_TOL = 1e-10
DEFAULT_EPSILON = 1e-9

STATE_KINDS = ("general", "even", "gauge_invariant", "pure")


@dataclass(frozen=True, eq=False)
class StateDensity:
    """Density ``rho >= 0`` with ``tau(rho) = 1``.

    ``algebra`` names the subalgebra the state lives on (``None``: the whole
    CAR algebra); ``rho`` is always stored in the parent representation.
    """

    rep: FockRep
    rho: np.ndarray
    algebra: Subalgebra | None = None
    validate: bool = field(default=True, repr=False)

    def __post_init__(self):
        rho = self.rep.check_operator(self.rho)
        rho = linalg.hermitian_part(rho) if self.validate else rho
        rho = np.array(rho, copy=True)
        rho.setflags(write=False)
        object.__setattr__(self, "rho", rho)
        if not self.validate:
            return
        norm = self.rep.tau(rho).real
        if abs(norm - 1.0) > NORM_TOL:
            raise InvalidDensity(f"tau(rho) = {norm:.12g}, expected 1")
        lo = self.eigenvalues[0] if self.eigenvalues.size else 0.0
        if lo < -PSD_TOL:
            raise InvalidDensity(f"minimum eigenvalue {lo:.3e} < -{PSD_TOL}")

    @cached_property
    def eig(self) -> linalg.HermitianEig:
        return linalg.hermitian_eig(self.rho)

    @property
    def eigenvalues(self) -> np.ndarray:
        return self.eig.eigenvalues

    @property
    def factor_dim(self) -> int:
        return self.rep.dim if self.algebra is None else self.algebra.factor_dim

    def expect(self, x) -> complex:
        """``phi(X) = tau(rho X)``."""
        x = self.rep.check_operator(x)
        return np.einsum("ij,ji->", self.rho, x) / self.rep.dim

    @property
    def odd_norm(self) -> float:
        return float(np.linalg.norm(even_odd_split(self.rep, self.rho)[1]))

    @property
    def is_even(self) -> bool:
        return self.odd_norm <= EVEN_TOL


def tracial_state(rep: FockRep, algebra: Subalgebra | None = None) -> StateDensity:
    return StateDensity(rep, rep.identity(), algebra)


def random_density_matrix(dim: int, kind: str, rng: np.random.Generator) -> np.ndarray:
    """Trace-one random density on ``C^dim`` (Ginibre, or a random pure state)."""
    if kind == "pure":
        psi = rng.normal(size=dim) + 1j * rng.normal(size=dim)
        psi /= np.linalg.norm(psi)
        return np.outer(psi, psi.conj())
    g = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    m = g @ g.conj().T
    return m / np.trace(m).real


def random_state(rep: FockRep, kind: str = "general", seed: int = 0,
                 region=None) -> StateDensity:
    """Deterministic random density of the requested kind.

    With ``region`` the state is drawn on the CAR algebra of that region and
    embedded, so the returned density lies in ``A_region``.
    """
    if kind not in STATE_KINDS:
        raise ValueError(f"unknown state kind {kind!r}; choose from {STATE_KINDS}")
    rng = np.random.default_rng(seed)
    if region is None:
        sub, target = None, rep
    else:
        sub = regional_subalgebra(rep, region)
        target = build_fock(len(sub.region))
    d = target.dim
    rho = d * random_density_matrix(d, "pure" if kind == "pure" else "general", rng)
    if kind == "even":
        v = target.grading_unitary
        rho = 0.5 * (rho + v @ rho @ v)
    elif kind == "gauge_invariant":
        rho = gauge_average(target, rho)
        rho = rho / target.tau(rho).real
    if sub is not None:
        rho = sub.embed(rho)
        if sub.is_full:
            sub = None
    return StateDensity(rep, rho, sub)


def conditional_expectation(sub: Subalgebra, x) -> np.ndarray:
    """Tracial conditional expectation ``E_B(X) = sum_k tau(e_k^* X) e_k``."""
    return sub.conditional_expectation(x)


def restrict(phi: StateDensity, sub: Subalgebra) -> StateDensity:
    """The restriction ``phi|_B``, whose density is ``E_B(rho_phi)``."""
    if sub.rep is not phi.rep:
        raise DimensionMismatch("subalgebra and state live on different representations")
    return StateDensity(phi.rep, sub.conditional_expectation(phi.rho),
                        None if sub.is_full else sub)


def reduced_density(phi: StateDensity, sub: Subalgebra) -> np.ndarray:
    """Density of ``phi|_B`` as a ``factor_dim``-square matrix (tau-normalized)."""
    return sub.reduce(phi.rho)


def _regional_label(phi: StateDensity) -> Region:
    if phi.algebra is None:
        return Region(phi.rep.modes)
    if phi.algebra.twist is not None:
        raise ValueError("product extension needs states on regional subalgebras")
    return phi.algebra.region


def product_extension(phi: StateDensity, psi: StateDensity) -> StateDensity:
    """Product state on ``A_{I u J}`` with marginals ``phi`` on A_I and ``psi`` on A_J.

    Exists only when at least one marginal is even; the density is then the
    product of the two (commuting) densities.
    """
    if phi.rep is not psi.rep:
        raise DimensionMismatch("states live on different representations")
    i, j = _regional_label(phi), _regional_label(psi)
    if not i.isdisjoint(j):
        raise OverlappingRegions(f"{i} and {j} overlap")
    if phi.odd_norm > EVEN_TOL and psi.odd_norm > EVEN_TOL:
        raise BothMarginalsNoneven(
            f"odd parts {phi.odd_norm:.3e} and {psi.odd_norm:.3e}: no product state extension")
    rho = phi.rho @ psi.rho
    union = i | j
    sub = regional_subalgebra(phi.rep, union)
    return StateDensity(phi.rep, rho, None if sub.is_full else sub)


def mixture(states, weights) -> StateDensity:
    states = list(states)
    weights = np.asarray(weights, dtype=float)
    if len(states) != len(weights) or not len(states):
        raise ValueError("need one weight per state")
    if np.any(weights < 0) or abs(weights.sum() - 1.0) > 1e-12:
        raise ValueError("weights must be a probability vector")
    rho = sum(w * s.rho for w, s in zip(weights, states))
    algebras = {id(s.algebra) for s in states}
    algebra = states[0].algebra if len(algebras) == 1 else None
    return StateDensity(states[0].rep, rho, algebra)


def regularize(phi: StateDensity, epsilon: float) -> StateDensity:
    """``epsilon * tau + (1 - epsilon) * phi``; faithful for ``epsilon > 0``."""
    if not 0.0 < epsilon <= 1.0:
        raise ValueError(f"epsilon must lie in (0, 1], got {epsilon}")
    rho = epsilon * phi.rep.identity() + (1.0 - epsilon) * phi.rho
    return StateDensity(phi.rep, rho, phi.algebra)


# -- triples and commuting squares ---------------------------------------------

@dataclass(frozen=True, eq=False)
class Triple:
    """Three-composed configuration ``(A_A, A_AB, A_BC, A_B)`` inside ``A_ABC``."""

    total: Subalgebra
    ab: Subalgebra
    bc: Subalgebra
    b: Subalgebra
    a: Subalgebra
    label: str

    @property
    def rep(self) -> FockRep:
        return self.total.rep

    @cached_property
    def square(self) -> "CommutingSquareReport":
        return commuting_square_check(self.ab, self.bc, self.b)


def _three_regions(rep, a, b, c):
    a, b, c = (as_region(x).validate(rep) for x in (a, b, c))
    if not (a.isdisjoint(b) and a.isdisjoint(c) and b.isdisjoint(c)):
        raise OverlappingRegions(f"regions {a}, {b}, {c} must be pairwise disjoint")
    return a, b, c


def regional_triple(rep: FockRep, a, b, c) -> Triple:
    a, b, c = _three_regions(rep, a, b, c)
    return Triple(
        total=regional_subalgebra(rep, a | b | c),
        ab=regional_subalgebra(rep, a | b),
        bc=regional_subalgebra(rep, b | c),
        b=regional_subalgebra(rep, b),
        a=regional_subalgebra(rep, a),
        label=f"regional(A={a},B={b},C={c})",
    )


def twisted_triple(rep: FockRep, a, b, c) -> Triple:
    """``(A_AB, {A_BC,e, v_A A_BC,o}, {A_B,e, v_A A_B,o})`` - the Jordan-Wigner twisted square."""
    a, b, c = _three_regions(rep, a, b, c)
    return Triple(
        total=regional_subalgebra(rep, a | b | c),
        ab=regional_subalgebra(rep, a | b),
        bc=twisted_subalgebra(rep, b | c, a),
        b=twisted_subalgebra(rep, b, a),
        a=regional_subalgebra(rep, a),
        label=f"twisted(A={a},B={b},C={c})",
    )


@dataclass(frozen=True)
class CommutingSquareReport:
    """Residuals of the five equivalent commuting-square conditions."""

    residuals: tuple[float, float, float, float, float]
    nesting_residual: float
    tol: float = SQUARE_TOL

    @property
    def passed(self) -> bool:
        return max(self.residuals) <= self.tol

    def as_dict(self) -> dict:
        return {
            "residuals": list(self.residuals),
            "nesting_residual": self.nesting_residual,
            "pass": self.passed,
        }


def _max_column_norm(m: np.ndarray) -> float:
    return float(np.max(np.linalg.norm(m, axis=0))) if m.size else 0.0


def commuting_square_check(ab: Subalgebra, bc: Subalgebra, b: Subalgebra,
                           tol: float = SQUARE_TOL) -> CommutingSquareReport:
    """Evaluate conditions (1)-(5) as max deviations over spanning operator sets.

    (1) ``E_AB`` on A_BC vs ``E_B``; (2) ``E_BC`` on A_AB vs ``E_B``;
    (3) ``A_B = A_AB n A_BC`` and ``[E_AB, E_BC] = 0``; (4) ``E_AB E_BC = E_B``;
    (5) ``E_BC E_AB = E_B``.  Residuals are relative to the tau-2-norm of the
    input, so they are scale free.
    """
    rep = b.rep
    if ab.rep is not rep or bc.rep is not rep:
        raise DimensionMismatch("subalgebras live on different representations")
    nest = max(
        max(ab.membership_residual(e) for e in b.basis),
        max(bc.membership_residual(e) for e in b.basis),
    ) / np.sqrt(rep.dim)
    if nest > NEST_TOL:
        raise NotNested(f"A_B is not contained in both larger algebras (residual {nest:.3e})")

    p_ab, p_bc, p_b = ab.projector, bc.projector, b.projector
    dim = rep.dim
    # spanning sets: tau-orthonormal bases, as row-major vectors of unit 2-norm
    bc_vecs = bc.flat.T / np.sqrt(dim)
    ab_vecs = ab.flat.T / np.sqrt(dim)
    r1 = _max_column_norm((p_ab - p_b) @ bc_vecs)
    r2 = _max_column_norm((p_bc - p_b) @ ab_vecs)

    cosines = np.linalg.svd(ab.flat.conj() @ bc.flat.T / dim, compute_uv=False)
    n_common = int(np.sum(cosines > 0.5))
    angle_gap = float(np.max(np.minimum(cosines, np.abs(1.0 - cosines)))) if cosines.size else 0.0
    comm = _max_column_norm(p_ab @ p_bc - p_bc @ p_ab)
    r3 = max(angle_gap, comm, float(abs(n_common - len(b))))

    r4 = _max_column_norm(p_ab @ p_bc - p_b)
    r5 = _max_column_norm(p_bc @ p_ab - p_b)
    return CommutingSquareReport((r1, r2, r3, r4, r5), float(nest), tol)
