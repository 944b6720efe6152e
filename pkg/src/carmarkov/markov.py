"""Petz recovery maps, the Markov/strong-additivity test, and constructed states.

``alpha`` is the state-preserving conditional expectation onto ``A_AB``
built from the B and BC marginals; ``t_sharp`` is its tracial dual.  A state
is strongly additive exactly when ``t_sharp`` recovers ``rho`` from
``rho_AB``.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from . import linalg
from .car import (
    FockRep,
    Region,
    as_region,
    build_fock,
    even_odd_split,
    pauli_images,
    regional_subalgebra,
)
from .entropy import ssa_residual
from .errors import LambdaOutOfRange, NormTooLarge, NotOdd, OverlappingRegions, SingularDensity
from .states import (
    DEFAULT_EPSILON,
    StateDensity,
    Triple,
    product_extension,
    random_state,
    regularize,
    restrict,
)

MARKOV_TOL = 1e-8
ODD_TOL = 1e-10


def hopping_operator(rep: FockRep, k_a, k_c) -> np.ndarray:
    """``K = (k_A^* k_C - k_A k_C^*) / 2`` for odd ``k_A``, ``k_C`` with norms <= 1."""
    k_a, k_c = rep.check_operator(k_a), rep.check_operator(k_c)
    for name, k in (("k_A", k_a), ("k_C", k_c)):
        even, _ = even_odd_split(rep, k)
        if np.linalg.norm(even) > ODD_TOL:
            raise NotOdd(f"{name} has an even part of norm {np.linalg.norm(even):.3e}")
        if np.linalg.norm(k, 2) > 1.0 + 1e-12:
            raise NormTooLarge(f"||{name}|| = {np.linalg.norm(k, 2):.6g} > 1")
    # odd elements of disjoint regions anticommute with each other and adjoints
    clash = max(np.linalg.norm(k_a @ k_c + k_c @ k_a),
                np.linalg.norm(k_a @ k_c.conj().T + k_c.conj().T @ k_a))
    if clash > ODD_TOL:
        raise OverlappingRegions("k_A and k_C do not anticommute; regions overlap")
    return 0.5 * (k_a.conj().T @ k_c - k_a @ k_c.conj().T)


@dataclass(frozen=True, eq=False)
class PetzPair:
    """The maps ``alpha`` and ``t_sharp`` for a state and a commuting-square triple."""

    psi: StateDensity
    triple: Triple
    rho_b: np.ndarray
    rho_bc: np.ndarray
    rho_ab: np.ndarray
    b_inv_sqrt: np.ndarray
    bc_sqrt: np.ndarray
    b_support: np.ndarray
    regularized: bool = False

    def alpha(self, x) -> np.ndarray:
        x = self.psi.rep.check_operator(x)
        inner = self.triple.ab.conditional_expectation(self.bc_sqrt @ x @ self.bc_sqrt)
        return self.b_inv_sqrt @ inner @ self.b_inv_sqrt

    def t_sharp(self, x) -> np.ndarray:
        x = self.psi.rep.check_operator(x)
        left = self.bc_sqrt @ self.b_inv_sqrt
        return left @ x @ left.conj().T

    def duality_residual(self, n_pairs: int = 10, seed: int = 0) -> float:
        """Max ``|tau(T#(X)^* Y) - tau(X^* alpha(Y))|`` over random X in A_AB, Y in A."""
        rep = self.psi.rep
        rng = np.random.default_rng(seed)
        worst = 0.0
        for _ in range(n_pairs):
            x = self.triple.ab.conditional_expectation(_random_operator(rep, rng))
            y = _random_operator(rep, rng)
            lhs = rep.tau(self.t_sharp(x).conj().T @ y)
            rhs = rep.tau(x.conj().T @ self.alpha(y))
            worst = max(worst, abs(lhs - rhs))
        return float(worst)


def _random_operator(rep: FockRep, rng) -> np.ndarray:
    return rng.normal(size=(rep.dim, rep.dim)) + 1j * rng.normal(size=(rep.dim, rep.dim))


def petz_maps(psi: StateDensity, triple: Triple, on_singular: str = "support") -> PetzPair:
    """Build ``alpha`` and ``t_sharp``.

    ``on_singular`` decides what happens when ``rho_B`` is not faithful:
    ``"support"`` (default) inverts on the support, ``"regularize"`` mixes in
    the tracial state with weight 1e-9 first, ``"raise"`` raises
    ``SingularDensity``.
    """
    if on_singular not in ("support", "regularize", "raise"):
        raise ValueError(f"unknown on_singular mode {on_singular!r}")
    psi_b = restrict(psi, triple.b)
    regularized = False
    w = psi_b.eigenvalues
    if w[0] <= linalg.default_support_tol(w):
        if on_singular == "raise":
            raise SingularDensity(f"rho_B has kernel (min eigenvalue {w[0]:.3e})")
        if on_singular == "regularize":
            psi = regularize(psi, DEFAULT_EPSILON)
            psi_b = restrict(psi, triple.b)
            regularized = True
    psi_bc = restrict(psi, triple.bc)
    psi_ab = restrict(psi, triple.ab)
    b_inv_sqrt = linalg.spectral_apply(psi_b.eig, lambda x: 1.0 / np.sqrt(x))
    b_support = linalg.spectral_apply(psi_b.eig, np.ones_like)
    bc_sqrt = linalg.spectral_apply(psi_bc.eig, np.sqrt)
    return PetzPair(psi, triple, psi_b.rho, psi_bc.rho, psi_ab.rho,
                    b_inv_sqrt, bc_sqrt, b_support, regularized)


def trace_distance(x, y, dim: int) -> float:
    """Trace-norm distance of tau-normalized densities, i.e. ``tau(|x - y|)``."""
    return linalg.distance(x, y, "trace") / dim


def fixed_point_error(pair: PetzPair, basis) -> float:
    """Max tau-2-norm of ``alpha(X) - X s_B`` over the given basis.

    ``s_B`` is the support projection of ``rho_B`` (the identity for faithful
    states), so unfaithful states are measured on their support.
    """
    rep = pair.psi.rep
    worst = 0.0
    for x in basis:
        d = pair.alpha(x) - x @ pair.b_support
        worst = max(worst, float(np.linalg.norm(d)) / math.sqrt(rep.dim))
    return worst


@dataclass(frozen=True)
class MarkovReport:
    ssa_residual: float
    recovery_error: float
    fixed_point_error: float
    fixed_point_scope: str
    is_even: bool
    t_sharp_b_error: float
    label: str
    tol: float = MARKOV_TOL

    @property
    def verdict_by_residual(self) -> bool:
        return abs(self.ssa_residual) <= self.tol

    @property
    def verdict_by_recovery(self) -> bool:
        return self.recovery_error <= self.tol

    @property
    def verdict(self) -> bool:
        return self.verdict_by_residual and self.verdict_by_recovery

    @property
    def consistent(self) -> bool:
        """Strong additivity and exact Petz recovery agree."""
        return self.verdict_by_residual == self.verdict_by_recovery

    def as_dict(self) -> dict:
        return {
            "label": self.label,
            "ssa_residual": self.ssa_residual,
            "recovery_error": self.recovery_error,
            "fixed_point_error": self.fixed_point_error,
            "fixed_point_scope": self.fixed_point_scope,
            "t_sharp_b_error": self.t_sharp_b_error,
            "is_even": self.is_even,
            "verdict_by_residual": self.verdict_by_residual,
            "verdict_by_recovery": self.verdict_by_recovery,
            "verdict": self.verdict,
        }


def markov_report(psi: StateDensity, triple: Triple, tol: float = MARKOV_TOL,
                  on_singular: str = "support") -> MarkovReport:
    """Strong-additivity residual, Petz recovery error and alpha's fixed points.

    Fixed points are checked on a basis of A_A for even states and on A_A,even
    otherwise.
    """
    report = ssa_residual(psi, triple)
    pair = petz_maps(psi, triple, on_singular)
    dim = psi.rep.dim
    recovery = trace_distance(pair.t_sharp(pair.rho_ab), pair.psi.rho, dim)
    tb = trace_distance(pair.t_sharp(pair.rho_b), pair.rho_bc, dim)
    even = psi.is_even
    basis = triple.a.basis if even else triple.a.even_basis()
    fp = fixed_point_error(pair, basis)
    return MarkovReport(report.residual, recovery, fp, "A" if even else "A_even",
                        even, tb, triple.label, tol)


def marginal_odd_norms(psi: StateDensity, triple: Triple) -> dict[str, float]:
    """Odd-part norms of the A, B and C marginals (diagnostic only)."""
    rep = psi.rep
    a = triple.a
    b_reg = regional_subalgebra(rep, triple.b.region)
    c_region = Region(sorted(set(triple.total.region) - set(a.region) - set(b_reg.region)))
    c = regional_subalgebra(rep, c_region)
    return {name: restrict(psi, sub).odd_norm for name, sub in (("A", a), ("B", b_reg), ("C", c))}


# -- constructed states ----------------------------------------------------------

def number_projections(rep: FockRep, region) -> list[np.ndarray]:
    """Diagonal number-basis projections of a region, lexicographic in the bits."""
    region = as_region(region).validate(rep)
    occ = [rep.adag(i) @ rep.a(i) for i in region]
    out = []
    for bits in itertools.product((0, 1), repeat=len(region)):
        p = rep.identity()
        for n_i, bit in zip(occ, bits):
            p = p @ (n_i if bit else rep.identity() - n_i)
        out.append(p)
    return out


def block_markov_state(rep: FockRep, a, b, c, seed: int = 0) -> StateDensity:
    """Faithful even Markov state ``sum_j q_j rho_A,j rho_C,j p_j / tau(p_j)``.

    The ``p_j`` are the number-basis projections of B and the A, C factors
    are random even densities, so every block is an even product state.
    """
    a, b, c = (as_region(x) for x in (a, b, c))
    rng = np.random.default_rng(seed)
    projections = number_projections(rep, b)
    q = rng.dirichlet(np.ones(len(projections)))
    rho = np.zeros((rep.dim, rep.dim), dtype=np.complex128)
    for j, (qj, p) in enumerate(zip(q, projections)):
        ra = random_state(rep, "even", int(rng.integers(2**31)), region=a)
        rc = random_state(rep, "even", int(rng.integers(2**31)), region=c)
        rho += qj * (ra.rho @ rc.rho @ p) / rep.tau(p).real
    return StateDensity(rep, rho)


@dataclass(frozen=True, eq=False)
class CounterexampleComponent:
    weight: float
    rho_ac: StateDensity
    projection: np.ndarray
    omega_b: StateDensity
    spins: tuple[str, str]


@dataclass(frozen=True, eq=False)
class CounterexampleSpec:
    """Ingredients of the hopping-correlated state on ``A u B u C``."""

    lam: float
    rep: FockRep
    regions: tuple[Region, Region, Region]
    k_a: np.ndarray
    k_c: np.ndarray
    hopping: np.ndarray
    components: tuple[CounterexampleComponent, ...] = field(default_factory=tuple)

    @property
    def n_b(self) -> int:
        return len(self.regions[1])

    @property
    def weights(self) -> np.ndarray:
        return np.array([comp.weight for comp in self.components])

    @property
    def rho_lambda(self) -> np.ndarray:
        return self.rep.identity() + self.lam * self.hopping

    def invariant_residuals(self) -> dict[str, float]:
        """Checks of the weight/projection invariants (all should be ~0)."""
        ps = [comp.projection for comp in self.components]
        overlap = max((np.linalg.norm(p @ q) for p, q in itertools.combinations(ps, 2)),
                      default=0.0)
        odd = max(np.linalg.norm(even_odd_split(self.rep, p)[1]) for p in ps)
        return {
            "weight_sum": abs(float(self.weights.sum()) - 1.0),
            "min_weight": float(self.weights.min()),
            "projection_overlap": float(overlap),
            "projection_odd_part": float(odd),
            "min_projection_trace": float(min(self.rep.tau(p).real for p in ps)),
        }

    def as_dict(self) -> dict:
        a, b, c = self.regions
        return {
            "lambda": self.lam,
            "regions": {"A": list(a.modes), "B": list(b.modes), "C": list(c.modes)},
            "k_A": f"a_{a.modes[0]}",
            "k_C": f"a_{c.modes[0]}",
            "n_B": self.n_b,
            "weights": [float(w) for w in self.weights],
            "spins": [list(comp.spins) for comp in self.components],
        }


_SPIN_PAIRS = (("+X", "-X"), ("-X", "+X"), ("+Y", "-Y"), ("-Y", "+Y"))


def _spin_factor(paulis: dict, spin: str) -> np.ndarray:
    sign = 1.0 if spin[0] == "+" else -1.0
    return paulis["I"] + sign * paulis[spin[1]]


def counterexample(lam: float = 1.0, n_b: int = 3) -> tuple[StateDensity, CounterexampleSpec]:
    """Markov state whose A-C marginal is ``1 + lam K`` with ``K`` the a_A-a_C hopping term.

    Regions are A = {1}, B = {2..n_b+1}, C = {n_b+2}.  ``1 + lam K`` is written
    as ``lam/8`` times each of four pure states that are products for the
    Jordan-Wigner twisted pair, plus ``1 - lam/2`` times the tracial state;
    component ``i`` is glued to the even B state ``tau(p_i .)/tau(p_i)``.
    """
    if not (isinstance(lam, (int, float)) and 0.0 < lam <= 1.0):
        raise LambdaOutOfRange(f"lambda must lie in (0, 1], got {lam!r}")
    if 2 ** n_b < 5:
        raise ValueError("B needs at least 3 modes to host 5 orthogonal even projections")
    rep = build_fock(n_b + 2)
    A, B, C = Region([1]), Region(range(2, n_b + 2)), Region([n_b + 2])
    k_a, k_c = rep.a(1), rep.a(n_b + 2)
    hopping = hopping_operator(rep, k_a, k_c)

    sigma_a = pauli_images(rep, 1)
    sigma_c = pauli_images(rep, n_b + 2, twist=A)
    ac = regional_subalgebra(rep, A | C)
    b_alg = regional_subalgebra(rep, B)
    projections = number_projections(rep, B)[:5]
    weights = [lam / 8] * 4 + [1.0 - lam / 2]
    spins = list(_SPIN_PAIRS) + [("I", "I")]

    components = []
    for w, (sa, sc), p in zip(weights, spins, projections):
        if sa == "I":
            rho_ac = rep.identity()
        else:
            rho_ac = _spin_factor(sigma_a, sa) @ _spin_factor(sigma_c, sc)
        omega_b = StateDensity(rep, p / rep.tau(p).real, b_alg)
        components.append(CounterexampleComponent(
            w, StateDensity(rep, rho_ac, ac), p, omega_b, (sa, sc)))

    rho = sum(comp.weight * product_extension(comp.rho_ac, comp.omega_b).rho
              for comp in components)
    spec = CounterexampleSpec(float(lam), rep, (A, B, C), k_a, k_c, hopping, tuple(components))
    return StateDensity(rep, rho), spec
