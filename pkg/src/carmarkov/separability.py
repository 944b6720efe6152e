"""Separability for graded bipartite pairs.

A pair is either ``car`` (the regional algebras A_A and A_C, which
anticommute on odd elements) or ``twisted`` (A_A and the Jordan-Wigner
twisted algebra of C, which commute).  Nonseparability for the ``car`` pair
is certified by the hopping witness.  For ``twisted`` pairs of single modes
the partial transpose of the two-qubit image decides separability.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from . import linalg
from .car import (
    Region,
    as_region,
    even_odd_split,
    monomials,
    pauli_images,
    regional_subalgebra,
    twisted_subalgebra,
)
from .entropy import additivity_residual
from .errors import (
    BadSplit,
    ComponentNotProduct,
    OverlappingRegions,
    ReconstructionFailed,
    UnsupportedSize,
)
from .states import StateDensity, restrict

WITNESS_TOL = 1e-8
RECONSTRUCTION_TOL = 1e-10
PRODUCT_TOL = 1e-9
ADDITIVITY_TOL = 1e-8
EVEN_MARGINAL_TOL = 1e-6
PPT_TOL = 1e-12
PAIRS = ("car", "twisted")

_PAULI = {
    "I": np.eye(2, dtype=np.complex128),
    "X": np.array([[0, 1], [1, 0]], dtype=np.complex128),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=np.complex128),
    "Z": np.array([[1, 0], [0, -1]], dtype=np.complex128),
}


def tau_norm(x: np.ndarray) -> float:
    """``tau(x^* x)^{1/2}``, the normalized Hilbert-Schmidt norm."""
    return float(np.linalg.norm(x)) / math.sqrt(x.shape[0]) if x.size else 0.0


def hopping_witness(omega: StateDensity, hopping: np.ndarray) -> float:
    """``omega(K)``; zero on every state separable for the CAR pair."""
    return float(omega.expect(hopping).real)


def _disjoint(a, c) -> tuple[Region, Region]:
    a, c = as_region(a), as_region(c)
    if not a.isdisjoint(c):
        raise OverlappingRegions(f"{a} and {c} overlap")
    return a, c


def jw_twist_image(omega: StateDensity, a, c) -> np.ndarray:
    """Trace-one 2x2 tensor density of ``omega`` for the pair (A_A, twisted A_C).

    Built from Pauli expectations ``(1/4) sum_PQ omega(s^P_A t^Q_C) P (x) Q``,
    where the C spin operators come from ``v_A a_C`` and so commute with A_A.
    """
    a, c = _disjoint(a, c)
    if len(a) != 1 or len(c) != 1:
        raise UnsupportedSize("the tensor image is implemented for single-mode regions")
    rep = omega.rep
    sa = pauli_images(rep, a.modes[0])
    sc = pauli_images(rep, c.modes[0], twist=a)
    out = np.zeros((4, 4), dtype=np.complex128)
    for p, q in itertools.product(_PAULI, repeat=2):
        value = omega.expect(sa[p] @ sc[q])
        out += value * np.kron(_PAULI[p], _PAULI[q])
    return out / 4


def partial_transpose(rho: np.ndarray, split: tuple[int, int]) -> np.ndarray:
    dl, dr = split
    rho = np.asarray(rho, dtype=np.complex128)
    if dl < 1 or dr < 1 or dl * dr != rho.shape[0] or rho.shape[0] != rho.shape[1]:
        raise BadSplit(f"split {split} does not match shape {rho.shape}")
    return rho.reshape(dl, dr, dl, dr).transpose(0, 3, 2, 1).reshape(dl * dr, dl * dr)


def ppt_min_eigenvalue(rho, split: tuple[int, int] = (2, 2)) -> float:
    """Smallest eigenvalue of the partial transpose on the right factor."""
    return float(linalg.eigvalsh(partial_transpose(rho, split))[0])


def pair_algebras(rep, a, c, pair: str):
    """The (left, right) subalgebras for a pair label."""
    a, c = _disjoint(a, c)
    if pair == "car":
        return regional_subalgebra(rep, a), regional_subalgebra(rep, c)
    if pair == "twisted":
        return regional_subalgebra(rep, a), twisted_subalgebra(rep, c, a)
    raise ValueError(f"unknown pair {pair!r}; expected one of {PAIRS}")


def _raw_basis(sub) -> list[np.ndarray]:
    # monomials for regional algebras, orthonormal basis for twisted ones
    if sub.twist is None:
        return [m for m, _ in monomials(sub.rep, sub.region)]
    return list(sub.basis)


def product_defect(omega: StateDensity, left, right) -> float:
    """Max ``|omega(xy) - omega(x) omega(y)|`` over spanning elements x, y."""
    xs, ys = _raw_basis(left), _raw_basis(right)
    ex = [omega.expect(x) for x in xs]
    ey = [omega.expect(y) for y in ys]
    worst = 0.0
    for x, vx in zip(xs, ex):
        for y, vy in zip(ys, ey):
            worst = max(worst, abs(omega.expect(x @ y) - vx * vy))
    return float(worst)


@dataclass(frozen=True, eq=False)
class SeparabilityCertificate:
    pair: str
    regions: tuple[Region, Region]
    witness_value: float | None
    ppt_min_eigenvalue: float | None
    decomposition: tuple[tuple[float, StateDensity], ...] | None = None
    verdict: str = "undecided"

    @property
    def label(self) -> str:
        a, c = self.regions
        return f"car({a},{c})" if self.pair == "car" else f"twisted({a},^{c})"

    def as_dict(self) -> dict:
        return {
            "pair": self.label,
            "witness_value": self.witness_value,
            "ppt_min_eigenvalue": self.ppt_min_eigenvalue,
            "decomposition_weights": (None if self.decomposition is None
                                      else [float(w) for w, _ in self.decomposition]),
            "verdict": self.verdict,
        }


def certify(omega: StateDensity, a, c, pair: str = "car", hopping: np.ndarray | None = None,
            decomposition=None) -> SeparabilityCertificate:
    """Collect the available evidence and a verdict for ``omega`` and the pair.

    ``car``: a nonzero hopping witness gives ``nonseparable``.  ``twisted``
    with single modes: the sign of the PPT minimum decides.  A supplied
    decomposition that verifies gives ``separable`` in either case.
    """
    a, c = _disjoint(a, c)
    if pair not in PAIRS:
        raise ValueError(f"unknown pair {pair!r}; expected one of {PAIRS}")
    witness = None if hopping is None else hopping_witness(omega, hopping)
    ppt = None
    if pair == "twisted" and len(a) == 1 and len(c) == 1:
        ppt = ppt_min_eigenvalue(jw_twist_image(omega, a, c))
    decomposition = None if decomposition is None else tuple(
        (float(w), s) for w, s in decomposition)
    cert = SeparabilityCertificate(pair, (a, c), witness, ppt, decomposition)

    verdict = "undecided"
    if pair == "car" and witness is not None and abs(witness) > WITNESS_TOL:
        verdict = "nonseparable"
    elif ppt is not None:
        verdict = "separable" if ppt >= -PPT_TOL else "nonseparable"
    if verdict == "undecided" and decomposition is not None:
        try:
            verify_decomposition(cert, omega)
            verdict = "separable"
        except (ReconstructionFailed, ComponentNotProduct):
            pass
    return SeparabilityCertificate(pair, (a, c), witness, ppt, decomposition, verdict)


def verify_decomposition(cert: SeparabilityCertificate, omega: StateDensity) -> bool:
    """Check that the decomposition reconstructs ``omega`` from product components.

    Raises ``ReconstructionFailed`` or ``ComponentNotProduct``.
    """
    if cert.decomposition is None:
        raise ValueError("certificate carries no decomposition")
    a, c = cert.regions
    left, right = pair_algebras(omega.rep, a, c, cert.pair)
    total = sum(w * s.rho for w, s in cert.decomposition)
    err = tau_norm(total - omega.rho)
    if err > RECONSTRUCTION_TOL:
        raise ReconstructionFailed(f"reconstruction error {err:.3e}")
    for i, (_, s) in enumerate(cert.decomposition):
        defect = product_defect(s, left, right)
        if defect > PRODUCT_TOL:
            raise ComponentNotProduct(
                f"component {i} is not a product for {cert.label} (defect {defect:.3e})")
    return True


# -- additivity and the even/odd analysis -----------------------------------------

@dataclass(frozen=True, eq=False)
class EvenOddAnalysis:
    """Even/odd parts of the marginal square roots and the resulting identities."""

    a_plus: np.ndarray
    a_minus: np.ndarray
    c_plus: np.ndarray
    c_minus: np.ndarray
    odd_norm_a: float
    odd_norm_c: float
    sandwich_c: float
    sandwich_a: float
    even_identity: float
    odd_identity_a: float
    odd_identity_c: float

    @property
    def even_verdict(self) -> str:
        a_even = self.odd_norm_a <= EVEN_MARGINAL_TOL
        c_even = self.odd_norm_c <= EVEN_MARGINAL_TOL
        if a_even and c_even:
            return "both_even"
        if a_even:
            return "A_even"
        if c_even:
            return "C_even"
        return "neither"

    @property
    def max_equation_residual(self) -> float:
        return max(self.even_identity, self.odd_identity_a, self.odd_identity_c)

    def as_dict(self) -> dict:
        return {
            "odd_norm_A": self.odd_norm_a,
            "odd_norm_C": self.odd_norm_c,
            "sandwich_c": self.sandwich_c,
            "sandwich_a": self.sandwich_a,
            "even_identity": self.even_identity,
            "odd_identity_a": self.odd_identity_a,
            "odd_identity_c": self.odd_identity_c,
            "even_verdict": self.even_verdict,
        }


def even_odd_analysis(omega: StateDensity, a, c) -> EvenOddAnalysis:
    a, c = _disjoint(a, c)
    rep = omega.rep
    rho_a = restrict(omega, regional_subalgebra(rep, a))
    rho_c = restrict(omega, regional_subalgebra(rep, c))
    rho_ac = restrict(omega, regional_subalgebra(rep, a | c)).rho
    sa = linalg.spectral_apply(rho_a.eig, np.sqrt)
    sc = linalg.spectral_apply(rho_c.eig, np.sqrt)
    ap, am = even_odd_split(rep, sa)
    cp, cm = even_odd_split(rep, sc)
    return EvenOddAnalysis(
        ap, am, cp, cm,
        rho_a.odd_norm, rho_c.odd_norm,
        sandwich_c=tau_norm(rho_ac - sc @ rho_a.rho @ sc),
        sandwich_a=tau_norm(rho_ac - sa @ rho_c.rho @ sa),
        even_identity=tau_norm(ap @ am @ cp @ cm - am @ ap @ cm @ cp),
        odd_identity_a=tau_norm(am @ am @ (cp @ cm + cm @ cp)),
        odd_identity_c=tau_norm((ap @ am + am @ ap) @ cm @ cm),
    )


@dataclass(frozen=True, eq=False)
class ProductCheck:
    is_product: bool
    product_defect: float
    additivity_residual: float
    analysis: EvenOddAnalysis

    @property
    def additive(self) -> bool:
        return abs(self.additivity_residual) <= ADDITIVITY_TOL

    @property
    def consistent(self) -> bool:
        return self.is_product == self.additive

    def as_dict(self) -> dict:
        return {
            "is_product": self.is_product,
            "product_defect": self.product_defect,
            "additivity_residual": self.additivity_residual,
            "analysis": self.analysis.as_dict(),
        }


def product_check(omega: StateDensity, a, c) -> ProductCheck:
    """Factorization on monomial pairs, the additivity residual, and the even/odd analysis."""
    a, c = _disjoint(a, c)
    left, right = pair_algebras(omega.rep, a, c, "car")
    defect = product_defect(omega, left, right)
    residual = additivity_residual(omega, left, right)
    return ProductCheck(defect <= PRODUCT_TOL, defect, residual, even_odd_analysis(omega, a, c))
