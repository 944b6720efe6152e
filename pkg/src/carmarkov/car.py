"""CAR algebra of ``n`` fermionic modes on the Fock space via Jordan-Wigner.

Conventions (pinned so that matrices are reproducible):

* single-mode basis ``(|0>, |1>)``; the lowering matrix is ``[[0, 1], [0, 0]]``
  and ``v = a^* a - a a^* = diag(-1, +1)``;
* ``a_i = v_1 ... v_{i-1} (x) a (x) 1 ... 1`` with mode 1 the most
  significant tensor slot;
* modes are labelled ``1..n`` in the public API.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import cached_property, lru_cache, reduce

import numpy as np

from .errors import DimensionMismatch, OverlappingRegions, TooManyModes

MAX_MODES = 10

_LOWER = np.array([[0, 1], [0, 0]], dtype=np.complex128)
_PARITY = np.diag([-1.0, 1.0]).astype(np.complex128)
_ID2 = np.eye(2, dtype=np.complex128)


def _kron_all(factors):
    return reduce(np.kron, factors, np.eye(1, dtype=np.complex128))


def _frozen(m: np.ndarray) -> np.ndarray:
    m.setflags(write=False)
    return m


@dataclass(frozen=True, eq=False)
class FockRep:
    """Matrix representation of the CAR algebra on ``2**n_modes`` dimensions."""

    n_modes: int
    annihilators: tuple[np.ndarray, ...]
    parities: tuple[np.ndarray, ...]
    grading_unitary: np.ndarray

    @property
    def dim(self) -> int:
        return 2 ** self.n_modes

    @property
    def modes(self) -> tuple[int, ...]:
        return tuple(range(1, self.n_modes + 1))

    def a(self, i: int) -> np.ndarray:
        return self.annihilators[self._index(i)]

    def adag(self, i: int) -> np.ndarray:
        return self.annihilators[self._index(i)].conj().T

    def v(self, i: int) -> np.ndarray:
        return self.parities[self._index(i)]

    def identity(self) -> np.ndarray:
        return np.eye(self.dim, dtype=np.complex128)

    @cached_property
    def occupation(self) -> np.ndarray:
        """Total particle number of each basis vector."""
        idx = np.arange(self.dim)
        return np.array([bin(k).count("1") for k in idx])

    @cached_property
    def number_operator(self) -> np.ndarray:
        return _frozen(np.diag(self.occupation.astype(np.complex128)))

    def tau(self, x: np.ndarray) -> complex:
        """Tracial state ``Tr(x) / 2**n``."""
        return np.trace(x) / self.dim

    def check_operator(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=np.complex128)
        if x.shape != (self.dim, self.dim):
            raise DimensionMismatch(f"operator shape {x.shape} on a {self.dim}-dim Fock space")
        return x

    def _index(self, i: int) -> int:
        if not 1 <= i <= self.n_modes:
            raise IndexError(f"mode {i} outside 1..{self.n_modes}")
        return i - 1


@lru_cache(maxsize=None)
def build_fock(n: int) -> FockRep:
    if not isinstance(n, (int, np.integer)) or n < 1:
        raise ValueError(f"mode count must be a positive integer, got {n!r}")
    if n > MAX_MODES:
        raise TooManyModes(f"{n} modes exceeds the limit of {MAX_MODES}")
    ann, par = [], []
    for i in range(n):
        ann.append(_frozen(_kron_all([_PARITY] * i + [_LOWER] + [_ID2] * (n - i - 1))))
        par.append(_frozen(_kron_all([_ID2] * i + [_PARITY] + [_ID2] * (n - i - 1))))
    grading = _frozen(_kron_all([_PARITY] * n))
    return FockRep(int(n), tuple(ann), tuple(par), grading)


@dataclass(frozen=True, order=True)
class Region:
    """A finite set of mode labels, stored strictly increasing."""

    modes: tuple[int, ...]

    def __init__(self, modes):
        if isinstance(modes, (int, np.integer)):
            modes = (modes,)
        modes = tuple(int(m) for m in modes)
        if len(set(modes)) != len(modes):
            raise ValueError(f"duplicate modes in region {modes}")
        if any(m < 1 for m in modes):
            raise ValueError(f"mode labels start at 1, got {modes}")
        object.__setattr__(self, "modes", tuple(sorted(modes)))

    def __len__(self) -> int:
        return len(self.modes)

    def __iter__(self):
        return iter(self.modes)

    def __or__(self, other: Region) -> Region:
        return Region(sorted(set(self.modes) | set(other.modes)))

    def isdisjoint(self, other: Region) -> bool:
        return set(self.modes).isdisjoint(other.modes)

    def validate(self, rep: FockRep) -> Region:
        if self.modes and self.modes[-1] > rep.n_modes:
            raise ValueError(f"region {self.modes} exceeds {rep.n_modes} modes")
        return self

    def __str__(self) -> str:
        return "{" + ",".join(map(str, self.modes)) + "}"


def as_region(modes) -> Region:
    return modes if isinstance(modes, Region) else Region(modes)


# -- grading, gauge ------------------------------------------------------------

def grading(rep: FockRep, x) -> np.ndarray:
    """Theta(X) = V X V with V the global parity unitary."""
    x = rep.check_operator(x)
    v = rep.grading_unitary
    return v @ x @ v


def even_odd_split(rep: FockRep, x) -> tuple[np.ndarray, np.ndarray]:
    x = rep.check_operator(x)
    tx = grading(rep, x)
    return 0.5 * (x + tx), 0.5 * (x - tx)


def odd_part_norm(rep: FockRep, x) -> float:
    return float(np.linalg.norm(even_odd_split(rep, x)[1]))


def gauge_transform(rep: FockRep, x, theta: float) -> np.ndarray:
    """Conjugation by ``exp(i theta N)``: ``gamma(a_i^*) = e^{i theta} a_i^*``."""
    x = rep.check_operator(x)
    n = rep.occupation
    phase = np.exp(1j * theta * (n[:, None] - n[None, :]))
    return x * phase


def gauge_average(rep: FockRep, x) -> np.ndarray:
    """Average of ``gamma_theta(X)`` over theta: keep number-conserving blocks."""
    x = rep.check_operator(x)
    n = rep.occupation
    return np.where(n[:, None] == n[None, :], x, 0.0)


def region_unitary(rep: FockRep, region) -> np.ndarray:
    """``v_I``, the product of single-mode parities over the region."""
    region = as_region(region).validate(rep)
    out = rep.identity()
    for i in region:
        out = out @ rep.v(i)
    return out


# -- monomials and subalgebras -------------------------------------------------

def _monomial_patterns(k: int):
    """(creators, annihilators) bit patterns in a fixed deterministic order."""
    for sc in itertools.product((0, 1), repeat=k):
        for sa in itertools.product((0, 1), repeat=k):
            yield sc, sa


def _monomial(rep: FockRep, modes, sc, sa) -> np.ndarray:
    # normal order: creators (ascending mode) then annihilators (ascending mode)
    m = rep.identity()
    for i, bit in zip(modes, sc):
        if bit:
            m = m @ rep.adag(i)
    for i, bit in zip(modes, sa):
        if bit:
            m = m @ rep.a(i)
    return m


def monomials(rep: FockRep, region) -> list[tuple[np.ndarray, int]]:
    """Normal-ordered monomials spanning A_I, each with its parity (0 even, 1 odd)."""
    region = as_region(region).validate(rep)
    return [(_monomial(rep, region.modes, sc, sa), (sum(sc) + sum(sa)) % 2)
            for sc, sa in _monomial_patterns(len(region))]


@dataclass(frozen=True, eq=False)
class Subalgebra:
    """A *-subalgebra given by a tau-orthonormal operator basis.

    ``local_basis`` holds the images of ``basis`` under the tau-preserving
    isomorphism onto the CAR algebra of ``len(region)`` modes; ``reduce`` and
    ``embed`` move operators across it.
    """

    rep: FockRep
    basis: np.ndarray
    local_basis: np.ndarray
    parity: np.ndarray
    factor_dim: int
    region: Region
    twist: Region | None = None

    @property
    def kind(self) -> str:
        return "regional" if self.twist is None else "twisted"

    @property
    def label(self) -> str:
        if self.twist is None:
            return f"regional{self.region}"
        return f"twisted{self.region}^{self.twist}"

    def __len__(self) -> int:
        return self.basis.shape[0]

    @cached_property
    def flat(self) -> np.ndarray:
        return self.basis.reshape(len(self), -1)

    @cached_property
    def is_full(self) -> bool:
        return self.twist is None and len(self.region) == self.rep.n_modes

    def coefficients(self, x) -> np.ndarray:
        """``tau(e_k^* X)`` for every basis element."""
        x = self.rep.check_operator(x)
        return self.flat.conj() @ x.reshape(-1) / self.rep.dim

    def conditional_expectation(self, x) -> np.ndarray:
        x = self.rep.check_operator(x)
        if self.is_full:
            return x.copy()
        return (self.coefficients(x) @ self.flat).reshape(x.shape)

    @cached_property
    def projector(self) -> np.ndarray:
        """Superoperator matrix of E_B acting on row-major ``vec(X)``."""
        return _frozen(self.flat.T @ self.flat.conj() / self.rep.dim)

    def membership_residual(self, x) -> float:
        x = self.rep.check_operator(x)
        return float(np.linalg.norm(self.conditional_expectation(x) - x))

    def reduce(self, x) -> np.ndarray:
        """Image of ``E_B(X)`` as a ``factor_dim x factor_dim`` matrix."""
        c = self.coefficients(x)
        return np.tensordot(c, self.local_basis, axes=1)

    def embed(self, y) -> np.ndarray:
        """Inverse of ``reduce`` on the subalgebra."""
        y = np.asarray(y, dtype=np.complex128)
        d = self.factor_dim
        if y.shape != (d, d):
            raise DimensionMismatch(f"local operator must be {d}x{d}, got {y.shape}")
        c = self.local_basis.reshape(len(self), -1).conj() @ y.reshape(-1) / d
        return np.tensordot(c, self.basis, axes=1)

    def even_basis(self) -> np.ndarray:
        return self.basis[self.parity == 0]

    def orthonormality_residual(self) -> float:
        gram = self.flat.conj() @ self.flat.T / self.rep.dim
        return float(np.max(np.abs(gram - np.eye(len(self)))))

    def closure_residual(self, n_pairs: int = 20, seed: int = 0) -> float:
        """Max ``||E(xy) - xy||`` over sampled basis pairs."""
        rng = np.random.default_rng(seed)
        m = len(self)
        worst = 0.0
        for j, k in rng.integers(0, m, size=(n_pairs, 2)):
            worst = max(worst, self.membership_residual(self.basis[j] @ self.basis[k]))
        return worst


def _orthonormalize(rep: FockRep, raw: list[np.ndarray], local_raw: list[np.ndarray],
                    parity: list[int], region: Region, twist: Region | None) -> Subalgebra:
    dim = rep.dim
    r = np.array([m.reshape(-1) for m in raw])
    # Gram-Schmidt under tau via QR; the same triangular map is applied to the
    # local monomials because the isomorphism preserves tau.
    q, tri = np.linalg.qr(r.T / np.sqrt(dim))
    tri_inv = np.linalg.inv(tri)
    basis = (r.T @ tri_inv).T.reshape(len(raw), dim, dim)
    lr = np.array([m.reshape(-1) for m in local_raw])
    d = local_raw[0].shape[0]
    local = (lr.T @ tri_inv).T.reshape(len(raw), d, d)
    return Subalgebra(rep, _frozen(basis), _frozen(local), _frozen(np.array(parity)),
                      2 ** len(region), region, twist)


def regional_subalgebra(rep: FockRep, region) -> Subalgebra:
    """A_I, generated by ``a_i, a_i^*`` for ``i`` in the region."""
    return _build(rep, as_region(region).validate(rep), None)


def twisted_subalgebra(rep: FockRep, region, twist) -> Subalgebra:
    """``{(A_I)_even, v_twist (A_I)_odd}``; commutes with ``A_twist``."""
    region = as_region(region).validate(rep)
    twist = as_region(twist).validate(rep)
    if not region.isdisjoint(twist):
        raise OverlappingRegions(f"{region} and twist {twist} overlap")
    return _build(rep, region, twist)


@lru_cache(maxsize=256)
def _build(rep: FockRep, region: Region, twist: Region | None) -> Subalgebra:
    local_rep = build_fock(max(len(region), 1))
    v_twist = region_unitary(rep, twist) if twist is not None else None
    raw, local_raw, parity = [], [], []
    if len(region) == 0:
        raw, local_raw, parity = [rep.identity()], [np.eye(1, dtype=np.complex128)], [0]
        return _orthonormalize(rep, raw, local_raw, parity, region, twist)
    for sc, sa in _monomial_patterns(len(region)):
        p = (sum(sc) + sum(sa)) % 2
        m = _monomial(rep, region.modes, sc, sa)
        if p and v_twist is not None:
            m = v_twist @ m
        raw.append(m)
        local_raw.append(_monomial(local_rep, local_rep.modes, sc, sa))
        parity.append(p)
    return _orthonormalize(rep, raw, local_raw, parity, region, twist)


def pauli_images(rep: FockRep, mode: int, twist=None) -> dict[str, np.ndarray]:
    """Spin-1/2 operators generated by ``c = v_twist a_mode``.

    ``X = c + c^*``, ``Y = -i(c - c^*)``, ``Z = c c^* - c^* c``; with the pinned
    conventions these match the Pauli matrices on the mode's tensor slot.
    """
    c = rep.a(mode)
    if twist is not None:
        twist = as_region(twist)
        if mode in twist.modes:
            raise OverlappingRegions(f"mode {mode} lies in the twist region {twist}")
        c = region_unitary(rep, twist) @ c
    cd = c.conj().T
    return {"I": rep.identity(), "X": c + cd, "Y": -1j * (c - cd), "Z": c @ cd - cd @ c}
