"""Dense Hermitian kernel: eigendecomposition, spectral functions, distances.

The eigensolver is a cyclic Jacobi method.  A compiled implementation
(``carmarkov._jacobi_ext``) is used when it has been built; otherwise the
vectorized numpy version in ``carmarkov._jacobi_py`` is selected.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import _jacobi_py
from .errors import ConvergenceError, DimensionMismatch, NegativeEigenvalue, NonHermitianInput

try:
    from . import _jacobi_ext
except ImportError:  # extension not built
    _jacobi_ext = None

BACKENDS: dict[str, Callable] = {"python": _jacobi_py.jacobi_eigh}
if _jacobi_ext is not None:
    BACKENDS["compiled"] = _jacobi_ext.jacobi_eigh

_active_backend = "compiled" if "compiled" in BACKENDS else "python"

HERMITIAN_TOL = 1e-12


def get_backend() -> str:
    return _active_backend


def set_backend(name: str) -> None:
    """Select the Jacobi implementation used by default (``compiled``/``python``)."""
    global _active_backend
    if name not in BACKENDS:
        raise ValueError(f"unknown or unavailable backend {name!r}; have {sorted(BACKENDS)}")
    _active_backend = name


@dataclass(frozen=True)
class HermitianEig:
    """Ascending eigenvalues with matching unitary eigenvector columns."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def reconstruct(self) -> np.ndarray:
        u = self.eigenvectors
        return (u * self.eigenvalues) @ u.conj().T


def _as_square(m) -> np.ndarray:
    m = np.asarray(m, dtype=np.complex128)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise DimensionMismatch(f"expected a square matrix, got shape {m.shape}")
    return m


def hermitian_part(m: np.ndarray) -> np.ndarray:
    return 0.5 * (m + m.conj().T)


def hermitian_eig(m, backend: str | None = None) -> HermitianEig:
    """Eigendecomposition of a Hermitian matrix by cyclic Jacobi rotations.

    Raises ``NonHermitianInput`` when ``||M - M^H||_F > 1e-12 ||M||_F``.
    """
    m = _as_square(m)
    scale = np.linalg.norm(m)
    asym = np.linalg.norm(m - m.conj().T)
    if asym > HERMITIAN_TOL * max(scale, 1.0):
        raise NonHermitianInput(f"relative anti-Hermitian part {asym / max(scale, 1.0):.3e}")
    solver = BACKENDS[backend or _active_backend]
    w, u, sweeps = solver(np.ascontiguousarray(hermitian_part(m)))
    if sweeps < 0:
        raise ConvergenceError("Jacobi iteration did not converge")
    order = np.argsort(w, kind="stable")
    return HermitianEig(np.asarray(w)[order], np.asarray(u)[:, order])


def eigvalsh(m, backend: str | None = None) -> np.ndarray:
    return hermitian_eig(m, backend).eigenvalues


def default_support_tol(eigenvalues: np.ndarray) -> float:
    if eigenvalues.size == 0:
        return 0.0
    return eigenvalues.size * np.finfo(float).eps * float(np.max(np.abs(eigenvalues)))


def _log(x):
    return np.log(x)


def _inv_sqrt(x):
    return 1.0 / np.sqrt(x)


_FUNCTIONS: dict[str, Callable[[np.ndarray], np.ndarray]] = {
    "log": _log,
    "sqrt": np.sqrt,
    "inv_sqrt": _inv_sqrt,
}


def spectral_apply(eig: HermitianEig, f: Callable[[np.ndarray], np.ndarray],
                   support_tol: float | None = None) -> np.ndarray:
    """U f(diag) U^H with f evaluated on eigenvalues above ``support_tol`` only."""
    w = eig.eigenvalues
    tol = default_support_tol(w) if support_tol is None else support_tol
    if w.size and w[0] < -tol:
        raise NegativeEigenvalue(f"eigenvalue {w[0]:.3e} below -{tol:.3e}")
    on = w > tol
    fw = np.zeros_like(w)
    fw[on] = f(w[on])
    u = eig.eigenvectors
    return (u * fw) @ u.conj().T


def matrix_function(m, f: str | Callable = "log", support_tol: float | None = None,
                    power: float | None = None, backend: str | None = None) -> np.ndarray:
    """Apply a spectral function to a PSD matrix on its support.

    ``f`` is one of ``"log"``, ``"sqrt"``, ``"inv_sqrt"``, ``"power"`` (with
    ``power=``) or a callable.  Kernel eigenvalues (``<= support_tol``) map to
    zero, so ``log`` and ``inv_sqrt`` act as 0 on the kernel.
    """
    if f == "power":
        if power is None:
            raise ValueError("f='power' needs the power= argument")
        fn = lambda x: x ** power  # noqa: E731
    elif callable(f):
        fn = f
    else:
        try:
            fn = _FUNCTIONS[f]
        except KeyError:
            raise ValueError(f"unknown matrix function {f!r}") from None
    return spectral_apply(hermitian_eig(m, backend), fn, support_tol)


def support_projector(m, support_tol: float | None = None) -> np.ndarray:
    return matrix_function(m, lambda x: np.ones_like(x), support_tol)


def distance(a, b, norm: str = "frobenius") -> float:
    """Distance ``||A - B||`` in the Frobenius, operator or trace norm."""
    a = np.asarray(a, dtype=np.complex128)
    b = np.asarray(b, dtype=np.complex128)
    if b.ndim == 0:
        b = np.broadcast_to(b, a.shape)
    if a.shape != b.shape:
        raise DimensionMismatch(f"{a.shape} vs {b.shape}")
    d = a - b
    if norm == "frobenius":
        return float(np.linalg.norm(d))
    if norm == "operator":
        return float(np.linalg.norm(d, 2)) if d.size else 0.0
    if norm == "trace":
        return float(np.sum(np.linalg.svd(d, compute_uv=False))) if d.size else 0.0
    raise ValueError(f"unknown norm {norm!r}")
