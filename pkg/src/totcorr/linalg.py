"""Dense complex linear algebra used by every other module.

Matrices are plain ``numpy.ndarray`` objects of dtype ``complex128``. All
functions are pure and never modify their inputs.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import reduce
from typing import Callable, Sequence

import numpy as np

from .errors import DimensionMismatch, DomainError, EmptyKeepSet, InvalidOrder, NotHermitian

HERMITIAN_TOL = 1e-10
SUPPORT_CUTOFF = 1e-12


def as_matrix(m) -> np.ndarray:
    """Return ``m`` as a square complex128 array, raising on any other shape."""
    a = np.asarray(m, dtype=np.complex128)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionMismatch(f"expected a square matrix, got shape {a.shape}")
    return a


def dagger(m: np.ndarray) -> np.ndarray:
    return np.conj(np.swapaxes(m, -1, -2))


def hermiticity_error(m: np.ndarray) -> float:
    return float(np.max(np.abs(m - dagger(m)))) if m.size else 0.0


def check_hermitian(m, tol: float = HERMITIAN_TOL) -> np.ndarray:
    a = as_matrix(m)
    err = hermiticity_error(a)
    if err > tol:
        raise NotHermitian(f"matrix is not Hermitian (max asymmetry {err:.3e} > {tol:.0e})")
    return a


@dataclass(frozen=True)
class SpectralDecomposition:
    """Ascending eigenvalues and the unitary whose columns are eigenvectors."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def reconstruct(self) -> np.ndarray:
        v = self.eigenvectors
        return (v * self.eigenvalues) @ dagger(v)


def hermitian_eig(m) -> SpectralDecomposition:
    """Eigendecomposition of a Hermitian matrix.

    Raises:
        DimensionMismatch: ``m`` is not square.
        NotHermitian: ``m`` deviates from its adjoint by more than 1e-10.
    """
    a = check_hermitian(m)
    # eigh reads one triangle only; symmetrise so both triangles count
    w, v = np.linalg.eigh(0.5 * (a + dagger(a)))
    return SpectralDecomposition(w, v)


def matrix_function(
    m,
    f: Callable[[np.ndarray], np.ndarray],
    support_cutoff: float = SUPPORT_CUTOFF,
    zero_value: float = 0.0,
) -> np.ndarray:
    """Apply a real scalar function to a Hermitian matrix through its spectrum.

    Eigenvalues with ``|lambda| <= support_cutoff`` are not passed to ``f``;
    they are mapped to ``zero_value`` instead. This realises conventions such
    as ``0 log 0 = 0`` or pseudo-inverse powers on the support.

    Raises:
        DomainError: ``f`` returns a non-finite value on an eigenvalue above
            the cutoff (e.g. the log of a negative eigenvalue).
    """
    dec = hermitian_eig(m)
    lam = dec.eigenvalues
    on_support = np.abs(lam) > support_cutoff
    out = np.full(lam.shape, float(zero_value))
    with np.errstate(all="ignore"):
        vals = np.asarray(f(lam[on_support]), dtype=float)
    if not np.all(np.isfinite(vals)):
        bad = lam[on_support][~np.isfinite(vals)]
        raise DomainError(f"function undefined on eigenvalue(s) {bad.tolist()}")
    out[on_support] = vals
    v = dec.eigenvectors
    return (v * out) @ dagger(v)


def kron(*mats) -> np.ndarray:
    """Kronecker product of one or more matrices, left to right."""
    if not mats:
        raise DimensionMismatch("kron needs at least one matrix")
    return reduce(np.kron, (np.asarray(m, dtype=np.complex128) for m in mats))


def partial_trace(m, dims: Sequence[int], keep: Sequence[int]) -> np.ndarray:
    """Trace out every site not listed in ``keep``.

    Sites are 0-based. The result lists kept sites in their original order,
    whatever order ``keep`` was given in.
    """
    a = as_matrix(m)
    dims = [int(d) for d in dims]
    n = len(dims)
    if int(np.prod(dims)) != a.shape[0]:
        raise DimensionMismatch(f"dims {dims} do not multiply to matrix size {a.shape[0]}")
    keep = sorted(set(int(k) for k in keep))
    if not keep:
        raise EmptyKeepSet("keep must name at least one site")
    if keep[0] < 0 or keep[-1] >= n:
        raise DimensionMismatch(f"keep {keep} out of range for {n} sites")
    traced = [i for i in range(n) if i not in keep]
    t = a.reshape(dims + dims)
    # trace highest sites first so the remaining axis numbers stay valid
    for k, i in enumerate(sorted(traced, reverse=True)):
        cur_n = n - k
        t = np.trace(t, axis1=i, axis2=i + cur_n)
    d_keep = int(np.prod([dims[i] for i in keep]))
    return t.reshape(d_keep, d_keep)


def schatten_norm(m, p: float) -> float:
    """Schatten p-norm: the l_p norm of the singular values (p may be inf)."""
    if not p >= 1:
        raise InvalidOrder(f"Schatten order must be >= 1, got {p}")
    a = as_matrix(m)
    if hermiticity_error(a) <= HERMITIAN_TOL:
        s = np.abs(np.linalg.eigvalsh(0.5 * (a + dagger(a))))
    else:
        s = np.linalg.svd(a, compute_uv=False)
    if np.isinf(p):
        return float(s.max(initial=0.0))
    smax = s.max(initial=0.0)
    if smax == 0.0:
        return 0.0
    # scale first so large p does not overflow
    return float(smax * np.sum((s / smax) ** p) ** (1.0 / p))
