"""Multipartite density matrices, the factorizing map and reference states."""

from __future__ import annotations

import json
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path
from typing import Sequence

import numpy as np

from . import linalg
from .errors import (
    DimensionMismatch,
    EpsilonOutOfRange,
    IndexOutOfRange,
    NotPositive,
    ParamOutOfRange,
    RankOutOfRange,
    TotcorrError,
    TraceNotOne,
    UnknownName,
)
from .rng import RngState, as_rng

TRACE_TOL = 1e-10
NEGATIVE_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class MultipartiteState:
    """A validated density operator on ``H_1 (x) ... (x) H_N``.

    Build instances with :func:`new_state`; the constructor itself trusts its
    arguments. The matrix is stored read-only.
    """

    matrix: np.ndarray
    dims: tuple[int, ...]

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def n_sites(self) -> int:
        return len(self.dims)

    def marginal(self, i: int) -> "MultipartiteState":
        return marginal(self, i)

    @cached_property
    def marginals(self) -> tuple["MultipartiteState", ...]:
        return tuple(marginal(self, i) for i in range(self.n_sites))

    @cached_property
    def omega(self) -> "MultipartiteState":
        """Product of the marginals, with the original site ordering."""
        return factorize(self)

    @cached_property
    def spectrum(self) -> np.ndarray:
        return np.clip(np.linalg.eigvalsh(self.matrix), 0.0, None)

    def purity(self) -> float:
        return float(np.real(np.trace(self.matrix @ self.matrix)))

    def allclose(self, other: "MultipartiteState", atol: float = 1e-10) -> bool:
        return self.dims == other.dims and np.allclose(self.matrix, other.matrix, rtol=0, atol=atol)

    def to_dict(self) -> dict:
        m = self.matrix
        return {
            "dims": list(self.dims),
            "matrix_re": m.real.ravel().tolist(),
            "matrix_im": m.imag.ravel().tolist(),
        }


def _freeze(m: np.ndarray) -> np.ndarray:
    m = np.array(m, dtype=np.complex128, copy=True)
    m.setflags(write=False)
    return m


def _trusted(matrix: np.ndarray, dims: Sequence[int]) -> MultipartiteState:
    return MultipartiteState(_freeze(matrix), tuple(int(d) for d in dims))


def new_state(matrix, dims: Sequence[int]) -> MultipartiteState:
    """Validate ``matrix`` as a density operator on sites of size ``dims``.

    Eigenvalues within 1e-10 below zero are clipped and the trace is restored;
    anything more negative is rejected.

    Raises:
        DimensionMismatch, NotHermitian, NotPositive, TraceNotOne
    """
    m = linalg.check_hermitian(matrix)
    dims = tuple(int(d) for d in dims)
    if not dims or any(d < 1 for d in dims) or int(np.prod(dims)) != m.shape[0]:
        raise DimensionMismatch(f"dims {list(dims)} do not match matrix size {m.shape[0]}")
    tr = float(np.real(np.trace(m)))
    if abs(tr - 1.0) > TRACE_TOL:
        raise TraceNotOne(f"trace is {tr!r}, expected 1")
    dec = linalg.hermitian_eig(m)
    lam = dec.eigenvalues
    if lam[0] < -NEGATIVE_TOL:
        raise NotPositive(f"eigenvalue {lam[0]:.3e} is below -{NEGATIVE_TOL:.0e}")
    if lam[0] < 0:
        lam = np.clip(lam, 0.0, None)
        lam = lam / lam.sum()
        v = dec.eigenvectors
        m = (v * lam) @ linalg.dagger(v)
    else:
        m = 0.5 * (m + linalg.dagger(m))
    return _trusted(m, dims)


def marginal(rho: MultipartiteState, i: int) -> MultipartiteState:
    """Reduced state of site ``i`` (0-based)."""
    if not 0 <= i < rho.n_sites:
        raise IndexOutOfRange(f"site {i} out of range for {rho.n_sites} sites")
    if rho.n_sites == 1:
        return rho
    red = linalg.partial_trace(rho.matrix, rho.dims, [i])
    return _trusted(red, [rho.dims[i]])


def reduce_to(rho: MultipartiteState, keep: Sequence[int]) -> MultipartiteState:
    """Reduced state on several sites, kept in their original order."""
    keep = sorted(set(keep))
    if any(not 0 <= k < rho.n_sites for k in keep):
        raise IndexOutOfRange(f"sites {keep} out of range for {rho.n_sites} sites")
    red = linalg.partial_trace(rho.matrix, rho.dims, keep)
    return _trusted(red, [rho.dims[k] for k in keep])


def factorize(rho: MultipartiteState) -> MultipartiteState:
    return _trusted(linalg.kron(*(m.matrix for m in rho.marginals)), rho.dims)


def tensor(*states: MultipartiteState) -> MultipartiteState:
    """Tensor product; the site lists are concatenated."""
    dims = [d for s in states for d in s.dims]
    return _trusted(linalg.kron(*(s.matrix for s in states)), dims)


def interpolate_epsilon(rho: MultipartiteState, eps: float) -> MultipartiteState:
    """``(1 - eps) rho + eps Omega(rho)``; the marginals are unchanged."""
    if not 0.0 <= eps <= 1.0:
        raise EpsilonOutOfRange(f"epsilon must lie in [0, 1], got {eps}")
    m = (1.0 - eps) * rho.matrix + eps * rho.omega.matrix
    return _trusted(m, rho.dims)


def conjugate(rho: MultipartiteState, unitaries: Sequence[np.ndarray]) -> MultipartiteState:
    """Apply the local unitary ``U_1 (x) ... (x) U_N``."""
    u = linalg.kron(*unitaries)
    if u.shape[0] != rho.dim:
        raise DimensionMismatch("local unitaries do not match the state dimensions")
    return _trusted(u @ rho.matrix @ linalg.dagger(u), rho.dims)


def random_state(dims: Sequence[int], rank: int | None, rng) -> MultipartiteState:
    """Random state ``G G^dag / Tr(G G^dag)`` with ``G`` a D x rank Ginibre matrix.

    At full rank this samples the Hilbert-Schmidt measure; ``rank=1`` gives
    Haar-random pure states.
    """
    rng = as_rng(rng)
    dims = tuple(int(d) for d in dims)
    big_d = int(np.prod(dims))
    rank = big_d if rank is None else int(rank)
    if not 1 <= rank <= big_d:
        raise RankOutOfRange(f"rank must lie in [1, {big_d}], got {rank}")
    g = rng.complex_normal((big_d, rank))
    m = g @ linalg.dagger(g)
    m = m / np.real(np.trace(m))
    return _trusted(0.5 * (m + linalg.dagger(m)), dims)


def random_product_state(dims: Sequence[int], rng, rank: int | None = None) -> MultipartiteState:
    rng = as_rng(rng)
    parts = [random_state([d], None if rank is None else min(rank, d), rng) for d in dims]
    return tensor(*parts)


def random_classical_state(dims: Sequence[int], rng) -> MultipartiteState:
    """Diagonal state whose joint distribution is uniform on the probability simplex."""
    rng = as_rng(rng)
    dims = tuple(int(d) for d in dims)
    p = -np.log(rng.uniform(int(np.prod(dims))))
    return _trusted(np.diag(p / p.sum()).astype(np.complex128), dims)


def haar_unitary(d: int, rng) -> np.ndarray:
    """Haar-random unitary: QR of a Ginibre matrix with the R-diagonal phases removed."""
    rng = as_rng(rng)
    z = rng.complex_normal((d, d))
    q, r = np.linalg.qr(z)
    diag = np.diagonal(r)
    return q * (diag / np.abs(diag))


def random_local_unitary(dims: Sequence[int], rng) -> list[np.ndarray]:
    rng = as_rng(rng)
    return [haar_unitary(int(d), rng) for d in dims]


def _ket(*amps) -> np.ndarray:
    v = np.asarray(amps, dtype=np.complex128)
    return v / np.linalg.norm(v)


def _proj(v: np.ndarray) -> np.ndarray:
    return np.outer(v, v.conj())


CANONICAL_NAMES = (
    "bell_phi_plus",
    "bell_psi_minus",
    "werner",
    "classical_corr",
    "product",
    "maximally_mixed",
)


def canonical(name: str, params: Sequence = (), dims: Sequence[int] = (2, 2)) -> MultipartiteState:
    """Textbook reference states.

    ``werner`` takes one parameter ``p`` and returns
    ``p |psi-><psi-| + (1 - p) I/4``. ``product`` takes the marginals (as
    states or matrices) in ``params``. ``maximally_mixed`` honours ``dims``;
    all the other names are two-qubit states.
    """
    params = list(params)
    if name == "bell_phi_plus":
        return new_state(_proj(_ket(1, 0, 0, 1)), (2, 2))
    if name == "bell_psi_minus":
        return new_state(_proj(_ket(0, 1, -1, 0)), (2, 2))
    if name == "werner":
        if len(params) != 1:
            raise ParamOutOfRange("werner takes exactly one parameter p")
        p = float(params[0])
        if not 0.0 <= p <= 1.0:
            raise ParamOutOfRange(f"werner p must lie in [0, 1], got {p}")
        m = p * _proj(_ket(0, 1, -1, 0)) + (1 - p) * np.eye(4) / 4
        return new_state(m, (2, 2))
    if name == "classical_corr":
        return new_state(np.diag([0.5, 0, 0, 0.5]), (2, 2))
    if name == "product":
        if not params:
            raise ParamOutOfRange("product needs its marginals as parameters")
        parts = [p if isinstance(p, MultipartiteState) else new_state(p, [np.shape(p)[0]]) for p in params]
        return tensor(*parts)
    if name == "maximally_mixed":
        d = int(np.prod(dims))
        return new_state(np.eye(d) / d, dims)
    raise UnknownName(f"unknown canonical state {name!r}; known: {', '.join(CANONICAL_NAMES)}")


def state_from_dict(data: dict) -> MultipartiteState:
    try:
        dims = [int(d) for d in data["dims"]]
        re = np.asarray(data["matrix_re"], dtype=float)
        im = np.asarray(data.get("matrix_im", np.zeros_like(re)), dtype=float)
    except KeyError as exc:
        raise TotcorrError(f"state file is missing field {exc.args[0]!r}") from None
    except (TypeError, ValueError) as exc:
        raise TotcorrError(f"state file has a malformed field: {exc}") from None
    d = int(np.prod(dims))
    if re.size != d * d or im.size != d * d:
        raise DimensionMismatch(
            f"matrix_re/matrix_im must hold {d * d} row-major entries for dims {dims}, "
            f"got {re.size} and {im.size}"
        )
    return new_state((re + 1j * im).reshape(d, d), dims)


def load_state(path) -> MultipartiteState:
    """Read a state file ``{"dims": [...], "matrix_re": [...], "matrix_im": [...]}``."""
    text = Path(path).read_text()
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise TotcorrError(f"{path}: invalid JSON at line {exc.lineno} column {exc.colno}: {exc.msg}") from None
    if not isinstance(data, dict):
        raise TotcorrError(f"{path}: expected a JSON object at the top level")
    return state_from_dict(data)


def save_state(rho: MultipartiteState, path) -> None:
    Path(path).write_text(json.dumps(rho.to_dict(), indent=1) + "\n")
