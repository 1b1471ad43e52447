"""Local CPTP maps in Kraus form."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import linalg
from .errors import DimensionMismatch, IndexOutOfRange, NotTracePreserving, ParamOutOfRange, UnknownKind
from .rng import as_rng
from .states import MultipartiteState, _trusted, haar_unitary

COMPLETENESS_TOL = 1e-9

PAULI_X = np.array([[0, 1], [1, 0]], dtype=np.complex128)
PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=np.complex128)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=np.complex128)


@dataclass(frozen=True, eq=False)
class KrausChannel:
    """A trace-preserving map acting on one site of a multipartite state."""

    kraus_ops: tuple[np.ndarray, ...]
    site: int

    @property
    def d_in(self) -> int:
        return self.kraus_ops[0].shape[1]

    @property
    def d_out(self) -> int:
        return self.kraus_ops[0].shape[0]

    def completeness_residual(self) -> float:
        s = sum(linalg.dagger(k) @ k for k in self.kraus_ops)
        return float(np.max(np.abs(s - np.eye(self.d_in))))

    def is_unital(self, tol: float = COMPLETENESS_TOL) -> bool:
        if self.d_in != self.d_out:
            return False
        s = sum(k @ linalg.dagger(k) for k in self.kraus_ops)
        return float(np.linalg.norm(s - np.eye(self.d_out), 2)) <= tol

    def to_dict(self) -> dict:
        return {
            "site": self.site,
            "kraus_re": [k.real.tolist() for k in self.kraus_ops],
            "kraus_im": [k.imag.tolist() for k in self.kraus_ops],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "KrausChannel":
        ops = [np.asarray(re) + 1j * np.asarray(im) for re, im in zip(data["kraus_re"], data["kraus_im"])]
        return new_channel(ops, data["site"])


def new_channel(ops: Sequence, site: int) -> KrausChannel:
    """Validate a Kraus set.

    Raises:
        DimensionMismatch: empty list or operators of different shapes.
        NotTracePreserving: ``sum K^dag K`` differs from the identity by more
            than 1e-9 in some entry.
    """
    mats = [np.array(k, dtype=np.complex128) for k in ops]
    if not mats:
        raise DimensionMismatch("a channel needs at least one Kraus operator")
    shape = mats[0].shape
    if len(shape) != 2 or any(k.shape != shape for k in mats):
        raise DimensionMismatch("Kraus operators must be matrices of one common shape")
    for k in mats:
        k.setflags(write=False)
    ch = KrausChannel(tuple(mats), int(site))
    res = ch.completeness_residual()
    if res > COMPLETENESS_TOL:
        raise NotTracePreserving(f"sum of K^dag K deviates from identity by {res:.3e}")
    return ch


def _embed(op: np.ndarray, dims: Sequence[int], site: int) -> np.ndarray:
    left = int(np.prod(dims[:site]))
    right = int(np.prod(dims[site + 1:]))
    return linalg.kron(np.eye(left), op, np.eye(right))


def apply(ch: KrausChannel, rho: MultipartiteState) -> MultipartiteState:
    """``sum_k (I (x) K_k (x) I) rho (I (x) K_k (x) I)^dag``."""
    if not 0 <= ch.site < rho.n_sites:
        raise IndexOutOfRange(f"channel site {ch.site} out of range for {rho.n_sites} sites")
    if rho.dims[ch.site] != ch.d_in:
        raise DimensionMismatch(f"channel acts on dimension {ch.d_in}, site has {rho.dims[ch.site]}")
    out = np.zeros((0, 0))
    for k in ch.kraus_ops:
        big = _embed(k, rho.dims, ch.site)
        term = big @ rho.matrix @ linalg.dagger(big)
        out = term if out.size == 0 else out + term
    dims = list(rho.dims)
    dims[ch.site] = ch.d_out
    return _trusted(0.5 * (out + linalg.dagger(out)), dims)


def apply_all(channels: Sequence[KrausChannel], rho: MultipartiteState) -> MultipartiteState:
    """Compose single-site channels, first to last."""
    for ch in channels:
        rho = apply(ch, rho)
    return rho


CHANNEL_KINDS = ("depolarizing", "phase_damping", "amplitude_damping", "unitary")


def named_channel(kind: str, param, site: int) -> KrausChannel:
    """Standard qubit channels.

    ``depolarizing(p)`` maps rho to ``(1 - p) rho + p I/2``;
    ``phase_damping(g)`` shrinks coherences by ``sqrt(1 - g)``;
    ``amplitude_damping(g)`` decays |1> to |0> with probability ``g`` and is
    non-unital for ``g > 0``; ``unitary(U)`` takes the matrix itself.
    """
    if kind == "unitary":
        u = np.asarray(param, dtype=np.complex128)
        return new_channel([u], site)
    if kind not in CHANNEL_KINDS:
        raise UnknownKind(f"unknown channel kind {kind!r}; known: {', '.join(CHANNEL_KINDS)}")
    p = float(param)
    if not 0.0 <= p <= 1.0:
        raise ParamOutOfRange(f"{kind} parameter must lie in [0, 1], got {p}")
    if kind == "depolarizing":
        ops = [np.sqrt(1 - 3 * p / 4) * np.eye(2)] + [np.sqrt(p / 4) * s for s in (PAULI_X, PAULI_Y, PAULI_Z)]
    elif kind == "phase_damping":
        ops = [np.diag([1.0, np.sqrt(1 - p)]), np.diag([0.0, np.sqrt(p)])]
    else:
        ops = [np.array([[1.0, 0.0], [0.0, np.sqrt(1 - p)]]), np.array([[0.0, np.sqrt(p)], [0.0, 0.0]])]
    return new_channel(ops, site)


def parse_channel(text: str, site: int) -> KrausChannel:
    """``"kind:param"`` as accepted on the command line, e.g. ``amplitude_damping:0.3``."""
    kind, _, param = text.partition(":")
    if kind == "unitary":
        raise UnknownKind("unitary channels cannot be given as text")
    return named_channel(kind, float(param or 0.0), site)


def random_channel(d: int, env: int | None, site: int, rng) -> KrausChannel:
    """Stinespring sample: ``K_k = (<k|_env (x) I) V`` with V a Haar isometry C^d -> C^env (x) C^d.

    ``env`` defaults to ``d**2``, enough to reach every channel on C^d.
    """
    rng = as_rng(rng)
    env = d * d if env is None else int(env)
    if env < 1:
        raise ParamOutOfRange("environment dimension must be at least 1")
    v = haar_unitary(d * env, rng)[:, :d]
    return new_channel([v[k * d:(k + 1) * d] for k in range(env)], site)


def random_unital_channel(d: int, n_terms: int, site: int, rng) -> KrausChannel:
    """Random mixture of unitaries, which is always unital."""
    rng = as_rng(rng)
    w = rng.uniform(n_terms) + 1e-3
    w = w / w.sum()
    return new_channel([np.sqrt(wk) * haar_unitary(d, rng) for wk in w], site)


def random_merging_channel(d: int, site: int, rng) -> KrausChannel:
    """Mixture ``(1-w) id + w M_f`` where ``M_f`` sends ``|k><k|`` to ``|f(k)><f(k)|``.

    ``f`` is a uniformly random map on levels and ``w`` uniform in [0, 1).
    Unless ``f`` is a permutation the channel is not unital.
    """
    rng = as_rng(rng)
    f = np.minimum((rng.uniform(d) * d).astype(int), d - 1)
    w = float(rng.uniform(1)[0])
    eye = np.eye(d, dtype=np.complex128)
    ops = [np.sqrt(1 - w) * eye] + [np.sqrt(w) * np.outer(eye[f[k]], eye[k]) for k in range(d)]
    return new_channel(ops, site)
