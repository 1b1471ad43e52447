"""Measures built from local measurements: Pearson-type PCC and measured KL.

Both maximise over local bases. For qubit sites the objectives are evaluated
from the Pauli expansion of the state,

    T[mu_1, ..., mu_N] = Tr(sigma_mu_1 (x) ... (x) sigma_mu_N rho),  mu in {0, x, y, z},

which turns each trial basis into a handful of real contractions. The direct
matrix forms (:func:`pcc_covariance`, :func:`measured_kl_for_bases`) are kept
as independent evaluators.
"""

from __future__ import annotations

import string
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .. import linalg
from ..channels import PAULI_X, PAULI_Y, PAULI_Z
from ..errors import DimensionMismatch, UnsupportedDimension
from ..optimize import (
    HADAMARD_ANGLES,
    BatchResult,
    OptimizerConfig,
    euler_from_rotation,
    maximize_batch,
    so3_batch,
    su2_batch,
)
from ..states import MultipartiteState, reduce_to
from .entropic import MeasureResult

PAULIS = np.stack([np.eye(2, dtype=np.complex128), PAULI_X, PAULI_Y, PAULI_Z])
VARIANCE_FLOOR = 1e-9  # on the standard deviation
PROB_FLOOR = 1e-15
COVARIANCE_FORMS_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class ObservableSet:
    """One Hermitian observable per site, ``W_1, ..., W_N``."""

    observables: tuple[np.ndarray, ...]

    def __post_init__(self):
        for w in self.observables:
            linalg.check_hermitian(w)

    @classmethod
    def of(cls, *obs) -> "ObservableSet":
        return cls(tuple(np.asarray(w, dtype=np.complex128) for w in obs))


def mub_sets(unitaries: Sequence[np.ndarray]) -> list[ObservableSet]:
    """The three sets ``W^k = (U_1 s_k U_1^dag, ..., U_N s_k U_N^dag)``, ``s_k`` = X, Y, Z."""
    from ..optimize import mub_triple

    triples = [mub_triple(u) for u in unitaries]
    return [ObservableSet(tuple(t[k] for t in triples)) for k in range(3)]


def _check_obs(rho: MultipartiteState, w: ObservableSet):
    if len(w.observables) != rho.n_sites or any(
        o.shape != (d, d) for o, d in zip(w.observables, rho.dims)
    ):
        raise DimensionMismatch("observables do not match the site dimensions")


def _expect(op: np.ndarray, m: np.ndarray) -> float:
    return float(np.real(np.trace(op @ m)))


def pcc_covariance(rho: MultipartiteState, w: ObservableSet) -> float:
    """``Tr[(W_1 (x) ... (x) W_N)(rho - Omega_rho)]``.

    Also evaluates ``<W_1 ... W_N>_rho - prod_i <W_i>_{rho_i}`` and raises if the
    two forms disagree beyond 1e-10.
    """
    _check_obs(rho, w)
    big = linalg.kron(*w.observables)
    direct = _expect(big, rho.matrix - rho.omega.matrix)
    split = _expect(big, rho.matrix) - float(
        np.prod([_expect(o, m.matrix) for o, m in zip(w.observables, rho.marginals)])
    )
    if abs(direct - split) > COVARIANCE_FORMS_TOL:
        raise ArithmeticError(f"covariance forms disagree by {abs(direct - split):.3e}")
    return direct


def _std(o: np.ndarray, m: np.ndarray) -> float:
    mean = _expect(o, m)
    return float(np.sqrt(max(_expect(o @ o, m) - mean**2, 0.0)))


def pcc_coefficient(rho: MultipartiteState, w: ObservableSet) -> float:
    """Covariance over the product of marginal uncertainties.

    A marginal uncertainty at or below 1e-9 means that site is in an
    eigenstate of its observable; the coefficient is then 0 by convention.
    """
    cov = pcc_covariance(rho, w)
    stds = [_std(o, m.matrix) for o, m in zip(w.observables, rho.marginals)]
    if min(stds) <= VARIANCE_FLOOR:
        return 0.0
    return cov / float(np.prod(stds))


def pcc_sum(rho: MultipartiteState, unitaries: Sequence[np.ndarray]) -> float:
    """``sum_k |R^{W^k}(rho)|`` for the MUB sets generated by local unitaries."""
    return float(sum(abs(pcc_coefficient(rho, w)) for w in mub_sets(unitaries)))


# ---------------------------------------------------------------- Pauli tensor


def pauli_tensor(rho: MultipartiteState) -> np.ndarray:
    """Real tensor ``T[mu_1..mu_N]`` of shape ``(4,)*N`` (requires qubit sites)."""
    n = rho.n_sites
    if any(d != 2 for d in rho.dims):
        raise UnsupportedDimension("Pauli expansion needs qubit sites")
    letters = string.ascii_letters
    rows, cols, outs = letters[:n], letters[n:2 * n], letters[2 * n:3 * n]
    # Tr(P rho) = sum P[c, r] rho[r, c]
    spec = ",".join(f"{outs[i]}{cols[i]}{rows[i]}" for i in range(n)) + f",{rows}{cols}->{outs}"
    t = np.einsum(spec, *([PAULIS] * n), rho.matrix.reshape((2,) * (2 * n)))
    return np.real(t)


@dataclass
class _QubitData:
    full: np.ndarray  # (P, 4, ..., 4)
    corr: np.ndarray  # (P, 3, ..., 3)
    bloch: np.ndarray  # (P, N, 3)


def _qubit_data(states: Sequence[MultipartiteState]) -> _QubitData:
    n = states[0].n_sites
    full = np.stack([pauli_tensor(s) for s in states])
    corr = full[(slice(None),) + (slice(1, None),) * n]
    bloch = np.empty((len(states), n, 3))
    for i in range(n):
        idx = [slice(None)] + [0] * n
        idx[i + 1] = slice(1, None)
        bloch[:, i] = full[tuple(idx)]
    return _QubitData(full, corr, bloch)


def pcc_objective(data: _QubitData, x: np.ndarray, problem: np.ndarray) -> np.ndarray:
    """Batched ``sum_k |R^{W^k}|`` for Euler angles ``x`` of shape ``(m, 3N)``."""
    m = len(x)
    n = data.bloch.shape[1]
    rot = so3_batch(x.reshape(m, n, 3))  # (m, N, 3, 3); column k is the axis of W^k
    # joint[m, k] = sum_j corr[j1..jN] prod_i rot[i, j_i, k]
    if n == 2:
        joint = np.sum(rot[:, 0] * (data.corr[problem] @ rot[:, 1]), axis=1)
    else:
        joint = np.einsum("mj...,mjk->mk...", data.corr[problem], rot[:, 0])
        for i in range(1, n):
            joint = np.einsum("mkj...,mjk->mk...", joint, rot[:, i])
    means = (data.bloch[problem][:, :, None, :] @ rot)[:, :, 0, :]  # (m, N, 3)
    cov = joint - np.prod(means, axis=1)
    std = np.sqrt(np.clip(1.0 - means * means, 0.0, None))
    ok = np.all(std > VARIANCE_FLOOR, axis=1)
    denom = np.where(ok, np.prod(std, axis=1), 1.0)
    return np.sum(np.where(ok, np.abs(cov) / denom, 0.0), axis=1)


def _top_partner_svd(corr2: dict, n: int, i: int):
    """Left singular frame of the strongest pairwise correlation matrix touching site ``i``."""
    best, frame = -1.0, np.eye(3)
    for j in range(n):
        if j == i:
            continue
        c = corr2[(i, j)]
        u, s, _ = np.linalg.svd(c)
        if s[0] > best:
            best, frame = s[0], u
    if np.linalg.det(frame) < 0:
        frame = frame.copy()
        frame[:, 2] *= -1
    return frame


def _pair_correlations(rho: MultipartiteState, bloch: np.ndarray) -> dict:
    out = {}
    n = rho.n_sites
    for i in range(n):
        for j in range(n):
            if i < j:
                t = pauli_tensor(reduce_to(rho, [i, j]))[1:, 1:]
                c = t - np.outer(bloch[i], bloch[j])
                out[(i, j)], out[(j, i)] = c, c.T
    return out


def _pcc_starts(rho: MultipartiteState, bloch: np.ndarray) -> list[np.ndarray]:
    n = rho.n_sites
    starts = [np.tile(HADAMARD_ANGLES, n)]
    if n >= 2:
        corr2 = _pair_correlations(rho, bloch)
        if n == 2:
            u, _, vt = np.linalg.svd(corr2[(0, 1)])
            frames = [u, vt.T]
            for f in frames:
                if np.linalg.det(f) < 0:
                    f[:, 2] *= -1
        else:
            frames = [_top_partner_svd(corr2, n, i) for i in range(n)]
        starts.append(np.concatenate([euler_from_rotation(f) for f in frames]))
    return starts


def _require_qubits(states: Sequence[MultipartiteState], what: str):
    for s in states:
        if any(d != 2 for d in s.dims):
            raise UnsupportedDimension(f"{what} is implemented for qubit sites only, got dims {list(s.dims)}")
    if len({s.n_sites for s in states}) > 1:
        raise DimensionMismatch(f"{what} batch mixes different numbers of sites")


def _results(res: BatchResult, extra: dict | None = None) -> list[MeasureResult]:
    out = []
    for i, v in enumerate(res.values):
        diag = res.diagnostics(i)
        diag["best_params"] = res.params[i].tolist()
        if extra:
            diag.update(extra)
        out.append(MeasureResult(float(v), diagnostics=diag))
    return out


def pcc_measure_batch(
    states: Sequence[MultipartiteState], opt: OptimizerConfig | None = None, keys: Sequence[int] | None = None
) -> list[MeasureResult]:
    """PCC measure for many states at once; ``keys`` select optimizer substreams."""
    if not states:
        return []
    opt = opt or OptimizerConfig()
    _require_qubits(states, "PCC")
    data = _qubit_data(states)
    n = states[0].n_sites
    starts = [_pcc_starts(s, data.bloch[i]) for i, s in enumerate(states)]
    res = maximize_batch(lambda x, p: pcc_objective(data, x, p), 3 * n, opt, len(states), keys, starts)
    return _results(res)


def pcc_measure(rho: MultipartiteState, opt: OptimizerConfig | None = None, key: int = 0) -> MeasureResult:
    """``max over local frames of sum_k |R^{W^k}(rho)|`` with Pauli-aligned MUB triples."""
    return pcc_measure_batch([rho], opt, [key])[0]


# ------------------------------------------------------------------ measured KL


def _kl_terms(p: np.ndarray, q: np.ndarray) -> np.ndarray:
    p = np.clip(p, 0.0, None)
    safe = p > PROB_FLOOR
    ratio = np.where(safe, p / np.where(q > 0, q, 1.0), 1.0)
    return np.where(safe & (q > 0), p * np.log2(np.where(ratio > 0, ratio, 1.0)), 0.0)


def _bloch_dirs(angles: np.ndarray) -> np.ndarray:
    """Measurement axes from ``(theta, phi)`` pairs, last axis length 2."""
    t, p = angles[..., 0], angles[..., 1]
    return np.stack([np.sin(t) * np.cos(p), np.sin(t) * np.sin(p), np.cos(t)], axis=-1)


def kl_objective(data: _QubitData, x: np.ndarray, problem: np.ndarray) -> np.ndarray:
    """Batched classical KL for projective qubit bases given by ``(theta, phi)`` per site."""
    m = len(x)
    n = data.bloch.shape[1]
    dirs = _bloch_dirs(x.reshape(m, n, 2))  # (m, N, 3)
    signs = np.array([1.0, -1.0])
    joint = data.full[problem]
    marg = []
    for i in range(n):
        u = np.empty((m, 2, 4))
        u[:, :, 0] = 1.0
        u[:, :, 1:] = signs[None, :, None] * dirs[:, i][:, None, :]
        joint = np.einsum("mj...,mzj->m...z", joint, u)
        proj = np.einsum("mj,mj->m", data.bloch[problem, i], dirs[:, i])
        marg.append(0.5 * (1.0 + signs[None, :] * proj[:, None]))  # (m, 2)
    p = joint / 2**n
    q = marg[0]
    for mi in marg[1:]:
        q = np.einsum("m...,mz->m...z", q, mi)
    return _kl_terms(p, q).reshape(m, -1).sum(axis=1)


def _kl_starts(rho: MultipartiteState, bloch: np.ndarray) -> list[np.ndarray]:
    n = rho.n_sites
    starts = [np.tile([np.pi / 2, 0.0], n)]
    if n >= 2:
        corr2 = _pair_correlations(rho, bloch)
        frames = [_top_partner_svd(corr2, n, i) for i in range(n)]
        starts.append(np.concatenate([_direction_angles(f[:, 0]) for f in frames]))
    starts.append(np.concatenate([_direction_angles(b) for b in bloch]))
    return starts


def _direction_angles(v: np.ndarray) -> np.ndarray:
    r = np.linalg.norm(v)
    if r < 1e-12:
        return np.zeros(2)
    return np.array([np.arccos(np.clip(v[2] / r, -1, 1)), np.arctan2(v[1], v[0])])


# general-dimension route: each site basis is the column set of a unitary


def _generator_unitaries(params: np.ndarray, d: int) -> np.ndarray:
    """``exp(i H)`` for Hermitian ``H`` built from ``d*d`` real parameters, batched."""
    m = len(params)
    h = np.zeros((m, d, d), dtype=np.complex128)
    iu = np.triu_indices(d, 1)
    k = len(iu[0])
    h[:, np.arange(d), np.arange(d)] = params[:, :d]
    h[:, iu[0], iu[1]] = params[:, d:d + k] + 1j * params[:, d + k:d + 2 * k]
    h = h + np.conj(np.swapaxes(np.triu(h, 1), -1, -2))
    w, v = np.linalg.eigh(h)
    return (v * np.exp(1j * w)[:, None, :]) @ np.conj(np.swapaxes(v, -1, -2))


def _site_param_count(d: int) -> int:
    return 2 if d == 2 else d * d


def site_unitaries(params: np.ndarray, dims: Sequence[int]) -> list[np.ndarray]:
    """Per-site basis unitaries from a batch of KL parameter vectors ``(m, P)``."""
    out, off = [], 0
    for d in dims:
        k = _site_param_count(d)
        chunk = params[:, off:off + k]
        if d == 2:
            angles = np.concatenate([chunk, np.zeros((len(chunk), 1))], axis=1)
            out.append(su2_batch(angles))
        else:
            out.append(_generator_unitaries(chunk, d))
        off += k
    return out


def measured_kl_for_bases(rho: MultipartiteState, unitaries: Sequence[np.ndarray]) -> float:
    """Classical KL between outcome statistics of ``rho`` and ``Omega_rho`` in the bases
    given by the columns of the local unitaries."""
    big = linalg.kron(*unitaries)
    p = np.real(np.diagonal(linalg.dagger(big) @ rho.matrix @ big))
    q = np.real(np.diagonal(linalg.dagger(big) @ rho.omega.matrix @ big))
    return float(_kl_terms(p, q).sum())


def _kl_matrix_objective(rhos: np.ndarray, omegas: np.ndarray, dims, x, problem):
    us = site_unitaries(x, dims)
    big = us[0]
    for u in us[1:]:
        big = np.einsum("mab,mcd->macbd", big, u).reshape(len(x), big.shape[1] * u.shape[1], -1)
    bd = np.conj(np.swapaxes(big, -1, -2))
    p = np.real(np.einsum("mii->mi", bd @ rhos[problem] @ big))
    q = np.real(np.einsum("mii->mi", bd @ omegas[problem] @ big))
    return _kl_terms(p, q).sum(axis=1)


def measured_kl_batch(
    states: Sequence[MultipartiteState], opt: OptimizerConfig | None = None, keys: Sequence[int] | None = None
) -> list[MeasureResult]:
    if not states:
        return []
    opt = opt or OptimizerConfig()
    dims = states[0].dims
    if any(s.dims != dims for s in states):
        raise DimensionMismatch("measured KL batch mixes different dimensions")
    if all(d == 2 for d in dims):
        data = _qubit_data(states)
        starts = [_kl_starts(s, data.bloch[i]) for i, s in enumerate(states)]
        res = maximize_batch(lambda x, p: kl_objective(data, x, p), 2 * len(dims), opt, len(states), keys, starts)
        return _results(res, {"route": "pauli"})
    rhos = np.stack([s.matrix for s in states])
    omegas = np.stack([s.omega.matrix for s in states])
    dim = sum(_site_param_count(d) for d in dims)
    res = maximize_batch(lambda x, p: _kl_matrix_objective(rhos, omegas, dims, x, p), dim, opt, len(states), keys)
    return _results(res, {"route": "matrix"})


def measured_kl(rho: MultipartiteState, opt: OptimizerConfig | None = None, key: int = 0) -> MeasureResult:
    """Maximum over local projective bases of the classical KL divergence (bits)
    between the joint outcome distribution and the product of its marginals."""
    return measured_kl_batch([rho], opt, [key])[0]
