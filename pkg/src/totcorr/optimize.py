"""Multi-start Nelder-Mead over local-unitary angles.

The engine is batched: many independent simplices (one per problem and
restart) advance in lock step, and the objective is called on a block of
rows at a time. Every row follows exactly the trajectory it would follow
alone, provided the objective treats rows independently, so results do not
depend on how problems are grouped.

Objectives passed to :func:`maximize_batch` have the signature
``fun(x, problem) -> values`` with ``x`` of shape ``(m, dim)`` and
``problem`` an integer array of length ``m`` saying which problem each row
belongs to. They must be pure.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Callable, Sequence

import numpy as np

from .errors import ConfigError, NotUnitary
from .rng import RngState

TWO_PI = 2.0 * np.pi
SIMPLEX_STEP = 0.5
HADAMARD_ANGLES = (np.pi / 2, 0.0, np.pi)


@dataclass(frozen=True)
class OptimizerConfig:
    restarts: int = 24
    max_iters: int = 400
    tol: float = 1e-7
    seed: int = 0

    def __post_init__(self):
        if self.restarts < 1:
            raise ConfigError("restarts must be at least 1")
        if self.max_iters < 1:
            raise ConfigError("max_iters must be at least 1")
        if not self.tol > 0:
            raise ConfigError("tolerance must be positive")

    def with_(self, **changes) -> "OptimizerConfig":
        return replace(self, **changes)


def su2_from_angles(theta: float, phi: float, lam: float) -> np.ndarray:
    """``Rz(phi) Ry(theta) Rz(lam)`` with ``Rz(a) = exp(-i a Z/2)``, ``Ry(t) = exp(-i t Y/2)``."""
    return su2_batch(np.array([theta, phi, lam], dtype=float))


def su2_batch(angles: np.ndarray) -> np.ndarray:
    """Vectorised :func:`su2_from_angles` over a trailing axis of length 3."""
    angles = np.asarray(angles, dtype=float)
    t, p, l = angles[..., 0], angles[..., 1], angles[..., 2]
    c, s = np.cos(t / 2), np.sin(t / 2)
    ep, el = np.exp(-0.5j * p), np.exp(-0.5j * l)
    u = np.empty(angles.shape[:-1] + (2, 2), dtype=np.complex128)
    u[..., 0, 0] = ep * el * c
    u[..., 0, 1] = -ep * np.conj(el) * s
    u[..., 1, 0] = np.conj(ep) * el * s
    u[..., 1, 1] = np.conj(ep) * np.conj(el) * c
    return u


def so3_batch(angles: np.ndarray) -> np.ndarray:
    """Adjoint rotation of :func:`su2_batch`: ``U sigma_k U^dag = sum_j R[j, k] sigma_j``."""
    angles = np.asarray(angles, dtype=float)
    cos, sin = np.cos(angles), np.sin(angles)
    ct, cp, cl = cos[..., 0], cos[..., 1], cos[..., 2]
    st, sp, sl = sin[..., 0], sin[..., 1], sin[..., 2]
    ctcl, ctsl = ct * cl, ct * sl
    r = np.empty(angles.shape[:-1] + (3, 3))
    r[..., 0, 0] = cp * ctcl - sp * sl
    r[..., 0, 1] = -cp * ctsl - sp * cl
    r[..., 0, 2] = cp * st
    r[..., 1, 0] = sp * ctcl + cp * sl
    r[..., 1, 1] = -sp * ctsl + cp * cl
    r[..., 1, 2] = sp * st
    r[..., 2, 0] = -st * cl
    r[..., 2, 1] = st * sl
    r[..., 2, 2] = ct
    return r


def euler_from_rotation(r: np.ndarray) -> np.ndarray:
    """Angles ``(theta, phi, lam)`` with ``so3_batch(angles) == r`` for a proper rotation."""
    theta = float(np.arccos(np.clip(r[2, 2], -1.0, 1.0)))
    if abs(np.sin(theta)) < 1e-12:
        # gimbal lock: only phi + lam (or phi - lam) is defined
        phi = float(np.arctan2(r[1, 0], r[0, 0] * np.sign(r[2, 2] or 1.0)))
        return np.array([theta, phi, 0.0])
    phi = float(np.arctan2(r[1, 2], r[0, 2]))
    lam = float(np.arctan2(r[2, 1], -r[2, 0]))
    return np.array([theta, phi, lam])


def mub_triple(u) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """The complementary observables ``(U X U^dag, U Y U^dag, U Z U^dag)`` on one qubit."""
    from .channels import PAULI_X, PAULI_Y, PAULI_Z

    u = np.asarray(u, dtype=np.complex128)
    if u.shape != (2, 2) or np.max(np.abs(u.conj().T @ u - np.eye(2))) > 1e-10:
        raise NotUnitary("mub_triple needs a 2x2 unitary")
    ud = u.conj().T
    return tuple(u @ s @ ud for s in (PAULI_X, PAULI_Y, PAULI_Z))


@dataclass
class BatchResult:
    values: np.ndarray
    params: np.ndarray
    iterations: np.ndarray
    evaluations: np.ndarray
    best_restart: np.ndarray

    def diagnostics(self, i: int) -> dict:
        return {
            "optimizer_iterations": int(self.iterations[i]),
            "optimizer_evaluations": int(self.evaluations[i]),
            "best_restart": int(self.best_restart[i]),
        }


def nelder_mead_batch(
    fun: Callable[[np.ndarray, np.ndarray], np.ndarray],
    simplices: np.ndarray,
    rows: np.ndarray,
    tol: float,
    max_iters: int,
):
    """Minimise ``fun`` from each initial simplex in ``simplices`` (shape ``(B, n+1, n)``).

    ``rows[b]`` is forwarded to ``fun`` as the problem index of simplex ``b``.
    A simplex stops once every vertex lies within ``tol`` (max-norm) of its
    best vertex, or after ``max_iters`` iterations. Finished simplices are
    dropped from the working set.

    Returns best points, best values, iteration counts and evaluation counts.
    """
    x = np.array(simplices, dtype=float)
    b, nv, n = x.shape
    rows = np.asarray(rows)
    f = np.asarray(fun(x.reshape(b * nv, n), np.repeat(rows, nv)), dtype=float).reshape(b, nv)
    out_x = np.empty((b, n))
    out_f = np.empty(b)
    iters = np.zeros(b, dtype=int)
    nfev = np.full(b, nv)
    live = np.arange(b)  # original index of each working row
    r_live = rows.copy()

    def retire(done):
        idx = np.flatnonzero(done)
        ib = np.argmin(f[idx], axis=1)
        out_x[live[idx]] = x[idx, ib]
        out_f[live[idx]] = f[idx, ib]

    for it in range(max_iters + 1):
        order = np.argsort(f, axis=1, kind="stable")
        ar = np.arange(len(f))
        ib, iw, i2 = order[:, 0], order[:, -1], order[:, -2]
        xb = x[ar, ib]
        diam = np.max(np.abs(x - xb[:, None, :]), axis=(1, 2))
        done = diam < tol
        if it == max_iters:
            done[:] = True
        if done.any():
            retire(done)
            keep = ~done
            x, f, live, r_live = x[keep], f[keep], live[keep], r_live[keep]
            ib, iw, i2, xb = ib[keep], iw[keep], i2[keep], xb[keep]
            if live.size == 0:
                break
            ar = np.arange(len(f))
        fb, fw, f2 = f[ar, ib], f[ar, iw], f[ar, i2]
        xw = x[ar, iw]
        c = (x.sum(axis=1) - xw) / n
        xr = 2.0 * c - xw
        fr = fun(xr, r_live)
        nfev[live] += 1
        new_x, new_f = xr, fr.copy()
        shrink = np.zeros(len(f), dtype=bool)

        exp = fr < fb
        if exp.any():
            xe = 3.0 * c[exp] - 2.0 * xw[exp]
            fe = fun(xe, r_live[exp])
            nfev[live[exp]] += 1
            take = fe < fr[exp]
            new_x = new_x.copy()
            new_x[exp] = np.where(take[:, None], xe, xr[exp])
            new_f[exp] = np.where(take, fe, fr[exp])

        con = ~exp & (fr >= f2)
        if con.any():
            ic = np.flatnonzero(con)
            outside = fr[ic] < fw[ic]
            # outside contraction toward the reflected point, inside toward the worst vertex
            target = np.where(outside[:, None], xr[ic], xw[ic])
            xc = 0.5 * (c[ic] + target)
            fc = fun(xc, r_live[ic])
            nfev[live[ic]] += 1
            ok = np.where(outside, fc <= fr[ic], fc < fw[ic])
            new_x = new_x.copy() if new_x is xr else new_x
            new_x[ic[ok]] = xc[ok]
            new_f[ic[ok]] = fc[ok]
            shrink[ic[~ok]] = True

        upd = np.flatnonzero(~shrink)
        x[upd, iw[upd]] = new_x[upd]
        f[upd, iw[upd]] = new_f[upd]
        if shrink.any():
            s = np.flatnonzero(shrink)
            xs = xb[s, None, :] + 0.5 * (x[s] - xb[s, None, :])
            fs = fun(xs.reshape(-1, n), np.repeat(r_live[s], nv)).reshape(s.size, nv)
            # the best vertex is a fixed point of the shrink; keep its exact value
            fs[np.arange(s.size), ib[s]] = f[s, ib[s]]
            xs[np.arange(s.size), ib[s]] = x[s, ib[s]]
            nfev[live[s]] += nv - 1
            x[s], f[s] = xs, fs
        iters[live] += 1

    return out_x, out_f, iters, nfev


def _initial_simplex(x0: np.ndarray) -> np.ndarray:
    n = x0.size
    return np.vstack([x0, x0 + SIMPLEX_STEP * np.eye(n)])


def start_points(dim: int, cfg: OptimizerConfig, key: int = 0, extra: Sequence[np.ndarray] = ()) -> np.ndarray:
    """The restart pool for one problem, shape ``(cfg.restarts, dim)``.

    Order: zero parameters, then ``extra`` (canonical or data-driven starts),
    then uniform random angles. Restart ``r`` draws from the substream
    ``(key, r)`` of ``cfg.seed``, so raising ``restarts`` only appends.
    """
    pool = [np.zeros(dim)] + [np.asarray(e, dtype=float).reshape(dim) for e in extra]
    pool = pool[: cfg.restarts]
    root = RngState(cfg.seed)
    for r in range(len(pool), cfg.restarts):
        pool.append(root.spawn(int(key), r).uniform(dim) * TWO_PI)
    return np.array(pool)


def maximize_batch(
    fun: Callable[[np.ndarray, np.ndarray], np.ndarray],
    dim: int,
    cfg: OptimizerConfig,
    n_problems: int,
    keys: Sequence[int] | None = None,
    extra_starts: Sequence[Sequence[np.ndarray]] | None = None,
) -> BatchResult:
    """Maximise ``fun`` independently for ``n_problems`` problems.

    ``keys[i]`` selects the random substream of problem ``i`` (default ``i``);
    ``extra_starts[i]`` lists problem-specific starting points.
    """
    keys = list(range(n_problems)) if keys is None else [int(k) for k in keys]
    extra_starts = [()] * n_problems if extra_starts is None else extra_starts
    r = cfg.restarts
    simplices = np.empty((n_problems * r, dim + 1, dim))
    for i in range(n_problems):
        for j, x0 in enumerate(start_points(dim, cfg, keys[i], extra_starts[i])):
            simplices[i * r + j] = _initial_simplex(x0)
    rows = np.repeat(np.arange(n_problems), r)

    def neg(x, idx):
        return -np.asarray(fun(x, idx), dtype=float)

    bx, bf, iters, nfev = nelder_mead_batch(neg, simplices, rows, cfg.tol, cfg.max_iters)
    vals = -bf.reshape(n_problems, r)
    best = np.argmax(vals, axis=1)  # first maximum wins ties
    pick = np.arange(n_problems) * r + best
    return BatchResult(
        values=vals[np.arange(n_problems), best],
        params=bx[pick],
        iterations=iters[pick],
        evaluations=nfev.reshape(n_problems, r).sum(axis=1),
        best_restart=best,
    )


def maximize(objective: Callable[[np.ndarray], float], dim: int, cfg: OptimizerConfig | None = None,
             starts: Sequence[np.ndarray] = ()) -> tuple[float, np.ndarray]:
    """Multi-start Nelder-Mead maximum of a scalar objective.

    Returns ``(best_value, best_params)``. The zero vector is always the first
    start, so the result is never below ``objective(zeros)``.
    """
    cfg = cfg or OptimizerConfig()

    def fun(x, _rows):
        return np.array([float(objective(xi)) for xi in x])

    res = maximize_batch(fun, dim, cfg, 1, extra_starts=[list(starts)])
    return float(res.values[0]), res.params[0]
