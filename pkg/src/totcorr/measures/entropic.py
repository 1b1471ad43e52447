"""Closed-form correlation measures: divergences from the factorized state.

Entropic quantities are in bits. The Tsallis family has no base change
(``ln_q`` is not a logarithm), so its values stay in natural ``ln_q`` units.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .. import linalg
from ..errors import AlphaOutOfRange, QOutOfRange
from ..linalg import SUPPORT_CUTOFF
from ..states import MultipartiteState

log = logging.getLogger(__name__)

# weight of rho outside supp(sigma) above which a divergence is declared infinite
SUPPORT_WEIGHT_TOL = 1e-9
QMI_CROSS_CHECK_TOL = 1e-8


@dataclass
class MeasureResult:
    value: float
    normalized: float | None = None
    diagnostics: dict = field(default_factory=dict)


def _matrix(x) -> np.ndarray:
    return x.matrix if isinstance(x, MultipartiteState) else linalg.as_matrix(x)


def _xlog2x(lam: np.ndarray) -> float:
    lam = lam[lam > SUPPORT_CUTOFF]
    return float(np.sum(lam * np.log2(lam)))


def von_neumann_entropy(rho) -> float:
    """``-Tr(rho log2 rho)`` with ``0 log 0 = 0``."""
    lam = np.linalg.eigvalsh(_matrix(rho))
    return max(0.0, -_xlog2x(lam))


def _kernel_weight(rho: np.ndarray, sigma: np.ndarray) -> float:
    w, v = np.linalg.eigh(sigma)
    ker = v[:, np.abs(w) <= SUPPORT_CUTOFF]
    if ker.shape[1] == 0:
        return 0.0
    return float(np.real(np.trace(linalg.dagger(ker) @ rho @ ker)))


def support_violation(rho, sigma) -> bool:
    return _kernel_weight(_matrix(rho), _matrix(sigma)) > SUPPORT_WEIGHT_TOL


def umegaki_divergence(rho, sigma) -> float:
    """``Tr[rho (log2 rho - log2 sigma)]``; ``inf`` when supp(rho) is not inside supp(sigma)."""
    r, s = _matrix(rho), _matrix(sigma)
    if support_violation(r, s):
        log.debug("support violation in Umegaki divergence; returning inf")
        return math.inf
    log_s = linalg.matrix_function(s, np.log2)
    return _xlog2x(np.linalg.eigvalsh(r)) - float(np.real(np.trace(r @ log_s)))


def _petz_quasi(r: np.ndarray, s: np.ndarray, a: float) -> float:
    """``Tr(rho^a sigma^(1-a))`` with powers taken on the supports."""
    ra = linalg.matrix_function(r, lambda x: np.clip(x, 0, None) ** a)
    sa = linalg.matrix_function(s, lambda x: np.clip(x, 0, None) ** (1 - a))
    return float(np.real(np.trace(ra @ sa)))


def _check_alpha(alpha: float) -> float:
    alpha = float(alpha)
    if not (alpha > 0 and alpha != 1 and np.isfinite(alpha)):
        raise AlphaOutOfRange(f"Renyi order must lie in (0,1) or (1,inf), got {alpha}")
    return alpha


def _check_q(q: float) -> float:
    q = float(q)
    if not (q > 0 and q != 1 and np.isfinite(q)):
        raise QOutOfRange(f"Tsallis index must lie in (0,1) or (1,inf), got {q}")
    return q


def renyi_divergence(rho, sigma, alpha: float) -> float:
    """Petz-Renyi divergence in bits, ``log2 Tr(rho^a sigma^(1-a)) / (a - 1)``."""
    alpha = _check_alpha(alpha)
    r, s = _matrix(rho), _matrix(sigma)
    if alpha > 1 and support_violation(r, s):
        return math.inf
    return math.log2(_petz_quasi(r, s, alpha)) / (alpha - 1)


def ln_q(x, q: float):
    return (np.power(x, 1 - q) - 1) / (1 - q)


def tsallis_divergence(rho, sigma, q: float) -> float:
    """``Tr[rho^q (ln_q rho - ln_q sigma)]`` with ``ln_q(x) = (x^(1-q) - 1)/(1-q)``."""
    q = _check_q(q)
    r, s = _matrix(rho), _matrix(sigma)
    if q > 1 and support_violation(r, s):
        return math.inf
    pos = lambda x: np.clip(x, 0, None)  # noqa: E731
    rq = linalg.matrix_function(r, lambda x: pos(x) ** q)
    ln_r = linalg.matrix_function(r, lambda x: ln_q(pos(x), q))
    # for q < 1, ln_q(0) = -1/(1-q) is finite and must be kept on ker(sigma)
    zero = -1.0 / (1 - q) if q < 1 else 0.0
    ln_s = linalg.matrix_function(s, lambda x: ln_q(pos(x), q), zero_value=zero)
    return float(np.real(np.trace(rq @ (ln_r - ln_s))))


def qmi(rho: MultipartiteState) -> MeasureResult:
    """Quantum mutual information ``D(rho || Omega_rho)`` in bits.

    The entropy form ``sum_i S(rho_i) - S(rho)`` is evaluated alongside; the
    gap between the two is reported under ``cross_check_gap``.
    """
    div = umegaki_divergence(rho.matrix, rho.omega.matrix)
    ent = sum(von_neumann_entropy(m) for m in rho.marginals) - von_neumann_entropy(rho)
    gap = abs(div - ent)
    if gap > QMI_CROSS_CHECK_TOL:
        log.warning("QMI divergence and entropy forms disagree by %.3e", gap)
    return MeasureResult(div, diagnostics={"entropy_form": ent, "cross_check_gap": gap})


def renyi_measure(rho: MultipartiteState, alpha: float) -> MeasureResult:
    return MeasureResult(renyi_divergence(rho.matrix, rho.omega.matrix, alpha))


def tsallis_measure(rho: MultipartiteState, q: float) -> MeasureResult:
    return MeasureResult(tsallis_divergence(rho.matrix, rho.omega.matrix, q))


def geometric_measure(rho: MultipartiteState, p: float) -> MeasureResult:
    """Schatten p-norm of the correlation matrix ``rho - Omega_rho``."""
    return MeasureResult(linalg.schatten_norm(rho.matrix - rho.omega.matrix, p))
