"""Uniform handle on the six measures and the ``name[:param]`` grammar."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ..errors import AlphaOutOfRange, InvalidOrder, QOutOfRange, UnknownKind
from ..optimize import OptimizerConfig
from ..states import MultipartiteState
from . import entropic, local
from .entropic import MeasureResult

TAGS = ("qmi", "renyi", "tsallis", "geometric", "pcc", "kl")
PARAMETRISED = {"renyi", "tsallis", "geometric"}

CLOSED_FORM_TOL = 1e-8
OPTIMIZED_TOL = 1e-3

UNITS = {
    "qmi": "bits",
    "renyi": "bits",
    "tsallis": "ln_q units",
    "geometric": "dimensionless",
    "pcc": "dimensionless",
    "kl": "bits",
}


def _fmt(x: float) -> str:
    return f"{x:g}"


@dataclass(frozen=True)
class MeasureKind:
    tag: str
    param: float | None = None

    def __post_init__(self):
        if self.tag not in TAGS:
            raise UnknownKind(f"unknown measure {self.tag!r}; known: {', '.join(TAGS)}")
        if self.tag in PARAMETRISED:
            if self.param is None:
                raise UnknownKind(f"measure {self.tag!r} needs a parameter, e.g. {self.tag}:2")
            p = float(self.param)
            object.__setattr__(self, "param", p)
            if self.tag == "renyi" and not (p > 0 and p != 1 and np.isfinite(p)):
                raise AlphaOutOfRange(f"Renyi order must lie in (0,1) or (1,inf), got {p}")
            if self.tag == "tsallis" and not (p > 0 and p != 1 and np.isfinite(p)):
                raise QOutOfRange(f"Tsallis index must lie in (0,1) or (1,inf), got {p}")
            if self.tag == "geometric" and not p >= 1:
                raise InvalidOrder(f"Schatten order must be >= 1, got {p}")
        elif self.param is not None:
            raise UnknownKind(f"measure {self.tag!r} takes no parameter")

    @property
    def name(self) -> str:
        """The grammar string, e.g. ``renyi:2``."""
        return self.tag if self.param is None else f"{self.tag}:{_fmt(self.param)}"

    def __str__(self) -> str:
        return self.name

    @property
    def optimized(self) -> bool:
        return self.tag in ("pcc", "kl")

    @property
    def tolerance(self) -> float:
        return OPTIMIZED_TOL if self.optimized else CLOSED_FORM_TOL

    @property
    def units(self) -> str:
        return UNITS[self.tag]

    @property
    def monotone_range_ok(self) -> bool:
        """Whether local-CPTP monotonicity is expected at this parameter value."""
        if self.tag in ("renyi", "tsallis"):
            return self.param <= 2
        if self.tag == "geometric":
            return self.param == 1
        return True

    @property
    def label(self) -> str:
        """Math-text axis label."""
        if self.tag == "qmi":
            return r"$I(\rho)$"
        if self.tag == "renyi":
            return rf"$I_{{\alpha={_fmt(self.param)}}}(\rho)$"
        if self.tag == "tsallis":
            return rf"$I_{{q={_fmt(self.param)}}}(\rho)$"
        if self.tag == "geometric":
            return rf"$\mathcal{{G}}_{{{_fmt(self.param)}}}(\rho)$"
        if self.tag == "pcc":
            return r"$\mathbb{R}(\rho)$"
        return r"$D_{KL}(\rho)$"

    def evaluate(self, rho: MultipartiteState, opt: OptimizerConfig | None = None, key: int = 0) -> MeasureResult:
        return self.evaluate_many([rho], opt, [key])[0]

    def evaluate_many(
        self,
        states: Sequence[MultipartiteState],
        opt: OptimizerConfig | None = None,
        keys: Sequence[int] | None = None,
    ) -> list[MeasureResult]:
        """Evaluate on a list of states; optimised measures run as one batch."""
        if self.tag == "pcc":
            return _grouped(local.pcc_measure_batch, states, opt, keys)
        if self.tag == "kl":
            return _grouped(local.measured_kl_batch, states, opt, keys)
        fn = {
            "qmi": lambda s: entropic.qmi(s),
            "renyi": lambda s: entropic.renyi_measure(s, self.param),
            "tsallis": lambda s: entropic.tsallis_measure(s, self.param),
            "geometric": lambda s: entropic.geometric_measure(s, self.param),
        }[self.tag]
        return [fn(s) for s in states]

    def values(self, states, opt=None, keys=None) -> np.ndarray:
        return np.array([r.value for r in self.evaluate_many(states, opt, keys)])


def _grouped(batch_fn, states, opt, keys):
    """Run a batch function per distinct ``dims`` so mixed batches work."""
    keys = list(range(len(states))) if keys is None else list(keys)
    out: list = [None] * len(states)
    groups: dict = {}
    for i, s in enumerate(states):
        groups.setdefault(s.dims, []).append(i)
    for idx in groups.values():
        res = batch_fn([states[i] for i in idx], opt, [keys[i] for i in idx])
        for i, r in zip(idx, res):
            out[i] = r
    return out


def parse_measure(text: str) -> MeasureKind:
    """Parse ``qmi``, ``renyi:ALPHA``, ``tsallis:Q``, ``geometric:P``, ``pcc`` or ``kl``."""
    tag, sep, param = text.strip().partition(":")
    tag = tag.strip().lower()
    if tag not in TAGS:
        raise UnknownKind(f"unknown measure {text!r}; known: qmi, renyi:A, tsallis:Q, geometric:P, pcc, kl")
    if sep:
        try:
            value = float(param)
        except ValueError:
            raise UnknownKind(f"bad parameter in measure {text!r}") from None
        return MeasureKind(tag, value)
    return MeasureKind(tag)


def parse_measures(text: str | Sequence[str]) -> list[MeasureKind]:
    items = text.split(",") if isinstance(text, str) else list(text)
    return [parse_measure(t) for t in items if t.strip()]


QMI = MeasureKind("qmi")
FIG1_MEASURES = tuple(
    parse_measure(t) for t in ("geometric:1", "geometric:2", "pcc", "renyi:2", "tsallis:2", "kl")
)
