"""Random-state sweeps, normalisation, ordering scans and single-state reports."""

from __future__ import annotations

import csv
import io
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from .errors import ConfigError, MeasureMissing
from .measures.kinds import FIG1_MEASURES, QMI, MeasureKind, parse_measures
from .optimize import OptimizerConfig
from .rng import RngState
from .states import MultipartiteState, new_state, random_product_state, random_state

log = logging.getLogger(__name__)

NORMALIZATIONS = ("none", "by_reference_state", "by_sweep_max")
DEFAULT_MEASURES = (QMI,) + FIG1_MEASURES
NORM_SLACK = 1e-9
CHUNK = 250


@dataclass(frozen=True)
class SweepConfig:
    n_states: int = 10_000
    dims: tuple[int, ...] = (2, 2)
    rank: int | None = None
    measures: tuple[MeasureKind, ...] = DEFAULT_MEASURES
    seed: int = 42
    normalization: str = "by_reference_state"
    opt: OptimizerConfig = OptimizerConfig(restarts=8)
    workers: int = 1

    def __post_init__(self):
        object.__setattr__(self, "dims", tuple(int(d) for d in self.dims))
        object.__setattr__(self, "measures", tuple(self.measures))
        if self.n_states < 1:
            raise ConfigError("n_states must be at least 1")
        if len(self.dims) < 2 or min(self.dims) < 2:
            raise ConfigError("need at least two sites of dimension >= 2")
        big_d = int(np.prod(self.dims))
        if self.rank is not None and not 1 <= self.rank <= big_d:
            raise ConfigError(f"rank must lie in [1, {big_d}]")
        if not self.measures:
            raise ConfigError("no measures requested")
        names = [m.name for m in self.measures]
        if len(set(names)) != len(names):
            raise ConfigError("duplicate measures requested")
        if self.normalization not in NORMALIZATIONS:
            raise ConfigError(f"normalization must be one of {', '.join(NORMALIZATIONS)}")
        if not 0 <= self.seed < 2**64:
            raise ConfigError("seed must be a 64-bit unsigned integer")
        if self.workers < 1:
            raise ConfigError("workers must be at least 1")

    def with_(self, **changes) -> "SweepConfig":
        return replace(self, **changes)


@dataclass
class SweepRecord:
    state_id: int
    seed_hi: int
    seed_lo: int
    raw: dict[str, float]
    normalized: dict[str, float] = field(default_factory=dict)


@dataclass(frozen=True)
class OrderingWitness:
    """Two states ranked in opposite order by two measures."""

    rho_id: int
    sigma_id: int
    measure_a: str
    measure_b: str
    a_rho: float
    a_sigma: float
    b_rho: float
    b_sigma: float

    @property
    def margin(self) -> float:
        return min(abs(self.a_rho - self.a_sigma), abs(self.b_rho - self.b_sigma))


def sweep_state(cfg: SweepConfig, state_id: int) -> MultipartiteState:
    """The state a sweep draws at ``state_id``; independent of everything else."""
    return random_state(cfg.dims, cfg.rank, RngState(cfg.seed, (state_id,)))


def reference_state(dims: Sequence[int]) -> MultipartiteState:
    """Maximally entangled ``sum_k |kk> / sqrt(d)`` on two equal sites."""
    dims = tuple(dims)
    if len(dims) != 2 or dims[0] != dims[1]:
        raise ConfigError(f"no reference state for dims {list(dims)}; use by_sweep_max")
    d = dims[0]
    v = np.zeros(d * d, dtype=np.complex128)
    v[:: d + 1] = 1 / math.sqrt(d)
    return new_state(np.outer(v, v.conj()), dims)


def _evaluate_chunk(args) -> np.ndarray:
    cfg, lo, hi = args
    states = [sweep_state(cfg, i) for i in range(lo, hi)]
    keys = list(range(lo, hi))
    return np.column_stack([m.values(states, cfg.opt, keys) for m in cfg.measures])


def raw_values(cfg: SweepConfig) -> np.ndarray:
    """``(n_states, n_measures)`` raw values, row order = state index.

    Work is split into fixed chunks so the result does not depend on the
    number of workers.
    """
    bounds = [(lo, min(lo + CHUNK, cfg.n_states)) for lo in range(0, cfg.n_states, CHUNK)]
    jobs = [(cfg, lo, hi) for lo, hi in bounds]
    if cfg.workers == 1 or len(jobs) == 1:
        parts = [_evaluate_chunk(j) for j in jobs]
    else:
        with ProcessPoolExecutor(cfg.workers) as ex:
            parts = list(ex.map(_evaluate_chunk, jobs))
    return np.vstack(parts)


def normalizers(cfg: SweepConfig, raw: np.ndarray) -> np.ndarray | None:
    """Per-measure divisors, or ``None`` when normalisation is off."""
    if cfg.normalization == "none":
        return None
    sweep_max = raw.max(axis=0)
    if cfg.normalization == "by_sweep_max":
        return sweep_max
    ref_state = reference_state(cfg.dims)
    ref = np.array([m.values([ref_state], cfg.opt, [0])[0] for m in cfg.measures])
    for j, m in enumerate(cfg.measures):
        if sweep_max[j] > ref[j] * (1 + NORM_SLACK):
            log.warning(
                "%s: sweep maximum %.6g exceeds the reference value %.6g; normalising by the sweep maximum",
                m.name, sweep_max[j], ref[j],
            )
    return np.maximum(ref, sweep_max)


def normalize(raw: np.ndarray, scale: np.ndarray) -> np.ndarray:
    safe = np.where(scale > 0, scale, 1.0)
    return np.where(scale > 0, np.maximum(raw, 0.0) / safe, 0.0)


def reference_extras(cfg: SweepConfig, n_products: int = 10) -> list[MultipartiteState]:
    """The reference state followed by random product states, for appending to a sweep."""
    rng = RngState(cfg.seed, (cfg.n_states,))
    return [reference_state(cfg.dims)] + [random_product_state(cfg.dims, rng.spawn(k)) for k in range(n_products)]


def sweep(cfg: SweepConfig, extra_states: Sequence[MultipartiteState] = ()) -> list[SweepRecord]:
    """Evaluate ``cfg.n_states`` random states, then any ``extra_states``.

    Extra states get ids after the random ones and take part in
    normalisation.
    """
    raw = raw_values(cfg)
    if extra_states:
        keys = list(range(cfg.n_states, cfg.n_states + len(extra_states)))
        more = np.column_stack([m.values(list(extra_states), cfg.opt, keys) for m in cfg.measures])
        raw = np.vstack([raw, more])
    scale = normalizers(cfg, raw)
    norm = normalize(raw, scale) if scale is not None else None
    names = [m.name for m in cfg.measures]
    hi, lo = cfg.seed >> 32, cfg.seed & 0xFFFFFFFF
    out = []
    for i in range(raw.shape[0]):
        rec = SweepRecord(i, hi, lo, dict(zip(names, raw[i].tolist())))
        if norm is not None:
            rec.normalized = dict(zip(names, norm[i].tolist()))
        out.append(rec)
    return out


# ------------------------------------------------------------------------ CSV


def _fmt(x: float) -> str:
    return repr(float(x))


def records_to_csv(records: Sequence[SweepRecord], measures: Sequence[str] | None = None) -> str:
    if measures is None:
        measures = list(records[0].raw) if records else []
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["state_id", "seed_hi", "seed_lo"] + [c for m in measures for c in (m, f"{m}_norm")])
    for r in records:
        row = [r.state_id, r.seed_hi, r.seed_lo]
        for m in measures:
            row += [_fmt(r.raw[m]), _fmt(r.normalized[m]) if m in r.normalized else ""]
        w.writerow(row)
    return buf.getvalue()


def write_csv(records: Sequence[SweepRecord], path, measures: Sequence[str] | None = None) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(records_to_csv(records, measures))


def read_csv(path) -> list[SweepRecord]:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ConfigError(f"{path}: empty CSV") from None
        if header[:3] != ["state_id", "seed_hi", "seed_lo"]:
            raise ConfigError(f"{path}: not a sweep CSV (header {header[:3]})")
        names = header[3::2]
        out = []
        for lineno, row in enumerate(reader, start=2):
            try:
                raw = {m: float(row[3 + 2 * j]) for j, m in enumerate(names)}
                norm = {m: float(row[4 + 2 * j]) for j, m in enumerate(names) if row[4 + 2 * j] != ""}
                out.append(SweepRecord(int(row[0]), int(row[1]), int(row[2]), raw, norm))
            except (ValueError, IndexError) as exc:
                raise ConfigError(f"{path}:{lineno}: bad row ({exc})") from None
    return out


def column(records: Sequence[SweepRecord], name: str, normalized: bool = True) -> np.ndarray:
    """Values of one measure; normalised when present, raw otherwise."""
    if not records:
        return np.zeros(0)
    if name not in records[0].raw:
        raise MeasureMissing(f"measure {name!r} not in records; have {', '.join(records[0].raw)}")
    use_norm = normalized and name in records[0].normalized
    return np.array([(r.normalized if use_norm else r.raw)[name] for r in records])


# ------------------------------------------------------------------- ordering


def ordering_scan(records: Sequence[SweepRecord], a: MeasureKind | str, b: MeasureKind | str,
                  margin: float = 1e-4, limit: int | None = 1000) -> list[OrderingWitness]:
    """State pairs that ``a`` and ``b`` rank in opposite order, both by more than ``margin``.

    Pairs are returned in ``(rho_id, sigma_id)`` order, at most ``limit``.
    """
    na, nb = str(a), str(b)
    va, vb = column(records, na), column(records, nb)
    ids = [r.state_id for r in records]
    if not margin > 0:
        raise ConfigError("margin must be positive")
    out: list[OrderingWitness] = []
    n = len(records)
    block = 256
    for lo in range(0, n, block):
        hi = min(lo + block, n)
        da = va[lo:hi, None] - va[None, :]
        db = vb[lo:hi, None] - vb[None, :]
        hit = (da * db < 0) & (np.abs(da) > margin) & (np.abs(db) > margin)
        hit &= np.arange(lo, hi)[:, None] < np.arange(n)[None, :]
        for i, j in zip(*np.nonzero(hit)):
            i += lo
            out.append(OrderingWitness(ids[i], ids[j], na, nb, va[i], va[j], vb[i], vb[j]))
            if limit is not None and len(out) >= limit:
                return out
    return out


# -------------------------------------------------------------------- inspect

SUMMARY_MEASURES = parse_measures("qmi,renyi:2,tsallis:2,geometric:1,geometric:2,pcc,kl")


def inspect(rho: MultipartiteState, measures: Sequence[MeasureKind] | None = None,
            opt: OptimizerConfig | None = None) -> dict:
    """Values, units and optimizer diagnostics for one state."""
    measures = list(SUMMARY_MEASURES if measures is None else measures)
    opt = opt or OptimizerConfig()
    rows = []
    for m in measures:
        res = m.evaluate(rho, opt if m.optimized else None)
        row = {"measure": m.name, "value": res.value, "units": m.units}
        if m.optimized:
            row["diagnostics"] = res.diagnostics
        rows.append(row)
    return {"dims": list(rho.dims), "purity": rho.purity(), "measures": rows}


def format_inspect(report: dict) -> str:
    lines = [f"dims {report['dims']}  purity {report['purity']:.6g}"]
    width = max(len(r["measure"]) for r in report["measures"]) if report["measures"] else 0
    for r in report["measures"]:
        line = f"{r['measure']:<{width}}  {r['value']:.10g}  {r['units']}"
        d = r.get("diagnostics")
        if d:
            line += (f"  [iterations {d['optimizer_iterations']}, evaluations {d['optimizer_evaluations']},"
                     f" best restart {d['best_restart']}]")
        lines.append(line)
    return "\n".join(lines)
