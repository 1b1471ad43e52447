from .entropic import (
    MeasureResult,
    geometric_measure,
    ln_q,
    qmi,
    renyi_divergence,
    renyi_measure,
    tsallis_divergence,
    tsallis_measure,
    umegaki_divergence,
    von_neumann_entropy,
)
from .kinds import FIG1_MEASURES, QMI, MeasureKind, parse_measure, parse_measures
from .local import (
    ObservableSet,
    measured_kl,
    measured_kl_batch,
    measured_kl_for_bases,
    mub_sets,
    pauli_tensor,
    pcc_coefficient,
    pcc_covariance,
    pcc_measure,
    pcc_measure_batch,
    pcc_sum,
)

__all__ = [
    "FIG1_MEASURES",
    "QMI",
    "MeasureKind",
    "MeasureResult",
    "ObservableSet",
    "geometric_measure",
    "ln_q",
    "measured_kl",
    "measured_kl_batch",
    "measured_kl_for_bases",
    "mub_sets",
    "parse_measure",
    "parse_measures",
    "pauli_tensor",
    "pcc_coefficient",
    "pcc_covariance",
    "pcc_measure",
    "pcc_measure_batch",
    "pcc_sum",
    "qmi",
    "renyi_divergence",
    "renyi_measure",
    "tsallis_divergence",
    "tsallis_measure",
    "umegaki_divergence",
    "von_neumann_entropy",
]
