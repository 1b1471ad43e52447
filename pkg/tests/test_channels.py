import numpy as np
import pytest

from totcorr.channels import (
    PAULI_X,
    KrausChannel,
    apply,
    apply_all,
    named_channel,
    new_channel,
    parse_channel,
    random_channel,
    random_merging_channel,
    random_unital_channel,
)
from totcorr.errors import DimensionMismatch, IndexOutOfRange, NotTracePreserving, ParamOutOfRange, UnknownKind
from totcorr.rng import RngState
from totcorr.states import canonical, new_state, random_state


def test_depolarizing_formula(rng):
    rho = random_state((2,), None, rng)
    p = 0.3
    out = apply(named_channel("depolarizing", p, 0), rho)
    np.testing.assert_allclose(out.matrix, (1 - p) * rho.matrix + p * np.eye(2) / 2, atol=1e-12)


def test_amplitude_damping_on_excited_state():
    one = new_state(np.diag([0.0, 1.0]), (2,))
    out = apply(named_channel("amplitude_damping", 0.25, 0), one)
    np.testing.assert_allclose(np.diag(out.matrix).real, [0.25, 0.75], atol=1e-12)
    assert not named_channel("amplitude_damping", 0.25, 0).is_unital()


def test_phase_damping_shrinks_coherence():
    plus = new_state(np.full((2, 2), 0.5), (2,))
    out = apply(named_channel("phase_damping", 0.36, 0), plus)
    assert out.matrix[0, 1].real == pytest.approx(0.5 * 0.8)
    assert named_channel("phase_damping", 0.36, 0).is_unital()


def test_site_embedding(bell):
    # X on site 1 of Phi+ gives Psi+
    out = apply(named_channel("unitary", PAULI_X, 1), bell)
    psi = np.array([0, 1, 1, 0]) / np.sqrt(2)
    np.testing.assert_allclose(out.matrix, np.outer(psi, psi), atol=1e-12)


def test_channel_on_middle_site_of_three(rng):
    rho = random_state((2, 3, 2), None, rng.spawn(0))
    ch = random_channel(3, None, 1, rng.spawn(1))
    out = apply(ch, rho)
    # local action leaves the other marginals alone
    np.testing.assert_allclose(out.marginal(0).matrix, rho.marginal(0).matrix, atol=1e-12)
    np.testing.assert_allclose(out.marginal(2).matrix, rho.marginal(2).matrix, atol=1e-12)
    rho1 = rho.marginal(1).matrix
    want = sum(k @ rho1 @ k.conj().T for k in ch.kraus_ops)
    np.testing.assert_allclose(out.marginal(1).matrix, want, atol=1e-12)


@pytest.mark.parametrize("d, env", [(2, None), (3, None), (2, 1), (3, 2)])
def test_random_channel_is_cptp(d, env):
    ch = random_channel(d, env, 0, RngState(d * 10 + (env or 0)))
    assert ch.completeness_residual() < 1e-12
    assert len(ch.kraus_ops) == (d * d if env is None else env)


def test_random_unital_channel_is_unital():
    ch = random_unital_channel(3, 4, 0, RngState(1))
    assert ch.is_unital()


def test_merging_channel_is_cptp_and_usually_non_unital():
    chans = [random_merging_channel(3, 0, RngState(1, (i,))) for i in range(50)]
    assert all(c.completeness_residual() < 1e-12 for c in chans)
    assert sum(not c.is_unital() for c in chans) > 25


def test_output_dimension_can_change(bell):
    # qubit -> qutrit isometric embedding
    v = np.zeros((3, 2))
    v[0, 0] = v[2, 1] = 1
    out = apply(new_channel([v], 0), bell)
    assert out.dims == (3, 2)
    assert np.trace(out.matrix).real == pytest.approx(1)


def test_validation(bell):
    with pytest.raises(NotTracePreserving):
        new_channel([np.eye(2) * 0.9], 0)
    with pytest.raises(DimensionMismatch):
        new_channel([], 0)
    with pytest.raises(DimensionMismatch):
        apply(new_channel([np.eye(3)], 0), bell)
    with pytest.raises(IndexOutOfRange):
        apply(named_channel("depolarizing", 0.1, 2), bell)
    with pytest.raises(ParamOutOfRange):
        named_channel("depolarizing", 1.5, 0)
    with pytest.raises(UnknownKind):
        named_channel("erasure", 0.1, 0)


def test_parse_and_round_trip():
    ch = parse_channel("amplitude_damping:0.3", 1)
    assert ch.site == 1
    back = KrausChannel.from_dict(ch.to_dict())
    for a, b in zip(ch.kraus_ops, back.kraus_ops):
        np.testing.assert_array_equal(a, b)


def test_apply_all_composes(bell):
    chans = [named_channel("depolarizing", 0.2, 0), named_channel("depolarizing", 0.5, 1)]
    out = apply_all(chans, bell)
    # depolarizing both halves of Phi+ scales the correlations by (1-0.2)(1-0.5)
    want = 0.4 * bell.matrix + 0.6 * np.eye(4) / 4
    np.testing.assert_allclose(out.matrix, want, atol=1e-12)
    full = apply_all([named_channel("depolarizing", 1, 0), named_channel("depolarizing", 1, 1)], bell)
    assert full.allclose(canonical("maximally_mixed"))
