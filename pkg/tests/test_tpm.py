import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import workfluct as wf
from workfluct.experiment import endpoint_bases

from conftest import (
    BETA_Z,
    Z,
    adiabatic_atoms,
    adiabatic_variance_closed_form,
    gibbs_closed_form,
    jarzynski_mean_closed_form,
    sudden_atoms,
    sudden_variance_closed_form,
)

# Frozen from the hand-written closed forms in conftest.
ADIABATIC_VAR = {0.6: 0.08486303817337, 0.8: 0.14436121391882}
SUDDEN_VAR = {0.6: 0.30472560359329, 0.8: 0.59565850321142}
EXP_MEAN = {0.6: 1.13404911635747, 0.8: 1.23713729177115}


@pytest.fixture(scope="module")
def bases():
    return endpoint_bases(wf.DriveProtocol())


def test_frozen_values_match_oracle():
    for bz in BETA_Z:
        assert adiabatic_variance_closed_form(bz) == pytest.approx(ADIABATIC_VAR[bz], abs=1e-13)
        assert sudden_variance_closed_form(bz) == pytest.approx(SUDDEN_VAR[bz], abs=1e-13)
        assert jarzynski_mean_closed_form(bz) == pytest.approx(EXP_MEAN[bz], abs=1e-13)
    # the ordering of the two limits is the point of the whole exercise
    assert ADIABATIC_VAR[0.6] < SUDDEN_VAR[0.6]
    assert ADIABATIC_VAR[0.8] > ADIABATIC_VAR[0.6]


class TestThermalPopulations:
    def test_infinite_temperature(self):
        np.testing.assert_allclose(wf.thermal_populations([1.0, 2.0, 5.0], 0.0).populations, 1 / 3)

    @pytest.mark.parametrize("bz,expected", [(0.6, (0.6457, 0.3543)), (0.8, (0.6900, 0.3100))])
    def test_reference_temperatures(self, bases, bz, expected):
        ts = wf.thermal_populations(bases[0].values, bz / Z)
        np.testing.assert_allclose(ts.populations, gibbs_closed_form(bz), atol=1e-14)
        np.testing.assert_allclose(ts.populations, expected, atol=5e-5)

    def test_negative_beta_rejected(self):
        with pytest.raises(ValueError):
            wf.thermal_populations([0.0, 1.0], -1.0)

    def test_huge_energies_do_not_overflow(self):
        p = wf.thermal_populations([-1e6, 0.0, 1e6], 1.0).populations
        np.testing.assert_allclose(p, [1.0, 0.0, 0.0])

    @given(
        st.lists(st.floats(-50, 50), min_size=2, max_size=6),
        st.floats(0, 10),
    )
    def test_normalised_and_gibbs(self, spectrum, beta):
        p = wf.thermal_populations(spectrum, beta).populations
        assert abs(p.sum() - 1) <= 1e-12
        e = np.array(spectrum)
        i, j = np.argmin(e), np.argmax(e)
        if p[j] > 1e-300:
            assert math.log(p[i] / p[j]) == pytest.approx(beta * (e[j] - e[i]), abs=1e-9)


class TestTransitions:
    def test_identity(self, bases):
        np.testing.assert_allclose(wf.transition_probabilities(np.eye(2), bases[0], bases[0]), np.eye(2))

    def test_sudden_quench(self, bases):
        t = wf.transition_probabilities(np.eye(2), *bases)
        # brute force with the explicit rotated eigenvectors at theta = pi/3
        c, s = math.cos(math.pi / 6), math.sin(math.pi / 6)
        ground_final = np.array([c, -s])
        brute = abs(ground_final @ np.array([1.0, 0.0])) ** 2
        assert brute == pytest.approx(0.75)
        np.testing.assert_allclose(t, [[0.75, 0.25], [0.25, 0.75]], atol=1e-14)

    def test_dimension_mismatch(self, bases):
        with pytest.raises(ValueError):
            wf.transition_probabilities(np.eye(3), *bases)

    def test_doubly_stochastic_for_random_unitaries(self, bases, rng):
        for _ in range(200):
            t = wf.transition_probabilities(wf.haar_unitary(2, rng), *bases)
            np.testing.assert_allclose(t.sum(axis=0), 1, atol=1e-9)
            np.testing.assert_allclose(t.sum(axis=1), 1, atol=1e-9)


class TestWorkDistribution:
    def test_adiabatic_limit(self, bases):
        ts = wf.thermal_populations(bases[0].values, 0.6 / Z)
        wd = wf.work_distribution(ts, np.eye(2), bases[0].values, bases[1].values)
        expected = adiabatic_atoms(0.6)
        np.testing.assert_allclose(wd.work, [w for w, _ in expected], atol=1e-12)
        np.testing.assert_allclose(wd.prob, [p for _, p in expected], atol=1e-14)
        np.testing.assert_allclose(wd.work, [-1.4433756729740645, 1.4433756729740645], atol=1e-12)

    def test_sudden_limit(self, bases):
        ts = wf.thermal_populations(bases[0].values, 0.6 / Z)
        trans = wf.transition_probabilities(np.eye(2), *bases)
        wd = wf.work_distribution(ts, trans, bases[0].values, bases[1].values)
        np.testing.assert_allclose(wd.work, np.array([-1.5, -0.5, 0.5, 1.5]) * Z, atol=1e-12)
        expected = dict((round(w / Z, 6), p) for w, p in sudden_atoms(0.6))
        np.testing.assert_allclose(wd.prob, [expected[k] for k in (-1.5, -0.5, 0.5, 1.5)], atol=1e-14)
        assert wd.prob.sum() == pytest.approx(1, abs=1e-14)

    def test_degenerate_work_values_merge(self):
        wd = wf.work_distribution([0.5, 0.5], np.full((2, 2), 0.5), [0.0, 1.0], [0.0, 1.0])
        np.testing.assert_allclose(wd.work, [-1.0, 0.0, 1.0])
        np.testing.assert_allclose(wd.prob, [0.25, 0.5, 0.25])
        assert len(wd) == 3

    def test_shape_mismatch(self):
        with pytest.raises(ValueError):
            wf.work_distribution([1.0, 0.0], np.eye(3), [0, 1], [0, 1])

    def test_rows_must_be_stochastic(self):
        with pytest.raises(ValueError):
            wf.work_distribution([1.0, 0.0], [[0.5, 0.4], [0, 1]], [0, 1], [0, 1])


class TestMoments:
    def test_single_atom(self):
        wd = wf.WorkDistribution(np.array([0.7]), np.array([1.0]))
        mean, var = wf.exp_work_moments(wd, 2.0)
        assert mean == pytest.approx(math.exp(-1.4))
        assert var == 0.0

    @pytest.mark.parametrize("bz", BETA_Z)
    def test_limits(self, bases, bz):
        beta = bz / Z
        ts = wf.thermal_populations(bases[0].values, beta)
        for trans, expected in (
            (np.eye(2), ADIABATIC_VAR[bz]),
            (wf.transition_probabilities(np.eye(2), *bases), SUDDEN_VAR[bz]),
        ):
            mean, var = wf.exp_work_moments(wf.work_distribution(ts, trans, bases[0].values, bases[1].values), beta)
            assert mean == pytest.approx(EXP_MEAN[bz], abs=1e-12)
            assert var == pytest.approx(expected, abs=1e-12)


class TestFreeEnergy:
    def test_identical_spectra(self):
        assert wf.free_energy_difference([0, 1, 3], [0, 1, 3], 0.7) == 0.0

    @pytest.mark.parametrize("bz", BETA_Z)
    def test_reference_values(self, bases, bz):
        beta = bz / Z
        df = wf.free_energy_difference(bases[0].values, bases[1].values, beta)
        assert math.exp(-beta * df) == pytest.approx(EXP_MEAN[bz], abs=1e-13)

    def test_zero_beta_rejected(self):
        with pytest.raises(ValueError):
            wf.free_energy_difference([0, 1], [0, 2], 0.0)


class TestJarzynski:
    @pytest.mark.parametrize("which", ["adiabatic", "sudden"])
    def test_limits(self, bases, which):
        p = wf.DriveProtocol()
        trans = wf.reference_transitions(p, which)
        beta = 0.6 / Z
        ts = wf.thermal_populations(bases[0].values, beta)
        wd = wf.work_distribution(ts, trans, bases[0].values, bases[1].values)
        assert wf.jarzynski_residual(wd, beta, bases[0].values, bases[1].values) <= 1e-12

    @pytest.mark.parametrize("dim", [2, 3, 5])
    def test_random_unitaries_and_spectra(self, rng, dim):
        for _ in range(1000 if dim == 2 else 100):
            e0 = np.sort(rng.normal(size=dim))
            e1 = np.sort(rng.normal(size=dim) * 2)
            beta = rng.uniform(0.05, 3)
            ts = wf.thermal_populations(e0, beta)
            trans = wf.transition_probabilities(wf.haar_unitary(dim, rng), np.eye(dim), np.eye(dim))
            wd = wf.work_distribution(ts, trans, e0, e1)
            mean, _ = wf.exp_work_moments(wd, beta)
            assert wf.jarzynski_residual(wd, beta, e0, e1) <= 1e-12 * mean

    @pytest.mark.parametrize("bz", BETA_Z)
    def test_random_unitaries_default_endpoints(self, bases, rng, bz):
        beta = bz / Z
        ts = wf.thermal_populations(bases[0].values, beta)
        for _ in range(1000):
            trans = wf.transition_probabilities(wf.haar_unitary(2, rng), *bases)
            wd = wf.work_distribution(ts, trans, bases[0].values, bases[1].values)
            assert wf.jarzynski_residual(wd, beta, bases[0].values, bases[1].values) <= 1e-9


class TestMinimalWorkFluctuations:
    @pytest.mark.parametrize("bz", BETA_Z)
    def test_adiabatic_variance_is_a_lower_bound(self, bases, rng, bz):
        beta = bz / Z
        ts = wf.thermal_populations(bases[0].values, beta)
        for _ in range(1000):
            trans = wf.transition_probabilities(wf.haar_unitary(2, rng), *bases)
            _, var = wf.exp_work_moments(wf.work_distribution(ts, trans, bases[0].values, bases[1].values), beta)
            assert var >= ADIABATIC_VAR[bz] - 1e-12

    @settings(max_examples=50, deadline=None)
    @given(st.integers(2, 4), st.integers(0, 2**32 - 1), st.floats(0.1, 2.0))
    def test_bound_for_random_non_crossing_systems(self, dim, seed, beta):
        rng = np.random.default_rng(seed)
        e0 = np.sort(rng.normal(size=dim))
        e1 = np.sort(rng.normal(size=dim))
        ts = wf.thermal_populations(e0, beta)
        adiabatic = wf.exp_work_moments(wf.work_distribution(ts, np.eye(dim), e0, e1), beta)[1]
        trans = np.abs(wf.haar_unitary(dim, rng)) ** 2
        var = wf.exp_work_moments(wf.work_distribution(ts, trans, e0, e1), beta)[1]
        assert var >= adiabatic - 1e-12


def test_haar_unitary_is_unitary(rng):
    for dim in (2, 4):
        assert wf.unitarity_error(wf.haar_unitary(dim, rng)) <= 1e-12


def test_joint_table_invariants(bases):
    ts = wf.thermal_populations(bases[0].values, 0.6 / Z)
    table = wf.joint_table(ts, wf.transition_probabilities(np.eye(2), *bases))
    np.testing.assert_allclose(table.initial, ts.populations, atol=1e-15)
    assert table.entries.sum() == pytest.approx(1, abs=1e-12)
    with pytest.raises(ValueError):
        wf.JointProbabilityTable(np.array([[0.5, -0.1], [0.6, 0.0]]))
    assert wf.JointProbabilityTable(np.array([[1.0, -1e-13], [0.0, 0.0]])).entries[0, 1] == 0.0
