import numpy as np
import pytest
from scipy.stats import binom

from oqwalk import models
from oqwalk.asymptotics import GaussianComponent, MixtureModel, clt_mixture
from oqwalk.empirics import (
    EmpiricalLaw1D,
    empirical_as_mixture,
    histogram,
    ldp_estimate,
    mixture_cdf,
    rescale,
    w1_distance,
)
from oqwalk.errors import EmptyEnsembleError, MissingAxisError
from oqwalk.simulate import SimConfig, run
from oqwalk.structure import DiagonalState


def gaussian(mean, var):
    return GaussianComponent([mean], [[var]])


def single(mean=0.0, var=1.0):
    return MixtureModel(components=[(1.0, gaussian(mean, var))], horizon=1)


def planar_model():
    probs = np.array([0.25, 0.25, 0.25, 0.25])
    return models.commuting_diagonal_walk(np.sqrt(probs)[None, :])


class TestRescale:
    def test_one_dimensional_passthrough(self, two_state):
        rho = DiagonalState.single_site(np.diag([0.0, 1.0]).astype(complex))
        ens = run(two_state, rho, SimConfig(steps=16, trajectories=100, seed=0))
        law = rescale(ens)
        expected = np.sort(ens.displacements[:, 0] / 4.0)
        np.testing.assert_allclose(law.samples, expected, atol=0)
        assert law.horizon == 16 and law.count == 100

    def test_zero_steps(self, two_state):
        rho = DiagonalState.single_site(np.diag([0.0, 1.0]).astype(complex))
        ens = run(two_state, rho, SimConfig(steps=0, trajectories=20, seed=0))
        law = rescale(ens)
        assert np.all(law.samples == 0.0)

    def test_axis_projection(self):
        model = planar_model()
        rho = DiagonalState.single_site(np.eye(1, dtype=complex), site=(0, 0))
        ens = run(model, rho, SimConfig(steps=9, trajectories=50, seed=1))
        law = rescale(ens, axis=[1.0, 0.0])
        expected = np.sort(ens.displacements[:, 0] / 3.0)
        np.testing.assert_allclose(law.samples, expected, atol=0)

    def test_axis_required_in_higher_dimension(self):
        model = planar_model()
        rho = DiagonalState.single_site(np.eye(1, dtype=complex), site=(0, 0))
        ens = run(model, rho, SimConfig(steps=4, trajectories=10, seed=2))
        with pytest.raises(MissingAxisError):
            rescale(ens)


class TestMixtureCdf:
    def test_standard_normal_median(self):
        assert mixture_cdf(single(), 0.0) == pytest.approx(0.5, abs=1e-12)

    def test_degenerate_weights_reduce(self):
        mix = MixtureModel(
            components=[(1.0, gaussian(0.0, 1.0)), (0.0, gaussian(5.0, 1.0))],
            horizon=1,
        )
        xs = np.linspace(-3, 3, 11)
        np.testing.assert_allclose(
            mixture_cdf(mix, xs), mixture_cdf(single(), xs), atol=1e-12
        )

    def test_value_between_separated_components(
        self, four_state, four_state_dec, balanced_recurrent
    ):
        mix = clt_mixture(four_state, four_state_dec, balanced_recurrent, 600)
        # between the two component means the CDF sits on the lighter plateau
        assert mixture_cdf(mix, -4.0) == pytest.approx(1 / 3, abs=1e-3)

    def test_dirac_component(self):
        mix = MixtureModel(components=[(1.0, gaussian(0.0, 0.0))], horizon=1)
        assert mixture_cdf(mix, -0.1) == 0.0
        assert mixture_cdf(mix, 0.0) == 1.0
        assert mixture_cdf(mix, 0.1) == 1.0


class TestW1:
    def test_point_mass_against_itself(self):
        emp = EmpiricalLaw1D(samples=np.zeros(64), horizon=1, count=64)
        mix = MixtureModel(components=[(1.0, gaussian(0.0, 0.0))], horizon=1)
        assert w1_distance(emp, mix).w1 == pytest.approx(0.0, abs=1e-12)

    def test_translation_distance(self):
        rng = np.random.default_rng(0)
        samples = rng.standard_normal(50_000)
        emp = EmpiricalLaw1D(samples=samples, horizon=1, count=len(samples))
        report = w1_distance(emp, single(mean=1.0))
        assert report.w1 == pytest.approx(1.0, abs=0.02)
        assert "Fortet-Mourier" in report.note

    def test_self_consistency_for_mixture_draws(self):
        rng = np.random.default_rng(1)
        n = 50_000
        pick = rng.random(n) < 2 / 3
        samples = np.where(
            pick, rng.normal(0.0, 1.0, n), rng.normal(-3.0, np.sqrt(8 / 9), n)
        )
        emp = EmpiricalLaw1D(samples=samples, horizon=9, count=n)
        mix = MixtureModel(
            components=[(2 / 3, gaussian(0.0, 1.0)), (1 / 3, gaussian(-1.0, 8 / 9))],
            horizon=9,
        )
        assert w1_distance(emp, mix).w1 < 0.02

    def test_shift_equivariance(self):
        rng = np.random.default_rng(2)
        samples = rng.standard_normal(500)
        emp = EmpiricalLaw1D(samples=samples, horizon=1, count=500)
        base = w1_distance(emp, single(mean=0.3)).w1
        shifted_emp = EmpiricalLaw1D(samples=samples + 5.0, horizon=1, count=500)
        shifted = w1_distance(shifted_emp, single(mean=5.3)).w1
        assert abs(base - shifted) <= 1e-9

    def test_symmetry_between_empirical_laws(self):
        rng = np.random.default_rng(3)
        a = EmpiricalLaw1D(samples=rng.standard_normal(200), horizon=1, count=200)
        b = EmpiricalLaw1D(samples=rng.standard_normal(300) + 0.4, horizon=1, count=300)
        ab = w1_distance(a, empirical_as_mixture(b)).w1
        ba = w1_distance(b, empirical_as_mixture(a)).w1
        assert ab == pytest.approx(ba, abs=1e-9)

    def test_ks_is_supremum_discrepancy(self):
        emp = EmpiricalLaw1D(samples=np.array([-1.0, 0.0, 1.0]), horizon=1, count=3)
        report = w1_distance(emp, single())
        from scipy.stats import norm

        levels = np.array([1 / 3, 2 / 3, 1.0])
        f = norm.cdf([-1.0, 0.0, 1.0])
        expected = max(
            np.max(np.abs(f - levels)), np.max(np.abs(f - (levels - 1 / 3)))
        )
        assert report.ks == pytest.approx(expected, abs=1e-12)

    def test_convergence_trend(self, four_state, four_state_dec, balanced_recurrent):
        # lighter version of the acceptance run: the rescaled law approaches
        # the predicted mixture as the horizon grows
        reports = {}
        for n in (30, 300):
            ens = run(
                four_state,
                balanced_recurrent,
                SimConfig(steps=n, trajectories=10_000, seed=5, y_stride=n),
            )
            mix = clt_mixture(four_state, four_state_dec, balanced_recurrent, n)
            reports[n] = w1_distance(rescale(ens), mix).w1
        assert reports[300] < reports[30]


class TestLdpEstimate:
    def test_mass_interval_rate_vanishes(self, two_state):
        rho = DiagonalState.single_site(np.diag([0.0, 1.0]).astype(complex))
        ens = run(two_state, rho, SimConfig(steps=400, trajectories=4000, seed=6))
        ((n, rate, bound),) = ldp_estimate([ens], (0.2, 0.5))
        assert n == 400
        assert abs(rate) <= 0.01
        assert bound is None

    def test_empty_interval_sentinel(self, two_state):
        rho = DiagonalState.single_site(np.diag([0.0, 1.0]).astype(complex))
        ens = run(two_state, rho, SimConfig(steps=50, trajectories=100, seed=7))
        ((_, rate, _),) = ldp_estimate([ens], (5.0, 6.0))
        assert rate == float("-inf")

    def test_rare_event_rates_match_enumeration(self, two_state):
        # starting inside the recurrent line the step law is Bernoulli(2/3),
        # so interval probabilities are exact binomial tails
        rho = DiagonalState.single_site(np.diag([0.0, 1.0]).astype(complex))
        horizons = (10, 20, 30)
        trials = 100_000
        ensembles = [
            run(two_state, rho, SimConfig(steps=n, trajectories=trials, seed=8))
            for n in horizons
        ]
        rows = ldp_estimate(ensembles, (0.9, 1.0), rate_bound=np.log(2 / 3))
        for (n, rate, bound), horizon in zip(rows, horizons):
            ks = np.arange(horizon + 1)
            in_set = (2 * ks - horizon) / horizon >= 0.9 - 1e-12
            exact_p = float(binom.pmf(ks[in_set], horizon, 2 / 3).sum())
            exact_rate = np.log(exact_p) / horizon
            sigma = np.sqrt((1 - exact_p) / (exact_p * trials)) / horizon
            assert abs(rate - exact_rate) <= 4 * sigma + 1e-12
            assert bound == pytest.approx(np.log(2 / 3))
        # at the smallest horizon only the extreme path contributes
        assert rows[0][1] == pytest.approx(np.log(2 / 3), abs=0.02)


class TestHistogram:
    def test_uniform_is_flat(self):
        rng = np.random.default_rng(9)
        emp = EmpiricalLaw1D(samples=rng.random(100_000), horizon=1, count=100_000)
        table = histogram(emp, bins=20)
        densities = np.array([row[2] for row in table])
        np.testing.assert_allclose(densities, 1.0, atol=0.08)

    def test_density_integrates_to_one(self):
        rng = np.random.default_rng(10)
        emp = EmpiricalLaw1D(samples=rng.standard_normal(5000), horizon=1, count=5000)
        table = histogram(emp, bins=37)
        total = sum((right - left) * dens for left, right, dens in table)
        assert total == pytest.approx(1.0, abs=1e-9)

    def test_single_sample(self):
        emp = EmpiricalLaw1D(samples=np.array([2.5]), horizon=1, count=1)
        table = histogram(emp, bins=5)
        total = sum((right - left) * dens for left, right, dens in table)
        assert total == pytest.approx(1.0, abs=1e-9)

    def test_empty_rejected(self):
        emp = EmpiricalLaw1D(samples=np.array([]), horizon=1, count=0)
        with pytest.raises(EmptyEnsembleError):
            histogram(emp, bins=5)
