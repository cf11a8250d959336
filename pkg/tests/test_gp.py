import math

import numpy as np
import pytest

import budgetwise.gp as gpmod
from budgetwise.gp import (
    FittedGP,
    GPHyperparams,
    UtilitySample,
    fit,
    initial_hyperparams,
    kernel,
    log_marginal_likelihood,
    mean_prior,
    posterior,
    posterior_grid,
)
from budgetwise.strategy import Strategy
from oracles import gp_posterior_dense


def _h(**overrides):
    base = dict(
        gamma_c=0.1, beta_c=0.05, gamma_s=0.3, beta_s=0.02,
        ell_c=30.0, ell_s=15.0, sigma=0.2, noise=1e-4,
    )
    base.update(overrides)
    return GPHyperparams(**base)


def _random_samples(rng, n, max_c=100, max_s=50):
    return [
        UtilitySample(
            Strategy(int(rng.integers(0, max_c)), int(rng.integers(0, max_s))),
            float(rng.uniform(0.1, 0.9)),
        )
        for _ in range(n)
    ]


class TestMeanPrior:
    def test_zero_at_origin(self):
        assert mean_prior(_h(), Strategy(0, 0)) == 0.0

    def test_vanishing_terms(self):
        h = _h(gamma_c=2.0, beta_c=1.0, gamma_s=0.0, beta_s=1.0)
        assert mean_prior(h, Strategy(0, 57)) == 0.0

    def test_log_sum(self):
        h = _h(gamma_c=1.0, beta_c=1.0, gamma_s=1.0, beta_s=1.0)
        assert mean_prior(h, Strategy(1, 3)) == pytest.approx(
            math.log(2) + math.log(4), abs=1e-12
        )

    def test_monotone_when_gammas_nonnegative(self):
        h = _h(gamma_c=0.2, gamma_s=0.4)
        prev = -1.0
        for c in range(0, 200, 7):
            val = mean_prior(h, Strategy(c, 5))
            assert val >= prev
            prev = val


class TestKernel:
    def test_zero_distance_gives_amplitude_squared(self):
        h = _h(sigma=0.7)
        assert kernel(h, Strategy(4, 9), Strategy(4, 9)) == pytest.approx(0.49)

    def test_unit_distances(self):
        h = _h(ell_c=1.0, ell_s=1.0, sigma=1.0)
        assert kernel(h, Strategy(0, 0), Strategy(1, 1)) == pytest.approx(math.exp(-1.0))

    def test_monotone_decay(self):
        h = _h()
        vals = [kernel(h, Strategy(0, 0), Strategy(c, 0)) for c in range(0, 500, 25)]
        assert all(a >= b for a, b in zip(vals, vals[1:]))
        assert vals[-1] < 1e-8

    def test_symmetry(self):
        h = _h()
        rng = np.random.default_rng(1)
        for _ in range(20):
            a = Strategy(int(rng.integers(0, 100)), int(rng.integers(0, 100)))
            b = Strategy(int(rng.integers(0, 100)), int(rng.integers(0, 100)))
            assert kernel(h, a, b) == pytest.approx(kernel(h, b, a), rel=1e-15)


class TestFit:
    def test_requires_two_samples(self):
        with pytest.raises(ValueError, match="at least 2"):
            fit([UtilitySample(Strategy(1, 1), 0.5)], _h())

    def test_recovers_generating_mean_params(self):
        gen = dict(gamma_c=0.1, beta_c=0.05, gamma_s=0.3, beta_s=0.02)

        def surface(c, s):
            return gen["gamma_c"] * math.log(gen["beta_c"] * c + 1) + gen[
                "gamma_s"
            ] * math.log(gen["beta_s"] * s + 1)

        samples = [
            UtilitySample(Strategy(c, s), surface(c, s))
            for c in (0, 50, 100, 150, 200)
            for s in (0, 25, 50, 75, 100)
        ]
        init = GPHyperparams(
            gamma_c=0.1, beta_c=0.01, gamma_s=0.1, beta_s=0.01,
            ell_c=50.0, ell_s=25.0, sigma=0.01, noise=1e-4,
        )
        fitted = fit(samples, init, learning_rate=0.02, iterations=2000)
        h = fitted.hyperparams
        for name, true_val in gen.items():
            rel = abs(getattr(h, name) - true_val) / abs(true_val)
            assert rel < 0.20, f"{name}: {getattr(h, name)} vs {true_val}"

    def test_duplicate_samples_survive_via_jitter(self):
        dup = [
            UtilitySample(Strategy(5, 5), 0.5),
            UtilitySample(Strategy(5, 5), 0.5),
            UtilitySample(Strategy(20, 3), 0.6),
        ]
        init = _h(noise=0.0)
        fitted = fit(dup, init, iterations=5)
        assert isinstance(fitted, FittedGP)

    def test_deterministic(self):
        rng = np.random.default_rng(3)
        samples = _random_samples(rng, 12)
        a = fit(samples, _h(), iterations=50, seed=9)
        b = fit(samples, _h(), iterations=50, seed=9)
        assert a.hyperparams == b.hyperparams


class TestPosterior:
    def test_noiseless_interpolation(self):
        samples = [
            UtilitySample(Strategy(0, 0), 0.2),
            UtilitySample(Strategy(40, 10), 0.5),
            UtilitySample(Strategy(80, 30), 0.7),
        ]
        fitted = fit(samples, _h(noise=1e-12), iterations=0)
        for s in samples:
            mean, var = posterior(fitted, s.strategy)
            assert mean == pytest.approx(s.score, abs=1e-6)
            assert var <= 1e-6

    def test_reverts_to_prior_far_away(self):
        h = _h(ell_c=5.0, ell_s=5.0)
        samples = [
            UtilitySample(Strategy(0, 0), 0.2),
            UtilitySample(Strategy(10, 2), 0.4),
        ]
        fitted = fit(samples, h, iterations=0)
        far = Strategy(5000, 3000)
        mean, var = posterior(fitted, far)
        assert mean == pytest.approx(mean_prior(fitted.hyperparams, far), abs=1e-9)
        assert var == pytest.approx(fitted.hyperparams.sigma**2, rel=1e-9)

    def test_matches_dense_conditioning_oracle(self):
        rng = np.random.default_rng(17)
        for _ in range(25):
            samples = _random_samples(rng, 5)
            fitted = fit(samples, _h(), iterations=0)
            h = fitted.hyperparams
            train_c = [s.strategy.c for s in samples]
            train_s = [s.strategy.s for s in samples]
            y = np.array([s.score for s in samples])
            q = Strategy(int(rng.integers(0, 120)), int(rng.integers(0, 60)))
            got_m, got_v = posterior(fitted, q)
            exp_m, exp_v = gp_posterior_dense(
                h, train_c, train_s, y, q.c, q.s, gpmod.JITTER_FLOOR + fitted._jitter
            )
            assert got_m == pytest.approx(exp_m, abs=1e-8)
            assert got_v == pytest.approx(max(exp_v, 0.0), abs=1e-8)

    def test_variance_bounded_by_prior(self):
        rng = np.random.default_rng(23)
        samples = _random_samples(rng, 10)
        fitted = fit(samples, _h(), iterations=30)
        h = fitted.hyperparams
        queries = [Strategy(int(rng.integers(0, 200)), int(rng.integers(0, 100))) for _ in range(50)]
        _, variances = posterior_grid(fitted, queries)
        assert np.all(variances <= h.sigma**2 + h.noise + 1e-9)

    def test_grid_matches_pointwise(self):
        rng = np.random.default_rng(5)
        samples = _random_samples(rng, 8)
        fitted = fit(samples, _h(), iterations=20)
        queries = [Strategy(int(rng.integers(0, 150)), int(rng.integers(0, 80))) for _ in range(30)]
        means, variances = posterior_grid(fitted, queries)
        for i, q in enumerate(queries):
            m, v = posterior(fitted, q)
            assert means[i] == pytest.approx(m, abs=1e-12)
            assert variances[i] == pytest.approx(v, abs=1e-12)

    def test_grid_of_one(self):
        samples = [UtilitySample(Strategy(0, 0), 0.3), UtilitySample(Strategy(9, 4), 0.6)]
        fitted = fit(samples, _h(), iterations=5)
        q = Strategy(4, 2)
        means, variances = posterior_grid(fitted, [q])
        assert (means[0], variances[0]) == posterior(fitted, q)


class TestGradientsAndLikelihood:
    def test_analytic_gradients_match_finite_differences(self):
        rng = np.random.default_rng(11)
        for _ in range(20):
            n = int(rng.integers(4, 9))
            c = rng.integers(0, 100, n).astype(float)
            s = rng.integers(0, 60, n).astype(float)
            y = rng.uniform(0.1, 0.9, n)
            u = np.array([
                rng.uniform(-0.3, 0.5),
                rng.uniform(-0.3, 0.5),
                rng.uniform(-4.5, -1.5),
                rng.uniform(-4.5, -1.5),
                rng.uniform(1.5, 4.0),
                rng.uniform(1.0, 3.5),
                rng.uniform(-2.5, -0.5),
                rng.uniform(-8.0, -4.0),
            ])
            _, grad = gpmod._log_marginal_and_grad(u, c, s, y)
            for i in range(8):
                e = np.zeros(8)
                e[i] = 1e-6
                lp, _ = gpmod._log_marginal_and_grad(u + e, c, s, y)
                lm, _ = gpmod._log_marginal_and_grad(u - e, c, s, y)
                fd = (lp - lm) / 2e-6
                assert abs(grad[i] - fd) <= 1e-4 * max(1.0, abs(fd))

    def test_likelihood_mostly_non_decreasing(self):
        rng = np.random.default_rng(29)
        improved = 0
        total = 20
        for _ in range(total):
            samples = _random_samples(rng, 10)
            init = initial_hyperparams(samples)
            before = log_marginal_likelihood(init, samples)
            after_h = fit(samples, init, iterations=50).hyperparams
            after = log_marginal_likelihood(after_h, samples)
            if after >= before - 1e-9:
                improved += 1
        assert improved >= 0.9 * total


class TestSerialization:
    def test_round_trip_field_names(self):
        h = _h()
        d = h.to_dict()
        assert set(d) == {
            "gamma_c", "beta_c", "gamma_s", "beta_s", "ell_c", "ell_s", "sigma", "noise",
        }
        assert GPHyperparams.from_dict(d) == h

    def test_invariant_enforcement(self):
        with pytest.raises(ValueError):
            _h(sigma=0.0)
        with pytest.raises(ValueError):
            _h(noise=-1e-9)
        with pytest.raises(ValueError):
            _h(ell_c=-2.0)
