import math

import numpy as np
import pytest

from varsmile import (
    ConstantEta,
    ConstantSigma,
    LsvModel,
    McConfig,
    discrete_rv_diagnostic,
    forward_variance_limit,
    mc_price,
    mc_smile,
    simulate_realized_variance,
)


def small_cfg(**kw):
    base = dict(n_paths=4000, n_steps=100, seed=11, maturity=1.0 / 12.0)
    base.update(kw)
    return McConfig(**base)


class TestConfig:
    def test_validation(self):
        with pytest.raises(ValueError):
            McConfig(n_paths=1)
        with pytest.raises(ValueError):
            McConfig(n_paths=101, antithetic=True)
        with pytest.raises(ValueError):
            McConfig(n_steps=0)
        with pytest.raises(ValueError):
            McConfig(maturity=0.0)
        with pytest.raises(ValueError):
            McConfig(scheme="euler")

    def test_streams(self):
        assert McConfig(n_paths=100).n_streams == 50
        assert McConfig(n_paths=100, antithetic=False).n_streams == 100


class TestDeterminism:
    def test_same_seed_bitwise(self, tanh_model):
        cfg = small_cfg()
        a = simulate_realized_variance(tanh_model, cfg)
        b = simulate_realized_variance(tanh_model, cfg)
        assert np.array_equal(a, b)

    def test_worker_count_invariance(self, tanh_model):
        cfg = small_cfg(n_paths=6000)
        a = simulate_realized_variance(tanh_model, cfg, n_workers=1)
        b = simulate_realized_variance(tanh_model, cfg, n_workers=3)
        c = simulate_realized_variance(tanh_model, cfg, n_workers=7)
        assert np.array_equal(a, b)
        assert np.array_equal(a, c)

    def test_seed_changes_draw(self, tanh_model):
        a = simulate_realized_variance(tanh_model, small_cfg(seed=1))
        b = simulate_realized_variance(tanh_model, small_cfg(seed=2))
        assert not np.array_equal(a, b)


class TestPricing:
    def test_pathwise_parity(self, tanh_model):
        cfg = small_cfg()
        rv = simulate_realized_variance(tanh_model, cfg)
        k = 0.1
        call_pay = np.maximum(rv - k, 0.0)
        put_pay = np.maximum(k - rv, 0.0)
        assert np.array_equal(call_pay - put_pay, rv - k)

    def test_estimate_parity(self, tanh_model):
        cfg = small_cfg()
        call, put, fwd = mc_price(tanh_model, 0.1, cfg)
        disc = math.exp(-tanh_model.r * cfg.maturity)
        assert abs(call.mean - put.mean - disc * (fwd.mean - 0.1)) < 1e-15

    def test_zero_strike(self, tanh_model):
        cfg = small_cfg()
        call, put, fwd = mc_price(tanh_model, 0.0, cfg)
        assert put.mean == 0.0
        assert abs(call.mean - math.exp(-tanh_model.r * cfg.maturity) * fwd.mean) < 1e-15

    def test_frozen_variance_limit(self):
        # near-frozen vol-of-vol pins the realized variance at eta0^2 V0
        m = LsvModel(s0=1.0, v0=0.04, rho=0.0, eta=ConstantEta(2.0), sigma=ConstantSigma(1e-6))
        cfg = small_cfg(n_paths=2000)
        _, _, fwd = mc_price(m, 0.16, cfg)
        assert abs(fwd.mean - 0.16) <= max(3.0 * fwd.stderr, 1e-7)

    def test_estimate_metadata(self, tanh_model):
        cfg = small_cfg()
        _, _, fwd = mc_price(tanh_model, 0.1, cfg)
        assert fwd.seed == cfg.seed
        assert fwd.config == cfg
        assert fwd.n_effective == cfg.n_paths // 2

    def test_stderr_scaling(self, tanh_model):
        # 1/sqrt(n) within 20 percent across a 16x range
        ses = []
        for n in (10_000, 40_000, 160_000):
            cfg = McConfig(n_paths=n, n_steps=20, seed=5, maturity=1.0 / 12.0)
            call, _, _ = mc_price(tanh_model, 0.1, cfg)
            ses.append(call.stderr)
        assert abs(ses[0] / ses[1] - 2.0) < 0.4
        assert abs(ses[1] / ses[2] - 2.0) < 0.4

    def test_variance_drift_moves_forward(self):
        # eta == 1 and constant drift mu: E[RV] = V0 (e^{mu T} - 1)/(mu T)
        mu, t = 0.5, 1.0 / 12.0
        expect = 0.1 * (math.exp(mu * t) - 1.0) / (mu * t)
        for drift in (mu, lambda v: np.full_like(np.asarray(v, dtype=float), mu)):
            m = LsvModel(
                s0=1.0, v0=0.1, rho=0.0, eta=ConstantEta(1.0),
                sigma=ConstantSigma(2.0), mu=drift,
            )
            cfg = McConfig(n_paths=40_000, n_steps=100, seed=31, maturity=t)
            _, _, fwd = mc_price(m, 0.1, cfg)
            assert abs(fwd.mean - expect) <= 3.0 * fwd.stderr

    def test_flat_leverage_forward_near_limit(self):
        # eta == 1: V is a martingale and the scheme preserves that exactly,
        # so the forward sits at V0 up to sampling error
        m = LsvModel(s0=1.0, v0=0.1, rho=0.0, eta=ConstantEta(1.0), sigma=ConstantSigma(2.0))
        cfg = McConfig(n_paths=40_000, n_steps=100, seed=21, maturity=1.0 / 12.0)
        _, _, fwd = mc_price(m, 0.1, cfg)
        assert abs(fwd.mean - 0.1) <= 3.0 * fwd.stderr

    def test_weak_convergence_in_steps(self, tanh_model):
        cfg1 = McConfig(n_paths=20_000, n_steps=100, seed=9, maturity=1.0 / 12.0)
        cfg2 = McConfig(n_paths=20_000, n_steps=200, seed=9, maturity=1.0 / 12.0)
        _, _, f1 = mc_price(tanh_model, 0.1, cfg1)
        _, _, f2 = mc_price(tanh_model, 0.1, cfg2)
        assert abs(f1.mean - f2.mean) <= 2.0 * max(f1.stderr, f2.stderr) + 5e-5


class TestSmile:
    def test_smile_rows(self, tanh_model):
        cfg = small_cfg(n_paths=20_000)
        f0 = forward_variance_limit(tanh_model)
        strikes = [f0 * math.exp(x) for x in (-0.3, 0.0, 0.3)]
        sm = mc_smile(tanh_model, strikes, 1.0 / 252.0, cfg)
        assert len(sm.rows) == 3
        assert sm.maturity == 1.0 / 252.0
        xs = [r.x for r in sm]
        assert abs(xs[0] + 0.3) < 1e-12 and abs(xs[2] - 0.3) < 1e-12
        assert all(math.isfinite(r.ivol) or not r.reliable for r in sm)

    def test_deep_strike_unreliable(self, tanh_model):
        cfg = small_cfg(n_paths=2000)
        f0 = forward_variance_limit(tanh_model)
        sm = mc_smile(tanh_model, [f0 * math.exp(2.5)], 1.0 / 252.0, cfg)
        assert not sm.rows[0].reliable

    def test_rejects_bad_strikes(self, tanh_model):
        with pytest.raises(ValueError):
            mc_smile(tanh_model, [0.1, -0.1], 1.0 / 12.0, small_cfg())


class TestDiscreteDiagnostic:
    def test_divisibility(self, tanh_model):
        with pytest.raises(ValueError):
            discrete_rv_diagnostic(tanh_model, small_cfg(n_steps=100), 7)

    def test_full_resolution_gap_small(self, tanh_model):
        cfg = McConfig(n_paths=2000, n_steps=2000, seed=3, maturity=1.0 / 12.0)
        diag = discrete_rv_diagnostic(tanh_model, cfg, 2000)
        assert abs(diag.mean_relative_gap) <= 0.05

    def test_single_interval_tiny_maturity(self, tanh_model):
        cfg = McConfig(n_paths=4000, n_steps=8, seed=3, maturity=1e-4)
        diag = discrete_rv_diagnostic(tanh_model, cfg, 1)
        # one-increment square: unbiased-ish but noisy; mean gap stays moderate
        assert abs(diag.mean_relative_gap) <= 0.2
        assert diag.discrete.shape == diag.continuous.shape

    def test_deterministic(self, tanh_model):
        cfg = small_cfg(n_steps=100)
        a = discrete_rv_diagnostic(tanh_model, cfg, 10)
        b = discrete_rv_diagnostic(tanh_model, cfg, 10)
        assert np.array_equal(a.discrete, b.discrete)
        assert np.array_equal(a.continuous, b.continuous)


def test_positivity_by_construction(tanh_model):
    rv = simulate_realized_variance(tanh_model, small_cfg())
    assert np.all(rv > 0)
