import logging

import pytest

from byzfed.algorithms import SignSgdAlgorithm
from byzfed.contexts import InMemoryContext
from byzfed.core import ConfigurationError, NetworkSpec
from byzfed.sim import ExperimentPlan, SweepAxis, predict, sweep
from byzfed.sim.sweep import BundleCache
from byzfed.theory import TheoryOptions


@pytest.fixture
def spec() -> NetworkSpec:
    """K=3, D=2, M=1 with one Byzantine client."""
    return NetworkSpec.homogeneous(
        num_clients=3,
        dim=2,
        shared_entries=1,
        round_size=2,
        stepsize=0.05,
        input_variance=1.0,
        noise_variance=0.01,
        byzantine_clients=(2,),
        attack_probability=0.5,
        attack_variance=0.3,
    )


@pytest.fixture
def plan(spec: NetworkSpec) -> ExperimentPlan:
    """A two-point stepsize sweep with short replicas."""
    return ExperimentPlan(
        spec=spec,
        iterations=40,
        replicas=2,
        seed=1,
        window=10,
        test_size=5,
        sweep=SweepAxis(parameter="stepsize", values=(0.02, 0.05)),
    )


async def test_sweep_rows(plan: ExperimentPlan):
    """Test that every point gets its simulation and its theory."""
    context = InMemoryContext()
    rows = await sweep(plan, context=context)
    assert [row.sweep_value for row in rows] == [0.02, 0.05]
    assert context.rows == rows
    for row in rows:
        assert row.sweep_param == "stepsize"
        assert row.algorithm == "psofed"
        assert row.replicas == 2
        assert row.seed == 1
        assert row.theory is not None
        assert row.theory.total > 0.0
        assert row.mu_max_ms is not None and row.mu_max_ms > 0.05
        assert row.mu_star is not None and row.mu_star > 0.0
    # the bounds do not depend on the stepsize
    assert rows[0].mu_max_ms == rows[1].mu_max_ms
    assert rows[0].mu_star == rows[1].mu_star
    assert len(context.metrics) == 2
    assert all(metrics.per_term is not None for metrics in context.metrics.values())


async def test_sweep_without_theory(plan: ExperimentPlan):
    """Test that the SignSGD baseline and include_theory=False leave the theory blank."""
    baseline = plan.model_update(algorithm=SignSgdAlgorithm(stepsize=0.01))
    rows = await sweep(baseline)
    assert [row.algorithm for row in rows] == ["signsgd", "signsgd"]
    assert all(row.theory is None and row.mu_star is None for row in rows)

    rows = await sweep(plan, include_theory=False)
    assert all(row.theory is None and row.mu_max_ms is None for row in rows)


async def test_sweep_needs_axis(plan: ExperimentPlan):
    """Test that a plan without a sweep axis is rejected."""
    with pytest.raises(ConfigurationError, match="sweep axis"):
        await sweep(plan.model_update(sweep=None))


@pytest.mark.unit
def test_bundle_cache_ignores_stepsize(spec: NetworkSpec):
    """Test that one bundle serves every stepsize of a network."""
    cache = BundleCache()
    bundle = cache.get(spec)
    assert cache.get(spec.model_update(stepsize=0.2)) is bundle
    assert cache.get(spec.model_update(shared_entries=2)) is not bundle


@pytest.mark.unit
def test_predict_unstable_point(spec: NetworkSpec):
    """Test that an unstable stepsize keeps the bounds and drops the MSE."""
    result = predict(spec.model_update(stepsize=3.0), TheoryOptions())
    assert result is not None
    assert result.mse is None
    assert 0.0 < result.mu_max_ms < 3.0


@pytest.mark.unit
def test_predict_without_closed_form(spec: NetworkSpec, caplog: pytest.LogCaptureFixture):
    """Test that round-robin masks have no prediction and say why."""
    with caplog.at_level(logging.WARNING, logger="byzfed.sim.sweep"):
        assert predict(spec.model_update(mask_mode="round-robin"), TheoryOptions()) is None
    assert 'mask_mode="round-robin" does not follow the uniform selection law' in caplog.text
