"""
Long-running statistical checks of the simulator against the theory and
of the qualitative behaviour under attack. Run with `pytest -m slow`.
"""

import numpy as np
import pytest

from byzfed.algorithms import OnlineFedAlgorithm, PsoFedAlgorithm
from byzfed.core import NetworkSpec
from byzfed.io.config import load_config
from byzfed.io.presets import get_preset
from byzfed.sim import ExperimentPlan, SweepAxis, SweepRow, byzantine_subset, run_experiment, run_replica, sweep
from byzfed.theory import analyze, build_bundle, ms_stability_bound, optimal_stepsize, steady_state_mse


def reference_spec(**overrides) -> NetworkSpec:
    """K=10, D=5, M=1, two clients per round, two Byzantine clients."""
    options = {
        "num_clients": 10,
        "dim": 5,
        "shared_entries": 1,
        "round_size": 2,
        "stepsize": 0.05,
        "input_variance": 0.7,
        "noise_variance": 0.01,
        "byzantine_clients": (0, 1),
        "attack_probability": 0.2,
        "attack_variance": 0.5,
    } | overrides
    return NetworkSpec.homogeneous(**options)


def assert_nondecreasing(rows: list[SweepRow]):
    """Each point may fall below its predecessor by at most two standard errors."""
    for previous, current in zip(rows, rows[1:]):
        slack = 2 * max(previous.sim_test_mse_se, current.sim_test_mse_se)
        assert current.sim_test_mse >= previous.sim_test_mse - slack, (previous, current)


# ------------------------------------------------------------------------------
# THEORY AGAINST SIMULATION


@pytest.mark.slow
async def test_reference_theory_matches_simulation():
    """Test the predicted network MSE against 200 simulated replicas within 10%."""
    (series,) = get_preset("reference").series
    plan = series.plan.model_update(sweep=None)
    theory = analyze(plan.network)
    assert theory.mse is not None

    metrics = await run_experiment(plan)

    assert metrics.replicas_used == 200
    assert abs(theory.mse.total - metrics.network_mse) / theory.mse.total <= 0.10


@pytest.mark.slow
async def test_optimal_stepsize_locates_simulated_minimum():
    """Test that the simulated MSE over a stepsize grid is smallest within one step of mu*."""
    spec = reference_spec(attack_probability=0.25, attack_variance=0.25)
    bundle = build_bundle(spec)
    mu_star = optimal_stepsize(bundle)
    assert mu_star > 0.0

    grid = mu_star * 2.0 ** (np.arange(-5, 5) / 2)
    assert grid[-1] < ms_stability_bound(bundle)
    plan = ExperimentPlan(
        spec=spec,
        iterations=2000,
        replicas=50,
        window=300,
        sweep=SweepAxis(parameter="stepsize", values=tuple(float(mu) for mu in grid)),
    )
    rows = await sweep(plan, include_theory=False)
    best = int(np.argmin([row.sim_network_mse for row in rows]))
    assert abs(best - 5) <= 1


@pytest.mark.slow
def test_optimal_stepsize_at_scale():
    """Test mu* of the K=50 network with five Byzantine clients among five per round."""
    config = load_config(
        '{"network": {"num_clients": 50, "round_size": 5},'
        ' "attack": {"attack_probability": 0.25, "attack_variance": 0.25, "byzantine_count": 5}}'
    )
    mu_star = optimal_stepsize(build_bundle(config.to_plan().spec))
    assert 0.015 <= mu_star <= 0.045


@pytest.mark.slow
def test_stability_bound_at_scale():
    """Test the mean-square bound of the K=100 network with drawn variances."""
    config = load_config('{"network": {"num_clients": 100, "round_size": 5}}')
    bound = ms_stability_bound(build_bundle(config.to_plan().spec))
    assert 0.21 <= bound <= 0.28


# ------------------------------------------------------------------------------
# ATTACK BEHAVIOUR


@pytest.mark.slow
async def test_attack_product_equivalence():
    """Test that twice the Byzantine clients at half the variance give the same network MSE."""
    base = NetworkSpec.homogeneous(
        num_clients=50,
        dim=5,
        shared_entries=1,
        round_size=5,
        stepsize=0.05,
        input_variance=0.7,
        noise_variance=0.01,
        attack_probability=0.2,
    )

    async def network_mse(count: int, variance: float) -> float:
        spec = base.with_byzantine_clients(byzantine_subset(0, 50, count)).model_update(
            attack_variance=variance
        )
        plan = ExperimentPlan(spec=spec, iterations=2000, replicas=40, window=500)
        return (await run_experiment(plan)).network_mse

    few = await network_mse(5, 0.5)
    many = await network_mse(10, 0.25)
    assert abs(few - many) / many <= 0.05


@pytest.mark.slow
async def test_partial_sharing_resilience():
    """Test that sharing one entry trades gradient noise for attack resilience."""
    one = steady_state_mse(build_bundle(reference_spec()), 0.05)
    full = steady_state_mse(build_bundle(reference_spec(shared_entries=5)), 0.05)
    assert one.e_omega < full.e_omega
    assert one.e_phi > full.e_phi

    async def server_mse(algorithm, shared_entries: int) -> float:
        spec = reference_spec(shared_entries=shared_entries, attack_probability=0.5)
        plan = ExperimentPlan(spec=spec, algorithm=algorithm, iterations=2000, replicas=30, window=300)
        return (await run_experiment(plan)).test_mse

    partial = await server_mse(PsoFedAlgorithm(), 1)
    assert partial < await server_mse(PsoFedAlgorithm(), 5)
    assert partial < await server_mse(OnlineFedAlgorithm(), 1)


@pytest.mark.slow
async def test_unbiased_under_attack():
    """Test that the global model averaged over 200 replicas sits on the optimum."""
    # the absolute 1e-2 gate needs the replica-mean spread, roughly
    # sqrt(p_a sigma_B^2 / 200) per entry, well below it
    spec = reference_spec(round_size=5, stepsize=0.02, attack_variance=0.02)
    plan = ExperimentPlan(spec=spec, iterations=3000, replicas=200)
    metrics = await run_experiment(plan)
    assert metrics.replicas_used == 200
    assert np.linalg.norm(metrics.mean_final_model - spec.optimal_model) < 1e-2


@pytest.mark.slow
def test_unbiased_under_reference_attack():
    """Test that at p_a=0.2, sigma_B^2=0.5 every entry of the mean model is within 4 standard errors of w*."""
    spec = reference_spec(round_size=5, stepsize=0.02)
    plan = ExperimentPlan(spec=spec, iterations=3000, replicas=200)
    finals = np.stack([run_replica(plan, index).final_model for index in range(200)])
    bias = finals.mean(axis=0) - spec.optimal_model
    se = finals.std(axis=0, ddof=1) / np.sqrt(200)
    assert np.all(np.abs(bias) < 4 * se)


@pytest.mark.slow
@pytest.mark.parametrize(
    "parameter, values, spec",
    [
        ("attack_variance", (0.0, 0.25, 0.5, 0.75, 1.0), reference_spec()),
        ("attack_probability", (0.2, 0.5, 0.8, 1.0), reference_spec()),
        (
            "byzantine_count",
            (0, 5, 15),
            reference_spec(num_clients=20, round_size=4, byzantine_clients=()),
        ),
    ],
)
async def test_mse_grows_with_the_attack(parameter: str, values: tuple[float, ...], spec: NetworkSpec):
    """Test that a stronger attack never lowers the steady-state test MSE beyond noise."""
    plan = ExperimentPlan(
        spec=spec,
        iterations=1000,
        replicas=20,
        window=200,
        sweep=SweepAxis(parameter=parameter, values=values),
    )
    rows = await sweep(plan, include_theory=False)
    assert_nondecreasing(rows)
    assert rows[-1].sim_test_mse > rows[0].sim_test_mse


# ------------------------------------------------------------------------------
# DEGENERATE EQUIVALENCES


@pytest.mark.unit
def test_full_sharing_is_online_fed():
    """Test that PSO-Fed with M = D reproduces Online-Fed exactly."""
    spec = reference_spec(shared_entries=5)
    pso = ExperimentPlan(spec=spec, iterations=200, replicas=2, window=50)
    online = pso.model_update(algorithm=OnlineFedAlgorithm())
    for index in range(2):
        a, b = run_replica(pso, index), run_replica(online, index)
        assert np.array_equal(a.test_mse, b.test_mse)
        assert np.array_equal(a.network_mse, b.network_mse)
        assert np.array_equal(a.final_model, b.final_model)


@pytest.mark.unit
@pytest.mark.parametrize(
    "attack",
    [
        {"attack_probability": 0.0, "attack_variance": 0.5},
        {"attack_probability": 0.5, "attack_variance": 0.0},
    ],
)
def test_inert_attack_is_no_attack(attack: dict):
    """Test that p_a = 0 or sigma_B^2 = 0 reproduces the attack-free run exactly."""
    inert = ExperimentPlan(spec=reference_spec(**attack), iterations=200, replicas=1, window=50)
    honest = inert.model_update(spec=inert.spec.with_byzantine_clients(()))
    a, b = run_replica(inert, 0), run_replica(honest, 0)
    assert np.array_equal(a.test_mse, b.test_mse)
    assert np.array_equal(a.network_mse, b.network_mse)
