import math

import numpy as np
import pytest

from byzfed.core import (
    AttackSpec,
    ClientSpec,
    ConfigurationError,
    ExperimentErrors,
    FedState,
    NetworkSpec,
    NumericError,
    ReplicaException,
    UserException,
)


@pytest.fixture
def spec() -> NetworkSpec:
    """A K=5, D=5, M=1 network with two Byzantine clients."""
    return NetworkSpec.homogeneous(
        num_clients=5,
        dim=5,
        shared_entries=1,
        round_size=2,
        stepsize=0.05,
        input_variance=0.7,
        noise_variance=0.01,
        byzantine_clients=(3, 1),
        attack_probability=0.2,
        attack_variance=0.5,
    )


@pytest.mark.unit
def test_derived_probabilities(spec: NetworkSpec):
    """Test p_e = M/D, p_c = |S_n|/K and the default true model."""
    assert spec.entry_probability == pytest.approx(0.2)
    assert spec.client_probability == pytest.approx(0.4)
    assert spec.true_model == pytest.approx((1 / math.sqrt(5),) * 5)
    assert np.linalg.norm(spec.optimal_model) == pytest.approx(1.0)


@pytest.mark.unit
def test_attack_view(spec: NetworkSpec):
    """Test that the attack view lists the Byzantine clients in order."""
    assert spec.byzantine_clients == (1, 3)
    assert spec.attack.byzantine_set == (1, 3)
    assert spec.attack.is_active
    assert spec.byzantine_mask.tolist() == [False, True, False, True, False]


@pytest.mark.unit
def test_attack_inactive_cases():
    """Test that a zero probability, a zero variance or no Byzantine client disables the attack."""
    assert not AttackSpec(attack_probability=0.0, attack_variance=1.0, byzantine_set=(0,)).is_active
    assert not AttackSpec(attack_probability=1.0, attack_variance=0.0, byzantine_set=(0,)).is_active
    assert not AttackSpec(attack_probability=1.0, attack_variance=1.0).is_active


@pytest.mark.unit
def test_attack_set_is_sorted():
    """Test that the Byzantine set is normalized to increasing ids."""
    attack = AttackSpec(byzantine_set=(4, 0, 2), num_clients=5)
    assert attack.byzantine_set == (0, 2, 4)


@pytest.mark.unit
def test_shared_entries_above_dim(spec: NetworkSpec):
    """Test that M=6 with D=5 is rejected with the violated constraint."""
    with pytest.raises(ConfigurationError, match="M ≤ D violated"):
        spec.model_update(shared_entries=6)


@pytest.mark.unit
@pytest.mark.parametrize(
    "update, message",
    [
        ({"round_size": 6}, "round_size ≤ K violated"),
        ({"round_size": 0}, "round_size ≤ K violated"),
        ({"stepsize": -0.1}, "stepsize >= 0 violated"),
        ({"stepsize": math.inf}, "stepsize must be finite"),
        ({"attack_probability": 1.5}, "attack_probability <= 1 violated"),
        ({"attack_variance": -1.0}, "attack_variance >= 0 violated"),
        ({"true_model": (1.0, 2.0)}, "true_model must have D=5 entries"),
        ({"dim": 0}, "D >= 1 violated"),
    ],
)
def test_spec_rejections(spec: NetworkSpec, update: dict, message: str):
    """Test that each invalid field names the broken constraint."""
    with pytest.raises(ConfigurationError, match=message):
        spec.model_update(**update)


@pytest.mark.unit
def test_client_rejections():
    """Test that client variances are range checked."""
    with pytest.raises(ConfigurationError, match="input_variance > 0"):
        ClientSpec(input_variance=0.0, noise_variance=0.1)
    with pytest.raises(ConfigurationError, match="noise_variance >= 0"):
        ClientSpec(input_variance=1.0, noise_variance=-0.1)


@pytest.mark.unit
def test_with_byzantine_clients(spec: NetworkSpec):
    """Test that the Byzantine set can be replaced without touching the statistics."""
    honest = spec.with_byzantine_clients(())
    assert honest.byzantine_clients == ()
    assert not honest.attack.is_active
    assert np.array_equal(honest.input_variances, spec.input_variances)

    with pytest.raises(ConfigurationError, match="byzantine clients must be in 0..4"):
        spec.with_byzantine_clients((5,))


@pytest.mark.unit
def test_spec_json_round_trip(spec: NetworkSpec):
    """Test that a spec survives a JSON dump and reload unchanged."""
    assert NetworkSpec.model_validate_json(spec.model_dump_json()) == spec


@pytest.mark.unit
def test_state_rejects_non_finite_models():
    """Test that a NaN in any model is reported as a NumericError."""
    state = FedState.zeros(3, 2)
    assert state.num_clients == 3
    assert state.dim == 2
    local = np.zeros((3, 2))
    local[1, 0] = np.nan
    with pytest.raises(NumericError, match="non-finite"):
        state.model_update(local_models=local)
    with pytest.raises(NumericError, match="shape"):
        FedState(global_model=np.zeros(2), local_models=np.zeros((3, 4)))


@pytest.mark.unit
def test_experiment_errors_accumulate():
    """Test that replica errors are keyed by index and hidden errors are None."""
    errors = ExperimentErrors()
    try:
        raise ReplicaException(3) from UserException("diverged")
    except ReplicaException as e:
        errors.add(e)
    try:
        raise ReplicaException(1) from KeyError("internal")
    except ReplicaException as e:
        errors.add(e)
    errors.add(UserException("no replicas"))

    assert errors.failed_replicas == [1, 3]
    assert errors.replica_errors[3] == ["diverged"]
    assert errors.replica_errors[1] == [None]
    assert errors.experiment_errors == ["no replicas"]
    assert errors.count == 3
    assert errors.any()
