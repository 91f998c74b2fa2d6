import numpy as np
import pytest

from byzfed.core import NetworkSpec, UnsupportedLawError
from byzfed.theory import build_bundle, build_H, build_phi_nu, build_QA, build_QB, build_QC, build_R
from byzfed.theory.blockops import bvec
from byzfed.theory.empirical import (
    MomentEstimate,
    empirical_attack_moment,
    empirical_fourth_moment,
    empirical_input_covariance,
    empirical_operator_moment,
    empirical_phi_nu,
)
from byzfed.theory.moments import MomentLaw, build_omega_delta
from byzfed.theory.operators import aggregation_table, attack_table, combination_table


def network(
    num_clients: int,
    dim: int,
    shared_entries: int,
    round_size: int,
    **kwargs,
) -> NetworkSpec:
    """A homogeneous network with unit input variance unless overridden."""
    options = {"stepsize": 0.05, "input_variance": 1.0, "noise_variance": 0.0} | kwargs
    return NetworkSpec.homogeneous(
        num_clients=num_clients,
        dim=dim,
        shared_entries=shared_entries,
        round_size=round_size,
        **options,
    )


def assert_matches(estimate: MomentEstimate, exact: np.ndarray, *, gate: float = 3.0, share: float = 0.99):
    """
    Entries with spread must lie within `gate` standard errors for at least
    `share` of them; entries without spread must match exactly.
    """
    scores = estimate.z_scores(np.asarray(exact))
    assert np.all(np.isfinite(scores)), "closed form is nonzero where no draw varied"
    assert np.mean(scores <= gate) >= share
    assert np.max(scores) < 8.0


# ------------------------------------------------------------------------------
# SELECTION LAW


@pytest.mark.unit
def test_law_rejects_round_robin():
    """Test that only uniformly drawn masks have closed-form moments."""
    spec = network(3, 3, 1, 1, mask_mode="round-robin")
    with pytest.raises(UnsupportedLawError, match="uniformly drawn masks"):
        MomentLaw.from_spec(spec)


@pytest.mark.unit
def test_law_moments():
    """Test the first and second moments of the selections."""
    law = MomentLaw(num_clients=4, dim=3, shared_entries=2, round_size=2)
    assert law.mean == pytest.approx(0.5 * 2 / 3)
    assert law.distinct_pair == pytest.approx(0.5 * (1 / 3) * (2 / 3) ** 2)
    diagonal = law.same_client_diagonal.reshape(3, 3)
    assert np.diag(diagonal) == pytest.approx([1 / 3] * 3)
    assert diagonal[0, 1] == pytest.approx(0.5 * (2 / 3) * (1 / 2))


@pytest.mark.unit
def test_qb_server_block_hand_value():
    """Test the server-server block of Q_B at K=3, D=3, M=1, |S_n|=1."""
    qb = build_QB(network(3, 3, 1, 1)).toarray()
    block = np.diag(qb[:9, :9]).reshape(3, 3)
    assert np.diag(block) == pytest.approx([2 / 3] * 3)
    assert block[0, 1] == pytest.approx(1 / 3)


@pytest.mark.unit
def test_full_sharing_degenerates():
    """Test M = D and |S_n| = K: every client shares everything every round."""
    spec = network(2, 2, 2, 2)
    qa = build_QA(spec).toarray()
    n = 3
    d2 = 4
    # every client row of A is exactly [I, 0, ...], so A ⊗_b A is deterministic
    a = np.zeros((n * 2, n * 2))
    a[:2, :2] = np.eye(2)
    for k in range(2):
        a[2 * (k + 1) : 2 * (k + 2), :2] = np.eye(2)
    from byzfed.theory.blockops import block_kron

    assert np.allclose(qa, block_kron(a, a, 2))
    qc = build_QC(spec).toarray()
    # the server row of C is (1/K) [0, I, I]
    assert qc[:d2, (n + 1) * d2 : (n + 2) * d2] == pytest.approx(np.eye(d2) / 4)


@pytest.mark.unit
def test_input_covariance():
    """Test R = bdiag{0_D, sigma_1^2 I_D} for K=1, D=2."""
    r = build_R(network(1, 2, 1, 1)).toarray()
    assert np.array_equal(r, np.diag([0.0, 0.0, 1.0, 1.0]))


@pytest.mark.unit
def test_fourth_moment_hand_values():
    """Test E[x^4] = 3 sigma^4 and the cross-client product."""
    h = build_H(network(1, 1, 1, 1)).toarray()
    # pair (client, client) is the last entry of the bvec
    assert h[-1, -1] == pytest.approx(3.0)

    spec = NetworkSpec.homogeneous(
        num_clients=2,
        dim=1,
        shared_entries=1,
        round_size=1,
        stepsize=0.1,
        input_variance=1.0,
        noise_variance=0.0,
    )
    spec = spec.model_update(
        clients=(
            spec.clients[0].model_update(input_variance=2.0),
            spec.clients[1].model_update(input_variance=3.0),
        )
    )
    h = build_H(spec).toarray()
    # pair (client 1, client 2) sits at index 1 * 3 + 2
    assert h[5, 5] == pytest.approx(6.0)
    assert h[7, 7] == pytest.approx(6.0)
    assert h[4, 4] == pytest.approx(12.0)


@pytest.mark.unit
def test_phi_nu_hand_values():
    """Test phi_nu for zero noise and for the single-client example."""
    assert not build_phi_nu(network(2, 2, 1, 1)).any()
    phi = build_phi_nu(network(1, 1, 1, 1, input_variance=2.0, noise_variance=0.5))
    assert phi.tolist() == pytest.approx([0.0, 0.0, 0.0, 1.0])


@pytest.mark.unit
def test_bundle_weights():
    """Test the derived vectors of the bundle."""
    spec = network(3, 2, 1, 2, noise_variance=0.1)
    bundle = build_bundle(spec)
    assert bundle.side == 16 * 4
    assert bundle.num_blocks == 4
    assert np.allclose(bundle.phi, bundle.q_b @ bundle.phi_nu)
    assert np.allclose(bundle.sigma_weight, bundle.q_a.T @ bundle.r_bvec)
    assert not bundle.omega.any()
    assert bundle.psi_initial @ bvec(np.eye(8), 2) == pytest.approx(4 * 1.0)


# ------------------------------------------------------------------------------
# MONTE-CARLO ORACLES


@pytest.mark.parametrize(
    "draws",
    [
        pytest.param(20_000, marks=pytest.mark.integration),
        pytest.param(100_000, marks=pytest.mark.slow),
    ],
)
@pytest.mark.parametrize("shared_entries", [1, 2, 3])
@pytest.mark.parametrize("round_size", [1, 2, 3])
def test_operator_moments_match_monte_carlo(shared_entries: int, round_size: int, draws: int):
    """Test Q_A, Q_B and Q_C entry by entry against sampled schedules at K=3, D=3."""
    spec = network(3, 3, shared_entries, round_size)
    rng = np.random.default_rng(100 * shared_entries + round_size + draws)
    cases = [
        (combination_table(3), build_QA(spec)),
        (aggregation_table(3, round_size), build_QB(spec)),
        (attack_table(3, round_size), build_QC(spec)),
    ]
    for table, exact in cases:
        estimate = empirical_operator_moment(table, spec, rng, draws)
        assert_matches(estimate, exact.toarray())


@pytest.mark.integration
def test_input_covariance_matches_monte_carlo():
    """Test R against the sample covariance of X_n."""
    spec = network(3, 2, 1, 1, input_variance=0.7)
    estimate = empirical_input_covariance(spec, np.random.default_rng(1), 100_000)
    assert_matches(estimate, build_R(spec).toarray())


def distinct_variances(spec: NetworkSpec, variances: tuple[float, ...]) -> NetworkSpec:
    """The same network with one input variance per client."""
    return spec.model_update(
        clients=tuple(
            client.model_update(input_variance=variance)
            for client, variance in zip(spec.clients, variances)
        )
    )


@pytest.mark.integration
def test_fourth_moment_matches_monte_carlo():
    """Test H against E[X X^T ⊗_b X X^T] at K=2, D=2."""
    spec = distinct_variances(network(2, 2, 1, 1), (0.5, 1.2))
    estimate = empirical_fourth_moment(spec, np.random.default_rng(2), 200_000, batch=2048)
    assert_matches(estimate, build_H(spec).toarray())


@pytest.mark.slow
def test_fourth_moment_matches_monte_carlo_at_three_clients():
    """Test H against a million sampled regressors at K=3, D=3."""
    spec = distinct_variances(network(3, 3, 1, 1), (0.5, 0.9, 1.2))
    estimate = empirical_fourth_moment(spec, np.random.default_rng(5), 1_000_000)
    assert_matches(estimate, build_H(spec).toarray())


@pytest.mark.parametrize(
    "num_clients, dim, draws",
    [
        pytest.param(2, 2, 50_000, marks=pytest.mark.integration),
        pytest.param(3, 3, 100_000, marks=pytest.mark.slow),
    ],
)
def test_phi_nu_matches_monte_carlo(num_clients: int, dim: int, draws: int):
    """Test phi_nu against bvec E[X Θ_ν X^T]."""
    spec = network(num_clients, dim, 1, 1, input_variance=0.8, noise_variance=0.3)
    spec = distinct_variances(spec, (0.8, 0.5, 1.1)[:num_clients])
    estimate = empirical_phi_nu(spec, np.random.default_rng(3 + num_clients), draws)
    assert_matches(estimate, build_phi_nu(spec))


@pytest.mark.integration
def test_attack_moment_matches_monte_carlo():
    """Test Ω_δ against the sampled perturbations."""
    spec = network(
        3,
        2,
        1,
        1,
        byzantine_clients=(0, 2),
        attack_probability=0.3,
        attack_variance=0.5,
    )
    estimate = empirical_attack_moment(spec, np.random.default_rng(4), 50_000)
    omega = build_omega_delta(spec)
    diagonal = np.array([omega[((b * 4 + b) * 2 + u) * 2 + u] for b in range(4) for u in range(2)])
    assert_matches(estimate, diagonal)
