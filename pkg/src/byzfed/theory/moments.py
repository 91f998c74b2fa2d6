# byzfed/theory/moments.py
"""
Closed-form second-order moments of the extended recursion.

All matrices act on bvec'd ((K+1)D x (K+1)D) matrices, so their side is
(K+1)^2 D^2. They are block sparse: Q_A, Q_B, Q_C and K only couple entry z
of a D^2 block to entry z of another block, H only mixes within the
(client k, client k) blocks.

Selections follow the uniform law: client k participates with probability
p_c (exactly round_size clients per round) and shares a uniformly drawn set
of M of its D entries.
"""

import logging
from typing import ClassVar

import numpy as np
from pydantic import ConfigDict, Field
from scipy import sparse

from ..adversary.poisoning import attack_second_moment
from ..core.error import UnsupportedLawError
from ..core.spec import NetworkSpec
from ..utils.arrays import FloatArray
from ..utils.immutable import ImmutableBaseModel
from .blockops import block_diagonal_bvec
from .operators import (
    AffineEntry,
    OperatorTable,
    aggregation_table,
    attack_table,
    combination_table,
)

logger = logging.getLogger(__name__)


class MomentLaw(ImmutableBaseModel):
    """
    First and second moments of the diagonals of P_k = a_k S_k.
    """

    num_clients: int
    dim: int
    shared_entries: int
    round_size: int

    @classmethod
    def from_spec(cls, spec: NetworkSpec) -> "MomentLaw":
        if spec.mask_mode != "uniform":
            raise UnsupportedLawError(
                f'closed-form moments need uniformly drawn masks, got mask_mode="{spec.mask_mode}"'
            )
        return cls(
            num_clients=spec.num_clients,
            dim=spec.dim,
            shared_entries=spec.shared_entries,
            round_size=spec.round_size,
        )

    @property
    def entry_probability(self) -> float:
        return self.shared_entries / self.dim

    @property
    def client_probability(self) -> float:
        return self.round_size / self.num_clients

    @property
    def mean(self) -> float:
        """E[P_k[u]]."""
        return self.client_probability * self.entry_probability

    @property
    def distinct_pair(self) -> float:
        """E[P_k[u] P_j[v]] for k != j."""
        if self.num_clients == 1:
            return 0.0
        pair = (self.round_size - 1) / (self.num_clients - 1)
        return self.client_probability * pair * self.entry_probability**2

    @property
    def same_client_diagonal(self) -> np.ndarray:
        """E[P_k[u] P_k[v]] at z = u * D + v."""
        same = np.eye(self.dim, dtype=np.bool_).reshape(-1)
        if self.dim == 1:
            off = 0.0
        else:
            off = self.entry_probability * (self.shared_entries - 1) / (self.dim - 1)
        return self.client_probability * np.where(same, self.entry_probability, off)

    def pair_moment(self, x: AffineEntry, y: AffineEntry) -> tuple[float, float]:
        """
        E[X ⊗ Y] for diagonal blocks X, Y is diagonal with entries
        c0 + c1 * same_client_diagonal.
        """
        sx = x.total(self.num_clients)
        sy = y.total(self.num_clients)
        sxy = x.cross(y, self.num_clients)
        c0 = (
            x.alpha * y.alpha
            + self.mean * (x.alpha * sy + y.alpha * sx)
            + self.distinct_pair * (sx * sy - sxy)
        )
        return c0, sxy


def expected_block_kron(table: OperatorTable, law: MomentLaw) -> sparse.csr_matrix:
    """
    E[T ⊗_b T] for an operator table whose selections follow `law`.
    """
    n = len(table)
    d2 = law.dim * law.dim
    pair_rows: list[int] = []
    pair_cols: list[int] = []
    constants: list[float] = []
    same_client: list[float] = []
    for i, row_i in enumerate(table):
        for l, row_l in enumerate(table):
            for x in row_i:
                for y in row_l:
                    c0, c1 = law.pair_moment(x, y)
                    if c0 == 0.0 and c1 == 0.0:
                        continue
                    pair_rows.append(i * n + l)
                    pair_cols.append(x.col * n + y.col)
                    constants.append(c0)
                    same_client.append(c1)

    z = np.arange(d2)
    rows = np.asarray(pair_rows, dtype=np.int64)[:, None] * d2 + z[None, :]
    cols = np.asarray(pair_cols, dtype=np.int64)[:, None] * d2 + z[None, :]
    data = (
        np.asarray(constants)[:, None]
        + np.asarray(same_client)[:, None] * law.same_client_diagonal[None, :]
    )
    side = n * n * d2
    matrix = sparse.coo_matrix((data.ravel(), (rows.ravel(), cols.ravel())), shape=(side, side)).tocsr()
    matrix.eliminate_zeros()
    return matrix


# ------------------------------------------------------------------------------
# EXPECTATION MATRICES


def build_R(spec: NetworkSpec) -> sparse.csr_matrix:
    """bdiag{0, sigma_1^2 I, ..., sigma_K^2 I}."""
    diagonal = np.concatenate([np.zeros(spec.dim), np.repeat(spec.input_variances, spec.dim)])
    return sparse.diags(diagonal, format="csr")


def build_QA(spec: NetworkSpec) -> sparse.csr_matrix:
    return expected_block_kron(combination_table(spec.num_clients), MomentLaw.from_spec(spec))


def build_QB(spec: NetworkSpec) -> sparse.csr_matrix:
    return expected_block_kron(
        aggregation_table(spec.num_clients, spec.round_size), MomentLaw.from_spec(spec)
    )


def build_QC(spec: NetworkSpec) -> sparse.csr_matrix:
    return expected_block_kron(
        attack_table(spec.num_clients, spec.round_size), MomentLaw.from_spec(spec)
    )


def _fourth_moment_template(dim: int) -> sparse.coo_matrix:
    """
    E[x x^T ⊗ x x^T] / sigma^4 for x ~ N(0, sigma^2 I_D): identity plus the
    commutation matrix plus vec(I) vec(I)^T.
    """
    u, v = np.divmod(np.arange(dim * dim), dim)
    identity = sparse.identity(dim * dim, format="coo")
    swap = sparse.coo_matrix((np.ones(dim * dim), (u * dim + v, v * dim + u)), shape=(dim * dim,) * 2)
    trace = np.flatnonzero(u == v)
    outer = sparse.coo_matrix(
        (np.ones(dim * dim), (np.repeat(trace, dim), np.tile(trace, dim))), shape=(dim * dim,) * 2
    )
    return (identity + swap + outer).tocoo()


def build_H(spec: NetworkSpec) -> sparse.csr_matrix:
    """
    E[X X^T ⊗_b X X^T]. Blocks of distinct clients i, l are
    sigma_i^2 sigma_l^2 I; the block of client k with itself follows from
    the Gaussian fourth moments.
    """
    K, d = spec.num_clients, spec.dim
    n, d2 = K + 1, d * d
    variances = spec.input_variances
    z = np.arange(d2)

    i, l = np.meshgrid(np.arange(K), np.arange(K), indexing="ij")
    distinct = i != l
    pairs = ((i[distinct] + 1) * n + (l[distinct] + 1)).astype(np.int64)
    cross_rows = (pairs[:, None] * d2 + z[None, :]).ravel()
    cross_data = np.repeat(variances[i[distinct]] * variances[l[distinct]], d2)

    template = _fourth_moment_template(d)
    own_rows, own_cols, own_data = [], [], []
    for k in range(K):
        offset = ((k + 1) * n + (k + 1)) * d2
        own_rows.append(template.row + offset)
        own_cols.append(template.col + offset)
        own_data.append(template.data * variances[k] ** 2)

    side = n * n * d2
    rows = np.concatenate([cross_rows, *own_rows])
    cols = np.concatenate([cross_rows, *own_cols])
    data = np.concatenate([cross_data, *own_data])
    return sparse.coo_matrix((data, (rows, cols)), shape=(side, side)).tocsr()


def pair_variances(spec: NetworkSpec) -> np.ndarray:
    """r_i + r_l for every block pair, with r_0 = 0 for the server."""
    r = np.concatenate([[0.0], spec.input_variances])
    return (r[:, None] + r[None, :]).reshape(-1)


def build_K(spec: NetworkSpec) -> sparse.csr_matrix:
    """(I ⊗_b R) + (R ⊗_b I), which is diagonal."""
    d2 = spec.dim * spec.dim
    return sparse.diags(np.repeat(pair_variances(spec), d2), format="csr")


def _client_block_bvec(spec: NetworkSpec, client_values: np.ndarray) -> np.ndarray:
    diagonals = np.zeros((spec.num_clients + 1, spec.dim))
    diagonals[1:] = np.asarray(client_values, dtype=np.float64)[:, None]
    return block_diagonal_bvec(diagonals)


def build_r_bvec(spec: NetworkSpec) -> np.ndarray:
    return _client_block_bvec(spec, spec.input_variances)


def build_phi_nu(spec: NetworkSpec) -> np.ndarray:
    """bvec{E[X Θ_ν X^T]} = bvec bdiag{0, sigma_nu_k^2 sigma_k^2 I}."""
    return _client_block_bvec(spec, spec.input_variances * spec.noise_variances)


def build_omega_delta(spec: NetworkSpec) -> np.ndarray:
    """bvec Ω_δ = bvec bdiag{0, beta_k p_a sigma_B^2 I}."""
    diagonal = attack_second_moment(spec.attack, spec.num_clients, spec.dim)
    return block_diagonal_bvec(diagonal.reshape(spec.num_clients + 1, spec.dim))


def _helper_diagonals(law: MomentLaw) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    d2 = law.dim * law.dim
    s = np.full(d2, law.mean)
    s1 = law.same_client_diagonal
    s2 = np.full(d2, law.distinct_pair)
    if law.num_clients > 1:
        # the tabulated distinct-client factor scales the same-client law
        tabulated = (law.round_size - 1) / (law.num_clients - 1) * s1
        deviation = float(np.max(np.abs(tabulated - s2)))
        if deviation > 0:
            logger.debug(
                "distinct-client selection moments deviate from the same-client table by up to %.3g",
                deviation,
            )
    return s, s1, s2


class KronBundle(ImmutableBaseModel):
    """
    Every stepsize-independent quantity the mean-square analysis needs.
    Immutable, so it can be shared across threads.
    """

    model_config: ClassVar[ConfigDict] = ConfigDict(arbitrary_types_allowed=True)

    num_clients: int
    dim: int
    q_a: sparse.csr_matrix = Field(description="E[A ⊗_b A].")
    q_b: sparse.csr_matrix = Field(description="E[B ⊗_b B].")
    q_c: sparse.csr_matrix = Field(description="E[C ⊗_b C].")
    h: sparse.csr_matrix = Field(description="E[X X^T ⊗_b X X^T].")
    r_block: sparse.csr_matrix = Field(description="bdiag{0, R_1, ..., R_K}.")
    k_mat: sparse.csr_matrix = Field(description="(I ⊗_b R) + (R ⊗_b I).")
    s_kron: FloatArray = Field(description="Diagonal of E[P_k ⊗ I] restricted to one D^2 block.")
    s1_kron: FloatArray = Field(description="Diagonal of E[P_k ⊗ P_k].")
    s2_kron: FloatArray = Field(description="Diagonal of E[P_k ⊗ P_j], k != j.")
    r_bvec: FloatArray
    phi_nu: FloatArray
    phi: FloatArray = Field(description="Q_B phi_nu.")
    omega_delta: FloatArray
    omega: FloatArray = Field(description="Q_C bvec Ω_δ.")
    sigma_weight: FloatArray = Field(description="Q_A^T bvec R, the network-MSE weighting.")
    theta_nu: FloatArray = Field(description="Noise variances of the K clients.")
    psi_initial: FloatArray = Field(description="bvec(w*_e w*_e^T), the initial deviation moment.")

    @property
    def num_blocks(self) -> int:
        return self.num_clients + 1

    @property
    def side(self) -> int:
        return self.q_a.shape[0]


def build_bundle(spec: NetworkSpec) -> KronBundle:
    law = MomentLaw.from_spec(spec)
    q_a = build_QA(spec)
    q_b = build_QB(spec)
    q_c = build_QC(spec)
    s, s1, s2 = _helper_diagonals(law)
    r_bvec = build_r_bvec(spec)
    phi_nu = build_phi_nu(spec)
    omega_delta = build_omega_delta(spec)
    n = spec.num_clients + 1
    psi_initial = np.tile(np.outer(spec.optimal_model, spec.optimal_model).reshape(-1), n * n)

    bundle = KronBundle(
        num_clients=spec.num_clients,
        dim=spec.dim,
        q_a=q_a,
        q_b=q_b,
        q_c=q_c,
        h=build_H(spec),
        r_block=build_R(spec),
        k_mat=build_K(spec),
        s_kron=s,
        s1_kron=s1,
        s2_kron=s2,
        r_bvec=r_bvec,
        phi_nu=phi_nu,
        phi=q_b @ phi_nu,
        omega_delta=omega_delta,
        omega=q_c @ omega_delta,
        sigma_weight=q_a.T @ r_bvec,
        theta_nu=spec.noise_variances,
        psi_initial=psi_initial,
    )
    logger.info(
        "Built moment bundle for K=%d, D=%d: side %d, nnz Q_A=%d Q_B=%d H=%d",
        spec.num_clients,
        spec.dim,
        bundle.side,
        q_a.nnz,
        q_b.nnz,
        bundle.h.nnz,
    )
    return bundle


__all__ = [
    "KronBundle",
    "MomentLaw",
    "build_H",
    "build_K",
    "build_QA",
    "build_QB",
    "build_QC",
    "build_R",
    "build_bundle",
    "build_omega_delta",
    "build_phi_nu",
    "build_r_bvec",
    "expected_block_kron",
    "pair_variances",
]
