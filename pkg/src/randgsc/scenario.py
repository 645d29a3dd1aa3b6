"""Simulation scenario: disturbance covariance, signal placement, training data.

The disturbance covariance is kept in factored form

    Sigma = Q diag(lam) Q^T + sigma2 * I

and is never assembled as an N x N matrix.

Randomness is drawn from :class:`RngStream` objects identified by a master
seed and an integer path.  Within one Monte Carlo trial the path is
``(experiment_id, trial_index, substream)`` with ``substream`` one of the
constants below, so every trial can be regenerated in isolation.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .linalg import orthonormal_complement, qr_factor

# substream tags, fixed order
COVARIANCE = 0
EIGENVALUES = 1
SOI = 2
DATA = 3
OMEGA = 4


@dataclass(frozen=True)
class RngStream:
    """Counter-style random stream derived from ``(master_seed, path)``.

    Streams with different paths are independent; the same seed and path
    always yield the same sequence.
    """

    master_seed: int
    path: tuple = ()

    def __post_init__(self):
        if self.master_seed < 0:
            raise ValueError("master_seed must be nonnegative")
        if any(int(p) < 0 for p in self.path):
            raise ValueError("stream path entries must be nonnegative")
        object.__setattr__(self, "path", tuple(int(p) for p in self.path))

    def child(self, *keys: int) -> "RngStream":
        return RngStream(self.master_seed, self.path + tuple(keys))

    def generator(self) -> np.random.Generator:
        seq = np.random.SeedSequence(self.master_seed, spawn_key=self.path)
        return np.random.Generator(np.random.PCG64(seq))


@dataclass(frozen=True)
class ScenarioSpec:
    n: int = 100
    j: int = 10
    k: int = 20
    theta_deg: float = 75.0
    eig_db_min: float = 15.0
    eig_db_max: float = 25.0
    sigma2: float = 1.0

    def __post_init__(self):
        if not 1 <= self.j < self.n:
            raise ValueError(f"need 1 <= J < N, got J={self.j}, N={self.n}")
        if not self.j <= self.k < self.n:
            raise ValueError(f"need J <= K < N, got J={self.j}, K={self.k}, N={self.n}")
        if not 0.0 <= self.theta_deg <= 90.0:
            raise ValueError(f"theta_deg must be in [0,90], got {self.theta_deg}")
        if self.eig_db_min > self.eig_db_max:
            raise ValueError("eig_db_min must not exceed eig_db_max")
        if not self.sigma2 > 0:
            raise ValueError("sigma2 must be positive")


@dataclass(frozen=True)
class CovarianceModel:
    """Sigma = q diag(lam) q^T + sigma2 I.

    ``lam`` may contain zeros (white-noise special case); Sigma stays
    positive definite as long as ``sigma2 > 0``.
    """

    q: np.ndarray
    lam: np.ndarray
    sigma2: float = 1.0

    def __post_init__(self):
        q = np.atleast_2d(np.asarray(self.q, dtype=np.float64))
        lam = np.asarray(self.lam, dtype=np.float64).ravel()
        if q.shape[1] != lam.size:
            raise ValueError(f"q has {q.shape[1]} columns but lam has {lam.size} entries")
        if np.any(lam < 0):
            raise ValueError("eigenvalues must be nonnegative")
        if not self.sigma2 > 0:
            raise ValueError("sigma2 must be positive")
        object.__setattr__(self, "q", q)
        object.__setattr__(self, "lam", lam)
        object.__setattr__(self, "sigma2", float(self.sigma2))

    @property
    def n(self) -> int:
        return self.q.shape[0]

    @property
    def g(self) -> np.ndarray:
        """Low-rank factor G = Q diag(lam)^(1/2), so that G G^T = Q diag(lam) Q^T."""
        return self.q * np.sqrt(self.lam)

    def apply(self, x) -> np.ndarray:
        """Sigma @ x without forming Sigma."""
        x = np.asarray(x, dtype=np.float64)
        qtx = self.q.T @ x
        scaled = qtx * (self.lam[:, None] if qtx.ndim == 2 else self.lam)
        return self.q @ scaled + self.sigma2 * x

    def dense(self) -> np.ndarray:
        """Explicit N x N covariance, for checks on small problems."""
        return (self.q * self.lam) @ self.q.T + self.sigma2 * np.eye(self.n)


@dataclass(frozen=True)
class SoIBasis:
    v: np.ndarray
    v_perp: np.ndarray


@dataclass(frozen=True)
class TrainingData:
    x_t: np.ndarray
    z: np.ndarray
    d: np.ndarray


def sample_stiefel(n, j, rng: RngStream) -> np.ndarray:
    """Haar-distributed n x j matrix with orthonormal columns."""
    if not 1 <= j <= n:
        raise ValueError(f"need 1 <= j <= n, got j={j}, n={n}")
    g = rng.generator().standard_normal((n, j))
    return qr_factor(g).q


def draw_eigenvalues_db(j, db_min, db_max, rng: RngStream) -> np.ndarray:
    if db_min > db_max:
        raise ValueError("db_min must not exceed db_max")
    u = rng.generator().uniform(db_min, db_max, size=j)
    return 10.0 ** (u / 10.0)


def place_soi(q, theta_deg, rng: RngStream) -> SoIBasis:
    """Unit signature whose principal angle with range(q) is ``theta_deg``.

    v = cos(theta) u1 + sin(theta) u2 with u1 a random unit vector in
    range(q) and u2 a random unit vector orthogonal to it.
    """
    q = np.atleast_2d(np.asarray(q, dtype=np.float64))
    n, j = q.shape
    if not 0.0 <= theta_deg <= 90.0:
        raise ValueError(f"theta_deg must be in [0,90], got {theta_deg}")
    if j >= n:
        raise ValueError("range(q) must be a proper subspace (J < N)")
    gen = rng.generator()
    u1 = q @ gen.standard_normal(j)
    u1 /= np.linalg.norm(u1)
    w = gen.standard_normal(n)
    u2 = w - q @ (q.T @ w)
    # second pass keeps the projection clean to working precision
    u2 -= q @ (q.T @ u2)
    u2 /= np.linalg.norm(u2)
    theta = np.deg2rad(theta_deg)
    v = np.cos(theta) * u1 + np.sin(theta) * u2
    v /= np.linalg.norm(v)
    return SoIBasis(v=v, v_perp=orthonormal_complement(v))


def sample_training(model: CovarianceModel, k, rng: RngStream) -> np.ndarray:
    """N x K zero-mean Gaussian samples with covariance Sigma.

    X = Q diag(lam)^(1/2) W1 + sigma W2, no N x N factorization needed.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    gen = rng.generator()
    w1 = gen.standard_normal((model.lam.size, k))
    w2 = gen.standard_normal((model.n, k))
    return model.g @ w1 + np.sqrt(model.sigma2) * w2


def split_channels(soi: SoIBasis, x_t) -> TrainingData:
    x_t = np.atleast_2d(np.asarray(x_t, dtype=np.float64))
    if x_t.shape[0] != soi.v.size:
        raise ValueError(f"x_t has {x_t.shape[0]} rows, expected {soi.v.size}")
    return TrainingData(x_t=x_t, z=soi.v_perp.T @ x_t, d=soi.v @ x_t)


def make_covariance_model(spec: ScenarioSpec, rng: RngStream):
    """Draw (CovarianceModel, SoIBasis) for ``spec``.

    Uses child streams COVARIANCE, EIGENVALUES and SOI of ``rng``.
    """
    q = sample_stiefel(spec.n, spec.j, rng.child(COVARIANCE))
    lam = draw_eigenvalues_db(spec.j, spec.eig_db_min, spec.eig_db_max, rng.child(EIGENVALUES))
    model = CovarianceModel(q=q, lam=lam, sigma2=spec.sigma2)
    soi = place_soi(q, spec.theta_deg, rng.child(SOI))
    return model, soi
