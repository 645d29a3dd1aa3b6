"""Generalized sidelobe canceler weights.

Every filter has the form w = v - V_perp u, so w^T v = 1 holds by
construction.  The adaptive part u is

* Psi @ w_a with w_a the least-squares fit of d from Psi^T Z (any reducer),
* Z (Z^T Z)^{-1} d for the minimum-norm filter (the R = K limit),
* Psi @ w_a with w_a fitted on the true covariance for the clairvoyant filter.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .linalg import (
    RANK_TOL,
    RankDeficientError,
    least_squares_min_norm,
    orthogonal_projector,
    qr_factor,
    solve_lower,
    solve_upper,
)
from .reducers import Method, Psi, ReducerSpec, SketchMatrix
from .scenario import CovarianceModel, SoIBasis


@dataclass(frozen=True)
class ReducedWeights:
    w_a: np.ndarray


@dataclass(frozen=True)
class FullFilter:
    w: np.ndarray
    method: ReducerSpec


def reduced_weights(z, psi: Psi, d) -> ReducedWeights:
    """Least-squares weights minimizing ||Z^T Psi w_a - d||; minimum norm if rank deficient."""
    z = np.asarray(z, dtype=np.float64)
    d = np.asarray(d, dtype=np.float64).ravel()
    if z.shape[0] != psi.psi.shape[0] or z.shape[1] != d.size:
        raise ValueError("z, psi and d dimensions disagree")
    return ReducedWeights(w_a=least_squares_min_norm(z.T @ psi.psi, d))


def assemble_full_filter(soi: SoIBasis, psi: Psi, w_a: ReducedWeights) -> FullFilter:
    w = soi.v - soi.v_perp @ (psi.psi @ w_a.w_a)
    return FullFilter(w=w, method=psi.spec)


def _gram_solve(z, y):
    """Solve (Z^T Z) x = y through a QR of Z; raises on a singular Gram matrix."""
    if z.shape[0] < z.shape[1]:
        raise RankDeficientError("Z^T Z is singular (more columns than rows)")
    f = qr_factor(z)
    r = f.r
    diag = np.abs(np.diag(r))
    if diag.min() <= RANK_TOL * diag.max():
        i = int(np.argmin(diag))
        raise RankDeficientError("Z^T Z is singular", index=i)
    # Z^T Z = R^T R
    return solve_upper(r, solve_lower(r.T, y))


def closed_form_filter(soi: SoIBasis, z, sketch: SketchMatrix, d) -> FullFilter:
    """w = v - V_perp Z (Z^T Z)^{-1} P d, with P the projector onto range(Z^T Z Omega).

    Written out literally; serves as a cross-check of the reduced
    least-squares route.
    """
    z = np.asarray(z, dtype=np.float64)
    d = np.asarray(d, dtype=np.float64).ravel()
    gram = z.T @ z
    proj = orthogonal_projector(gram @ sketch.omega).p
    x = _gram_solve(z, proj @ d)
    method = Method.SELECT if sketch.kind == "selection" else Method.GAUSSIAN
    return FullFilter(w=soi.v - soi.v_perp @ (z @ x), method=ReducerSpec(method, sketch.omega.shape[1]))


def mn_auxiliary_weights(z, d) -> np.ndarray:
    """Minimum-norm solution of Z^T u = d, namely u = Z (Z^T Z)^{-1} d."""
    z = np.asarray(z, dtype=np.float64)
    d = np.asarray(d, dtype=np.float64).ravel()
    return z @ _gram_solve(z, d)


def mn_filter(soi: SoIBasis, z, d) -> FullFilter:
    u = mn_auxiliary_weights(z, d)
    return FullFilter(w=soi.v - soi.v_perp @ u, method=ReducerSpec(Method.MN))


def clairvoyant_filter(model: CovarianceModel, soi: SoIBasis, psi: Psi) -> FullFilter:
    """Known-covariance GSC weights restricted to range(Psi).

    w_a = (Psi^T Sz Psi)^{-1} Psi^T r_zd with Sz = V_perp^T Sigma V_perp and
    r_zd = V_perp^T Sigma v.  Solved as a least-squares problem on the
    stacked square-root factor [diag(lam)^(1/2) Q^T; sigma I] so Sigma is
    never formed.
    """
    a = soi.v_perp @ psi.psi
    sqrt_lam = np.sqrt(model.lam)[:, None]
    sigma = np.sqrt(model.sigma2)
    b = np.vstack([sqrt_lam * (model.q.T @ a), sigma * a])
    c = np.concatenate([sqrt_lam[:, 0] * (model.q.T @ soi.v), sigma * soi.v])
    f = qr_factor(b)
    diag = np.abs(np.diag(f.r))
    if diag.min() <= RANK_TOL * diag.max():
        raise RankDeficientError("reduced covariance Psi^T Sz Psi is singular", index=int(np.argmin(diag)))
    w_a = solve_upper(f.r, f.q.T @ c)
    return assemble_full_filter(soi, psi, ReducedWeights(w_a=w_a))
