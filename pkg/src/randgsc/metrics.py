"""SNR loss and subspace diagnostics against the true covariance."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .linalg import principal_angles
from .reducers import Psi, ReducerSpec
from .scenario import CovarianceModel, SoIBasis


@dataclass(frozen=True)
class LossSample:
    loss: float
    loss_db: float
    method: Optional[ReducerSpec] = None
    trial_index: int = 0
    r: int = 0
    k: int = 0


def optimal_snr(model: CovarianceModel, v) -> float:
    """v^T Sigma^{-1} v via the Woodbury form of the inverse.

    Sigma^{-1} = (I - Q D Q^T) / sigma2 with D = diag(lam / (lam + sigma2)).
    """
    v = np.asarray(v, dtype=np.float64).ravel()
    qtv = model.q.T @ v
    shrink = model.lam / (model.lam + model.sigma2)
    return float((v @ v - np.sum(shrink * qtv * qtv)) / model.sigma2)


def output_power(model: CovarianceModel, w) -> float:
    """w^T Sigma w = ||diag(lam)^(1/2) Q^T w||^2 + sigma2 ||w||^2."""
    w = np.asarray(w, dtype=np.float64).ravel()
    qtw = model.q.T @ w
    return float(np.sum(model.lam * qtw * qtw) + model.sigma2 * (w @ w))


def snr_loss(w, v, model: CovarianceModel):
    """Return (loss, loss_db), loss = (w^T v)^2 / (w^T Sigma w * v^T Sigma^{-1} v).

    ``w`` may be a FullFilter or a plain vector; no normalization of w is
    assumed.
    """
    w = np.asarray(getattr(w, "w", w), dtype=np.float64).ravel()
    v = np.asarray(v, dtype=np.float64).ravel()
    gain = float(w @ v)
    loss = gain * gain / (output_power(model, w) * optimal_snr(model, v))
    return loss, 10.0 * np.log10(loss)


def interference_capture_angles(model: CovarianceModel, soi: SoIBasis, psi: Psi) -> np.ndarray:
    """Principal angles in degrees between range(V_perp^T Q) and range(Psi)."""
    psi = getattr(psi, "psi", psi)
    return np.rad2deg(principal_angles(soi.v_perp.T @ model.q, psi))
