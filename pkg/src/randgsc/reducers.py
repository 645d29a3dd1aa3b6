"""Constructions of the dimension-reducing matrix Psi ((N-1) x R)."""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Optional

import numpy as np

from .linalg import top_left_singular_vectors
from .scenario import CovarianceModel, RngStream, SoIBasis


class Method(str, Enum):
    GAUSSIAN = "gaussian"
    SELECT = "select"
    PC = "pc"
    MN = "mn"
    CLAIRVOYANT = "clairvoyant"

    def __str__(self):
        return self.value


# stable integer codes for stream paths
METHOD_CODES = {m: i for i, m in enumerate(Method)}


@dataclass(frozen=True)
class ReducerSpec:
    method: Method
    r: Optional[int] = None

    def __post_init__(self):
        object.__setattr__(self, "method", Method(self.method))
        if self.method in (Method.GAUSSIAN, Method.SELECT, Method.PC):
            if self.r is None or self.r < 1:
                raise ValueError(f"{self.method} needs a reduced dimension r >= 1")


@dataclass(frozen=True)
class SketchMatrix:
    omega: np.ndarray
    kind: str
    selected_indices: Optional[tuple] = None


@dataclass(frozen=True)
class Psi:
    psi: np.ndarray
    spec: ReducerSpec
    sketch: Optional[SketchMatrix] = None

    @property
    def r(self) -> int:
        return self.psi.shape[1]


def _check_rk(k, r):
    if not 1 <= r <= k:
        raise ValueError(f"need 1 <= r <= k, got r={r}, k={k}")


def make_gaussian_sketch(k, r, rng: RngStream) -> SketchMatrix:
    _check_rk(k, r)
    return SketchMatrix(omega=rng.generator().standard_normal((k, r)), kind="gaussian")


def make_column_select_sketch(k, r, rng: RngStream) -> SketchMatrix:
    """Omega with a single 1 per column at R distinct rows drawn without replacement.

    ``selected_indices`` are zero-based.
    """
    _check_rk(k, r)
    idx = rng.generator().choice(k, size=r, replace=False)
    omega = np.zeros((k, r))
    omega[idx, np.arange(r)] = 1.0
    return SketchMatrix(omega=omega, kind="selection", selected_indices=tuple(int(i) for i in idx))


def sketch_psi(z, sketch: SketchMatrix, spec: ReducerSpec | None = None) -> Psi:
    z = np.asarray(z, dtype=np.float64)
    if z.shape[1] != sketch.omega.shape[0]:
        raise ValueError(f"z has {z.shape[1]} columns, omega has {sketch.omega.shape[0]} rows")
    if sketch.kind == "selection":
        # exact columns, no arithmetic
        psi = z[:, list(sketch.selected_indices)].copy()
    else:
        psi = z @ sketch.omega
    if spec is None:
        method = Method.SELECT if sketch.kind == "selection" else Method.GAUSSIAN
        spec = ReducerSpec(method, sketch.omega.shape[1])
    return Psi(psi=psi, spec=spec, sketch=sketch)


def pc_psi(z, r) -> Psi:
    """Principal-component reducer: the r leading left singular vectors of z."""
    return Psi(psi=top_left_singular_vectors(z, r), spec=ReducerSpec(Method.PC, r))


def clairvoyant_psi(model: CovarianceModel, soi: SoIBasis) -> Psi:
    """Psi = V_perp^T G with G = Q diag(lam)^(1/2)."""
    psi = soi.v_perp.T @ model.g
    return Psi(psi=psi, spec=ReducerSpec(Method.CLAIRVOYANT, psi.shape[1]))
