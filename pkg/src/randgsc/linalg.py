"""Dense real linear-algebra kernels.

Householder QR, a cyclic Jacobi symmetric eigensolver, minimum-norm least
squares, orthogonal projectors and principal angles.  Everything works on
float64 numpy arrays and returns new arrays; inputs are never modified.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

# relative pivot cutoff used for every rank decision
RANK_TOL = 1e-10


class RankDeficientError(ValueError):
    """A matrix was numerically rank deficient where full rank is required."""

    def __init__(self, message, index=None):
        super().__init__(message)
        self.index = index


class ConvergenceError(ArithmeticError):
    """The Jacobi eigensolver did not converge within the sweep budget."""

    def __init__(self, message, off_norm):
        super().__init__(message)
        self.off_norm = off_norm


@dataclass(frozen=True)
class QRFactors:
    q: np.ndarray
    r: np.ndarray


@dataclass(frozen=True)
class SymEig:
    values: np.ndarray
    vectors: np.ndarray


@dataclass(frozen=True)
class Projector:
    p: np.ndarray


def _as_matrix(a, name="a"):
    a = np.asarray(a, dtype=np.float64)
    if a.ndim == 1:
        a = a[:, None]
    if a.ndim != 2 or a.shape[0] < 1 or a.shape[1] < 1:
        raise ValueError(f"{name} must be a non-empty 2-D array, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError(f"{name} has non-finite entries")
    return a


def _householder(a, pivot=False):
    """Householder triangularization of a copy of ``a`` (any shape).

    Returns (reflectors, betas, r, perm) where ``r`` is the m x n upper
    trapezoidal factor of ``a[:, perm]``.  With ``pivot`` the column of
    largest remaining norm is brought forward at each step.
    """
    r = np.array(a, dtype=np.float64, copy=True)
    m, n = r.shape
    p = min(m, n)
    perm = np.arange(n)
    vs, betas = [], []
    norms = np.einsum("ij,ij->j", r, r) if pivot else None
    for j in range(p):
        if pivot:
            jmax = j + int(np.argmax(norms[j:]))
            if jmax != j:
                r[:, [j, jmax]] = r[:, [jmax, j]]
                perm[[j, jmax]] = perm[[jmax, j]]
                norms[[j, jmax]] = norms[[jmax, j]]
        x = r[j:, j]
        normx = np.linalg.norm(x)
        v = x.copy()
        if normx == 0.0:
            beta = 0.0
        else:
            alpha = -normx if x[0] >= 0 else normx
            v[0] -= alpha
            beta = 2.0 / np.dot(v, v)
            r[j:, j:] -= beta * np.outer(v, v @ r[j:, j:])
            r[j + 1:, j] = 0.0
        vs.append(v)
        betas.append(beta)
        if pivot:
            # recompute rather than downdate, matrices here are small
            norms[j + 1:] = np.einsum("ij,ij->j", r[j + 1:, j + 1:], r[j + 1:, j + 1:])
    return vs, betas, r, perm


def _form_q(vs, betas, m, ncols):
    q = np.eye(m, ncols)
    for j in range(len(vs) - 1, -1, -1):
        if betas[j] != 0.0:
            v = vs[j]
            q[j:, :] -= betas[j] * np.outer(v, v @ q[j:, :])
    return q


def _thin_qr(a, pivot=False):
    m, n = a.shape
    p = min(m, n)
    vs, betas, r, perm = _householder(a, pivot=pivot)
    q = _form_q(vs, betas, m, p)
    r = np.triu(r[:p, :])
    # nonnegative diagonal convention
    signs = np.where(np.diag(r) < 0, -1.0, 1.0)
    return q * signs, r * signs[:, None], perm


def qr_factor(a) -> QRFactors:
    """Thin QR of an m x n matrix (m >= n) via Householder reflections.

    The diagonal of ``r`` is made nonnegative, which fixes the factorization
    uniquely for full-rank input.
    """
    a = _as_matrix(a)
    m, n = a.shape
    if m < n:
        raise ValueError(f"qr_factor needs rows >= cols, got {m}x{n}")
    q, r, _ = _thin_qr(a)
    return QRFactors(q=q, r=r)


def orthonormal_complement(v) -> np.ndarray:
    """N x (N-1) orthonormal basis of the complement of unit vector ``v``.

    Built from the Householder reflector that maps ``v`` onto a multiple of
    e1; its first column is +-v and the remaining columns are returned.
    """
    v = np.asarray(v, dtype=np.float64).ravel()
    if v.size < 2:
        raise ValueError("orthonormal_complement needs a vector of length >= 2")
    if abs(np.linalg.norm(v) - 1.0) > 1e-12:
        raise ValueError(f"v must be unit norm, got norm {np.linalg.norm(v)!r}")
    u = v.copy()
    u[0] += 1.0 if v[0] >= 0 else -1.0
    h = np.eye(v.size) - (2.0 / np.dot(u, u)) * np.outer(u, u)
    return h[:, 1:]


def _round_robin(m):
    """Pairings for a round-robin schedule over ``m`` (even) players."""
    players = list(range(m))
    rounds = []
    for _ in range(m - 1):
        half = m // 2
        top, bottom = players[:half], players[half:][::-1]
        rounds.append((np.array(top), np.array(bottom)))
        players = [players[0]] + [players[-1]] + players[1:-1]
    return rounds


def sym_eig_desc(s, tol=1e-14, max_sweeps=30) -> SymEig:
    """Eigendecomposition of a real symmetric matrix by cyclic Jacobi sweeps.

    Each sweep visits every (p, q) pair once, grouped into rounds of
    disjoint pairs so a whole round is applied as one vectorized update.
    Iteration stops when the off-diagonal Frobenius norm falls below
    ``tol * ||s||_F``.

    Returns eigenvalues sorted in descending order with matching
    orthonormal eigenvectors as columns.
    """
    a = _as_matrix(s, "s").copy()
    n = a.shape[0]
    if a.shape[1] != n:
        raise ValueError(f"sym_eig_desc needs a square matrix, got {a.shape}")
    scale = np.linalg.norm(a)
    if np.max(np.abs(a - a.T)) > 1e-12 * max(scale, np.finfo(float).tiny):
        raise ValueError("sym_eig_desc needs a symmetric matrix")
    a = 0.5 * (a + a.T)
    vecs = np.eye(n)

    offdiag = ~np.eye(n, dtype=bool)

    def off(x):
        return np.linalg.norm(x[offdiag])

    target = tol * scale
    if n > 1 and scale > 0:
        m = n + (n % 2)
        rounds = []
        for top, bottom in _round_robin(m):
            keep = (top < n) & (bottom < n)
            p, q = np.minimum(top, bottom)[keep], np.maximum(top, bottom)[keep]
            rounds.append((p, q))
        sweeps = 0
        residual = off(a)
        while residual > target:
            if sweeps == max_sweeps:
                raise ConvergenceError(
                    f"Jacobi did not converge in {max_sweeps} sweeps "
                    f"(off-diagonal norm {residual:.3e})",
                    off_norm=residual,
                )
            for p, q in rounds:
                apq = a[p, q]
                active = apq != 0.0
                if not np.any(active):
                    continue
                p, q, apq = p[active], q[active], apq[active]
                tau = (a[q, q] - a[p, p]) / (2.0 * apq)
                t = np.where(tau >= 0, 1.0, -1.0) / (np.abs(tau) + np.hypot(1.0, tau))
                c = 1.0 / np.hypot(1.0, t)
                sn = t * c
                ap, aq = a[p, :], a[q, :]
                a[p, :] = c[:, None] * ap - sn[:, None] * aq
                a[q, :] = sn[:, None] * ap + c[:, None] * aq
                ap, aq = a[:, p], a[:, q]
                a[:, p] = ap * c - aq * sn
                a[:, q] = ap * sn + aq * c
                a[p, q] = 0.0
                a[q, p] = 0.0
                vp, vq = vecs[:, p], vecs[:, q]
                vecs[:, p] = vp * c - vq * sn
                vecs[:, q] = vp * sn + vq * c
            sweeps += 1
            residual = off(a)
    values = np.diag(a).copy()
    order = np.argsort(-values, kind="stable")
    return SymEig(values=values[order], vectors=vecs[:, order])


def _fix_signs(u):
    # largest-magnitude entry of each column made positive
    idx = np.argmax(np.abs(u), axis=0)
    signs = np.where(u[idx, np.arange(u.shape[1])] < 0, -1.0, 1.0)
    return u * signs


def top_left_singular_vectors(z, r) -> np.ndarray:
    """Leading ``r`` left singular vectors of ``z`` via the Gram matrix z^T z.

    Columns are ordered by decreasing singular value and their sign is
    fixed so the largest-magnitude entry is positive.
    """
    z = _as_matrix(z, "z")
    rows, cols = z.shape
    if not 1 <= r <= min(rows, cols):
        raise ValueError(f"r must lie in [1, {min(rows, cols)}], got {r}")
    eig = sym_eig_desc(z.T @ z)
    sv = np.sqrt(np.clip(eig.values[:r], 0.0, None))
    deficient = np.nonzero(sv < 1e-12 * sv[0])[0] if sv[0] > 0 else np.arange(r)
    if deficient.size:
        i = int(deficient[0])
        raise RankDeficientError(
            f"singular value {i} of z is numerically zero; r={r} exceeds the rank",
            index=i,
        )
    u = (z @ eig.vectors[:, :r]) / sv
    return _fix_signs(u)


def least_squares_min_norm(a, b) -> np.ndarray:
    """Minimum-norm minimizer of ||a x - b||.

    Full column rank goes through a plain Householder QR.  Otherwise a
    complete orthogonal decomposition (pivoted QR followed by a QR of the
    transposed leading rows) gives the minimum-norm solution.
    """
    a = _as_matrix(a)
    b = np.asarray(b, dtype=np.float64).ravel()
    m, n = a.shape
    if b.size != m:
        raise ValueError(f"dimension mismatch: a is {m}x{n}, b has length {b.size}")
    if m >= n:
        q, r, _ = _thin_qr(a)
        diag = np.abs(np.diag(r))
        if diag.min() > RANK_TOL * diag.max():
            return solve_upper(r, q.T @ b)
    return _cod_solve(a, b)


def solve_upper(r, y):
    """Back substitution for upper-triangular ``r``."""
    n = r.shape[0]
    x = np.zeros(n)
    for i in range(n - 1, -1, -1):
        x[i] = (y[i] - r[i, i + 1:] @ x[i + 1:]) / r[i, i]
    return x


def solve_lower(low, y):
    """Forward substitution for lower-triangular ``low``."""
    n = low.shape[0]
    x = np.zeros(n)
    for i in range(n):
        x[i] = (y[i] - low[i, :i] @ x[:i]) / low[i, i]
    return x


def _cod_solve(a, b):
    m, n = a.shape
    q1, r1, perm = _thin_qr(a, pivot=True)
    diag = np.abs(np.diag(r1))
    if diag.size == 0 or diag[0] == 0.0:
        return np.zeros(n)
    rank = int(np.sum(diag > RANK_TOL * diag[0]))
    # r1[:rank] = t2^T q2^T, so a[:, perm] = q1_r t2^T q2^T
    q2, t2, _ = _thin_qr(r1[:rank, :].T)
    y = q1[:, :rank].T @ b
    xp = q2 @ solve_lower(t2.T, y)
    x = np.zeros(n)
    x[perm] = xp
    return x


def orthonormal_range_basis(m) -> np.ndarray:
    """Orthonormal basis of range(m) from a column-pivoted QR.

    Pivots below ``RANK_TOL`` times the largest one count as zero.
    """
    m = _as_matrix(m, "m")
    q, r, _ = _thin_qr(m, pivot=True)
    diag = np.abs(np.diag(r))
    if diag[0] == 0.0:
        return q[:, :0]
    return q[:, :int(np.sum(diag > RANK_TOL * diag[0]))]


def orthogonal_projector(m) -> Projector:
    """Orthogonal projector onto range(m)."""
    m = _as_matrix(m, "m")
    if m.shape[1] > m.shape[0]:
        raise ValueError(f"orthogonal_projector needs cols <= rows, got {m.shape}")
    q = orthonormal_range_basis(m)
    p = q @ q.T
    return Projector(p=0.5 * (p + p.T))


def _singular_values(x):
    # descending singular values from the smaller Gram matrix
    g = x.T @ x if x.shape[0] >= x.shape[1] else x @ x.T
    return np.sqrt(np.clip(sym_eig_desc(g).values, 0.0, None))


def principal_angles(a, b) -> np.ndarray:
    """Principal angles (radians, ascending) between range(a) and range(b).

    Small angles come from sines and large ones from cosines so both ends
    are resolved to working precision; arccos alone loses half the digits
    near zero.
    """
    qa = orthonormal_range_basis(a)
    qb = orthonormal_range_basis(b)
    if qa.shape[0] != qb.shape[0]:
        raise ValueError("a and b must have the same number of rows")
    if qb.shape[1] > qa.shape[1]:
        qa, qb = qb, qa
    k = qb.shape[1]
    if k == 0:
        return np.zeros(0)
    c = qa.T @ qb
    cos = np.clip(_singular_values(c)[:k], 0.0, 1.0)
    sin = np.clip(_singular_values(qb - qa @ c)[:k][::-1], 0.0, 1.0)
    return np.where(cos * cos >= 0.5, np.arcsin(sin), np.arccos(cos))
