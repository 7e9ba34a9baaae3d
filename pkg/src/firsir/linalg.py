"""Dense SVD by one-sided Jacobi rotations and the closed-form ridge solution.

The matrices here are small (a few hundred rows, at most a dozen columns), so
the one-sided (Hestenes) Jacobi method is accurate and fast enough. Disjoint
column pairs from a round-robin schedule are rotated together, which keeps
the inner loop vectorised.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin
from sklearn.utils.validation import check_is_fitted, validate_data

from .exceptions import InvalidInputError, NonConvergenceError

MAX_SWEEPS = 60
_EPS = np.finfo(np.float64).eps


@dataclass(frozen=True)
class SvdFactors:
    """``X = U @ D @ V.T`` with ``D`` the ``M x N`` padding of ``sigma``.

    ``sigma`` holds only the ``rank`` singular values above the numerical
    rank threshold, sorted nonincreasing.
    """

    U: np.ndarray
    V: np.ndarray
    sigma: np.ndarray
    rank: int

    @property
    def D(self):
        D = np.zeros((self.U.shape[0], self.V.shape[0]))
        D[np.arange(self.rank), np.arange(self.rank)] = self.sigma
        return D


@dataclass(frozen=True)
class RidgeSolution:
    coefficients: np.ndarray
    lam: float


@lru_cache(maxsize=None)
def _round_robin(n):
    """Rounds of disjoint ``(p, q)`` index pairs covering every pair once."""
    players = list(range(n)) + ([-1] if n % 2 else [])
    m = len(players)
    rounds = []
    for _ in range(m - 1):
        pairs = [(players[k], players[m - 1 - k]) for k in range(m // 2)]
        pairs = sorted((min(a, b), max(a, b)) for a, b in pairs if a >= 0 and b >= 0)
        if pairs:
            p, q = map(np.array, zip(*pairs))
            rounds.append((p, q))
        players = [players[0], players[-1], *players[1:-1]]
    return tuple(rounds)


def _hestenes(A, max_sweeps):
    """Orthogonalise the columns of ``A`` (rows >= cols); returns ``(A @ V, V)``."""
    A = np.array(A, dtype=np.float64)
    m, n = A.shape
    V = np.eye(n)
    # Relative orthogonality target; dot products carry O(m * eps) rounding.
    tol = max(m, 1) * _EPS
    # Columns whose squared norm is below this carry only rounding noise.
    negligible = (_EPS * np.linalg.norm(A)) ** 2
    rounds = _round_robin(n)
    for _ in range(max_sweeps):
        rotated = False
        for p, q in rounds:
            ap, aq = A[:, p], A[:, q]
            alpha = np.einsum("ij,ij->j", ap, ap)
            beta = np.einsum("ij,ij->j", aq, aq)
            gamma = np.einsum("ij,ij->j", ap, aq)
            active = (np.abs(gamma) > tol * np.sqrt(alpha * beta)) & (np.minimum(alpha, beta) > negligible)
            if not active.any():
                continue
            rotated = True
            p, q = p[active], q[active]
            alpha, beta, gamma = alpha[active], beta[active], gamma[active]
            zeta = (beta - alpha) / (2.0 * gamma)
            big = np.abs(zeta) > 1e150
            safe = np.where(big, 1.0, zeta)
            t = np.where(zeta >= 0, 1.0, -1.0) / (np.abs(safe) + np.sqrt(1.0 + safe * safe))
            t = np.where(big, 0.5 / np.where(big, zeta, 1.0), t)
            c = 1.0 / np.sqrt(1.0 + t * t)
            s = c * t
            for M_ in (A, V):
                mp, mq = M_[:, p], M_[:, q]
                M_[:, p] = c * mp - s * mq
                M_[:, q] = s * mp + c * mq
        if not rotated:
            return A, V
    raise NonConvergenceError(max_sweeps)


def _complete_basis(Q, size):
    """Extend orthonormal columns ``Q`` to a ``size x size`` orthogonal matrix."""
    k = Q.shape[1]
    if k == size:
        return Q
    if k == 0:
        return np.eye(size)
    full, _ = np.linalg.qr(Q, mode="complete")
    full[:, :k] = Q
    return full


def svd(X, max_sweeps=MAX_SWEEPS) -> SvdFactors:
    """Full SVD of a small dense matrix by one-sided Jacobi rotations."""
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[0] < 1 or X.shape[1] < 1:
        raise InvalidInputError(f"expected a non-empty 2-D matrix, got shape {X.shape}")
    if not np.all(np.isfinite(X)):
        raise InvalidInputError("matrix contains non-finite entries")
    m, n = X.shape
    transposed = m < n
    A = X.T if transposed else X
    W, right = _hestenes(A, max_sweeps)
    norms = np.sqrt(np.einsum("ij,ij->j", W, W))
    order = np.argsort(-norms, kind="stable")
    norms, W, right = norms[order], W[:, order], right[:, order]

    threshold = max(m, n) * _EPS * norms[0] if norms.size else 0.0
    rank = int(np.count_nonzero(norms > threshold)) if norms[0] > 0 else 0
    sigma = norms[:rank].copy()
    left = _complete_basis(W[:, :rank] / sigma, A.shape[0])
    if transposed:
        U, V = right, left
    else:
        U, V = left, right
    return SvdFactors(U=U, V=V, sigma=sigma, rank=rank)


def _check_system(X, y):
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if X.ndim != 2:
        raise InvalidInputError(f"X must be 2-D, got shape {X.shape}")
    if y.ndim != 1 or y.shape[0] != X.shape[0]:
        raise InvalidInputError(f"y has shape {y.shape}, expected ({X.shape[0]},)")
    return X, y


def spectral_weights(sigma, lam):
    """Ridge filter factors ``sigma / (sigma**2 + lam)`` (``1/sigma`` at ``lam=0``)."""
    sigma = np.asarray(sigma, dtype=np.float64)
    return sigma / (sigma * sigma + lam)


def ridge_solve(X, y, lam, factors: SvdFactors | None = None) -> RidgeSolution:
    """Minimiser of ``||y - X c||**2 + lam * ||c||**2`` via the SVD of ``X``.

    ``lam = 0`` gives the minimum-norm least-squares solution. Pass
    ``factors`` to reuse a decomposition across several ``lam``.
    """
    X, y = _check_system(X, y)
    lam = float(lam)
    if not lam >= 0:
        raise InvalidInputError(f"regularisation must be nonnegative, got {lam!r}")
    if factors is None:
        factors = svd(X)
    r = factors.rank
    projections = factors.U[:, :r].T @ y
    coefficients = factors.V[:, :r] @ (spectral_weights(factors.sigma, lam) * projections)
    return RidgeSolution(coefficients=coefficients, lam=lam)


def least_squares(X, y, factors: SvdFactors | None = None):
    """Minimum-norm solution of ``min ||y - X c||``; equals ``ridge_solve(X, y, 0)``."""
    X, y = _check_system(X, y)
    if factors is None:
        factors = svd(X)
    r = factors.rank
    return factors.V[:, :r] @ ((factors.U[:, :r].T @ y) / factors.sigma)


class RidgeSVD(RegressorMixin, BaseEstimator):
    """Ridge regression without intercept, solved through a Jacobi SVD.

    Parameters
    ----------
    alpha : float, default=1.0
        Regularisation strength; ``0`` gives minimum-norm least squares.

    Attributes
    ----------
    coef_ : ndarray of shape (n_features,)
    singular_values_ : ndarray of shape (rank_,)
    rank_ : int
    """

    def __init__(self, alpha=1.0):
        self.alpha = alpha

    def fit(self, X, y):
        X, y = validate_data(self, X, y, dtype=np.float64, y_numeric=True)
        if self.alpha < 0:
            raise ValueError(f"alpha must be nonnegative, got {self.alpha}")
        factors = svd(X)
        self.coef_ = ridge_solve(X, y, self.alpha, factors=factors).coefficients
        self.singular_values_ = factors.sigma
        self.rank_ = factors.rank
        return self

    def predict(self, X):
        check_is_fitted(self, "coef_")
        X = validate_data(self, X, dtype=np.float64, reset=False)
        return X @ self.coef_
