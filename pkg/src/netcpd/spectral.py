"""Spectral norm of real symmetric matrices.

``spectral_norm`` is a Lanczos iteration with full reorthogonalisation, seeded
for determinism, that stops once both extreme Ritz pairs have residual below
``tol`` times the current norm estimate.  It accepts dense arrays and
``scipy.sparse`` matrices.

The scan loops of the detectors evaluate hundreds of small dense CUSUM
matrices per run; for those ``spectral_norms`` (batched LAPACK) and
``norms_below`` (a Cholesky-based threshold test) are used instead.
"""

from __future__ import annotations

import numpy as np
import scipy.sparse as sp
from scipy.linalg import lapack

from ._validation import check_symmetric_matrix
from .exceptions import ConvergenceError, InvalidArgumentError

__all__ = ["spectral_norm", "spectral_norms", "norms_below"]


def _as_operator(m):
    if sp.issparse(m):
        m = sp.csr_matrix(m, dtype=np.float64)
        if m.shape[0] != m.shape[1]:
            raise InvalidArgumentError(f"expected a square matrix, got shape {m.shape}")
        asym = abs(m - m.T)
        scale = abs(m).max() if m.nnz else 0.0
        if asym.nnz and asym.max() > 1e-12 * max(1.0, scale):
            raise InvalidArgumentError("matrix is not symmetric")
        return m
    return check_symmetric_matrix(m)


def spectral_norm(m, tol=1e-10, *, seed=0, maxiter=None):
    """Largest absolute eigenvalue of a real symmetric matrix.

    Parameters
    ----------
    m : array-like or sparse matrix of shape (n, n)
        Real symmetric matrix.
    tol : float, default=1e-10
        Relative tolerance on the residual of the extreme Ritz pairs.
    seed : int, default=0
        Seed for the random Lanczos start vector.
    maxiter : int, optional
        Iteration cap. Defaults to ``n``, at which point the Krylov space is
        the whole space and the answer is exact up to rounding.

    Returns
    -------
    float
        ``max_i |lambda_i(m)|``.

    Raises
    ------
    InvalidArgumentError
        If ``m`` is not square and symmetric or ``tol <= 0``.
    ConvergenceError
        If ``maxiter < n`` steps do not reach ``tol``. The exception carries
        the last estimate in ``last_iterate``.
    """
    if not tol > 0:
        raise InvalidArgumentError(f"tol must be > 0, got {tol}")
    op = _as_operator(m)
    n = op.shape[0]
    if n == 0:
        return 0.0
    cap = n if maxiter is None else min(int(maxiter), n)
    if cap < 1:
        raise InvalidArgumentError("maxiter must be >= 1")

    rng = np.random.default_rng(seed)
    q = rng.standard_normal(n)
    q /= np.linalg.norm(q)
    basis = np.empty((cap, n))
    alpha = np.empty(cap)
    beta = np.empty(cap)
    estimate = 0.0

    for k in range(cap):
        basis[k] = q
        w = op @ q
        alpha[k] = q @ w
        # two passes of classical Gram-Schmidt keep the basis orthogonal to
        # working precision
        for _ in range(2):
            w -= basis[: k + 1].T @ (basis[: k + 1] @ w)
        b = float(np.linalg.norm(w))
        beta[k] = b

        tri = np.diag(alpha[: k + 1])
        if k:
            off = beta[:k]
            tri += np.diag(off, 1) + np.diag(off, -1)
        theta, vecs = np.linalg.eigh(tri)
        estimate = max(-theta[0], theta[-1])
        residual = b * max(abs(vecs[-1, 0]), abs(vecs[-1, -1]))

        if b <= 1e-14 * max(estimate, 1.0) or residual <= tol * estimate:
            return float(estimate)
        q = w / b

    if cap == n:
        return float(estimate)
    raise ConvergenceError(
        f"Lanczos did not reach tol={tol} within {cap} iterations "
        f"(last estimate {estimate!r})",
        last_iterate=float(estimate),
    )


def spectral_norms(stack):
    """Spectral norms of a stack of symmetric matrices via batched LAPACK.

    Parameters
    ----------
    stack : ndarray of shape (k, n, n)

    Returns
    -------
    ndarray of shape (k,)
    """
    stack = np.asarray(stack, dtype=np.float64)
    if stack.shape[0] == 0:
        return np.zeros(0)
    if stack.shape[-1] == 0:
        return np.zeros(stack.shape[0])
    eig = np.linalg.eigvalsh(stack)
    return np.maximum(-eig[:, 0], eig[:, -1])


def norms_below(stack, bound):
    """Return True iff every matrix in ``stack`` has spectral norm < ``bound``.

    ``||G|| < c`` exactly when both ``cI - G`` and ``cI + G`` are positive
    definite, which a Cholesky factorisation decides at a fraction of the
    cost of an eigendecomposition. A ``False`` answer is conservative: the
    caller computes exact norms and applies its own comparison.
    """
    if bound <= 0:
        return False
    stack = np.asarray(stack, dtype=np.float64)
    if stack.shape[0] == 0 or stack.shape[-1] == 0:
        return True
    n = stack.shape[-1]
    for g in stack:
        for sign in (-1.0, 1.0):
            buf = sign * g
            buf.flat[:: n + 1] += bound
            # buf is symmetric, so its transpose is a Fortran-ordered alias
            _, info = lapack.dpotrf(buf.T, lower=1, clean=0, overwrite_a=1)
            if info != 0:
                return False
    return True
