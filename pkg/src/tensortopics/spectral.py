"""Spectral bases per tensor mode.

The gram matrix of a noisy frequency unfolding is biased on its diagonal by
the multinomial sampling noise.  That bias cancels between documents on the
two membership modes but not on the word mode, so mode 3 subtracts it before
the eigendecomposition; ``centered=False`` restores the plain gram matrix for
exact-mean inputs.
"""

from dataclasses import dataclass

import numpy as np

from .tensor import unfold

# Dense symmetric eigendecomposition budget; larger modes need a different
# solver strategy than this package provides.
_MAX_MODE_DIM = 5000


@dataclass(frozen=True)
class SpectralFactors:
    """Orthonormal column bases and leading eigenvalues, one set per mode."""

    xi: tuple        # three (n_a, k_a) matrices with orthonormal columns
    eigvals: tuple   # three descending vectors, one value per kept column


def build_q(y_mat, mode, doc_length, centered=True):
    """Gram matrix of an unfolding, bias-corrected on the word mode.

    ``y_mat`` is a mode unfolding of the frequency tensor.  For mode 3 with
    ``centered=True`` the result is ``y @ y.T - diag(y @ 1) / doc_length``;
    modes 1 and 2 always return the plain gram matrix.  The output is exactly
    symmetric.
    """
    y = np.asarray(y_mat, dtype=float)
    if y.ndim != 2:
        raise ValueError("expected an unfolded (matrix) input")
    if mode not in (1, 2, 3):
        raise ValueError(f"mode must be 1, 2 or 3, got {mode!r}")
    if y.shape[0] > _MAX_MODE_DIM:
        raise ValueError(
            f"mode dimension {y.shape[0]} exceeds the dense eigendecomposition "
            f"budget of {_MAX_MODE_DIM}")
    q = y @ y.T
    if mode == 3 and centered:
        if doc_length < 1:
            raise ValueError("doc_length must be at least 1 to correct sampling bias")
        q = q - np.diag(y.sum(axis=1) / doc_length)
    return (q + q.T) / 2.0


def _fix_signs(vecs):
    """Flip columns so each sums positive; a zero sum falls back to making
    the first entry of largest magnitude positive."""
    vecs = np.array(vecs)
    for c in range(vecs.shape[1]):
        column = vecs[:, c]
        total = column.sum()
        if total < 0.0:
            column *= -1.0
        elif total == 0.0:
            lead = int(np.argmax(np.abs(column)))
            if column[lead] < 0.0:
                column *= -1.0
    return vecs


def leading_eigvecs(q, k):
    """Top ``k`` eigenpairs of a symmetric matrix, deterministically signed.

    Columns come back orthonormal with eigenvalues sorted descending.
    Raises ``ValueError`` when ``k`` is out of range and propagates
    ``numpy.linalg.LinAlgError`` if the eigensolver fails to converge.
    """
    q = np.asarray(q, dtype=float)
    if q.ndim != 2 or q.shape[0] != q.shape[1]:
        raise ValueError("q must be a square matrix")
    n = q.shape[0]
    if not 1 <= k <= n:
        raise ValueError(f"k must lie in [1, {n}], got {k}")
    vals, vecs = np.linalg.eigh(q)
    vals = vals[::-1][:k].copy()
    vecs = _fix_signs(vecs[:, ::-1][:, :k])
    return vecs, vals


def hooi_refine(y, factors, iters):
    """Power-iteration refinement of all three bases against raw ``y``.

    Each sweep projects every unfolding onto the other two modes' bases from
    the previous sweep and takes fresh leading left singular vectors, so all
    three updates within a sweep read the same iterate.  ``iters=0`` returns
    the input factors unchanged.  Sign convention matches
    :func:`leading_eigvecs`; reported eigenvalues are the squared singular
    values of the projected unfoldings.
    """
    if iters < 0:
        raise ValueError("iters must be nonnegative")
    y = np.asarray(y, dtype=float)
    if y.ndim != 3:
        raise ValueError("expected an order-3 data tensor")
    xi = tuple(factors.xi)
    eigvals = tuple(factors.eigvals)
    others = {1: (2, 3), 2: (1, 3), 3: (1, 2)}
    for _ in range(iters):
        new_xi = []
        new_vals = []
        for mode in (1, 2, 3):
            b, c = others[mode]
            projected = unfold(y, mode) @ np.kron(xi[b - 1], xi[c - 1])
            k = xi[mode - 1].shape[1]
            if k > min(projected.shape):
                raise ValueError(
                    f"mode {mode} rank {k} exceeds the projected span "
                    f"{min(projected.shape)}")
            u, s, _ = np.linalg.svd(projected, full_matrices=False)
            new_xi.append(_fix_signs(u[:, :k]))
            new_vals.append((s[:k] ** 2).copy())
        xi = tuple(new_xi)
        eigvals = tuple(new_vals)
    return SpectralFactors(xi=xi, eigvals=eigvals)
