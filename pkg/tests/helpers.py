"""Shared fixtures: planted instances, a hand-built structured model, and
independent brute-force oracles used to cross-check the library."""

from itertools import combinations

import numpy as np

from tensortopics import GenSpec, TuckerModel, generate


def planted(dims, ranks, doc_length, seed, **kw):
    return generate(GenSpec(dims=dims, ranks=ranks, doc_length=doc_length,
                            seed=seed, **kw))


def toy_structured_model():
    """Small fully hand-specified model: block memberships, anchored words."""
    a1 = np.zeros((30, 2))
    a1[:10, 0] = 1.0
    a1[10:20] = 0.5
    a1[20:, 1] = 1.0
    a2 = np.zeros((10, 2))
    a2[:5, 0] = 1.0
    a2[5:, 1] = 1.0
    rng = np.random.default_rng(20240817)
    w = rng.uniform(0.2, 1.0, size=(50, 3))
    w[:3] *= np.eye(3)
    a3 = w / w.sum(axis=0)
    g = np.array([
        [[0.8, 0.1, 0.1], [0.1, 0.8, 0.1]],
        [[0.1, 0.1, 0.8], [1 / 3, 1 / 3, 1 / 3]],
    ])
    return TuckerModel(a1=a1, a2=a2, a3=a3, g=g)


def max_volume_subset(points, k):
    """Exhaustive max-volume vertex search, the oracle for the greedy hunt.

    Scores every k-subset by the Gram determinant of its edge vectors from
    the first member; the true simplex vertices maximize enclosed volume.
    """
    pts = np.asarray(points, dtype=float)
    n = pts.shape[0]
    best_score = -np.inf
    best = None
    for combo in combinations(range(n), k):
        rows = pts[list(combo)]
        edges = rows[1:] - rows[0]
        gram = edges @ edges.T
        score = float(np.linalg.det(gram)) if k > 1 else float(rows[0] @ rows[0])
        if score > best_score + 1e-15:
            best_score = score
            best = combo
    return np.asarray(best, dtype=np.intp)


def subspace_gap(u, v):
    """Spectral distance between the column spans of two orthonormal bases."""
    return float(np.linalg.norm(u @ u.T - v @ v.T, 2))


def exact_mode_basis(d, mode, k):
    """Top-k left singular vectors of a mode unfolding, sign unconstrained."""
    from tensortopics import unfold

    u, _, _ = np.linalg.svd(unfold(d, mode), full_matrices=False)
    return u[:, :k]
