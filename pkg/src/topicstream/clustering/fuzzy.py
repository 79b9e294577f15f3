"""Fuzzy c-means and Gustafson-Kessel clustering."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass
class FuzzyResult:
    memberships: np.ndarray  # N x c, rows sum to 1
    centers: np.ndarray  # c x d
    n_iter: int
    converged: bool
    objective: list[float] = field(default_factory=list)  # per iteration
    row_sum_error: list[float] = field(default_factory=list)  # max |sum_i u_ik - 1| per iteration
    norm_matrices: np.ndarray | None = None  # c x d x d (GK only)

    @property
    def n_clusters(self) -> int:
        return len(self.centers)


def memberships_from_distances(d2: np.ndarray, m: float) -> np.ndarray:
    """Optimal memberships for squared distances ``d2`` (N x c).

    Computed in log space so tiny distances do not overflow. A point that
    sits exactly on one or more centers is shared equally between them.
    """
    d2 = np.asarray(d2, dtype=float)
    u = np.empty_like(d2)
    zero = d2 <= 0
    hit = zero.any(axis=1)
    if hit.any():
        u[hit] = zero[hit] / zero[hit].sum(axis=1, keepdims=True)
    rest = ~hit
    if rest.any():
        logd = -np.log(d2[rest]) / (m - 1.0)
        logd -= logd.max(axis=1, keepdims=True)
        w = np.exp(logd)
        u[rest] = w / w.sum(axis=1, keepdims=True)
    return u


def harden(memberships: np.ndarray) -> np.ndarray:
    """Crisp labels by largest membership; ties go to the lowest cluster index."""
    return np.argmax(np.asarray(memberships), axis=1)


def _check(x: np.ndarray, c: int, m: float):
    if x.ndim != 2:
        raise ValueError("points must be a 2-D array")
    if not 2 <= c <= len(x):
        raise ValueError(f"need 2 <= c <= N, got c={c}, N={len(x)}")
    if m <= 1:
        raise ValueError("fuzzifier m must be > 1")


def _initial_centers(x: np.ndarray, c: int, rng: np.random.Generator) -> np.ndarray:
    distinct = np.unique(x, axis=0)
    if len(distinct) < c:
        raise ValueError(f"only {len(distinct)} distinct points for {c} clusters")
    # k-means++ seeding: a nearly crisp m inherits k-means' sensitivity to a bad start
    centers = [distinct[rng.integers(len(distinct))]]
    for _ in range(1, c):
        d2 = ((distinct[:, None, :] - np.array(centers)[None, :, :]) ** 2).sum(axis=2).min(axis=1)
        centers.append(distinct[rng.choice(len(distinct), p=d2 / d2.sum())])
    return np.array(centers)


def _weighted_centers(x, um):
    return (um.T @ x) / um.sum(axis=0)[:, None]


def fuzzy_cmeans(points, c: int, m: float = 1.1, eps: float = 1e-3, max_iter: int = 300, seed: int = 42) -> FuzzyResult:
    """Alternating optimisation of memberships and centers under Euclidean distance.

    Stops when no membership changes by more than ``eps`` between iterations.
    """
    x = np.asarray(points, dtype=float)
    _check(x, c, m)
    centers = _initial_centers(x, c, np.random.default_rng(seed))
    u = None
    res = FuzzyResult(np.zeros((len(x), c)), centers, 0, False)
    for it in range(1, max_iter + 1):
        d2 = ((x[:, None, :] - centers[None, :, :]) ** 2).sum(axis=2)
        u_new = memberships_from_distances(d2, m)
        um = u_new ** m
        centers = _weighted_centers(x, um)
        d2 = ((x[:, None, :] - centers[None, :, :]) ** 2).sum(axis=2)
        res.objective.append(float((um * d2).sum()))
        res.row_sum_error.append(float(np.abs(u_new.sum(axis=1) - 1).max()))
        delta = np.inf if u is None else float(np.abs(u_new - u).max())
        u = u_new
        res.n_iter = it
        if delta < eps:
            res.converged = True
            break
    res.memberships, res.centers = u, centers
    return res


def gk_norm_matrix(cov: np.ndarray, rho: float = 1.0) -> np.ndarray:
    """A = (rho * det C)^(1/d) C^-1, which has det A = rho."""
    d = len(cov)
    sign, logdet = np.linalg.slogdet(cov)
    if sign <= 0:
        raise np.linalg.LinAlgError("covariance is not positive definite")
    return np.exp((np.log(rho) + logdet) / d) * np.linalg.inv(cov)


def fuzzy_covariance(x: np.ndarray, center: np.ndarray, um_col: np.ndarray) -> np.ndarray:
    """Membership-weighted scatter of ``x`` around ``center``."""
    diff = x - center
    return (um_col[:, None] * diff).T @ diff / um_col.sum()


def gustafson_kessel(points, c: int, m: float = 1.1, eps: float = 1e-3, max_iter: int = 300, seed: int = 42,
                     rho=None, reg: float = 1e-6, warm_m: float | None = 2.0, init=None) -> FuzzyResult:
    """Fuzzy clustering with a per-cluster adaptive Mahalanobis norm.

    Each cluster's norm matrix has fixed determinant ``rho[i]`` (default 1),
    so clusters adapt their shape but not their volume. Covariances get
    ``reg * trace / d`` added to the diagonal before inversion.

    Starts from ``init`` memberships if given, else from a fuzzy c-means
    partition. With a nearly crisp ``m`` the iteration rarely leaves that
    start, so when ``warm_m`` exceeds ``m`` a softer run at ``warm_m``
    provides the starting partition instead.
    """
    x = np.asarray(points, dtype=float)
    _check(x, c, m)
    n, d = x.shape
    if n <= d:
        raise ValueError(f"need more points than dimensions (N={n}, d={d})")
    rho = np.ones(c) if rho is None else np.broadcast_to(np.asarray(rho, dtype=float), (c,))
    if init is not None:
        u = np.asarray(init, dtype=float)
    elif warm_m is not None and warm_m > m:
        u = gustafson_kessel(x, c, warm_m, eps, max_iter, seed, rho, reg, warm_m=None).memberships
    else:
        u = fuzzy_cmeans(x, c, m, eps, max_iter, seed).memberships
    res = FuzzyResult(u, np.zeros((c, d)), 0, False)
    norms = np.zeros((c, d, d))
    for it in range(1, max_iter + 1):
        um = u ** m
        centers = _weighted_centers(x, um)
        d2 = np.empty((n, c))
        for i in range(c):
            cov = fuzzy_covariance(x, centers[i], um[:, i])
            tr = np.trace(cov)
            if tr <= 0:
                raise np.linalg.LinAlgError(f"singular covariance in cluster {i}")
            cov = cov + (reg * tr / d) * np.eye(d)
            try:
                norms[i] = gk_norm_matrix(cov, rho[i])
            except np.linalg.LinAlgError as exc:
                raise np.linalg.LinAlgError(f"singular covariance in cluster {i}") from exc
            diff = x - centers[i]
            d2[:, i] = np.maximum(np.einsum("nj,jk,nk->n", diff, norms[i], diff), 0.0)
        res.objective.append(float((um * d2).sum()))
        u_new = memberships_from_distances(d2, m)
        res.row_sum_error.append(float(np.abs(u_new.sum(axis=1) - 1).max()))
        delta = float(np.abs(u_new - u).max())
        u = u_new
        res.n_iter = it
        res.centers = centers
        if delta < eps:
            res.converged = True
            break
    res.memberships = u
    res.norm_matrices = norms
    return res
