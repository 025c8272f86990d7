"""Nearest-neighbor machinery: max-norm kd-tree, KSG estimators, kNN permutation.

The KSG conditional estimator and the conditional resampler both work on
Chebyshev (max-norm) distances.  Small exact queries go through the kd-tree
here; the estimators lean on scipy's cKDTree for the all-pairs counting
passes, which matters once n reaches the tens of thousands.
"""

import heapq
import os
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import cKDTree

from .data import SampleSet
from .seeding import rng_from

__all__ = [
    "KdTree",
    "knn_query",
    "digamma",
    "ksg_cmi",
    "ksg_cmi_sweep",
    "ksg_mi",
    "knn_permute_generator",
    "knn_permute_apply",
]

_LEAF_SIZE = 16
JITTER_SCALE = 1e-10

EULER_GAMMA = 0.5772156649015328606


def n_workers() -> int:
    """Thread count for the scipy tree queries, from CMIKIT_THREADS (default: all)."""
    raw = os.environ.get("CMIKIT_THREADS", "").strip()
    if raw:
        try:
            w = int(raw)
        except ValueError:
            raise ValueError(f"CMIKIT_THREADS must be an integer, got {raw!r}")
        if w > 0:
            return w
    return -1


# --- hand-built max-norm kd-tree -------------------------------------------

@dataclass
class _Node:
    axis: int = -1
    split: float = 0.0
    left: "object" = None
    right: "object" = None
    indices: np.ndarray = None  # leaf payload


@dataclass
class KdTree:
    """Static kd-tree over row points under the l-infinity metric."""

    points: np.ndarray
    _root: _Node = field(init=False, repr=False)

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=np.float64)
        if pts.ndim != 2 or pts.shape[0] == 0 or pts.shape[1] == 0:
            raise ValueError("points must be a nonempty 2-D matrix")
        if not np.all(np.isfinite(pts)):
            raise ValueError("points must be finite")
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "_root", self._build(np.arange(pts.shape[0])))

    def _build(self, idx: np.ndarray) -> _Node:
        if idx.size <= _LEAF_SIZE:
            return _Node(indices=idx)
        sub = self.points[idx]
        spread = sub.max(axis=0) - sub.min(axis=0)
        axis = int(np.argmax(spread))
        if spread[axis] == 0.0:  # all points identical: no split possible
            return _Node(indices=idx)
        order = np.argsort(sub[:, axis], kind="stable")
        mid = idx.size // 2
        split = float(sub[order[mid], axis])
        left, right = idx[order[:mid]], idx[order[mid:]]
        return _Node(axis=axis, split=split, left=self._build(left), right=self._build(right))


def knn_query(t: KdTree, q, k: int):
    """k nearest stored points to ``q`` in max-norm; ties broken by lower index.

    Returns (indices, distances), both length k, sorted by ascending distance
    then index.
    """
    q = np.asarray(q, dtype=np.float64)
    if q.ndim != 1 or q.shape[0] != t.points.shape[1]:
        raise ValueError("query point dimensionality mismatch")
    m = t.points.shape[0]
    if not 1 <= k <= m:
        raise ValueError(f"k must be in [1, {m}], got {k}")

    # max-heap of the current best k as (-distance, -index)
    heap: list[tuple[float, int]] = []

    def visit(node: _Node):
        if node.indices is not None:
            d = np.max(np.abs(t.points[node.indices] - q), axis=1)
            for di, ii in zip(d, node.indices):
                cand = (-float(di), -int(ii))
                if len(heap) < k:
                    heapq.heappush(heap, cand)
                elif cand > heap[0]:
                    heapq.heapreplace(heap, cand)
            return
        gap = q[node.axis] - node.split
        near, far = (node.right, node.left) if gap >= 0 else (node.left, node.right)
        visit(near)
        # far side cannot beat the current worst unless its slab distance allows it
        if len(heap) < k or abs(gap) <= -heap[0][0]:
            visit(far)

    visit(t._root)
    out = sorted((-d, -i) for d, i in heap)
    idx = np.array([i for _, i in out], dtype=np.intp)
    dist = np.array([d for d, _ in out])
    return idx, dist


# --- digamma ----------------------------------------------------------------

# asymptotic tail coefficients: -B_{2n}/(2n) for x^{-2n}, n = 1..6
_PSI_TAIL = (-1.0 / 12, 1.0 / 120, -1.0 / 252, 1.0 / 240, -1.0 / 132, 691.0 / 32760)


def digamma(x):
    """psi(x) for x > 0, accurate to about 1e-10 absolute.

    Uses the recurrence psi(x+1) = psi(x) + 1/x to shift the argument to
    x >= 6, then the standard asymptotic series.
    """
    x = np.asarray(x, dtype=np.float64)
    scalar = x.ndim == 0
    x = np.atleast_1d(x).copy()
    if np.any(x <= 0):
        raise ValueError("digamma requires x > 0")
    acc = np.zeros_like(x)
    while True:
        small = x < 6.0
        if not np.any(small):
            break
        acc[small] -= 1.0 / x[small]
        x[small] += 1.0
    inv2 = 1.0 / (x * x)
    tail = np.zeros_like(x)
    p = inv2.copy()
    for coef in _PSI_TAIL:
        tail += coef * p
        p *= inv2
    res = acc + np.log(x) - 0.5 / x + tail
    return float(res[0]) if scalar else res


# --- KSG estimators ---------------------------------------------------------

def _jitter(block: np.ndarray, rng) -> np.ndarray:
    return block + rng.uniform(0.0, JITTER_SCALE, size=block.shape)


def _avg_digamma_counts(points: np.ndarray, radii: np.ndarray) -> np.ndarray:
    """Strictly-inside l-infinity ball counts at per-point radii, self excluded."""
    tree = cKDTree(points)
    counts = tree.query_ball_point(
        points, np.nextafter(radii, 0.0), p=np.inf, return_length=True, workers=n_workers()
    )
    return np.asarray(counts) - 1  # self always counted at distance 0


_PAIR_CHUNK = 400_000


def _subspace_counts(x, y, z, radii_by_k):
    """Strict ball counts (self excluded) in the z, xz, and yz subspaces.

    One tree pass collects candidates inside the largest per-point radius in
    z-space; every (k, subspace) count is then derived from those pairs.
    In the max metric a pair is inside an xz-ball iff it is inside both the
    z-ball and the x-interval, so no further tree work is needed.  Much
    cheaper than three tree passes per k once d_z is large, where ball
    queries degrade toward linear scans.
    """
    n = z.shape[0]
    r_max = radii_by_k[max(radii_by_k)]  # k-th NN distance grows with k
    lists = cKDTree(z).query_ball_point(
        z, np.nextafter(r_max, 0.0), p=np.inf, workers=n_workers()
    )
    lens = np.fromiter((len(l) for l in lists), dtype=np.intp, count=n)
    j_flat = np.fromiter((j for l in lists for j in l), dtype=np.intp, count=int(lens.sum()))
    i_flat = np.repeat(np.arange(n), lens)
    counts = {k: np.full((3, n), -1, dtype=np.int64) for k in radii_by_k}  # -1 removes self-pairs
    for s in range(0, j_flat.size, _PAIR_CHUNK):
        ii, jj = i_flat[s : s + _PAIR_CHUNK], j_flat[s : s + _PAIR_CHUNK]
        dz = np.max(np.abs(z[ii] - z[jj]), axis=1)
        dx = np.max(np.abs(x[ii] - x[jj]), axis=1)
        dy = np.max(np.abs(y[ii] - y[jj]), axis=1)
        for k, r in radii_by_k.items():
            rk = r[ii]
            in_z = dz < rk
            counts[k][0] += np.bincount(ii[in_z], minlength=n)
            counts[k][1] += np.bincount(ii[in_z & (dx < rk)], minlength=n)
            counts[k][2] += np.bincount(ii[in_z & (dy < rk)], minlength=n)
    return counts


def ksg_cmi_sweep(d: SampleSet, ks, seed: int = 0) -> dict[int, float]:
    """KSG conditional MI for several neighbor counts, sharing the heavy passes."""
    ks = sorted({int(k) for k in ks})
    if not ks:
        raise ValueError("ks must be nonempty")
    if d.dz < 1:
        raise ValueError("ksg_cmi needs a conditioning block; use ksg_mi for d_z = 0")
    if ks[0] < 1 or ks[-1] >= d.n:
        raise ValueError(f"need 1 <= k < n, got k={ks}, n={d.n}")
    rng = rng_from(seed, 97)
    x, y, z = _jitter(d.x, rng), _jitter(d.y, rng), _jitter(d.z, rng)
    joint = np.hstack([x, y, z])
    dists = cKDTree(joint).query(joint, k=ks[-1] + 1, p=np.inf, workers=n_workers())[0]
    counts = _subspace_counts(x, y, z, {k: dists[:, k] for k in ks})
    out = {}
    for k, (n_z, n_xz, n_yz) in counts.items():
        out[k] = float(
            digamma(k) - np.mean(digamma(n_xz + 1) + digamma(n_yz + 1) - digamma(n_z + 1))
        )
    return out


def ksg_cmi(d: SampleSet, k: int = 3, seed: int = 0) -> float:
    """Conditional mutual information I(X;Y|Z) in nats by the KSG neighbor method.

    psi(k) - mean_i[psi(n_xz+1) + psi(n_yz+1) - psi(n_z+1)] with all ball
    counts taken at the i-th point's distance to its k-th neighbor in the
    full (x,y,z) space.  Duplicates are broken by a tiny seeded jitter.
    """
    return ksg_cmi_sweep(d, [k], seed)[int(k)]


def ksg_mi(d: SampleSet, k: int = 3, seed: int = 0) -> float:
    """Mutual information I(X;Y) in nats by the KSG neighbor method (no z block)."""
    if d.dz != 0:
        raise ValueError("ksg_mi expects d_z = 0; use ksg_cmi or project first")
    if not 1 <= k < d.n:
        raise ValueError(f"need 1 <= k < n, got k={k}, n={d.n}")
    rng = rng_from(seed, 97)
    x, y = _jitter(d.x, rng), _jitter(d.y, rng)
    joint = np.hstack([x, y])
    radii = cKDTree(joint).query(joint, k=k + 1, p=np.inf, workers=n_workers())[0][:, -1]
    n_x = _avg_digamma_counts(x, radii)
    n_y = _avg_digamma_counts(y, radii)
    return float(digamma(k) + digamma(d.n) - np.mean(digamma(n_x + 1) + digamma(n_y + 1)))


# --- kNN conditional permutation generator ----------------------------------

def knn_permute_apply(pool_y: np.ndarray, pool_z: np.ndarray, z_query: np.ndarray, k: int = 5, seed: int = 0) -> np.ndarray:
    """Draw a y row for each query z from a disjoint (y, z) pool.

    For each query point, one of its k nearest pool neighbors in z-space is
    chosen uniformly and that pool row's y is returned.  Used to produce
    conditionally resampled halves where the pool and the queries come from
    different splits of the data.
    """
    pool_y = np.asarray(pool_y, dtype=np.float64)
    pool_z = np.asarray(pool_z, dtype=np.float64)
    z_query = np.asarray(z_query, dtype=np.float64)
    if pool_y.shape[0] != pool_z.shape[0] or pool_y.shape[0] == 0:
        raise ValueError("pool_y and pool_z must be nonempty with equal row counts")
    if z_query.ndim != 2 or z_query.shape[1] != pool_z.shape[1]:
        raise ValueError("z_query must match pool_z column count")
    if k < 1:
        raise ValueError("k must be positive")
    k = min(k, pool_z.shape[0])
    rng = rng_from(seed, 13)
    zp = _jitter(pool_z, rng_from(seed, 14))
    _, idx = cKDTree(zp).query(z_query, k=k, p=np.inf, workers=n_workers())
    idx = idx.reshape(z_query.shape[0], k)  # scipy squeezes k=1
    choice = rng.integers(k, size=z_query.shape[0])
    return pool_y[idx[np.arange(z_query.shape[0]), choice]]


def knn_permute_generator(d: SampleSet, k: int = 5, seed: int = 0) -> SampleSet:
    """Resample y against nearby z: emit (x_i, y_j, z_i) with z_j close to z_i.

    For each row, one of the k nearest z-neighbors (excluding the row itself)
    is chosen uniformly; x and z come through untouched.  Approximates a draw
    from p(x,z) p(y|z).
    """
    if d.n < 2:
        raise ValueError("need at least two rows")
    if k < 1:
        raise ValueError("k must be positive")
    if d.dz < 1:
        raise ValueError("generator needs a conditioning block")
    k = min(k, d.n - 1)
    rng = rng_from(seed, 11)
    z = _jitter(d.z, rng_from(seed, 12))
    _, idx = cKDTree(z).query(z, k=k + 1, p=np.inf, workers=n_workers())
    pick = np.empty(d.n, dtype=np.intp)
    for i in range(d.n):
        neighbors = idx[i][idx[i] != i][:k]
        pick[i] = neighbors[rng.integers(neighbors.size)]
    return SampleSet(d.x, d.y[pick], d.z)
