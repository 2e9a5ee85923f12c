"""K-Means clustering of tweet embeddings.

k-means++ seeding, triangle-inequality-accelerated iterations (with a plain
Lloyd mode used as the correctness oracle), multi-restart selection by
inertia, and fixed deterministic tie rules:

* nearest-centroid ties break to the lowest centroid index;
* empty clusters are repaired by seizing the point farthest from its
  assigned centroid (ties: lowest point index);
* restart ties on inertia break to the lowest restart index.

Convergence: a run stops when the summed squared centroid shift is
``<= tol * mean(per-dimension variance of the points)`` or after
``max_iter`` iterations; ``tol=0`` therefore means "run to an exact fixed
point".
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from stormtopics import _kernels
from stormtopics.errors import ValidationError


@dataclass(frozen=True)
class KMeansConfig:
    k: int
    n_init: int = 10
    max_iter: int = 300
    tol: float = 1e-4
    seed: int = 0
    normalize: bool = False
    algorithm: str = "elkan"

    def __post_init__(self):
        if self.k < 2:
            raise ValidationError("k must be >= 2")
        if self.n_init < 1:
            raise ValidationError("n_init must be >= 1")
        if self.tol < 0:
            raise ValidationError("tol must be >= 0")
        if self.algorithm not in ("elkan", "lloyd"):
            raise ValidationError(f"unknown algorithm {self.algorithm!r}")


@dataclass
class Clustering:
    """A partition of document ids into k topics."""

    model_tag: str
    k: int
    assignments: dict[str, int]
    inertia: float
    seed: Optional[int] = None
    centroids: Optional[np.ndarray] = field(default=None, repr=False)

    def members(self, topic: int) -> list[str]:
        return [i for i, t in self.assignments.items() if t == topic]

    def clusters(self) -> list[list[str]]:
        out: list[list[str]] = [[] for _ in range(self.k)]
        for i, t in self.assignments.items():
            out[t].append(i)
        return out

    def to_json(self) -> str:
        return json.dumps(
            {
                "model_tag": self.model_tag,
                "k": self.k,
                "assignments": self.assignments,
                "inertia": self.inertia,
                "seed": self.seed,
            },
            sort_keys=True,
        )

    @classmethod
    def from_json(cls, text: str) -> "Clustering":
        raw = json.loads(text)
        try:
            return cls(
                model_tag=str(raw["model_tag"]),
                k=int(raw["k"]),
                assignments={str(i): int(t) for i, t in raw["assignments"].items()},
                inertia=float(raw["inertia"]),
                seed=raw.get("seed"),
            )
        except (KeyError, TypeError, AttributeError):
            raise ValidationError("invalid clustering JSON") from None


def kmeans_pp_init(points: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    """k-means++ seeding: first centroid uniform, the rest by the D^2 law.

    When every remaining point has zero distance to the chosen set (all
    duplicates), the next centroid is drawn uniformly instead.
    """
    X = np.asarray(points, dtype=np.float64)
    n = X.shape[0]
    if k > n:
        raise ValidationError(f"k={k} exceeds the number of points ({n})")
    centers = np.empty((k, X.shape[1]), dtype=np.float64)
    first = int(rng.integers(n))
    centers[0] = X[first]
    d2 = ((X - centers[0]) ** 2).sum(axis=1)
    for c in range(1, k):
        total = float(d2.sum())
        if total > 0.0:
            r = rng.random() * total
            idx = int(np.searchsorted(np.cumsum(d2), r, side="right"))
            idx = min(idx, n - 1)
        else:
            idx = int(rng.integers(n))
        centers[c] = X[idx]
        d2 = np.minimum(d2, ((X - centers[c]) ** 2).sum(axis=1))
    return centers


def _inertia(X: np.ndarray, labels: np.ndarray, centers: np.ndarray) -> float:
    return float(((X - centers[labels]) ** 2).sum())


def fit(
    points: np.ndarray,
    cfg: KMeansConfig,
    ids: Optional[Sequence[str]] = None,
    model_tag: str = "fte",
) -> Clustering:
    """Run ``cfg.n_init`` seeded restarts and keep the lowest-inertia run."""
    X = np.ascontiguousarray(points, dtype=np.float64)
    if X.ndim != 2:
        raise ValidationError("points must be a 2-d array")
    if not np.isfinite(X).all():
        raise ValidationError("points contain NaN or Inf")
    n = X.shape[0]
    if cfg.k > n:
        raise ValidationError(f"k={cfg.k} exceeds the number of points ({n})")
    if ids is None:
        ids = [str(i) for i in range(n)]
    elif len(ids) != n:
        raise ValidationError("ids length does not match points")
    if cfg.normalize:
        norms = np.linalg.norm(X, axis=1, keepdims=True)
        norms[norms == 0.0] = 1.0
        X = X / norms

    tol_abs = cfg.tol * float(np.mean(np.var(X, axis=0))) if cfg.tol > 0 else 0.0
    run = _kernels.elkan_run if cfg.algorithm == "elkan" else _kernels.lloyd_run

    best = None
    for restart, child in enumerate(np.random.SeedSequence(cfg.seed).spawn(cfg.n_init)):
        rng = np.random.default_rng(child)
        init = kmeans_pp_init(X, cfg.k, rng)
        labels, centers, _ = run(X, init, cfg.max_iter, tol_abs)
        inertia = _inertia(X, labels, centers)
        if best is None or inertia < best[0]:
            best = (inertia, labels, centers)
    inertia, labels, centers = best
    return Clustering(
        model_tag=model_tag,
        k=cfg.k,
        assignments={str(i): int(t) for i, t in zip(ids, labels)},
        inertia=inertia,
        seed=cfg.seed,
        centroids=centers,
    )


def predict(clustering: Clustering, point: np.ndarray) -> int:
    """Index of the nearest centroid (squared Euclidean, ties to lowest index)."""
    if clustering.centroids is None:
        raise ValidationError("clustering carries no centroids (loaded from JSON?)")
    p = np.asarray(point, dtype=np.float64)
    if p.shape != (clustering.centroids.shape[1],):
        raise ValidationError(
            f"point dim {p.shape} does not match centroids "
            f"dim {clustering.centroids.shape[1]}"
        )
    d2 = ((clustering.centroids - p[None, :]) ** 2).sum(axis=1)
    return int(np.argmin(d2))
