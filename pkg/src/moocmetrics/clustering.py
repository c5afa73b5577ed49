"""Engagement clustering: correlation pruning, seeded k-means, elbow k
selection, Low/Moderate/High labeling, archetype naming and the
intrinsic/extrinsic quadrant map.

Features are clustered on raw counts by default (published centroids are in
raw units); pass standardize=True for z-scored features. Runs are pure and
deterministic for a given seed, and initial centroids are drawn from the
lexicographically sorted distinct rows so results are invariant (up to
cluster-id permutation) under row reordering.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import InvalidK, RangeInvalid
from .indicators import pearson, DegenerateInput

# Pruning priority when two variables correlate: keep the earlier one.
VARIABLE_PRIORITY = ("reading_freq", "writing_freq", "videos_watched",
                     "quiz_attempts", "logins", "downloads")

ARCHETYPES = ("Dropout", "PerfectStudents", "GamingTheSystem", "Social", "Unnamed")

# Scale bands over min-max-normalized cluster means. The published L/M/H
# annotations need a band rule, not plain max/min: 0.30/0.60 reproduces all
# sixteen undergraduate cells and still sends the max to High and the min to
# Low for any k >= 2.
LOW_BAND = 0.30
HIGH_BAND = 0.60


@dataclass
class FeatureMatrix:
    data: np.ndarray  # rows × retained variables
    names: list[str]
    row_ids: list[str]
    pruned: list[tuple[str, str]] = field(default_factory=list)  # (name, reason)

    @property
    def n_rows(self) -> int:
        return int(self.data.shape[0])


def select_variables(
    columns: dict[str, Sequence[float]],
    row_ids: Sequence[str],
    r_threshold: float = 0.8,
) -> FeatureMatrix:
    """Drop highly correlated candidates, keeping the higher-priority one.

    For every pair with |r| > `r_threshold` the variable later in the
    priority order is pruned with the pair's r recorded as the reason.
    Constant columns are pruned too (correlation undefined), never fatal.
    """
    if len(columns) < 2:
        raise RangeInvalid("need at least 2 candidate columns")
    order = sorted(
        columns,
        key=lambda n: (VARIABLE_PRIORITY.index(n) if n in VARIABLE_PRIORITY
                       else len(VARIABLE_PRIORITY), n),
    )
    pruned: list[tuple[str, str]] = []
    retained: list[str] = []
    for name in order:
        values = list(columns[name])
        if len(set(values)) <= 1:
            pruned.append((name, "constant column"))
            continue
        reason = None
        for kept in retained:
            try:
                r = pearson(values, columns[kept]).r
            except DegenerateInput:
                continue
            if abs(r) > r_threshold:
                reason = f"|r|={abs(r):.3f} with {kept}"
                break
        if reason is None:
            retained.append(name)
        else:
            pruned.append((name, reason))
    data = np.array([[float(columns[name][i]) for name in retained]
                     for i in range(len(row_ids))], dtype=float)
    return FeatureMatrix(data, retained, list(row_ids), pruned)


def matrix_from_vectors(vectors, standardize: bool = False) -> FeatureMatrix:
    """FeatureMatrix straight from EngagementVectors (no pruning pass)."""
    data = np.array([v.as_list() for v in vectors], dtype=float)
    if standardize and len(vectors):
        sd = data.std(axis=0)
        sd[sd == 0] = 1.0
        data = (data - data.mean(axis=0)) / sd
    return FeatureMatrix(
        data,
        ["reading_freq", "writing_freq", "videos_watched", "quiz_attempts"],
        [v.user_id for v in vectors],
    )


@dataclass
class ClusterModel:
    k: int
    centroids: np.ndarray
    assignments: np.ndarray
    wss_total: float
    wss_per_cluster: list[float]
    seed: int
    iterations: int
    converged: bool


def _initial_centroids(data: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    # Sample from sorted distinct rows so the draw ignores row order.
    distinct = np.unique(data, axis=0)
    if len(distinct) >= k:
        idx = rng.choice(len(distinct), size=k, replace=False)
        return distinct[np.sort(idx)].copy()
    pad = [distinct[i % len(distinct)] for i in range(k - len(distinct))]
    return np.vstack([distinct, np.array(pad)])


def _assign(data: np.ndarray, centroids: np.ndarray) -> np.ndarray:
    d2 = ((data[:, None, :] - centroids[None, :, :]) ** 2).sum(axis=2)
    return d2.argmin(axis=1)


def kmeans(m: FeatureMatrix, k: int, seed: int = 0, max_iter: int = 100) -> ClusterModel:
    """Lloyd iteration with Euclidean dissimilarity.

    Deterministic per seed. Empty clusters are repaired by reseeding the
    centroid to the point farthest from its current one.
    """
    data = m.data
    n = len(data)
    if not 1 <= k <= n:
        raise InvalidK(f"k={k} outside 1..{n}")
    rng = np.random.default_rng(seed)
    centroids = _initial_centroids(data, k, rng)
    prev: Optional[np.ndarray] = None
    assignments = _assign(data, centroids)
    converged = False
    iterations = 0
    for iterations in range(1, max_iter + 1):
        assignments = _assign(data, centroids)
        for _ in range(k):  # bounded empty-cluster repair
            sizes = np.bincount(assignments, minlength=k)
            empty = np.flatnonzero(sizes == 0)
            if len(empty) == 0:
                break
            dist = np.linalg.norm(data - centroids[assignments], axis=1)
            centroids[empty[0]] = data[int(dist.argmax())]
            assignments = _assign(data, centroids)
        if prev is not None and np.array_equal(assignments, prev):
            converged = True
            break
        prev = assignments.copy()
        for c in range(k):
            members = data[assignments == c]
            if len(members):
                centroids[c] = members.mean(axis=0)
    assignments = _assign(data, centroids)
    wss_per_cluster = []
    for c in range(k):
        members = data[assignments == c]
        wss_per_cluster.append(
            float(((members - centroids[c]) ** 2).sum()) if len(members) else 0.0
        )
    return ClusterModel(
        k, centroids, assignments, float(sum(wss_per_cluster)),
        wss_per_cluster, seed, iterations, converged,
    )


def best_kmeans(m: FeatureMatrix, k: int, seed: int = 0,
                n_restarts: int = 10, max_iter: int = 100) -> ClusterModel:
    """Best WSS over `n_restarts` seeded runs (restart seeds derived from seed)."""
    child_seeds = np.random.SeedSequence(seed).generate_state(n_restarts)
    best = None
    for s in child_seeds:
        model = kmeans(m, k, seed=int(s), max_iter=max_iter)
        if best is None or model.wss_total < best.wss_total:
            best = model
    return best


def elbow_from_curve(ks: Sequence[int], wss: Sequence[float]) -> tuple[int, bool]:
    """Pick the k maximizing the second difference of the WSS curve.

    Only interior points can be scored. Returns (k, low_confidence); ties go
    to the smaller k and are flagged low-confidence.
    """
    if len(ks) != len(wss) or len(ks) < 3:
        raise RangeInvalid("curve needs at least 3 (k, wss) points")
    scores = {}
    for i in range(1, len(ks) - 1):
        scores[ks[i]] = (wss[i - 1] - wss[i]) - (wss[i] - wss[i + 1])
    best_score = max(scores.values())
    winners = [k for k, s in sorted(scores.items()) if s == best_score]
    return winners[0], len(winners) > 1


@dataclass
class KChoice:
    k: int
    wss_curve: dict[int, float]
    low_confidence: bool


def choose_k(m: FeatureMatrix, k_range: tuple[int, int] = (3, 6),
             seed: int = 0, n_restarts: int = 10) -> KChoice:
    """Scree-based choice of k over an inclusive candidate range.

    WSS is computed one step beyond each end of the range so every candidate
    is an interior point of the curve.
    """
    lo, hi = k_range
    if not (2 <= lo <= hi <= m.n_rows - 1):
        raise RangeInvalid(f"k range {k_range} outside [2, rows-1]")
    ks = list(range(lo - 1, hi + 2))
    curve = {k: best_kmeans(m, k, seed=seed, n_restarts=n_restarts).wss_total for k in ks}
    best_k, low_confidence = elbow_from_curve(ks, [curve[k] for k in ks])
    return KChoice(best_k, curve, low_confidence)


@dataclass
class ClusterLabel:
    cluster_id: int
    size: int
    scales: dict  # variable -> "Low" | "Moderate" | "High"
    archetype: str
    certification_ratio: Optional[float] = None


@dataclass
class ClusterLabeling:
    labels: list[ClusterLabel]

    def by_archetype(self) -> dict[str, int]:
        return {lbl.archetype: lbl.cluster_id for lbl in self.labels}


def scale_means(means_per_cluster: Sequence[Sequence[float]], names: Sequence[str]) -> list[dict]:
    """L/M/H scale per variable from cluster means (band rule, see module doc)."""
    k = len(means_per_cluster)
    scales = [dict() for _ in range(k)]
    for j, name in enumerate(names):
        col = [means_per_cluster[c][j] for c in range(k)]
        lo, hi = min(col), max(col)
        for c in range(k):
            if k == 1 or hi == lo:
                scales[c][name] = "Moderate"
                continue
            norm = (col[c] - lo) / (hi - lo)
            if norm < LOW_BAND:
                scales[c][name] = "Low"
            elif norm > HIGH_BAND:
                scales[c][name] = "High"
            else:
                scales[c][name] = "Moderate"
    return scales


def _archetype(scales: dict) -> str:
    # Rule order matters: Perfect outranks Social (a perfect cluster may also
    # write a lot), and Gaming is the high-quiz remainder — its video level
    # varies by population, so quizzing without the full Perfect profile is
    # the discriminator.
    reads = scales.get("reading_freq")
    writes = scales.get("writing_freq")
    quizzes = scales.get("quiz_attempts")
    videos = scales.get("videos_watched")
    if scales and all(v == "Low" for v in scales.values()):
        return "Dropout"
    if reads == "High" and videos == "High" and quizzes == "High":
        return "PerfectStudents"
    if writes == "High":
        return "Social"
    if quizzes == "High":
        return "GamingTheSystem"
    return "Unnamed"


def label_clusters(
    model: ClusterModel,
    m: FeatureMatrix,
    certified: Optional[set[str]] = None,
) -> ClusterLabeling:
    """Scale and name each cluster from its per-variable means.

    With k=1 there is no comparison basis: everything is Moderate/Unnamed.
    """
    means = [model.centroids[c].tolist() for c in range(model.k)]
    scales = scale_means(means, m.names)
    labels = []
    for c in range(model.k):
        member_ids = [m.row_ids[i] for i in range(m.n_rows) if model.assignments[i] == c]
        ratio = None
        if certified is not None and member_ids:
            ratio = 100.0 * sum(1 for u in member_ids if u in certified) / len(member_ids)
        archetype = "Unnamed" if model.k == 1 else _archetype(scales[c])
        labels.append(ClusterLabel(c, len(member_ids), scales[c], archetype, ratio))
    return ClusterLabeling(labels)


EXPECTED_QUADRANT = {
    "Dropout": "bottom-left",
    "GamingTheSystem": "top-left",
    "Social": "bottom-right",
    "PerfectStudents": "top-right",
}


@dataclass
class CryerCell:
    cluster_id: int
    archetype: str
    intrinsic: float
    extrinsic: float
    quadrant: Optional[str]
    consistent: Optional[bool]  # archetype→quadrant check, None for Unnamed


@dataclass
class CryerPlacement:
    cells: list[CryerCell]


def cryer_map(model: ClusterModel, m: FeatureMatrix,
              labeling: Optional[ClusterLabeling] = None) -> CryerPlacement:
    """Place clusters on the intrinsic × extrinsic commitment quadrant map.

    Intrinsic = mean of the standardized reading and video cluster means,
    extrinsic = standardized quiz-attempt cluster mean; the quadrant split is
    each axis's cross-cluster median. A single cluster sits at the center
    with no quadrant.
    """
    labeling = labeling or label_clusters(model, m)
    means = np.array([model.centroids[c] for c in range(model.k)], dtype=float)

    def z(name: str) -> np.ndarray:
        if name not in m.names:
            return np.zeros(model.k)
        col = means[:, m.names.index(name)]
        sd = col.std()
        return (col - col.mean()) / sd if sd > 0 else np.zeros(model.k)

    intrinsic = (z("reading_freq") + z("videos_watched")) / 2.0
    extrinsic = z("quiz_attempts")
    cells = []
    if model.k == 1:
        cells.append(CryerCell(0, labeling.labels[0].archetype, 0.0, 0.0, None, None))
        return CryerPlacement(cells)
    x_med = float(np.median(intrinsic))
    y_med = float(np.median(extrinsic))
    for c in range(model.k):
        horiz = "right" if intrinsic[c] > x_med else "left"
        vert = "top" if extrinsic[c] > y_med else "bottom"
        quadrant = f"{vert}-{horiz}"
        archetype = labeling.labels[c].archetype
        consistent = None
        if archetype in EXPECTED_QUADRANT:
            consistent = EXPECTED_QUADRANT[archetype] == quadrant
        cells.append(CryerCell(c, archetype, float(intrinsic[c]), float(extrinsic[c]),
                               quadrant, consistent))
    return CryerPlacement(cells)


def pca_projection(m: FeatureMatrix) -> np.ndarray:
    """First two principal-component coordinates for the 2-D cluster plot."""
    data = m.data - m.data.mean(axis=0)
    if m.n_rows < 2 or data.shape[1] < 2:
        return np.zeros((m.n_rows, 2))
    _, _, vt = np.linalg.svd(data, full_matrices=False)
    return data @ vt[:2].T
