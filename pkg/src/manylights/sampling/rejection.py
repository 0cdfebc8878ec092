"""Keep only the candidate VPLs that matter more than average to the image."""

from __future__ import annotations

import numpy as np

from ..accel import Bvh
from ..scene import Camera, PointLight, Scene
from .probes import make_probes, score_vpls
from .vpl import VplSet
from .walk import generate_ir_vpls

# scores within this relative distance of the mean count as "at the mean", so
# that a pool of identical scores is not split by rounding in the mean itself
MEAN_RTOL = 1e-12


def select_by_score(scores: np.ndarray, budget: int) -> tuple[np.ndarray, np.ndarray, int]:
    """Indices to keep, a per-kept "is a fill" flag, and the number of above-mean candidates.

    Above-mean candidates are taken in generation order up to ``budget``. If
    there are fewer, the best remaining candidates (ties by generation order)
    fill the budget and are flagged.
    """
    n = len(scores)
    if n == 0:
        return np.zeros(0, dtype=np.int64), np.zeros(0, dtype=bool), 0
    mean = scores.mean()
    good = scores >= mean - MEAN_RTOL * abs(mean)
    above = np.flatnonzero(good)
    if len(above) >= budget:
        return above[:budget], np.zeros(budget, dtype=bool), len(above)
    rest = np.flatnonzero(~good)
    rest = rest[np.lexsort((rest, -scores[rest]))][: budget - len(above)]
    kept = np.concatenate([above, rest])
    flags = np.concatenate([np.zeros(len(above), dtype=bool), np.ones(len(rest), dtype=bool)])
    return kept, flags, len(above)


def generate_rejection_vpls(scene: Scene, bvh: Bvh, camera: Camera, light: PointLight, budget: int,
                            pilot: int, rng: np.random.Generator, clamp_distance: float | None = None,
                            bounce_limit: int = 1) -> VplSet:
    """``budget`` VPLs filtered out of ``pilot`` random-walk paths.

    Estimator: candidates carry the usual ``1 / pilot`` path normalisation.
    When the above-mean pool is larger than the budget, the kept prefix stands
    in for the whole pool and is scaled by ``pool / kept``. Fills are not
    rescaled. Dropping the below-mean candidates removes their light, so the
    result is biased low by their share of the total power.
    """
    if pilot < budget:
        raise ValueError("pilot must be >= budget")
    clamp = clamp_distance if clamp_distance is not None else 0.01 * scene.diagonal
    cands = generate_ir_vpls(scene, bvh, light, pilot, bounce_limit, rng=rng, tag="rejection")
    scores = score_vpls(bvh, make_probes(scene, bvh, camera, clamp), cands)
    kept, fills, n_above = select_by_score(scores, budget)
    out = cands.subset(kept)
    scale = n_above / len(kept) if len(kept) and not fills.any() else 1.0
    out = out.scaled(scale)
    out.diagnostics = {"scores": scores, "mean_score": float(scores.mean()) if len(scores) else 0.0,
                       "kept_index": kept, "kept_scores": scores[kept], "fill": fills,
                       "n_above_mean": n_above, "scale": scale, "candidates": len(cands)}
    return out
