"""The hybrid sampler and the strategy dispatcher."""

from __future__ import annotations

import numpy as np

from .. import rng as rngmod
from ..accel import Bvh
from ..scene import PointLight, Scene
from .classify import ClassifiedScene, classify
from .config import SamplerConfig
from .metropolis import generate_metropolis_vpls
from .patch import generate_patch_vpls
from .rejection import generate_rejection_vpls
from .vpl import VplSet
from .walk import calibrated_count, deposit_rate, generate_ir_vpls

LUMA = np.array([0.2126, 0.7152, 0.0722])


def split_budget(total: int, weights) -> list[int]:
    """Largest-remainder split of ``total`` proportional to ``weights`` (ties to the lower index)."""
    w = np.asarray(weights, dtype=np.float64)
    if w.sum() <= 0:
        w = np.ones_like(w)
    exact = total * w / w.sum()
    base = np.floor(exact).astype(int)
    order = np.lexsort((np.arange(len(w)), -(exact - base)))
    base[order[: total - base.sum()]] += 1
    return base.tolist()


def light_budgets(scene: Scene, total: int) -> list[int]:
    return split_budget(total, [float(LUMA @ l.power) for l in scene.lights])


def _restricted_ir(scene, bvh, light, li, target, restrict_to, config, strategy, tag):
    rate = deposit_rate(scene, bvh, light, config.bounce_limit, restrict_to,
                        rngmod.stream(config.seed, strategy, li, rngmod.CALIBRATE))
    count = calibrated_count(target, rate)
    vs = generate_ir_vpls(scene, bvh, light, count, config.bounce_limit, restrict_to,
                          rngmod.stream(config.seed, strategy, li, rngmod.WALK), tag=tag)
    return vs, rate, count


def generate_hybrid_vpls(scene: Scene, bvh: Bvh, config: SamplerConfig,
                         classified: ClassifiedScene | None = None) -> VplSet:
    """Patch VPLs on the lit close range plus random-walk VPLs restricted to the distant range.

    Per light with budget M: K = round(close_fraction M) patch VPLs, and a
    restricted walk whose path count is ``(M - K) / rate``, with ``rate`` the
    distant deposits per path measured on a separate pilot. If the light
    sees no close-range triangle the whole budget goes to an unrestricted
    walk; if the distant range receives no deposits it all goes to patches.
    """
    if config.strategy != "hybrid":
        raise ValueError("generate_hybrid_vpls needs strategy='hybrid'")
    if classified is None:
        classified = classify(scene, config.threshold_for(scene))
    parts, info = [], []
    for li, (light, m) in enumerate(zip(scene.lights, light_budgets(scene, config.vpl_budget))):
        if m == 0:
            continue
        k = int(round(config.close_fraction * m))
        distant = classified.distant_set
        rate = deposit_rate(scene, bvh, light, config.bounce_limit, distant,
                            rngmod.stream(config.seed, "hybrid", li, rngmod.CALIBRATE)) if len(distant) else 0.0
        if rate == 0.0:
            k = m
        patch = VplSet.empty()
        if k > 0:
            patch = generate_patch_vpls(scene, bvh, classified, light, k,
                                        rngmod.stream(config.seed, "hybrid", li, rngmod.PATCH))
        fallback = bool(patch.diagnostics.get("empty_close_set", False))
        if fallback:
            vs, r, count = _restricted_ir(scene, bvh, light, li, m, None, config, "hybrid", "ir_distant")
        else:
            count = calibrated_count(m - len(patch), rate)
            vs = generate_ir_vpls(scene, bvh, light, count, config.bounce_limit, distant,
                                  rngmod.stream(config.seed, "hybrid", li, rngmod.WALK), tag="ir_distant")
        parts += [patch, vs]
        info.append({"light": li, "budget": m, "patch": len(patch), "distant": len(vs), "paths": count,
                     "distant_rate": rate, "close_fallback": fallback})
    return VplSet.concat(parts, lights=info, close_triangles=len(classified.close_set))


def generate_vpls(scene: Scene, bvh: Bvh, config: SamplerConfig) -> VplSet:
    """VPLs for ``config.strategy``; the budget is shared among lights by power.

    The same configuration (seed included) always returns the same VPLs.
    """
    s = config.strategy
    if s == "hybrid":
        return generate_hybrid_vpls(scene, bvh, config)
    parts = []
    clamp = config.clamp_for(scene)
    for li, (light, m) in enumerate(zip(scene.lights, light_budgets(scene, config.vpl_budget))):
        if m == 0:
            continue
        if s == "baseline_ir":
            vs, _, _ = _restricted_ir(scene, bvh, light, li, m, None, config, s, "ir_baseline")
        elif s == "rejection":
            pilot = max(config.pilot * m // config.vpl_budget, m)
            vs = generate_rejection_vpls(scene, bvh, scene.camera, light, m, pilot,
                                         rngmod.stream(config.seed, s, li, rngmod.PILOT), clamp,
                                         config.bounce_limit)
        else:
            vs = generate_metropolis_vpls(scene, bvh, scene.camera, light, m, config.metropolis_mutation_sigma,
                                          rngmod.stream(config.seed, s, li, rngmod.CHAIN), clamp,
                                          config.bounce_limit, config.metropolis_burn_in,
                                          pilot_rng=rngmod.stream(config.seed, s, li, rngmod.PILOT))
        parts.append(vs)
    if len(parts) == 1:
        return parts[0]
    return VplSet.concat(parts, per_light=[p.diagnostics for p in parts])
