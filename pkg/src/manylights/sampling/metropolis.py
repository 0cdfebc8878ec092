"""Metropolis-Hastings placement of VPLs along light paths.

The chain state is one light path: its emission direction plus the random
numbers that drive its later bounces. The target is the probe score of the
VPLs the path deposits. A mutation nudges the emission direction by an
isotropic Gaussian of width ``sigma`` in the tangent plane and renormalises;
the proposal is symmetric, so acceptance is ``min(1, f'/f)``.

Normalisation: a path traced with full light power deposits VPLs ``v(s)``.
A state visited by the chain stands for ``b / (N f(s))`` of that power, with
``N`` the recorded states and ``b`` the mean score of an independent pilot of
uniformly emitted paths, so the expected power matches plain random walks.
"""

from __future__ import annotations

import numpy as np

from ..accel import Bvh
from ..scene import Camera, PointLight, Scene
from .probes import make_probes, score_vpls
from .vpl import VplSet
from .walk import allowed_mask, path_randoms, trace

DEFAULT_BURN_IN = 1000


def _perturb(d: np.ndarray, sigma: float, g: np.ndarray) -> np.ndarray:
    a = np.array([1.0, 0.0, 0.0]) if abs(d[0]) < 0.9 else np.array([0.0, 1.0, 0.0])
    t = np.cross(d, a)
    t /= np.linalg.norm(t)
    s = np.cross(d, t)
    p = d + sigma * (g[0] * t + g[1] * s)
    return p / np.linalg.norm(p)


def generate_metropolis_vpls(scene: Scene, bvh: Bvh, camera: Camera, light: PointLight, budget: int,
                             mutation_sigma: float, rng: np.random.Generator,
                             clamp_distance: float | None = None, bounce_limit: int = 1,
                             burn_in: int = DEFAULT_BURN_IN, pilot_paths: int | None = None,
                             pilot_rng: np.random.Generator | None = None, target=None) -> VplSet:
    """At least ``budget`` VPLs from the post-burn-in states of one chain.

    ``target`` replaces the probe score: a callable taking the path's
    :class:`VplSet` and returning a non-negative number. The pilot (default
    ``max(1024, budget)`` paths) uses ``pilot_rng`` when given, otherwise
    ``rng``.
    """
    if budget < 1:
        raise ValueError("budget must be >= 1")
    if mutation_sigma < 0:
        raise ValueError("mutation_sigma must be >= 0")
    clamp = clamp_distance if clamp_distance is not None else 0.01 * scene.diagonal
    allowed = allowed_mask(scene, None)
    probes = make_probes(scene, bvh, camera, clamp) if target is None else None

    def run(dirs, bu):
        pos, nrm, inten, tri, path = trace(scene, bvh, light, dirs, bu, bounce_limit, light.power, allowed)
        return VplSet(pos, nrm, inten, "metropolis", tri), path

    def score_paths(vset, path, n):
        per_vpl = score_vpls(bvh, probes, vset)
        return np.bincount(path, weights=per_vpl, minlength=n)

    def f_of(vset, path, n):
        if target is None:
            return score_paths(vset, path, n)
        return np.array([float(target(vset.subset(path == i))) for i in range(n)])

    n_pilot = pilot_paths if pilot_paths is not None else max(1024, budget)
    prng = pilot_rng if pilot_rng is not None else rng
    p_dirs, p_bu = path_randoms(prng, n_pilot, bounce_limit)
    p_set, p_path = run(p_dirs, p_bu)
    p_f = f_of(p_set, p_path, n_pilot)
    b = float(p_f.mean())
    if not b > 0:
        # nothing the probes can see: fall back to unweighted paths
        dirs, bu = path_randoms(rng, budget, bounce_limit)
        vs, _ = run(dirs, bu)
        out = vs.scaled(1.0 / budget)
        out.diagnostics = {"fallback": True, "pilot_mean": b}
        return out

    start = int(rng.choice(n_pilot, p=p_f / p_f.sum()))
    d, bu = p_dirs[start].copy(), p_bu[start].copy()
    cur_set = p_set.subset(p_path == start)
    cur_f = float(p_f[start])
    accepted = proposed = 0
    records: list[tuple[VplSet, float]] = []
    n_vpls = 0
    step = 0
    while n_vpls < budget:
        g = rng.standard_normal(2)
        u = rng.random()
        nd = _perturb(d, mutation_sigma, g)
        vs, path = run(nd[None, :], bu[None, :])
        nf = float(f_of(vs, path, 1)[0])
        proposed += 1
        if cur_f <= 0.0 or u * cur_f < nf:
            d, cur_set, cur_f = nd, vs, nf
            accepted += 1
        if step >= burn_in:
            records.append((cur_set, cur_f))
            n_vpls += len(cur_set)
            if len(records) > 64 * budget and n_vpls == 0:
                break
        step += 1
    n_states = len(records)
    parts = [s.scaled(b / (n_states * f)) for s, f in records if f > 0 and len(s)]
    out = VplSet.concat(parts)
    out.diagnostics = {"fallback": False, "pilot_mean": b, "states": n_states, "accepted": accepted,
                       "proposed": proposed, "acceptance_rate": accepted / max(1, proposed),
                       "start_direction": p_dirs[start].copy()}
    return out
