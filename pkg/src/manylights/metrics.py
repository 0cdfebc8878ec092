"""Error measurement against a dense-VPL reference and strategy comparisons.

Two comparison modes are supported. *Equal samples* renders every strategy
with the same VPL budget and reports RMSE and time. *Equal RMSE* searches
each strategy's budget until its RMSE lands within a tolerance band around a
target and reports that budget and time. Timings cover VPL generation plus
rendering and never include building the reference.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import math
import time
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from .accel import Bvh
from .render import Image, RenderConfig, read_pfm, render, write_pfm
from .sampling import SamplerConfig, generate_vpls
from .scene import Scene, dump_scene

REFERENCE_VPLS = 200_000
REFERENCE_SEED = 0x5EED_0F_2EF  # fixed so every cache key names one image
CSV_HEADER = ("strategy", "vpl_count", "rmse", "time_s", "seed")
CACHE_VERSION = 1


def rmse(a: Image, b: Image) -> float:
    """Root-mean-square difference over all pixels and channels, in linear units."""
    pa, pb = np.asarray(a.pixels, dtype=np.float64), np.asarray(b.pixels, dtype=np.float64)
    if pa.shape != pb.shape:
        raise ValueError(f"image size mismatch: {pa.shape} vs {pb.shape}")
    return float(np.sqrt(np.mean((pa - pb) ** 2)))


# ---------------------------------------------------------------------------
# reference images


def reference_sampler(scene: Scene, config: RenderConfig, vpl_count: int = REFERENCE_VPLS,
                      seed: int = REFERENCE_SEED, bounce_limit: int = 1) -> SamplerConfig:
    return SamplerConfig(strategy="baseline_ir", vpl_budget=vpl_count, seed=seed, bounce_limit=bounce_limit,
                         clamp_distance=config.resolved_clamp(scene))


def reference_key(scene: Scene, config: RenderConfig, vpl_count: int, seed: int, bounce_limit: int) -> str:
    desc = {"version": CACHE_VERSION, "scene": dump_scene(scene), "spp": config.spp,
            "clamp": repr(config.resolved_clamp(scene)), "pixel_seed": config.seed,
            "vpl_count": vpl_count, "vpl_seed": seed, "bounce_limit": bounce_limit}
    return hashlib.sha256(json.dumps(desc, sort_keys=True).encode()).hexdigest()


def _load_cached(pfm: Path, side: Path, key: str, shape) -> Image | None:
    try:
        meta = json.loads(side.read_text())
        if meta.get("key") != key:
            return None
        img = read_pfm(pfm)
    except (OSError, ValueError, IndexError, json.JSONDecodeError):
        return None
    if img.pixels.shape != shape or not np.all(np.isfinite(img.pixels)):
        return None
    return img


def make_reference(scene: Scene, bvh: Bvh, config: RenderConfig, vpl_count: int = REFERENCE_VPLS,
                   seed: int = REFERENCE_SEED, bounce_limit: int = 1, cache_dir=None) -> Image:
    """Indirect-only render with a dense random-walk VPL set.

    With ``cache_dir`` the image is stored as ``ref-<key>.pfm`` plus a JSON
    sidecar holding the key, where the key hashes the scene text and every
    setting that affects the pixels. Unreadable or mismatching cache entries
    are rebuilt.
    """
    if config.include_direct:
        raise ValueError("reference images are indirect-only; pass include_direct=False")
    if not config.include_indirect:
        raise ValueError("reference images need include_indirect=True")
    key = reference_key(scene, config, vpl_count, seed, bounce_limit)
    shape = (scene.camera.height, scene.camera.width, 3)
    if cache_dir is not None:
        cache = Path(cache_dir)
        pfm, side = cache / f"ref-{key[:24]}.pfm", cache / f"ref-{key[:24]}.json"
        img = _load_cached(pfm, side, key, shape)
        if img is not None:
            return img
    vpls = generate_vpls(scene, bvh, reference_sampler(scene, config, vpl_count, seed, bounce_limit))
    img = render(scene, bvh, vpls, config)
    if cache_dir is not None:
        cache.mkdir(parents=True, exist_ok=True)
        write_pfm(img, pfm)
        side.write_text(json.dumps({"key": key, "vpl_count": vpl_count, "seed": seed, "vpls_generated": len(vpls),
                                    "bounce_limit": bounce_limit, "spp": config.spp,
                                    "clamp_distance": config.resolved_clamp(scene)}, indent=2))
        img = read_pfm(pfm)  # serve exactly what later cache hits will serve
    return img


# ---------------------------------------------------------------------------
# equal-RMSE search


@dataclass
class SearchResult:
    vpl_count: int
    rmse: float
    status: str  # "ok", "outside_tolerance" or "unreachable"
    probes: list[tuple[int, float]] = field(default_factory=list)


def search_budget(evaluate: Callable[[int], float], target: float, start: int = 1000, tolerance: float = 0.05,
                  max_probes: int = 12, max_vpls: int = 2 ** 20) -> SearchResult:
    """Find a budget whose RMSE lies within ``target * (1 +- tolerance)``.

    Doubling (or halving, if ``start`` is already too accurate) brackets the
    target, then bisection narrows the bracket. Each probe is one call to
    ``evaluate``. A budget counts as passing when its RMSE is at most the
    upper edge of the band. If no probe lands inside the band the smallest
    passing budget is returned as ``outside_tolerance``; if none passes at
    all the row is ``unreachable``.
    """
    if target <= 0:
        raise ValueError("target must be > 0")
    probes: list[tuple[int, float]] = []
    upper, lower = target * (1 + tolerance), target * (1 - tolerance)
    lo = hi = None
    hi_r = math.nan
    m = max(1, min(int(start), max_vpls))

    def done(m, r):
        return SearchResult(m, r, "ok", probes)

    while len(probes) < max_probes:
        r = evaluate(m)
        probes.append((m, r))
        if lower <= r <= upper:
            return done(m, r)
        if r > upper:
            lo = m
            if hi is not None or m >= max_vpls:
                break
            m = min(2 * m, max_vpls)
        else:
            hi, hi_r = m, r
            if lo is not None or m == 1:
                break
            m = max(1, m // 2)
    if hi is None:
        last_m, last_r = probes[-1]
        return SearchResult(last_m, last_r, "unreachable", probes)
    if lo is None:
        return SearchResult(hi, hi_r, "outside_tolerance", probes)
    while len(probes) < max_probes and hi - lo > 1:
        m = (lo + hi) // 2
        r = evaluate(m)
        probes.append((m, r))
        if lower <= r <= upper:
            return done(m, r)
        if r > upper:
            lo = m
        else:
            hi, hi_r = m, r
    return SearchResult(hi, hi_r, "outside_tolerance", probes)


# ---------------------------------------------------------------------------
# comparisons


@dataclass
class ComparisonRow:
    strategy: str
    vpl_count: int
    rmse: float
    time_s: float
    seed: int
    status: str = "ok"
    vpls_generated: int = 0
    probes: list = field(default_factory=list)


@dataclass
class ComparisonReport:
    mode: str
    rows: list[ComparisonRow]
    reference: dict
    render_config: dict
    target_rmse: float | None = None

    def strategies(self) -> list[str]:
        seen: list[str] = []
        for r in self.rows:
            if r.strategy not in seen:
                seen.append(r.strategy)
        return seen

    def summary(self) -> dict[str, dict]:
        """Mean and sample standard deviation per strategy, in declared order."""
        out = {}
        for s in self.strategies():
            rows = [r for r in self.rows if r.strategy == s]
            e = np.array([r.rmse for r in rows])
            m = np.array([r.vpl_count for r in rows], dtype=float)
            t = np.array([r.time_s for r in rows])
            sd = (lambda a: float(a.std(ddof=1)) if len(a) > 1 else 0.0)
            out[s] = {"rmse_mean": float(e.mean()), "rmse_std": sd(e), "vpl_mean": float(m.mean()),
                      "vpl_std": sd(m), "time_mean": float(t.mean()), "n": len(rows),
                      "unreachable": sum(r.status == "unreachable" for r in rows)}
        return out

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_HEADER)
        for r in self.rows:
            w.writerow([r.strategy, r.vpl_count, f"{r.rmse:.9g}", f"{r.time_s:.4f}", r.seed])
        return buf.getvalue()

    def to_table(self) -> str:
        head = ("strategy", "vpl_count", "rmse", "time_s", "seed", "status")
        body = [(r.strategy, str(r.vpl_count), f"{r.rmse:.6g}", f"{r.time_s:.3f}", str(r.seed), r.status)
                for r in self.rows]
        widths = [max(len(x) for x in col) for col in zip(head, *body)]
        fmt = "  ".join("{:<%d}" % w if i == 0 else "{:>%d}" % w for i, w in enumerate(widths))
        lines = [fmt.format(*head), "  ".join("-" * w for w in widths)]
        lines += [fmt.format(*b) for b in body]
        lines.append("")
        for s, st in self.summary().items():
            lines.append(f"{s}: rmse {st['rmse_mean']:.6g} +- {st['rmse_std']:.2g}, "
                         f"vpls {st['vpl_mean']:.0f} +- {st['vpl_std']:.0f}, time {st['time_mean']:.3f} s"
                         + (f", {st['unreachable']} unreachable" if st["unreachable"] else ""))
        return "\n".join(lines) + "\n"

    def to_json(self) -> str:
        return json.dumps({"mode": self.mode, "target_rmse": self.target_rmse, "reference": self.reference,
                           "render_config": self.render_config, "rows": [asdict(r) for r in self.rows],
                           "summary": self.summary()}, indent=2, default=str)

    def write(self, stem) -> dict[str, Path]:
        """Write ``stem.csv``, ``stem.txt`` and ``stem.json``; returns the paths."""
        stem = Path(stem)
        stem.parent.mkdir(parents=True, exist_ok=True)
        paths = {"csv": stem.with_suffix(".csv"), "txt": stem.with_suffix(".txt"), "json": stem.with_suffix(".json")}
        paths["csv"].write_text(self.to_csv())
        paths["txt"].write_text(self.to_table())
        paths["json"].write_text(self.to_json())
        return paths


def read_csv_report(path) -> list[dict]:
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def evaluate_strategy(scene: Scene, bvh: Bvh, sampler: SamplerConfig, render_config: RenderConfig,
                      reference: Image) -> tuple[float, float, int]:
    """(rmse, seconds, VPLs generated) for one sampler configuration."""
    t0 = time.perf_counter()
    vpls = generate_vpls(scene, bvh, sampler)
    img = render(scene, bvh, vpls, render_config)
    dt = time.perf_counter() - t0
    return rmse(img, reference), dt, len(vpls)


def run_comparison(scene: Scene, bvh: Bvh, strategies: Sequence[SamplerConfig], render_config: RenderConfig,
                   mode: str = "equal_samples", seeds: Sequence[int] | None = None, reference: Image | None = None,
                   target_rmse: float | None = None, reference_vpls: int = REFERENCE_VPLS,
                   reference_seed: int = REFERENCE_SEED, cache_dir=None, tolerance: float = 0.05,
                   max_probes: int = 12, max_vpls: int = 2 ** 20) -> ComparisonReport:
    """Compare samplers against one reference under one render configuration.

    Each entry of ``strategies`` is run once per seed (``seeds`` defaults to
    each config's own seed). The render is forced to indirect-only, matching
    the reference. Rows come back in declared order.
    """
    if not strategies:
        raise ValueError("need at least one strategy")
    if mode not in ("equal_samples", "equal_rmse"):
        raise ValueError(f"unknown mode {mode!r}")
    if mode == "equal_rmse" and (target_rmse is None or not target_rmse > 0):
        raise ValueError("equal_rmse mode needs a positive target_rmse")
    rc = replace(render_config, include_direct=False, include_indirect=True)
    if reference is None:
        reference = make_reference(scene, bvh, rc, reference_vpls, reference_seed,
                                   strategies[0].bounce_limit, cache_dir)
    rows = []
    for cfg in strategies:
        cfg = replace(cfg, clamp_distance=rc.resolved_clamp(scene))
        for seed in (seeds if seeds is not None else [cfg.seed]):
            sc = replace(cfg, seed=seed)
            if mode == "equal_samples":
                e, dt, n = evaluate_strategy(scene, bvh, sc, rc, reference)
                rows.append(ComparisonRow(cfg.strategy, cfg.vpl_budget, e, dt, seed, "ok", n))
            else:
                last = {}

                def ev(m, sc=sc):
                    e, dt, n = evaluate_strategy(scene, bvh, replace(sc, vpl_budget=m,
                                                                     rejection_pilot=None), rc, reference)
                    last[m] = (dt, n)
                    return e
                res = search_budget(ev, target_rmse, cfg.vpl_budget, tolerance, max_probes, max_vpls)
                dt, n = last[res.vpl_count]
                rows.append(ComparisonRow(cfg.strategy, res.vpl_count, res.rmse, dt, seed, res.status, n,
                                          res.probes))
    return ComparisonReport(mode, rows, {"vpl_count": reference_vpls, "seed": reference_seed},
                            {"spp": rc.spp, "clamp_distance": rc.resolved_clamp(scene), "seed": rc.seed,
                             "include_direct": False}, target_rmse)
