"""Command-line front end.

Every option can come from a flag or from a flat ``key = value`` config file
whose keys are the long flag names without dashes in front (``vpls = 2000``,
``indirect-only = true``). Flags win over the file, the file wins over
built-in defaults, and each command writes a JSON sidecar recording every
resolved value with its source.

Exit status: 0 on success, 1 for configuration or input errors, 2 when the
pipeline itself fails.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Callable

from .accel import build_bvh
from .metrics import REFERENCE_SEED, make_reference, run_comparison
from .render import RenderConfig, render, write_pfm, write_png
from .sampling import SamplerConfig, generate_vpls, write_vpls
from .scene import SceneError, load_scene, replace_camera

CLI_STRATEGIES = {"baseline": "baseline_ir", "baseline_ir": "baseline_ir", "rejection": "rejection",
                  "metropolis": "metropolis", "hybrid": "hybrid"}
COMMANDS = ("render", "compare", "dump-vpls", "make-reference")


class ConfigError(Exception):
    pass


def _bool(text: str) -> bool:
    t = str(text).strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _strategy(text: str) -> str:
    try:
        return CLI_STRATEGIES[text.strip()]
    except KeyError:
        raise ValueError(f"unknown strategy {text!r} (choose from baseline, rejection, metropolis, hybrid)")


def _strategy_list(text: str) -> list[str]:
    return [_strategy(t) for t in text.split(",") if t.strip()]


def _int_list(text: str) -> list[int]:
    return [int(t) for t in text.split(",") if t.strip()]


def _resolution(text: str) -> tuple[int, int]:
    w, h = text.lower().split("x")
    return int(w), int(h)


def _mode(text: str) -> str:
    t = text.strip().replace("_", "-")
    if t not in ("equal-samples", "equal-rmse"):
        raise ValueError(f"unknown mode {text!r} (equal-samples or equal-rmse)")
    return t


@dataclass(frozen=True)
class Option:
    name: str
    parse: Callable[[str], Any]
    default: Any
    help: str
    commands: tuple[str, ...] = COMMANDS
    flag: bool = False  # store_true style switch


OPTIONS = [
    Option("scene", str, None, "scene file (required)"),
    Option("strategy", _strategy, "hybrid", "baseline | rejection | metropolis | hybrid",
           ("render", "dump-vpls")),
    Option("vpls", int, 1000, "VPL budget M"),
    Option("seed", int, 0, "top-level seed (VPL streams and pixel jitter)"),
    Option("threads", int, 1, "render worker threads"),
    Option("indirect-only", _bool, False, "skip direct lighting", ("render",), flag=True),
    Option("out", str, None, "output path or stem"),
    Option("spp", int, 4, "primary rays per pixel"),
    Option("resolution", _resolution, None, "override the camera resolution, e.g. 128x128"),
    Option("clamp-distance", float, None, "gather distance floor b (default 0.01 x scene diagonal)"),
    Option("close-fraction", float, 0.8, "share of the budget given to patch VPLs (hybrid)"),
    Option("distance-threshold", float, None, "close-range distance (default 0.5 x scene diagonal)"),
    Option("bounce-limit", int, 1, "maximum VPLs deposited per light path"),
    Option("rejection-pilot", int, None, "candidate paths for rejection sampling (default 4 x budget)"),
    Option("mutation-sigma", float, 0.1, "Metropolis direction perturbation (radians)"),
    Option("burn-in", int, 1000, "Metropolis burn-in steps"),
    Option("exposure", float, 1.0, "PNG exposure multiplier", ("render",)),
    Option("strategies", _strategy_list, "baseline,rejection,metropolis,hybrid", "comma-separated strategies",
           ("compare",)),
    Option("mode", _mode, "equal-samples", "equal-samples | equal-rmse", ("compare",)),
    Option("seeds", _int_list, "0,1,2,3,4", "comma-separated sampler seeds", ("compare",)),
    Option("target-rmse", float, None, "RMSE target for equal-rmse mode", ("compare",)),
    Option("tolerance", float, 0.05, "relative RMSE band for equal-rmse mode", ("compare",)),
    Option("max-probes", int, 12, "budget evaluations per equal-rmse search", ("compare",)),
    Option("reference-vpls", int, 200_000, "VPLs in the reference image", ("compare", "make-reference")),
    Option("reference-seed", int, REFERENCE_SEED, "seed of the reference VPLs", ("compare", "make-reference")),
    Option("cache-dir", str, ".manylights-cache", "reference image cache", ("compare", "make-reference")),
    Option("plot", str, None, "also write a VPL scatter plot here", ("dump-vpls",)),
]
OPTION_BY_NAME = {o.name: o for o in OPTIONS}
DEFAULT_OUT = {"render": "render", "compare": "compare", "dump-vpls": "vpls.txt", "make-reference": "reference"}


def read_config_file(path) -> dict[str, str]:
    """Parse ``key = value`` lines; ``#`` starts a comment."""
    values = {}
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc.strerror or exc}")
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected 'key = value'")
        key, value = (s.strip() for s in line.split("=", 1))
        key = key.replace("_", "-")
        if key not in OPTION_BY_NAME:
            raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
        values[key] = value
    return values


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(f"{self.prog}: {message}")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="manylights", description="Many-lights renderer with VPL samplers.")
    sub = parser.add_subparsers(dest="command", required=True)
    for cmd in COMMANDS:
        p = sub.add_parser(cmd, argument_default=argparse.SUPPRESS)
        p.add_argument("--config", help="flat key = value file; flags override it")
        for o in OPTIONS:
            if cmd not in o.commands:
                continue
            if o.flag:
                p.add_argument(f"--{o.name}", action="store_const", const="true", help=o.help)
            else:
                p.add_argument(f"--{o.name}", help=o.help + (f" [default {o.default}]" if o.default is not None else ""))
    return parser


def resolve(command: str, args: argparse.Namespace) -> dict[str, dict]:
    """Resolved ``{name: {"value", "source"}}`` for every option of ``command``."""
    file_values = read_config_file(args.config) if getattr(args, "config", None) else {}
    out = {}
    for o in OPTIONS:
        if command not in o.commands:
            continue
        flag_val = getattr(args, o.name.replace("-", "_"), None)
        if flag_val is not None:
            raw, source = flag_val, "flag"
        elif o.name in file_values:
            raw, source = file_values[o.name], "file"
        else:
            raw, source = o.default, "default"
        try:
            value = o.parse(raw) if isinstance(raw, str) else raw
        except ValueError as exc:
            raise ConfigError(f"--{o.name}: {exc}")
        out[o.name] = {"value": value, "source": source}
    if out["out"]["value"] is None:
        out["out"]["value"] = DEFAULT_OUT[command]
    if out["scene"]["value"] is None:
        raise ConfigError("no scene given (use --scene or 'scene = ...' in the config file)")
    return out


@dataclass
class JobConfig:
    scene_path: Path
    sampler: SamplerConfig
    render: RenderConfig
    out: Path
    options: dict = field(default_factory=dict)


def job_from(command: str, opts: dict[str, dict]) -> JobConfig:
    v = {k: d["value"] for k, d in opts.items()}
    scene_path = Path(v["scene"])
    if not scene_path.is_file():
        raise ConfigError(f"scene file not found: {scene_path}")
    try:
        sampler = SamplerConfig(strategy=v.get("strategy", "hybrid"), vpl_budget=v["vpls"],
                                close_fraction=v["close-fraction"], distance_threshold=v["distance-threshold"],
                                bounce_limit=v["bounce-limit"], clamp_distance=v["clamp-distance"],
                                seed=v["seed"], rejection_pilot=v["rejection-pilot"],
                                metropolis_mutation_sigma=v["mutation-sigma"], metropolis_burn_in=v["burn-in"])
        rcfg = RenderConfig(spp=v["spp"], clamp_distance=v["clamp-distance"],
                            include_direct=not v.get("indirect-only", False) and command == "render",
                            seed=v["seed"], threads=v["threads"])
    except ValueError as exc:
        raise ConfigError(str(exc))
    return JobConfig(scene_path, sampler, rcfg, Path(v["out"]), opts)


def _load(job: JobConfig):
    res = job.options["resolution"]["value"]
    try:
        scene = load_scene(job.scene_path)
    except SceneError as exc:
        raise ConfigError(str(exc))
    if res is not None:
        scene = scene.with_camera(replace_camera(scene.camera, resolution=res))
    return scene, build_bvh(scene)


def _sidecar(path: Path, job: JobConfig, extra: dict) -> None:
    opts = {k: {"value": (list(d["value"]) if isinstance(d["value"], tuple) else d["value"]),
                "source": d["source"]} for k, d in job.options.items()}
    meta = {"options": opts, "seed": job.sampler.seed, "sampler": job.sampler.as_dict(), **extra}
    path.write_text(json.dumps(meta, indent=2, default=str))


def _stem(p: Path) -> Path:
    return p.with_suffix("") if p.suffix in (".pfm", ".png", ".json", ".csv", ".txt") else p


def cmd_render(job: JobConfig) -> int:
    scene, bvh = _load(job)
    t0 = time.perf_counter()
    vpls = generate_vpls(scene, bvh, job.sampler)
    img = render(scene, bvh, vpls, job.render)
    elapsed = time.perf_counter() - t0
    stem = _stem(job.out)
    stem.parent.mkdir(parents=True, exist_ok=True)
    write_pfm(img, stem.with_suffix(".pfm"))
    write_png(img, stem.with_suffix(".png"), exposure=job.options["exposure"]["value"])
    _sidecar(stem.with_suffix(".json"), job, {"vpls_generated": len(vpls), "time_s": elapsed,
                                              "include_direct": job.render.include_direct,
                                              "width": img.width, "height": img.height})
    print(f"wrote {stem.with_suffix('.pfm')} ({len(vpls)} VPLs, {elapsed:.2f} s)")
    return 0


def cmd_dump_vpls(job: JobConfig) -> int:
    scene, bvh = _load(job)
    vpls = generate_vpls(scene, bvh, job.sampler)
    job.out.parent.mkdir(parents=True, exist_ok=True)
    write_vpls(vpls, job.out)
    _sidecar(job.out.with_suffix(job.out.suffix + ".json"), job, {"vpls_generated": len(vpls)})
    plot = job.options["plot"]["value"]
    if plot:
        from .plotting import plot_vpls

        plot_vpls(scene, vpls, plot, title=f"{job.sampler.strategy}, M = {job.sampler.vpl_budget}")
    print(f"wrote {len(vpls)} VPLs to {job.out}")
    return 0


def cmd_make_reference(job: JobConfig) -> int:
    scene, bvh = _load(job)
    v = {k: d["value"] for k, d in job.options.items()}
    t0 = time.perf_counter()
    img = make_reference(scene, bvh, job.render, v["reference-vpls"], v["reference-seed"],
                         job.sampler.bounce_limit, v["cache-dir"])
    stem = _stem(job.out)
    stem.parent.mkdir(parents=True, exist_ok=True)
    write_pfm(img, stem.with_suffix(".pfm"))
    write_png(img, stem.with_suffix(".png"))
    _sidecar(stem.with_suffix(".json"), job, {"time_s": time.perf_counter() - t0})
    print(f"wrote {stem.with_suffix('.pfm')}")
    return 0


def cmd_compare(job: JobConfig) -> int:
    scene, bvh = _load(job)
    v = {k: d["value"] for k, d in job.options.items()}
    mode = v["mode"].replace("-", "_")
    if mode == "equal_rmse" and v["target-rmse"] is None:
        raise ConfigError("equal-rmse mode needs --target-rmse")
    strategies = [replace(job.sampler, strategy=s) for s in v["strategies"]]
    if not strategies:
        raise ConfigError("no strategies given")
    report = run_comparison(scene, bvh, strategies, job.render, mode, v["seeds"], target_rmse=v["target-rmse"],
                            reference_vpls=v["reference-vpls"], reference_seed=v["reference-seed"],
                            cache_dir=v["cache-dir"], tolerance=v["tolerance"], max_probes=v["max-probes"])
    stem = _stem(job.out)
    paths = report.write(stem)
    from .plotting import plot_comparison

    plot_comparison(report, stem.with_suffix(".png"))
    _sidecar(stem.with_name(stem.name + ".options.json"), job, {"report": str(paths["csv"])})
    sys.stdout.write(report.to_table())
    return 0


HANDLERS = {"render": cmd_render, "compare": cmd_compare, "dump-vpls": cmd_dump_vpls,
            "make-reference": cmd_make_reference}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except ConfigError as exc:
        parser.print_usage(sys.stderr)
        print(f"error: {exc}", file=sys.stderr)
        return 1
    try:
        opts = resolve(args.command, args)
        job = job_from(args.command, opts)
        return HANDLERS[args.command](job)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # pipeline failure
        print(f"error: {args.command} failed: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
