"""VPL generation: classification, stratified patch sampling, random walks and their filters."""

from .classify import ClassifiedScene, classify, in_frustum
from .config import STRATEGIES, SamplerConfig
from .metropolis import generate_metropolis_vpls
from .patch import (AreaPrefixTable, build_area_table, generate_patch_vpls, light_facing_visible, lookup_g,
                    morton_code, morton_sort, sample_point_in_triangle)
from .probes import ProbeSet, make_probes, score_vpls
from .rejection import generate_rejection_vpls
from .strategies import generate_hybrid_vpls, generate_vpls, split_budget
from .vpl import TAGS, Vpl, VplSet, format_vpls, read_vpls, write_vpls
from .walk import calibrated_count, deposit_rate, generate_ir_vpls

__all__ = [
    "AreaPrefixTable", "ClassifiedScene", "ProbeSet", "STRATEGIES", "SamplerConfig", "TAGS", "Vpl", "VplSet",
    "build_area_table", "calibrated_count", "classify", "deposit_rate", "format_vpls", "generate_hybrid_vpls",
    "generate_ir_vpls", "generate_metropolis_vpls", "generate_patch_vpls", "generate_rejection_vpls",
    "generate_vpls", "in_frustum", "light_facing_visible", "lookup_g", "make_probes", "morton_code",
    "morton_sort", "read_vpls", "sample_point_in_triangle", "score_vpls", "split_budget", "write_vpls",
]
