"""Experiment orchestration: config parsing, workload -> exec model ->
hierarchy wiring, CSV reporting and A/B comparison."""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field, replace
from enum import Enum
from pathlib import Path
from typing import Callable, Iterator, Optional, Sequence, TextIO

import numpy as np
import yaml

from . import workloads as wl
from .errors import (
    MetricUnavailableError,
    ParseError,
    ValidationError,
)
from .gpuexec import ExecModelConfig, StepKernel, stream_transactions
from .hierarchy import (
    GpuCacheMode,
    Hierarchy,
    HierarchyConfig,
    Platform,
    Replacement,
    SimResult,
    build_hierarchy,
    cpu_preset,
    gpu_preset,
    shared_memory_capacity,
)
from .trace import Trace
from .workloads import BlockingVariant, Technique, WorkloadSpec

CSV_HEADER = [
    "experiment", "level", "hits", "misses", "miss_rate",
    "evictions", "transactions", "trace_length",
]


@dataclass(frozen=True)
class HierarchySpec:
    preset: str                       # "cpu" | "gpu"
    mode: Optional[GpuCacheMode] = None
    l1_ways: int = 4
    l2_ways: int = 16
    replacement: Replacement = Replacement.LRU

    def build(self) -> HierarchyConfig:
        if self.preset == "cpu":
            return cpu_preset()
        if self.preset == "gpu":
            if self.mode is None:
                raise ValidationError("gpu preset requires a mode")
            return gpu_preset(
                self.mode, l1_ways=self.l1_ways, l2_ways=self.l2_ways,
                replacement=self.replacement,
            )
        raise ValidationError(f"unknown hierarchy preset {self.preset!r}")


@dataclass(frozen=True)
class ExperimentConfig:
    id: str
    workload: WorkloadSpec
    hierarchy: HierarchySpec
    exec: Optional[ExecModelConfig] = None
    warmup: bool = False
    seed: int = 0
    dump_trace: bool = False

    def validate(self) -> None:
        self.workload.validate()
        if self.workload.platform == "GPU" and self.exec is None:
            raise ValidationError(
                f"{self.id}: GPU workloads require an exec section"
            )
        if self.workload.platform == "CPU" and self.exec is not None:
            raise ValidationError(
                f"{self.id}: CPU workloads must not carry an exec section"
            )
        if self.workload.platform == "GPU" and self.hierarchy.preset != "gpu":
            raise ValidationError(f"{self.id}: GPU workload on non-GPU hierarchy")
        if self.workload.platform == "CPU" and self.hierarchy.preset != "cpu":
            raise ValidationError(f"{self.id}: CPU workload on non-CPU hierarchy")


# ----------------------------------------------------------------------
# Config parsing
# ----------------------------------------------------------------------

_WORKLOAD_KEYS = {"technique", "platform", "n", "variant", "element_size", "block"}
_HIER_KEYS = {"preset", "mode", "l1_ways", "l2_ways", "replacement"}
_EXEC_KEYS = {
    "warp_size", "threads_per_block", "num_sms", "coalescing", "resident_warps",
}
_EXP_KEYS = {"id", "workload", "hierarchy", "exec", "warmup", "seed", "dump_trace"}

_VARIANTS = {
    Technique.BLOCKING: {"NAIVE", "HP_BLOCKS", "EQUAL_TILES", "SHARED_TILES"},
    Technique.FUSION: {"FUSED", "SEPARATE"},
    Technique.MERGING: {"MERGED", "UNMERGED", "MERGED_TEXTURE", "UNMERGED_TEXTURE"},
    Technique.TRANSPOSE: {"NAIVE", "TRANSPOSED"},
}


def _check_keys(section: dict, allowed: set, where: str) -> None:
    if not isinstance(section, dict):
        raise ParseError(f"{where}: expected a mapping")
    unknown = set(section) - allowed
    if unknown:
        raise ParseError(f"{where}: unknown keys {sorted(unknown)}")


def _enum(cls, value, where: str):
    try:
        return cls(value)
    except ValueError:
        raise ValidationError(
            f"{where}: {value!r} is not one of {[m.value for m in cls]}"
        ) from None


def _enum_by_name(cls, value, where: str):
    try:
        return cls[str(value)]
    except KeyError:
        raise ValidationError(
            f"{where}: {value!r} is not one of {[m.name for m in cls]}"
        ) from None


def parse_config(text: str) -> list[ExperimentConfig]:
    """Parse a YAML experiment document; unknown keys are rejected and
    defaults are applied."""
    try:
        doc = yaml.safe_load(text)
    except yaml.YAMLError as e:
        raise ParseError(f"invalid YAML: {e}") from None
    if not isinstance(doc, dict):
        raise ParseError("top level must be a mapping with an 'experiments' list")
    _check_keys(doc, {"experiments"}, "top level")
    exps = doc.get("experiments")
    if not isinstance(exps, list) or not exps:
        raise ParseError("'experiments' must be a non-empty list")

    out = []
    seen_ids = set()
    for i, entry in enumerate(exps):
        where = f"experiments[{i}]"
        _check_keys(entry, _EXP_KEYS, where)
        if "id" not in entry or "workload" not in entry:
            raise ParseError(f"{where}: 'id' and 'workload' are required")
        exp_id = str(entry["id"])
        if exp_id in seen_ids:
            raise ValidationError(f"duplicate experiment id {exp_id!r}")
        seen_ids.add(exp_id)

        wsec = entry["workload"]
        _check_keys(wsec, _WORKLOAD_KEYS, f"{where}.workload")
        for req in ("technique", "platform", "n"):
            if req not in wsec:
                raise ParseError(f"{where}.workload: missing {req!r}")
        technique = _enum(Technique, wsec["technique"], f"{where}.workload")
        platform = str(wsec["platform"])
        variant = str(wsec.get("variant", _default_variant(technique)))
        if variant not in _VARIANTS[technique]:
            raise ValidationError(
                f"{where}: variant {variant!r} invalid for {technique.value}; "
                f"choose from {sorted(_VARIANTS[technique])}"
            )
        spec = WorkloadSpec(
            technique=technique,
            platform=platform,
            n=int(wsec["n"]),
            variant=variant,
            element_size=int(wsec.get("element_size", wl.ELEMENT_SIZE)),
            block=int(wsec.get("block", 16)),
        )

        hsec = entry.get(
            "hierarchy", {"preset": "cpu" if platform == "CPU" else "gpu"}
        )
        _check_keys(hsec, _HIER_KEYS, f"{where}.hierarchy")
        mode = hsec.get("mode")
        hierarchy = HierarchySpec(
            preset=str(hsec.get("preset", "cpu")),
            mode=_enum(GpuCacheMode, mode, f"{where}.hierarchy") if mode else None,
            l1_ways=int(hsec.get("l1_ways", 4)),
            l2_ways=int(hsec.get("l2_ways", 16)),
            replacement=_enum_by_name(
                Replacement, hsec.get("replacement", "LRU"), f"{where}.hierarchy"
            ),
        )

        exec_cfg = None
        if "exec" in entry:
            esec = entry["exec"]
            _check_keys(esec, _EXEC_KEYS, f"{where}.exec")
            exec_cfg = ExecModelConfig(
                warp_size=int(esec.get("warp_size", 32)),
                threads_per_block=int(esec.get("threads_per_block", 256)),
                num_sms=int(esec.get("num_sms", 1)),
                coalescing=bool(esec.get("coalescing", True)),
                resident_warps=int(esec.get("resident_warps", 48)),
            )

        cfg = ExperimentConfig(
            id=exp_id,
            workload=spec,
            hierarchy=hierarchy,
            exec=exec_cfg,
            warmup=bool(entry.get("warmup", False)),
            seed=int(entry.get("seed", 0)),
            dump_trace=bool(entry.get("dump_trace", False)),
        )
        cfg.validate()
        out.append(cfg)
    return out


def _default_variant(technique: Technique) -> str:
    return {
        Technique.BLOCKING: "NAIVE",
        Technique.FUSION: "SEPARATE",
        Technique.MERGING: "UNMERGED",
        Technique.TRANSPOSE: "NAIVE",
    }[technique]


# ----------------------------------------------------------------------
# Workload construction
# ----------------------------------------------------------------------

def cpu_chunks_for(spec: WorkloadSpec) -> Callable[[], Iterator[Trace]]:
    t, v, n, b = spec.technique, spec.variant, spec.n, spec.block
    es = spec.element_size
    if t is Technique.BLOCKING:
        if v == "NAIVE":
            return lambda: wl.cpu_matmul_chunks(n, es)
        if v == "HP_BLOCKS":
            return lambda: wl.cpu_matmul_hp_blocked_chunks(n, b, es)
        if v == "EQUAL_TILES":
            return lambda: wl.cpu_matmul_equal_tiles_chunks(n, b, es)
        raise ValidationError("SHARED_TILES is GPU-only")
    if t is Technique.FUSION:
        return lambda: wl.cpu_loop_fusion_chunks(n, v == "FUSED", es)
    if t is Technique.MERGING:
        if v.endswith("_TEXTURE"):
            raise ValidationError("texture merging is GPU-only")
        return lambda: wl.cpu_array_merge_chunks(n, v == "MERGED", es)
    if t is Technique.TRANSPOSE:
        return lambda: wl.cpu_matmul_chunks(n, es, transposed_b=(v == "TRANSPOSED"))
    raise ValidationError(f"unsupported CPU workload {t}")


def gpu_launches_for(
    spec: WorkloadSpec, mode: GpuCacheMode
) -> list[StepKernel]:
    t, v, n, b = spec.technique, spec.variant, spec.n, spec.block
    es = spec.element_size
    if t is Technique.BLOCKING:
        if v == "NAIVE":
            return [wl.gpu_matmul_naive_kernel(n, es)]
        if v in ("EQUAL_TILES", "SHARED_TILES"):
            return [wl.gpu_matmul_tiled_kernel(
                n, b, es,
                scratchpad=(v == "SHARED_TILES"),
                shared_capacity=shared_memory_capacity(mode),
            )]
        raise ValidationError(f"GPU blocking variant {v!r} not supported")
    if t is Technique.FUSION:
        return wl.gpu_fusion_kernels(n, v == "FUSED", es)
    if t is Technique.MERGING:
        if v.endswith("_TEXTURE"):
            return [wl.gpu_texture_merge_kernel(n, v == "MERGED_TEXTURE", es)]
        return [wl.gpu_array_merge_kernel(n, v == "MERGED", es)]
    if t is Technique.TRANSPOSE:
        return [wl.gpu_matmul_naive_kernel(n, es, transposed_b=(v == "TRANSPOSED"))]
    raise ValidationError(f"unsupported GPU workload {t}")


# ----------------------------------------------------------------------
# Running
# ----------------------------------------------------------------------

def run_experiment(
    cfg: ExperimentConfig,
    dump_to: Optional[TextIO] = None,
) -> SimResult:
    """Generate the workload, push it through the execution model and
    hierarchy, and return per-level statistics."""
    cfg.validate()
    hier_cfg = cfg.hierarchy.build()
    echo: dict = {"config": cfg}
    if cfg.workload.platform == "CPU":
        hierarchy = build_hierarchy(hier_cfg, seed=cfg.seed)
        result = _run_cpu(cfg, hierarchy, dump_to)
    else:
        exec_cfg = replace(
            cfg.exec,
            segment_size=hier_cfg.enabled_levels[0].line_size,
        )
        hierarchy = build_hierarchy(
            hier_cfg, seed=cfg.seed, l1_copies=exec_cfg.num_sms
        )
        result = _run_gpu(cfg, hierarchy, exec_cfg, dump_to)
    if (
        cfg.workload.technique is Technique.TRANSPOSE
        and cfg.workload.variant == "TRANSPOSED"
    ):
        # host-side transpose overhead, reported separately from the
        # matmul metric
        echo["transpose_overhead_accesses"] = 2 * cfg.workload.n ** 2
    result.workload_echo = echo
    return result


def _run_cpu(cfg, hierarchy: Hierarchy, dump_to) -> SimResult:
    chunks = cpu_chunks_for(cfg.workload)
    if cfg.warmup:
        for chunk in chunks():
            hierarchy.run_chunk(chunk)
        hierarchy.reset_stats()
    total = 0
    for chunk in chunks():
        if dump_to is not None:
            chunk.dump(dump_to)
        hierarchy.run_chunk(chunk)
        total += len(chunk)
    return hierarchy.result(trace_length=total, transactions=total)


def _run_gpu(cfg, hierarchy: Hierarchy, exec_cfg: ExecModelConfig,
             dump_to) -> SimResult:
    launches = gpu_launches_for(cfg.workload, cfg.hierarchy.mode)

    def one_pass() -> tuple[int, int]:
        length = transactions = 0
        for kernel in launches:
            length += kernel.logical_accesses()
            for chunk, sm in stream_transactions(kernel, exec_cfg):
                hierarchy.run_chunk(chunk, sm=sm)
                transactions += len(chunk)
        return length, transactions

    if cfg.warmup:
        one_pass()
        hierarchy.reset_stats()
    if dump_to is not None:
        for kernel in launches:
            _dump_kernel(kernel, dump_to)
    length, transactions = one_pass()
    return hierarchy.result(trace_length=length, transactions=transactions)


def _dump_kernel(kernel: StepKernel, fh, threads_per_chunk: int = 4096) -> None:
    steps = np.arange(kernel.num_steps, dtype=np.int64)
    for t0 in range(0, kernel.num_threads, threads_per_chunk):
        tids = np.arange(
            t0, min(t0 + threads_per_chunk, kernel.num_threads), dtype=np.int64
        )
        addr = kernel.addr_fn(tids, steps)
        for ti, t in enumerate(tids):
            for s in range(kernel.num_steps):
                kind = "W" if kernel.kind_per_step[s] else "R"
                fh.write(
                    f"{t} {kind} {int(addr[ti, s]):#x} {wl.ELEMENT_SIZE} "
                    f"{int(kernel.tag_per_step[s])}\n"
                )


def run_experiments(
    configs: Sequence[ExperimentConfig],
    out_dir: Optional[Path] = None,
) -> list[SimResult]:
    results = []
    for cfg in configs:
        dump_fh = None
        if cfg.dump_trace and out_dir is not None:
            dump_fh = open(Path(out_dir) / f"{cfg.id}.trace", "w")
        try:
            results.append(run_experiment(cfg, dump_to=dump_fh))
        finally:
            if dump_fh is not None:
                dump_fh.close()
    return results


# ----------------------------------------------------------------------
# Reporting
# ----------------------------------------------------------------------

def result_rows(result: SimResult) -> list[dict]:
    cfg: ExperimentConfig = result.workload_echo["config"]
    rows = []
    for stats in result.levels:
        rows.append({
            "experiment": cfg.id,
            "level": stats.name if stats.enabled else f"{stats.name}(disabled)",
            "hits": stats.hits,
            "misses": stats.misses,
            "miss_rate": f"{stats.miss_rate:.6f}",
            "evictions": stats.evictions,
            "transactions": result.transactions,
            "trace_length": result.trace_length,
        })
    return rows


def emit_csv(results: Sequence[SimResult], destination) -> None:
    """Write one row per level per result, in config order, LF endings."""
    def write(fh):
        w = csv.DictWriter(fh, fieldnames=CSV_HEADER, lineterminator="\n")
        w.writeheader()
        for result in results:
            for row in result_rows(result):
                w.writerow(row)

    if hasattr(destination, "write"):
        write(destination)
    else:
        with open(destination, "w", newline="") as fh:
            write(fh)


class Metric(Enum):
    L1_MISSES = "L1_MISSES"
    L2_MISSES = "L2_MISSES"
    TRANSACTIONS = "TRANSACTIONS"


class Verdict(Enum):
    IMPROVED = "IMPROVED"
    REGRESSED = "REGRESSED"
    EQUAL = "EQUAL"


@dataclass(frozen=True)
class CompareReport:
    metric: Metric
    baseline: int
    candidate: int
    delta: int
    relative: float          # delta / baseline, 0 when baseline == 0
    verdict: Verdict

    def __str__(self) -> str:
        pct = f"{self.relative * +100:+.1f}%"
        return (
            f"{self.metric.value}: baseline={self.baseline} "
            f"candidate={self.candidate} delta={self.delta:+d} ({pct}) "
            f"-> {self.verdict.value}"
        )


def _metric_value(result: SimResult, metric: Metric) -> int:
    if metric is Metric.TRANSACTIONS:
        return result.transactions
    name = "L1" if metric is Metric.L1_MISSES else "L2"
    try:
        stats = result.level(name)
    except KeyError:
        raise MetricUnavailableError(f"no level named {name}") from None
    if not stats.enabled:
        raise MetricUnavailableError(f"{name} is disabled in this result")
    return stats.misses


def compare(
    baseline: SimResult, candidate: SimResult, metric: Metric
) -> CompareReport:
    """Directional A/B comparison; lower is better."""
    b = _metric_value(baseline, metric)
    c = _metric_value(candidate, metric)
    delta = c - b
    if delta < 0:
        verdict = Verdict.IMPROVED
    elif delta > 0:
        verdict = Verdict.REGRESSED
    else:
        verdict = Verdict.EQUAL
    return CompareReport(
        metric=metric, baseline=b, candidate=c, delta=delta,
        relative=(delta / b) if b else 0.0, verdict=verdict,
    )


def read_csv_metrics(path) -> dict[str, dict[str, dict[str, int]]]:
    """experiment id -> level -> column -> value, from an emit_csv file."""
    out: dict[str, dict[str, dict[str, int]]] = {}
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            exp = out.setdefault(row["experiment"], {})
            exp[row["level"]] = {
                k: int(row[k])
                for k in ("hits", "misses", "evictions", "transactions",
                          "trace_length")
            }
    return out


def compare_csv(baseline_path, candidate_path, metric: Metric) -> list[tuple[str, CompareReport]]:
    """Compare two emit_csv files experiment-by-experiment (matched by id)."""
    base = read_csv_metrics(baseline_path)
    cand = read_csv_metrics(candidate_path)

    def value(levels: dict, where: str) -> int:
        if metric is Metric.TRANSACTIONS:
            return next(iter(levels.values()))["transactions"]
        name = "L1" if metric is Metric.L1_MISSES else "L2"
        if name not in levels:
            raise MetricUnavailableError(f"{where}: {name} missing or disabled")
        return levels[name]["misses"]

    reports = []
    for exp_id in base:
        if exp_id not in cand:
            continue
        b = value(base[exp_id], f"baseline:{exp_id}")
        c = value(cand[exp_id], f"candidate:{exp_id}")
        delta = c - b
        verdict = (
            Verdict.IMPROVED if delta < 0
            else Verdict.REGRESSED if delta > 0 else Verdict.EQUAL
        )
        reports.append((exp_id, CompareReport(
            metric=metric, baseline=b, candidate=c, delta=delta,
            relative=(delta / b) if b else 0.0, verdict=verdict,
        )))
    return reports
