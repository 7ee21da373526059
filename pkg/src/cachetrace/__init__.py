"""cachetrace: trace-driven CPU/GPU cache-hierarchy simulator with
deterministic workload generators for classic locality techniques
(blocking, loop/kernel fusion, array merging, array transpose)."""
from .errors import (
    BlockMismatchError,
    CacheTraceError,
    GeometryError,
    MetricUnavailableError,
    ModeConflictError,
    OutOfRangeError,
    ParseError,
    RaggedTraceError,
    SizeMismatchError,
    TileTooLargeError,
    ValidationError,
)
from .gpuexec import (
    ExecModelConfig,
    StepKernel,
    ThreadTrace,
    Transaction,
    apply_scratchpad,
    coalesce_warp,
    interleave_grid,
    stream_transactions,
)
from .harness import (
    CSV_HEADER,
    CompareReport,
    ExperimentConfig,
    HierarchySpec,
    Metric,
    Verdict,
    compare,
    compare_csv,
    emit_csv,
    parse_config,
    run_experiment,
    run_experiments,
)
from .hierarchy import (
    CacheLevelConfig,
    GpuCacheMode,
    Hierarchy,
    HierarchyConfig,
    LevelStats,
    Platform,
    Replacement,
    SimResult,
    WritePolicy,
    build_hierarchy,
    cpu_preset,
    gpu_preset,
    shared_memory_capacity,
)
from .oracle import reuse_distances, stack_distance_oracle
from .trace import AccessKind, MemoryAccess, Trace
from .workloads import BlockingVariant, Technique, WorkloadSpec, allocate_bases

__version__ = "0.1.0"

__all__ = [
    "AccessKind", "BlockMismatchError", "BlockingVariant", "CSV_HEADER",
    "CacheLevelConfig", "CacheTraceError", "CompareReport", "ExecModelConfig",
    "ExperimentConfig", "GeometryError", "GpuCacheMode", "Hierarchy",
    "HierarchyConfig", "HierarchySpec", "LevelStats", "MemoryAccess",
    "Metric", "MetricUnavailableError", "ModeConflictError", "OutOfRangeError",
    "ParseError", "Platform", "RaggedTraceError", "Replacement", "SimResult",
    "SizeMismatchError", "StepKernel", "Technique", "ThreadTrace",
    "TileTooLargeError", "Trace", "Transaction", "ValidationError", "Verdict",
    "WorkloadSpec", "WritePolicy", "allocate_bases", "apply_scratchpad",
    "build_hierarchy", "coalesce_warp", "compare", "compare_csv", "cpu_preset",
    "emit_csv", "gpu_preset", "interleave_grid", "parse_config",
    "reuse_distances", "run_experiment", "run_experiments",
    "shared_memory_capacity", "stack_distance_oracle", "stream_transactions",
]
