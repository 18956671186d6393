"""Serialization, windowing and scan machinery for event-based video reconstruction."""

from .block import ScanBlockConfig, run_hsfc_block
from .curves import (
    CurveKind,
    CurvePath,
    GridDims,
    deserialize,
    generate,
    generate_hilbert,
    generate_peano,
    generate_reshape,
    generate_trans_hilbert,
    generate_zorder,
    serialize,
)
from .events import EventGroup, VoxelGrid, group_events, parse_events, voxelize
from .locality import SegmentStats, SlrResult, closed_form_stats, empirical_slr, segment_stats
from .ssm import DiscreteSsm, ScanKernel, SsmParams, build_kernel, discretize, scan_convolutional, scan_recurrent, selective_scan
from .windowing import (
    OffsetMask,
    WindowOffset,
    WindowSet,
    build_mask,
    full_enumeration,
    mc_average,
    partition,
    reassemble,
    sample_offset,
)

__version__ = "0.1.0"
