"""Hybrid detectors combining patterns, segmentation and graph clustering."""
from .catt import CattConfig, PostIndex, agf, catt_detect, cimawa, cimawa_score
from .fhkn import COHERENT, EMERGING, CoherentTopicMemory, FhknConfig, fhkn_detect
from .sgjp import (
    Segment,
    SgjpConfig,
    best_segmentation,
    length_weight,
    scp,
    scp_from_probabilities,
    segment_post,
    sgjp_detect,
    stickiness,
)

__all__ = [
    "COHERENT",
    "EMERGING",
    "CattConfig",
    "CoherentTopicMemory",
    "FhknConfig",
    "PostIndex",
    "Segment",
    "SgjpConfig",
    "agf",
    "best_segmentation",
    "catt_detect",
    "cimawa",
    "cimawa_score",
    "fhkn_detect",
    "length_weight",
    "scp",
    "scp_from_probabilities",
    "segment_post",
    "sgjp_detect",
    "stickiness",
]
