"""Adversarially robust streaming graph coloring at desk scale."""

from .cubic import CubicColorer, RecolorFailed, color_universe_size
from .harness import (
    AdversaryFault,
    ConflictFloodAdversary,
    MonochromaticAdversary,
    RandomAdversary,
    run_game,
)
from .sketches import AlgorithmFailure, ExactBufferSketch, PaletteSketch
from .stream import EdgeToken, GroundTruthGraph, Op, StreamConfig, is_proper, product_coloring
from .switching import SwitchingColorer

__all__ = [
    "AdversaryFault",
    "AlgorithmFailure",
    "ConflictFloodAdversary",
    "CubicColorer",
    "EdgeToken",
    "ExactBufferSketch",
    "GroundTruthGraph",
    "MonochromaticAdversary",
    "Op",
    "PaletteSketch",
    "RandomAdversary",
    "RecolorFailed",
    "StreamConfig",
    "SwitchingColorer",
    "color_universe_size",
    "is_proper",
    "product_coloring",
    "run_game",
]
