"""Level-set segmentation of speckled imagery under exponential, Weibull and Gamma intensity models."""
from .pipeline import SegmentationConfig, SegmentationResult, Segmenter, run
from .synth import SceneSpec, generate

__all__ = ["SegmentationConfig", "SegmentationResult", "Segmenter", "run", "SceneSpec", "generate"]
__version__ = "0.1.0"
