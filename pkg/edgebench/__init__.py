from .raster import BandId, BinaryMap, GrayImage, load_mask, load_pgm, normalize_to_255, save_mask, save_pgm
from .canny import DEFAULT_THRESHOLDS, ThresholdPair, canny, mask_to_edges
from .metrics import ConfusionCounts, FomParams, SsimParams, confusion, fom, psnr, rmse, ssim
from .cmreform import verify_reformulations
from .synth import SceneSpec, gen_corpus
from .harness import SweepConfig, SweepReport, run_sweep

__version__ = "0.1.0"

__all__ = [
    'BandId', 'BinaryMap', 'GrayImage', 'load_mask', 'load_pgm', 'normalize_to_255', 'save_mask', 'save_pgm',
    'DEFAULT_THRESHOLDS', 'ThresholdPair', 'canny', 'mask_to_edges',
    'ConfusionCounts', 'FomParams', 'SsimParams', 'confusion', 'fom', 'psnr', 'rmse', 'ssim',
    'verify_reformulations',
    'SceneSpec', 'gen_corpus',
    'SweepConfig', 'SweepReport', 'run_sweep',
]
