# edgebench/canny.py

import logging
import math
from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from edgebench.raster import BinaryMap, GrayImage

logger = logging.getLogger(__name__)

DEFAULT_SIGMA = 1.0

# relative tolerance under which two magnitudes count as equal in NMS
_TIE_RTOL = 1e-9

# 8-connectivity for hysteresis linking
_EIGHT_CONNECTED = np.ones((3, 3), dtype=bool)

# (row, col) step to the neighbour along each quantized gradient direction
_DIRECTION_STEPS = {
    0: (0, 1),
    45: (1, 1),
    90: (1, 0),
    135: (1, -1),
}


@dataclass(frozen=True, order=True)
class ThresholdPair:
    low: float
    high: float

    def __post_init__(self):
        if not 0 < self.low < self.high:
            raise ValueError(f"Threshold pair must satisfy 0 < low < high, got ({self.low}, {self.high})")

    def __str__(self):
        return f"[{self.low:g},{self.high:g}]"

    def dominates(self, other):
        """True when both bounds are at least those of `other`."""
        return self.low >= other.low and self.high >= other.high


# the six hysteresis pairs of the coastline study, a componentwise chain
DEFAULT_THRESHOLDS = (
    ThresholdPair(50, 100),
    ThresholdPair(50, 150),
    ThresholdPair(100, 200),
    ThresholdPair(100, 300),
    ThresholdPair(200, 400),
    ThresholdPair(200, 600),
)

GROUND_TRUTH_THRESHOLDS = ThresholdPair(50, 100)


@dataclass(frozen=True, eq=False)
class GradientField:
    magnitude: np.ndarray
    direction: np.ndarray

    def __post_init__(self):
        if self.magnitude.shape != self.direction.shape:
            raise ValueError("Magnitude and direction grids must share a shape")

    @property
    def shape(self):
        return self.magnitude.shape


def gaussian_kernel(sigma):
    """Normalized 1-D Gaussian of radius ceil(3*sigma)."""
    if not sigma > 0:
        raise ValueError(f"sigma must be positive, got {sigma}")
    radius = int(math.ceil(3 * sigma))
    offsets = np.arange(-radius, radius + 1, dtype=np.float64)
    weights = np.exp(-offsets ** 2 / (2.0 * sigma ** 2))
    weights /= weights.sum()
    # exact mirror so w[i] == w[-i] bit for bit
    return (weights + weights[::-1]) / 2.0


def smooth(image, sigma=DEFAULT_SIGMA):
    """Separable Gaussian blur, rows then columns, with replicated borders."""
    kernel = gaussian_kernel(sigma)
    grid = image.pixels.astype(np.float64) if isinstance(image, GrayImage) else np.asarray(image, dtype=np.float64)
    grid = ndimage.correlate1d(grid, kernel, axis=1, mode='nearest')
    return ndimage.correlate1d(grid, kernel, axis=0, mode='nearest')


def quantize_direction(gx, gy):
    """Map gradient angles to the nearest of 0, 45, 90, 135 degrees (mod 180)."""
    angle = np.degrees(np.arctan2(gy, gx)) % 180.0
    return (np.floor((angle + 22.5) / 45.0).astype(np.int64) % 4) * 45


def sobel_gradients(grid):
    grid = np.asarray(grid, dtype=np.float64)
    if grid.ndim != 2 or grid.shape[0] < 3 or grid.shape[1] < 3:
        raise ValueError(f"Sobel gradients need a grid of at least 3x3, got {grid.shape}")
    gx = ndimage.sobel(grid, axis=1, mode='nearest')
    gy = ndimage.sobel(grid, axis=0, mode='nearest')
    return GradientField(np.hypot(gx, gy), quantize_direction(gx, gy))


def _shifted(grid, step):
    """grid[r + dr, c + dc] with zeros outside the grid."""
    dr, dc = step
    out = np.zeros_like(grid)
    rows, cols = grid.shape
    out[max(0, -dr):rows - max(0, dr), max(0, -dc):cols - max(0, dc)] = \
        grid[max(0, dr):rows - max(0, -dr), max(0, dc):cols - max(0, -dc)]
    return out


def nonmax_suppress(field):
    """Keep magnitudes that are >= both neighbours along their gradient direction."""
    magnitude = field.magnitude
    keep = np.zeros(magnitude.shape, dtype=bool)
    for direction, (dr, dc) in _DIRECTION_STEPS.items():
        selected = field.direction == direction
        if not selected.any():
            continue
        tolerance = _TIE_RTOL * np.maximum(magnitude, 1.0)
        forward = _shifted(magnitude, (dr, dc))
        backward = _shifted(magnitude, (-dr, -dc))
        keep |= selected & (magnitude >= forward - tolerance) & (magnitude >= backward - tolerance)
    return np.where(keep, magnitude, 0.0)


def hysteresis(thinned, t):
    """
    Strong pixels (> high) plus weak pixels (> low) 8-connected to a strong one.
    """
    thinned = np.asarray(thinned, dtype=np.float64)
    candidates = thinned > t.low
    strong = thinned > t.high
    labels, count = ndimage.label(candidates, structure=_EIGHT_CONNECTED)
    if count == 0:
        edges = np.zeros(thinned.shape, dtype=np.uint8)
    else:
        seeded = np.zeros(count + 1, dtype=bool)
        seeded[np.unique(labels[strong])] = True
        seeded[0] = False
        edges = seeded[labels].astype(np.uint8)
    return BinaryMap.from_array(edges)


def canny(image, t, sigma=DEFAULT_SIGMA):
    if image.width < 3 or image.height < 3:
        raise ValueError(f"Canny needs an image of at least 3x3, got {image.width}x{image.height}")
    thinned = nonmax_suppress(sobel_gradients(smooth(image, sigma)))
    edges = hysteresis(thinned, t)
    logger.debug("canny %s sigma=%g -> %d edge pixels", t, sigma, edges.count)
    return edges


def mask_to_edges(mask):
    """Ground-truth edge map: the mask scaled to {0, 255} run through canny."""
    image = GrayImage.from_array(mask.bits.astype(np.int64) * 255)
    return canny(image, GROUND_TRUTH_THRESHOLDS, DEFAULT_SIGMA)
