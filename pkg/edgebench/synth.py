# edgebench/synth.py
#
# Seeded synthetic coastline scenes. Each scene is a land/water mask with a
# wavy shoreline and a band image of it. Along most of the width the band's
# shoreline is sharp and registered with the mask. The rest of the shoreline
# is displaced a few rows (mixed pixels and misregistration) and fades out
# toward the image border. Short faint bars stand in for swell and land
# development clutter.

import logging
import math
from dataclasses import dataclass, field, replace
from typing import NamedTuple

import numpy as np
from scipy.special import ndtr, ndtri

from edgebench import metrics
from edgebench.canny import DEFAULT_SIGMA, DEFAULT_THRESHOLDS, ThresholdPair, canny, mask_to_edges
from edgebench.exceptions import DimensionMismatchError, EdgeBenchError
from edgebench.raster import BinaryMap, GrayImage, normalize_to_255

logger = logging.getLogger(__name__)

MIN_SCENE_SIZE = 16
MIN_CORPUS_WIDTH = 64
MAX_ATTEMPTS = 10

_MASK64 = (1 << 64) - 1

# peak Sobel response to a unit pixel step after sigma=1 smoothing, and the
# effective blur variance it corresponds to
_STEP_GAIN = 2.564
_PIXEL_BLUR_VAR = 1.19

# rows kept clear between the shoreline and any clutter bar
_CLUTTER_MARGIN = 12
_BAR_HEIGHT = 4

# columns of the soft gap between the registered and the displaced shoreline
_DIP_RAMP_IN = 7
_DIP_CORE = 4
_DIP_RAMP_OUT = 6
# columns the displaced shoreline holds its strongest response
_PLATEAU = 4


class SceneGenerationError(EdgeBenchError):
    """A scene could not satisfy its construction within MAX_ATTEMPTS tries."""
    pass


def splitmix64(value):
    """One round of the splitmix64 finalizer (Steele, Lea, Flood)."""
    value = (value + 0x9E3779B97F4A7C15) & _MASK64
    value = ((value ^ (value >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    value = ((value ^ (value >> 27)) * 0x94D049BB133111EB) & _MASK64
    return value ^ (value >> 31)


def scene_seed(base_seed, index, attempt=0):
    """Per-scene seed: base seed mixed with the scene index, then the attempt."""
    mixed = splitmix64((base_seed & _MASK64) ^ splitmix64(index & _MASK64))
    return splitmix64(mixed ^ (attempt & _MASK64)) if attempt else mixed


def _check_knots(knots, name, non_negative=False):
    columns = [column for column, _ in knots]
    if any(b < a for a, b in zip(columns, columns[1:])):
        raise ValueError(f"{name} knots must have non-decreasing columns")
    if non_negative and any(value < 0 for _, value in knots):
        raise ValueError(f"{name} values must be non-negative")


@dataclass(frozen=True)
class SceneSpec:
    width: int = 128
    height: int = 128
    seed: int = 0
    land_level: int = 240
    water_level: int = 15
    noise_sigma: float = 0.0
    n_noise_edges: int = 0
    distractor_contrast: float = 0.0
    # shoreline amplitude in rows; the three sinusoids get amplitude, 1/2, 1/3
    amplitude: float = 3.0
    # rows the band's whole shoreline sits below the mask's
    coast_offset: int = 0
    # (column, rows) knots of extra shoreline displacement, linear in between
    displacement: tuple = field(default_factory=tuple)
    # (column, softness) knots of edge softness; 0 is a pixel-sharp step
    softness: tuple = field(default_factory=tuple)
    distractor_length: int = 16

    def __post_init__(self):
        if self.width < MIN_SCENE_SIZE or self.height < MIN_SCENE_SIZE:
            raise ValueError(f"Scenes must be at least {MIN_SCENE_SIZE}x{MIN_SCENE_SIZE}")
        if self.land_level == self.water_level:
            raise ValueError("land_level and water_level must differ")
        for level in (self.land_level, self.water_level):
            if not 0 <= level <= 255:
                raise ValueError(f"Intensity levels must lie in 0..255, got {level}")
        if self.noise_sigma < 0:
            raise ValueError("noise_sigma must be non-negative")
        if self.n_noise_edges < 0:
            raise ValueError("n_noise_edges must be non-negative")
        _check_knots(self.displacement, "displacement")
        _check_knots(self.softness, "softness", non_negative=True)


class Scene(NamedTuple):
    band: GrayImage
    mask: BinaryMap
    designed_best: ThresholdPair
    seed: int


def _boundary(spec):
    """Real-valued shoreline row per column."""
    rng = np.random.default_rng([spec.seed & _MASK64, 0])
    phases = rng.uniform(0.0, 2.0 * math.pi, size=3)
    x = np.arange(spec.width, dtype=np.float64)
    rows = np.full(spec.width, spec.height / 2.0)
    for harmonic, phase in zip((1, 2, 3), phases):
        rows += spec.amplitude / harmonic * np.sin(2.0 * math.pi * harmonic * x / spec.width + phase)
    return np.clip(rows, 2.0, spec.height - 2.0)


def gen_coastline_mask(spec):
    """Water (1) below the shoreline, land (0) above it."""
    rows = np.arange(spec.height, dtype=np.float64)[:, None] + 0.5
    water = rows > _boundary(spec)[None, :]
    return BinaryMap.from_array(water.astype(np.uint8))


def _shoreline_rows(mask):
    """First water row in every column (height when a column has none)."""
    water = mask.bits.astype(bool)
    first = np.argmax(water, axis=0)
    first[~water.any(axis=0)] = mask.height
    return first


def _knot_profile(knots, width):
    if not knots:
        return np.zeros(width)
    columns, values = zip(*knots)
    return np.interp(np.arange(width, dtype=np.float64), columns, values)


def _shift_range(spec):
    """Smallest and largest shoreline shift in rows, zero included."""
    shifts = [0.0] + [float(rows) for _, rows in spec.displacement]
    return spec.coast_offset + min(shifts), spec.coast_offset + max(shifts)


def _place_bars(spec, shoreline, rng):
    """Top-left corners of the clutter bars, clear of the shoreline."""
    length = min(spec.distractor_length, spec.width - 8)
    up, down = _shift_range(spec)
    top_limit = int(shoreline.min() + min(up, 0.0)) - _CLUTTER_MARGIN - _BAR_HEIGHT
    bottom_start = int(math.ceil(shoreline.max() + max(down, 0.0))) + _CLUTTER_MARGIN
    regions = []
    if top_limit >= 3:
        regions.append((3, top_limit))
    if bottom_start <= spec.height - 3 - _BAR_HEIGHT:
        regions.append((bottom_start, spec.height - 3 - _BAR_HEIGHT))
    if not regions or length < 4:
        if spec.n_noise_edges:
            logger.debug("No room for clutter bars in a %dx%d scene", spec.width, spec.height)
        return []
    bars = []
    for _ in range(spec.n_noise_edges):
        low, high = regions[rng.integers(len(regions))]
        row = int(rng.integers(low, high + 1))
        col = int(rng.integers(4, spec.width - 4 - length + 1))
        bars.append((row, col, length))
    return bars


def render_band(mask, spec):
    """
    Grayscale band for `mask`: land_level above the (shifted) shoreline,
    water_level below, n_noise_edges clutter bars, then seeded Gaussian noise.
    """
    if mask.shape != (spec.height, spec.width):
        raise DimensionMismatchError(mask.shape, (spec.height, spec.width))
    rng = np.random.default_rng([spec.seed & _MASK64, 1])
    land, water = float(spec.land_level), float(spec.water_level)

    shoreline = _shoreline_rows(mask)
    edge_row = shoreline + spec.coast_offset + _knot_profile(spec.displacement, spec.width) - 0.5
    rows = np.arange(spec.height, dtype=np.float64)[:, None]
    softness = _knot_profile(spec.softness, spec.width)[None, :]
    distance = edge_row[None, :] - rows
    with np.errstate(divide='ignore', invalid='ignore'):
        landness = np.where(softness > 0, ndtr(distance / np.where(softness > 0, softness, 1.0)),
                            (distance > 0).astype(np.float64))
    band = water + (land - water) * landness

    toward_water = np.sign(water - land)
    background = band.copy()
    for row, col, length in _place_bars(spec, shoreline, rng):
        sign = toward_water if row < shoreline.min() else -toward_water
        window = (slice(row, row + _BAR_HEIGHT), slice(col, col + length))
        band[window] = background[window] + sign * spec.distractor_contrast

    if spec.noise_sigma > 0:
        band = band + rng.normal(0.0, spec.noise_sigma, size=band.shape)
    return GrayImage.from_array(np.clip(np.rint(band), 0, 255).astype(np.int64))


def designed_pair(coast_peak, coast_floor, clutter_peak, pairs=DEFAULT_THRESHOLDS):
    """
    The last pair in the chain that leaves every clutter bar below its low
    bound and keeps the whole shoreline: its high bound lies below the
    shoreline's weakest peak and its low bound below the shoreline's floor.
    None when no pair qualifies.
    """
    chosen = None
    for pair in pairs:
        if pair.low >= clutter_peak and pair.high < coast_peak and pair.low < coast_floor:
            chosen = pair
    return chosen


def _softness_for(magnitude, contrast):
    """Edge softness whose smoothed Sobel peak is about `magnitude`."""
    ratio = magnitude / (4.0 * contrast)
    if ratio >= _STEP_GAIN / 4.0:
        return 0.0
    z = float(ndtri((ratio + 1.0) / 2.0))
    return math.sqrt(max(1.0 / z ** 2 - _PIXEL_BLUR_VAR, 0.0))


def realizable_indices(pairs):
    """
    Chain positions a scene can be built around. The top pair is never one,
    and a pair above others needs every lower high bound under its own low
    bound, since clutter below the low bound only survives a lower pair when
    it seeds itself above that pair's high bound.
    """
    return [k for k in range(len(pairs) - 1) if all(p.high < pairs[k].low for p in pairs[:k])]


def _between(rng, low, high, lo=0.35, hi=0.65):
    """Log-uniform draw from the middle of (low, high]."""
    return low * (high / low) ** rng.uniform(lo, hi)


def _scene_plan(base_spec, seed, pairs, rng):
    """Pick a designed pair and the shoreline and clutter levels that realize it."""
    # contrast after per-image min-max stretching
    spread = abs(base_spec.land_level - base_spec.water_level)
    stretch = 255.0 / (spread + 8.0 * base_spec.noise_sigma)
    contrast = spread * stretch
    top, below_top = pairs[-1], pairs[-2]
    if _STEP_GAIN * contrast <= top.high:
        raise SceneGenerationError(f"A sharp shoreline peaks near {_STEP_GAIN * contrast:.0f}, not above {top}")

    k = int(rng.choice(realizable_indices(pairs)))
    designed = pairs[k]
    strong = _between(rng, below_top.high, top.high, 0.3, 0.55)
    weak = min(_between(rng, designed.high, pairs[k + 1].high), strong)
    dip = top.low * rng.uniform(0.55, 0.7)
    if k == 0:
        clutter = designed.low * rng.uniform(0.4, 0.9)
    else:
        floor = max(p.high for p in pairs[:k])
        clutter = rng.uniform(floor + 0.2 * (designed.low - floor), designed.low)

    # registered sharp shoreline, soft dip, displaced plateau, then a fade to the border
    width = base_spec.width
    tail = int(round(width * rng.uniform(0.17, 0.22)))
    start = width - tail - _DIP_RAMP_IN - _DIP_CORE - _DIP_RAMP_OUT
    core = start + _DIP_RAMP_IN
    plateau = core + _DIP_CORE + _DIP_RAMP_OUT
    s_dip, s_strong, s_weak = (_softness_for(m, contrast) for m in (dip, strong, weak))
    softness = [(0, 0.0), (start, 0.0), (core, s_dip), (core + _DIP_CORE, s_dip),
                (plateau, s_strong), (plateau + _PLATEAU, s_strong), (width - 1, s_weak)]
    offset = base_spec.coast_offset or int(rng.integers(2, 4))
    displacement = [(0, 0.0), (core, 0.0), (plateau, float(offset)), (width - 1, float(offset))]
    if rng.integers(2):
        softness = [(width - 1 - c, s) for c, s in reversed(softness)]
        displacement = [(width - 1 - c, d) for c, d in reversed(displacement)]

    spec = replace(
        base_spec, seed=seed, coast_offset=0, softness=tuple(softness), displacement=tuple(displacement),
        n_noise_edges=base_spec.n_noise_edges or int(rng.integers(3, 7)),
        distractor_contrast=clutter / _STEP_GAIN / stretch,
    )
    expected = designed_pair(weak, weak, clutter, pairs)
    if expected != designed:
        raise SceneGenerationError(f"Scene plan for pair {designed} resolves to {expected}")
    return spec, designed


def _verify_scene(band, mask, designed, pairs, sigma):
    """
    Post-hoc check: FOM at the designed pair is the best over the chain and
    strictly beats every lower pair, the top pair keeps part of the shoreline
    and the pair below it keeps strictly more.
    """
    truth = mask_to_edges(mask)
    normalized = normalize_to_255(band)
    edges = [canny(normalized, pair, sigma) for pair in pairs]
    scores = [metrics.fom(e, truth) for e in edges]
    k = pairs.index(designed)
    if scores[k] < max(scores) - 1e-12:
        return f"fom peaks at {pairs[int(np.argmax(scores))]} not {designed}"
    if any(scores[j] >= scores[k] for j in range(k)):
        return f"fom ties a lower pair than {designed}"
    if edges[-1].count == 0 or edges[-2].count <= edges[-1].count:
        return "shoreline tiers not realized at the top of the chain"
    return None


def gen_corpus(n, base_spec=None, pairs=DEFAULT_THRESHOLDS, sigma=DEFAULT_SIGMA,
               max_attempts=MAX_ATTEMPTS):
    """
    Generate n scenes, each labelled with the threshold pair its construction
    makes best. A scene failing the post-hoc check is resampled with a fresh
    derived seed.
    """
    if n < 1:
        raise ValueError(f"Corpus size must be at least 1, got {n}")
    base_spec = base_spec or SceneSpec()
    if base_spec.width < MIN_CORPUS_WIDTH:
        raise ValueError(f"Corpus scenes must be at least {MIN_CORPUS_WIDTH} pixels wide, got {base_spec.width}")
    pairs = tuple(pairs)
    if len(pairs) < 3:
        raise ValueError("Corpus generation needs a chain of at least three pairs")

    scenes = []
    for index in range(n):
        for attempt in range(max_attempts):
            seed = scene_seed(base_spec.seed, index, attempt)
            rng = np.random.default_rng([seed, 2])
            spec, designed = _scene_plan(base_spec, seed, pairs, rng)
            mask = gen_coastline_mask(spec)
            band = render_band(mask, spec)
            problem = _verify_scene(band, mask, designed, pairs, sigma)
            if problem is None:
                scenes.append(Scene(band, mask, designed, seed))
                logger.debug("Scene %d: designed %s after %d attempt(s)", index, designed, attempt + 1)
                break
            logger.warning("Rejected scene %d attempt %d (seed %d): %s", index, attempt + 1, seed, problem)
        else:
            raise SceneGenerationError(f"Scene {index} failed its construction check {max_attempts} times")
    logger.info("Generated %d scenes", len(scenes))
    return scenes
