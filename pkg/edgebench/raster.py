# edgebench/raster.py

import enum
import logging
from dataclasses import dataclass

import numpy as np

from edgebench.exceptions import (
    InvalidMaskError, PgmHeaderError, PgmMagicError, PgmMaxvalError,
    PgmParseError, PgmTruncatedError,
)
from edgebench.pgm_lexer import PgmHeaderLexer

logger = logging.getLogger(__name__)

MAX_INTENSITY = 65535

# label used for single-band datasets such as the synthetic corpus
SINGLE_BAND = 'band'

_header_lexer = PgmHeaderLexer()
_header_lexer.build()


class BandId(enum.Enum):
    """The 12 Sentinel-2 L2A spectral bands."""
    B01 = 'B01'
    B02 = 'B02'
    B03 = 'B03'
    B04 = 'B04'
    B05 = 'B05'
    B06 = 'B06'
    B07 = 'B07'
    B08 = 'B08'
    B8A = 'B8A'
    B09 = 'B09'
    B11 = 'B11'
    B12 = 'B12'

    @classmethod
    def parse(cls, name):
        try:
            return cls(str(name).strip().upper())
        except ValueError:
            raise ValueError(f"Unknown band: {name!r}")

    @property
    def is_nir(self):
        return self is NIR_BAND


NIR_BAND = BandId.B08


def _frozen(array, dtype):
    array = np.ascontiguousarray(array, dtype=dtype)
    array.setflags(write=False)
    return array


@dataclass(frozen=True, eq=False)
class GrayImage:
    width: int
    height: int
    pixels: np.ndarray

    def __post_init__(self):
        if self.width < 1 or self.height < 1:
            raise ValueError(f"Image dimensions must be positive, got {self.width}x{self.height}")
        pixels = np.asarray(self.pixels)
        if pixels.size != self.width * self.height:
            raise ValueError(f"Expected {self.width * self.height} pixels, got {pixels.size}")
        if pixels.size and (pixels.min() < 0 or pixels.max() > MAX_INTENSITY):
            raise ValueError(f"Pixel values must lie in 0..{MAX_INTENSITY}")
        object.__setattr__(self, 'pixels', _frozen(pixels.reshape(self.height, self.width), np.int64))

    @classmethod
    def from_array(cls, array):
        array = np.asarray(array)
        if array.ndim != 2:
            raise ValueError(f"Expected a 2-D array, got {array.ndim} dimensions")
        if not np.issubdtype(array.dtype, np.integer):
            if not np.array_equal(array, np.round(array)):
                raise ValueError("Pixel values must be integers")
        return cls(array.shape[1], array.shape[0], array.astype(np.int64))

    @property
    def shape(self):
        return (self.height, self.width)

    def __eq__(self, other):
        if not isinstance(other, GrayImage):
            return NotImplemented
        return self.shape == other.shape and np.array_equal(self.pixels, other.pixels)

    def __hash__(self):
        return hash((self.width, self.height, self.pixels.tobytes()))


@dataclass(frozen=True, eq=False)
class BinaryMap:
    width: int
    height: int
    bits: np.ndarray

    def __post_init__(self):
        if self.width < 1 or self.height < 1:
            raise ValueError(f"Map dimensions must be positive, got {self.width}x{self.height}")
        bits = np.asarray(self.bits)
        if bits.size != self.width * self.height:
            raise ValueError(f"Expected {self.width * self.height} values, got {bits.size}")
        if not np.isin(bits, (0, 1)).all():
            raise ValueError("Binary map values must be 0 or 1")
        object.__setattr__(self, 'bits', _frozen(bits.reshape(self.height, self.width), np.uint8))

    @classmethod
    def from_array(cls, array):
        array = np.asarray(array)
        if array.ndim != 2:
            raise ValueError(f"Expected a 2-D array, got {array.ndim} dimensions")
        return cls(array.shape[1], array.shape[0], array)

    @classmethod
    def zeros(cls, width, height):
        return cls(width, height, np.zeros((height, width), dtype=np.uint8))

    @property
    def shape(self):
        return (self.height, self.width)

    @property
    def count(self):
        """Number of 1-valued pixels."""
        return int(self.bits.sum(dtype=np.int64))

    def complement(self):
        return BinaryMap(self.width, self.height, 1 - self.bits)

    def __eq__(self, other):
        if not isinstance(other, BinaryMap):
            return NotImplemented
        return self.shape == other.shape and np.array_equal(self.bits, other.bits)

    def __hash__(self):
        return hash((self.width, self.height, self.bits.tobytes()))


def _read_pgm(path):
    with open(path, 'rb') as handle:
        data = handle.read()

    tokens, end = _header_lexer.header(data)
    if not tokens or tokens[0].type != 'MAGIC':
        raise PgmMagicError("Missing magic number", path)
    magic = tokens[0].value
    if magic not in ('P2', 'P5'):
        raise PgmMagicError(f"Unsupported magic number {magic}", path)
    if len(tokens) < 4 or any(tok.type != 'NUMBER' for tok in tokens[1:]):
        raise PgmHeaderError("Header must give width, height and maxval", path)

    width, height, maxval = (tok.value for tok in tokens[1:])
    if width < 1 or height < 1:
        raise PgmHeaderError(f"Invalid dimensions {width}x{height}", path)
    if not 1 <= maxval <= MAX_INTENSITY:
        raise PgmMaxvalError(f"maxval {maxval} outside 1..{MAX_INTENSITY}", path)

    count = width * height
    if magic == 'P5':
        if end >= len(data) or not data[end:end + 1].isspace():
            raise PgmTruncatedError("Missing whitespace before raster", path)
        payload = data[end + 1:]
        dtype = np.dtype('u1') if maxval < 256 else np.dtype('>u2')
        if len(payload) < count * dtype.itemsize:
            raise PgmTruncatedError(f"Raster has {len(payload)} bytes, expected {count * dtype.itemsize}", path)
        pixels = np.frombuffer(payload, dtype=dtype, count=count).astype(np.int64)
    else:
        samples = data[end:].split()
        if len(samples) < count:
            raise PgmTruncatedError(f"Raster has {len(samples)} samples, expected {count}", path)
        try:
            pixels = np.array([int(sample) for sample in samples[:count]], dtype=np.int64)
        except ValueError:
            raise PgmParseError("Raster samples must be non-negative integers", path)
        if pixels.size and pixels.min() < 0:
            raise PgmParseError("Raster samples must be non-negative integers", path)

    if pixels.size and pixels.max() > maxval:
        raise PgmMaxvalError(f"Pixel value {int(pixels.max())} exceeds maxval {maxval}", path)
    return pixels.reshape(height, width), maxval


def load_pgm(path):
    """Read a P2 or P5 portable graymap. Pixel values are returned unscaled."""
    pixels, _ = _read_pgm(path)
    return GrayImage.from_array(pixels)


def save_pgm(image, path, maxval=None, plain=False):
    """
    Write `image` as a binary (P5) graymap, or ASCII (P2) when `plain` is set.

    maxval defaults to 255 when every pixel fits in a byte and 65535 otherwise.
    """
    pixels = image.pixels
    peak = int(pixels.max())
    if maxval is None:
        maxval = 255 if peak <= 255 else MAX_INTENSITY
    if not 1 <= maxval <= MAX_INTENSITY or peak > maxval:
        raise ValueError(f"maxval {maxval} cannot represent pixel value {peak}")

    header = f"{'P2' if plain else 'P5'}\n{image.width} {image.height}\n{maxval}\n".encode('ascii')
    if plain:
        rows = (' '.join(str(int(v)) for v in row) for row in pixels)
        body = ('\n'.join(rows) + '\n').encode('ascii')
    else:
        dtype = np.dtype('u1') if maxval < 256 else np.dtype('>u2')
        body = pixels.astype(dtype).tobytes()

    with open(path, 'wb') as handle:
        handle.write(header + body)


def load_mask(path):
    """Read a land/water mask: 0 is land, maxval is water (mapped to 1)."""
    pixels, maxval = _read_pgm(path)
    values = np.unique(pixels)
    invalid = values[(values != 0) & (values != maxval)]
    if invalid.size:
        raise InvalidMaskError(
            f"{path}: mask contains values other than 0 and {maxval}: {invalid[:5].tolist()}",
            invalid.tolist(),
        )
    return BinaryMap.from_array((pixels == maxval).astype(np.uint8))


def save_mask(mask, path):
    save_pgm(GrayImage.from_array(mask.bits), path, maxval=1)


def normalize_to_255(image):
    """
    Linear min-max rescale to 0..255, rounding half up.

    A constant image maps to all zeros.
    """
    pixels = image.pixels
    low = int(pixels.min())
    span = int(pixels.max()) - low
    if span == 0:
        return GrayImage.from_array(np.zeros_like(pixels))
    # floor((255*(v-low) + span/2) / span) in integers
    scaled = (2 * 255 * (pixels - low) + span) // (2 * span)
    return GrayImage.from_array(scaled)
