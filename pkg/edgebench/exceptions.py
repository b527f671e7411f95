# edgebench/exceptions.py

class EdgeBenchError(Exception):
    """Base class for all edgebench errors."""
    pass

class RasterError(EdgeBenchError):
    """Raised for problems reading or validating raster files."""
    pass

class PgmParseError(RasterError):
    """Base class for malformed portable graymap files."""
    def __init__(self, message, path=None):
        super().__init__(message if path is None else f"{path}: {message}")
        self.message = message
        self.path = path

class PgmMagicError(PgmParseError):
    """Unsupported or missing magic number."""
    pass

class PgmHeaderError(PgmParseError):
    """Header fields missing or not integers."""
    pass

class PgmMaxvalError(PgmParseError):
    """maxval outside 1..65535, or a pixel above maxval."""
    pass

class PgmTruncatedError(PgmParseError):
    """Raster payload shorter than width x height samples."""
    pass

class InvalidMaskError(RasterError):
    """Mask contains values other than 0 and maxval."""
    def __init__(self, message, values=()):
        super().__init__(message)
        self.message = message
        self.values = tuple(values)

class DimensionMismatchError(EdgeBenchError, ValueError):
    def __init__(self, left_shape, right_shape):
        super().__init__(f"Dimension mismatch: {left_shape} vs {right_shape}")
        self.left_shape = left_shape
        self.right_shape = right_shape

class DegenerateStatisticsError(EdgeBenchError, ValueError):
    """SSIM undefined: zero stabilizing constants with a constant map."""
    pass

class EmptyMapError(EdgeBenchError, ValueError):
    pass

class ThresholdSpecError(EdgeBenchError, ValueError):
    """Base class for errors in threshold list specifications."""
    pass

class ThresholdLexerError(ThresholdSpecError):
    def __init__(self, message, position):
        super().__init__(message)
        self.message = message
        self.position = position

class ThresholdSyntaxError(ThresholdSpecError):
    def __init__(self, message, position, token):
        super().__init__(message)
        self.message = message
        self.position = position
        self.token = token

class UnknownMetricError(EdgeBenchError, ValueError):
    pass

class MissingOracleError(EdgeBenchError, KeyError):
    def __init__(self, image):
        super().__init__(f"No oracle threshold for image '{image}'")
        self.image = image

    def __str__(self):
        return self.args[0]

class SweepCellError(EdgeBenchError):
    """Wraps a failure in one (image, band, pair) cell of a sweep."""
    def __init__(self, image, band, pair, cause):
        super().__init__(f"Sweep failed at image={image} band={band} pair={pair}: {cause}")
        self.image = image
        self.band = band
        self.pair = pair
        self.cause = cause
