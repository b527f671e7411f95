# edgebench/metrics.py

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage

from edgebench.exceptions import DegenerateStatisticsError, DimensionMismatchError, EmptyMapError

# PSNR at mse == 0; compares above every finite value and serializes as "inf"
PERFECT_PSNR = math.inf

PSNR_PEAK = 255.0


def is_perfect(value):
    return value == PERFECT_PSNR


@dataclass(frozen=True)
class ConfusionCounts:
    """Pixel tallies with 1 (edge) as the positive class."""
    tp: int
    tn: int
    fp: int
    fn: int

    def __post_init__(self):
        if min(self.tp, self.tn, self.fp, self.fn) < 0:
            raise ValueError("Confusion counts must be non-negative")

    @property
    def total(self):
        return self.tp + self.tn + self.fp + self.fn

    @property
    def actual_positive(self):
        return self.tp + self.fn

    @property
    def actual_negative(self):
        return self.fp + self.tn

    @property
    def predicted_positive(self):
        return self.tp + self.fp

    @property
    def predicted_negative(self):
        return self.fn + self.tn

    @property
    def errors(self):
        return self.fp + self.fn


@dataclass(frozen=True)
class SsimParams:
    alpha: float = 1.0
    beta: float = 1.0
    gamma: float = 1.0
    c1: float = 0.01 ** 2
    c2: float = 0.03 ** 2
    c3: float = field(default=None)

    def __post_init__(self):
        if self.c3 is None:
            object.__setattr__(self, 'c3', self.c2 / 2.0)
        if min(self.c1, self.c2, self.c3) < 0:
            raise ValueError("SSIM constants must be non-negative")

    @classmethod
    def zero(cls):
        """Unstabilized SSIM: all constants 0, unit exponents."""
        return cls(c1=0.0, c2=0.0, c3=0.0)

    @classmethod
    def for_range(cls, dynamic_range, k1=0.01, k2=0.03):
        return cls(c1=(k1 * dynamic_range) ** 2, c2=(k2 * dynamic_range) ** 2)


@dataclass(frozen=True)
class FomParams:
    alpha: float = 1.0 / 9.0

    def __post_init__(self):
        if not self.alpha > 0:
            raise ValueError(f"FOM alpha must be positive, got {self.alpha}")


def _check_same_shape(e, g):
    if e.shape != g.shape:
        raise DimensionMismatchError(e.shape, g.shape)


def confusion(e, g):
    _check_same_shape(e, g)
    detected = e.bits.astype(bool)
    actual = g.bits.astype(bool)
    return ConfusionCounts(
        tp=int(np.count_nonzero(detected & actual)),
        tn=int(np.count_nonzero(~detected & ~actual)),
        fp=int(np.count_nonzero(detected & ~actual)),
        fn=int(np.count_nonzero(~detected & actual)),
    )


def confusion_measures(cc):
    """Accuracy, precision, recall and F1; ratios with an empty denominator are 0."""
    accuracy = (cc.tp + cc.tn) / cc.total if cc.total else 0.0
    precision = cc.tp / cc.predicted_positive if cc.predicted_positive else 0.0
    recall = cc.tp / cc.actual_positive if cc.actual_positive else 0.0
    f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
    return {'accuracy': accuracy, 'precision': precision, 'recall': recall, 'f1': f1}


def mse(e, g):
    _check_same_shape(e, g)
    diff = e.bits.astype(np.int64) - g.bits.astype(np.int64)
    return float(np.sum(diff * diff)) / diff.size


def rmse(e, g):
    return math.sqrt(mse(e, g))


def psnr(e, g):
    error = mse(e, g)
    if error == 0:
        return PERFECT_PSNR
    return 10.0 * math.log10(PSNR_PEAK ** 2 / error)


def _ratio(numerator, denominator, term):
    if denominator == 0:
        raise DegenerateStatisticsError(f"SSIM {term} term is 0/0: a map is constant and the constants are zero")
    return numerator / denominator


def ssim(e, g, p=None):
    """
    Global SSIM over the whole map: one window, sample (N-1) variances.
    """
    p = p or SsimParams()
    _check_same_shape(e, g)
    x = e.bits.astype(np.float64).ravel()
    y = g.bits.astype(np.float64).ravel()
    if x.size < 2:
        raise DegenerateStatisticsError("SSIM needs at least two pixels for sample statistics")

    mu_e, mu_g = x.mean(), y.mean()
    var_e = x.var(ddof=1)
    var_g = y.var(ddof=1)
    cov = float(np.sum((x - mu_e) * (y - mu_g))) / (x.size - 1)
    sd_e, sd_g = math.sqrt(var_e), math.sqrt(var_g)

    luminance = _ratio(2 * mu_e * mu_g + p.c1, mu_e ** 2 + mu_g ** 2 + p.c1, 'luminance')
    contrast = _ratio(2 * sd_e * sd_g + p.c2, var_e + var_g + p.c2, 'contrast')
    structure = _ratio(cov + p.c3, sd_e * sd_g + p.c3, 'structure')
    terms = ((luminance, p.alpha, 'luminance'), (contrast, p.beta, 'contrast'), (structure, p.gamma, 'structure'))
    for value, exponent, name in terms:
        if value < 0 and not float(exponent).is_integer():
            raise DegenerateStatisticsError(
                f"SSIM {name} term {value:.6g} is negative and its exponent {exponent} is fractional")
    return float(luminance ** p.alpha * contrast ** p.beta * structure ** p.gamma)


def distance_transform(g):
    """Exact squared Euclidean distance from every cell to the nearest 1-pixel of `g`."""
    edges = g.bits.astype(bool)
    if not edges.any():
        raise EmptyMapError("Distance transform needs at least one edge pixel")
    _, (near_rows, near_cols) = ndimage.distance_transform_edt(~edges, return_indices=True)
    rows, cols = np.indices(edges.shape)
    return (rows - near_rows) ** 2 + (cols - near_cols) ** 2


def fom(e, g, p=None):
    """
    Pratt's figure of merit. Both maps empty scores 1, exactly one empty scores 0.
    """
    p = p or FomParams()
    _check_same_shape(e, g)
    n_e, n_g = e.count, g.count
    if n_e == 0 and n_g == 0:
        return 1.0
    if n_e == 0 or n_g == 0:
        return 0.0
    d2 = distance_transform(g)[e.bits.astype(bool)]
    return float(np.sum(1.0 / (1.0 + p.alpha * d2))) / max(n_e, n_g)
