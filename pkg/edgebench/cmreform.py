# edgebench/cmreform.py
#
# MSE, RMSE, PSNR and SSIM rewritten purely in terms of confusion counts,
# which holds because edge maps only take the values 0 and 1. Throughout,
# N in the closed forms is the total pixel count T, not the actual negatives.

import logging
import math
from dataclasses import dataclass, field

import pandas as pd

from edgebench import metrics
from edgebench.exceptions import DegenerateStatisticsError

logger = logging.getLogger(__name__)

PASS = 'PASS'
FAIL = 'FAIL'
SKIP = 'SKIP'

REPORT_COLUMNS = ['metric', 'direct', 'from_counts', 'abs_diff', 'rel_diff', 'status']


def _require_total(cc):
    if cc.total <= 0:
        raise ValueError("Confusion counts have a zero pixel total")


def mse_from_counts(cc):
    _require_total(cc)
    return cc.errors / cc.total


def rmse_from_counts(cc):
    return math.sqrt(mse_from_counts(cc))


def psnr_from_counts(cc):
    _require_total(cc)
    if cc.errors == 0:
        return metrics.PERFECT_PSNR
    return 10.0 * math.log10(cc.total * metrics.PSNR_PEAK ** 2 / cc.errors)


def ssim_from_counts(cc):
    """
    Zero-constant global SSIM from counts:

        4 P'P (T.TP - P'P) / ((P'^2 + P^2) (P'(T - P') + P(T - P)))

    Evaluated in integers up to the final division.
    """
    _require_total(cc)
    total = cc.total
    predicted, actual = cc.predicted_positive, cc.actual_positive
    if predicted in (0, total) or actual in (0, total):
        raise DegenerateStatisticsError(
            f"SSIM undefined for a constant map (P'={predicted}, P={actual}, T={total})")
    numerator = 4 * predicted * actual * (total * cc.tp - predicted * actual)
    denominator = (predicted ** 2 + actual ** 2) * (
        predicted * (total - predicted) + actual * (total - actual))
    return numerator / denominator


@dataclass(frozen=True)
class MetricComparison:
    metric: str
    direct: float
    from_counts: float
    abs_diff: float
    rel_diff: float
    status: str


@dataclass
class EquivalenceReport:
    comparisons: list = field(default_factory=list)

    @property
    def passed(self):
        """True when nothing failed; skipped comparisons do not count against it."""
        return all(c.status != FAIL for c in self.comparisons)

    def get(self, metric):
        for comparison in self.comparisons:
            if comparison.metric == metric:
                return comparison
        raise KeyError(metric)

    def to_frame(self):
        return pd.DataFrame([vars(c) for c in self.comparisons], columns=REPORT_COLUMNS)

    def to_csv(self, path):
        self.to_frame().to_csv(path, index=False)


def _compare(metric, direct, from_counts, tolerance, relative=False, floor=0.0):
    if math.isinf(direct) or math.isinf(from_counts):
        # PSNR: both Perfect or a mismatch
        same = direct == from_counts
        return MetricComparison(metric, direct, from_counts, 0.0 if same else math.inf,
                                0.0 if same else math.inf, PASS if same else FAIL)
    abs_diff = abs(direct - from_counts)
    scale = max(abs(direct), abs(from_counts))
    rel_diff = abs_diff / scale if scale else 0.0
    # values that vanish exactly in one path are only comparable absolutely
    ok = (rel_diff if relative else abs_diff) <= tolerance or abs_diff <= floor
    return MetricComparison(metric, direct, from_counts, abs_diff, rel_diff, PASS if ok else FAIL)


def verify_reformulations(e, g, tol_exact=1e-12, tol_ssim=1e-9, tol_psnr=1e-9):
    """
    Check the count-based closed forms against the metrics computed from the maps.

    mse and rmse are compared absolutely at tol_exact, psnr at tol_psnr, and
    zero-constant SSIM relatively at tol_ssim. SSIM on a constant map is skipped.
    """
    cc = metrics.confusion(e, g)
    report = EquivalenceReport([
        _compare('mse', metrics.mse(e, g), mse_from_counts(cc), tol_exact),
        _compare('rmse', metrics.rmse(e, g), rmse_from_counts(cc), tol_exact),
        _compare('psnr', metrics.psnr(e, g), psnr_from_counts(cc), tol_psnr),
    ])
    try:
        direct = metrics.ssim(e, g, metrics.SsimParams.zero())
        from_counts = ssim_from_counts(cc)
    except DegenerateStatisticsError as exc:
        logger.debug("Skipping SSIM comparison: %s", exc)
        report.comparisons.append(
            MetricComparison('ssim', math.nan, math.nan, math.nan, math.nan, SKIP))
    else:
        report.comparisons.append(_compare('ssim', direct, from_counts, tol_ssim, relative=True, floor=tol_exact))

    for comparison in report.comparisons:
        if comparison.status == FAIL:
            logger.warning("Reformulation mismatch for %s: direct=%r from_counts=%r",
                           comparison.metric, comparison.direct, comparison.from_counts)
    return report
