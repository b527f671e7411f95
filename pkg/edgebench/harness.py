# edgebench/harness.py

import logging
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np
import pandas as pd

from edgebench import metrics
from edgebench.canny import (
    DEFAULT_SIGMA, DEFAULT_THRESHOLDS, ThresholdPair, hysteresis, mask_to_edges, nonmax_suppress,
    smooth, sobel_gradients,
)
from edgebench.exceptions import (
    DegenerateStatisticsError, DimensionMismatchError, MissingOracleError,
    SweepCellError, UnknownMetricError,
)
from edgebench.raster import NIR_BAND, BandId, normalize_to_255
from edgebench.utils import resolve_threads

logger = logging.getLogger(__name__)

METRICS = ('rmse', 'psnr', 'ssim', 'fom')
MINIMIZED = frozenset({'rmse'})

SELECTIONS = ('all', 'nir')

SWEEP_COLUMNS = [
    'image', 'band', 'low', 'high',
    'rmse', 'psnr', 'ssim', 'fom',
    'tp', 'tn', 'fp', 'fn',
    'accuracy', 'precision', 'recall', 'f1',
]
TABLE2_COLUMNS = ['metric', 'low', 'high', 'count']
FIG2_COLUMNS = ['band', 'low', 'high', 'metric', 'mean', 'std', 'excluded']
FIG6_COLUMNS = ['band', 'low', 'high', 'mean_fp_plus_fn']
AGREEMENT_COLUMNS = ['metric', 'percent_best', 'percent_same_or_better']


@dataclass(frozen=True)
class SweepConfig:
    threshold_pairs: tuple = DEFAULT_THRESHOLDS
    sigma: float = DEFAULT_SIGMA
    # None sweeps every band an image has; 'single' requires exactly one
    bands: object = None
    fom_alpha: float = 1.0 / 9.0
    ssim_params: metrics.SsimParams = field(default_factory=metrics.SsimParams)
    threads: int = None

    def __post_init__(self):
        pairs = tuple(self.threshold_pairs)
        if not pairs:
            raise ValueError("At least one threshold pair is required")
        for earlier, later in zip(pairs, pairs[1:]):
            if later == earlier or not later.dominates(earlier):
                raise ValueError(f"Threshold pairs must increase componentwise: {earlier} then {later}")
        object.__setattr__(self, 'threshold_pairs', pairs)
        if not self.sigma > 0:
            raise ValueError(f"sigma must be positive, got {self.sigma}")
        metrics.FomParams(self.fom_alpha)
        if self.bands is not None and self.bands != 'single':
            bands = tuple(BandId.parse(b) if not isinstance(b, BandId) else b for b in self.bands)
            if not bands:
                raise ValueError("Band list must not be empty")
            object.__setattr__(self, 'bands', bands)

    @property
    def fom_params(self):
        return metrics.FomParams(self.fom_alpha)

    def band_labels(self, entry):
        if self.bands is None:
            return list(entry.bands)
        if self.bands == 'single':
            if len(entry.bands) != 1:
                raise ValueError(f"{entry.image_id} has {len(entry.bands)} bands, expected one")
            return list(entry.bands)
        missing = [b.value for b in self.bands if b.value not in entry.bands]
        if missing:
            raise ValueError(f"{entry.image_id} lacks bands {', '.join(missing)}")
        return [b.value for b in self.bands]

    def to_dict(self):
        if self.bands is None or self.bands == 'single':
            bands = self.bands
        else:
            bands = [b.value for b in self.bands]
        return {
            'threshold_pairs': [[p.low, p.high] for p in self.threshold_pairs],
            'sigma': self.sigma,
            'bands': bands,
            'fom_alpha': self.fom_alpha,
            'ssim': asdict(self.ssim_params),
        }


@dataclass(frozen=True)
class MetricRecord:
    image: str
    band: str
    low: float
    high: float
    rmse: float
    psnr: float
    ssim: float
    fom: float
    tp: int
    tn: int
    fp: int
    fn: int
    accuracy: float = 0.0
    precision: float = 0.0
    recall: float = 0.0
    f1: float = 0.0

    @property
    def pair(self):
        return ThresholdPair(self.low, self.high)


class SweepReport:
    """Sweep records as a DataFrame in (image, band, pair) order, plus the config echo and manifest."""

    def __init__(self, records=None, config=None, manifest=None):
        if isinstance(records, pd.DataFrame):
            self.records = records.reset_index(drop=True)
        else:
            self.records = pd.DataFrame([asdict(r) for r in records or []], columns=SWEEP_COLUMNS)
        self.config = config
        self.manifest = manifest if manifest is not None else self._manifest_from_records()

    def __len__(self):
        return len(self.records)

    @property
    def empty(self):
        return self.records.empty

    @property
    def images(self):
        return list(pd.unique(self.records['image']))

    @property
    def pair_order(self):
        if self.config is not None:
            return list(self.config.threshold_pairs)
        unique = self.records[['low', 'high']].drop_duplicates()
        return [ThresholdPair(low, high) for low, high in unique.itertuples(index=False)]

    def _manifest_from_records(self):
        return {image: list(pd.unique(group['band']))
                for image, group in self.records.groupby('image', sort=False)}

    def to_csv(self, path):
        self.records.to_csv(path, index=False, columns=SWEEP_COLUMNS)

    @classmethod
    def from_csv(cls, path):
        frame = pd.read_csv(path, dtype={'image': str, 'band': str})
        missing = [c for c in SWEEP_COLUMNS[:12] if c not in frame.columns]
        if missing:
            raise ValueError(f"{path} is not a sweep file, missing columns: {', '.join(missing)}")
        return cls(frame)


def _record(image_id, label, pair, e, g, config):
    cc = metrics.confusion(e, g)
    try:
        ssim = metrics.ssim(e, g, config.ssim_params)
    except DegenerateStatisticsError as exc:
        logger.warning("ssim undefined for %s/%s %s: %s", image_id, label, pair, exc)
        ssim = math.nan
    return MetricRecord(
        image=image_id, band=label, low=pair.low, high=pair.high,
        rmse=metrics.rmse(e, g), psnr=metrics.psnr(e, g), ssim=ssim,
        fom=metrics.fom(e, g, config.fom_params),
        tp=cc.tp, tn=cc.tn, fp=cc.fp, fn=cc.fn,
        **metrics.confusion_measures(cc),
    )


def _sweep_image(entry, config):
    try:
        ground_truth = mask_to_edges(entry.mask)
        labels = config.band_labels(entry)
    except Exception as e:
        raise SweepCellError(entry.image_id, None, None, e) from e

    records = []
    for label in labels:
        band = entry.bands[label]
        pair = None
        try:
            if band.shape != ground_truth.shape:
                raise DimensionMismatchError(band.shape, ground_truth.shape)
            # smoothing, gradients and thinning do not depend on the pair
            thinned = nonmax_suppress(sobel_gradients(smooth(normalize_to_255(band), config.sigma)))
            for pair in config.threshold_pairs:
                edges = hysteresis(thinned, pair)
                records.append(_record(entry.image_id, label, pair, edges, ground_truth, config))
                logger.debug("%s/%s %s: %d edge pixels", entry.image_id, label, pair, edges.count)
        except Exception as e:
            raise SweepCellError(entry.image_id, label, pair, e) from e
    logger.info("Swept %s: %d bands x %d pairs", entry.image_id, len(labels), len(config.threshold_pairs))
    return records


def run_sweep(dataset, config=None):
    """
    Run canny at every threshold pair on every band of every image and score it
    against the edges of the image's mask.

    Images are processed by a thread pool; records come back in (image, band,
    pair) order whatever the completion order.
    """
    config = config or SweepConfig()
    dataset = list(dataset)
    if not dataset:
        logger.info("Empty dataset, nothing to sweep")
        return SweepReport([], config, {})

    threads = min(resolve_threads(config.threads), len(dataset))
    with ThreadPoolExecutor(max_workers=threads) as pool:
        per_image = list(pool.map(lambda entry: _sweep_image(entry, config), dataset))

    records = [r for image_records in per_image for r in image_records]
    manifest = {entry.image_id: config.band_labels(entry) for entry in dataset}
    report = SweepReport(records, config, manifest)

    violations = verify_record_identities(report)
    if not violations.empty:
        logger.warning("%d records break the rmse/psnr count identities", len(violations))
    return report


def verify_record_identities(report, tolerance=1e-9):
    """Rows whose rmse or psnr disagree with their own fp/fn counts, or whose fom leaves [0, 1]."""
    frame = report.records
    total = (frame['tp'] + frame['tn'] + frame['fp'] + frame['fn']).to_numpy(dtype=np.float64)
    errors = (frame['fp'] + frame['fn']).to_numpy(dtype=np.float64)
    rmse = frame['rmse'].to_numpy(dtype=np.float64)
    psnr = frame['psnr'].to_numpy(dtype=np.float64)
    fom = frame['fom'].to_numpy(dtype=np.float64)

    with np.errstate(divide='ignore'):
        expected_psnr = np.where(errors == 0, np.inf,
                                 10.0 * np.log10(total * metrics.PSNR_PEAK ** 2 / np.maximum(errors, 1)))
    rmse_ok = np.abs(rmse - np.sqrt(errors / total)) <= tolerance
    finite = np.isfinite(expected_psnr)
    # inf - inf on Perfect rows is masked out below
    with np.errstate(invalid='ignore'):
        gap = psnr - expected_psnr
    psnr_ok = np.where(finite, np.abs(np.where(finite, gap, 0.0)) <= tolerance, psnr == expected_psnr)
    fom_ok = (fom >= 0.0) & (fom <= 1.0)
    return frame[~(rmse_ok & psnr_ok & fom_ok)]


def _check_metric(metric):
    if metric not in METRICS:
        raise UnknownMetricError(f"Unknown metric '{metric}', expected one of {', '.join(METRICS)}")


def _select_bands(frame, selection):
    if selection not in SELECTIONS:
        raise ValueError(f"Unknown selection '{selection}', expected one of {', '.join(SELECTIONS)}")
    if selection == 'all':
        return frame
    kept = []
    for image, group in frame.groupby('image', sort=False):
        nir = group[group['band'] == NIR_BAND.value]
        if not nir.empty:
            kept.append(nir)
        elif group['band'].nunique() == 1:
            kept.append(group)
        else:
            logger.warning("%s has no %s band, left out of the nir selection", image, NIR_BAND.value)
    return pd.concat(kept) if kept else frame.iloc[0:0]


def _ranked(frame, pair_order):
    """The frame sorted by image, then pair in config order, then band in sweep order."""
    pair_rank = {(p.low, p.high): i for i, p in enumerate(pair_order)}
    band_rank = {band: i for i, band in enumerate(pd.unique(frame['band']))}
    ranked = frame.assign(
        _pair_rank=[pair_rank[(low, high)] for low, high in zip(frame['low'], frame['high'])],
        _band_rank=frame['band'].map(band_rank),
    )
    return ranked.sort_values(['image', '_pair_rank', '_band_rank'], kind='mergesort')


def best_cells(report, metric, selection='all'):
    """
    The winning (band, pair) row per image. rmse is minimized, the others
    maximized with a Perfect psnr above every finite value; ties go to the
    lower pair in config order.
    """
    _check_metric(metric)
    if report.empty:
        raise ValueError("Cannot select thresholds from an empty report")
    frame = _ranked(_select_bands(report.records, selection), report.pair_order)
    frame = frame.dropna(subset=[metric])
    grouped = frame.groupby('image', sort=True)[metric]
    winners = grouped.idxmin() if metric in MINIMIZED else grouped.idxmax()
    return frame.loc[winners.to_numpy()].drop(columns=['_pair_rank', '_band_rank'])


def best_threshold_counts(report, metric, selection='all'):
    """Pair -> number of images whose best cell under `metric` used that pair."""
    counts = {pair: 0 for pair in report.pair_order}
    for low, high in best_cells(report, metric, selection)[['low', 'high']].itertuples(index=False):
        counts[ThresholdPair(low, high)] += 1
    return counts


def table2(report, selection='all'):
    rows = [[metric, pair.low, pair.high, count]
            for metric in METRICS
            for pair, count in best_threshold_counts(report, metric, selection).items()]
    return pd.DataFrame(rows, columns=TABLE2_COLUMNS)


def _summary(values):
    if len(values) == 0:
        return math.nan, math.nan
    std = float(values.std(ddof=1)) if len(values) > 1 else 0.0
    return float(values.mean()), std


def aggregate(report):
    """
    Mean and sample standard deviation of each metric per (band, pair).

    Perfect psnr values are left out of the psnr statistics and counted in
    `excluded`; a cell that is Perfect throughout reports a mean of inf.
    """
    rows = []
    for (band, low, high), group in report.records.groupby(['band', 'low', 'high'], sort=False):
        for metric in METRICS:
            values = group[metric].dropna()
            excluded = 0
            if metric == 'psnr':
                finite = values[np.isfinite(values)]
                excluded = len(values) - len(finite)
                if excluded and finite.empty:
                    rows.append([band, low, high, metric, metrics.PERFECT_PSNR, 0.0, excluded])
                    continue
                values = finite
            mean, std = _summary(values)
            rows.append([band, low, high, metric, mean, std, excluded])
    return pd.DataFrame(rows, columns=FIG2_COLUMNS)


def fp_fn_sums(report):
    frame = report.records.assign(_errors=report.records['fp'] + report.records['fn'])
    sums = frame.groupby(['band', 'low', 'high'], sort=False)['_errors'].mean()
    return sums.rename('mean_fp_plus_fn').reset_index()[FIG6_COLUMNS]


def agreement(report, oracle, exclude=(), selection='all'):
    """
    Per metric, the percentage of images where its selected pair is the oracle
    pair, and where the selected cell's fom is at least the best fom any
    selected band reaches at the oracle pair. An oracle pair the sweep never
    ran counts as a miss on both.
    """
    excluded = set(exclude)
    frame = report.records[~report.records['image'].isin(excluded)]
    if frame.empty:
        raise ValueError("No images left to compare after exclusions")
    images = sorted(pd.unique(frame['image']))
    for image in images:
        if image not in oracle:
            raise MissingOracleError(image)

    scoped = SweepReport(frame, report.config, report.manifest)
    selected = _select_bands(frame, selection)
    oracle_fom = {}
    for image, group in selected.groupby('image'):
        pair = oracle[image]
        at_pair = group[(group['low'] == pair.low) & (group['high'] == pair.high)]
        if at_pair.empty:
            logger.warning("Oracle pair %s for %s is not in the sweep; no cell can match it", pair, image)
            oracle_fom[image] = np.nan
            continue
        oracle_fom[image] = float(at_pair['fom'].max())

    rows = []
    for metric in METRICS:
        winners = best_cells(scoped, metric, selection)
        best = same_or_better = 0
        for row in winners.itertuples(index=False):
            if ThresholdPair(row.low, row.high) == oracle[row.image]:
                best += 1
            if row.fom >= oracle_fom[row.image]:
                same_or_better += 1
        n = len(winners)
        if n == 0:
            raise ValueError(f"No images have a band for the {selection} selection")
        rows.append([metric, 100.0 * best / n, 100.0 * same_or_better / n])
    return pd.DataFrame(rows, columns=AGREEMENT_COLUMNS)


def write_reports(report, out_dir, oracle=None, selection='all', exclude=()):
    """Write table2.csv, fig2.csv, fig6.csv and, given an oracle, agreement.csv. Returns the paths."""
    os.makedirs(out_dir, exist_ok=True)
    outputs = {
        'table2.csv': table2(report, selection),
        'fig2.csv': aggregate(report),
        'fig6.csv': fp_fn_sums(report),
    }
    if oracle is not None:
        outputs['agreement.csv'] = agreement(report, oracle, exclude, selection)
    paths = []
    for name, frame in outputs.items():
        path = os.path.join(out_dir, name)
        frame.to_csv(path, index=False)
        paths.append(path)
        logger.info("Wrote %s", path)
    return paths
