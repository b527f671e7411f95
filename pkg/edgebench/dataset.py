# edgebench/dataset.py

import logging
import os
from dataclasses import dataclass, field

import pandas as pd

from edgebench.canny import ThresholdPair
from edgebench.raster import SINGLE_BAND, BandId, load_mask, load_pgm, save_mask, save_pgm

logger = logging.getLogger(__name__)

MASK_SUFFIX = '_mask.pgm'
CORPUS_INDEX = 'corpus.csv'
CORPUS_COLUMNS = ['scene', 'designed_low', 'designed_high', 'seed']

# SWED test scenes left out of every run: one with a flipped label mask and
# two with unlabelled land. Matched as prefixes of the image id.
SWED_EXCLUDED = (
    'S2A_MSIL2A_20190803T025551_N0213_R032_T54XWG_20190803T043943_image_0_0',
    'S2A_MSIL2A_20190901T101031_N0213_R022_T34VDM_20190901T130348_image_0_0',
    'S2A_MSIL2A_20200405T100021_N0214_R122_T34VDM_20200405T115512_image_0_0',
)

# file labels in the order bands are swept
BAND_LABELS = tuple(b.value for b in BandId) + (SINGLE_BAND,)


@dataclass
class DatasetEntry:
    image_id: str
    mask: object
    # band label -> GrayImage, in sweep order
    bands: dict = field(default_factory=dict)


def _strip_tif(name):
    return name[:-4] if name.lower().endswith('.tif') else name


def is_excluded(image_id, exclude):
    return any(image_id.startswith(_strip_tif(prefix)) for prefix in exclude)


def load_dataset(directory, exclude=SWED_EXCLUDED, bands=None):
    """
    Discover `<image>_mask.pgm` files and the band files beside them.

    Band files are `<image>_<BAND>.pgm` for a Sentinel-2 band name, or
    `<image>_band.pgm` for single-band data. Entries come back sorted by image id
    with bands in catalogue order. `bands` restricts which labels are loaded.
    """
    if not os.path.isdir(directory):
        raise FileNotFoundError(f"Dataset directory not found: {directory}")
    wanted = BAND_LABELS if bands is None else tuple(bands)

    entries = []
    for name in sorted(os.listdir(directory)):
        if not name.endswith(MASK_SUFFIX):
            continue
        image_id = name[:-len(MASK_SUFFIX)]
        if is_excluded(image_id, exclude):
            logger.info("Skipping excluded scene %s", image_id)
            continue
        found = {}
        for label in wanted:
            path = os.path.join(directory, f"{image_id}_{label}.pgm")
            if os.path.isfile(path):
                found[label] = load_pgm(path)
        if not found:
            logger.warning("No band files for %s, skipping", image_id)
            continue
        entries.append(DatasetEntry(image_id, load_mask(os.path.join(directory, name)), found))

    logger.info("Loaded %d images from %s", len(entries), directory)
    return entries


def load_exclusions(path):
    """One image id per line; blank lines and '#' comments ignored."""
    with open(path, 'r') as f:
        lines = (line.split('#', 1)[0].strip() for line in f)
        return tuple(line for line in lines if line)


def write_corpus(scenes, out_dir):
    """Write scene_NNNN_band.pgm / scene_NNNN_mask.pgm files and the corpus.csv index."""
    os.makedirs(out_dir, exist_ok=True)
    rows = []
    for index, scene in enumerate(scenes, start=1):
        scene_id = f"scene_{index:04d}"
        save_pgm(scene.band, os.path.join(out_dir, f"{scene_id}_{SINGLE_BAND}.pgm"), maxval=255)
        save_mask(scene.mask, os.path.join(out_dir, f"{scene_id}{MASK_SUFFIX}"))
        rows.append([scene_id, scene.designed_best.low, scene.designed_best.high, scene.seed])
    index_path = os.path.join(out_dir, CORPUS_INDEX)
    pd.DataFrame(rows, columns=CORPUS_COLUMNS).to_csv(index_path, index=False)
    logger.info("Wrote %d scenes to %s", len(rows), out_dir)
    return index_path


def load_oracle(path):
    """Read a corpus index into an image id -> ThresholdPair map."""
    frame = pd.read_csv(path, dtype={'scene': str})
    missing = [c for c in CORPUS_COLUMNS[:3] if c not in frame.columns]
    if missing:
        raise ValueError(f"Oracle file {path} lacks columns: {', '.join(missing)}")
    return {row.scene: ThresholdPair(_number(row.designed_low), _number(row.designed_high))
            for row in frame.itertuples(index=False)}


def _number(value):
    value = float(value)
    return int(value) if value.is_integer() else value
