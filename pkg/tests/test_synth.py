# tests/test_synth.py

import math

import numpy as np
import pytest

from edgebench import metrics
from edgebench.canny import DEFAULT_THRESHOLDS, ThresholdPair, canny, mask_to_edges
from edgebench.exceptions import DimensionMismatchError
from edgebench.raster import BinaryMap, load_mask, normalize_to_255, save_mask
from edgebench.synth import (
    MAX_ATTEMPTS, Scene, SceneGenerationError, SceneSpec, designed_pair, gen_coastline_mask,
    gen_corpus, realizable_indices, render_band, scene_seed, splitmix64,
)

@pytest.fixture(scope='module')
def small_corpus():
    return gen_corpus(3, SceneSpec(seed=17))

# seeds

def test_splitmix64_reference_value():
    assert splitmix64(0) == 0xE220A8397B1DCDAF

def test_scene_seed_mixes_index_and_attempt():
    seeds = {scene_seed(5, i) for i in range(100)}
    assert len(seeds) == 100
    assert scene_seed(5, 3) == scene_seed(5, 3)
    assert scene_seed(5, 3, attempt=1) != scene_seed(5, 3)
    assert all(0 <= s < 2 ** 64 for s in seeds)

# SceneSpec

@pytest.mark.parametrize('kwargs,match', [
    ({'width': 8}, "at least 16x16"),
    ({'land_level': 40, 'water_level': 40}, "must differ"),
    ({'land_level': 300}, "0..255"),
    ({'noise_sigma': -1.0}, "non-negative"),
    ({'softness': ((0, 0.0), (10, -1.0))}, "softness"),
    ({'displacement': ((10, 1.0), (5, 2.0))}, "non-decreasing"),
])
def test_scene_spec_validation(kwargs, match):
    with pytest.raises(ValueError, match=match):
        SceneSpec(**kwargs)

# gen_coastline_mask

def test_mask_deterministic():
    spec = SceneSpec(seed=99)
    assert gen_coastline_mask(spec) == gen_coastline_mask(spec)
    assert gen_coastline_mask(spec) != gen_coastline_mask(SceneSpec(seed=100))

def test_mask_zero_amplitude_is_half_plane():
    mask = gen_coastline_mask(SceneSpec(width=32, height=32, amplitude=0.0))
    expected = np.zeros((32, 32), dtype=np.uint8)
    expected[16:, :] = 1
    assert np.array_equal(mask.bits, expected)

def test_mask_water_fraction():
    for seed in range(100):
        mask = gen_coastline_mask(SceneSpec(seed=seed))
        assert 0.2 <= mask.count / (mask.width * mask.height) <= 0.8

def test_mask_single_partition():
    mask = gen_coastline_mask(SceneSpec(seed=4))
    # every column is land above, water below, with exactly one transition
    assert (np.diff(mask.bits.astype(np.int8), axis=0) >= 0).all()
    assert mask.bits[0].sum() == 0 and mask.bits[-1].all()

def test_mask_survives_pgm(tmp_path):
    mask = gen_coastline_mask(SceneSpec(seed=1))
    path = str(tmp_path / "mask.pgm")
    save_mask(mask, path)
    assert load_mask(path) == mask

# render_band

def test_render_defaults_give_two_level_step():
    for spec in (SceneSpec(seed=8), SceneSpec(seed=8, noise_sigma=0, n_noise_edges=0)):
        mask = gen_coastline_mask(spec)
        band = render_band(mask, spec)
        expected = np.where(mask.bits == 1, spec.water_level, spec.land_level)
        assert np.array_equal(band.pixels, expected)

def test_render_offset_shoreline():
    spec = SceneSpec(seed=8, coast_offset=3)
    mask = gen_coastline_mask(spec)
    band = render_band(mask, spec)
    shifted = np.zeros_like(mask.bits)
    shifted[3:] = mask.bits[:-3]
    assert np.array_equal(band.pixels, np.where(shifted == 1, spec.water_level, spec.land_level))

def test_render_flat_displacement_matches_offset():
    mask = gen_coastline_mask(SceneSpec(seed=8))
    displaced = render_band(mask, SceneSpec(seed=8, displacement=((0, 2.0), (127, 2.0))))
    assert displaced == render_band(mask, SceneSpec(seed=8, coast_offset=2))

def test_render_softness_only_where_asked():
    spec = SceneSpec(seed=8, softness=((0, 0.0), (63, 0.0), (64, 4.0), (127, 4.0)))
    mask = gen_coastline_mask(spec)
    band = render_band(mask, spec).pixels
    step = np.where(mask.bits == 1, spec.water_level, spec.land_level)
    assert np.array_equal(band[:, :64], step[:, :64])
    assert not np.array_equal(band[:, 64:], step[:, 64:])
    assert ((band >= spec.water_level) & (band <= spec.land_level)).all()

def test_render_deterministic():
    spec = SceneSpec(seed=12, noise_sigma=1.0, n_noise_edges=4, distractor_contrast=30.0)
    mask = gen_coastline_mask(spec)
    assert render_band(mask, spec) == render_band(mask, spec)

def test_render_clutter_bars_change_pixels():
    base = SceneSpec(seed=12)
    cluttered = SceneSpec(seed=12, n_noise_edges=3, distractor_contrast=30.0)
    mask = gen_coastline_mask(base)
    diff = render_band(mask, cluttered).pixels - render_band(mask, base).pixels
    changed = diff != 0
    assert changed.any()
    assert set(np.abs(diff[changed]).tolist()) == {30}
    # bars keep clear of the shoreline
    shoreline = np.argmax(mask.bits.astype(bool), axis=0)
    for row in np.nonzero(changed.any(axis=1))[0]:
        assert row < shoreline.min() - 12 or row >= shoreline.max() + 12

def test_render_dimension_mismatch():
    with pytest.raises(DimensionMismatchError):
        render_band(BinaryMap.zeros(20, 20), SceneSpec(width=32, height=32))

def test_render_mean_matches_mixture():
    sigma = 1.0
    for seed in range(100):
        clean_spec = SceneSpec(width=64, height=64, seed=seed, noise_sigma=0.0)
        noisy_spec = SceneSpec(width=64, height=64, seed=seed, noise_sigma=sigma)
        mask = gen_coastline_mask(clean_spec)
        mixture = render_band(mask, clean_spec).pixels.mean()
        noisy = render_band(mask, noisy_spec).pixels
        # rounding adds variance 1/12 on top of the noise
        bound = 4.0 * math.sqrt(sigma ** 2 + 1.0 / 12.0) / math.sqrt(noisy.size)
        assert abs(noisy.mean() - mixture) <= bound

# designed_pair

def test_designed_pair_strong_coast_weak_clutter():
    # coastline above 600, distractors under 200
    assert designed_pair(700.0, 700.0, 150.0) == ThresholdPair(200, 600)

def test_designed_pair_mid_chain():
    # coastline in (300, 400], distractors at most 100
    assert designed_pair(350.0, 350.0, 100.0) == ThresholdPair(100, 300)

def test_designed_pair_faint_coast():
    assert designed_pair(120.0, 120.0, 40.0) == ThresholdPair(50, 100)

def test_designed_pair_floor_caps_low_bound():
    assert designed_pair(700.0, 150.0, 0.0) == ThresholdPair(100, 300)

def test_designed_pair_none():
    # clutter stronger than every low bound
    assert designed_pair(300.0, 300.0, 450.0) is None
    # shoreline too faint for any high bound
    assert designed_pair(90.0, 90.0, 0.0) is None

def test_realizable_indices():
    assert realizable_indices(DEFAULT_THRESHOLDS) == [0]
    chain = (ThresholdPair(50, 100), ThresholdPair(150, 300), ThresholdPair(400, 800))
    assert realizable_indices(chain) == [0, 1]

# gen_corpus

def test_gen_corpus_rejects_zero():
    with pytest.raises(ValueError, match="at least 1"):
        gen_corpus(0)

def test_gen_corpus_rejects_narrow_scenes():
    with pytest.raises(ValueError, match="64 pixels wide"):
        gen_corpus(1, SceneSpec(width=32, height=32))

def test_gen_corpus_deterministic(small_corpus):
    again = gen_corpus(3, SceneSpec(seed=17))
    for a, b in zip(small_corpus, again):
        assert a.band == b.band and a.mask == b.mask
        assert a.designed_best == b.designed_best and a.seed == b.seed

def test_gen_corpus_scenes(small_corpus):
    assert len(small_corpus) == 3
    for scene in small_corpus:
        assert isinstance(scene, Scene)
        assert scene.designed_best == DEFAULT_THRESHOLDS[0]
        assert np.isin(scene.mask.bits, (0, 1)).all()
        assert scene.band.shape == scene.mask.shape

def test_gen_corpus_designed_pair_is_best(small_corpus):
    for scene in small_corpus:
        truth = mask_to_edges(scene.mask)
        normalized = normalize_to_255(scene.band)
        scores = {t: metrics.fom(canny(normalized, t), truth) for t in DEFAULT_THRESHOLDS}
        best = scores[scene.designed_best]
        assert all(best >= score - 1e-12 for score in scores.values())

def test_gen_corpus_top_pair_keeps_registered_shoreline(small_corpus):
    for scene in small_corpus:
        truth = mask_to_edges(scene.mask)
        normalized = normalize_to_255(scene.band)
        top = metrics.confusion(canny(normalized, DEFAULT_THRESHOLDS[-1]), truth)
        below = metrics.confusion(canny(normalized, DEFAULT_THRESHOLDS[-2]), truth)
        assert top.tp > top.fp
        assert below.fp > top.fp
        assert below.fp + below.fn > top.fp + top.fn

def test_gen_corpus_gives_up(monkeypatch):
    monkeypatch.setattr('edgebench.synth._verify_scene', lambda *args: "never good enough")
    with pytest.raises(SceneGenerationError, match=f"{MAX_ATTEMPTS} times"):
        gen_corpus(1)

@pytest.mark.slow
def test_canny_chain_nested_on_corpus():
    for scene in gen_corpus(50, SceneSpec(seed=2024)):
        normalized = normalize_to_255(scene.band)
        maps = [canny(normalized, t).bits.astype(bool) for t in DEFAULT_THRESHOLDS]
        for looser, stricter in zip(maps, maps[1:]):
            assert not (stricter & ~looser).any()
