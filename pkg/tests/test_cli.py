# tests/test_cli.py

import json

import numpy as np
import pandas as pd
import pytest

from edgebench.cli import EXIT_DATA, EXIT_OK, EXIT_USAGE, cli
from edgebench.raster import BinaryMap, GrayImage, load_mask, save_mask, save_pgm

@pytest.fixture
def no_config(tmp_path):
    return ['--config', str(tmp_path / "absent.ini")]

@pytest.fixture
def step_pgm(tmp_path):
    pixels = np.zeros((16, 16), dtype=np.int64)
    pixels[:, 8:] = 255
    path = tmp_path / "step.pgm"
    save_pgm(GrayImage.from_array(pixels), str(path))
    return path

@pytest.fixture
def worked_maps(tmp_path):
    e, g = tmp_path / "e.pgm", tmp_path / "g.pgm"
    save_mask(BinaryMap.from_array(np.array([[1, 0], [0, 0]], dtype=np.uint8)), str(e))
    save_mask(BinaryMap.from_array(np.array([[1, 1], [0, 0]], dtype=np.uint8)), str(g))
    return e, g

def output_lines(capsys):
    return capsys.readouterr().out.splitlines()

def test_no_subcommand(no_config):
    assert cli(no_config) == EXIT_USAGE

def test_unknown_flag(no_config):
    assert cli(no_config + ['sweep', 'x', '--out-dir', 'y', '--bogus']) == EXIT_USAGE

# canny

def test_canny_writes_edge_map(no_config, step_pgm, tmp_path):
    out = tmp_path / "edges.pgm"
    assert cli(no_config + ['canny', str(step_pgm), str(out), '--low', '50', '--high', '100']) == EXIT_OK
    edges = load_mask(str(out))
    assert edges.count == 32
    assert (edges.bits[:, 7:9] == 1).all()

def test_canny_low_not_below_high(no_config, step_pgm, tmp_path):
    code = cli(no_config + ['canny', str(step_pgm), str(tmp_path / "o.pgm"), '--low', '100', '--high', '50'])
    assert code == EXIT_USAGE

def test_canny_missing_input(no_config, tmp_path):
    code = cli(no_config + ['canny', str(tmp_path / "nope.pgm"), str(tmp_path / "o.pgm"), '--low', '50', '--high', '100'])
    assert code == EXIT_DATA

def test_canny_sigma_from_config(tmp_path, step_pgm):
    config = tmp_path / "config.ini"
    config.write_text("[edgebench]\nsigma = -2\n")
    code = cli(['--config', str(config), 'canny', str(step_pgm), str(tmp_path / "o.pgm"), '--low', '50', '--high', '100'])
    assert code == EXIT_USAGE

# eval

def test_eval_identical_maps(no_config, worked_maps, capsys):
    e, _ = worked_maps
    assert cli(no_config + ['eval', str(e), str(e)]) == EXIT_OK
    lines = output_lines(capsys)
    assert 'rmse\t0' in lines
    assert 'fom\t1' in lines
    assert 'psnr\tPerfect' in lines
    reformulations = [line.split('\t') for line in lines if line.startswith('reformulation')]
    assert [row[1] for row in reformulations] == ['mse', 'rmse', 'psnr', 'ssim']
    assert all(row[-1] == 'PASS' for row in reformulations)

def test_eval_worked_example(no_config, worked_maps, capsys, tmp_path):
    e, g = worked_maps
    assert cli(no_config + ['eval', str(e), str(g), '--out-dir', str(tmp_path / "out")]) == EXIT_OK
    lines = output_lines(capsys)
    assert 'rmse\t0.5' in lines
    assert any(line.startswith('psnr\t54.15') for line in lines)
    frame = pd.read_csv(tmp_path / "out" / "reformulation.csv")
    assert (frame['status'] == 'PASS').all()

def test_eval_dimension_mismatch(no_config, worked_maps, tmp_path):
    e, _ = worked_maps
    other = tmp_path / "big.pgm"
    save_mask(BinaryMap.zeros(3, 3), str(other))
    assert cli(no_config + ['eval', str(e), str(other)]) == EXIT_DATA

def test_eval_bad_alpha(no_config, worked_maps):
    e, g = worked_maps
    assert cli(no_config + ['eval', str(e), str(g), '--fom-alpha', '0']) == EXIT_USAGE

# sweep and report

def test_sweep_bad_thresholds(no_config, tmp_path):
    code = cli(no_config + ['sweep', str(tmp_path), '--out-dir', str(tmp_path / "o"), '--thresholds', '50:100;60'])
    assert code == EXIT_USAGE

def test_sweep_thresholds_must_chain(no_config, tmp_path):
    code = cli(no_config + ['sweep', str(tmp_path), '--out-dir', str(tmp_path / "o"), '--thresholds', '100:200,50:300'])
    assert code == EXIT_USAGE

def test_sweep_empty_dataset(no_config, tmp_path):
    data = tmp_path / "data"
    data.mkdir()
    out = tmp_path / "out"
    assert cli(no_config + ['sweep', str(data), '--out-dir', str(out)]) == EXIT_OK
    assert pd.read_csv(out / "sweep.csv").empty

def test_sweep_missing_dataset(no_config, tmp_path):
    assert cli(no_config + ['sweep', str(tmp_path / "nope"), '--out-dir', str(tmp_path / "o")]) == EXIT_DATA

def test_synth_sweep_report(no_config, tmp_path):
    corpus, sweep_dir, report_dir = tmp_path / "corpus", tmp_path / "sweep", tmp_path / "report"
    assert cli(no_config + ['synth', '--count', '2', '--seed', '3', '--out-dir', str(corpus)]) == EXIT_OK
    assert cli(no_config + ['sweep', str(corpus), '--out-dir', str(sweep_dir)]) == EXIT_OK

    sweep = pd.read_csv(sweep_dir / "sweep.csv")
    assert len(sweep) == 2 * 6
    echo = json.loads((sweep_dir / "config.json").read_text())
    assert echo['thresholds'] == '50:100,50:150,100:200,100:300,200:400,200:600'
    assert sorted(echo['manifest']) == ['scene_0001', 'scene_0002']

    assert cli(no_config + ['report', str(sweep_dir / "sweep.csv"), '--out-dir', str(report_dir),
                            '--oracle', str(corpus / "corpus.csv")]) == EXIT_OK
    table2 = pd.read_csv(report_dir / "table2.csv")
    assert (table2.groupby('metric')['count'].sum() == 2).all()
    agreement = pd.read_csv(report_dir / "agreement.csv")
    assert agreement['metric'].tolist() == ['rmse', 'psnr', 'ssim', 'fom']
    for name in ('fig2.csv', 'fig6.csv'):
        assert (report_dir / name).exists()

def test_report_with_partial_sweep(no_config, tmp_path):
    corpus, sweep_dir, report_dir = tmp_path / "corpus", tmp_path / "sweep", tmp_path / "report"
    cli(no_config + ['synth', '--count', '2', '--seed', '3', '--out-dir', str(corpus)])
    assert cli(no_config + ['sweep', str(corpus), '--out-dir', str(sweep_dir),
                            '--thresholds', '100:200,200:600']) == EXIT_OK
    assert cli(no_config + ['report', str(sweep_dir / "sweep.csv"), '--out-dir', str(report_dir),
                            '--oracle', str(corpus / "corpus.csv")]) == EXIT_OK
    agreement = pd.read_csv(report_dir / "agreement.csv")
    assert (agreement['percent_best'] == 0.0).all()

def test_report_deterministic(no_config, tmp_path):
    corpus, sweep_dir = tmp_path / "corpus", tmp_path / "sweep"
    cli(no_config + ['synth', '--count', '1', '--out-dir', str(corpus)])
    cli(no_config + ['sweep', str(corpus), '--out-dir', str(sweep_dir)])
    outputs = []
    for name in ('r1', 'r2'):
        assert cli(no_config + ['report', str(sweep_dir / "sweep.csv"), '--out-dir', str(tmp_path / name)]) == EXIT_OK
        outputs.append([(tmp_path / name / f).read_bytes() for f in ('table2.csv', 'fig2.csv', 'fig6.csv')])
    assert outputs[0] == outputs[1]

def test_report_missing_oracle_entry(no_config, tmp_path):
    sweep = tmp_path / "sweep.csv"
    sweep.write_text("image,band,low,high,rmse,psnr,ssim,fom,tp,tn,fp,fn\n"
                     "scene_0009,band,50,100,0.5,54.15,0.4,0.9,1,2,0,1\n")
    oracle = tmp_path / "corpus.csv"
    oracle.write_text("scene,designed_low,designed_high,seed\nscene_0001,50,100,1\n")
    code = cli(no_config + ['report', str(sweep), '--out-dir', str(tmp_path / "r"), '--oracle', str(oracle)])
    assert code == EXIT_DATA

def test_report_selection_from_config(tmp_path):
    config = tmp_path / "config.ini"
    config.write_text("[edgebench]\nselection = swir\n")
    code = cli(['--config', str(config), 'report', str(tmp_path / "s.csv"), '--out-dir', str(tmp_path / "r")])
    assert code == EXIT_USAGE

@pytest.mark.slow
def test_forty_scene_table2(no_config, tmp_path):
    corpus, sweep_dir, report_dir = tmp_path / "corpus", tmp_path / "sweep", tmp_path / "report"
    assert cli(no_config + ['synth', '--count', '40', '--out-dir', str(corpus)]) == EXIT_OK
    assert cli(no_config + ['sweep', str(corpus), '--out-dir', str(sweep_dir)]) == EXIT_OK
    assert cli(no_config + ['report', str(sweep_dir / "sweep.csv"), '--out-dir', str(report_dir),
                            '--oracle', str(corpus / "corpus.csv")]) == EXIT_OK
    table2 = pd.read_csv(report_dir / "table2.csv")
    assert (table2.groupby('metric')['count'].sum() == 40).all()
