import json
import os
import sys

import pytest
from loguru import logger

from .fixtures import *
from ..cli import load_config, main
from ..common import load_graph_json, save_graph_json
from ..models import ExperimentConfig

CLI_CONFIG = {'encoder': {'dim': ENCODER_DIM},
              'model': {'proj_dim': 16, 'hidden_dim': 8},
              'oodgen': {'num_pseudo': 8},
              'train': {'epochs': 2, 'num_pairs': 20, 'num_triplets': 10, 'log_every': 1}}


@pytest.fixture(autouse=True)
def restore_logger():
    yield
    logger.remove()
    logger.add(sys.stderr)


@pytest.fixture
def workspace(tmp_path, small_graph):
    graph_path = str(tmp_path / 'graph.json')
    save_graph_json(small_graph, graph_path)
    config_path = str(tmp_path / 'config.json')
    with open(config_path, 'w') as f:
        json.dump(CLI_CONFIG, f)
    return tmp_path, graph_path, config_path


def test_load_config(tmp_path):
    assert load_config(None) == ExperimentConfig()

    path = str(tmp_path / 'config.toml')
    with open(path, 'w') as f:
        f.write('[train]\nepochs = 7\n\n[loss]\ngamma = 2\n')
    config = load_config(path)
    assert config.train.epochs == 7
    assert config.loss.gamma == 2.0

    with open(path, 'w') as f:
        f.write('[optimizer]\nlr = 0.1\n')
    with pytest.raises(TypeError):
        load_config(path)


def test_ingest(tmp_path, capsys, ten_node_graph):
    source = str(tmp_path / 'raw.json')
    data = ten_node_graph.to_dict()
    data['edges'].append([1, 0])
    with open(source, 'w') as f:
        json.dump(data, f)

    out = str(tmp_path / 'graph.json')
    assert main(['ingest', '--graph', source, '--out', out]) == 0
    printed = capsys.readouterr().out
    assert 'nodes: 10' in printed
    assert 'edges: 11' in printed
    assert 'labeled: 10' in printed
    assert load_graph_json(out).graph_hash() == ten_node_graph.graph_hash()


def test_ingest_dangling_edge(tmp_path, capsys, ten_node_graph):
    source = str(tmp_path / 'raw.json')
    data = ten_node_graph.to_dict()
    data['edges'].append([0, 99])
    with open(source, 'w') as f:
        json.dump(data, f)

    assert main(['ingest', '--graph', source, '--out', str(tmp_path / 'graph.json')]) == 1
    assert 'edges[11]' in capsys.readouterr().err
    assert not os.path.exists(str(tmp_path / 'graph.json'))


def test_missing_artifacts(workspace, capsys):
    tmp_path, graph_path, config_path = workspace
    out_dir = str(tmp_path / 'out')

    assert main(['eval', '--graph', graph_path, '--out-dir', out_dir]) == 1
    assert 'run train first' in capsys.readouterr().err

    assert main(['train', '--graph', graph_path, '--config', config_path, '--out-dir', out_dir]) == 1
    assert 'run generate first' in capsys.readouterr().err

    assert main(['generate', '--out-dir', out_dir]) == 1
    assert '--graph' in capsys.readouterr().err


def test_generate_idempotent(workspace, capsys):
    tmp_path, graph_path, config_path = workspace
    contents = []
    for name in ('first', 'second'):
        out_dir = str(tmp_path / name)
        assert main(['generate', '--graph', graph_path, '--config', config_path, '--out-dir', out_dir]) == 0
        assert '8 pseudo nodes' in capsys.readouterr().out
        with open(os.path.join(out_dir, 'batch.json')) as f:
            contents.append(f.read())
        assert os.path.exists(os.path.join(out_dir, 'split.json'))
    assert contents[0] == contents[1]


def test_generate_train_eval(workspace, capsys):
    tmp_path, graph_path, config_path = workspace
    out_dir = str(tmp_path / 'out')
    base = ['--graph', graph_path, '--config', config_path, '--out-dir', out_dir]

    assert main(['generate'] + base) == 0
    capsys.readouterr()
    assert main(['train'] + base) == 0
    trained = json.loads(capsys.readouterr().out)
    assert trained['epoch'] == 2
    assert os.path.exists(os.path.join(out_dir, 'train', 'final.ckpt'))
    assert os.path.exists(os.path.join(out_dir, 'lect.log'))

    assert main(['eval'] + base) == 0
    evaluated = json.loads(capsys.readouterr().out)
    assert evaluated == trained

    assert main(['eval', '--csv'] + base) == 0
    rows = capsys.readouterr().out.strip().splitlines()
    assert rows[0] == 'ind_acc,auroc,aupr,fpr95'
    assert rows[1].count('±') == 4


def test_bad_config(workspace, capsys):
    tmp_path, graph_path, _ = workspace
    path = str(tmp_path / 'bad.json')
    with open(path, 'w') as f:
        json.dump({'train': {'learning_rate': 0.1}}, f)
    assert main(['generate', '--graph', graph_path, '--config', path, '--out-dir', str(tmp_path / 'out')]) == 1
    assert 'learning_rate' in capsys.readouterr().err


def test_synth(tmp_path, capsys):
    out = str(tmp_path / 'synth.json')
    assert main(['synth', '--out', out]) == 0
    graph = load_graph_json(out)
    assert graph.node_count == 600
    assert graph.num_classes == 4


def test_ablate_and_sweep(workspace, capsys):
    tmp_path, graph_path, _ = workspace
    config = dict(CLI_CONFIG, train=dict(CLI_CONFIG['train'], seeds=[0]))
    config_path = str(tmp_path / 'one_seed.json')
    with open(config_path, 'w') as f:
        json.dump(config, f)
    out_dir = str(tmp_path / 'out')
    base = ['--graph', graph_path, '--config', config_path, '--out-dir', out_dir]

    assert main(['ablate', '--arms', 'full,no_triplet'] + base) == 0
    assert 'LECTBENCH' in capsys.readouterr().out
    with open(os.path.join(out_dir, 'ablation.csv')) as f:
        rows = f.read().strip().splitlines()
    assert [row.split(',')[0] for row in rows[1:]] == ['full', 'no_triplet']

    assert main(['sweep', '--pairs', '0,5', '--triplets', '3'] + base) == 0
    capsys.readouterr()
    with open(os.path.join(out_dir, 'sweep.csv')) as f:
        rows = f.read().strip().splitlines()
    assert rows[0].startswith('arm,num_pairs,num_triplets,')
    assert len(rows) == 3
