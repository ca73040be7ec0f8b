import csv
import os
import pickle

import pytest

from .fixtures import *
from ..models import ABLATION_ARMS, Benchmark, TrainConfig, format_cell, table_row
from ..models.statistics import METRIC_NAMES

BENCH_EPOCHS = 2


@pytest.fixture
def bench_config(small_config):
    return small_config.replace(train=small_config.train.replace(epochs=BENCH_EPOCHS))


def read_rows(path):
    with open(path, newline='') as f:
        return list(csv.reader(f))


def test_format_cell():
    assert format_cell((81.234, 1.5)) == '81.23 ± 1.50'
    assert format_cell((0.81234, 0.015), percent=False) == '0.8123 ± 0.0150'
    assert format_cell(None) == 'n/a'
    summary = {name: (1.0, 0.0) for name in METRIC_NAMES}
    summary['fpr95'] = None
    assert table_row(summary) == ['1.00 ± 0.00'] * 3 + ['n/a']


def test_arms(small_graph, bench_config):
    bench = Benchmark(small_graph, bench_config)
    bench.add_ablation_arms()
    assert bench.arms == list(ABLATION_ARMS)
    with pytest.raises(ValueError):
        bench.add_arm('full', TrainConfig())
    bench.add_sweep_arms([10, 20], [5])
    assert bench.arms[-2:] == ['pairs=10,triplets=5', 'pairs=20,triplets=5']


def test_run_without_arm(small_graph, bench_config):
    with pytest.raises(ValueError):
        Benchmark(small_graph, bench_config).run()


def test_ablation_run(tmp_path, small_graph, bench_config):
    bench = Benchmark(small_graph, bench_config, out_dir=str(tmp_path / 'runs'),
                      cache_dir=str(tmp_path / 'cache'))
    bench.add_ablation_arms()
    results = bench.run()
    assert sorted(results) == sorted(ABLATION_ARMS)
    for recorder in results.values():
        assert recorder.nb_recorded == len(bench_config.train.seeds)
    assert os.path.exists(str(tmp_path / 'runs' / 'no_triplet' / 'seed_1' / 'manifest.json'))

    path = str(tmp_path / 'ablation.csv')
    bench.write_csv(path)
    rows = read_rows(path)
    assert rows[0] == ['arm'] + list(METRIC_NAMES)
    assert [row[0] for row in rows[1:]] == list(ABLATION_ARMS)
    assert all('±' in cell for cell in rows[1][1:])

    text = str(bench)
    assert 'LECTBENCH' in text
    assert 'no_contrastive' in text


def test_sweep_run(tmp_path, small_graph, bench_config):
    bench = Benchmark(small_graph, bench_config, seeds=[3])
    bench.add_sweep_arms([5, 10], [0, 4])
    bench.run()
    path = str(tmp_path / 'sweep.csv')
    bench.write_csv(path, percent=False)
    rows = read_rows(path)
    assert rows[0] == ['arm', 'num_pairs', 'num_triplets'] + list(METRIC_NAMES)
    assert len(rows) == 5
    assert rows[2][:3] == ['pairs=5,triplets=4', '5', '4']


def test_dump_load(tmp_path, small_graph, bench_config):
    bench = Benchmark(small_graph, bench_config, seeds=[0])
    bench.add_arm('full', bench_config.train)
    bench.run()
    path = str(tmp_path / 'bench.pkl')
    bench.dump(path)
    loaded = Benchmark.load(path)
    assert loaded.arms == ['full']
    assert loaded.results['full'].mean('auroc') == bench.results['full'].mean('auroc')

    with open(path, 'wb') as f:
        pickle.dump({'not': 'a benchmark'}, f)
    with pytest.raises(ValueError):
        Benchmark.load(path)
