"""
File: cli.py
Description: The `lect` command line: ingest, synth, generate, train, eval,
ablate and sweep.

Commands hand their artifacts over through files in the output directory,
so that an expensive remote generation runs once and is reused by every
training run.
"""

import argparse
import csv
import json
import os
import sys

from loguru import logger

from .common import MissingArtifactError, LectError, build_split, load_graph_json, save_graph_json
from .default import SYNTH_CONFIG, synth_benchmark
from .default.benchmarks.synthetic import merge_tables
from .encoders import EmbeddingCache, build_encoder
from .models import ABLATION_ARMS, Benchmark, ExperimentConfig, evaluate, table_row, train
from .models.statistics import METRIC_NAMES
from .oodgen import PseudoOodBatch, build_generator, build_skeleton, generate_texts

try:
    import tomllib
except ImportError:  # Python < 3.11
    import tomli as tomllib

BATCH_FILE = 'batch.json'
SPLIT_FILE = 'split.json'
CHECKPOINT_FILE = os.path.join('train', 'final.ckpt')


def load_config(path, defaults=None):
    """Read an ExperimentConfig from a TOML or JSON file.

    Tables of defaults, when given, sit under the ones of the file.

    Raises:
        TypeError: on an unknown table or key.
        ValueError: on an invalid value.

    """
    if path is None:
        return ExperimentConfig.from_dict(merge_tables(defaults or {}))
    if path.endswith('.json'):
        with open(path, 'r', encoding='utf-8') as f:
            data = json.load(f)
    else:
        with open(path, 'rb') as f:
            data = tomllib.load(f)
    if not isinstance(data, dict):
        raise TypeError("The config file must hold one table per block")
    return ExperimentConfig.from_dict(merge_tables(defaults or {}, data))


def configure_logging(level, out_dir=None):
    logger.remove()
    logger.add(sys.stderr, level=level.upper(),
               format="{time:HH:mm:ss}|{level:<7}|{message}")
    if out_dir:
        os.makedirs(out_dir, exist_ok=True)
        logger.add(os.path.join(out_dir, 'lect.log'), level='DEBUG')


def _config(args):
    defaults = SYNTH_CONFIG if getattr(args, 'synthetic', False) else None
    config = load_config(args.config, defaults)
    if args.seed is not None:
        config = config.with_seed(args.seed)
    if getattr(args, 'epochs', None) is not None:
        config = config.replace(train=config.train.replace(epochs=args.epochs))
    return config


def _graph(args, config):
    if getattr(args, 'synthetic', False):
        return synth_benchmark(config.split.seed).graph
    if not args.graph:
        raise ValueError("give --graph or --synthetic")
    if not os.path.exists(args.graph):
        raise MissingArtifactError(args.graph, 'ingest')
    return load_graph_json(args.graph)


def _donor_texts(args):
    if not getattr(args, 'donor_graph', None):
        return None
    return list(load_graph_json(args.donor_graph).texts)


def _cache(args):
    return EmbeddingCache(args.cache_dir or os.path.join(args.out_dir,
                                                         'cache'))


def _print_report(report):
    print(json.dumps(report.to_dict(), indent=2, sort_keys=True))


def cmd_ingest(args):
    graph = load_graph_json(args.graph)
    save_graph_json(graph, args.out)
    summary = graph.summary()
    print("nodes: {nodes:d}\nedges: {edges:d}\nclasses: {classes:d}\n"
          "labeled: {labeled:d}".format(**summary))
    homophily = summary['homophily']
    print("homophily: {}".format('n/a' if homophily is None
                                 else '{:.4f}'.format(homophily)))


def cmd_synth(args):
    bench = synth_benchmark(args.seed or 0)
    save_graph_json(bench.graph, args.out)
    print(bench.graph)


def cmd_generate(args):
    config = _config(args)
    graph = _graph(args, config)
    split = build_split(graph, config.split)
    skeleton = build_skeleton(graph, split, config.oodgen)
    generator = build_generator(config.oodgen, config.remote,
                                _donor_texts(args))
    batch = generate_texts(skeleton, generator, config.oodgen.concurrency)

    os.makedirs(args.out_dir, exist_ok=True)
    out = args.out or os.path.join(args.out_dir, BATCH_FILE)
    batch.save(out)
    with open(os.path.join(args.out_dir, SPLIT_FILE), 'w',
              encoding='utf-8') as f:
        json.dump(split.to_dict(), f, sort_keys=True)
    counts = batch.mode_counts()
    print("{:d} pseudo nodes ({:d} near, {:d} far), {:d} edges -> {}".format(
        len(batch), counts['near'], counts['far'], len(batch.edges), out))


def cmd_train(args):
    config = _config(args)
    graph = _graph(args, config)
    batch_path = args.batch or os.path.join(args.out_dir, BATCH_FILE)
    if not os.path.exists(batch_path):
        raise MissingArtifactError(batch_path, 'generate')
    batch = PseudoOodBatch.load(batch_path)
    split = build_split(graph, config.split)
    encoder = build_encoder(config.encoder, config.remote)
    manifest = train(graph, split, batch, encoder, config,
                     out_dir=os.path.join(args.out_dir, 'train'),
                     cache=_cache(args), donor_texts=_donor_texts(args))
    _print_report(manifest.report)


def cmd_eval(args):
    config = _config(args)
    checkpoint = args.checkpoint or os.path.join(args.out_dir,
                                                 CHECKPOINT_FILE)
    if not os.path.exists(checkpoint):
        raise MissingArtifactError(checkpoint, 'train')
    graph = _graph(args, config)
    encoder = build_encoder(config.encoder, config.remote)
    report = evaluate(checkpoint, graph, encoder, cache=_cache(args),
                      out_dir=os.path.join(args.out_dir, 'eval'))
    if args.csv:
        summary = {name: None if report.metric(name) is None
                   else (report.metric(name) * 100.0, 0.0)
                   for name in METRIC_NAMES}
        writer = csv.writer(sys.stdout)
        writer.writerow(list(METRIC_NAMES))
        writer.writerow(table_row(summary))
    else:
        _print_report(report)


def _benchmark(args, config):
    graph = _graph(args, config)
    return Benchmark(graph, config, jobs=args.jobs, out_dir=args.out_dir,
                     cache_dir=args.cache_dir or os.path.join(args.out_dir,
                                                              'cache'),
                     donor_texts=_donor_texts(args))


def cmd_ablate(args):
    config = _config(args)
    benchmark = _benchmark(args, config)
    benchmark.add_ablation_arms(args.arms)
    benchmark.run()
    out = args.csv_out or os.path.join(args.out_dir, 'ablation.csv')
    benchmark.write_csv(out)
    print(benchmark)
    print("comparison written to {}".format(out))


def cmd_sweep(args):
    config = _config(args)
    benchmark = _benchmark(args, config)
    benchmark.add_sweep_arms(args.pairs, args.triplets)
    benchmark.run()
    out = args.csv_out or os.path.join(args.out_dir, 'sweep.csv')
    benchmark.write_csv(out)
    print("sweep written to {}".format(out))


def _int_list(value):
    try:
        return [int(item) for item in value.split(',') if item.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError("expected comma separated integers")


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('--config', default=None,
                        help="TOML or JSON config file")
    common.add_argument('--seed', type=int, default=None,
                        help="root seed overriding the config seeds")
    common.add_argument('--jobs', type=int, default=1,
                        help="worker processes across seeds / grid cells")
    common.add_argument('--out-dir', default='lect-out',
                        help="directory receiving every artifact")
    common.add_argument('--cache-dir', default=None,
                        help="embedding cache (default <out-dir>/cache)")
    common.add_argument('--log-level', default='INFO',
                        choices=['DEBUG', 'INFO', 'WARNING', 'ERROR'])

    source = argparse.ArgumentParser(add_help=False)
    source.add_argument('--graph', default=None, help="ingested graph file")
    source.add_argument('--synthetic', action='store_true',
                        help="use the built-in synthetic benchmark graph")

    training = argparse.ArgumentParser(add_help=False)
    training.add_argument('--epochs', type=int, default=None)
    training.add_argument('--donor-graph', default=None,
                          help="graph whose texts feed the random-text "
                               "ablation")

    parser = argparse.ArgumentParser(
        prog='lect', description="Pseudo-OOD contrastive training and "
                                 "energy-based OOD detection on "
                                 "text-attributed graphs.")
    sub = parser.add_subparsers(dest='command', required=True)

    p = sub.add_parser('ingest', parents=[common],
                       help="validate and canonicalize a graph file")
    p.add_argument('--graph', required=True)
    p.add_argument('--out', required=True)
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser('synth', parents=[common],
                       help="write the synthetic benchmark graph")
    p.add_argument('--out', required=True)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser('generate', parents=[common, source],
                       help="generate the pseudo-OOD batch")
    p.add_argument('--out', default=None)
    p.add_argument('--donor-graph', default=None)
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser('train', parents=[common, source, training],
                       help="train on the graph enhanced with the batch")
    p.add_argument('--batch', default=None)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser('eval', parents=[common, source],
                       help="evaluate a checkpoint")
    p.add_argument('--checkpoint', default=None)
    p.add_argument('--csv', action='store_true',
                   help="print a result row (percent, mean ± std)")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser('ablate', parents=[common, source, training],
                       help="compare the ablation arms over the seeds")
    p.add_argument('--arms', type=lambda v: v.split(','),
                   default=list(ABLATION_ARMS))
    p.add_argument('--csv-out', default=None)
    p.set_defaults(func=cmd_ablate)

    p = sub.add_parser('sweep', parents=[common, source, training],
                       help="grid over linked-pair and triplet counts")
    p.add_argument('--pairs', type=_int_list, default=[0, 100, 300])
    p.add_argument('--triplets', type=_int_list, default=[0, 100])
    p.add_argument('--csv-out', default=None)
    p.set_defaults(func=cmd_sweep)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    configure_logging(args.log_level, args.out_dir if args.command not in
                      ('ingest', 'synth') else None)
    try:
        args.func(args)
    except (LectError, OSError, TypeError, ValueError) as e:
        logger.error("{}", e)
        return 1
    return 0
