from .synthetic import synth_benchmark, synth_config, synthetic_graph, SyntheticBenchmark, SYNTH_CONFIG
