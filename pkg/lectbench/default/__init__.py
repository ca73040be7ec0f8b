from .benchmarks import *
